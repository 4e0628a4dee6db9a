#include "realign/srin/srin.hpp"

#include <algorithm>
#include <cmath>

#include "realign/core/log.hpp"
#include "realign/chem/topology.hpp"

namespace realign::srin {

double logistic(double x) {
  if (x >= 0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

EncoderVariant encoder_variant_from_name(const std::string& name) {
  if (name == "mpnn") return EncoderVariant::MPNN;
  if (name == "gcn") return EncoderVariant::GCN;
  if (name == "gin") return EncoderVariant::GIN;
  if (name == "gat") return EncoderVariant::GAT;
  throw ConfigError("unknown encoder variant: " + name);
}

const char* encoder_variant_name(EncoderVariant v) {
  switch (v) {
    case EncoderVariant::MPNN: return "mpnn";
    case EncoderVariant::GCN: return "gcn";
    case EncoderVariant::GIN: return "gin";
    case EncoderVariant::GAT: return "gat";
  }
  return "mpnn";
}

Activation activation_from_name(const std::string& name) {
  if (name == "linear") return Activation::Linear;
  if (name == "relu") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw ConfigError("unknown activation: " + name);
}

Mat activation_apply(const Mat& x, Activation act) {
  switch (act) {
    case Activation::Linear: return x;
    case Activation::ReLU: return x.cwiseMax(0.0);
    case Activation::Tanh: return x.array().tanh().matrix();
    case Activation::Sigmoid:
      return x.unaryExpr([](double v) { return logistic(v); });
  }
  return x;
}

void EncoderParams::validate(int input_dim) const {
  if (layers.empty()) throw ConfigError("encoder needs at least one layer");
  if (hidden_dim <= 0) throw ConfigError("encoder hidden_dim must be positive");
  int in = input_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& w = layers[l];
    if (w.w_self.rows() != hidden_dim || w.w_self.cols() != in)
      throw ConfigError("encoder layer " + std::to_string(l) + ": W_n shape mismatch");
    if (variant == EncoderVariant::MPNN &&
        (w.w_neigh.rows() != hidden_dim || w.w_neigh.cols() != in))
      throw ConfigError("encoder layer " + std::to_string(l) + ": W_u shape mismatch");
    if (variant == EncoderVariant::GAT &&
        (w.attn_self.size() != hidden_dim || w.attn_neigh.size() != hidden_dim))
      throw ConfigError("encoder layer " + std::to_string(l) + ": attention shape mismatch");
    in = hidden_dim;
  }
}

EncoderParams init_encoder(EncoderVariant variant, Activation act, int layer_count, int input_dim,
                           int hidden_dim, RngStream& rng) {
  if (layer_count < 1) throw ConfigError("encoder layer count must be >= 1");
  EncoderParams p;
  p.variant = variant;
  p.activation = act;
  p.hidden_dim = hidden_dim;
  int in = input_dim;
  for (int l = 0; l < layer_count; ++l) {
    LayerWeights w;
    double s = 1.0 / std::sqrt(static_cast<double>(in));
    w.w_self = Mat::NullaryExpr(hidden_dim, in, [&]() { return rng.next_normal() * s; });
    w.w_neigh = Mat::NullaryExpr(hidden_dim, in, [&]() { return rng.next_normal() * s; });
    if (variant == EncoderVariant::GAT) {
      double sa = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
      w.attn_self = Vec::NullaryExpr(hidden_dim, [&]() { return rng.next_normal() * sa; });
      w.attn_neigh = Vec::NullaryExpr(hidden_dim, [&]() { return rng.next_normal() * sa; });
    }
    p.layers.push_back(std::move(w));
    in = hidden_dim;
  }
  return p;
}

Mat gcn_normalized_adjacency(const chem::MolecularGraph& g) {
  const int n = g.atom_count();
  Mat a = g.adjacency() + Mat::Identity(n, n);
  Vec d = a.rowwise().sum();
  Vec dinv = d.unaryExpr([](double v) { return v > 0 ? 1.0 / std::sqrt(v) : 0.0; });
  return dinv.asDiagonal() * a * dinv.asDiagonal();
}

namespace {

Mat gat_layer(const chem::MolecularGraph& g, const Mat& z, const LayerWeights& w) {
  const int n = g.atom_count();
  Mat h = w.w_self * z;  // hidden x N
  Mat out(h.rows(), n);
  auto leaky = [](double v) { return v > 0 ? v : 0.2 * v; };
  for (int i = 0; i < n; ++i) {
    std::vector<int> nbrs = g.neighbors_of(i);
    nbrs.push_back(i);  // self loop
    double self_score = w.attn_self.dot(h.col(i));
    std::vector<double> e(nbrs.size());
    double mx = -1e300;
    for (std::size_t t = 0; t < nbrs.size(); ++t) {
      e[t] = leaky(self_score + w.attn_neigh.dot(h.col(nbrs[t])));
      mx = std::max(mx, e[t]);
    }
    double denom = 0;
    for (double& v : e) {
      v = std::exp(v - mx);
      denom += v;
    }
    Vec acc = Vec::Zero(h.rows());
    for (std::size_t t = 0; t < nbrs.size(); ++t) acc += (e[t] / denom) * h.col(nbrs[t]);
    out.col(i) = acc;
  }
  return out;
}

}  // namespace

std::vector<Vec> gnn_forward(const chem::MolecularGraph& graph, const EncoderParams& params) {
  const Mat& x = graph.features();
  params.validate(static_cast<int>(x.rows()));
  Mat z = x;
  const Mat& a = graph.adjacency();

  for (const auto& w : params.layers) {
    Mat next;
    switch (params.variant) {
      case EncoderVariant::MPNN:
        next = w.w_self * z + (w.w_neigh * z) * a;
        break;
      case EncoderVariant::GCN:
        next = w.w_self * z * gcn_normalized_adjacency(graph);
        break;
      case EncoderVariant::GIN:
        next = w.w_self * (z + z * a);
        break;
      case EncoderVariant::GAT:
        next = gat_layer(graph, z, w);
        break;
    }
    z = activation_apply(next, params.activation);
  }

  if (!z.allFinite()) throw NumericError("gnn_forward produced non-finite embeddings");
  std::vector<Vec> out;
  out.reserve(graph.atom_count());
  for (int i = 0; i < graph.atom_count(); ++i) out.push_back(z.col(i));
  return out;
}

namespace {

double entropy_weight(const Vec& z) {
  double acc = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double s = logistic(z[i]);
    acc += s * std::log(s);
  }
  return acc;
}

}  // namespace

double struct_coeff(const Vec& center_embedding, const std::vector<Vec>& neighbor_embeddings) {
  if (neighbor_embeddings.empty())
    throw DegenerateNeighborhood("struct_coeff: empty neighbor set");
  double num = entropy_weight(center_embedding);
  double denom = 0;
  for (const auto& z : neighbor_embeddings) denom += entropy_weight(z);
  if (std::fabs(denom) < 1e-12)
    throw DegenerateNeighborhood("struct_coeff: denominator below 1e-12");
  return num / denom;
}

double struct_coeff_or_uniform(const Vec& center_embedding,
                               const std::vector<Vec>& neighbor_embeddings) {
  try {
    return struct_coeff(center_embedding, neighbor_embeddings);
  } catch (const DegenerateNeighborhood&) {
    return 1.0 / static_cast<double>(std::max<std::size_t>(1, neighbor_embeddings.size()));
  }
}

Vec substructure_aggregate(const Vec& center_embedding, const std::vector<Vec>& member_embeddings,
                           double coeff, const Mat& projection) {
  const Eigen::Index d = center_embedding.size();
  if (projection.cols() != 2 * d)
    throw ConfigError("substructure_aggregate: projection must accept concatenated pairs");
  Vec cat = Vec::Zero(2 * d);
  if (member_embeddings.empty()) {
    cat.head(d) = center_embedding;
  } else {
    Vec nb_sum = Vec::Zero(d);
    for (const auto& z : member_embeddings) nb_sum += z;
    cat.head(d) = static_cast<double>(member_embeddings.size()) * center_embedding;
    cat.tail(d) = coeff * nb_sum;
  }
  return projection * cat;
}

std::vector<SubstructureEmbedding> extract_substructures(const chem::MolecularGraph& graph,
                                                         const std::vector<Vec>& node_embeddings,
                                                         int k, const Mat& projection) {
  if (static_cast<int>(node_embeddings.size()) != graph.atom_count())
    throw ConfigError("extract_substructures: embedding count mismatch");
  if (graph.atom_count() == 0) return {};
  const Eigen::Index d = node_embeddings[0].size();
  if (projection.cols() != 2 * d)
    throw ConfigError("extract_substructures: projection must accept concatenated pairs");

  std::vector<SubstructureEmbedding> out;
  out.reserve(graph.atom_count());
  for (int center = 0; center < graph.atom_count(); ++center) {
    SubstructureEmbedding s;
    s.center = center;
    s.k = k;
    s.members = chem::k_hop_neighborhood(graph, center, k);

    double coeff = 0.0;
    std::vector<Vec> member_embeddings;
    member_embeddings.reserve(s.members.size());
    for (auto [hop, u] : s.members) member_embeddings.push_back(node_embeddings[u]);
    if (!s.members.empty()) {
      std::vector<Vec> one_hop;
      for (int u : graph.neighbors_of(center)) one_hop.push_back(node_embeddings[u]);
      coeff = struct_coeff_or_uniform(node_embeddings[center], one_hop);
    }
    s.vector = substructure_aggregate(node_embeddings[center], member_embeddings, coeff,
                                      projection);
    out.push_back(std::move(s));
  }
  return out;
}

double similarity01(const Vec& a, const Vec& b) {
  double na = a.norm(), nb = b.norm();
  double denom = na * nb;
  double cosine = denom < 1e-12 ? 0.0 : a.dot(b) / denom;
  return (1.0 + cosine) / 2.0;
}

InteractionScore interaction_probability(const Vec& z_xi, const std::vector<Vec>& partners,
                                         int substructure_id) {
  if (partners.empty()) throw DataError("interaction_probability: empty partner set");
  const int j = static_cast<int>(partners.size());
  InteractionScore score;
  score.substructure_id = substructure_id;
  score.partner_count = j;
  std::vector<double> sims(j);
  for (int t = 0; t < j; ++t) sims[t] = similarity01(z_xi, partners[t]);

  if (j == 1) {
    // algebraic limit of the J >= 2 form
    logging::debug("interaction_probability: single-partner degenerate case");
    score.value = 2.0 * sims[0];
    return score;
  }
  double acc = 0;
  for (int t = 0; t < j; ++t) {
    double others = 0;
    for (int u = 0; u < j; ++u)
      if (u != t) others += sims[u];
    acc += sims[t] + others / static_cast<double>(j - 1);
  }
  score.value = acc;
  return score;
}

void compute_noise_stats(const std::vector<Vec>& population, Vec& mean, Vec& variance) {
  if (population.empty()) throw DataError("compute_noise_stats: empty population");
  const Eigen::Index d = population[0].size();
  mean = Vec::Zero(d);
  for (const auto& v : population) mean += v;
  mean /= static_cast<double>(population.size());
  variance = Vec::Zero(d);
  for (const auto& v : population) variance += (v - mean).cwiseProduct(v - mean);
  variance /= static_cast<double>(population.size());
}

std::vector<Vec> noise_filter(const std::vector<SubstructureEmbedding>& substructures,
                              const std::vector<InteractionScore>& scores,
                              const NoiseFilterConfig& config, RngStream& rng) {
  if (substructures.size() != scores.size())
    throw ConfigError("noise_filter: scores misaligned with substructures");
  if (substructures.empty()) return {};
  const Eigen::Index d = substructures[0].vector.size();
  if (config.mean.size() != d || config.variance.size() != d)
    throw ConfigError("noise_filter: population stats dimension mismatch");

  std::vector<Vec> out;
  out.reserve(substructures.size());
  for (std::size_t i = 0; i < substructures.size(); ++i) {
    double keep_prob = logistic(scores[i].value);
    bool keep;
    if (config.mode == NoiseFilterMode::Deterministic) {
      keep = keep_prob >= config.threshold;
    } else {
      keep = rng.next_bernoulli(keep_prob);
    }
    if (keep) {
      out.push_back(substructures[i].vector);
    } else if (config.mode == NoiseFilterMode::Deterministic) {
      // pure replacement: the expectation of the noise law
      out.push_back(config.mean);
    } else {
      Vec eta(d);
      for (Eigen::Index t = 0; t < d; ++t)
        eta[t] = config.mean[t] + std::sqrt(std::max(0.0, config.variance[t])) * rng.next_normal();
      out.push_back(std::move(eta));
    }
  }
  return out;
}

}  // namespace realign::srin
