#include "realign/dram/dram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "realign/core/error.hpp"
#include "realign/core/log.hpp"

namespace realign::dram {

double edge_probability(const Vec& z_i, const Vec& z_k, double bandwidth) {
  if (bandwidth <= 0) throw ConfigError("edge_probability: bandwidth must be positive");
  if (z_i.size() != z_k.size()) throw ConfigError("edge_probability: dimension mismatch");
  double d2 = (z_i - z_k).squaredNorm();
  return std::exp(-d2 / (2.0 * bandwidth * bandwidth));
}

double median_pairwise_distance(const std::vector<Vec>& embeddings) {
  std::vector<double> dists;
  for (std::size_t i = 0; i < embeddings.size(); ++i)
    for (std::size_t k = i + 1; k < embeddings.size(); ++k)
      dists.push_back((embeddings[i] - embeddings[k]).norm());
  if (dists.empty()) return 1.0;
  std::sort(dists.begin(), dists.end());
  double med = dists.size() % 2 == 1
                   ? dists[dists.size() / 2]
                   : 0.5 * (dists[dists.size() / 2 - 1] + dists[dists.size() / 2]);
  return std::max(med, 1e-8);
}

std::vector<EdgeProb> enumerate_edges(const std::vector<Vec>& substructures, BandwidthMode mode,
                                      double fixed_bandwidth) {
  double h = mode == BandwidthMode::Median ? median_pairwise_distance(substructures)
                                           : fixed_bandwidth;
  std::vector<EdgeProb> edges;
  const int j = static_cast<int>(substructures.size());
  edges.reserve(static_cast<std::size_t>(j) * (j - 1) / 2);
  for (int i = 0; i < j; ++i)
    for (int k = i + 1; k < j; ++k)
      edges.push_back(EdgeProb{i, k, edge_probability(substructures[i], substructures[k], h), 0.0});
  return edges;
}

void sample_edges(std::vector<EdgeProb>& edges, RngStream& rng, SampleMode mode,
                  double temperature) {
  if (temperature <= 0) throw ConfigError("sample_edges: temperature must be positive");
  for (auto& e : edges) {
    switch (mode) {
      case SampleMode::Deterministic:
        e.sampled = e.theta >= 0.5 ? 1.0 : 0.0;
        break;
      case SampleMode::TrainHard:
        e.sampled = rng.next_bernoulli(e.theta) ? 1.0 : 0.0;
        break;
      case SampleMode::TrainRelaxed: {
        double theta = std::clamp(e.theta, 1e-6, 1.0 - 1e-6);
        double u = rng.next_open_uniform();
        if (u >= 1.0) u = 1.0 - 1e-12;
        double logit = std::log(theta / (1.0 - theta)) + std::log(u / (1.0 - u));
        e.sampled = srin::logistic(logit / temperature);
        break;
      }
    }
  }
}

Vec merge_embeddings(const Vec& z_i, const Vec& z_k, const Mat& merge_weight,
                     const Vec& merge_bias, srin::Activation act) {
  if (merge_weight.cols() != z_i.size() + z_k.size())
    throw ConfigError("merge map must accept the concatenated pair");
  Vec cat(z_i.size() + z_k.size());
  cat << z_i, z_k;
  Vec lin = merge_weight * cat + merge_bias;
  return srin::activation_apply(lin, act);
}

ReconstructedSubstructure reconstruct(const srin::SubstructureEmbedding& sub_i,
                                      const srin::SubstructureEmbedding& sub_k,
                                      const Mat& merge_weight, const Vec& merge_bias,
                                      srin::Activation act) {
  ReconstructedSubstructure r;
  r.parent_i = sub_i.center;
  r.parent_k = sub_k.center;
  r.vector = merge_embeddings(sub_i.vector, sub_k.vector, merge_weight, merge_bias, act);
  return r;
}

namespace {

double floored_sq(double sim) { return std::max(sim, 1e-6) * std::max(sim, 1e-6); }

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

AlignmentScore bcf(const Vec& z_new, const Vec& z_i, const Vec& z_k,
                   const std::vector<Vec>& partners) {
  if (partners.empty()) throw DataError("bcf: at least one partner substructure required");
  AlignmentScore s;
  const double j = static_cast<double>(partners.size());
  for (const auto& p : partners) {
    double sn = srin::similarity01(z_new, p);
    double si = srin::similarity01(z_i, p);
    double sk = srin::similarity01(z_k, p);
    s.sq_sim_new.push_back(sn * sn);
    double denom = si * si + sk * sk;
    if (denom < 1e-12) {
      logging::warn("bcf: degenerate denominator, flooring similarities at 1e-6");
      s.sq_sim_i.push_back(floored_sq(si));
      s.sq_sim_k.push_back(floored_sq(sk));
    } else {
      s.sq_sim_i.push_back(si * si);
      s.sq_sim_k.push_back(sk * sk);
    }
  }
  s.gamma = gamma_from_squared_sims(s.sq_sim_new, s.sq_sim_i, s.sq_sim_k);
  return s;
}

double gamma_from_squared_sims(const std::vector<double>& sq_new, const std::vector<double>& sq_i,
                               const std::vector<double>& sq_k) {
  if (sq_new.empty() || sq_new.size() != sq_i.size() || sq_new.size() != sq_k.size())
    throw DataError("gamma_from_squared_sims: misaligned similarity lists");
  const double j = static_cast<double>(sq_new.size());
  double gamma = 0.0;
  for (std::size_t t = 0; t < sq_new.size(); ++t)
    gamma += 2.0 * sq_new[t] / (j * (sq_i[t] + sq_k[t]));
  return gamma;
}

const char* core_choice_name(CoreChoice c) {
  switch (c) {
    case CoreChoice::Reconstructed: return "reconstructed";
    case CoreChoice::PartI: return "part_i";
    case CoreChoice::PartK: return "part_k";
  }
  return "reconstructed";
}

CoreSelection select_core(const AlignmentScore& score, const srin::SubstructureEmbedding& sub_i,
                          const srin::SubstructureEmbedding& sub_k,
                          const ReconstructedSubstructure& reconstructed, double edge_theta) {
  CoreSelection sel;
  sel.gamma = score.gamma;
  sel.parent_i = sub_i.center;
  sel.parent_k = sub_k.center;
  sel.edge_theta = edge_theta;
  if (score.gamma >= 1.0) {
    sel.choice = CoreChoice::Reconstructed;
    sel.embedding = reconstructed.vector;
    sel.complement = {sub_i.center, sub_k.center};
  } else if (mean_of(score.sq_sim_i) >= mean_of(score.sq_sim_k)) {
    sel.choice = CoreChoice::PartI;
    sel.embedding = sub_i.vector;
    sel.complement = {sub_k.center};
  } else {
    sel.choice = CoreChoice::PartK;
    sel.embedding = sub_k.vector;
    sel.complement = {sub_i.center};
  }
  return sel;
}

int m_cap_for(double rho, int substructure_count) {
  if (rho <= 0 || rho > 1) throw ConfigError("dram.rho must lie in (0, 1]");
  return std::max(1, static_cast<int>(std::ceil(rho * substructure_count)));
}

namespace {

double strongest_incident_theta(const std::vector<EdgeProb>& edges, int id) {
  double best = -1.0;
  for (const auto& e : edges)
    if (e.i == id || e.k == id) best = std::max(best, e.theta);
  return best >= 0 ? best : 0.5;
}

}  // namespace

SgibPartition sgib_partition(const std::vector<CoreSelection>& selections, int m_cap,
                             const std::vector<Vec>& substructures,
                             const std::vector<EdgeProb>& edges, RngStream& rng) {
  if (substructures.empty()) throw DataError("sgib_partition: no substructures");
  SgibPartition part;

  if (substructures.size() == 1) {
    logging::warn("sgib_partition: single substructure, using noise-replaced confounder");
    part.degenerate = true;
    part.core.push_back(substructures[0]);
    part.core_origin.push_back(0);
    part.core_prior.push_back(strongest_incident_theta(edges, 0));
    Vec mean, var;
    srin::compute_noise_stats(substructures, mean, var);
    Vec eta(mean.size());
    for (Eigen::Index t = 0; t < mean.size(); ++t)
      eta[t] = mean[t] + std::sqrt(std::max(0.0, var[t])) * rng.next_normal();
    part.confounder_ids.push_back(0);
    part.confounders.push_back(std::move(eta));
    part.confounder_prior.push_back(part.core_prior[0]);
    return part;
  }

  if (selections.empty()) throw DataError("sgib_partition: at least one selection required");

  std::vector<int> order(selections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return selections[a].gamma > selections[b].gamma;
  });
  int m = std::min<int>(m_cap, static_cast<int>(order.size()));

  std::vector<char> taken(substructures.size(), 0);
  for (int t = 0; t < m; ++t) {
    const CoreSelection& sel = selections[order[t]];
    part.chosen.push_back(order[t]);
    part.core.push_back(sel.embedding);
    switch (sel.choice) {
      case CoreChoice::Reconstructed:
        part.core_origin.push_back(-1);
        part.core_prior.push_back(sel.edge_theta);
        break;
      case CoreChoice::PartI:
        part.core_origin.push_back(sel.parent_i);
        part.core_prior.push_back(strongest_incident_theta(edges, sel.parent_i));
        taken[sel.parent_i] = 1;
        break;
      case CoreChoice::PartK:
        part.core_origin.push_back(sel.parent_k);
        part.core_prior.push_back(strongest_incident_theta(edges, sel.parent_k));
        taken[sel.parent_k] = 1;
        break;
    }
  }
  for (int id = 0; id < static_cast<int>(substructures.size()); ++id) {
    if (taken[id]) continue;
    part.confounder_ids.push_back(id);
    part.confounders.push_back(substructures[id]);
    part.confounder_prior.push_back(strongest_incident_theta(edges, id));
  }
  if (part.confounders.empty()) {
    // every substructure was promoted to a core; reuse the degenerate path
    logging::warn("sgib_partition: empty confounder set after selection");
    part.degenerate = true;
  }
  return part;
}

MoleculeEmbedding readout(const std::vector<Vec>& core_embeddings, const Mat& projection) {
  if (core_embeddings.empty()) throw DataError("readout: at least one core embedding required");
  MoleculeEmbedding h;
  Vec acc = Vec::Zero(projection.rows());
  for (const auto& z : core_embeddings) {
    if (projection.cols() != z.size()) throw ConfigError("readout: projection shape mismatch");
    acc += projection * z;
  }
  h.vector = acc / static_cast<double>(core_embeddings.size());
  return h;
}

}  // namespace realign::dram
