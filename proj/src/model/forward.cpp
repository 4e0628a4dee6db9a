#include <algorithm>
#include <cmath>
#include <numeric>

#include "realign/core/error.hpp"
#include "realign/core/log.hpp"
#include "realign/chem/topology.hpp"
#include "realign/model/model.hpp"

namespace realign::model {

namespace {

using ad::Graph;
using ad::Value;

Value apply_act(Graph& g, Value x, srin::Activation act) {
  switch (act) {
    case srin::Activation::Linear: return x;
    case srin::Activation::ReLU: return g.relu(x);
    case srin::Activation::Tanh: return g.tanh(x);
    case srin::Activation::Sigmoid: return g.sigmoid(x);
  }
  return x;
}

Value leaky_relu(Graph& g, Value x) {
  return g.sub(g.relu(x), g.scale(g.relu(g.neg(x)), 0.2));
}

const Value& leaf_of(const std::map<std::string, Value>& leaves, const std::string& name) {
  auto it = leaves.find(name);
  if (it == leaves.end()) throw ConfigError("missing tape leaf for parameter: " + name);
  return it->second;
}

Value gat_layer_tape(Graph& g, const chem::MolecularGraph& graph, Value z,
                     const std::map<std::string, Value>& leaves, const std::string& base) {
  Value h = g.matmul(leaf_of(leaves, base + "self"), z);
  Value attn_self = leaf_of(leaves, base + "attn_self");
  Value attn_neigh = leaf_of(leaves, base + "attn_neigh");
  const int n = graph.atom_count();
  std::vector<Value> out_cols;
  out_cols.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> nbrs = graph.neighbors_of(i);
    nbrs.push_back(i);
    Value self_score = g.dot(attn_self, g.column(h, i));
    std::vector<Value> scores;
    scores.reserve(nbrs.size());
    for (int u : nbrs)
      scores.push_back(leaky_relu(g, g.add(self_score, g.dot(attn_neigh, g.column(h, u)))));
    Value mx = scores[0];
    for (std::size_t t = 1; t < scores.size(); ++t) mx = g.vmax(mx, scores[t]);
    std::vector<Value> ws;
    Value denom;
    for (std::size_t t = 0; t < scores.size(); ++t) {
      ws.push_back(g.exp(g.sub(scores[t], mx)));
      denom = t == 0 ? ws[0] : g.add(denom, ws[t]);
    }
    Value acc;
    for (std::size_t t = 0; t < nbrs.size(); ++t) {
      Value term = g.smul(g.sdiv(ws[t], denom), g.column(h, nbrs[t]));
      acc = t == 0 ? term : g.add(acc, term);
    }
    out_cols.push_back(acc);
  }
  return g.concat_cols(out_cols);
}

// hidden x N embedding matrix after the message-passing stack
Value encode_tape(Graph& g, const std::map<std::string, Value>& leaves, const ModelConfig& cfg,
                  const chem::MolecularGraph& graph, RunMode mode, RngStream& rng) {
  Value z = g.constant(graph.features());
  Value adj = g.constant(graph.adjacency());
  Value gcn_adj;
  if (cfg.variant == srin::EncoderVariant::GCN)
    gcn_adj = g.constant(srin::gcn_normalized_adjacency(graph));

  for (int l = 0; l < cfg.layers; ++l) {
    std::string base = "enc." + std::to_string(l) + ".";
    Value next;
    switch (cfg.variant) {
      case srin::EncoderVariant::MPNN:
        next = g.add(g.matmul(leaf_of(leaves, base + "self"), z),
                     g.matmul(g.matmul(leaf_of(leaves, base + "neigh"), z), adj));
        break;
      case srin::EncoderVariant::GCN:
        next = g.matmul(g.matmul(leaf_of(leaves, base + "self"), z), gcn_adj);
        break;
      case srin::EncoderVariant::GIN:
        next = g.matmul(leaf_of(leaves, base + "self"), g.add(z, g.matmul(z, adj)));
        break;
      case srin::EncoderVariant::GAT:
        next = gat_layer_tape(g, graph, z, leaves, base);
        break;
    }
    z = apply_act(g, next, cfg.activation);
    if (mode == RunMode::TrainStochastic && cfg.dropout > 0 && l + 1 < cfg.layers) {
      double keep = 1.0 - cfg.dropout;
      Mat mask(z.rows(), z.cols());
      for (Eigen::Index r = 0; r < mask.rows(); ++r)
        for (Eigen::Index c = 0; c < mask.cols(); ++c)
          mask(r, c) = rng.next_bernoulli(keep) ? 1.0 / keep : 0.0;
      z = g.hadamard(z, g.constant(mask));
    }
  }
  return z;
}

// per-center substructure embeddings, Eq.-(9)-style aggregation
std::vector<Value> substructures_tape(Graph& g, const std::map<std::string, Value>& leaves,
                                      const ModelConfig& cfg, const chem::MolecularGraph& graph,
                                      Value z) {
  const int n = graph.atom_count();
  const int h = cfg.hidden_dim;
  Value proj = leaf_of(leaves, "sub.proj");

  // entropy weights per atom: column sums of sigmoid(z) .* log sigmoid(z)
  Value s = g.sigmoid(z);
  Value t_row = g.matmul(g.constant(Mat::Ones(1, h)), g.hadamard(s, g.log(s)));
  Value t_adj = g.matmul(t_row, g.constant(graph.adjacency()));

  std::vector<Value> subs;
  subs.reserve(n);
  for (int center = 0; center < n; ++center) {
    auto members = chem::k_hop_neighborhood(graph, center, cfg.k_hops);
    Value cat;
    if (members.empty()) {
      cat = g.concat_rows(g.column(z, center), g.constant(Mat::Zero(h, 1)));
    } else {
      int deg = static_cast<int>(graph.neighbors_of(center).size());
      double denom_val = t_adj.val()(0, center);
      Value coeff;
      if (std::fabs(denom_val) < 1e-12) {
        coeff = g.scalar_constant(1.0 / static_cast<double>(deg));
      } else {
        coeff = g.sdiv(g.entry(t_row, 0, center), g.entry(t_adj, 0, center));
      }
      Mat indicator = Mat::Zero(n, 1);
      for (auto [hop, u] : members) indicator(u, 0) = 1.0;
      Value nb_sum = g.matmul(z, g.constant(indicator));
      Value center_part = g.scale(g.column(z, center), static_cast<double>(members.size()));
      cat = g.concat_rows(center_part, g.smul(coeff, nb_sum));
    }
    subs.push_back(g.matmul(proj, cat));
  }
  return subs;
}

// (1 + cosine)/2 with the same zero-vector guard as srin::similarity01
Value sim01_tape(Graph& g, Value a, Value b) {
  Value na2 = g.sqnorm(a);
  Value nb2 = g.sqnorm(b);
  double norm_prod = std::sqrt(na2.val()(0, 0)) * std::sqrt(nb2.val()(0, 0));
  if (norm_prod < 1e-12) return g.scalar_constant(0.5);
  Value cosine = g.sdiv(g.dot(a, b), g.sqrt(g.hadamard(na2, nb2)));
  return g.scale(g.add_scalar(cosine, 1.0), 0.5);
}

double logit_of(double p) { return std::log(p / (1.0 - p)); }

// pre-adaptation gates: relaxed Bernoulli(logistic(R)) during training,
// threshold at evaluation
std::vector<Value> filter_tape(Graph& g, const ModelConfig& cfg, const std::vector<Value>& own,
                               const std::vector<Value>& partner_raw, RunMode mode,
                               RngStream& rng, const NoiseStats& stats,
                               const std::vector<Value>& other_raw) {
  std::vector<Value> filtered;
  filtered.reserve(own.size());

  Vec mean, var;
  if (mode == RunMode::TrainStochastic) {
    if (stats.valid()) {
      mean = stats.mean;
      var = stats.variance;
    } else {
      std::vector<Vec> pop;
      for (const auto& v : own) pop.push_back(v.val().col(0));
      for (const auto& v : other_raw) pop.push_back(v.val().col(0));
      srin::compute_noise_stats(pop, mean, var);
    }
  }

  for (const auto& z : own) {
    Value r;
    for (std::size_t j = 0; j < partner_raw.size(); ++j) {
      Value sim = sim01_tape(g, z, partner_raw[j]);
      r = j == 0 ? sim : g.add(r, sim);
    }
    r = g.scale(r, 2.0);  // identity form of the pre-adaptation sum

    if (mode == RunMode::Deterministic) {
      double keep_prob = srin::logistic(r.val()(0, 0));
      if (keep_prob >= 0.5) {
        filtered.push_back(z);
      } else {
        // pure replacement by the population mean (never reached with the
        // cosine-based similarity, which keeps R >= 0)
        filtered.push_back(g.constant(stats.valid() ? Mat(stats.mean) : z.val()));
      }
    } else {
      double u = rng.next_open_uniform();
      Value lambda = g.sigmoid(g.scale(g.add_scalar(r, logit_of(u)), 1.0 / cfg.temperature));
      Vec eta(mean.size());
      for (Eigen::Index t = 0; t < eta.size(); ++t)
        eta[t] = mean[t] + std::sqrt(std::max(0.0, var[t])) * rng.next_normal();
      Value keep_part = g.smul(lambda, z);
      Value noise_part = g.smul(g.sub(g.scalar_constant(1.0), lambda), g.constant(eta));
      filtered.push_back(g.add(keep_part, noise_part));
    }
  }
  return filtered;
}

struct TapeEdge {
  int i = 0;
  int k = 0;
  Value theta;
  bool candidate = false;
};

struct TapeSelection {
  Value embedding;
  double gamma = 0.0;
  dram::CoreChoice choice = dram::CoreChoice::Reconstructed;
  int parent_i = 0;
  int parent_k = 0;
  Value prior;  // generating-pair theta
};

Value kl_bernoulli_tape(Graph& g, Value p, Value e) {
  Value one = g.scalar_constant(1.0);
  Value pc = g.clamp(p, loss::kProbEps, 1.0 - loss::kProbEps);
  Value ec = g.clamp(e, loss::kProbEps, 1.0 - loss::kProbEps);
  Value first = g.hadamard(pc, g.log(g.sdiv(pc, ec)));
  Value second = g.hadamard(g.sub(one, pc), g.log(g.sdiv(g.sub(one, pc), g.sub(one, ec))));
  return g.add(first, second);
}

Value confusion_tape(Graph& g, Value core, const std::vector<Value>& confounders) {
  Value m = g.mean(confounders);
  double d = static_cast<double>(core.rows());
  Value raw = g.sigmoid(g.scale(g.dot(core, m), 1.0 / std::sqrt(d)));
  return g.clamp(raw, loss::kProbEps, 1.0 - loss::kProbEps);
}

struct TapeDram {
  Value h;
  Value kl;
};

TapeDram dram_tape(Graph& g, const std::map<std::string, Value>& leaves, const ModelConfig& cfg,
                   const std::vector<Value>& own, const std::vector<Value>& partner,
                   RunMode mode, RngStream& rng) {
  TapeDram out;
  const int j_own = static_cast<int>(own.size());
  Value readout_w = leaf_of(leaves, "readout.w");

  auto readout_mean = [&](const std::vector<Value>& cores) {
    Value acc;
    for (std::size_t m = 0; m < cores.size(); ++m) {
      Value p = g.matmul(readout_w, cores[m]);
      acc = m == 0 ? p : g.add(acc, p);
    }
    return g.scale(acc, 1.0 / static_cast<double>(cores.size()));
  };

  if (j_own == 1) {
    logging::debug("dram_tape: single substructure, degenerate partition");
    out.h = readout_mean(own);
    out.kl = g.scalar_constant(0.0);
    return out;
  }

  // pairwise Gaussian-kernel edge probabilities
  std::vector<TapeEdge> edges;
  std::vector<Value> dists;
  std::vector<Value> d2s;
  for (int i = 0; i < j_own; ++i) {
    for (int k = i + 1; k < j_own; ++k) {
      Value d2 = g.sqnorm(g.sub(own[i], own[k]));
      d2s.push_back(d2);
      dists.push_back(g.sqrt(d2));
      edges.push_back(TapeEdge{i, k, Value{}, false});
    }
  }
  Value bw;
  if (cfg.bandwidth_mode == dram::BandwidthMode::Median) {
    Value med = g.median(dists);
    bw = med.val()(0, 0) < 1e-8 ? g.scalar_constant(1e-8) : med;
  } else {
    bw = g.scalar_constant(cfg.bandwidth);
  }
  Value two_h2 = g.scale(g.hadamard(bw, bw), 2.0);
  for (std::size_t e = 0; e < edges.size(); ++e)
    edges[e].theta = g.exp(g.neg(g.sdiv(d2s[e], two_h2)));

  // edge sampling (value-level decision; theta reaches the loss through the
  // KL prior, not through the gate itself)
  int n_candidates = 0;
  for (auto& e : edges) {
    double theta_val = e.theta.val()(0, 0);
    if (mode == RunMode::Deterministic) {
      e.candidate = theta_val >= 0.5;
    } else {
      double theta_c = std::clamp(theta_val, 1e-6, 1.0 - 1e-6);
      double u = rng.next_open_uniform();
      e.candidate = (logit_of(theta_c) + logit_of(u)) / cfg.temperature > 0.0;
    }
    n_candidates += e.candidate ? 1 : 0;
  }
  if (n_candidates == 0) {
    std::size_t best = 0;
    for (std::size_t e = 1; e < edges.size(); ++e)
      if (edges[e].theta.val()(0, 0) > edges[best].theta.val()(0, 0)) best = e;
    edges[best].candidate = true;
    logging::debug("dram_tape: no sampled edges, forcing the max-theta pair");
  }

  // squared similarities against the partner, shared across candidates
  const int j_partner = static_cast<int>(partner.size());
  std::vector<std::vector<Value>> sq(j_own, std::vector<Value>(j_partner));
  std::vector<std::vector<bool>> sq_ready(j_own, std::vector<bool>(j_partner, false));
  auto sq_sim = [&](int i, int j) {
    if (!sq_ready[i][j]) {
      Value s = sim01_tape(g, own[i], partner[j]);
      sq[i][j] = g.hadamard(s, s);
      sq_ready[i][j] = true;
    }
    return sq[i][j];
  };

  Value merge_w = leaf_of(leaves, "merge.w");
  Value merge_b = leaf_of(leaves, "merge.b");

  std::vector<TapeSelection> selections;
  for (const auto& e : edges) {
    if (!e.candidate) continue;
    Value z_new = apply_act(
        g, g.add(g.matmul(merge_w, g.concat_rows(own[e.i], own[e.k])), merge_b),
        cfg.activation);

    double gamma_val = 0.0;
    std::vector<double> mean_parts(2, 0.0);
    Value gamma;
    for (int j = 0; j < j_partner; ++j) {
      Value sq_new;
      {
        Value s = sim01_tape(g, z_new, partner[j]);
        sq_new = g.hadamard(s, s);
      }
      Value sq_i = sq_sim(e.i, j);
      Value sq_k = sq_sim(e.k, j);
      double denom_val = sq_i.val()(0, 0) + sq_k.val()(0, 0);
      Value term;
      if (denom_val < 1e-12) {
        double si = std::max(std::sqrt(sq_i.val()(0, 0)), 1e-6);
        double sk = std::max(std::sqrt(sq_k.val()(0, 0)), 1e-6);
        term = g.sdiv(g.scale(sq_new, 2.0),
                      g.scalar_constant(static_cast<double>(j_partner) * (si * si + sk * sk)));
      } else {
        term = g.sdiv(g.scale(sq_new, 2.0),
                      g.scale(g.add(sq_i, sq_k), static_cast<double>(j_partner)));
      }
      gamma = j == 0 ? term : g.add(gamma, term);
      mean_parts[0] += sq_i.val()(0, 0);
      mean_parts[1] += sq_k.val()(0, 0);
    }
    gamma_val = gamma.val()(0, 0);

    TapeSelection sel;
    sel.gamma = gamma_val;
    sel.parent_i = e.i;
    sel.parent_k = e.k;
    sel.prior = e.theta;
    if (gamma_val >= 1.0) {
      sel.choice = dram::CoreChoice::Reconstructed;
      sel.embedding = z_new;
    } else if (mean_parts[0] >= mean_parts[1]) {
      sel.choice = dram::CoreChoice::PartI;
      sel.embedding = own[e.i];
    } else {
      sel.choice = dram::CoreChoice::PartK;
      sel.embedding = own[e.k];
    }
    selections.push_back(std::move(sel));
  }

  // S-GIB partition: top-M by gamma, remainder as confounders
  std::vector<int> order(selections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return selections[a].gamma > selections[b].gamma;
  });
  int m_cap = dram::m_cap_for(cfg.rho, j_own);
  int m = std::min<int>(m_cap, static_cast<int>(order.size()));

  auto strongest_incident = [&](int id) {
    int best = -1;
    double best_val = -1.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].i != id && edges[e].k != id) continue;
      double v = edges[e].theta.val()(0, 0);
      if (v > best_val) {
        best_val = v;
        best = static_cast<int>(e);
      }
    }
    return best >= 0 ? edges[best].theta : g.scalar_constant(0.5);
  };

  std::vector<Value> cores, core_priors;
  std::vector<char> taken(j_own, 0);
  for (int t = 0; t < m; ++t) {
    const TapeSelection& sel = selections[order[t]];
    cores.push_back(sel.embedding);
    switch (sel.choice) {
      case dram::CoreChoice::Reconstructed:
        core_priors.push_back(sel.prior);
        break;
      case dram::CoreChoice::PartI:
        core_priors.push_back(strongest_incident(sel.parent_i));
        taken[sel.parent_i] = 1;
        break;
      case dram::CoreChoice::PartK:
        core_priors.push_back(strongest_incident(sel.parent_k));
        taken[sel.parent_k] = 1;
        break;
    }
  }
  std::vector<Value> confounders, conf_priors;
  for (int id = 0; id < j_own; ++id) {
    if (taken[id]) continue;
    confounders.push_back(own[id]);
    conf_priors.push_back(strongest_incident(id));
  }

  out.h = readout_mean(cores);
  if (confounders.empty()) {
    logging::debug("dram_tape: empty confounder set, degenerate KL");
    out.kl = g.scalar_constant(0.0);
    return out;
  }

  Value core_side;
  for (std::size_t t = 0; t < cores.size(); ++t) {
    Value kl = kl_bernoulli_tape(g, confusion_tape(g, cores[t], confounders), core_priors[t]);
    core_side = t == 0 ? kl : g.add(core_side, kl);
  }
  core_side = g.scale(core_side, 1.0 / static_cast<double>(cores.size()));
  Value conf_side;
  for (std::size_t t = 0; t < confounders.size(); ++t) {
    Value kl = kl_bernoulli_tape(g, confusion_tape(g, confounders[t], cores), conf_priors[t]);
    conf_side = t == 0 ? kl : g.add(conf_side, kl);
  }
  conf_side = g.scale(conf_side, 1.0 / static_cast<double>(confounders.size()));
  out.kl = g.vmin(core_side, conf_side);
  return out;
}

}  // namespace

PairForward forward_pair(ad::Graph& g, const std::map<std::string, Value>& leaves,
                         const ModelConfig& cfg, const chem::MolecularGraph& gx,
                         const chem::MolecularGraph& gy, double label, RunMode mode,
                         RngStream& rng, const NoiseStats& stats) {
  Value zx = encode_tape(g, leaves, cfg, gx, mode, rng);
  Value zy = encode_tape(g, leaves, cfg, gy, mode, rng);
  std::vector<Value> subs_x = substructures_tape(g, leaves, cfg, gx, zx);
  std::vector<Value> subs_y = substructures_tape(g, leaves, cfg, gy, zy);

  std::vector<Value> fx = filter_tape(g, cfg, subs_x, subs_y, mode, rng, stats, subs_y);
  std::vector<Value> fy = filter_tape(g, cfg, subs_y, subs_x, mode, rng, stats, subs_x);

  PairForward out;
  Value hx, hy;
  if (cfg.ablate_dram) {
    Value readout_w = leaf_of(leaves, "readout.w");
    auto mean_readout = [&](const std::vector<Value>& subs) {
      Value acc;
      for (std::size_t m = 0; m < subs.size(); ++m) {
        Value p = g.matmul(readout_w, subs[m]);
        acc = m == 0 ? p : g.add(acc, p);
      }
      return g.scale(acc, 1.0 / static_cast<double>(subs.size()));
    };
    hx = mean_readout(fx);
    hy = mean_readout(fy);
    out.kl_x = g.scalar_constant(0.0);
    out.kl_y = g.scalar_constant(0.0);
  } else {
    TapeDram dx = dram_tape(g, leaves, cfg, fx, fy, mode, rng);
    TapeDram dy = dram_tape(g, leaves, cfg, fy, fx, mode, rng);
    hx = dx.h;
    hy = dy.h;
    out.kl_x = dx.kl;
    out.kl_y = dy.kl;
  }

  if (cfg.task == loss::Task::DDI) {
    if (label != 0.0 && label != 1.0)
      throw DataError("DDI task requires binary labels, got " + std::to_string(label));
    Value w = leaf_of(leaves, "head.ddi.w");
    if (cfg.symmetric_head) w = g.scale(g.add(w, g.transpose(w)), 0.5);
    Value logit = g.add(g.dot(hx, g.matmul(w, hy)), leaf_of(leaves, "head.ddi.b"));
    out.pred_loss = g.sub(g.softplus(logit), g.scale(logit, label));
    out.prediction = srin::logistic(logit.val()(0, 0));
  } else {
    Value w = leaf_of(leaves, "head.mi.w");
    Value pred = g.add(g.dot(w, g.concat_rows(hx, hy)), leaf_of(leaves, "head.mi.b"));
    out.pred_loss = g.abs(g.sub(pred, g.scalar_constant(label)));
    out.prediction = pred.val()(0, 0);
  }
  return out;
}

}  // namespace realign::model
