#include <algorithm>

#include "realign/core/error.hpp"
#include "realign/core/log.hpp"
#include "realign/model/model.hpp"

namespace realign::model {

namespace {

struct MoleculeState {
  std::vector<srin::SubstructureEmbedding> raw;
  std::vector<Vec> filtered;
};

MoleculeState molecule_state(const ParamStore& params, const ModelConfig& cfg,
                             const chem::MolecularGraph& graph) {
  MoleculeState st;
  auto z = srin::gnn_forward(graph, params.encoder(cfg));
  st.raw = srin::extract_substructures(graph, z, cfg.k_hops, params.at("sub.proj"));
  return st;
}

// DRAM pipeline for one molecule against the partner's filtered
// substructures; returns the readout embedding and the KL bound.
std::pair<Vec, double> dram_pipeline(const ParamStore& params, const ModelConfig& cfg,
                                     const std::vector<Vec>& own,
                                     const std::vector<Vec>& partner, RunMode mode,
                                     RngStream& rng) {
  auto edges = dram::enumerate_edges(own, cfg.bandwidth_mode, cfg.bandwidth);
  dram::sample_edges(edges, rng,
                     mode == RunMode::Deterministic ? dram::SampleMode::Deterministic
                                                    : dram::SampleMode::TrainHard,
                     cfg.temperature);

  std::vector<dram::CoreSelection> selections;
  if (own.size() >= 2) {
    std::vector<const dram::EdgeProb*> candidates;
    for (const auto& e : edges)
      if (e.sampled >= 0.5) candidates.push_back(&e);
    if (candidates.empty() && !edges.empty()) {
      // no sampled reconstruction edge: fall back to the strongest theta
      const dram::EdgeProb* best = &edges[0];
      for (const auto& e : edges)
        if (e.theta > best->theta) best = &e;
      candidates.push_back(best);
      logging::debug("dram: no sampled edges, forcing the max-theta pair");
    }
    for (const dram::EdgeProb* e : candidates) {
      srin::SubstructureEmbedding si, sk;
      si.center = e->i;
      si.vector = own[e->i];
      sk.center = e->k;
      sk.vector = own[e->k];
      auto rec = dram::reconstruct(si, sk, params.at("merge.w"), params.at("merge.b").col(0),
                                   cfg.activation);
      auto score = dram::bcf(rec.vector, si.vector, sk.vector, partner);
      selections.push_back(dram::select_core(score, si, sk, rec, e->theta));
    }
  }
  auto part = dram::sgib_partition(selections, dram::m_cap_for(cfg.rho, (int)own.size()), own,
                                   edges, rng);
  auto h = dram::readout(part.core, params.at("readout.w"));
  double kl = loss::kl_upper_bound(part);
  return {h.vector, kl};
}

}  // namespace

std::vector<Vec> molecule_substructures(const ParamStore& params, const ModelConfig& cfg,
                                        const chem::MolecularGraph& graph) {
  auto st = molecule_state(params, cfg, graph);
  std::vector<Vec> out;
  out.reserve(st.raw.size());
  for (auto& s : st.raw) out.push_back(std::move(s.vector));
  return out;
}

PlainOutput plain_forward_pair(const ParamStore& params, const ModelConfig& cfg,
                               const chem::MolecularGraph& gx, const chem::MolecularGraph& gy,
                               double label, RunMode mode, RngStream& rng,
                               const NoiseStats& stats) {
  cfg.validate();
  MoleculeState sx = molecule_state(params, cfg, gx);
  MoleculeState sy = molecule_state(params, cfg, gy);

  // pre-adaptation: interaction scores against the partner substructures,
  // then noise rejection
  auto filter = [&](MoleculeState& own, const MoleculeState& other) {
    std::vector<Vec> partner_vecs;
    for (const auto& s : other.raw) partner_vecs.push_back(s.vector);
    std::vector<srin::InteractionScore> scores;
    for (std::size_t i = 0; i < own.raw.size(); ++i)
      scores.push_back(
          srin::interaction_probability(own.raw[i].vector, partner_vecs, (int)i));
    srin::NoiseFilterConfig nf;
    nf.mode = mode == RunMode::Deterministic ? srin::NoiseFilterMode::Deterministic
                                             : srin::NoiseFilterMode::Stochastic;
    if (stats.valid()) {
      nf.mean = stats.mean;
      nf.variance = stats.variance;
    } else {
      std::vector<Vec> pop;
      for (const auto& s : own.raw) pop.push_back(s.vector);
      for (const auto& s : other.raw) pop.push_back(s.vector);
      srin::compute_noise_stats(pop, nf.mean, nf.variance);
    }
    own.filtered = srin::noise_filter(own.raw, scores, nf, rng);
  };
  filter(sx, sy);
  filter(sy, sx);

  PlainOutput out;
  out.substructures_x = static_cast<int>(sx.filtered.size());
  out.substructures_y = static_cast<int>(sy.filtered.size());

  Vec hx, hy;
  double kl_x = 0.0, kl_y = 0.0;
  if (cfg.ablate_dram) {
    hx = dram::readout(sx.filtered, params.at("readout.w")).vector;
    hy = dram::readout(sy.filtered, params.at("readout.w")).vector;
  } else {
    std::tie(hx, kl_x) = dram_pipeline(params, cfg, sx.filtered, sy.filtered, mode, rng);
    std::tie(hy, kl_y) = dram_pipeline(params, cfg, sy.filtered, sx.filtered, mode, rng);
  }

  auto head = params.head(cfg);
  double pred_loss = loss::prediction_loss(head, hx, hy, label, cfg.task);
  out.parts = loss::total_loss(pred_loss, kl_x, kl_y, cfg.weights);
  out.prediction = cfg.task == loss::Task::DDI ? head.ddi_probability(hx, hy)
                                               : head.mi_predict(hx, hy);

  out.interaction.resize(out.substructures_x, out.substructures_y);
  for (int i = 0; i < out.substructures_x; ++i)
    for (int j = 0; j < out.substructures_y; ++j)
      out.interaction(i, j) = srin::similarity01(sx.filtered[i], sy.filtered[j]);
  return out;
}

}  // namespace realign::model
