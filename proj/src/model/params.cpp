#include "realign/model/model.hpp"

#include <cmath>

#include "realign/core/error.hpp"
#include "realign/chem/features.hpp"

namespace realign::model {

void ModelConfig::validate() const {
  if (layers < 1) throw ConfigError("encoder.layers must be >= 1");
  if (hidden_dim < 1) throw ConfigError("encoder.hidden_dim must be >= 1");
  if (k_hops < 1) throw ConfigError("substructure.k_hops must be >= 1");
  if (rho <= 0 || rho > 1) throw ConfigError("dram.rho must lie in (0, 1]");
  if (bandwidth_mode == dram::BandwidthMode::Fixed && bandwidth <= 0)
    throw ConfigError("dram.bandwidth must be positive in fixed mode");
  if (temperature <= 0) throw ConfigError("dram.temperature must be positive");
  if (dropout < 0 || dropout >= 1) throw ConfigError("trainer.dropout must lie in [0, 1)");
  weights.validate();
  if (schema.dimension() < 1) throw ConfigError("feature schema selects no blocks");
}

ParamStore ParamStore::init(const ModelConfig& cfg, RngStream& rng) {
  cfg.validate();
  ParamStore p;
  const int h = cfg.hidden_dim;
  auto randn = [&rng](int rows, int cols, double scale) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = rng.next_normal() * scale;
    return m;
  };

  int in = cfg.input_dim();
  for (int l = 0; l < cfg.layers; ++l) {
    double s = 1.0 / std::sqrt(static_cast<double>(in));
    std::string base = "enc." + std::to_string(l) + ".";
    p.values[base + "self"] = randn(h, in, s);
    p.values[base + "neigh"] = randn(h, in, s);
    if (cfg.variant == srin::EncoderVariant::GAT) {
      double sa = 1.0 / std::sqrt(static_cast<double>(h));
      p.values[base + "attn_self"] = randn(h, 1, sa);
      p.values[base + "attn_neigh"] = randn(h, 1, sa);
    }
    in = h;
  }
  double sh = 1.0 / std::sqrt(static_cast<double>(2 * h));
  p.values["sub.proj"] = randn(h, 2 * h, sh);
  p.values["merge.w"] = randn(h, 2 * h, sh);
  p.values["merge.b"] = Mat::Zero(h, 1);
  p.values["readout.w"] = randn(h, h, 1.0 / std::sqrt(static_cast<double>(h)));
  p.values["head.ddi.w"] = randn(h, h, 1.0 / static_cast<double>(h));
  p.values["head.ddi.b"] = Mat::Zero(1, 1);
  p.values["head.mi.w"] = randn(2 * h, 1, 1.0 / std::sqrt(static_cast<double>(2 * h)));
  p.values["head.mi.b"] = Mat::Zero(1, 1);
  return p;
}

const Mat& ParamStore::at(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw ConfigError("missing model parameter: " + name);
  return it->second;
}

srin::EncoderParams ParamStore::encoder(const ModelConfig& cfg) const {
  srin::EncoderParams enc;
  enc.variant = cfg.variant;
  enc.activation = cfg.activation;
  enc.hidden_dim = cfg.hidden_dim;
  for (int l = 0; l < cfg.layers; ++l) {
    std::string base = "enc." + std::to_string(l) + ".";
    srin::LayerWeights w;
    w.w_self = at(base + "self");
    w.w_neigh = at(base + "neigh");
    if (cfg.variant == srin::EncoderVariant::GAT) {
      w.attn_self = at(base + "attn_self").col(0);
      w.attn_neigh = at(base + "attn_neigh").col(0);
    }
    enc.layers.push_back(std::move(w));
  }
  return enc;
}

loss::PredictionHead ParamStore::head(const ModelConfig& cfg) const {
  loss::PredictionHead h;
  h.ddi_weight = at("head.ddi.w");
  h.ddi_bias = at("head.ddi.b")(0, 0);
  h.symmetric = cfg.symmetric_head;
  h.mi_weight = at("head.mi.w").col(0);
  h.mi_bias = at("head.mi.b")(0, 0);
  return h;
}

void ensure_features(chem::MolecularGraph& graph, const chem::FeatureSchema& schema) {
  if (!graph.has_features()) graph.set_features(chem::featurize(graph, schema));
}

}  // namespace realign::model
