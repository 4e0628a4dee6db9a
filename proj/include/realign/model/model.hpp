#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "realign/ad/graph.hpp"
#include "realign/chem/features.hpp"
#include "realign/chem/molecule.hpp"
#include "realign/core/rng.hpp"
#include "realign/dram/dram.hpp"
#include "realign/loss/loss.hpp"
#include "realign/srin/srin.hpp"

namespace realign::model {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct ModelConfig {
  srin::EncoderVariant variant = srin::EncoderVariant::MPNN;
  srin::Activation activation = srin::Activation::Tanh;
  int layers = 3;
  int hidden_dim = 16;
  int k_hops = 2;
  double rho = 0.3;
  dram::BandwidthMode bandwidth_mode = dram::BandwidthMode::Median;
  double bandwidth = 1.0;
  double temperature = 1.0;
  double dropout = 0.1;
  loss::Task task = loss::Task::DDI;
  bool symmetric_head = true;
  loss::LossWeights weights;
  chem::FeatureSchema schema;
  bool ablate_dram = false;  // NONE variant: SRIN readout only, no KL terms

  int input_dim() const { return schema.dimension(); }
  void validate() const;
};

// Named dense parameters with deterministic (sorted) iteration order.
struct ParamStore {
  std::map<std::string, Mat> values;

  static ParamStore init(const ModelConfig& cfg, RngStream& rng);

  srin::EncoderParams encoder(const ModelConfig& cfg) const;
  loss::PredictionHead head(const ModelConfig& cfg) const;
  const Mat& at(const std::string& name) const;
};

enum class RunMode { TrainStochastic, Deterministic };

// Per-pair tape outputs; the trainer averages them into the batch loss.
struct PairForward {
  ad::Value pred_loss;
  ad::Value kl_x;
  ad::Value kl_y;
  double prediction = 0.0;  // probability (DDI) or regression value (MI)
};

// Batch-level population statistics for the noise filter (componentwise
// mean and variance over all substructure embeddings of the batch).
struct NoiseStats {
  Vec mean;
  Vec variance;
  bool valid() const { return mean.size() > 0; }
};

// Builds the differentiable pipeline for one molecule pair on the tape.
// `leaves` maps parameter names to tape leaves. TrainStochastic mode draws
// relaxed gates and noise from `rng`; Deterministic mode thresholds
// everything and never consults `rng`.
PairForward forward_pair(ad::Graph& g, const std::map<std::string, ad::Value>& leaves,
                         const ModelConfig& cfg, const chem::MolecularGraph& gx,
                         const chem::MolecularGraph& gy, double label, RunMode mode,
                         RngStream& rng, const NoiseStats& stats);

// Value-level forward through the plain srin/dram/loss operations; the
// oracle route the tape implementation is tested against, and the fast
// path for prediction and analysis.
struct PlainOutput {
  double prediction = 0.0;
  loss::LossBreakdown parts;             // unweighted pred/kl components
  int substructures_x = 0;
  int substructures_y = 0;
  Mat interaction;                       // J_x x J_y similarity01 matrix
};

PlainOutput plain_forward_pair(const ParamStore& params, const ModelConfig& cfg,
                               const chem::MolecularGraph& gx, const chem::MolecularGraph& gy,
                               double label, RunMode mode, RngStream& rng,
                               const NoiseStats& stats);

// Substructure embeddings of a molecule (post noise filter in the given
// mode); shared by the batch-statistics pre-pass and analysis.
std::vector<Vec> molecule_substructures(const ParamStore& params, const ModelConfig& cfg,
                                        const chem::MolecularGraph& graph);

// Attaches the configured feature matrix when missing.
void ensure_features(chem::MolecularGraph& graph, const chem::FeatureSchema& schema);

}  // namespace realign::model
