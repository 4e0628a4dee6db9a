#pragma once

#include <Eigen/Dense>
#include <vector>

#include "realign/dram/dram.hpp"

namespace realign::loss {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Probabilities are clamped into [kProbEps, 1 - kProbEps] before any log.
constexpr double kProbEps = 1e-4;

double clamp_probability(double p);

struct LossWeights {
  double alpha = 0.1;
  double beta = 0.1;

  void validate() const;  // both must lie in [0, 1]
};

struct LossBreakdown {
  double pred = 0.0;
  double kl_alpha = 0.0;
  double kl_beta = 0.0;
  double total = 0.0;
};

struct BernoulliPrior {
  double e = 0.5;

  static BernoulliPrior clamped(double raw) { return BernoulliPrior{clamp_probability(raw)}; }
};

// Scaled inner product of a core embedding against the mean confounder,
// squashed to a probability: logistic(<core, mean(conf)> / sqrt(d)).
double confusion_probability(const Vec& core_embedding, const std::vector<Vec>& confounders);

// KL divergence between Bernoulli(p) and Bernoulli(e); non-negative and
// zero iff p == e.
double kl_bernoulli(double p, const BernoulliPrior& prior);

// Per-molecule confounding bound: the smaller of the core-side and
// confounder-side mean Bernoulli KLs, with each substructure's prior taken
// from its strongest reconstruction-edge theta. Degenerate partitions
// contribute zero.
double kl_upper_bound(const dram::SgibPartition& partition);

enum class Task { DDI, MI };

Task task_from_name(const std::string& name);
const char* task_name(Task t);

// Bilinear classification head plus a concat regression head; the task
// selects which one applies.
struct PredictionHead {
  Mat ddi_weight;      // hidden x hidden
  double ddi_bias = 0.0;
  bool symmetric = true;  // symmetrize the bilinear form
  Vec mi_weight;       // 2*hidden
  double mi_bias = 0.0;

  double ddi_logit(const Vec& hx, const Vec& hy) const;
  double ddi_probability(const Vec& hx, const Vec& hy) const;
  double mi_predict(const Vec& hx, const Vec& hy) const;
};

// DDI: binary cross-entropy of the bilinear logit (label in {0,1}).
// MI: absolute error of the regression output.
double prediction_loss(const PredictionHead& head, const Vec& h_x, const Vec& h_y, double label,
                       Task task);

// Exact composition pred + alpha*kl_x + beta*kl_y with the stored
// breakdown.
LossBreakdown total_loss(double pred, double kl_x, double kl_y, const LossWeights& weights);

}  // namespace realign::loss
