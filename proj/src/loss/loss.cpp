#include "realign/loss/loss.hpp"

#include <algorithm>
#include <cmath>

#include "realign/core/error.hpp"
#include "realign/core/log.hpp"

namespace realign::loss {

double clamp_probability(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

void LossWeights::validate() const {
  if (alpha < 0 || alpha > 1 || beta < 0 || beta > 1)
    throw ConfigError("loss weights alpha and beta must lie in [0, 1]");
}

double confusion_probability(const Vec& core_embedding, const std::vector<Vec>& confounders) {
  if (confounders.empty())
    throw DataError("confusion_probability: empty confounder set (degenerate J=1 path)");
  Vec mean = Vec::Zero(core_embedding.size());
  for (const auto& c : confounders) {
    if (c.size() != core_embedding.size())
      throw ConfigError("confusion_probability: dimension mismatch");
    mean += c;
  }
  mean /= static_cast<double>(confounders.size());
  double d = static_cast<double>(core_embedding.size());
  double raw = srin::logistic(core_embedding.dot(mean) / std::sqrt(d));
  return clamp_probability(raw);
}

double kl_bernoulli(double p, const BernoulliPrior& prior) {
  double pc = clamp_probability(p);
  double e = clamp_probability(prior.e);
  return pc * std::log(pc / e) + (1.0 - pc) * std::log((1.0 - pc) / (1.0 - e));
}

double kl_upper_bound(const dram::SgibPartition& partition) {
  if (partition.degenerate || partition.core.empty() || partition.confounders.empty()) {
    logging::warn("kl_upper_bound: degenerate partition, bound = 0");
    return 0.0;
  }
  double core_side = 0.0;
  for (std::size_t m = 0; m < partition.core.size(); ++m) {
    double p = confusion_probability(partition.core[m], partition.confounders);
    core_side += kl_bernoulli(p, BernoulliPrior::clamped(partition.core_prior[m]));
  }
  core_side /= static_cast<double>(partition.core.size());

  double conf_side = 0.0;
  for (std::size_t j = 0; j < partition.confounders.size(); ++j) {
    double p = confusion_probability(partition.confounders[j], partition.core);
    conf_side += kl_bernoulli(p, BernoulliPrior::clamped(partition.confounder_prior[j]));
  }
  conf_side /= static_cast<double>(partition.confounders.size());

  return std::min(core_side, conf_side);
}

Task task_from_name(const std::string& name) {
  if (name == "ddi") return Task::DDI;
  if (name == "mi") return Task::MI;
  throw ConfigError("unknown task: " + name + " (expected ddi or mi)");
}

const char* task_name(Task t) { return t == Task::DDI ? "ddi" : "mi"; }

double PredictionHead::ddi_logit(const Vec& hx, const Vec& hy) const {
  if (ddi_weight.rows() != hx.size() || ddi_weight.cols() != hy.size())
    throw ConfigError("ddi head shape mismatch");
  Mat w = symmetric ? Mat(0.5 * (ddi_weight + ddi_weight.transpose())) : ddi_weight;
  return hx.dot(w * hy) + ddi_bias;
}

double PredictionHead::ddi_probability(const Vec& hx, const Vec& hy) const {
  return srin::logistic(ddi_logit(hx, hy));
}

double PredictionHead::mi_predict(const Vec& hx, const Vec& hy) const {
  if (mi_weight.size() != hx.size() + hy.size()) throw ConfigError("mi head shape mismatch");
  Vec cat(hx.size() + hy.size());
  cat << hx, hy;
  return mi_weight.dot(cat) + mi_bias;
}

namespace {

double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

double prediction_loss(const PredictionHead& head, const Vec& h_x, const Vec& h_y, double label,
                       Task task) {
  if (task == Task::DDI) {
    if (label != 0.0 && label != 1.0)
      throw DataError("DDI task requires binary labels, got " + std::to_string(label));
    double logit = head.ddi_logit(h_x, h_y);
    // softplus form of the binary cross-entropy
    return softplus(logit) - label * logit;
  }
  double pred = head.mi_predict(h_x, h_y);
  return std::fabs(pred - label);
}

LossBreakdown total_loss(double pred, double kl_x, double kl_y, const LossWeights& weights) {
  weights.validate();
  if (!std::isfinite(pred) || !std::isfinite(kl_x) || !std::isfinite(kl_y))
    throw NumericError("total_loss: non-finite component");
  if (kl_x < 0 || kl_y < 0) throw NumericError("total_loss: negative KL component");
  LossBreakdown b;
  b.pred = pred;
  b.kl_alpha = kl_x;
  b.kl_beta = kl_y;
  b.total = pred + weights.alpha * kl_x + weights.beta * kl_y;
  return b;
}

}  // namespace realign::loss
