#include <cmath>
#include <vector>

#include "doctest.h"
#include "realign/core/rng.hpp"
#include "realign/loss/loss.hpp"

using namespace realign;
using namespace realign::loss;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// General discrete KL over {p, 1-p} vs {e, 1-e}; the oracle for
// kl_bernoulli.
double discrete_kl_oracle(double p, double e) {
  double q[2] = {p, 1 - p}, r[2] = {e, 1 - e};
  double acc = 0;
  for (int i = 0; i < 2; ++i) acc += q[i] * std::log(q[i] / r[i]);
  return acc;
}

}  // namespace

TEST_CASE("confusion_probability: frozen scalar cases") {
  // orthogonal core and confounders
  CHECK(confusion_probability(vec2(1, 0), {vec2(0, 1), vec2(0, -1)}) == doctest::Approx(0.5));

  // 1-d unit vectors: logistic(+-1)
  CHECK(confusion_probability(vec1(1.0), {vec1(1.0)}) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  CHECK(confusion_probability(vec1(1.0), {vec1(-1.0)}) ==
        doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-12));

  CHECK_THROWS_AS(confusion_probability(vec1(1.0), {}), DataError);

  // saturation clamps strictly inside (0, 1)
  double p = confusion_probability(vec1(1000.0), {vec1(1000.0)});
  CHECK(p <= 1.0 - kProbEps);
  CHECK(p >= kProbEps);
}

TEST_CASE("kl_bernoulli: frozen values and properties") {
  CHECK(kl_bernoulli(0.5, BernoulliPrior{0.5}) == doctest::Approx(0.0));
  CHECK(kl_bernoulli(0.9, BernoulliPrior{0.5}) ==
        doctest::Approx(0.9 * std::log(1.8) + 0.1 * std::log(0.2)).epsilon(1e-12));
  CHECK(kl_bernoulli(0.5, BernoulliPrior{0.9}) ==
        doctest::Approx(0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(5.0)).epsilon(1e-12));
  CHECK(kl_bernoulli(0.9, BernoulliPrior{0.5}) == doctest::Approx(0.3681).epsilon(1e-3));

  for (int i = 1; i < 100; ++i) {
    for (int j = 1; j < 100; ++j) {
      double p = i / 100.0, e = j / 100.0;
      double v = kl_bernoulli(p, BernoulliPrior{e});
      CHECK(v >= 0.0);
      if (i == j) CHECK(v == doctest::Approx(0.0));
      else CHECK(v > 0.0);
      CHECK(std::fabs(v - discrete_kl_oracle(p, e)) < 1e-12);
    }
  }
}

TEST_CASE("kl_upper_bound: reduces to kl_bernoulli for a 1+1 partition") {
  // single core, single confounder with p = 0.9 both directions, e = 0.5
  double dot = std::log(0.9 / 0.1);
  double x = std::sqrt(dot);
  dram::SgibPartition part;
  part.core = {vec1(x)};
  part.core_origin = {-1};
  part.core_prior = {0.5};
  part.confounder_ids = {0};
  part.confounders = {vec1(x)};
  part.confounder_prior = {0.5};
  double expected = kl_bernoulli(0.9, BernoulliPrior{0.5});
  CHECK(kl_upper_bound(part) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("kl_upper_bound: equals min of independently computed sides") {
  RngStream rng(77, "klub");
  for (int trial = 0; trial < 100; ++trial) {
    dram::SgibPartition part;
    int m = 1 + static_cast<int>(rng.next_below(4));
    int c = 1 + static_cast<int>(rng.next_below(4));
    for (int t = 0; t < m; ++t) {
      part.core.push_back(vec2(rng.next_normal(), rng.next_normal()));
      part.core_origin.push_back(-1);
      part.core_prior.push_back(0.05 + 0.9 * rng.next_uniform());
    }
    for (int t = 0; t < c; ++t) {
      part.confounder_ids.push_back(t);
      part.confounders.push_back(vec2(rng.next_normal(), rng.next_normal()));
      part.confounder_prior.push_back(0.05 + 0.9 * rng.next_uniform());
    }
    double core_side = 0, conf_side = 0;
    for (int t = 0; t < m; ++t)
      core_side += kl_bernoulli(confusion_probability(part.core[t], part.confounders),
                                BernoulliPrior::clamped(part.core_prior[t]));
    core_side /= m;
    for (int t = 0; t < c; ++t)
      conf_side += kl_bernoulli(confusion_probability(part.confounders[t], part.core),
                                BernoulliPrior::clamped(part.confounder_prior[t]));
    conf_side /= c;
    CHECK(kl_upper_bound(part) == doctest::Approx(std::min(core_side, conf_side)).epsilon(1e-12));
  }
}

TEST_CASE("kl_upper_bound: degenerate partition yields zero") {
  dram::SgibPartition part;
  part.degenerate = true;
  part.core = {vec1(1.0)};
  part.confounders = {vec1(1.0)};
  part.core_prior = {0.5};
  part.confounder_prior = {0.5};
  part.confounder_ids = {0};
  CHECK(kl_upper_bound(part) == 0.0);
}

TEST_CASE("prediction_loss: DDI cross-entropy") {
  PredictionHead head;
  head.ddi_weight = Mat::Zero(2, 2);
  head.ddi_bias = 0.0;
  Vec h = vec2(0.5, -0.3);
  // zeroed head: probability one half, loss ln 2 for either label
  CHECK(head.ddi_probability(h, h) == doctest::Approx(0.5));
  CHECK(prediction_loss(head, h, h, 1.0, Task::DDI) == doctest::Approx(std::log(2.0)));
  CHECK(prediction_loss(head, h, h, 0.0, Task::DDI) == doctest::Approx(std::log(2.0)));

  // saturating head: loss towards zero with the matching label
  head.ddi_bias = 30.0;
  CHECK(prediction_loss(head, h, h, 1.0, Task::DDI) < 1e-9);

  CHECK_THROWS_AS(prediction_loss(head, h, h, 0.7, Task::DDI), DataError);
}

TEST_CASE("prediction_loss: symmetric head is swap invariant") {
  RngStream rng(11, "head");
  PredictionHead head;
  head.ddi_weight = Mat::NullaryExpr(3, 3, [&]() { return rng.next_normal(); });
  head.symmetric = true;
  Vec hx(3), hy(3);
  for (int i = 0; i < 3; ++i) {
    hx[i] = rng.next_normal();
    hy[i] = rng.next_normal();
  }
  CHECK(head.ddi_probability(hx, hy) == doctest::Approx(head.ddi_probability(hy, hx)).epsilon(1e-14));
}

TEST_CASE("prediction_loss: MI absolute error") {
  PredictionHead head;
  head.mi_weight = Vec::Zero(4);
  head.mi_bias = 2.5;
  Vec h = vec2(1.0, 2.0);
  CHECK(head.mi_predict(h, h) == doctest::Approx(2.5));
  CHECK(prediction_loss(head, h, h, 2.0, Task::MI) == doctest::Approx(0.5));
  CHECK(prediction_loss(head, h, h, 2.5, Task::MI) == doctest::Approx(0.0));
}

TEST_CASE("total_loss: exact decomposition") {
  LossWeights w;
  w.alpha = 0.0;
  w.beta = 0.0;
  auto b = total_loss(0.77, 0.3, 0.4, w);
  CHECK(b.total == 0.77);

  w.alpha = w.beta = 0.1;
  auto b2 = total_loss(1.0, 0.5, 0.5, w);
  CHECK(b2.total == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(b2.pred + w.alpha * b2.kl_alpha + w.beta * b2.kl_beta == b2.total);

  auto b3 = total_loss(0.0, 0.0, 0.0, w);
  CHECK(b3.total == 0.0);

  RngStream rng(3, "tl");
  for (int t = 0; t < 200; ++t) {
    LossWeights lw;
    lw.alpha = rng.next_uniform();
    lw.beta = rng.next_uniform();
    double pred = rng.next_uniform() * 3;
    double kx = rng.next_uniform(), ky = rng.next_uniform();
    auto bb = total_loss(pred, kx, ky, lw);
    CHECK(bb.total == bb.pred + lw.alpha * bb.kl_alpha + lw.beta * bb.kl_beta);
  }

  LossWeights bad;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(total_loss(1, 0, 0, bad), ConfigError);
  CHECK_THROWS_AS(total_loss(1, -0.1, 0, w), NumericError);
}
