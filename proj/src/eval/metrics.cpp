#include "realign/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "realign/core/error.hpp"
#include "realign/core/rng.hpp"
#include "realign/core/threads.hpp"

namespace realign::eval {

namespace {

// Mann-Whitney AUROC via average ranks; equals the concordant-pair
// fraction with ties counted 0.5.
double auroc_rank(const std::vector<double>& scores, const std::vector<int>& labels) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double avg = (i + j) / 2.0 + 1.0;  // 1-based average rank
    for (int t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }
  double pos_rank_sum = 0;
  long positives = 0;
  for (int t = 0; t < n; ++t) {
    if (labels[t] == 1) {
      pos_rank_sum += rank[t];
      ++positives;
    }
  }
  long negatives = n - positives;
  double u = pos_rank_sum - static_cast<double>(positives) * (positives + 1) / 2.0;
  return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

// Average precision via the step integral sum (R_i - R_{i-1}) * P_i over
// descending unique score thresholds.
double aupr_steps(const std::vector<double>& scores, const std::vector<int>& labels) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] > scores[b]; });
  long total_pos = std::count(labels.begin(), labels.end(), 1);
  double ap = 0;
  long tp = 0, fp = 0;
  double prev_recall = 0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    for (int t = i; t <= j; ++t) {
      if (labels[order[t]] == 1) ++tp;
      else ++fp;
    }
    double recall = static_cast<double>(tp) / total_pos;
    double precision = static_cast<double>(tp) / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j + 1;
  }
  return ap;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 0 || vb <= 0) throw DataError("pearson: constant input has undefined correlation");
  return cov / std::sqrt(va * vb);
}

std::vector<double> upper_triangle(const Eigen::MatrixXd& m,
                                   const std::vector<int>* perm = nullptr) {
  const int n = static_cast<int>(m.rows());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      out.push_back(perm ? m((*perm)[i], (*perm)[j]) : m(i, j));
  return out;
}

}  // namespace

MetricReport classification_metrics(const std::vector<double>& scores,
                                    const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw DataError("classification_metrics: length mismatch");
  if (scores.empty()) throw DataError("classification_metrics: empty input");
  MetricReport rep;
  rep.task = loss::Task::DDI;
  rep.sample_count = static_cast<int>(scores.size());

  long tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool pred = scores[i] >= 0.5;
    if (pred && labels[i] == 1) ++tp;
    else if (pred && labels[i] == 0) ++fp;
    else if (!pred && labels[i] == 1) ++fn;
    else ++tn;
  }
  rep.values["ACC"] = static_cast<double>(tp + tn) / rep.sample_count;
  rep.values["Pre"] = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  double pre = rep.values["Pre"];
  rep.values["F1"] = pre + recall > 0 ? 2 * pre * recall / (pre + recall) : 0.0;

  long positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == rep.sample_count) {
    rep.absent["AUROC"] = "labels contain a single class";
    rep.absent["AUPR"] = "labels contain a single class";
  } else {
    rep.values["AUROC"] = auroc_rank(scores, labels);
    rep.values["AUPR"] = aupr_steps(scores, labels);
  }
  return rep;
}

MetricReport regression_metrics(const std::vector<double>& predictions,
                                const std::vector<double>& targets) {
  if (predictions.size() != targets.size())
    throw DataError("regression_metrics: length mismatch");
  if (predictions.empty()) throw DataError("regression_metrics: empty input");
  MetricReport rep;
  rep.task = loss::Task::MI;
  rep.sample_count = static_cast<int>(predictions.size());
  double se = 0, ae = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double d = predictions[i] - targets[i];
    se += d * d;
    ae += std::fabs(d);
  }
  rep.values["RMSE"] = std::sqrt(se / rep.sample_count);
  rep.values["MAE"] = ae / rep.sample_count;
  return rep;
}

double rpd(double eva_ori, double eva_p) {
  if (eva_ori <= 0) throw DataError("rpd: baseline evaluation must be positive");
  return std::fabs(eva_p - eva_ori) / eva_ori * 100.0;
}

RPDReport rpd_report(const std::string& metric, double eva_ori, double eva_p,
                     const std::string& scenario) {
  RPDReport r;
  r.metric = metric;
  r.eva_ori = eva_ori;
  r.eva_p = eva_p;
  r.value = rpd(eva_ori, eva_p);
  r.improved = eva_p > eva_ori;
  r.scenario = scenario;
  return r;
}

MantelResult mantel(const Eigen::MatrixXd& dist_a, const Eigen::MatrixXd& dist_b,
                    int permutations, std::uint64_t seed) {
  const int n = static_cast<int>(dist_a.rows());
  if (dist_a.rows() != dist_a.cols() || dist_b.rows() != dist_b.cols())
    throw DataError("mantel: matrices must be square");
  if (dist_a.rows() != dist_b.rows()) throw DataError("mantel: shape mismatch");
  if (n < 3) throw DataError("mantel: need at least 3 items");
  if (permutations < 99) throw ConfigError("mantel: at least 99 permutations required");
  if ((dist_a - dist_a.transpose()).norm() > 1e-12 ||
      (dist_b - dist_b.transpose()).norm() > 1e-12)
    throw DataError("mantel: matrices must be symmetric");
  if (dist_a.diagonal().norm() > 1e-12 || dist_b.diagonal().norm() > 1e-12)
    throw DataError("mantel: matrices must have zero diagonal");

  auto ua = upper_triangle(dist_a);
  auto ub = upper_triangle(dist_b);
  double observed = pearson(ua, ub);

  // per-permutation streams keep the result independent of the
  // parallelism degree
  std::vector<double> perm_r(permutations);
  parallel_for(static_cast<std::size_t>(permutations), [&](std::size_t p) {
    RngStream stream(seed, "mantel");
    RngStream local = stream.fork("perm", p);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    // identity rearrangements re-count the observed statistic; the add-one
    // rule already accounts for it exactly once
    std::vector<int> identity = perm;
    do {
      local.shuffle(perm);
    } while (perm == identity);
    auto permuted = upper_triangle(dist_b, &perm);
    perm_r[p] = pearson(ua, permuted);
  });

  int at_least = 0;
  for (double r : perm_r) at_least += r >= observed ? 1 : 0;

  MantelResult res;
  res.r = observed;
  res.permutations = permutations;
  res.p_value = (1.0 + at_least) / (1.0 + permutations);
  return res;
}

}  // namespace realign::eval
