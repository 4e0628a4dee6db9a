#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "realign/loss/loss.hpp"

namespace realign::eval {

struct MetricReport {
  loss::Task task = loss::Task::DDI;
  std::map<std::string, double> values;          // ACC/AUROC/F1/Pre/AUPR or RMSE/MAE
  std::map<std::string, std::string> absent;     // metric -> reason
  int sample_count = 0;
  std::string scenario;
};

// Threshold-0.5 ACC/F1/Pre, rank-statistic AUROC (ties count one half),
// step-integrated AUPR. Single-class label sets report AUROC/AUPR absent.
MetricReport classification_metrics(const std::vector<double>& scores,
                                    const std::vector<int>& labels);

MetricReport regression_metrics(const std::vector<double>& predictions,
                                const std::vector<double>& targets);

// Relative performance degradation in percent: |eva_p - eva_ori| / eva_ori
// * 100. Improvements degrade too, by the absolute value.
double rpd(double eva_ori, double eva_p);

struct RPDReport {
  std::string metric;
  double eva_ori = 0.0;
  double eva_p = 0.0;
  double value = 0.0;       // percent
  bool improved = false;    // direction annotation
  std::string scenario;
};

RPDReport rpd_report(const std::string& metric, double eva_ori, double eva_p,
                     const std::string& scenario);

struct MantelResult {
  double r = 0.0;
  double p_value = 1.0;
  int permutations = 0;
};

// Pearson correlation of the upper triangles with a row/column permutation
// test and the add-one rule. Matrices must be square, symmetric,
// zero-diagonal, of equal shape; permutations >= 99.
MantelResult mantel(const Eigen::MatrixXd& dist_a, const Eigen::MatrixXd& dist_b,
                    int permutations, std::uint64_t seed);

}  // namespace realign::eval
