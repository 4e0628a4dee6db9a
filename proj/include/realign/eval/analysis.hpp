#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "realign/data/records.hpp"
#include "realign/eval/metrics.hpp"
#include "realign/model/model.hpp"

namespace realign::eval {

// Substructure-by-substructure interaction strengths for one molecule
// pair: similarity01(z_xi, z_yj) over the retained substructures.
struct InteractionMap {
  Eigen::MatrixXd similarity;  // J_x rows, J_y columns
  std::string mol_x;
  std::string mol_y;
};

// Throws DataError when either molecule yields fewer than 2 substructures.
InteractionMap interaction_strength_map(const model::ParamStore& params,
                                        const model::ModelConfig& cfg,
                                        const data::PairRecord& pair);

// Symmetrized interaction distance for Mantel comparisons of a square
// map: 1 - (S + S^T)/2 with a zeroed diagonal.
Eigen::MatrixXd interaction_distance(const Eigen::MatrixXd& similarity);

// Matrix JSON: {"mol_x", "mol_y", "rows", "cols", "values": [[...], ...]}
std::string interaction_to_json(const InteractionMap& map);
InteractionMap interaction_from_json(const std::string& text);

// Square matrix file for Mantel references: {"rows", "cols", "values"}.
Eigen::MatrixXd matrix_from_json(const std::string& text);

// Presentation-only plot emission.
std::string heatmap_svg(const Eigen::MatrixXd& values);
std::string barchart_svg(const std::vector<double>& values, const std::string& title);

}  // namespace realign::eval
