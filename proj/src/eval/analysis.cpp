#include "realign/eval/analysis.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "realign/core/error.hpp"
#include "realign/chem/molecule.hpp"

namespace realign::eval {

InteractionMap interaction_strength_map(const model::ParamStore& params,
                                        const model::ModelConfig& cfg,
                                        const data::PairRecord& pair) {
  chem::MolecularGraph gx = chem::read_molecule(pair.mol_x);
  chem::MolecularGraph gy = chem::read_molecule(pair.mol_y);
  model::ensure_features(gx, cfg.schema);
  model::ensure_features(gy, cfg.schema);
  RngStream rng(0, "det");
  model::NoiseStats stats;
  auto out = model::plain_forward_pair(params, cfg, gx, gy, cfg.task == loss::Task::MI ? 0.0 : 0.0,
                                       model::RunMode::Deterministic, rng, stats);
  if (out.substructures_x < 2 || out.substructures_y < 2)
    throw DataError("interaction analysis needs at least 2 substructures per molecule (got " +
                    std::to_string(out.substructures_x) + " and " +
                    std::to_string(out.substructures_y) + ")");
  InteractionMap map;
  map.similarity = out.interaction;
  map.mol_x = pair.mol_x;
  map.mol_y = pair.mol_y;
  return map;
}

Eigen::MatrixXd interaction_distance(const Eigen::MatrixXd& similarity) {
  if (similarity.rows() != similarity.cols())
    throw DataError("interaction_distance: similarity map must be square");
  Eigen::MatrixXd sym = 0.5 * (similarity + similarity.transpose());
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(sym.rows(), sym.cols()) - sym;
  d.diagonal().setZero();
  return d;
}

std::string interaction_to_json(const InteractionMap& map) {
  nlohmann::ordered_json j;
  j["mol_x"] = map.mol_x;
  j["mol_y"] = map.mol_y;
  j["rows"] = map.similarity.rows();
  j["cols"] = map.similarity.cols();
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < map.similarity.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < map.similarity.cols(); ++c) row.push_back(map.similarity(r, c));
    rows.push_back(row);
  }
  j["values"] = rows;
  return j.dump(2);
}

namespace {

Eigen::MatrixXd values_from_json(const nlohmann::json& j) {
  Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto& values = j.at("values");
  if (static_cast<Eigen::Index>(values.size()) != rows)
    throw DataError("matrix JSON row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = values[r];
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw DataError("matrix JSON column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

}  // namespace

InteractionMap interaction_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("interaction JSON parse failure: ") + e.what());
  }
  InteractionMap map;
  map.mol_x = j.value("mol_x", "");
  map.mol_y = j.value("mol_y", "");
  map.similarity = values_from_json(j);
  return map;
}

Eigen::MatrixXd matrix_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("matrix JSON parse failure: ") + e.what());
  }
  return values_from_json(j);
}

namespace {

std::string color_for(double v) {
  // 0 -> deep blue, 1 -> warm red
  double t = std::clamp(v, 0.0, 1.0);
  int r = static_cast<int>(30 + 205 * t);
  int g = static_cast<int>(60 + 80 * (1 - std::fabs(t - 0.5) * 2));
  int b = static_cast<int>(235 - 205 * t);
  std::ostringstream os;
  os << "rgb(" << r << "," << g << "," << b << ")";
  return os.str();
}

}  // namespace

std::string heatmap_svg(const Eigen::MatrixXd& values) {
  const int cell = 24, margin = 30;
  const int w = margin * 2 + cell * static_cast<int>(values.cols());
  const int h = margin * 2 + cell * static_cast<int>(values.rows());
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      svg << "<rect x=\"" << margin + c * cell << "\" y=\"" << margin + r * cell << "\" width=\""
          << cell - 1 << "\" height=\"" << cell - 1 << "\" fill=\"" << color_for(values(r, c))
          << "\"><title>(" << r << "," << c << ") " << values(r, c) << "</title></rect>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string barchart_svg(const std::vector<double>& values, const std::string& title) {
  const int bar = 18, gap = 6, margin = 34, height = 160;
  const int w = margin * 2 + static_cast<int>(values.size()) * (bar + gap);
  double mx = 1e-12;
  for (double v : values) mx = std::max(mx, v);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
      << height + margin * 2 << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << margin << "\" y=\"" << margin - 12 << "\" font-size=\"12\">" << title
      << "</text>\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    int bh = static_cast<int>(height * values[i] / mx);
    svg << "<rect x=\"" << margin + static_cast<int>(i) * (bar + gap) << "\" y=\""
        << margin + height - bh << "\" width=\"" << bar << "\" height=\"" << bh
        << "\" fill=\"steelblue\"><title>" << values[i] << "</title></rect>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace realign::eval
