#include "realign/chem/features.hpp"

#include <algorithm>

namespace realign::chem {

Eigen::MatrixXd featurize(const MolecularGraph& graph, const FeatureSchema& schema) {
  const int n = graph.atom_count();
  const int dim = schema.dimension();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, n);
  for (int i = 0; i < n; ++i) {
    const Atom& a = graph.atom(i);
    int row = 0;
    if (schema.element) {
      x(row + static_cast<int>(a.element), i) = 1.0;
      row += kElementCount;
    }
    if (schema.degree) {
      int bin = std::min(a.degree, FeatureSchema::kDegreeBins - 1);
      x(row + bin, i) = 1.0;
      row += FeatureSchema::kDegreeBins;
    }
    if (schema.aromatic) {
      x(row, i) = a.aromatic ? 1.0 : 0.0;
      row += 1;
    }
    if (schema.charge) {
      x(row + a.formal_charge + 1, i) = 1.0;
      row += 3;
    }
  }
  return x;
}

}  // namespace realign::chem
