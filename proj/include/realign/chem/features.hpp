#pragma once

#include <Eigen/Dense>

#include "realign/chem/molecule.hpp"

namespace realign::chem {

// Declares the per-atom one-hot / flag blocks, laid out in declaration
// order: element, degree, aromaticity, formal charge.
struct FeatureSchema {
  bool element = true;    // one-hot over the supported element subset
  bool degree = true;     // one-hot over 0..kDegreeBins-1, clamped above
  bool aromatic = true;   // single flag
  bool charge = true;     // one-hot over {-1, 0, +1}

  static constexpr int kDegreeBins = 7;

  int dimension() const {
    int d = 0;
    if (element) d += kElementCount;
    if (degree) d += kDegreeBins;
    if (aromatic) d += 1;
    if (charge) d += 3;
    return d;
  }
};

// Returns the B x N feature matrix (one column per atom); deterministic
// for a fixed schema.
Eigen::MatrixXd featurize(const MolecularGraph& graph, const FeatureSchema& schema);

}  // namespace realign::chem
