#pragma once

#include <set>
#include <string>
#include <vector>

#include "realign/chem/molecule.hpp"

namespace realign::chem {

// Ring systems plus linkers (Bemis-Murcko sense). Empty for acyclic
// molecules, with the reserved key "ACYCLIC".
struct Scaffold {
  std::set<int> atom_subset;
  std::string canonical_key;

  bool empty() const { return atom_subset.empty(); }
};

// Union of ring atoms and the paths connecting ring systems; computed as
// the 2-core of the heavy-atom graph (iteratively stripping degree<=1
// atoms), which coincides with rings + linkers once all side chains are
// removed.
Scaffold murcko_scaffold(const MolecularGraph& graph);

// Lexicographically minimal adjacency signature over refinement-compatible
// orderings of the induced subgraph. Identical for isomorphic subgraphs,
// including atom labels (element, aromatic, charge) and bond orders.
std::string canonical_signature(const MolecularGraph& graph, const std::vector<int>& subset);

// Whole-graph canonical key; two parsed molecules are isomorphic iff their
// keys match.
std::string canonical_key(const MolecularGraph& graph);

}  // namespace realign::chem
