#pragma once

#include <utility>
#include <vector>

#include "realign/chem/molecule.hpp"

namespace realign::chem {

// Breadth-first K-hop neighborhood of `center`, excluding the center
// itself. Each atom appears once at its minimum hop distance <= K,
// ordered by (hop, atom index). Throws std::out_of_range on an invalid
// center index.
std::vector<std::pair<int, int>> k_hop_neighborhood(const MolecularGraph& graph, int center,
                                                    int k);

}  // namespace realign::chem
