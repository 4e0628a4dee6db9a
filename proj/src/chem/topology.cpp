#include "realign/chem/topology.hpp"

#include <algorithm>
#include <stdexcept>

#include "realign/core/error.hpp"

namespace realign::chem {

std::vector<std::pair<int, int>> k_hop_neighborhood(const MolecularGraph& graph, int center,
                                                    int k) {
  if (center < 0 || center >= graph.atom_count())
    throw std::out_of_range("k_hop_neighborhood: center index " + std::to_string(center) +
                            " out of range");
  if (k < 1) throw ConfigError("k_hop_neighborhood: K must be >= 1");

  std::vector<int> hop(graph.atom_count(), -1);
  hop[center] = 0;
  std::vector<int> frontier = {center};
  std::vector<std::pair<int, int>> result;
  for (int h = 1; h <= k && !frontier.empty(); ++h) {
    std::vector<int> next;
    for (int v : frontier) {
      for (int u : graph.neighbors_of(v)) {
        if (hop[u] < 0) {
          hop[u] = h;
          next.push_back(u);
        }
      }
    }
    std::sort(next.begin(), next.end());
    for (int u : next) result.emplace_back(h, u);
    frontier = std::move(next);
  }
  return result;
}

}  // namespace realign::chem
