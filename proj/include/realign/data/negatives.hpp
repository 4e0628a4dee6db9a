#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "realign/data/records.hpp"

namespace realign::data {

// Molecule universe for negative sampling: ids with their text and
// scaffold keys. The scaffold sampler may pair molecules that appear in no
// positive, so the catalog, not the pair list, defines the universe.
struct MoleculeCatalog {
  std::map<std::string, std::string> text_by_id;
  std::map<std::string, std::string> scaffold_by_id;

  static MoleculeCatalog from_records(const std::vector<PairRecord>& records,
                                      bool with_scaffolds);
};

// Degree-matched non-edge sampling over the positive interaction graph.
// The returned list is the positives followed by ratio * |positives|
// label-0 pairs; sampled pairs never collide with a positive (unordered
// match). Throws DataError when too few non-edges exist, naming the
// achievable count.
std::vector<PairRecord> negative_sample_rule(const std::vector<PairRecord>& positives,
                                             double ratio, std::uint64_t seed);

// Cross-cluster negatives only: sampled pairs always join molecules from
// two distinct scaffold clusters of the catalog. Throws DataError when
// everything shares one cluster or the quota cannot be met.
std::vector<PairRecord> negative_sample_scaffold(const std::vector<PairRecord>& positives,
                                                 const MoleculeCatalog& catalog, double ratio,
                                                 std::uint64_t seed);

// Scaffold keys for every molecule id appearing in the records.
std::map<std::string, std::string> scaffold_keys_for(const std::vector<PairRecord>& records);

}  // namespace realign::data
