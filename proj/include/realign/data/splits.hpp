#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "realign/data/records.hpp"

namespace realign::data {

enum class Split { Train, Val, Test, Dropped };
enum class Scenario { Original, P1, P2 };

const char* split_name(Split s);
const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct SplitAssignment {
  Scenario scenario = Scenario::Original;
  std::uint64_t seed = 0;
  std::vector<Split> split;     // one entry per pair record
  std::vector<int> dropped;     // indices with split == Dropped (P2 cut pairs)

  int count(Split s) const;
  int usable() const;           // pairs not dropped
};

// Seeded uniform shuffle at 6:2:2, remainder to train.
SplitAssignment split_original(const std::vector<PairRecord>& records, std::uint64_t seed);

// Held-out molecule-id pools for val and test grown toward 6:2:2; every
// test pair keeps at least one id that appears in no train pair.
SplitAssignment split_p1(const std::vector<PairRecord>& records, std::uint64_t seed);

// Scaffold clusters assigned to splits by a greedy balanced partitioner
// with one cut-reducing refinement pass; pairs crossing split boundaries
// are dropped, so the molecule-id sets stay pairwise disjoint.
SplitAssignment split_p2(const std::vector<PairRecord>& records,
                         const std::map<std::string, std::string>& scaffold_by_id,
                         std::uint64_t seed);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> violations;  // hard invariant failures
  std::vector<std::string> notes;       // soft ratio observations
  double train_fraction = 0.0;
  double val_fraction = 0.0;
  double test_fraction = 0.0;
  double max_ratio_deviation = 0.0;     // against 6:2:2, over usable pairs
};

// Re-checks the scenario invariant independently of the splitters:
// Original/P1 ratios, the P1 held-out-id condition, P2 disjointness.
VerifyReport verify_split(const std::vector<PairRecord>& records,
                          const SplitAssignment& assignment);

// Manifest JSON with stable field order:
// {scenario, seed, assignments: [{pair_index, split}], dropped: [...],
//  negatives: [...]} where negatives lists generated pairs appended after
// the CSV rows.
std::string manifest_to_json(const SplitAssignment& assignment,
                             const std::vector<PairRecord>& records, int csv_pair_count);

struct ManifestData {
  SplitAssignment assignment;
  std::vector<PairRecord> negatives;  // appended after CSV rows
  int csv_pair_count = 0;
};

ManifestData manifest_from_json(const std::string& text);

}  // namespace realign::data
