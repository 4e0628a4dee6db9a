#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "realign/loss/loss.hpp"

namespace realign::data {

struct PairRecord {
  std::string mol_x;  // SMILES or molecule JSON
  std::string mol_y;
  double label = 0.0;  // binary for DDI, real for MI
  std::string id_x;    // stable molecule identifiers; default to the text
  std::string id_y;
};

struct DatasetManifest {
  std::string name;
  loss::Task task = loss::Task::DDI;
  int molecules_x = 0;
  int molecules_y = 0;
  int pairs = 0;
  int train = 0;  // expected 6:2:2 sizes
  int val = 0;
  int test = 0;
  int skipped = 0;  // unparseable rows
};

struct LoadResult {
  std::vector<PairRecord> records;
  DatasetManifest manifest;
};

// Loads `mol_x,mol_y,label[,id_x,id_y]` CSV (header required, RFC-4180
// quoting for JSON cells). Rows whose molecules fail to parse or whose
// label does not fit the task are skipped and counted.
LoadResult load_pairs(const std::string& path, loss::Task task);

// Same, from an in-memory CSV body.
LoadResult load_pairs_text(const std::string& csv_text, loss::Task task, const std::string& name);

// 6:2:2 with the remainder on train.
void expected_split_sizes(int pairs, int& train, int& val, int& test);

}  // namespace realign::data
