#include "realign/data/records.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "realign/core/error.hpp"
#include "realign/core/log.hpp"
#include "realign/chem/molecule.hpp"

namespace realign::data {

namespace {

// RFC-4180-ish row split: quoted cells may hold commas (molecule JSON).
std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void expected_split_sizes(int pairs, int& train, int& val, int& test) {
  val = static_cast<int>(pairs * 0.2);
  test = static_cast<int>(pairs * 0.2);
  train = pairs - val - test;
}

LoadResult load_pairs_text(const std::string& csv_text, loss::Task task,
                           const std::string& name) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset file");
  auto header = split_csv_row(line);
  int col_x = -1, col_y = -1, col_label = -1, col_idx = -1, col_idy = -1;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    std::string h = trim(header[i]);
    if (h == "mol_x") col_x = i;
    else if (h == "mol_y") col_y = i;
    else if (h == "label") col_label = i;
    else if (h == "id_x") col_idx = i;
    else if (h == "id_y") col_idy = i;
  }
  if (col_x < 0 || col_y < 0 || col_label < 0)
    throw DataError("dataset CSV must declare mol_x, mol_y and label columns");

  LoadResult out;
  out.manifest.name = name;
  out.manifest.task = task;
  std::set<std::string> ids_x, ids_y;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_row(line);
    if (static_cast<int>(cells.size()) <= std::max({col_x, col_y, col_label})) {
      ++out.manifest.skipped;
      logging::warn("row " + std::to_string(line_no) + ": too few columns, skipped");
      continue;
    }
    PairRecord rec;
    rec.mol_x = trim(cells[col_x]);
    rec.mol_y = trim(cells[col_y]);
    try {
      chem::read_molecule(rec.mol_x);
      chem::read_molecule(rec.mol_y);
    } catch (const DataError& e) {
      ++out.manifest.skipped;
      logging::warn("row " + std::to_string(line_no) + ": " + e.what() + ", skipped");
      continue;
    }
    try {
      rec.label = std::stod(trim(cells[col_label]));
    } catch (const std::exception&) {
      ++out.manifest.skipped;
      logging::warn("row " + std::to_string(line_no) + ": unreadable label, skipped");
      continue;
    }
    if (task == loss::Task::DDI && rec.label != 0.0 && rec.label != 1.0) {
      ++out.manifest.skipped;
      logging::warn("row " + std::to_string(line_no) + ": non-binary DDI label, skipped");
      continue;
    }
    rec.id_x = col_idx >= 0 && !trim(cells[col_idx]).empty() ? trim(cells[col_idx]) : rec.mol_x;
    rec.id_y = col_idy >= 0 && !trim(cells[col_idy]).empty() ? trim(cells[col_idy]) : rec.mol_y;
    ids_x.insert(rec.id_x);
    ids_y.insert(rec.id_y);
    out.records.push_back(std::move(rec));
  }
  if (out.records.empty()) throw DataError("no usable rows in dataset");

  out.manifest.molecules_x = static_cast<int>(ids_x.size());
  out.manifest.molecules_y = static_cast<int>(ids_y.size());
  out.manifest.pairs = static_cast<int>(out.records.size());
  expected_split_sizes(out.manifest.pairs, out.manifest.train, out.manifest.val,
                       out.manifest.test);
  if (out.manifest.skipped > 0)
    logging::info("skipped " + std::to_string(out.manifest.skipped) + " unusable rows");
  return out;
}

LoadResult load_pairs(const std::string& path, loss::Task task) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  std::string name = path;
  std::size_t slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  return load_pairs_text(buf.str(), task, name);
}

}  // namespace realign::data
