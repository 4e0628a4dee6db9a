#include "realign/data/negatives.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "realign/core/error.hpp"
#include "realign/core/log.hpp"
#include "realign/core/rng.hpp"
#include "realign/chem/molecule.hpp"
#include "realign/chem/scaffold.hpp"

namespace realign::data {

MoleculeCatalog MoleculeCatalog::from_records(const std::vector<PairRecord>& records,
                                              bool with_scaffolds) {
  MoleculeCatalog c;
  for (const auto& r : records) {
    c.text_by_id.emplace(r.id_x, r.mol_x);
    c.text_by_id.emplace(r.id_y, r.mol_y);
  }
  if (with_scaffolds) {
    for (const auto& [id, text] : c.text_by_id)
      c.scaffold_by_id[id] = chem::murcko_scaffold(chem::read_molecule(text)).canonical_key;
  }
  return c;
}

namespace {

struct SamplingUniverse {
  std::vector<std::string> ids;                   // stable sorted order
  std::map<std::string, int> index;
  std::map<std::string, std::string> text_by_id;
  std::set<std::pair<int, int>> positive_edges;   // unordered, i < k
  std::vector<double> weight;                     // endpoint sampling weight
};

SamplingUniverse build_universe(const std::vector<PairRecord>& positives,
                                const MoleculeCatalog* catalog, bool degree_weights) {
  SamplingUniverse u;
  for (const auto& r : positives) {
    if (r.label != 1.0)
      throw DataError("negative sampling expects all-positive input pairs");
    u.text_by_id.emplace(r.id_x, r.mol_x);
    u.text_by_id.emplace(r.id_y, r.mol_y);
  }
  if (catalog) {
    for (const auto& [id, text] : catalog->text_by_id) u.text_by_id.emplace(id, text);
  }
  for (const auto& [id, text] : u.text_by_id) {
    u.index[id] = static_cast<int>(u.ids.size());
    u.ids.push_back(id);
  }
  u.weight.assign(u.ids.size(), degree_weights ? 0.0 : 1.0);
  for (const auto& r : positives) {
    int a = u.index[r.id_x], b = u.index[r.id_y];
    if (a == b) continue;
    auto e = std::minmax(a, b);
    if (u.positive_edges.insert({e.first, e.second}).second && degree_weights) {
      u.weight[a] += 1;
      u.weight[b] += 1;
    }
  }
  return u;
}

PairRecord make_negative(const SamplingUniverse& u, int a, int b) {
  PairRecord r;
  r.id_x = u.ids[a];
  r.id_y = u.ids[b];
  r.mol_x = u.text_by_id.at(r.id_x);
  r.mol_y = u.text_by_id.at(r.id_y);
  r.label = 0.0;
  return r;
}

int weighted_pick(const std::vector<double>& weights, double total, RngStream& rng) {
  double x = rng.next_uniform() * total;
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (x < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

using Filter = std::function<bool(int, int)>;

std::vector<PairRecord> sample_negatives(const std::vector<PairRecord>& positives,
                                         const MoleculeCatalog* catalog, bool degree_weights,
                                         double ratio, std::uint64_t seed, const Filter& allowed,
                                         const std::string& what) {
  SamplingUniverse u = build_universe(positives, catalog, degree_weights);
  const int n = static_cast<int>(u.ids.size());
  const int requested = static_cast<int>(std::llround(ratio * positives.size()));

  std::vector<std::pair<int, int>> candidates;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (!u.positive_edges.count({a, b}) && allowed(a, b)) candidates.emplace_back(a, b);
  if (static_cast<int>(candidates.size()) < requested)
    throw DataError("insufficient " + what + " non-edges: requested " +
                    std::to_string(requested) + ", achievable " +
                    std::to_string(candidates.size()));

  RngStream rng(seed, "negatives/" + what);
  double total_weight = 0;
  for (double w : u.weight) total_weight += w;

  std::set<std::pair<int, int>> chosen;
  std::vector<PairRecord> out = positives;
  long attempts = 0;
  const long attempt_cap = 200L * std::max(1, requested);
  while (static_cast<int>(chosen.size()) < requested && attempts < attempt_cap &&
         total_weight > 0) {
    ++attempts;
    int a = weighted_pick(u.weight, total_weight, rng);
    int b = weighted_pick(u.weight, total_weight, rng);
    if (a == b) continue;
    auto e = std::minmax(a, b);
    std::pair<int, int> key{e.first, e.second};
    if (u.positive_edges.count(key) || chosen.count(key) || !allowed(key.first, key.second))
      continue;
    chosen.insert(key);
  }
  if (static_cast<int>(chosen.size()) < requested) {
    // rejection sampling stalled; fill uniformly from the remainder
    logging::info("negative sampling fell back to uniform fill for " +
                  std::to_string(requested - static_cast<int>(chosen.size())) + " pairs");
    std::vector<std::pair<int, int>> rest;
    for (auto& c : candidates)
      if (!chosen.count(c)) rest.push_back(c);
    rng.shuffle(rest);
    for (const auto& c : rest) {
      if (static_cast<int>(chosen.size()) >= requested) break;
      chosen.insert(c);
    }
  }
  for (const auto& [a, b] : chosen) out.push_back(make_negative(u, a, b));
  return out;
}

}  // namespace

std::vector<PairRecord> negative_sample_rule(const std::vector<PairRecord>& positives,
                                             double ratio, std::uint64_t seed) {
  return sample_negatives(positives, nullptr, true, ratio, seed,
                          [](int, int) { return true; }, "rule");
}

std::vector<PairRecord> negative_sample_scaffold(const std::vector<PairRecord>& positives,
                                                 const MoleculeCatalog& catalog, double ratio,
                                                 std::uint64_t seed) {
  SamplingUniverse u = build_universe(positives, &catalog, false);
  std::set<std::string> clusters;
  std::vector<std::string> key_of(u.ids.size());
  for (std::size_t i = 0; i < u.ids.size(); ++i) {
    auto it = catalog.scaffold_by_id.find(u.ids[i]);
    if (it == catalog.scaffold_by_id.end())
      throw DataError("missing scaffold key for molecule id " + u.ids[i]);
    key_of[i] = it->second;
    clusters.insert(it->second);
  }
  if (clusters.size() < 2)
    throw DataError("scaffold negative sampling needs at least two clusters, found " +
                    std::to_string(clusters.size()));
  return sample_negatives(positives, &catalog, false, ratio, seed,
                          [&](int a, int b) { return key_of[a] != key_of[b]; }, "scaffold");
}

std::map<std::string, std::string> scaffold_keys_for(const std::vector<PairRecord>& records) {
  return MoleculeCatalog::from_records(records, true).scaffold_by_id;
}

}  // namespace realign::data
