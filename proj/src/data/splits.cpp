#include "realign/data/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "json.hpp"
#include "realign/core/error.hpp"
#include "realign/core/log.hpp"
#include "realign/core/rng.hpp"

namespace realign::data {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    case Split::Dropped: return "dropped";
  }
  return "train";
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Original: return "original";
    case Scenario::P1: return "p1";
    case Scenario::P2: return "p2";
  }
  return "original";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "original") return Scenario::Original;
  if (name == "p1") return Scenario::P1;
  if (name == "p2") return Scenario::P2;
  throw ConfigError("unknown scenario: " + name + " (expected original, p1 or p2)");
}

int SplitAssignment::count(Split s) const {
  int c = 0;
  for (Split v : split) c += v == s ? 1 : 0;
  return c;
}

int SplitAssignment::usable() const { return static_cast<int>(split.size()) - count(Split::Dropped); }

SplitAssignment split_original(const std::vector<PairRecord>& records, std::uint64_t seed) {
  const int n = static_cast<int>(records.size());
  if (n < 5) throw DataError("original split needs at least 5 records");
  int train, val, test;
  expected_split_sizes(n, train, val, test);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed, "split/original");
  rng.shuffle(order);

  SplitAssignment a;
  a.scenario = Scenario::Original;
  a.seed = seed;
  a.split.assign(n, Split::Train);
  for (int i = 0; i < val; ++i) a.split[order[i]] = Split::Val;
  for (int i = val; i < val + test; ++i) a.split[order[i]] = Split::Test;
  (void)train;
  return a;
}

namespace {

struct IdUniverse {
  std::vector<std::string> ids;
  std::map<std::string, int> index;
  std::vector<std::vector<int>> pairs_of;  // record indices touching each id
};

IdUniverse collect_ids(const std::vector<PairRecord>& records) {
  IdUniverse u;
  for (const auto& r : records) {
    for (const auto& id : {r.id_x, r.id_y}) {
      if (!u.index.count(id)) {
        u.index[id] = static_cast<int>(u.ids.size());
        u.ids.push_back(id);
      }
    }
  }
  u.pairs_of.assign(u.ids.size(), {});
  for (int p = 0; p < static_cast<int>(records.size()); ++p) {
    u.pairs_of[u.index[records[p].id_x]].push_back(p);
    if (records[p].id_y != records[p].id_x)
      u.pairs_of[u.index[records[p].id_y]].push_back(p);
  }
  return u;
}

// Pool membership: 0 none, 1 val, 2 test.
std::vector<Split> assign_from_pools(const std::vector<PairRecord>& records, const IdUniverse& u,
                                     const std::vector<int>& pool) {
  std::vector<Split> split(records.size(), Split::Train);
  int val_count = 0, test_count = 0;
  for (std::size_t p = 0; p < records.size(); ++p) {
    int px = pool[u.index.at(records[p].id_x)];
    int py = pool[u.index.at(records[p].id_y)];
    bool has_val = px == 1 || py == 1;
    bool has_test = px == 2 || py == 2;
    if (has_test && !has_val) {
      split[p] = Split::Test;
      ++test_count;
    } else if (has_val && !has_test) {
      split[p] = Split::Val;
      ++val_count;
    } else if (has_val && has_test) {
      // cross-pool pair: feed the hungrier side; either choice preserves
      // the held-out invariant because both ids are outside every train pair
      if (test_count <= val_count) {
        split[p] = Split::Test;
        ++test_count;
      } else {
        split[p] = Split::Val;
        ++val_count;
      }
    }
  }
  return split;
}

}  // namespace

SplitAssignment split_p1(const std::vector<PairRecord>& records, std::uint64_t seed) {
  const int n = static_cast<int>(records.size());
  IdUniverse u = collect_ids(records);
  if (u.ids.size() < 3) throw DataError("p1 split needs at least 3 distinct molecule ids");

  const double target = 0.2 * n;
  RngStream rng(seed, "split/p1");
  std::vector<int> pool(u.ids.size(), 0);
  std::vector<int> unassigned(u.ids.size());
  std::iota(unassigned.begin(), unassigned.end(), 0);
  rng.shuffle(unassigned);

  auto counts = [&](const std::vector<Split>& split) {
    std::pair<int, int> c{0, 0};
    for (Split s : split) {
      if (s == Split::Val) ++c.first;
      if (s == Split::Test) ++c.second;
    }
    return c;
  };

  std::vector<Split> split = assign_from_pools(records, u, pool);
  auto [val_count, test_count] = counts(split);
  // grow the hungrier pool one id at a time, best-fit among a small sample
  int stall = 0;
  while ((val_count < target || test_count < target) && !unassigned.empty() && stall < 3) {
    int which = (target - test_count) >= (target - val_count) ? 2 : 1;
    double deficit = target - (which == 2 ? test_count : val_count);

    int best_slot = -1;
    double best_fit = 1e18;
    int scan = std::min<int>(32, static_cast<int>(unassigned.size()));
    for (int s = 0; s < scan; ++s) {
      int id = unassigned[s];
      // marginal gain upper bound: its pairs currently in train
      int gain = 0;
      for (int p : u.pairs_of[id]) gain += split[p] == Split::Train ? 1 : 0;
      double fit = std::fabs(deficit - gain) + (gain == 0 ? 1e6 : 0);
      if (fit < best_fit) {
        best_fit = fit;
        best_slot = s;
      }
    }
    if (best_slot < 0) break;
    int id = unassigned[best_slot];
    unassigned.erase(unassigned.begin() + best_slot);
    pool[id] = which;
    split = assign_from_pools(records, u, pool);
    auto c = counts(split);
    if (c.first == val_count && c.second == test_count) ++stall;
    else stall = 0;
    val_count = c.first;
    test_count = c.second;
  }

  SplitAssignment a;
  a.scenario = Scenario::P1;
  a.seed = seed;
  a.split = std::move(split);
  double dev = std::max(std::fabs(val_count - target), std::fabs(test_count - target)) /
               std::max(1, n);
  if (dev > 0.02)
    logging::warn("p1 split best-effort: ratio deviation " + std::to_string(dev * 100) + "%");
  return a;
}

SplitAssignment split_p2(const std::vector<PairRecord>& records,
                         const std::map<std::string, std::string>& scaffold_by_id,
                         std::uint64_t seed) {
  IdUniverse u = collect_ids(records);
  // molecule clusters by scaffold key
  std::map<std::string, std::vector<int>> cluster_map;
  for (std::size_t i = 0; i < u.ids.size(); ++i) {
    auto it = scaffold_by_id.find(u.ids[i]);
    if (it == scaffold_by_id.end())
      throw DataError("missing scaffold key for molecule id " + u.ids[i]);
    cluster_map[it->second].push_back(static_cast<int>(i));
  }
  if (cluster_map.size() < 3)
    throw DataError("p2 split needs at least 3 scaffold clusters, found " +
                    std::to_string(cluster_map.size()));

  std::vector<std::vector<int>> clusters;
  for (auto& [key, members] : cluster_map) clusters.push_back(members);
  RngStream rng(seed, "split/p2");
  rng.shuffle(clusters);
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  const double total = static_cast<double>(u.ids.size());
  const double targets[3] = {0.6 * total, 0.2 * total, 0.2 * total};
  double filled[3] = {0, 0, 0};
  std::vector<int> cluster_split(clusters.size(), 0);

  for (std::size_t c = 0; c < clusters.size(); ++c) {
    int best = 0;
    double best_deficit = -1e18;
    for (int s = 0; s < 3; ++s) {
      double deficit = targets[s] - filled[s];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = s;
      }
    }
    cluster_split[c] = best;
    filled[best] += static_cast<double>(clusters[c].size());
  }

  std::vector<int> split_of_id(u.ids.size(), 0);
  auto apply = [&]() {
    for (std::size_t c = 0; c < clusters.size(); ++c)
      for (int id : clusters[c]) split_of_id[id] = cluster_split[c];
  };
  apply();

  auto cut_pairs = [&]() {
    int cut = 0;
    for (const auto& r : records)
      if (split_of_id[u.index.at(r.id_x)] != split_of_id[u.index.at(r.id_y)]) ++cut;
    return cut;
  };
  auto balance_penalty = [&]() {
    double pen = 0;
    for (int s = 0; s < 3; ++s) pen += std::fabs(filled[s] - targets[s]);
    return pen;
  };

  // one refinement pass: move a whole cluster when it reduces cut pairs
  // without worsening balance
  int best_cut = cut_pairs();
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    int original = cluster_split[c];
    for (int s = 0; s < 3; ++s) {
      if (s == original) continue;
      double before_penalty = balance_penalty();
      cluster_split[c] = s;
      filled[original] -= static_cast<double>(clusters[c].size());
      filled[s] += static_cast<double>(clusters[c].size());
      apply();
      int cut = cut_pairs();
      if (cut < best_cut && balance_penalty() <= before_penalty + 1e-9) {
        best_cut = cut;
        original = s;
      } else {
        filled[s] -= static_cast<double>(clusters[c].size());
        filled[original] += static_cast<double>(clusters[c].size());
        cluster_split[c] = original;
        apply();
      }
    }
  }

  SplitAssignment a;
  a.scenario = Scenario::P2;
  a.seed = seed;
  a.split.assign(records.size(), Split::Train);
  const Split table[3] = {Split::Train, Split::Val, Split::Test};
  for (std::size_t p = 0; p < records.size(); ++p) {
    int sx = split_of_id[u.index.at(records[p].id_x)];
    int sy = split_of_id[u.index.at(records[p].id_y)];
    if (sx == sy) {
      a.split[p] = table[sx];
    } else {
      a.split[p] = Split::Dropped;
      a.dropped.push_back(static_cast<int>(p));
    }
  }
  if (!a.dropped.empty())
    logging::info("p2 split dropped " + std::to_string(a.dropped.size()) +
                  " cross-boundary pairs");
  return a;
}

VerifyReport verify_split(const std::vector<PairRecord>& records,
                          const SplitAssignment& assignment) {
  VerifyReport rep;
  if (records.size() != assignment.split.size()) {
    rep.ok = false;
    rep.violations.push_back("assignment length does not match record count");
    return rep;
  }
  const int usable = assignment.usable();
  if (usable == 0) {
    rep.ok = false;
    rep.violations.push_back("no usable pairs");
    return rep;
  }
  rep.train_fraction = static_cast<double>(assignment.count(Split::Train)) / usable;
  rep.val_fraction = static_cast<double>(assignment.count(Split::Val)) / usable;
  rep.test_fraction = static_cast<double>(assignment.count(Split::Test)) / usable;
  rep.max_ratio_deviation =
      std::max({std::fabs(rep.train_fraction - 0.6), std::fabs(rep.val_fraction - 0.2),
                std::fabs(rep.test_fraction - 0.2)});

  switch (assignment.scenario) {
    case Scenario::Original: {
      if (!assignment.dropped.empty()) {
        rep.ok = false;
        rep.violations.push_back("original split must not drop pairs");
      }
      if (records.size() >= 100 && rep.max_ratio_deviation > 0.02) {
        rep.ok = false;
        rep.violations.push_back("original split ratio deviates more than 2% from 6:2:2");
      }
      break;
    }
    case Scenario::P1: {
      std::set<std::string> train_ids;
      for (std::size_t p = 0; p < records.size(); ++p) {
        if (assignment.split[p] == Split::Train) {
          train_ids.insert(records[p].id_x);
          train_ids.insert(records[p].id_y);
        }
      }
      for (std::size_t p = 0; p < records.size(); ++p) {
        if (assignment.split[p] != Split::Test) continue;
        if (train_ids.count(records[p].id_x) && train_ids.count(records[p].id_y)) {
          rep.ok = false;
          rep.violations.push_back("test pair " + std::to_string(p) +
                                   " has both ids present in train pairs");
        }
      }
      if (records.size() >= 100 && rep.max_ratio_deviation > 0.02)
        rep.notes.push_back("p1 ratio deviation above 2% (best-effort report)");
      break;
    }
    case Scenario::P2: {
      std::set<std::string> ids[3];
      for (std::size_t p = 0; p < records.size(); ++p) {
        int slot = -1;
        switch (assignment.split[p]) {
          case Split::Train: slot = 0; break;
          case Split::Val: slot = 1; break;
          case Split::Test: slot = 2; break;
          case Split::Dropped: break;
        }
        if (slot < 0) continue;
        ids[slot].insert(records[p].id_x);
        ids[slot].insert(records[p].id_y);
      }
      for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
          for (const auto& id : ids[a]) {
            if (ids[b].count(id)) {
              rep.ok = false;
              rep.violations.push_back("molecule id " + id + " appears in two splits");
            }
          }
        }
      }
      break;
    }
  }
  return rep;
}

std::string manifest_to_json(const SplitAssignment& assignment,
                             const std::vector<PairRecord>& records, int csv_pair_count) {
  if (records.size() != assignment.split.size())
    throw DataError("manifest_to_json: records and assignment misaligned");
  nlohmann::ordered_json j;
  j["scenario"] = scenario_name(assignment.scenario);
  j["seed"] = assignment.seed;
  j["assignments"] = nlohmann::ordered_json::array();
  for (std::size_t p = 0; p < assignment.split.size(); ++p) {
    j["assignments"].push_back(
        {{"pair_index", p}, {"split", split_name(assignment.split[p])}});
  }
  j["dropped"] = assignment.dropped;
  j["negatives"] = nlohmann::ordered_json::array();
  for (std::size_t p = csv_pair_count; p < records.size(); ++p) {
    const auto& r = records[p];
    j["negatives"].push_back({{"mol_x", r.mol_x},
                              {"mol_y", r.mol_y},
                              {"label", r.label},
                              {"id_x", r.id_x},
                              {"id_y", r.id_y}});
  }
  return j.dump(2);
}

ManifestData manifest_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest parse failure: ") + e.what());
  }
  ManifestData m;
  m.assignment.scenario = scenario_from_name(j.at("scenario").get<std::string>());
  m.assignment.seed = j.at("seed").get<std::uint64_t>();
  m.assignment.split.assign(j.at("assignments").size(), Split::Train);
  for (const auto& entry : j.at("assignments")) {
    std::size_t idx = entry.at("pair_index").get<std::size_t>();
    std::string s = entry.at("split").get<std::string>();
    if (idx >= m.assignment.split.size()) throw DataError("manifest pair_index out of range");
    if (s == "train") m.assignment.split[idx] = Split::Train;
    else if (s == "val") m.assignment.split[idx] = Split::Val;
    else if (s == "test") m.assignment.split[idx] = Split::Test;
    else if (s == "dropped") m.assignment.split[idx] = Split::Dropped;
    else throw DataError("manifest has unknown split label: " + s);
  }
  if (j.contains("dropped")) m.assignment.dropped = j["dropped"].get<std::vector<int>>();
  if (j.contains("negatives")) {
    for (const auto& entry : j["negatives"]) {
      PairRecord r;
      r.mol_x = entry.at("mol_x").get<std::string>();
      r.mol_y = entry.at("mol_y").get<std::string>();
      r.label = entry.at("label").get<double>();
      r.id_x = entry.at("id_x").get<std::string>();
      r.id_y = entry.at("id_y").get<std::string>();
      m.negatives.push_back(std::move(r));
    }
  }
  m.csv_pair_count = static_cast<int>(m.assignment.split.size()) -
                     static_cast<int>(m.negatives.size());
  return m;
}

}  // namespace realign::data
