#include "realign/chem/scaffold.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "realign/core/error.hpp"

namespace realign::chem {

namespace {

std::string atom_label(const Atom& a) {
  std::string s = element_symbol(a.element);
  if (a.aromatic) s += "~";
  if (a.formal_charge > 0) s += "+";
  if (a.formal_charge < 0) s += "-";
  return s;
}

char order_char(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return '1';
    case BondOrder::Double: return '2';
    case BondOrder::Triple: return '3';
    case BondOrder::Aromatic: return 'a';
  }
  return '1';
}

// Canonical labeling by iterated neighborhood refinement with
// individualization on ties. Graphs here are small molecules, so the
// search tree stays tiny even for symmetric ring systems.
class Canonicalizer {
 public:
  Canonicalizer(const MolecularGraph& g, const std::vector<int>& subset) : g_(g) {
    verts_ = subset;
    std::sort(verts_.begin(), verts_.end());
    local_.assign(g_.atom_count(), -1);
    for (std::size_t i = 0; i < verts_.size(); ++i) local_[verts_[i]] = static_cast<int>(i);
    n_ = static_cast<int>(verts_.size());
    adj_.assign(n_, {});
    for (int i = 0; i < n_; ++i) {
      for (int u : g_.neighbors_of(verts_[i])) {
        if (local_[u] >= 0)
          adj_[i].emplace_back(local_[u], order_char(g_.bond_order(verts_[i], u)));
      }
      std::sort(adj_[i].begin(), adj_[i].end());
    }
  }

  std::string run() {
    if (n_ == 0) return "";
    std::vector<std::string> colors(n_);
    for (int i = 0; i < n_; ++i) colors[i] = atom_label(g_.atom(verts_[i]));
    refine(colors);
    search(colors);
    return best_;
  }

 private:
  void refine(std::vector<std::string>& colors) const {
    for (int round = 0; round < n_; ++round) {
      std::vector<std::string> next(n_);
      for (int i = 0; i < n_; ++i) {
        std::vector<std::string> nb;
        nb.reserve(adj_[i].size());
        for (auto [u, oc] : adj_[i]) nb.push_back(std::string(1, oc) + colors[u]);
        std::sort(nb.begin(), nb.end());
        std::string s = colors[i] + "(";
        for (auto& t : nb) s += t + ",";
        s += ")";
        next[i] = std::move(s);
      }
      // compress to ranks to keep strings short
      std::map<std::string, int> rank;
      for (const auto& s : next) rank.emplace(s, 0);
      int r = 0;
      for (auto& [k, v] : rank) v = r++;
      std::vector<std::string> compressed(n_);
      for (int i = 0; i < n_; ++i)
        compressed[i] = colors[i] + "#" + std::to_string(rank[next[i]]);
      std::map<std::string, int> rank2;
      for (const auto& s : compressed) rank2.emplace(s, 0);
      r = 0;
      for (auto& [k, v] : rank2) v = r++;
      bool changed = false;
      std::vector<std::string> out(n_);
      for (int i = 0; i < n_; ++i) {
        out[i] = std::to_string(rank2[compressed[i]]);
        if (out[i] != colors[i]) changed = true;
      }
      // re-attach the atom label so distinct labels never merge
      for (int i = 0; i < n_; ++i) out[i] = atom_label(g_.atom(verts_[i])) + ":" + out[i];
      if (!changed && round > 0) break;
      colors.swap(out);
      if (distinct_count(colors) == n_) break;
    }
  }

  static int distinct_count(const std::vector<std::string>& colors) {
    std::set<std::string> s(colors.begin(), colors.end());
    return static_cast<int>(s.size());
  }

  void search(std::vector<std::string> colors) {
    // group vertices by color
    std::map<std::string, std::vector<int>> classes;
    for (int i = 0; i < n_; ++i) classes[colors[i]].push_back(i);
    const std::vector<int>* target = nullptr;
    for (const auto& [c, vs] : classes) {
      if (vs.size() > 1) {
        target = &vs;
        break;
      }
    }
    if (!target) {
      emit(colors);
      return;
    }
    for (int v : *target) {
      std::vector<std::string> branched = colors;
      branched[v] = "!" + branched[v];  // individualize: sorts before peers
      refine(branched);
      search(std::move(branched));
    }
  }

  void emit(const std::vector<std::string>& colors) {
    std::vector<int> order(n_);
    for (int i = 0; i < n_; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return colors[a] < colors[b]; });
    std::vector<int> pos(n_);
    for (int i = 0; i < n_; ++i) pos[order[i]] = i;

    std::ostringstream sig;
    for (int i = 0; i < n_; ++i) {
      if (i) sig << ";";
      sig << atom_label(g_.atom(verts_[order[i]]));
    }
    sig << "|";
    std::vector<std::string> edges;
    for (int i = 0; i < n_; ++i) {
      for (auto [u, oc] : adj_[i]) {
        int a = pos[i], b = pos[u];
        if (a < b)
          edges.push_back(std::to_string(a) + "-" + std::to_string(b) + std::string(1, oc));
      }
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (i) sig << ",";
      sig << edges[i];
    }
    std::string s = sig.str();
    if (best_.empty() || s < best_) best_ = s;
  }

  const MolecularGraph& g_;
  std::vector<int> verts_;
  std::vector<int> local_;
  std::vector<std::vector<std::pair<int, char>>> adj_;
  int n_ = 0;
  std::string best_;
};

}  // namespace

Scaffold murcko_scaffold(const MolecularGraph& graph) {
  const int n = graph.atom_count();
  std::vector<int> degree(n);
  std::vector<char> removed(n, 0);
  for (int i = 0; i < n; ++i) degree[i] = graph.atom(i).degree;

  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (!removed[i] && degree[i] <= 1) {
        removed[i] = 1;
        changed = true;
        for (int u : graph.neighbors_of(i))
          if (!removed[u]) --degree[u];
      }
    }
  }

  Scaffold s;
  for (int i = 0; i < n; ++i)
    if (!removed[i]) s.atom_subset.insert(i);
  if (s.atom_subset.empty()) {
    s.canonical_key = "ACYCLIC";
    return s;
  }
  std::vector<int> subset(s.atom_subset.begin(), s.atom_subset.end());
  s.canonical_key = canonical_signature(graph, subset);
  return s;
}

std::string canonical_signature(const MolecularGraph& graph, const std::vector<int>& subset) {
  return Canonicalizer(graph, subset).run();
}

std::string canonical_key(const MolecularGraph& graph) {
  std::vector<int> all(graph.atom_count());
  for (int i = 0; i < graph.atom_count(); ++i) all[i] = i;
  return canonical_signature(graph, all);
}

}  // namespace realign::chem
