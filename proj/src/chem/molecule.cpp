#include "realign/chem/molecule.hpp"

#include <array>
#include <algorithm>

#include "json.hpp"
#include "realign/core/error.hpp"
#include "realign/chem/smiles.hpp"

namespace realign::chem {

namespace {
constexpr std::array<const char*, kElementCount> kSymbols = {
    "B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
}

const char* element_symbol(Element e) { return kSymbols[static_cast<int>(e)]; }

bool element_from_symbol(const std::string& sym, Element& out) {
  for (int i = 0; i < kElementCount; ++i) {
    if (sym == kSymbols[i]) {
      out = static_cast<Element>(i);
      return true;
    }
  }
  return false;
}

const char* bond_order_name(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return "single";
    case BondOrder::Double: return "double";
    case BondOrder::Triple: return "triple";
    case BondOrder::Aromatic: return "aromatic";
  }
  return "single";
}

bool bond_order_from_name(const std::string& name, BondOrder& out) {
  if (name == "single") out = BondOrder::Single;
  else if (name == "double") out = BondOrder::Double;
  else if (name == "triple") out = BondOrder::Triple;
  else if (name == "aromatic") out = BondOrder::Aromatic;
  else return false;
  return true;
}

MolecularGraph::MolecularGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
  const int n = atom_count();
  for (auto& b : bonds_) {
    if (b.a == b.b) throw DataError("bond endpoints must be distinct");
    if (b.a < 0 || b.b < 0 || b.a >= n || b.b >= n)
      throw DataError("bond endpoint out of range");
    if (b.a > b.b) std::swap(b.a, b.b);
  }
  for (std::size_t i = 0; i < bonds_.size(); ++i)
    for (std::size_t j = i + 1; j < bonds_.size(); ++j)
      if (bonds_[i].a == bonds_[j].a && bonds_[i].b == bonds_[j].b)
        throw DataError("duplicate bond between atoms " + std::to_string(bonds_[i].a) +
                        " and " + std::to_string(bonds_[i].b));
  rebuild_derived();
}

void MolecularGraph::rebuild_derived() {
  const int n = atom_count();
  adjacency_ = Eigen::MatrixXd::Zero(n, n);
  neighbors_.assign(n, {});
  for (auto& a : atoms_) a.degree = 0;
  for (const auto& b : bonds_) {
    adjacency_(b.a, b.b) = 1.0;
    adjacency_(b.b, b.a) = 1.0;
    neighbors_[b.a].push_back(b.b);
    neighbors_[b.b].push_back(b.a);
    ++atoms_[b.a].degree;
    ++atoms_[b.b].degree;
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

bool MolecularGraph::has_bond(int i, int j) const {
  if (i < 0 || j < 0 || i >= atom_count() || j >= atom_count()) return false;
  return adjacency_(i, j) != 0.0;
}

BondOrder MolecularGraph::bond_order(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (const auto& b : bonds_)
    if (b.a == i && b.b == j) return b.order;
  throw DataError("no bond between atoms " + std::to_string(i) + " and " + std::to_string(j));
}

void MolecularGraph::set_features(Eigen::MatrixXd x) {
  if (x.cols() != atom_count())
    throw DataError("feature matrix column count must equal atom count");
  features_ = std::move(x);
}

const Eigen::MatrixXd& MolecularGraph::features() const {
  if (features_.size() == 0) throw DataError("molecule has no feature matrix attached");
  return features_;
}

bool MolecularGraph::connected() const {
  const int n = atom_count();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : neighbors_[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count == n;
}

MolecularGraph MolecularGraph::permuted(const std::vector<int>& perm) const {
  const int n = atom_count();
  if (static_cast<int>(perm.size()) != n) throw DataError("permutation size mismatch");
  std::vector<Atom> atoms(n);
  for (int i = 0; i < n; ++i) atoms[perm[i]] = atoms_[i];
  std::vector<Bond> bonds = bonds_;
  for (auto& b : bonds) {
    b.a = perm[b.a];
    b.b = perm[b.b];
  }
  return MolecularGraph(std::move(atoms), std::move(bonds));
}

std::string MolecularGraph::to_json() const {
  nlohmann::ordered_json j;
  j["atoms"] = nlohmann::ordered_json::array();
  for (const auto& a : atoms_) {
    j["atoms"].push_back({{"el", element_symbol(a.element)},
                          {"charge", a.formal_charge},
                          {"aromatic", a.aromatic}});
  }
  j["bonds"] = nlohmann::ordered_json::array();
  for (const auto& b : bonds_)
    j["bonds"].push_back({b.a, b.b, bond_order_name(b.order)});
  return j.dump();
}

MolecularGraph MolecularGraph::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("molecule JSON parse failure: ") + e.what());
  }
  if (!j.contains("atoms") || !j["atoms"].is_array())
    throw DataError("molecule JSON missing \"atoms\" array");
  std::vector<Atom> atoms;
  for (const auto& ja : j["atoms"]) {
    Atom a;
    std::string el = ja.at("el").get<std::string>();
    if (!element_from_symbol(el, a.element))
      throw DataError("unsupported element in molecule JSON: " + el);
    a.formal_charge = ja.value("charge", 0);
    if (a.formal_charge < -1 || a.formal_charge > 1)
      throw DataError("formal charge outside [-1, 1] in molecule JSON");
    a.aromatic = ja.value("aromatic", false);
    atoms.push_back(a);
  }
  std::vector<Bond> bonds;
  if (j.contains("bonds")) {
    for (const auto& jb : j["bonds"]) {
      if (!jb.is_array() || jb.size() != 3)
        throw DataError("molecule JSON bond must be [i, j, order]");
      Bond b;
      b.a = jb[0].get<int>();
      b.b = jb[1].get<int>();
      if (!bond_order_from_name(jb[2].get<std::string>(), b.order))
        throw DataError("unknown bond order in molecule JSON: " + jb[2].get<std::string>());
      bonds.push_back(b);
    }
  }
  return MolecularGraph(std::move(atoms), std::move(bonds));
}

MolecularGraph read_molecule(const std::string& text) {
  for (char c : text) {
    if (c == ' ' || c == '\t') continue;
    if (c == '{') return MolecularGraph::from_json(text);
    break;
  }
  return parse_smiles(text);
}

}  // namespace realign::chem
