#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace realign::chem {

// Supported element subset. Hydrogens are implicit and never materialized.
enum class Element : std::uint8_t { B, C, N, O, P, S, F, Cl, Br, I };

const char* element_symbol(Element e);
bool element_from_symbol(const std::string& sym, Element& out);
constexpr int kElementCount = 10;

enum class BondOrder : std::uint8_t { Single, Double, Triple, Aromatic };

const char* bond_order_name(BondOrder o);
bool bond_order_from_name(const std::string& name, BondOrder& out);

struct Atom {
  Element element = Element::C;
  int formal_charge = 0;   // restricted to {-1, 0, +1}
  bool aromatic = false;
  int degree = 0;          // number of incident bonds, set after parsing
};

struct Bond {
  int a = 0;  // endpoint atom indices, a < b after normalization
  int b = 0;
  BondOrder order = BondOrder::Single;
};

// Heavy-atom molecular graph. The adjacency matrix is derived from the
// bond list and kept consistent by construction.
class MolecularGraph {
 public:
  MolecularGraph() = default;
  MolecularGraph(std::vector<Atom> atoms, std::vector<Bond> bonds);

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  const Atom& atom(int i) const { return atoms_.at(i); }

  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }
  const std::vector<int>& neighbors_of(int i) const { return neighbors_.at(i); }

  bool has_bond(int i, int j) const;
  BondOrder bond_order(int i, int j) const;  // throws if absent
  bool connected() const;

  // Optional cached atom feature matrix (B x N, one column per atom).
  void set_features(Eigen::MatrixXd x);
  bool has_features() const { return features_.size() > 0; }
  const Eigen::MatrixXd& features() const;

  // Applies perm (new index of old atom i is perm[i]); used by
  // canonicalization and the reordering-invariance tests.
  MolecularGraph permuted(const std::vector<int>& perm) const;

  // Serialized one-object-per-molecule JSON interchange form:
  // {"atoms":[{"el","charge","aromatic"}...], "bonds":[[i,j,"order"]...]}
  std::string to_json() const;
  static MolecularGraph from_json(const std::string& text);

 private:
  void rebuild_derived();

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  Eigen::MatrixXd adjacency_;
  Eigen::MatrixXd features_;
  std::vector<std::vector<int>> neighbors_;
};

// Accepts either a SMILES string or the JSON interchange object (detected
// by a leading '{').
MolecularGraph read_molecule(const std::string& text);

}  // namespace realign::chem
