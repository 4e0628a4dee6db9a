#pragma once

#include <cstddef>
#include <string>

#include "realign/core/error.hpp"
#include "realign/chem/molecule.hpp"

namespace realign::chem {

// Malformed input: unbalanced parentheses, dangling ring closures,
// unknown elements, stray tokens. Carries the character offset.
class SmilesSyntaxError : public DataError {
 public:
  SmilesSyntaxError(const std::string& msg, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Syntactically valid SMILES using features outside the supported subset
// (stereo markers, isotopes, multi-unit charges, ...). Reported, never
// silently dropped.
class UnsupportedFeatureError : public DataError {
 public:
  UnsupportedFeatureError(const std::string& msg, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Parses the restricted SMILES grammar: elements {B,C,N,O,P,S,F,Cl,Br,I},
// aromatic lowercase organic subset, bonds - = #, branches, ring closures
// 1-9 and %nn, bracket atoms with optional H count and +/-1 charge.
MolecularGraph parse_smiles(const std::string& text);

// Emits a SMILES string for a connected graph on the supported subset.
// parse_smiles(write_smiles(g)) is isomorphic to g.
std::string write_smiles(const MolecularGraph& graph);

}  // namespace realign::chem
