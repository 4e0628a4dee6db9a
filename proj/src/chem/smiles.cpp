#include "realign/chem/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace realign::chem {

namespace {

std::string with_offset(const std::string& msg, std::size_t offset) {
  return msg + " (at character " + std::to_string(offset) + ")";
}

bool aromatic_symbol(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

struct OpenRing {
  int atom;
  std::optional<BondOrder> bond;
  std::size_t offset;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  MolecularGraph run() {
    if (text_.empty()) throw SmilesSyntaxError("empty SMILES string", 0);
    while (pos_ < text_.size()) step();
    if (pending_bond_)
      throw SmilesSyntaxError("dangling bond symbol at end of input", pending_offset_);
    if (!branch_stack_.empty())
      throw SmilesSyntaxError("unclosed '('", branch_stack_.back().second);
    if (!open_rings_.empty())
      throw SmilesSyntaxError("dangling ring closure " + std::to_string(open_rings_.begin()->first),
                              open_rings_.begin()->second.offset);
    return MolecularGraph(std::move(atoms_), std::move(bonds_));
  }

 private:
  void step() {
    char c = text_[pos_];
    switch (c) {
      case '-': set_bond(BondOrder::Single); return;
      case '=': set_bond(BondOrder::Double); return;
      case '#': set_bond(BondOrder::Triple); return;
      case '(': open_branch(); return;
      case ')': close_branch(); return;
      case '%': ring_two_digit(); return;
      case '.':
        throw UnsupportedFeatureError(
            with_offset("multi-component SMILES ('.') is not supported", pos_), pos_);
      case '/':
      case '\\':
        throw UnsupportedFeatureError(
            with_offset("stereo bond markers are not supported", pos_), pos_);
      case '@':
        throw UnsupportedFeatureError(
            with_offset("stereocenters are not supported", pos_), pos_);
      case '*':
        throw UnsupportedFeatureError(with_offset("wildcard atom is not supported", pos_), pos_);
      case '[': bracket_atom(); return;
      default: break;
    }
    if (c >= '1' && c <= '9') {
      ring_closure(c - '0', pos_);
      ++pos_;
      return;
    }
    bare_atom();
  }

  void set_bond(BondOrder order) {
    if (pending_bond_)
      throw SmilesSyntaxError(with_offset("two consecutive bond symbols", pos_), pos_);
    if (prev_atom_ < 0)
      throw SmilesSyntaxError(with_offset("bond symbol with no preceding atom", pos_), pos_);
    pending_bond_ = order;
    pending_offset_ = pos_;
    ++pos_;
  }

  void open_branch() {
    if (prev_atom_ < 0)
      throw SmilesSyntaxError(with_offset("'(' with no preceding atom", pos_), pos_);
    if (pending_bond_)
      throw SmilesSyntaxError(with_offset("bond symbol before '('", pos_), pos_);
    branch_stack_.emplace_back(prev_atom_, pos_);
    ++pos_;
  }

  void close_branch() {
    if (branch_stack_.empty())
      throw SmilesSyntaxError(with_offset("unmatched ')'", pos_), pos_);
    if (pending_bond_)
      throw SmilesSyntaxError(with_offset("bond symbol before ')'", pos_), pos_);
    prev_atom_ = branch_stack_.back().first;
    branch_stack_.pop_back();
    ++pos_;
  }

  void ring_two_digit() {
    if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
        !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2])))
      throw SmilesSyntaxError(with_offset("'%' must be followed by two digits", pos_), pos_);
    int num = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
    ring_closure(num, pos_);
    pos_ += 3;
  }

  void ring_closure(int num, std::size_t offset) {
    if (prev_atom_ < 0)
      throw SmilesSyntaxError(with_offset("ring closure with no preceding atom", offset), offset);
    auto it = open_rings_.find(num);
    if (it == open_rings_.end()) {
      open_rings_[num] = OpenRing{prev_atom_, take_pending(), offset};
      return;
    }
    OpenRing open = it->second;
    open_rings_.erase(it);
    if (open.atom == prev_atom_)
      throw SmilesSyntaxError(with_offset("ring closure bonds an atom to itself", offset), offset);
    std::optional<BondOrder> here = take_pending();
    if (open.bond && here && *open.bond != *here)
      throw SmilesSyntaxError(with_offset("conflicting bond orders on ring closure", offset),
                              offset);
    BondOrder order;
    if (open.bond) order = *open.bond;
    else if (here) order = *here;
    else order = implicit_order(open.atom, prev_atom_);
    add_bond(open.atom, prev_atom_, order, offset);
  }

  void bare_atom() {
    std::size_t off = pos_;
    char c = text_[pos_];
    // two-character elements first
    if (c == 'C' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
      pos_ += 2;
      new_atom(Element::Cl, false, 0, off);
      return;
    }
    if (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') {
      pos_ += 2;
      new_atom(Element::Br, false, 0, off);
      return;
    }
    Element el;
    if (std::isupper(static_cast<unsigned char>(c)) &&
        element_from_symbol(std::string(1, c), el)) {
      ++pos_;
      new_atom(el, false, 0, off);
      return;
    }
    if (aromatic_symbol(c)) {
      element_from_symbol(std::string(1, static_cast<char>(std::toupper(c))), el);
      ++pos_;
      new_atom(el, true, 0, off);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)))
      throw SmilesSyntaxError(with_offset(std::string("unknown element '") + c + "'", pos_), pos_);
    throw SmilesSyntaxError(with_offset(std::string("unexpected character '") + c + "'", pos_),
                            pos_);
  }

  void bracket_atom() {
    std::size_t off = pos_;
    ++pos_;  // '['
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      throw UnsupportedFeatureError(with_offset("isotope labels are not supported", pos_), pos_);
    if (pos_ >= text_.size())
      throw SmilesSyntaxError(with_offset("unterminated bracket atom", off), off);

    Element el;
    bool aromatic = false;
    char c = text_[pos_];
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::string two = text_.substr(pos_, 2);
      if ((two == "Cl" || two == "Br") && element_from_symbol(two, el)) {
        pos_ += 2;
      } else if (element_from_symbol(std::string(1, c), el)) {
        ++pos_;
      } else {
        throw SmilesSyntaxError(with_offset(std::string("unknown element '") + c + "'", pos_),
                                pos_);
      }
    } else if (aromatic_symbol(c)) {
      element_from_symbol(std::string(1, static_cast<char>(std::toupper(c))), el);
      aromatic = true;
      ++pos_;
    } else {
      throw SmilesSyntaxError(with_offset("expected element symbol in bracket atom", pos_), pos_);
    }

    // optional implicit-hydrogen count; hydrogens are not materialized
    if (pos_ < text_.size() && text_[pos_] == 'H') {
      ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    int charge = 0;
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      char sign = text_[pos_];
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
        throw UnsupportedFeatureError(
            with_offset("charges beyond +/-1 are not supported", pos_), pos_);
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        if (text_[pos_] != '1')
          throw UnsupportedFeatureError(
              with_offset("charges beyond +/-1 are not supported", pos_), pos_);
        ++pos_;
      }
      charge = sign == '+' ? 1 : -1;
    }

    if (pos_ < text_.size() && text_[pos_] == '@')
      throw UnsupportedFeatureError(with_offset("stereocenters are not supported", pos_), pos_);
    if (pos_ >= text_.size() || text_[pos_] != ']')
      throw SmilesSyntaxError(with_offset("expected ']'", pos_ < text_.size() ? pos_ : off),
                              pos_ < text_.size() ? pos_ : off);
    ++pos_;
    new_atom(el, aromatic, charge, off);
  }

  void new_atom(Element el, bool aromatic, int charge, std::size_t offset) {
    Atom a;
    a.element = el;
    a.aromatic = aromatic;
    a.formal_charge = charge;
    atoms_.push_back(a);
    int idx = static_cast<int>(atoms_.size()) - 1;
    if (prev_atom_ >= 0) {
      std::optional<BondOrder> pending = take_pending();
      BondOrder order = pending ? *pending : implicit_order(prev_atom_, idx);
      add_bond(prev_atom_, idx, order, offset);
    }
    prev_atom_ = idx;
  }

  BondOrder implicit_order(int a, int b) const {
    return (atoms_[a].aromatic && atoms_[b].aromatic) ? BondOrder::Aromatic : BondOrder::Single;
  }

  void add_bond(int a, int b, BondOrder order, std::size_t offset) {
    int lo = std::min(a, b), hi = std::max(a, b);
    for (const auto& bond : bonds_)
      if (bond.a == lo && bond.b == hi)
        throw SmilesSyntaxError(with_offset("duplicate bond between atoms", offset), offset);
    bonds_.push_back(Bond{lo, hi, order});
  }

  std::optional<BondOrder> take_pending() {
    std::optional<BondOrder> b = pending_bond_;
    pending_bond_.reset();
    return b;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int prev_atom_ = -1;
  std::optional<BondOrder> pending_bond_;
  std::size_t pending_offset_ = 0;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::pair<int, std::size_t>> branch_stack_;
  std::map<int, OpenRing> open_rings_;
};

class Writer {
 public:
  explicit Writer(const MolecularGraph& g) : g_(g) {}

  std::string run() {
    if (g_.atom_count() == 0) throw DataError("cannot serialize empty molecule");
    if (!g_.connected()) throw DataError("cannot serialize disconnected molecule");
    visited_.assign(g_.atom_count(), false);
    assign_ring_closures();
    emit_atom(0, -1);
    return out_.str();
  }

 private:
  // Non-tree edges of a DFS become ring closures with globally unique ids.
  void assign_ring_closures() {
    std::vector<char> seen(g_.atom_count(), 0);
    std::function<void(int, int)> dfs = [&](int v, int parent) {
      seen[v] = 1;
      for (int u : g_.neighbors_of(v)) {
        if (u == parent) continue;
        if (!seen[u]) {
          tree_edge_.insert(edge_key(v, u));
          dfs(u, v);
        } else if (!closure_id_.count(edge_key(v, u)) && !tree_edge_.count(edge_key(v, u))) {
          closure_id_[edge_key(v, u)] = next_ring_++;
        }
      }
    };
    dfs(0, -1);
    if (next_ring_ > 99) throw DataError("too many ring closures to serialize");
  }

  static long edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return static_cast<long>(a) * 100000 + b;
  }

  void emit_atom(int v, int parent) {
    visited_[v] = true;
    out_ << atom_token(v);
    // ring closure digits in stable order
    std::vector<std::pair<int, int>> closures;  // (ring id, other atom)
    for (int u : g_.neighbors_of(v)) {
      auto it = closure_id_.find(edge_key(v, u));
      if (it != closure_id_.end()) closures.emplace_back(it->second, u);
    }
    std::sort(closures.begin(), closures.end());
    for (auto [rid, u] : closures) {
      out_ << bond_token(v, u) << ring_token(rid);
    }
    std::vector<int> children;
    for (int u : g_.neighbors_of(v)) {
      if (u == parent) continue;
      if (tree_edge_.count(edge_key(v, u)) && !visited_[u]) children.push_back(u);
    }
    for (std::size_t i = 0; i < children.size(); ++i) {
      int u = children[i];
      if (visited_[u]) continue;
      bool last = (i + 1 == children.size());
      if (!last) out_ << '(';
      out_ << bond_token(v, u);
      emit_atom(u, v);
      if (!last) out_ << ')';
    }
  }

  std::string ring_token(int rid) const {
    if (rid <= 9) return std::to_string(rid);
    std::ostringstream os;
    os << '%' << (rid < 10 ? "0" : "") << rid;
    return os.str();
  }

  std::string bond_token(int a, int b) const {
    BondOrder o = g_.bond_order(a, b);
    bool both_aromatic = g_.atom(a).aromatic && g_.atom(b).aromatic;
    switch (o) {
      case BondOrder::Single: return both_aromatic ? "-" : "";
      case BondOrder::Double: return "=";
      case BondOrder::Triple: return "#";
      case BondOrder::Aromatic:
        if (!both_aromatic)
          throw DataError("aromatic bond between non-aromatic atoms is not serializable");
        return "";
    }
    return "";
  }

  std::string atom_token(int v) const {
    const Atom& a = g_.atom(v);
    std::string sym = element_symbol(a.element);
    if (a.aromatic) {
      if (sym.size() != 1 || !aromatic_symbol(static_cast<char>(std::tolower(sym[0]))))
        throw DataError("aromatic flag on element without aromatic form: " + sym);
      sym[0] = static_cast<char>(std::tolower(sym[0]));
    }
    if (a.formal_charge == 0) return sym;
    return "[" + sym + (a.formal_charge > 0 ? "+" : "-") + "]";
  }

  const MolecularGraph& g_;
  std::ostringstream out_;
  std::vector<bool> visited_;
  std::map<long, int> closure_id_;
  std::set<long> tree_edge_;
  int next_ring_ = 1;
};

}  // namespace

SmilesSyntaxError::SmilesSyntaxError(const std::string& msg, std::size_t offset)
    : DataError(msg), offset_(offset) {}

UnsupportedFeatureError::UnsupportedFeatureError(const std::string& msg, std::size_t offset)
    : DataError(msg), offset_(offset) {}

MolecularGraph parse_smiles(const std::string& text) { return Parser(text).run(); }

std::string write_smiles(const MolecularGraph& graph) { return Writer(graph).run(); }

}  // namespace realign::chem
