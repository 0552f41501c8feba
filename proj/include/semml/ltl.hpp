#pragma once

// LTL formulas with hash-consing, parsing, NNF conversion, progression
// (the "after" function), syntactic classification and normalization into
// a boolean combination of safety/co-safety/Büchi/co-Büchi leaves.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semml {

using FormulaRef = uint32_t;
using AtomId = uint32_t;

enum class Op : uint8_t {
  True,
  False,
  Atom,
  NotAtom,
  And,  // n-ary, children sorted
  Or,   // n-ary, children sorted
  Next,
  Until,
  Release,
  WeakUntil,
  Eventually,
  Always,
  // Surface-only operators, eliminated by to_nnf.
  Not,
  Implies,
  Equiv,
};

inline bool is_temporal(Op op) {
  switch (op) {
    case Op::Next:
    case Op::Until:
    case Op::Release:
    case Op::WeakUntil:
    case Op::Eventually:
    case Op::Always:
      return true;
    default:
      return false;
  }
}

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(size_t offset, std::string expected, std::string msg)
      : std::runtime_error(std::move(msg)),
        offset_(offset),
        expected_(std::move(expected)) {}
  // 1-based byte offset of the offending position.
  size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  size_t offset_;
  std::string expected_;
};

// A (possibly partial) assignment of atoms for one step. Unassigned atoms
// stay symbolic under progression.
class Letter {
 public:
  Letter() = default;
  void set(AtomId a, bool v) { vals_[a] = v; }
  std::optional<bool> get(AtomId a) const {
    auto it = vals_.find(a);
    if (it == vals_.end()) return std::nullopt;
    return it->second;
  }
  const std::map<AtomId, bool>& values() const { return vals_; }

 private:
  std::map<AtomId, bool> vals_;
};

// Ultimately periodic word: letters[0..stem) then letters[stem..) forever.
struct LassoWord {
  std::vector<Letter> letters;
  size_t stem = 0;
  size_t size() const { return letters.size(); }
  size_t succ(size_t i) const { return i + 1 < letters.size() ? i + 1 : stem; }
};

struct Partition {
  std::vector<AtomId> env;  // inputs
  std::vector<AtomId> sys;  // outputs
  bool is_env(AtomId a) const {
    return std::find(env.begin(), env.end(), a) != env.end();
  }
  bool is_sys(AtomId a) const {
    return std::find(sys.begin(), sys.end(), a) != sys.end();
  }
};

enum class SynClass { Safety, CoSafety, Buchi, CoBuchi, None };

struct NormalLeaf {
  FormulaRef formula;  // the sub-automaton formula (e.g. GF !c for FG c)
  SynClass cls;
  bool negated;  // true: the combination refers to this leaf negatively
};

// Positive boolean combination over leaf indices.
struct CombNode {
  enum Kind { Leaf, CAnd, COr } kind;
  int leaf = -1;                // for Leaf
  std::vector<CombNode> kids;   // for CAnd/COr
};

struct NormalForm {
  CombNode combination;
  std::vector<NormalLeaf> leaves;
};

class UnsupportedFragment : public std::runtime_error {
 public:
  UnsupportedFragment(std::string msg, std::string subformula)
      : std::runtime_error(std::move(msg)), subformula_(std::move(subformula)) {}
  const std::string& subformula() const { return subformula_; }

 private:
  std::string subformula_;
};

class FormulaStore {
 public:
  struct Node {
    Op op;
    AtomId atom = 0;                 // Atom/NotAtom
    std::vector<FormulaRef> kids;    // operands
  };

  FormulaStore() {
    true_ = intern(Node{Op::True, 0, {}});
    false_ = intern(Node{Op::False, 0, {}});
  }

  FormulaRef tt() const { return true_; }
  FormulaRef ff() const { return false_; }

  AtomId atom_id(const std::string& name) {
    auto it = atom_ids_.find(name);
    if (it != atom_ids_.end()) return it->second;
    AtomId id = static_cast<AtomId>(atom_names_.size());
    atom_names_.push_back(name);
    atom_ids_.emplace(name, id);
    return id;
  }
  const std::string& atom_name(AtomId id) const { return atom_names_.at(id); }
  size_t num_atoms() const { return atom_names_.size(); }

  FormulaRef atom(AtomId a) { return intern(Node{Op::Atom, a, {}}); }
  FormulaRef atom(const std::string& name) { return atom(atom_id(name)); }
  FormulaRef natom(AtomId a) { return intern(Node{Op::NotAtom, a, {}}); }

  const Node& node(FormulaRef f) const { return nodes_[f]; }
  Op op(FormulaRef f) const { return nodes_[f].op; }

  // n-ary conjunction: flatten, sort, dedup, constant fold, absorption.
  FormulaRef mk_and(std::vector<FormulaRef> kids) {
    return mk_nary(Op::And, std::move(kids));
  }
  FormulaRef mk_or(std::vector<FormulaRef> kids) {
    return mk_nary(Op::Or, std::move(kids));
  }
  FormulaRef mk_and(FormulaRef a, FormulaRef b) { return mk_and({a, b}); }
  FormulaRef mk_or(FormulaRef a, FormulaRef b) { return mk_or({a, b}); }

  FormulaRef mk_next(FormulaRef f) {
    if (f == true_ || f == false_) return f;
    return intern(Node{Op::Next, 0, {f}});
  }
  FormulaRef mk_until(FormulaRef l, FormulaRef r) {
    if (r == true_ || r == false_) return r;
    if (l == false_) return r;
    if (l == true_) return mk_eventually(r);
    return intern(Node{Op::Until, 0, {l, r}});
  }
  FormulaRef mk_release(FormulaRef l, FormulaRef r) {
    if (r == true_ || r == false_) return r;
    if (l == true_) return r;
    if (l == false_) return mk_always(r);
    return intern(Node{Op::Release, 0, {l, r}});
  }
  FormulaRef mk_wuntil(FormulaRef l, FormulaRef r) {
    if (r == true_) return true_;
    if (l == false_) return r;
    if (r == false_) return mk_always(l);
    if (l == true_) return true_;
    return intern(Node{Op::WeakUntil, 0, {l, r}});
  }
  FormulaRef mk_eventually(FormulaRef f) {
    if (f == true_ || f == false_) return f;
    if (op(f) == Op::Eventually) return f;
    return intern(Node{Op::Eventually, 0, {f}});
  }
  FormulaRef mk_always(FormulaRef f) {
    if (f == true_ || f == false_) return f;
    if (op(f) == Op::Always) return f;
    return intern(Node{Op::Always, 0, {f}});
  }

  // Surface constructors; to_nnf eliminates these.
  FormulaRef mk_not(FormulaRef f) {
    if (f == true_) return false_;
    if (f == false_) return true_;
    if (op(f) == Op::Atom) return natom(nodes_[f].atom);
    if (op(f) == Op::NotAtom) return atom(nodes_[f].atom);
    if (op(f) == Op::Not) return nodes_[f].kids[0];
    return intern(Node{Op::Not, 0, {f}});
  }
  FormulaRef mk_implies(FormulaRef l, FormulaRef r) {
    return intern(Node{Op::Implies, 0, {l, r}});
  }
  FormulaRef mk_equiv(FormulaRef l, FormulaRef r) {
    return intern(Node{Op::Equiv, 0, {l, r}});
  }

  bool is_nnf(FormulaRef f) const {
    const Node& n = nodes_[f];
    switch (n.op) {
      case Op::Not:
      case Op::Implies:
      case Op::Equiv:
        return false;
      default:
        for (FormulaRef k : n.kids)
          if (!is_nnf(k)) return false;
        return true;
    }
  }

  FormulaRef to_nnf(FormulaRef f) { return nnf_walk(f, false); }

  // Progression. Unassigned atoms are kept symbolic (they then denote the
  // current-step value, useful when env and sys halves arrive separately).
  FormulaRef after(FormulaRef f, const Letter& l) {
    std::unordered_map<FormulaRef, FormulaRef> memo;
    return after_rec(f, l, memo);
  }

  // Propositional substitution of one atom by a constant, everywhere
  // (including below temporal operators). Used by the variable-ordering
  // heuristic, which treats "fixing" an atom purely syntactically.
  FormulaRef substitute(FormulaRef f, AtomId a, bool val) {
    std::unordered_map<FormulaRef, FormulaRef> memo;
    return subst_rec(f, a, val, memo);
  }

  // Number of distinct interned nodes reachable from f.
  size_t dag_size(FormulaRef f) const {
    std::set<FormulaRef> seen;
    collect(f, seen);
    return seen.size();
  }

  void atoms_of(FormulaRef f, std::set<AtomId>& out) const {
    const Node& n = nodes_[f];
    if (n.op == Op::Atom || n.op == Op::NotAtom) out.insert(n.atom);
    for (FormulaRef k : n.kids) atoms_of(k, out);
  }
  std::set<AtomId> atoms_of(FormulaRef f) const {
    std::set<AtomId> s;
    atoms_of(f, s);
    return s;
  }

  // Temporal subformulas (nodes rooted at a temporal operator), in
  // deterministic (ref-id) order.
  std::vector<FormulaRef> temporal_subformulas(FormulaRef f) const {
    std::set<FormulaRef> seen;
    collect(f, seen);
    std::vector<FormulaRef> out;
    for (FormulaRef r : seen)
      if (is_temporal(nodes_[r].op)) out.push_back(r);
    return out;
  }

  SynClass syntactic_class(FormulaRef f) const {
    if (in_safety(f) ) return SynClass::Safety;
    if (in_cosafety(f)) return SynClass::CoSafety;
    if (is_gf(f)) return SynClass::Buchi;
    if (is_fg(f)) return SynClass::CoBuchi;
    return SynClass::None;
  }

  bool in_safety(FormulaRef f) const {
    const Node& n = nodes_[f];
    switch (n.op) {
      case Op::True:
      case Op::False:
      case Op::Atom:
      case Op::NotAtom:
        return true;
      case Op::And:
      case Op::Or:
      case Op::Next:
      case Op::Release:
      case Op::WeakUntil:
      case Op::Always: {
        for (FormulaRef k : n.kids)
          if (!in_safety(k)) return false;
        return true;
      }
      default:
        return false;
    }
  }
  bool in_cosafety(FormulaRef f) const {
    const Node& n = nodes_[f];
    switch (n.op) {
      case Op::True:
      case Op::False:
      case Op::Atom:
      case Op::NotAtom:
        return true;
      case Op::And:
      case Op::Or:
      case Op::Next:
      case Op::Until:
      case Op::Eventually: {
        for (FormulaRef k : n.kids)
          if (!in_cosafety(k)) return false;
        return true;
      }
      default:
        return false;
    }
  }
  // recurrence shape: G psi with co-safety psi (GF psi is the special case)
  bool is_gf(FormulaRef f) const {
    const Node& n = nodes_[f];
    return n.op == Op::Always && in_cosafety(n.kids[0]);
  }
  // persistence shape: F psi with safety psi
  bool is_fg(FormulaRef f) const {
    const Node& n = nodes_[f];
    return n.op == Op::Eventually && in_safety(n.kids[0]);
  }
  // GF/FG-rooted formulas are prefix independent.
  bool prefix_independent(FormulaRef f) const {
    const Node& n = nodes_[f];
    if (n.op == Op::Always) return nodes_[n.kids[0]].op == Op::Eventually;
    if (n.op == Op::Eventually) return nodes_[n.kids[0]].op == Op::Always;
    return false;
  }

  NormalForm normalize(FormulaRef f) {
    FormulaRef r = normal_rewrite(f);
    NormalForm nf;
    nf.combination = build_comb(r, nf.leaves);
    return nf;
  }

  // The formula denoted by a normal form (leaf literals substituted back,
  // negated leaves wrapped in NNF negation).
  FormulaRef reconstruct(const NormalForm& nf) {
    return reconstruct_comb(nf.combination, nf.leaves);
  }

  std::string print(FormulaRef f) const { return print_prec(f, 0); }

  FormulaRef parse(std::string_view text);

 private:
  struct NodeKey {
    Op op;
    AtomId atom;
    std::vector<FormulaRef> kids;
    bool operator==(const NodeKey& o) const {
      return op == o.op && atom == o.atom && kids == o.kids;
    }
  };
  struct NodeKeyHash {
    size_t operator()(const NodeKey& k) const {
      size_t h = std::hash<uint32_t>()((uint32_t(k.op) << 24) ^ k.atom);
      for (FormulaRef r : k.kids) h = h * 1000003u + r;
      return h;
    }
  };

  FormulaRef intern(Node n) {
    NodeKey key{n.op, n.atom, n.kids};
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    FormulaRef r = static_cast<FormulaRef>(nodes_.size());
    nodes_.push_back(std::move(n));
    unique_.emplace(std::move(key), r);
    return r;
  }

  FormulaRef mk_nary(Op op, std::vector<FormulaRef> kids) {
    const FormulaRef unit = (op == Op::And) ? true_ : false_;
    const FormulaRef zero = (op == Op::And) ? false_ : true_;
    std::vector<FormulaRef> flat;
    for (FormulaRef k : kids) {
      if (k == zero) return zero;
      if (k == unit) continue;
      if (this->op(k) == op) {
        for (FormulaRef g : nodes_[k].kids) flat.push_back(g);
      } else {
        flat.push_back(k);
      }
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    // absorption: drop an Or-child of And (dually And-child of Or) that
    // contains a sibling; also x & G x == G x and x | F x == F x, which
    // keeps GF masters stable under progression
    Op dual = (op == Op::And) ? Op::Or : Op::And;
    Op wrap = (op == Op::And) ? Op::Always : Op::Eventually;
    std::set<FormulaRef> present(flat.begin(), flat.end());
    std::vector<FormulaRef> kept;
    for (FormulaRef k : flat) {
      bool absorbed = false;
      if (this->op(k) == dual) {
        for (FormulaRef g : nodes_[k].kids)
          if (present.count(g)) {
            absorbed = true;
            break;
          }
      }
      if (!absorbed) {
        for (FormulaRef s : flat)
          if (this->op(s) == wrap && nodes_[s].kids[0] == k) {
            absorbed = true;
            break;
          }
      }
      if (!absorbed) kept.push_back(k);
    }
    if (kept.empty()) return unit;
    if (kept.size() == 1) return kept[0];
    return intern(Node{op, 0, std::move(kept)});
  }

  FormulaRef nnf_walk(FormulaRef f, bool neg) {
    const Node n = nodes_[f];
    switch (n.op) {
      case Op::True:
        return neg ? false_ : true_;
      case Op::False:
        return neg ? true_ : false_;
      case Op::Atom:
        return neg ? natom(n.atom) : atom(n.atom);
      case Op::NotAtom:
        return neg ? atom(n.atom) : natom(n.atom);
      case Op::And: {
        std::vector<FormulaRef> ks;
        for (FormulaRef k : n.kids) ks.push_back(nnf_walk(k, neg));
        return neg ? mk_or(std::move(ks)) : mk_and(std::move(ks));
      }
      case Op::Or: {
        std::vector<FormulaRef> ks;
        for (FormulaRef k : n.kids) ks.push_back(nnf_walk(k, neg));
        return neg ? mk_and(std::move(ks)) : mk_or(std::move(ks));
      }
      case Op::Next:
        return mk_next(nnf_walk(n.kids[0], neg));
      case Op::Until: {
        FormulaRef l = nnf_walk(n.kids[0], neg), r = nnf_walk(n.kids[1], neg);
        return neg ? mk_release(l, r) : mk_until(l, r);
      }
      case Op::Release: {
        FormulaRef l = nnf_walk(n.kids[0], neg), r = nnf_walk(n.kids[1], neg);
        return neg ? mk_until(l, r) : mk_release(l, r);
      }
      case Op::WeakUntil: {
        if (!neg) {
          return mk_wuntil(nnf_walk(n.kids[0], false),
                           nnf_walk(n.kids[1], false));
        }
        // !(l W r) = (!l R !r) & F !l
        FormulaRef nl = nnf_walk(n.kids[0], true),
                   nr = nnf_walk(n.kids[1], true);
        return mk_and(mk_release(nl, nr), mk_eventually(nl));
      }
      case Op::Eventually:
        return neg ? mk_always(nnf_walk(n.kids[0], true))
                   : mk_eventually(nnf_walk(n.kids[0], false));
      case Op::Always:
        return neg ? mk_eventually(nnf_walk(n.kids[0], true))
                   : mk_always(nnf_walk(n.kids[0], false));
      case Op::Not:
        return nnf_walk(n.kids[0], !neg);
      case Op::Implies:
        // l -> r == !l | r
        return neg ? mk_and(nnf_walk(n.kids[0], false), nnf_walk(n.kids[1], true))
                   : mk_or(nnf_walk(n.kids[0], true), nnf_walk(n.kids[1], false));
      case Op::Equiv: {
        FormulaRef l = nnf_walk(n.kids[0], false), r = nnf_walk(n.kids[1], false);
        FormulaRef nl = nnf_walk(n.kids[0], true), nr = nnf_walk(n.kids[1], true);
        return neg ? mk_or(mk_and(l, nr), mk_and(nl, r))
                   : mk_or(mk_and(l, r), mk_and(nl, nr));
      }
    }
    return f;
  }

  FormulaRef after_rec(FormulaRef f, const Letter& l,
                       std::unordered_map<FormulaRef, FormulaRef>& memo) {
    auto it = memo.find(f);
    if (it != memo.end()) return it->second;
    const Node n = nodes_[f];
    FormulaRef res = f;
    switch (n.op) {
      case Op::True:
      case Op::False:
        res = f;
        break;
      case Op::Atom: {
        auto v = l.get(n.atom);
        res = !v ? f : (*v ? true_ : false_);
        break;
      }
      case Op::NotAtom: {
        auto v = l.get(n.atom);
        res = !v ? f : (*v ? false_ : true_);
        break;
      }
      case Op::And: {
        std::vector<FormulaRef> ks;
        for (FormulaRef k : n.kids) ks.push_back(after_rec(k, l, memo));
        res = mk_and(std::move(ks));
        break;
      }
      case Op::Or: {
        std::vector<FormulaRef> ks;
        for (FormulaRef k : n.kids) ks.push_back(after_rec(k, l, memo));
        res = mk_or(std::move(ks));
        break;
      }
      case Op::Next:
        res = n.kids[0];
        break;
      case Op::Until:
        // l U r == r | (l & X(l U r))
        res = mk_or(after_rec(n.kids[1], l, memo),
                    mk_and(after_rec(n.kids[0], l, memo), f));
        break;
      case Op::Release:
        // l R r == r & (l | X(l R r))
        res = mk_and(after_rec(n.kids[1], l, memo),
                     mk_or(after_rec(n.kids[0], l, memo), f));
        break;
      case Op::WeakUntil:
        res = mk_or(after_rec(n.kids[1], l, memo),
                    mk_and(after_rec(n.kids[0], l, memo), f));
        break;
      case Op::Eventually:
        res = mk_or(after_rec(n.kids[0], l, memo), f);
        break;
      case Op::Always:
        res = mk_and(after_rec(n.kids[0], l, memo), f);
        break;
      default:
        throw std::logic_error("after: formula not in NNF");
    }
    memo.emplace(f, res);
    return res;
  }

  FormulaRef subst_rec(FormulaRef f, AtomId a, bool val,
                       std::unordered_map<FormulaRef, FormulaRef>& memo) {
    auto it = memo.find(f);
    if (it != memo.end()) return it->second;
    const Node n = nodes_[f];
    FormulaRef res = f;
    switch (n.op) {
      case Op::Atom:
        res = (n.atom == a) ? (val ? true_ : false_) : f;
        break;
      case Op::NotAtom:
        res = (n.atom == a) ? (val ? false_ : true_) : f;
        break;
      case Op::And:
      case Op::Or: {
        std::vector<FormulaRef> ks;
        for (FormulaRef k : n.kids) ks.push_back(subst_rec(k, a, val, memo));
        res = (n.op == Op::And) ? mk_and(std::move(ks)) : mk_or(std::move(ks));
        break;
      }
      case Op::Next:
        res = mk_next(subst_rec(n.kids[0], a, val, memo));
        break;
      case Op::Until:
        res = mk_until(subst_rec(n.kids[0], a, val, memo),
                       subst_rec(n.kids[1], a, val, memo));
        break;
      case Op::Release:
        res = mk_release(subst_rec(n.kids[0], a, val, memo),
                         subst_rec(n.kids[1], a, val, memo));
        break;
      case Op::WeakUntil:
        res = mk_wuntil(subst_rec(n.kids[0], a, val, memo),
                        subst_rec(n.kids[1], a, val, memo));
        break;
      case Op::Eventually:
        res = mk_eventually(subst_rec(n.kids[0], a, val, memo));
        break;
      case Op::Always:
        res = mk_always(subst_rec(n.kids[0], a, val, memo));
        break;
      default:
        res = f;
        break;
    }
    memo.emplace(f, res);
    return res;
  }

  void collect(FormulaRef f, std::set<FormulaRef>& seen) const {
    if (!seen.insert(f).second) return;
    for (FormulaRef k : nodes_[f].kids) collect(k, seen);
  }

  // Fixed rewrite table of the normalization fragment. Everything that does
  // not classify after these rules is rejected.
  FormulaRef normal_rewrite(FormulaRef f) {
    const Node n = nodes_[f];
    switch (n.op) {
      case Op::And: {
        std::vector<FormulaRef> ks;
        for (FormulaRef k : n.kids) ks.push_back(normal_rewrite(k));
        return mk_and(std::move(ks));
      }
      case Op::Or: {
        std::vector<FormulaRef> ks;
        for (FormulaRef k : n.kids) ks.push_back(normal_rewrite(k));
        return mk_or(std::move(ks));
      }
      case Op::Next: {
        FormulaRef k = normal_rewrite(n.kids[0]);
        if (prefix_independent(k)) return k;  // X GF p == GF p
        return mk_next(k);
      }
      case Op::Eventually: {
        FormulaRef k = normal_rewrite(n.kids[0]);
        if (prefix_independent(k)) return k;  // F GF p == GF p
        if (op(k) == Op::Or) {
          // F distributes over disjunction
          std::vector<FormulaRef> ks;
          for (FormulaRef g : nodes_[k].kids)
            ks.push_back(normal_rewrite(mk_eventually(g)));
          return mk_or(std::move(ks));
        }
        if (in_safety(k) && !in_cosafety(k)) {
          // persistence: F p with safety p  ~~>  !G nnf(!p), a negated
          // Büchi leaf (FG c becomes !GF !c as in the standard example)
          FormulaRef gf = mk_always(to_nnf(mk_not(k)));
          return mk_not(gf);  // marker consumed by build_comb
        }
        return mk_eventually(k);
      }
      case Op::Always: {
        FormulaRef k = normal_rewrite(n.kids[0]);
        if (prefix_independent(k)) return k;  // G FG p == FG p
        if (op(k) == Op::And) {
          std::vector<FormulaRef> ks;
          for (FormulaRef g : nodes_[k].kids)
            ks.push_back(normal_rewrite(mk_always(g)));
          return mk_and(std::move(ks));
        }
        return mk_always(k);
      }
      case Op::Not: {
        // only produced by the FG rewrite above
        return mk_not(normal_rewrite(n.kids[0]));
      }
      default:
        return f;
    }
  }

  CombNode build_comb(FormulaRef f, std::vector<NormalLeaf>& leaves) {
    const Node& n = nodes_[f];
    if (n.op == Op::Not) {
      FormulaRef inner = n.kids[0];
      if (!is_gf(inner))
        throw UnsupportedFragment(
            "normalize: unsupported subformula " + print(f), print(f));
      CombNode c{CombNode::Leaf, add_leaf(leaves, inner, SynClass::Buchi, true), {}};
      return c;
    }
    SynClass cls = syntactic_class(f);
    if (cls == SynClass::Safety || cls == SynClass::CoSafety ||
        cls == SynClass::Buchi) {
      return CombNode{CombNode::Leaf, add_leaf(leaves, f, cls, false), {}};
    }
    if (n.op == Op::And || n.op == Op::Or) {
      CombNode c;
      c.kind = (n.op == Op::And) ? CombNode::CAnd : CombNode::COr;
      for (FormulaRef k : n.kids) c.kids.push_back(build_comb(k, leaves));
      return c;
    }
    throw UnsupportedFragment("normalize: unsupported subformula " + print(f),
                              print(f));
  }

  int add_leaf(std::vector<NormalLeaf>& leaves, FormulaRef f, SynClass cls,
               bool neg) {
    for (size_t i = 0; i < leaves.size(); ++i)
      if (leaves[i].formula == f && leaves[i].negated == neg)
        return static_cast<int>(i);
    leaves.push_back(NormalLeaf{f, cls, neg});
    return static_cast<int>(leaves.size() - 1);
  }

  FormulaRef reconstruct_comb(const CombNode& c,
                              const std::vector<NormalLeaf>& leaves) {
    switch (c.kind) {
      case CombNode::Leaf: {
        const NormalLeaf& l = leaves[c.leaf];
        return l.negated ? to_nnf(mk_not(l.formula)) : l.formula;
      }
      case CombNode::CAnd: {
        std::vector<FormulaRef> ks;
        for (const CombNode& k : c.kids)
          ks.push_back(reconstruct_comb(k, leaves));
        return mk_and(std::move(ks));
      }
      case CombNode::COr: {
        std::vector<FormulaRef> ks;
        for (const CombNode& k : c.kids)
          ks.push_back(reconstruct_comb(k, leaves));
        return mk_or(std::move(ks));
      }
    }
    return false_;
  }

  // Printing. Precedence: unary (4) > U/R/W (3) > & (2) > | (1) > ->/<-> (0).
  std::string print_prec(FormulaRef f, int min_prec) const {
    const Node& n = nodes_[f];
    auto wrap = [&](const std::string& s, int prec) {
      return prec < min_prec ? "(" + s + ")" : s;
    };
    switch (n.op) {
      case Op::True:
        return "true";
      case Op::False:
        return "false";
      case Op::Atom:
        return atom_name(n.atom);
      case Op::NotAtom:
        return "!" + atom_name(n.atom);
      case Op::Not:
        return "!" + print_prec(n.kids[0], 4);
      case Op::Next:
        return "X " + print_prec(n.kids[0], 4);
      case Op::Eventually:
        return "F " + print_prec(n.kids[0], 4);
      case Op::Always:
        return "G " + print_prec(n.kids[0], 4);
      case Op::Until:
        return wrap(print_prec(n.kids[0], 4) + " U " + print_prec(n.kids[1], 4), 3);
      case Op::Release:
        return wrap(print_prec(n.kids[0], 4) + " R " + print_prec(n.kids[1], 4), 3);
      case Op::WeakUntil:
        return wrap(print_prec(n.kids[0], 4) + " W " + print_prec(n.kids[1], 4), 3);
      case Op::And: {
        std::string s;
        for (size_t i = 0; i < n.kids.size(); ++i) {
          if (i) s += " & ";
          s += print_prec(n.kids[i], 3);
        }
        return wrap(s, 2);
      }
      case Op::Or: {
        std::string s;
        for (size_t i = 0; i < n.kids.size(); ++i) {
          if (i) s += " | ";
          s += print_prec(n.kids[i], 2);
        }
        return wrap(s, 1);
      }
      case Op::Implies:
        return wrap(print_prec(n.kids[0], 1) + " -> " + print_prec(n.kids[1], 0), 0);
      case Op::Equiv:
        return wrap(print_prec(n.kids[0], 1) + " <-> " + print_prec(n.kids[1], 0), 0);
    }
    return "?";
  }

  std::vector<Node> nodes_;
  std::unordered_map<NodeKey, FormulaRef, NodeKeyHash> unique_;
  std::vector<std::string> atom_names_;
  std::unordered_map<std::string, AtomId> atom_ids_;
  FormulaRef true_ = 0, false_ = 0;
};

// ---------------------------------------------------------------------------
// Parser. Surface syntax: atoms [a-zA-Z_][a-zA-Z0-9_]*, constants
// true/false/tt/ff, operators ! & | -> <-> X F G U R W, parentheses.
// Offsets in errors are 1-based byte positions.

namespace detail {

struct Token {
  enum Kind {
    End, LParen, RParen, NotTk, AndTk, OrTk, ImpliesTk, EquivTk,
    XTk, FTk, GTk, UTk, RTk, WTk, TrueTk, FalseTk, Ident
  } kind;
  size_t pos;  // 0-based byte offset
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}
  Token next() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' ||
                              s_[i_] == '\n' || s_[i_] == '\r'))
      ++i_;
    size_t start = i_;
    if (i_ >= s_.size()) return {Token::End, start, ""};
    char c = s_[i_];
    if (c == '(') { ++i_; return {Token::LParen, start, "("}; }
    if (c == ')') { ++i_; return {Token::RParen, start, ")"}; }
    if (c == '!') { ++i_; return {Token::NotTk, start, "!"}; }
    if (c == '&') { ++i_; if (i_ < s_.size() && s_[i_] == '&') ++i_; return {Token::AndTk, start, "&"}; }
    if (c == '|') { ++i_; if (i_ < s_.size() && s_[i_] == '|') ++i_; return {Token::OrTk, start, "|"}; }
    if (c == '-') {
      if (i_ + 1 < s_.size() && s_[i_ + 1] == '>') { i_ += 2; return {Token::ImpliesTk, start, "->"}; }
      throw SyntaxError(start + 1, "'->'", err_msg(start, "'->'"));
    }
    if (c == '<') {
      if (i_ + 2 < s_.size() && s_[i_ + 1] == '-' && s_[i_ + 2] == '>') {
        i_ += 3;
        return {Token::EquivTk, start, "<->"};
      }
      throw SyntaxError(start + 1, "'<->'", err_msg(start, "'<->'"));
    }
    if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i_;
      while (j < s_.size() && (isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
      std::string word(s_.substr(i_, j - i_));
      i_ = j;
      if (word == "true" || word == "tt") return {Token::TrueTk, start, word};
      if (word == "false" || word == "ff") return {Token::FalseTk, start, word};
      if (word == "X") return {Token::XTk, start, word};
      if (word == "F") return {Token::FTk, start, word};
      if (word == "G") return {Token::GTk, start, word};
      if (word == "U") return {Token::UTk, start, word};
      if (word == "R") return {Token::RTk, start, word};
      if (word == "W") return {Token::WTk, start, word};
      return {Token::Ident, start, word};
    }
    throw SyntaxError(start + 1, "formula",
                      err_msg(start, "a formula token"));
  }
  static std::string err_msg(size_t pos0, const std::string& expected) {
    return "syntax error at offset " + std::to_string(pos0 + 1) +
           ": expected " + expected;
  }

 private:
  std::string_view s_;
  size_t i_ = 0;
};

class Parser {
 public:
  Parser(FormulaStore& st, std::string_view text) : st_(st), lex_(text) {
    advance();
  }

  FormulaRef parse() {
    FormulaRef f = parse_equiv();
    expect(Token::End, "end of input");
    return f;
  }

 private:
  void advance() { tok_ = lex_.next(); }
  void expect(Token::Kind k, const std::string& what) {
    if (tok_.kind != k)
      throw SyntaxError(tok_.pos + 1, what, Lexer::err_msg(tok_.pos, what));
    advance();
  }

  FormulaRef parse_equiv() {
    FormulaRef l = parse_or();
    while (tok_.kind == Token::ImpliesTk || tok_.kind == Token::EquivTk) {
      bool eq = tok_.kind == Token::EquivTk;
      advance();
      FormulaRef r = parse_or();
      l = eq ? st_.mk_equiv(l, r) : st_.mk_implies(l, r);
    }
    return l;
  }
  FormulaRef parse_or() {
    FormulaRef l = parse_and();
    while (tok_.kind == Token::OrTk) {
      advance();
      l = st_.mk_or(l, parse_and());
    }
    return l;
  }
  FormulaRef parse_and() {
    FormulaRef l = parse_binary_temporal();
    while (tok_.kind == Token::AndTk) {
      advance();
      l = st_.mk_and(l, parse_binary_temporal());
    }
    return l;
  }
  FormulaRef parse_binary_temporal() {
    FormulaRef l = parse_unary();
    // U/R/W are right associative
    if (tok_.kind == Token::UTk || tok_.kind == Token::RTk ||
        tok_.kind == Token::WTk) {
      Token::Kind k = tok_.kind;
      advance();
      FormulaRef r = parse_binary_temporal();
      if (k == Token::UTk) return st_.mk_until(l, r);
      if (k == Token::RTk) return st_.mk_release(l, r);
      return st_.mk_wuntil(l, r);
    }
    return l;
  }
  FormulaRef parse_unary() {
    switch (tok_.kind) {
      case Token::NotTk:
        advance();
        return st_.mk_not(parse_unary());
      case Token::XTk:
        advance();
        return st_.mk_next(parse_unary());
      case Token::FTk:
        advance();
        return st_.mk_eventually(parse_unary());
      case Token::GTk:
        advance();
        return st_.mk_always(parse_unary());
      case Token::TrueTk:
        advance();
        return st_.tt();
      case Token::FalseTk:
        advance();
        return st_.ff();
      case Token::Ident: {
        FormulaRef f = st_.atom(tok_.text);
        advance();
        return f;
      }
      case Token::LParen: {
        advance();
        FormulaRef f = parse_equiv();
        expect(Token::RParen, "')'");
        return f;
      }
      default:
        throw SyntaxError(tok_.pos + 1, "formula",
                          Lexer::err_msg(tok_.pos, "a formula"));
    }
  }

  FormulaStore& st_;
  Lexer lex_;
  Token tok_;
};

}  // namespace detail

inline FormulaRef FormulaStore::parse(std::string_view text) {
  detail::Parser p(*this, text);
  return p.parse();
}

}  // namespace semml
