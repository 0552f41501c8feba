#pragma once

// Shared-node BDDs with complement edges. One terminal node (true); a
// function and its negation share the same node and differ in the
// complement bit of the reference. Canonical form: the then-edge of a node
// never carries a complement bit.

#include <cstdint>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "semml/ltl.hpp"

namespace semml {

// (node index << 1) | complement bit
using BddRef = uint32_t;

enum class BoolOp { And, Or, Xor };

class BddLimitExceeded : public std::runtime_error {
 public:
  BddLimitExceeded() : std::runtime_error("bdd: node limit exceeded") {}
};

class BddStore {
 public:
  explicit BddStore(uint32_t num_vars = 0, size_t node_limit = 1u << 24)
      : node_limit_(node_limit) {
    nodes_.push_back(Node{kTermVar, 0, 0});  // terminal (true)
    table_.assign(1 << 12, kEmpty);
    for (uint32_t i = 0; i < num_vars; ++i) add_var();
  }

  static constexpr BddRef kTrue = 0;
  static constexpr BddRef kFalse = 1;

  BddRef tt() const { return kTrue; }
  BddRef ff() const { return kFalse; }
  static BddRef neg(BddRef f) { return f ^ 1u; }
  static bool is_complemented(BddRef f) { return f & 1u; }
  static uint32_t node_index(BddRef f) { return f >> 1; }

  uint32_t add_var() {
    uint32_t v = num_vars_++;
    return v;
  }
  uint32_t num_vars() const { return num_vars_; }
  size_t node_count() const { return nodes_.size(); }

  BddRef var(uint32_t v) { return mk(v, kTrue, kFalse); }
  BddRef nvar(uint32_t v) { return neg(var(v)); }
  BddRef literal(uint32_t v, bool positive) {
    return positive ? var(v) : nvar(v);
  }

  uint32_t top_var(BddRef f) const { return nodes_[f >> 1].var; }
  bool is_terminal(BddRef f) const { return (f >> 1) == 0; }

  // cofactors carry the reference's complement bit down
  BddRef hi(BddRef f) const { return nodes_[f >> 1].hi ^ (f & 1u); }
  BddRef lo(BddRef f) const { return nodes_[f >> 1].lo ^ (f & 1u); }

  void set_cache_enabled(bool on) {
    cache_enabled_ = on;
    if (!on) {
      ite_cache_.clear();
      restrict_cache_.clear();
    }
  }

  BddRef ite(BddRef f, BddRef g, BddRef h) {
    if (f == kTrue) return g;
    if (f == kFalse) return h;
    if (g == h) return g;
    if (g == kTrue && h == kFalse) return f;
    if (g == kFalse && h == kTrue) return neg(f);
    if (f == g) return ite(f, kTrue, h);
    if (f == neg(g)) return ite(f, kFalse, h);
    if (f == h) return ite(f, g, kFalse);
    if (f == neg(h)) return ite(f, g, kTrue);
    // normalize: predicate not complemented, then-branch not complemented
    if (is_complemented(f)) {
      f = neg(f);
      std::swap(g, h);
    }
    bool flip = false;
    if (is_complemented(g)) {
      g = neg(g);
      h = neg(h);
      flip = true;
    }
    uint64_t key = cache_key(f, g, h);
    if (cache_enabled_) {
      auto it = ite_cache_.find(key);
      if (it != ite_cache_.end()) return flip ? neg(it->second) : it->second;
    }
    uint32_t v = std::min({top_var(f), top_var(g), top_var(h)});
    BddRef t = ite(cof(f, v, true), cof(g, v, true), cof(h, v, true));
    BddRef e = ite(cof(f, v, false), cof(g, v, false), cof(h, v, false));
    BddRef r = mk(v, t, e);
    if (cache_enabled_) ite_cache_.emplace(key, r);
    return flip ? neg(r) : r;
  }

  BddRef and_(BddRef f, BddRef g) { return ite(f, g, kFalse); }
  BddRef or_(BddRef f, BddRef g) { return ite(f, kTrue, g); }
  BddRef xor_(BddRef f, BddRef g) { return ite(f, neg(g), g); }

  BddRef apply(BoolOp op, BddRef f, BddRef g) {
    switch (op) {
      case BoolOp::And: return and_(f, g);
      case BoolOp::Or: return or_(f, g);
      case BoolOp::Xor: return xor_(f, g);
    }
    return kFalse;
  }

  // Coudert-Madre sibling substitution: g agrees with f on the care set h,
  // built from f's structure only, so it never has more nodes than f (a
  // final size guard enforces this even in adversarial variable layouts).
  BddRef restrict_(BddRef f, BddRef h) {
    if (h == kFalse) throw std::invalid_argument("restrict: empty care set");
    restrict_cache_.clear();
    BddRef g = restrict_rec(f, h);
    if (dag_size(g) > dag_size(f)) return f;
    return g;
  }

  uint64_t satcount(BddRef f, uint32_t nvars) const {
    if (nvars > 62) throw std::invalid_argument("satcount: too many vars");
    std::unordered_map<uint32_t, uint64_t> memo;
    return count_from(f, 0, nvars, memo);
  }

  bool eval(BddRef f, const std::vector<bool>& assignment) const {
    while (!is_terminal(f)) {
      uint32_t v = top_var(f);
      f = assignment[v] ? hi(f) : lo(f);
    }
    return f == kTrue;
  }

  BddRef cofactor(BddRef f, uint32_t v, bool val) {
    std::unordered_map<BddRef, BddRef> memo;
    return cofactor_rec(f, v, val, memo);
  }

  // existential quantification of one variable
  BddRef exists(BddRef f, uint32_t v) {
    return or_(cofactor(f, v, true), cofactor(f, v, false));
  }

  std::set<uint32_t> support(BddRef f) const {
    std::set<uint32_t> vars;
    std::set<uint32_t> seen;
    support_rec(f >> 1, vars, seen);
    return vars;
  }

  size_t dag_size(BddRef f) const {
    std::set<uint32_t> seen;
    count_nodes(f >> 1, seen);
    return seen.size();
  }

  // Smallest satisfying assignment (variables outside the support are set
  // to false). Deterministic witness extraction.
  std::vector<bool> pick_assignment(BddRef f, uint32_t nvars) const {
    if (f == kFalse)
      throw std::invalid_argument("pick_assignment: unsatisfiable");
    std::vector<bool> out(nvars, false);
    BddRef cur = f;
    while (!is_terminal(cur)) {
      uint32_t v = top_var(cur);
      if (lo(cur) != kFalse) {
        cur = lo(cur);
      } else {
        out[v] = true;
        cur = hi(cur);
      }
    }
    return out;
  }

  // All paths to true as cubes (var, value); used by printers.
  void cubes(BddRef f,
             const std::function<void(const std::vector<std::pair<uint32_t, bool>>&)>& fn) const {
    std::vector<std::pair<uint32_t, bool>> cube;
    cubes_rec(f, cube, fn);
  }

  std::string dot(BddRef f, const std::function<std::string(uint32_t)>& var_name) const {
    std::ostringstream os;
    os << "digraph bdd {\n  node [shape=circle];\n";
    std::set<uint32_t> seen;
    std::vector<uint32_t> stack{f >> 1};
    os << "  init [shape=point];\n  init -> n" << (f >> 1)
       << (is_complemented(f) ? " [arrowhead=odot]" : "") << ";\n";
    while (!stack.empty()) {
      uint32_t n = stack.back();
      stack.pop_back();
      if (!seen.insert(n).second) continue;
      if (n == 0) {
        os << "  n0 [shape=box,label=\"1\"];\n";
        continue;
      }
      const Node& nd = nodes_[n];
      os << "  n" << n << " [label=\"" << var_name(nd.var) << "\"];\n";
      os << "  n" << n << " -> n" << (nd.hi >> 1) << " [style=solid];\n";
      os << "  n" << n << " -> n" << (nd.lo >> 1) << " [style=dashed"
         << (is_complemented(nd.lo) ? ",arrowhead=odot" : "") << "];\n";
      stack.push_back(nd.hi >> 1);
      stack.push_back(nd.lo >> 1);
    }
    os << "}\n";
    return os.str();
  }

 private:
  static constexpr uint32_t kTermVar = 0xffffffffu;
  static constexpr uint32_t kEmpty = 0xffffffffu;

  struct Node {
    uint32_t var;
    BddRef hi;  // never complemented
    BddRef lo;
  };

  BddRef mk(uint32_t v, BddRef t, BddRef e) {
    if (t == e) return t;
    if (is_complemented(t)) return neg(mk(v, neg(t), neg(e)));
    uint64_t h = node_hash(v, t, e);
    size_t mask = table_.size() - 1;
    size_t idx = h & mask;
    while (table_[idx] != kEmpty) {
      const Node& n = nodes_[table_[idx]];
      if (n.var == v && n.hi == t && n.lo == e) return table_[idx] << 1;
      idx = (idx + 1) & mask;
    }
    if (nodes_.size() >= node_limit_) throw BddLimitExceeded();
    uint32_t ni = static_cast<uint32_t>(nodes_.size());
    nodes_.push_back(Node{v, t, e});
    table_[idx] = ni;
    if (nodes_.size() * 10 > table_.size() * 7) rehash();
    return ni << 1;
  }

  void rehash() {
    std::vector<uint32_t> fresh(table_.size() * 2, kEmpty);
    size_t mask = fresh.size() - 1;
    for (uint32_t ni = 1; ni < nodes_.size(); ++ni) {
      const Node& n = nodes_[ni];
      size_t idx = node_hash(n.var, n.hi, n.lo) & mask;
      while (fresh[idx] != kEmpty) idx = (idx + 1) & mask;
      fresh[idx] = ni;
    }
    table_ = std::move(fresh);
  }

  static uint64_t node_hash(uint32_t v, BddRef t, BddRef e) {
    uint64_t h = v;
    h = h * 0x9e3779b97f4a7c15ull + t;
    h = h * 0x9e3779b97f4a7c15ull + e;
    return h ^ (h >> 29);
  }
  static uint64_t cache_key(BddRef f, BddRef g, BddRef h) {
    uint64_t k = f;
    k = (k << 21) ^ g;
    k = (k << 21) ^ h;
    return k;
  }

  // valid when v is at or above f's top variable (used inside ite)
  BddRef cof(BddRef f, uint32_t v, bool val) const {
    if (is_terminal(f) || top_var(f) != v) return f;
    return val ? hi(f) : lo(f);
  }

  BddRef cofactor_rec(BddRef f, uint32_t v, bool val,
                      std::unordered_map<BddRef, BddRef>& memo) {
    if (is_terminal(f) || top_var(f) > v) return f;
    if (top_var(f) == v) return val ? hi(f) : lo(f);
    auto it = memo.find(f);
    if (it != memo.end()) return it->second;
    BddRef r = mk(top_var(f), cofactor_rec(hi(f), v, val, memo),
                  cofactor_rec(lo(f), v, val, memo));
    memo.emplace(f, r);
    return r;
  }

  BddRef restrict_rec(BddRef f, BddRef h) {
    if (h == kTrue || is_terminal(f)) return f;
    uint64_t key = cache_key(f, h, 0);
    auto it = restrict_cache_.find(key);
    if (it != restrict_cache_.end()) return it->second;
    uint32_t vf = top_var(f), vh = top_var(h);
    BddRef r;
    if (vh < vf) {
      r = restrict_rec(f, or_(hi(h), lo(h)));
    } else if (vh == vf) {
      BddRef h1 = hi(h), h0 = lo(h);
      if (h1 == kFalse) {
        r = restrict_rec(lo(f), h0);
      } else if (h0 == kFalse) {
        r = restrict_rec(hi(f), h1);
      } else {
        r = mk(vf, restrict_rec(hi(f), h1), restrict_rec(lo(f), h0));
      }
    } else {
      r = mk(vf, restrict_rec(hi(f), h), restrict_rec(lo(f), h));
    }
    restrict_cache_.emplace(key, r);
    return r;
  }

  uint64_t count_from(BddRef f, uint32_t level, uint32_t nvars,
                      std::unordered_map<uint32_t, uint64_t>& memo) const {
    uint32_t v = is_terminal(f) ? nvars : top_var(f);
    uint64_t below;  // models over vars [v, nvars) of the positive node
    if (is_terminal(f)) {
      below = 1;
    } else {
      auto it = memo.find(f >> 1);
      if (it != memo.end()) {
        below = it->second;
      } else {
        const Node& n = nodes_[f >> 1];
        below = count_from(n.hi, n.var + 1, nvars, memo) +
                count_from(n.lo, n.var + 1, nvars, memo);
        memo.emplace(f >> 1, below);
      }
    }
    if (is_complemented(f)) below = (1ull << (nvars - v)) - below;
    return below << (v - level);
  }

  void support_rec(uint32_t n, std::set<uint32_t>& vars,
                   std::set<uint32_t>& seen) const {
    if (n == 0 || !seen.insert(n).second) return;
    vars.insert(nodes_[n].var);
    support_rec(nodes_[n].hi >> 1, vars, seen);
    support_rec(nodes_[n].lo >> 1, vars, seen);
  }
  void count_nodes(uint32_t n, std::set<uint32_t>& seen) const {
    if (n == 0 || !seen.insert(n).second) return;
    count_nodes(nodes_[n].hi >> 1, seen);
    count_nodes(nodes_[n].lo >> 1, seen);
  }
  void cubes_rec(BddRef f, std::vector<std::pair<uint32_t, bool>>& cube,
                 const std::function<void(const std::vector<std::pair<uint32_t, bool>>&)>& fn) const {
    if (f == kFalse) return;
    if (f == kTrue) {
      fn(cube);
      return;
    }
    uint32_t v = top_var(f);
    cube.emplace_back(v, true);
    cubes_rec(hi(f), cube, fn);
    cube.back().second = false;
    cubes_rec(lo(f), cube, fn);
    cube.pop_back();
  }

  std::vector<Node> nodes_;
  std::vector<uint32_t> table_;
  uint32_t num_vars_ = 0;
  size_t node_limit_;
  bool cache_enabled_ = true;
  std::unordered_map<uint64_t, BddRef> ite_cache_;
  std::unordered_map<uint64_t, BddRef> restrict_cache_;
};

// ---------------------------------------------------------------------------
// Variable ordering heuristic: environment atoms before system atoms before
// temporal subformulas; within each group descending by how much fixing the
// variable shrinks the formula.

struct VarOrder {
  std::vector<AtomId> atoms;  // env group first, then sys group
  size_t env_count = 0;
  std::vector<FormulaRef> temporals;
};

inline VarOrder order_variables(FormulaStore& st, FormulaRef f,
                                const Partition& part) {
  double base = static_cast<double>(st.dag_size(f));
  auto score_atom = [&](AtomId a) {
    double t = static_cast<double>(st.dag_size(st.substitute(f, a, true)));
    double e = static_cast<double>(st.dag_size(st.substitute(f, a, false)));
    return base - 0.5 * (t + e);
  };
  auto sorted_group = [&](std::vector<AtomId> group) {
    std::vector<std::pair<double, AtomId>> scored;
    for (AtomId a : group) scored.emplace_back(score_atom(a), a);
    std::sort(scored.begin(), scored.end(), [&](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return st.atom_name(x.second) < st.atom_name(y.second);
    });
    std::vector<AtomId> out;
    for (auto& [s, a] : scored) out.push_back(a);
    return out;
  };
  VarOrder order;
  for (AtomId a : sorted_group(part.env)) order.atoms.push_back(a);
  order.env_count = order.atoms.size();
  for (AtomId a : sorted_group(part.sys)) order.atoms.push_back(a);

  // temporal subformulas, scored by substituting the subformula itself
  std::vector<FormulaRef> temps = st.temporal_subformulas(f);
  std::vector<std::pair<double, FormulaRef>> scored;
  for (FormulaRef t : temps) {
    // reuse the atom machinery: substituting a subformula is approximated
    // by its dag weight (larger removable chunks first)
    scored.emplace_back(static_cast<double>(st.dag_size(t)), t);
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  for (auto& [s, t] : scored) order.temporals.push_back(t);
  return order;
}

// Bridge for propositional-equivalence checks: atoms map to their position
// in `order`, temporal subformulas become opaque variables after the atoms.
class FormulaBdd {
 public:
  FormulaBdd(FormulaStore& st, const std::vector<AtomId>& atom_order)
      : st_(st), bdd_(static_cast<uint32_t>(atom_order.size())) {
    for (size_t i = 0; i < atom_order.size(); ++i)
      atom_var_[atom_order[i]] = static_cast<uint32_t>(i);
  }

  BddStore& store() { return bdd_; }

  BddRef encode(FormulaRef f) {
    const auto& n = st_.node(f);
    switch (n.op) {
      case Op::True: return bdd_.tt();
      case Op::False: return bdd_.ff();
      case Op::Atom: return bdd_.var(atom_var_.at(n.atom));
      case Op::NotAtom: return bdd_.nvar(atom_var_.at(n.atom));
      case Op::And: {
        BddRef r = bdd_.tt();
        for (FormulaRef k : n.kids) r = bdd_.and_(r, encode(k));
        return r;
      }
      case Op::Or: {
        BddRef r = bdd_.ff();
        for (FormulaRef k : n.kids) r = bdd_.or_(r, encode(k));
        return r;
      }
      default:
        return bdd_.var(temporal_var(f));
    }
  }

  bool prop_equal(FormulaRef f, FormulaRef g) { return encode(f) == encode(g); }

 private:
  uint32_t temporal_var(FormulaRef f) {
    auto it = temporal_var_.find(f);
    if (it != temporal_var_.end()) return it->second;
    uint32_t v = bdd_.add_var();
    temporal_var_.emplace(f, v);
    return v;
  }

  FormulaStore& st_;
  BddStore bdd_;
  std::unordered_map<AtomId, uint32_t> atom_var_;
  std::unordered_map<FormulaRef, uint32_t> temporal_var_;
};

}  // namespace semml
