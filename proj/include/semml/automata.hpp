#pragma once

// On-demand semantic translation from a normalized LTL formula to a
// deterministic parity automaton: one progression-based Büchi sub-automaton
// per normal-form leaf, an Emerson-Lei product whose states carry the
// boolean combination plus per-leaf master/breakpoint formulas, and a
// Zielonka-tree acceptance automaton. States are identified purely by this
// labelling, so successors can be computed locally.

#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "semml/bdd.hpp"
#include "semml/ltl.hpp"

namespace semml {

class TranslationLimit : public std::runtime_error {
 public:
  explicit TranslationLimit(const std::string& what)
      : std::runtime_error("translation: " + what) {}
};

// ---------------------------------------------------------------------------
// Positive boolean combinations over sub-automaton literals, hash-consed so
// that equal combinations share one id. Literals may be negated (co-Büchi
// leaves enter negatively); internal nodes are And/Or only.

class CombStore {
 public:
  enum Kind : uint8_t { False_, True_, Lit, And_, Or_ };
  struct CNode {
    Kind kind;
    int leaf = -1;
    bool neg = false;
    std::vector<int> kids;
  };

  CombStore() {
    false_ = intern(CNode{False_, -1, false, {}});
    true_ = intern(CNode{True_, -1, false, {}});
  }

  int mk_false() const { return false_; }
  int mk_true() const { return true_; }
  int mk_lit(int leaf, bool neg) { return intern(CNode{Lit, leaf, neg, {}}); }
  int mk_and(std::vector<int> kids) { return mk_nary(And_, std::move(kids)); }
  int mk_or(std::vector<int> kids) { return mk_nary(Or_, std::move(kids)); }

  const CNode& node(int c) const { return nodes_[c]; }
  bool is_true(int c) const { return c == true_; }
  bool is_false(int c) const { return c == false_; }
  bool is_const(int c) const { return c == true_ || c == false_; }

  int substitute(int c, int leaf, bool value) {
    const CNode& n = nodes_[c];
    switch (n.kind) {
      case False_:
      case True_:
        return c;
      case Lit:
        if (n.leaf != leaf) return c;
        return (n.neg ? !value : value) ? true_ : false_;
      case And_:
      case Or_: {
        std::vector<int> kids;
        for (int k : n.kids) kids.push_back(substitute(k, leaf, value));
        return n.kind == And_ ? mk_and(std::move(kids))
                              : mk_or(std::move(kids));
      }
    }
    return c;
  }

  bool eval(int c, const std::set<int>& inf) const {
    const CNode& n = nodes_[c];
    switch (n.kind) {
      case False_: return false;
      case True_: return true;
      case Lit: {
        bool v = inf.count(n.leaf) != 0;
        return n.neg ? !v : v;
      }
      case And_:
        for (int k : n.kids)
          if (!eval(k, inf)) return false;
        return true;
      case Or_:
        for (int k : n.kids)
          if (eval(k, inf)) return true;
        return false;
    }
    return false;
  }

  void leaves_of(int c, std::set<int>& out) const {
    const CNode& n = nodes_[c];
    if (n.kind == Lit) out.insert(n.leaf);
    for (int k : n.kids) leaves_of(k, out);
  }

  std::string print(int c,
                    const std::function<std::string(int, bool)>& lit) const {
    const CNode& n = nodes_[c];
    switch (n.kind) {
      case False_: return "false";
      case True_: return "true";
      case Lit: return lit(n.leaf, n.neg);
      case And_:
      case Or_: {
        std::string sep = n.kind == And_ ? " & " : " | ";
        std::string s = "(";
        for (size_t i = 0; i < n.kids.size(); ++i) {
          if (i) s += sep;
          s += print(n.kids[i], lit);
        }
        return s + ")";
      }
    }
    return "?";
  }

 private:
  struct Key {
    Kind kind;
    int leaf;
    bool neg;
    std::vector<int> kids;
    bool operator==(const Key& o) const {
      return kind == o.kind && leaf == o.leaf && neg == o.neg && kids == o.kids;
    }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      size_t h = (size_t(k.kind) << 20) ^ (size_t(k.leaf + 1) << 1) ^ k.neg;
      for (int x : k.kids) h = h * 1000003u + static_cast<size_t>(x + 1);
      return h;
    }
  };

  int intern(CNode n) {
    Key key{n.kind, n.leaf, n.neg, n.kids};
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
    unique_.emplace(std::move(key), id);
    return id;
  }

  int mk_nary(Kind kind, std::vector<int> kids) {
    int unit = kind == And_ ? true_ : false_;
    int zero = kind == And_ ? false_ : true_;
    std::vector<int> flat;
    for (int k : kids) {
      if (k == zero) return zero;
      if (k == unit) continue;
      if (nodes_[k].kind == kind)
        for (int g : nodes_[k].kids) flat.push_back(g);
      else
        flat.push_back(k);
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    if (flat.empty()) return unit;
    if (flat.size() == 1) return flat[0];
    return intern(CNode{kind, -1, false, std::move(flat)});
  }

  std::vector<CNode> nodes_;
  std::unordered_map<Key, int, KeyHash> unique_;
  int true_ = 0, false_ = 0;
};

// ---------------------------------------------------------------------------
// Zielonka trees. Node labels are color sets; children carry the maximal
// proper subsets whose acceptance flips. Priorities: root is 1 when
// rejecting and 2 when accepting, each level adds one, so accepting nodes
// are always even under the min-even convention.

struct ZTreeNode {
  std::vector<int> colors;
  bool accepting;
  int priority;
  int parent;
  std::vector<int> children;
  int first_leaf = 0, last_leaf = 0;  // leaf positions under this subtree
};

struct ZTree {
  std::vector<ZTreeNode> nodes;
  std::vector<int> leaves;  // node ids in DFS order
  int height = 1;

  size_t leaf_count() const { return leaves.size(); }
  int max_priority() const { return nodes.empty() ? 1 : height_prio_; }
  int height_prio_ = 1;

  struct Step {
    int priority;
    int next_leaf_pos;
  };

  // anchor: deepest ancestor-or-self of the current leaf whose label
  // contains every emitted color; the run then advances to the next leaf
  // (cyclically) below the anchor.
  Step step(int leaf_pos, const std::vector<int>& emitted) const {
    int node = leaves[leaf_pos];
    while (true) {
      const ZTreeNode& n = nodes[node];
      bool covers = true;
      for (int c : emitted)
        if (std::find(n.colors.begin(), n.colors.end(), c) == n.colors.end()) {
          covers = false;
          break;
        }
      if (covers) {
        int next = leaf_pos + 1 > n.last_leaf ? n.first_leaf : leaf_pos + 1;
        return {n.priority, next};
      }
      node = n.parent;
    }
  }
};

// acc(Y) evaluates `cond` with inf(c) := c in Y.
inline ZTree build_zielonka_tree(const CombStore& combs, int cond,
                                 std::vector<int> colors) {
  std::sort(colors.begin(), colors.end());
  if (colors.size() > 20)
    throw TranslationLimit("too many colors for a Zielonka tree");
  ZTree tree;

  auto acc_of = [&](uint32_t mask) {
    std::set<int> inf;
    for (size_t i = 0; i < colors.size(); ++i)
      if (mask & (1u << i)) inf.insert(colors[i]);
    return combs.eval(cond, inf);
  };

  std::function<int(uint32_t, int, int)> build = [&](uint32_t mask, int parent,
                                                     int prio) -> int {
    bool acc = acc_of(mask);
    int id = static_cast<int>(tree.nodes.size());
    ZTreeNode node;
    for (size_t i = 0; i < colors.size(); ++i)
      if (mask & (1u << i)) node.colors.push_back(colors[i]);
    node.accepting = acc;
    node.priority = prio;
    node.parent = parent;
    tree.nodes.push_back(node);
    // maximal proper subsets with flipped acceptance
    std::vector<uint32_t> flipped;
    for (uint32_t sub = mask; ; sub = (sub - 1) & mask) {
      if (sub != mask && acc_of(sub) != acc) flipped.push_back(sub);
      if (sub == 0) break;
    }
    std::vector<uint32_t> maximal;
    for (uint32_t s : flipped) {
      bool dominated = false;
      for (uint32_t t : flipped)
        if (t != s && (s & t) == s) {
          dominated = true;
          break;
        }
      if (!dominated) maximal.push_back(s);
    }
    std::sort(maximal.begin(), maximal.end(), [](uint32_t a, uint32_t b) {
      int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
      if (pa != pb) return pa > pb;
      return a < b;
    });
    if (maximal.empty()) {
      int pos = static_cast<int>(tree.leaves.size());
      tree.leaves.push_back(id);
      tree.nodes[id].first_leaf = tree.nodes[id].last_leaf = pos;
    } else {
      int first = static_cast<int>(tree.leaves.size());
      for (uint32_t s : maximal) {
        int child = build(s, id, prio + 1);
        tree.nodes[id].children.push_back(child);
      }
      tree.nodes[id].first_leaf = first;
      tree.nodes[id].last_leaf = static_cast<int>(tree.leaves.size()) - 1;
    }
    return id;
  };

  uint32_t full = colors.empty() ? 0 : (1u << colors.size()) - 1;
  int root_prio = acc_of(full) ? 2 : 1;
  build(full, -1, root_prio);
  int maxp = 0;
  for (const auto& n : tree.nodes) maxp = std::max(maxp, n.priority);
  tree.height_prio_ = maxp;
  tree.height = maxp - root_prio + 1;
  return tree;
}

// ---------------------------------------------------------------------------
// DPA builder

constexpr FormulaRef kNoFormula = 0xffffffffu;

struct SubState {
  FormulaRef master = kNoFormula;
  FormulaRef breakpoint = kNoFormula;  // Büchi leaves only
  bool operator==(const SubState& o) const {
    return master == o.master && breakpoint == o.breakpoint;
  }
};

struct DelaState {
  int comb;  // combination over live leaf indices
  std::vector<std::pair<int, SubState>> live;  // sorted by leaf index
  bool operator==(const DelaState& o) const {
    return comb == o.comb && live == o.live;
  }
};

struct DpaOptions {
  bool conditional = true;
  size_t max_states = 1u << 20;
  size_t max_support = 16;
};

class DpaBuilder {
 public:
  using StateId = uint32_t;

  struct Edge {
    BddRef guard;  // over the builder's atom variables
    StateId dst;
    int priority;
  };

  using Options = DpaOptions;

  DpaBuilder(FormulaStore& fs, BddStore& bdd,
             const std::vector<AtomId>& atom_order, FormulaRef nnf_formula,
             const Partition& part, Options opt = Options())
      : fs_(fs), bdd_(bdd), part_(part), opt_(opt) {
    for (size_t i = 0; i < atom_order.size(); ++i)
      var_of_atom_[atom_order[i]] = static_cast<uint32_t>(i);
    nf_ = fs_.normalize(nnf_formula);
    // initial combination with polarity folded into the literals
    int comb = comb_of(nf_.combination);
    DelaState init;
    init.comb = comb;
    for (size_t i = 0; i < nf_.leaves.size(); ++i) {
      SubState s;
      s.master = nf_.leaves[i].formula;
      if (nf_.leaves[i].cls == SynClass::Buchi)
        s.breakpoint = inner_of_gf(s.master);
      init.live.emplace_back(static_cast<int>(i), s);
    }
    settle(init);  // fold leaves that are decided from the start
    initial_ = intern_state(intern_dela(std::move(init)), 0);
  }

  StateId initial() const { return initial_; }
  size_t num_states() const { return states_.size(); }
  const NormalForm& normal_form() const { return nf_; }
  CombStore& combs() { return combs_; }
  uint32_t var_of_atom(AtomId a) const { return var_of_atom_.at(a); }

  const DelaState& dela_of(StateId s) const { return delas_[states_[s].dela]; }
  int leaf_pos_of(StateId s) const { return states_[s].leaf; }
  int condition_of(StateId s) { return condition_of_dela(states_[s].dela); }
  const ZTree& tree_of(StateId s) { return tree_of_dela(states_[s].dela); }

  // Upper bound for priorities anywhere in this automaton.
  int priority_bound() const {
    return static_cast<int>(nf_.leaves.size()) + 2;
  }

  const std::vector<Edge>& successors(StateId s) {
    auto it = edges_.find(s);
    if (it != edges_.end()) return it->second;
    std::vector<Edge> es = compute_successors(s);
    return edges_.emplace(s, std::move(es)).first->second;
  }

  // recompute from the labelling alone (locality checks)
  std::vector<Edge> successors_fresh(StateId s) { return compute_successors(s); }

  // The state label as one formula: positive literals become
  // master (& breakpoint), negative ones their NNF negation.
  FormulaRef state_formula(StateId s) {
    const DelaState& d = dela_of(s);
    return comb_formula(d.comb, d.live);
  }

  std::string state_label(StateId s) {
    const DelaState& d = dela_of(s);
    std::ostringstream os;
    os << combs_.print(d.comb, [&](int leaf, bool neg) {
      return std::string(neg ? "!A" : "A") + std::to_string(leaf);
    });
    for (const auto& [i, sub] : d.live) {
      os << " [A" << i << " M: " << fs_.print(sub.master);
      if (sub.breakpoint != kNoFormula)
        os << " B: " << fs_.print(sub.breakpoint);
      os << "]";
    }
    os << " l" << states_[s].leaf;
    return os.str();
  }

  // full BFS exploration; returns states in discovery order
  std::vector<StateId> explore_all() {
    std::vector<StateId> order;
    std::set<StateId> seen;
    std::deque<StateId> queue{initial_};
    seen.insert(initial_);
    while (!queue.empty()) {
      StateId s = queue.front();
      queue.pop_front();
      order.push_back(s);
      for (const Edge& e : successors(s))
        if (seen.insert(e.dst).second) queue.push_back(e.dst);
    }
    return order;
  }

  bool accepts(const LassoWord& w) {
    StateId s = initial_;
    for (size_t i = 0; i < w.stem; ++i) s = step_state(s, w.letters[i]).first;
    // iterate the loop until (state, loop position) repeats
    std::map<std::pair<StateId, size_t>, size_t> seen;
    std::vector<int> prios;
    StateId cur = s;
    size_t pos = w.stem;
    while (true) {
      auto key = std::make_pair(cur, pos);
      auto it = seen.find(key);
      if (it != seen.end()) {
        int minp = INT32_MAX;
        for (size_t k = it->second; k < prios.size(); ++k)
          minp = std::min(minp, prios[k]);
        return minp % 2 == 0;
      }
      seen.emplace(key, prios.size());
      auto [next, p] = step_state(cur, w.letters[pos]);
      prios.push_back(p);
      cur = next;
      pos = pos + 1 < w.letters.size() ? pos + 1 : w.stem;
    }
  }

  std::string to_dot() {
    std::ostringstream os;
    os << "digraph dpa {\n  rankdir=LR;\n";
    auto order = explore_all();
    for (StateId s : order) {
      os << "  s" << s << " [shape=box,label=\"" << s << ": "
         << state_label(s) << "\"];\n";
      for (const Edge& e : successors(s)) {
        os << "  s" << s << " -> s" << e.dst << " [label=\""
           << guard_string(e.guard) << " / " << e.priority << "\"];\n";
      }
    }
    os << "}\n";
    return os.str();
  }

  // HOA-like text dump (parity min even, transition-based)
  std::string to_hoa() {
    std::ostringstream os;
    auto order = explore_all();
    std::vector<AtomId> atoms = ordered_atoms();
    os << "HOA: v1\n"
       << "States: " << order.size() << "\n"
       << "Start: 0\n"
       << "AP: " << atoms.size();
    for (AtomId a : atoms) os << " \"" << fs_.atom_name(a) << "\"";
    os << "\nacc-name: parity min even " << priority_bound() + 1 << "\n"
       << "Acceptance: transition-based parity\n--BODY--\n";
    std::map<StateId, size_t> idx;
    for (size_t i = 0; i < order.size(); ++i) idx[order[i]] = i;
    for (StateId s : order) {
      os << "State: " << idx[s] << " \"" << state_label(s) << "\"\n";
      for (const Edge& e : successors(s))
        os << "  [" << guard_string(e.guard) << "] " << idx[e.dst] << " {"
           << e.priority << "}\n";
    }
    os << "--END--\n";
    return os.str();
  }

  std::string guard_string(BddRef g) const {
    if (g == BddStore::kTrue) return "true";
    if (g == BddStore::kFalse) return "false";
    std::vector<AtomId> atoms = ordered_atoms();
    std::vector<std::string> terms;
    bdd_.cubes(g, [&](const std::vector<std::pair<uint32_t, bool>>& cube) {
      std::string t;
      for (auto [v, pos] : cube) {
        if (!t.empty()) t += " & ";
        t += (pos ? "" : "!") + fs_.atom_name(atoms[v]);
      }
      terms.push_back(t.empty() ? "true" : t);
    });
    std::string out;
    for (size_t i = 0; i < terms.size(); ++i) {
      if (i) out += " | ";
      out += terms[i];
    }
    return out;
  }

  std::vector<AtomId> ordered_atoms() const {
    std::vector<AtomId> atoms(var_of_atom_.size());
    for (auto [a, v] : var_of_atom_) atoms[v] = a;
    return atoms;
  }

  // condition of a DELA combination under the conditional rule: pending
  // weak automata are resolved to their if-this-persists value (safety
  // stays true, co-safety stays false); in regular mode the combination is
  // the condition itself.
  int condition_comb(int comb, const std::vector<std::pair<int, SubState>>& live) {
    if (!opt_.conditional) return comb;
    int cond = comb;
    for (const auto& [i, sub] : live) {
      SynClass cls = nf_.leaves[i].cls;
      if (cls == SynClass::Safety)
        cond = combs_.substitute(cond, i, true);
      else if (cls == SynClass::CoSafety)
        cond = combs_.substitute(cond, i, false);
    }
    return cond;
  }

  // colors tracked at a state: leaves mentioned by the condition, or every
  // live leaf when the condition is constant
  std::vector<int> colors_of(int cond,
                             const std::vector<std::pair<int, SubState>>& live) {
    std::set<int> cs;
    combs_.leaves_of(cond, cs);
    if (combs_.is_const(cond))
      for (const auto& [i, sub] : live) cs.insert(i);
    return std::vector<int>(cs.begin(), cs.end());
  }

  const ZTree& tree_for(int cond, std::vector<int> colors) {
    std::sort(colors.begin(), colors.end());
    auto key = std::make_pair(cond, colors);
    auto it = trees_.find(key);
    if (it != trees_.end()) return it->second;
    ZTree t = build_zielonka_tree(combs_, cond, colors);
    return trees_.emplace(std::move(key), std::move(t)).first->second;
  }

 private:
  struct DpaState {
    uint32_t dela;
    int leaf;
    bool operator==(const DpaState& o) const {
      return dela == o.dela && leaf == o.leaf;
    }
  };

  int comb_of(const CombNode& c) {
    switch (c.kind) {
      case CombNode::Leaf:
        return combs_.mk_lit(c.leaf, nf_.leaves[c.leaf].negated);
      case CombNode::CAnd: {
        std::vector<int> kids;
        for (const CombNode& k : c.kids) kids.push_back(comb_of(k));
        return combs_.mk_and(std::move(kids));
      }
      case CombNode::COr: {
        std::vector<int> kids;
        for (const CombNode& k : c.kids) kids.push_back(comb_of(k));
        return combs_.mk_or(std::move(kids));
      }
    }
    return combs_.mk_false();
  }

  // Büchi leaves are G psi with co-safety psi; the breakpoint starts at psi.
  FormulaRef inner_of_gf(FormulaRef gf) const { return fs_.node(gf).kids[0]; }

  // master minus the governing G conjunct: the currently pending residuals
  FormulaRef pending_of(FormulaRef master, FormulaRef g_leaf) {
    if (master == g_leaf) return fs_.tt();
    const auto& n = fs_.node(master);
    if (n.op != Op::And) return master;
    std::vector<FormulaRef> rest;
    for (FormulaRef k : n.kids)
      if (k != g_leaf) rest.push_back(k);
    return fs_.mk_and(std::move(rest));
  }

  // substitute decided sub-automata and drop dead ones
  void settle(DelaState& d) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = d.live.begin(); it != d.live.end(); ++it) {
        auto [i, sub] = *it;
        bool decided = false, value = false;
        if (sub.master == fs_.tt()) {
          decided = true;
          value = true;
        } else if (sub.master == fs_.ff()) {
          decided = true;
          value = false;
        } else if (sub.breakpoint == fs_.ff()) {
          decided = true;  // the recurrence goal is unreachable
          value = false;
        }
        if (decided) {
          d.comb = combs_.substitute(d.comb, i, value);
          d.live.erase(it);
          changed = true;
          break;
        }
      }
    }
    // constant propagation can make live automata irrelevant
    std::set<int> used;
    combs_.leaves_of(d.comb, used);
    std::vector<std::pair<int, SubState>> kept;
    for (auto& [i, sub] : d.live)
      if (used.count(i)) kept.emplace_back(i, sub);
    d.live = std::move(kept);
  }

  uint32_t intern_dela(DelaState d) {
    auto key = dela_key(d);
    auto it = dela_ids_.find(key);
    if (it != dela_ids_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(delas_.size());
    delas_.push_back(std::move(d));
    dela_ids_.emplace(std::move(key), id);
    return id;
  }

  StateId intern_state(uint32_t dela, int leaf) {
    uint64_t key = (uint64_t(dela) << 16) | uint32_t(leaf);
    auto it = state_ids_.find(key);
    if (it != state_ids_.end()) return it->second;
    if (states_.size() >= opt_.max_states)
      throw TranslationLimit("state budget exceeded");
    StateId id = static_cast<StateId>(states_.size());
    states_.push_back(DpaState{dela, leaf});
    state_ids_.emplace(key, id);
    return id;
  }

  static std::string dela_key(const DelaState& d) {
    std::string k = std::to_string(d.comb);
    for (auto& [i, s] : d.live) {
      k += ',';
      k += std::to_string(i);
      k += ':';
      k += std::to_string(s.master);
      k += ':';
      k += std::to_string(s.breakpoint);
    }
    return k;
  }

  int condition_of_dela(uint32_t dela) {
    const DelaState& d = delas_[dela];
    return condition_comb(d.comb, d.live);
  }

  const ZTree& tree_of_dela(uint32_t dela) {
    const DelaState& d = delas_[dela];
    int cond = condition_comb(d.comb, d.live);
    return tree_for(cond, colors_of(cond, d.live));
  }

  std::pair<DelaState, std::vector<int>> step_dela(const DelaState& d,
                                                   const Letter& l) {
    DelaState next;
    next.comb = d.comb;
    std::vector<int> signals;
    for (const auto& [i, sub] : d.live) {
      SynClass cls = nf_.leaves[i].cls;
      SubState ns = sub;
      bool signal = false;
      if (cls == SynClass::Buchi) {
        FormulaRef g_leaf = nf_.leaves[i].formula;
        FormulaRef m = fs_.after(sub.master, l);
        FormulaRef b = fs_.after(sub.breakpoint, l);
        if (b == fs_.tt() && m != fs_.ff()) {
          // watched goals discharged: emit and watch the next round plus
          // everything still pending in the master
          signal = true;
          b = fs_.mk_and(inner_of_gf(g_leaf), pending_of(m, g_leaf));
        }
        ns.master = m;
        ns.breakpoint = b;
      } else {
        ns.master = fs_.after(sub.master, l);
        // safety sub-automata signal on every live edge, co-safety ones
        // only from their accepting sink (which is folded away here)
        signal = cls == SynClass::Safety;
      }
      if (signal) signals.push_back(i);
      next.live.emplace_back(i, ns);
    }
    settle(next);
    return {std::move(next), std::move(signals)};
  }

  std::vector<Edge> compute_successors(StateId s) {
    DpaState st = states_[s];
    const DelaState d = delas_[st.dela];
    int cond_src = condition_comb(d.comb, d.live);
    const ZTree& tree = tree_for(cond_src, colors_of(cond_src, d.live));
    const std::vector<int>& root_colors = tree.nodes[0].colors;

    std::set<AtomId> support_set;
    for (const auto& [i, sub] : d.live) {
      fs_.atoms_of(sub.master, support_set);
      if (sub.breakpoint != kNoFormula)
        fs_.atoms_of(sub.breakpoint, support_set);
    }
    std::vector<AtomId> support(support_set.begin(), support_set.end());
    if (support.size() > opt_.max_support)
      throw TranslationLimit("edge support too large");

    std::map<std::pair<StateId, int>, BddRef> groups;
    for (uint32_t bits = 0; bits < (1u << support.size()); ++bits) {
      Letter letter;
      for (size_t i = 0; i < support.size(); ++i)
        letter.set(support[i], (bits >> i) & 1);
      auto [dela2, signals] = step_dela(d, letter);
      int cond_dst = condition_comb(dela2.comb, dela2.live);
      std::vector<int> emitted;
      for (int c : signals)
        if (std::find(root_colors.begin(), root_colors.end(), c) !=
            root_colors.end())
          emitted.push_back(c);
      ZTree::Step zs = tree.step(st.leaf, emitted);
      int leaf2 = cond_dst == cond_src ? zs.next_leaf_pos : 0;
      StateId t = intern_state(intern_dela(std::move(dela2)), leaf2);

      BddRef cube = bdd_.tt();
      for (size_t i = support.size(); i-- > 0;) {
        uint32_t v = var_of_atom_.at(support[i]);
        cube = bdd_.and_(cube, bdd_.literal(v, (bits >> i) & 1));
      }
      auto key = std::make_pair(t, zs.priority);
      auto it = groups.find(key);
      if (it == groups.end())
        groups.emplace(key, cube);
      else
        it->second = bdd_.or_(it->second, cube);
    }

    std::vector<Edge> edges;
    for (auto& [key, guard] : groups)
      edges.push_back(Edge{guard, key.first, key.second});
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      if (a.priority != b.priority) return a.priority < b.priority;
      return a.dst < b.dst;
    });
    return edges;
  }

  std::pair<StateId, int> step_state(StateId s, const Letter& l) {
    for (const Edge& e : successors(s)) {
      if (eval_guard(e.guard, l)) return {e.dst, e.priority};
    }
    throw std::logic_error("dpa: letter not covered (partial letter?)");
  }

  bool eval_guard(BddRef g, const Letter& l) const {
    std::vector<bool> assignment(var_of_atom_.size(), false);
    for (auto [a, v] : var_of_atom_) {
      auto val = l.get(a);
      assignment[v] = val.value_or(false);
    }
    return bdd_.eval(g, assignment);
  }

  FormulaRef comb_formula(int comb,
                          const std::vector<std::pair<int, SubState>>& live) {
    const CombStore::CNode& n = combs_.node(comb);
    switch (n.kind) {
      case CombStore::False_: return fs_.ff();
      case CombStore::True_: return fs_.tt();
      case CombStore::Lit: {
        FormulaRef base = fs_.ff();
        for (const auto& [i, sub] : live)
          if (i == n.leaf) {
            base = sub.breakpoint == kNoFormula
                       ? sub.master
                       : fs_.mk_and(sub.master, sub.breakpoint);
          }
        return n.neg ? fs_.to_nnf(fs_.mk_not(base)) : base;
      }
      case CombStore::And_: {
        std::vector<FormulaRef> ks;
        for (int k : n.kids) ks.push_back(comb_formula(k, live));
        return fs_.mk_and(std::move(ks));
      }
      case CombStore::Or_: {
        std::vector<FormulaRef> ks;
        for (int k : n.kids) ks.push_back(comb_formula(k, live));
        return fs_.mk_or(std::move(ks));
      }
    }
    return fs_.ff();
  }

  FormulaStore& fs_;
  BddStore& bdd_;
  Partition part_;
  Options opt_;
  NormalForm nf_;
  CombStore combs_;
  std::unordered_map<AtomId, uint32_t> var_of_atom_;
  std::vector<DelaState> delas_;
  std::unordered_map<std::string, uint32_t> dela_ids_;
  std::vector<DpaState> states_;
  std::unordered_map<uint64_t, StateId> state_ids_;
  std::map<std::pair<int, std::vector<int>>, ZTree> trees_;
  std::unordered_map<StateId, std::vector<Edge>> edges_;
  StateId initial_ = 0;
};

}  // namespace semml
