#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "semml/automata.hpp"

using namespace semml;
using namespace semml::testing;

namespace {

struct Setup {
  FormulaStore fs;
  BddStore bdd;
  Partition part;
  std::vector<AtomId> atoms;

  Setup(const std::string& formula, const std::vector<std::string>& ins,
        const std::vector<std::string>& outs)
      : bdd(16) {
    f = fs.to_nnf(fs.parse(formula));
    for (const auto& n : ins) part.env.push_back(fs.atom_id(n));
    for (const auto& n : outs) part.sys.push_back(fs.atom_id(n));
    VarOrder ord = order_variables(fs, f, part);
    atoms = ord.atoms;
  }

  DpaBuilder build(bool conditional = true) {
    DpaBuilder::Options opt;
    opt.conditional = conditional;
    return DpaBuilder(fs, bdd, atoms, f, part, opt);
  }

  FormulaRef f;
};

}  // namespace

TEST_CASE("sub-automaton shapes from the worked figures") {
  SECTION("F a: progression to an accepting sink") {
    Setup s("F a", {"a"}, {});
    DpaBuilder dpa = s.build();
    auto order = dpa.explore_all();
    REQUIRE(order.size() == 2);
    // initial: master F a, no breakpoint
    const DelaState& d0 = dpa.dela_of(dpa.initial());
    REQUIRE(d0.live.size() == 1);
    REQUIRE(d0.live[0].second.master == s.fs.parse("F a"));
    REQUIRE(d0.live[0].second.breakpoint == kNoFormula);
    // the sink has an empty combination and loops with the even top priority
    DpaBuilder::StateId sink = order[1];
    REQUIRE(dpa.combs().is_true(dpa.dela_of(sink).comb));
    auto es = dpa.successors(sink);
    REQUIRE(es.size() == 1);
    REQUIRE(es[0].dst == sink);
    REQUIRE(es[0].guard == s.bdd.tt());
    REQUIRE(es[0].priority == 2);
  }

  SECTION("GF b: one state, signal on b") {
    Setup s("G F b", {"b"}, {});
    DpaBuilder dpa = s.build();
    auto order = dpa.explore_all();
    REQUIRE(order.size() == 1);
    const DelaState& d = dpa.dela_of(dpa.initial());
    REQUIRE(d.live.size() == 1);
    REQUIRE(d.live[0].second.master == s.fs.parse("G F b"));
    REQUIRE(d.live[0].second.breakpoint == s.fs.parse("F b"));
    auto es = dpa.successors(dpa.initial());
    REQUIRE(es.size() == 2);
    BddRef b = s.bdd.var(dpa.var_of_atom(s.fs.atom_id("b")));
    for (const auto& e : es) {
      if (e.guard == b) REQUIRE(e.priority % 2 == 0);   // signal emitted
      if (e.guard == BddStore::neg(b)) REQUIRE(e.priority % 2 == 1);
    }
  }

  SECTION("G a: safety loop into the rejecting sink") {
    Setup s("G a", {"a"}, {});
    DpaBuilder dpa = s.build();
    auto order = dpa.explore_all();
    REQUIRE(order.size() == 2);
    DpaBuilder::StateId sink = order[1];
    REQUIRE(dpa.combs().is_false(dpa.dela_of(sink).comb));
    auto es = dpa.successors(sink);
    REQUIRE(es.size() == 1);
    REQUIRE(es[0].priority == 1);
    // the a-loop on the live state keeps the master unchanged
    auto e0 = dpa.successors(dpa.initial());
    for (const auto& e : e0)
      if (e.dst == dpa.initial())
        REQUIRE(e.guard == s.bdd.var(dpa.var_of_atom(s.fs.atom_id("a"))));
  }
}

TEST_CASE("zielonka trees of the worked example") {
  CombStore combs;
  // conditional condition: inf(1) & !inf(2)
  int cond = combs.mk_and({combs.mk_lit(1, false), combs.mk_lit(2, true)});
  ZTree t = build_zielonka_tree(combs, cond, {1, 2});
  REQUIRE(t.nodes.size() == 3);
  REQUIRE(t.leaf_count() == 1);
  REQUIRE(t.nodes[0].priority == 1);
  REQUIRE(t.nodes[1].priority == 2);
  REQUIRE(t.nodes[2].priority == 3);
  // emitted colors drive the anchor
  REQUIRE(t.step(0, {2}).priority == 1);
  REQUIRE(t.step(0, {1, 2}).priority == 1);
  REQUIRE(t.step(0, {1}).priority == 2);
  REQUIRE(t.step(0, {}).priority == 3);

  // regular condition: inf(0) & inf(1) & !inf(2) has two leaves
  int reg = combs.mk_and(
      {combs.mk_lit(0, false), combs.mk_lit(1, false), combs.mk_lit(2, true)});
  ZTree r = build_zielonka_tree(combs, reg, {0, 1, 2});
  REQUIRE(r.leaf_count() == 2);

  // plain Büchi: root {0} with a single empty child
  int buchi = combs.mk_lit(0, false);
  ZTree b = build_zielonka_tree(combs, buchi, {0});
  REQUIRE(b.nodes.size() == 2);
  REQUIRE(b.nodes[0].accepting);
  REQUIRE(b.nodes[0].priority == 2);
  REQUIRE(b.nodes[1].colors.empty());

  // alternation invariant: children flip acceptance, parity matches
  for (const ZTree* tree : {&t, &r, &b})
    for (const auto& n : tree->nodes) {
      REQUIRE((n.priority % 2 == 0) == n.accepting);
      for (int c : n.children) {
        REQUIRE(tree->nodes[c].accepting != n.accepting);
        REQUIRE(tree->nodes[c].colors.size() < n.colors.size());
      }
    }
}

TEST_CASE("worked example DPA: F a & GF b & FG c") {
  Setup s("F a & G F b & F G c", {"a", "b", "c"}, {});
  DpaBuilder dpa = s.build();
  auto order = dpa.explore_all();
  REQUIRE(order.size() == 2);

  DpaBuilder::StateId q0 = order[0], q1 = order[1];
  BddRef a = s.bdd.var(dpa.var_of_atom(s.fs.atom_id("a")));
  BddRef b = s.bdd.var(dpa.var_of_atom(s.fs.atom_id("b")));
  BddRef c = s.bdd.var(dpa.var_of_atom(s.fs.atom_id("c")));

  // q0 is blocked by the transient F a: both edges carry the odd priority
  auto e0 = dpa.successors(q0);
  REQUIRE(e0.size() == 2);
  for (const auto& e : e0) {
    REQUIRE(e.priority == 1);
    if (e.dst == q0) REQUIRE(e.guard == BddStore::neg(a));
    if (e.dst == q1) REQUIRE(e.guard == a);
  }

  // q1 drops A1 and tracks inf(2) & !inf(3) with a single Zielonka leaf
  const DelaState& d1 = dpa.dela_of(q1);
  REQUIRE(d1.live.size() == 2);
  REQUIRE(d1.live[0].second.master == s.fs.parse("G F b"));
  REQUIRE(d1.live[1].second.master == s.fs.parse("G F !c"));
  REQUIRE(dpa.tree_of(q1).leaf_count() == 1);

  // loop priorities: {b & !c, !b & !c} -> 1 (signal 3 seen), b & c -> 2,
  // !b & c -> 3; the two priority-1 letters merge into the guard !c
  auto e1 = dpa.successors(q1);
  REQUIRE(e1.size() == 3);
  std::map<int, BddRef> by_prio;
  for (const auto& e : e1) {
    REQUIRE(e.dst == q1);
    by_prio[e.priority] = e.guard;
  }
  REQUIRE(by_prio.at(1) == BddStore::neg(c));
  REQUIRE(by_prio.at(2) == s.bdd.and_(b, c));
  REQUIRE(by_prio.at(3) == s.bdd.and_(BddStore::neg(b), c));

  // conditional vs regular acceptance tracking
  int full_comb = dpa.dela_of(q0).comb;
  ZTree regular = build_zielonka_tree(dpa.combs(), full_comb, {0, 1, 2});
  REQUIRE(regular.leaf_count() == 2);
  REQUIRE(dpa.tree_of(q1).leaf_count() < regular.leaf_count());
}

TEST_CASE("locality, determinism, totality") {
  std::vector<std::tuple<std::string, std::vector<std::string>>> cases = {
      {"F a & G F b & F G c", {"a", "b", "c"}},
      {"G (r <-> X g)", {"r", "g"}},
      {"G (a -> F b)", {"a", "b"}},
      {"(F G a) | (G F b)", {"a", "b"}},
  };
  for (auto& [formula, atoms] : cases) {
    Setup s(formula, atoms, {});
    DpaBuilder dpa = s.build();
    for (DpaBuilder::StateId st : dpa.explore_all()) {
      auto es1 = dpa.successors(st);
      auto es2 = dpa.successors_fresh(st);
      REQUIRE(es1.size() == es2.size());
      for (size_t i = 0; i < es1.size(); ++i) {
        REQUIRE(es1[i].guard == es2[i].guard);
        REQUIRE(es1[i].dst == es2[i].dst);
        REQUIRE(es1[i].priority == es2[i].priority);
      }
      BddRef all = s.bdd.ff();
      for (const auto& e : es1) all = s.bdd.or_(all, e.guard);
      REQUIRE(all == s.bdd.tt());
      for (size_t i = 0; i < es1.size(); ++i)
        for (size_t j = i + 1; j < es1.size(); ++j)
          REQUIRE(s.bdd.and_(es1[i].guard, es1[j].guard) == s.bdd.ff());
    }
  }
}

TEST_CASE("language correctness on small formulas") {
  std::vector<std::string> corpus = {
      "F a",
      "G a",
      "G F a",
      "F G a",
      "a U b",
      "a W b",
      "G (a -> X b)",
      "G (a <-> X b)",
      "F a & G F b",
      "(F G a) | (G F b)",
      "G F a & G F b",
      "F a & F b",
      "G (a | X b)",
      "F a & G F b & F G a",
      "(G a) | (G F b)",
      "F c & (a U b)",
  };
  FormulaStore fs;
  std::vector<AtomId> ids = {fs.atom_id("a"), fs.atom_id("b")};
  auto lassos2 = all_lassos(ids, 4);
  std::mt19937 rng(57);

  for (bool conditional : {true, false}) {
    for (const auto& text : corpus) {
      Setup s(text, {"a", "b", "c"}, {});
      DpaBuilder dpa = s.build(conditional);
      std::set<AtomId> used = s.fs.atoms_of(s.f);
      if (used.size() <= 2 && !used.count(s.fs.atom_id("c"))) {
        std::vector<AtomId> local = {s.fs.atom_id("a"), s.fs.atom_id("b")};
        for (const Lasso& w : all_lassos(local, 4)) {
          bool expect = lasso_holds(s.fs, s.f, w);
          if (dpa.accepts(w) != expect) {
            CAPTURE(text, conditional, w.stem, w.size());
            REQUIRE(false);
          }
        }
      } else {
        std::vector<AtomId> local = {s.fs.atom_id("a"), s.fs.atom_id("b"),
                                     s.fs.atom_id("c")};
        for (int i = 0; i < 400; ++i) {
          Lasso w = random_lasso(rng, local, 6);
          bool expect = lasso_holds(s.fs, s.f, w);
          if (dpa.accepts(w) != expect) {
            CAPTURE(text, conditional, i);
            REQUIRE(false);
          }
        }
      }
    }
  }
}

TEST_CASE("conditional trees never exceed regular trees") {
  std::vector<std::string> corpus = {"F a & G F b & F G c", "F a & G F b",
                                     "(F a | G F b) & F G c",
                                     "G a & (G F b | F G c)"};
  for (const auto& text : corpus) {
    Setup s(text, {"a", "b", "c"}, {});
    DpaBuilder dpa = s.build();
    for (DpaBuilder::StateId st : dpa.explore_all()) {
      const DelaState& d = dpa.dela_of(st);
      std::vector<int> all_live;
      for (auto& [i, sub] : d.live) all_live.push_back(i);
      ZTree regular = build_zielonka_tree(dpa.combs(), d.comb, all_live);
      REQUIRE(dpa.tree_of(st).leaf_count() <= regular.leaf_count());
    }
  }
}

TEST_CASE("dumps are well formed") {
  Setup s("F a & G F b", {"a", "b"}, {});
  DpaBuilder dpa = s.build();
  std::string dot = dpa.to_dot();
  REQUIRE(dot.find("digraph dpa") != std::string::npos);
  std::string hoa = dpa.to_hoa();
  REQUIRE(hoa.find("HOA: v1") != std::string::npos);
  REQUIRE(hoa.find("--END--") != std::string::npos);
}
