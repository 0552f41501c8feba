#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "semml/ltl.hpp"

using namespace semml;
using namespace semml::testing;

TEST_CASE("parse basic forms") {
  FormulaStore st;
  FormulaRef f = st.parse("G (r <-> X g)");
  REQUIRE(st.op(f) == Op::Always);
  REQUIRE(st.op(st.node(f).kids[0]) == Op::Equiv);
  REQUIRE(st.parse("true") == st.tt());
  REQUIRE(st.parse("tt") == st.tt());
  REQUIRE(st.parse("ff") == st.ff());
  REQUIRE(st.parse("a & b & c") == st.mk_and({st.atom("a"), st.atom("b"), st.atom("c")}));
  // precedence: unary > U/R/W > & > | > ->/<->
  REQUIRE(st.parse("a U b & c | d") ==
          st.mk_or(st.mk_and(st.mk_until(st.atom("a"), st.atom("b")), st.atom("c")),
                   st.atom("d")));
  REQUIRE(st.parse("! a") == st.natom(st.atom_id("a")));
  REQUIRE(st.parse("a U b U c") ==
          st.mk_until(st.atom("a"), st.mk_until(st.atom("b"), st.atom("c"))));
}

TEST_CASE("parse errors carry byte offsets") {
  FormulaStore st;
  try {
    st.parse("G (r <->");
    FAIL("expected syntax error");
  } catch (const SyntaxError& e) {
    REQUIRE(e.offset() == 9);
  }
  REQUIRE_THROWS_AS(st.parse("G ("), SyntaxError);
  REQUIRE_THROWS_AS(st.parse("a &"), SyntaxError);
  REQUIRE_THROWS_AS(st.parse("(a"), SyntaxError);
  REQUIRE_THROWS_AS(st.parse("a b"), SyntaxError);
}

TEST_CASE("nnf goldens") {
  FormulaStore st;
  FormulaRef a = st.atom("a"), b = st.atom("b");
  REQUIRE(st.to_nnf(st.mk_not(st.mk_and(a, b))) ==
          st.mk_or(st.natom(0), st.natom(1)));
  REQUIRE(st.to_nnf(st.mk_not(st.mk_eventually(a))) ==
          st.mk_always(st.natom(0)));
  REQUIRE(st.to_nnf(st.mk_not(st.mk_not(a))) == a);
  // derived duals stay first class
  FormulaRef f = st.to_nnf(st.mk_not(st.mk_always(st.mk_eventually(a))));
  REQUIRE(st.op(f) == Op::Eventually);
  REQUIRE(st.op(st.node(f).kids[0]) == Op::Always);
}

TEST_CASE("nnf is idempotent and language preserving") {
  FormulaStore st;
  std::vector<AtomId> atoms = {st.atom_id("a"), st.atom_id("b")};
  std::mt19937 rng(7);
  auto lassos = all_lassos(atoms, 3);
  for (int i = 0; i < 120; ++i) {
    FormulaRef f = random_surface(st, rng, atoms, 8);
    FormulaRef g = st.to_nnf(f);
    REQUIRE(st.is_nnf(g));
    REQUIRE(st.to_nnf(g) == g);
    for (const Lasso& w : lassos) {
      if (lasso_holds(st, f, w) != lasso_holds(st, g, w)) {
        CAPTURE(st.print(f), st.print(g));
        REQUIRE(false);
      }
    }
  }
}

TEST_CASE("after goldens") {
  FormulaStore st;
  AtomId a = st.atom_id("a"), b = st.atom_id("b");
  FormulaRef f = st.parse("a | X F a");
  Letter la, lna, lb, lnb;
  la.set(a, true);
  lna.set(a, false);
  lb.set(b, true);
  lnb.set(b, false);
  REQUIRE(st.after(f, la) == st.tt());
  REQUIRE(st.after(f, lna) == st.mk_eventually(st.atom(a)));
  FormulaRef gb = st.mk_always(st.atom(b));
  REQUIRE(st.after(gb, lb) == gb);
  REQUIRE(st.after(gb, lnb) == st.ff());
}

TEST_CASE("after leaves unassigned atoms symbolic") {
  FormulaStore st;
  AtomId a = st.atom_id("a");
  st.atom_id("b");
  FormulaRef f = st.parse("G (a & b)");
  Letter la;
  la.set(a, true);
  // b is not assigned: it remains as the current-step obligation
  REQUIRE(st.after(f, la) == st.mk_and(st.atom("b"), f));
}

namespace {
// w[1:]: shift the stem, or rotate when already inside the loop.
Lasso lasso_suffix(const Lasso& w) {
  Lasso rest;
  if (w.stem >= 1) {
    rest.stem = w.stem - 1;
    rest.letters.assign(w.letters.begin() + 1, w.letters.end());
  } else {
    rest.stem = 0;
    rest.letters.assign(w.letters.begin() + 1, w.letters.end());
    rest.letters.push_back(w.letters[0]);
  }
  return rest;
}
}  // namespace

TEST_CASE("progression suffix law") {
  FormulaStore st;
  std::vector<AtomId> atoms = {st.atom_id("a"), st.atom_id("b")};
  std::mt19937 rng(11);

  SECTION("exhaustive over 2 atoms") {
    auto lassos = all_lassos(atoms, 3);
    for (int i = 0; i < 60; ++i) {
      FormulaRef f = random_nnf(st, rng, atoms, 8);
      for (const Lasso& w : lassos) {
        bool whole = lasso_holds(st, f, w);
        FormulaRef g = st.after(f, w.letters[0]);
        bool suffix = lasso_holds(st, g, lasso_suffix(w));
        if (whole != suffix) {
          CAPTURE(st.print(f), st.print(g), w.stem, w.size());
          REQUIRE(false);
        }
      }
    }
  }

  SECTION("random over 3 atoms") {
    std::vector<AtomId> atoms3 = {st.atom_id("a"), st.atom_id("b"),
                                  st.atom_id("c")};
    for (int i = 0; i < 80; ++i) {
      FormulaRef f = random_nnf(st, rng, atoms3, 8);
      for (int j = 0; j < 40; ++j) {
        Lasso w = random_lasso(rng, atoms3, 6);
        bool whole = lasso_holds(st, f, w);
        FormulaRef g = st.after(f, w.letters[0]);
        REQUIRE(lasso_holds(st, g, lasso_suffix(w)) == whole);
      }
    }
  }
}

TEST_CASE("print/parse interning round trip") {
  FormulaStore st;
  std::vector<AtomId> atoms = {st.atom_id("a"), st.atom_id("b"),
                               st.atom_id("c")};
  std::mt19937 rng(13);
  for (int i = 0; i < 200; ++i) {
    FormulaRef f = random_nnf(st, rng, atoms, 10);
    REQUIRE(st.parse(st.print(f)) == f);
  }
}

TEST_CASE("syntactic classification") {
  FormulaStore st;
  REQUIRE(st.syntactic_class(st.parse("F a")) == SynClass::CoSafety);
  REQUIRE(st.syntactic_class(st.parse("G F b")) == SynClass::Buchi);
  REQUIRE(st.syntactic_class(st.parse("a U (G b)")) == SynClass::None);
  REQUIRE(st.syntactic_class(st.to_nnf(st.parse("G (a -> X b)"))) ==
          SynClass::Safety);
  REQUIRE(st.syntactic_class(st.parse("F G a")) == SynClass::CoBuchi);
  REQUIRE(st.syntactic_class(st.parse("a W b")) == SynClass::Safety);
}

TEST_CASE("normalize worked example") {
  FormulaStore st;
  FormulaRef f = st.parse("F a & G F b & F G c");
  NormalForm nf = st.normalize(f);
  REQUIRE(nf.leaves.size() == 3);
  bool saw_fa = false, saw_gfb = false, saw_gfnc = false;
  for (const NormalLeaf& l : nf.leaves) {
    if (l.formula == st.parse("F a")) {
      saw_fa = true;
      REQUIRE(l.cls == SynClass::CoSafety);
      REQUIRE(!l.negated);
    }
    if (l.formula == st.parse("G F b")) {
      saw_gfb = true;
      REQUIRE(l.cls == SynClass::Buchi);
      REQUIRE(!l.negated);
    }
    if (l.formula == st.parse("G F !c")) {
      saw_gfnc = true;
      REQUIRE(l.cls == SynClass::Buchi);
      REQUIRE(l.negated);  // FG c became a negated GF !c
    }
  }
  REQUIRE((saw_fa && saw_gfb && saw_gfnc));
  REQUIRE(nf.combination.kind == CombNode::CAnd);
}

TEST_CASE("normalize simple and unsupported cases") {
  FormulaStore st;
  NormalForm nf = st.normalize(st.to_nnf(st.parse("G (a -> X b)")));
  REQUIRE(nf.leaves.size() == 1);
  REQUIRE(nf.combination.kind == CombNode::Leaf);
  REQUIRE(nf.leaves[0].cls == SynClass::Safety);

  // G F G F a simplifies via the rewrite table
  NormalForm nf2 = st.normalize(st.parse("G F G F a"));
  REQUIRE(nf2.leaves.size() == 1);
  REQUIRE(nf2.leaves[0].formula == st.parse("G F a"));

  try {
    st.normalize(st.parse("(a U (G b)) U c"));
    FAIL("expected unsupported fragment");
  } catch (const UnsupportedFragment& e) {
    REQUIRE(!e.subformula().empty());
  }
}

TEST_CASE("normalization is language preserving") {
  FormulaStore st;
  std::vector<AtomId> atoms = {st.atom_id("a")};
  auto lassos = all_lassos(atoms, 5);
  std::vector<std::string> corpus = {
      "F a & G F a & F G a", "G F G F a", "F (G a | F a)", "G (a & F a)",
      "X G F a",             "F F a",     "G G a",         "F G a",
      "G F a",               "a U X a",   "a W a",         "G (a | X a)"};
  for (const auto& s : corpus) {
    FormulaRef f = st.to_nnf(st.parse(s));
    NormalForm nf = st.normalize(f);
    FormulaRef g = st.reconstruct(nf);
    for (const Lasso& w : lassos) {
      if (lasso_holds(st, f, w) != lasso_holds(st, g, w)) {
        CAPTURE(s, st.print(g));
        REQUIRE(false);
      }
    }
  }
}

TEST_CASE("partition invariants") {
  FormulaStore st;
  Partition p;
  p.env = {st.atom_id("r")};
  p.sys = {st.atom_id("g")};
  REQUIRE(p.is_env(0));
  REQUIRE(p.is_sys(1));
  REQUIRE(!p.is_env(1));
}
