#pragma once

// Test-only oracles, kept independent of the library's evaluation paths.
//
// The lasso evaluator below computes LTL satisfaction on an ultimately
// periodic word by plain Knaster-Tarski iteration of the unfolding
// equations (least fixpoint for U/F, greatest for R/W/G), which is a
// different algorithm from the production checker.

#include <functional>
#include <random>
#include <vector>

#include "semml/ltl.hpp"

namespace semml::testing {

using Lasso = LassoWord;

class LassoEval {
 public:
  LassoEval(FormulaStore& st, const Lasso& w) : st_(st), w_(w) {}

  bool holds(FormulaRef f) { return value(f)[0]; }

  const std::vector<char>& value(FormulaRef f) {
    auto it = memo_.find(f);
    if (it != memo_.end()) return it->second;
    const auto& n = st_.node(f);
    size_t L = w_.size();
    std::vector<char> v(L, 0);
    auto kid = [&](int i) -> const std::vector<char>& {
      return value(n.kids[i]);
    };
    switch (n.op) {
      case Op::True:
        std::fill(v.begin(), v.end(), 1);
        break;
      case Op::False:
        break;
      case Op::Atom:
        for (size_t i = 0; i < L; ++i) v[i] = *w_.letters[i].get(n.atom);
        break;
      case Op::NotAtom:
        for (size_t i = 0; i < L; ++i) v[i] = !*w_.letters[i].get(n.atom);
        break;
      case Op::Not: {
        auto a = kid(0);
        for (size_t i = 0; i < L; ++i) v[i] = !a[i];
        break;
      }
      case Op::And: {
        std::fill(v.begin(), v.end(), 1);
        for (auto k : n.kids) {
          const auto& a = value(k);
          for (size_t i = 0; i < L; ++i) v[i] = v[i] && a[i];
        }
        break;
      }
      case Op::Or: {
        for (auto k : n.kids) {
          const auto& a = value(k);
          for (size_t i = 0; i < L; ++i) v[i] = v[i] || a[i];
        }
        break;
      }
      case Op::Implies: {
        auto a = kid(0);
        auto b = kid(1);
        for (size_t i = 0; i < L; ++i) v[i] = !a[i] || b[i];
        break;
      }
      case Op::Equiv: {
        auto a = kid(0);
        auto b = kid(1);
        for (size_t i = 0; i < L; ++i) v[i] = a[i] == b[i];
        break;
      }
      case Op::Next: {
        auto a = kid(0);
        for (size_t i = 0; i < L; ++i) v[i] = a[w_.succ(i)];
        break;
      }
      case Op::Until:
        v = lfp(kid(0), kid(1));
        break;
      case Op::Eventually:
        v = lfp(std::vector<char>(L, 1), kid(0));
        break;
      case Op::Release:
        v = gfp(kid(0), kid(1));
        break;
      case Op::Always:
        v = gfp(std::vector<char>(L, 0), kid(0));
        break;
      case Op::WeakUntil: {
        // l W r  ==  (l U r) | G l
        auto u = lfp(kid(0), kid(1));
        auto g = gfp(std::vector<char>(w_.size(), 0), kid(0));
        v.resize(L);
        for (size_t i = 0; i < L; ++i) v[i] = u[i] || g[i];
        break;
      }
    }
    return memo_.emplace(f, std::move(v)).first->second;
  }

 private:
  // least fixpoint of  x_i = r_i | (l_i & x_succ(i))
  std::vector<char> lfp(std::vector<char> l, std::vector<char> r) {
    size_t L = w_.size();
    std::vector<char> x(L, 0);
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < L; ++i) {
        char nv = r[i] || (l[i] && x[w_.succ(i)]);
        if (nv != x[i]) {
          x[i] = nv;
          changed = true;
        }
      }
    }
    return x;
  }
  // greatest fixpoint of  x_i = r_i & (l_i | x_succ(i))
  std::vector<char> gfp(std::vector<char> l, std::vector<char> r) {
    size_t L = w_.size();
    std::vector<char> x(L, 1);
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < L; ++i) {
        char nv = r[i] && (l[i] || x[w_.succ(i)]);
        if (nv != x[i]) {
          x[i] = nv;
          changed = true;
        }
      }
    }
    return x;
  }

  FormulaStore& st_;
  const Lasso& w_;
  std::unordered_map<FormulaRef, std::vector<char>> memo_;
};

inline bool lasso_holds(FormulaStore& st, FormulaRef f, const Lasso& w) {
  LassoEval ev(st, w);
  return ev.holds(f);
}

inline Letter full_letter(const std::vector<AtomId>& atoms, unsigned bits) {
  Letter l;
  for (size_t i = 0; i < atoms.size(); ++i) l.set(atoms[i], (bits >> i) & 1);
  return l;
}

inline std::vector<Letter> all_letters(const std::vector<AtomId>& atoms) {
  std::vector<Letter> out;
  for (unsigned b = 0; b < (1u << atoms.size()); ++b)
    out.push_back(full_letter(atoms, b));
  return out;
}

// Enumerate all lassos with stem+loop <= max_len over the given atoms.
inline std::vector<Lasso> all_lassos(const std::vector<AtomId>& atoms,
                                     size_t max_len) {
  std::vector<Letter> sigma = all_letters(atoms);
  std::vector<Lasso> out;
  std::vector<size_t> word;
  auto emit = [&](size_t len) {
    for (size_t stem = 0; stem < len; ++stem) {
      Lasso w;
      w.stem = stem;
      for (size_t i = 0; i < len; ++i) w.letters.push_back(sigma[word[i]]);
      out.push_back(std::move(w));
    }
  };
  std::function<void(size_t)> rec = [&](size_t len) {
    if (word.size() == len) {
      emit(len);
      return;
    }
    for (size_t s = 0; s < sigma.size(); ++s) {
      word.push_back(s);
      rec(len);
      word.pop_back();
    }
  };
  for (size_t len = 1; len <= max_len; ++len) rec(len);
  return out;
}

inline Lasso random_lasso(std::mt19937& rng, const std::vector<AtomId>& atoms,
                          size_t max_len) {
  std::uniform_int_distribution<size_t> len_d(1, max_len);
  size_t len = len_d(rng);
  std::uniform_int_distribution<size_t> stem_d(0, len - 1);
  std::uniform_int_distribution<unsigned> bit_d(0, (1u << atoms.size()) - 1);
  Lasso w;
  w.stem = stem_d(rng);
  for (size_t i = 0; i < len; ++i)
    w.letters.push_back(full_letter(atoms, bit_d(rng)));
  return w;
}

// Random NNF formula over the given atoms, at most `size` operator nodes.
inline FormulaRef random_nnf(FormulaStore& st, std::mt19937& rng,
                             const std::vector<AtomId>& atoms, int size) {
  std::uniform_int_distribution<int> op_d(0, 9);
  std::uniform_int_distribution<size_t> at_d(0, atoms.size() - 1);
  if (size <= 1) {
    switch (op_d(rng) % 4) {
      case 0: return st.tt();
      case 1: return st.ff();
      case 2: return st.atom(atoms[at_d(rng)]);
      default: return st.natom(atoms[at_d(rng)]);
    }
  }
  int left = (size - 1) / 2 + 1;
  switch (op_d(rng)) {
    case 0: return st.mk_and(random_nnf(st, rng, atoms, left),
                             random_nnf(st, rng, atoms, size - left));
    case 1: return st.mk_or(random_nnf(st, rng, atoms, left),
                            random_nnf(st, rng, atoms, size - left));
    case 2: return st.mk_next(random_nnf(st, rng, atoms, size - 1));
    case 3: return st.mk_until(random_nnf(st, rng, atoms, left),
                               random_nnf(st, rng, atoms, size - left));
    case 4: return st.mk_release(random_nnf(st, rng, atoms, left),
                                 random_nnf(st, rng, atoms, size - left));
    case 5: return st.mk_wuntil(random_nnf(st, rng, atoms, left),
                                random_nnf(st, rng, atoms, size - left));
    case 6: return st.mk_eventually(random_nnf(st, rng, atoms, size - 1));
    case 7: return st.mk_always(random_nnf(st, rng, atoms, size - 1));
    case 8: return st.atom(atoms[at_d(rng)]);
    default: return st.natom(atoms[at_d(rng)]);
  }
}

// Random formula that may use the surface operators !, ->, <->.
inline FormulaRef random_surface(FormulaStore& st, std::mt19937& rng,
                                 const std::vector<AtomId>& atoms, int size) {
  std::uniform_int_distribution<int> op_d(0, 11);
  if (size <= 1) return random_nnf(st, rng, atoms, 1);
  int left = (size - 1) / 2 + 1;
  switch (op_d(rng)) {
    case 0: return st.mk_not(random_surface(st, rng, atoms, size - 1));
    case 1: return st.mk_implies(random_surface(st, rng, atoms, left),
                                 random_surface(st, rng, atoms, size - left));
    case 2: return st.mk_equiv(random_surface(st, rng, atoms, left),
                               random_surface(st, rng, atoms, size - left));
    default: {
      // fall back to NNF shapes but with surface-able children
      std::uniform_int_distribution<int> k_d(0, 7);
      switch (k_d(rng)) {
        case 0: return st.mk_and(random_surface(st, rng, atoms, left),
                                 random_surface(st, rng, atoms, size - left));
        case 1: return st.mk_or(random_surface(st, rng, atoms, left),
                                random_surface(st, rng, atoms, size - left));
        case 2: return st.mk_next(random_surface(st, rng, atoms, size - 1));
        case 3: return st.mk_until(random_surface(st, rng, atoms, left),
                                   random_surface(st, rng, atoms, size - left));
        case 4: return st.mk_release(random_surface(st, rng, atoms, left),
                                     random_surface(st, rng, atoms, size - left));
        case 5: return st.mk_eventually(random_surface(st, rng, atoms, size - 1));
        case 6: return st.mk_always(random_surface(st, rng, atoms, size - 1));
        default: return random_nnf(st, rng, atoms, 1);
      }
    }
  }
}

}  // namespace semml::testing
