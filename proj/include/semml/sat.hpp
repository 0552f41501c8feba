#pragma once

// CNF container, sequential-counter cardinality constraints, a small CDCL
// solver (watched literals, first-UIP learning, Luby restarts) and a
// bit-exact DIMACS bridge to external solvers.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

namespace semml {

// Literals are nonzero DIMACS-style integers: +v / -v with v in [1, num_vars].
struct CnfFormula {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
  std::vector<int> assumptions;
  bool trivially_unsat = false;

  int new_var() { return ++num_vars; }

  void add_clause(std::vector<int> lits) {
    for (int l : lits)
      if (l == 0 || std::abs(l) > num_vars)
        throw std::invalid_argument("cnf: literal out of range");
    if (lits.empty()) trivially_unsat = true;
    clauses.push_back(std::move(lits));
  }
};

// At most k of the given variables true (Sinz sequential counter).
inline void at_most_k(CnfFormula& f, const std::vector<int>& vars, int k) {
  if (k < 0) throw std::invalid_argument("at_most_k: negative bound");
  int n = static_cast<int>(vars.size());
  if (k >= n) return;
  if (k == 0) {
    for (int v : vars) f.add_clause({-v});
    return;
  }
  // s[i][j]: among vars[0..i] at least j+1 are true
  std::vector<std::vector<int>> s(n, std::vector<int>(k));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) s[i][j] = f.new_var();
  for (int i = 0; i < n; ++i) {
    f.add_clause({-vars[i], s[i][0]});
    if (i > 0) {
      for (int j = 0; j < k; ++j) f.add_clause({-s[i - 1][j], s[i][j]});
      for (int j = 1; j < k; ++j)
        f.add_clause({-vars[i], -s[i - 1][j - 1], s[i][j]});
      f.add_clause({-vars[i], -s[i - 1][k - 1]});
    }
  }
}

enum class SatResult { Sat, Unsat, Unknown };

class CdclSolver {
 public:
  explicit CdclSolver(const CnfFormula& f, uint64_t conflict_budget = 4000000)
      : nvars_(f.num_vars), budget_(conflict_budget) {
    assigns_.assign(nvars_, 0);
    level_.assign(nvars_, 0);
    reason_.assign(nvars_, -1);
    activity_.assign(nvars_, 0.0);
    phase_.assign(nvars_, false);
    seen_.assign(nvars_, 0);
    watches_.assign(2 * nvars_, {});
    ok_ = !f.trivially_unsat;
    for (const auto& c : f.clauses)
      if (!add_clause(c)) ok_ = false;
    for (int a : f.assumptions)
      if (!add_clause({a})) ok_ = false;
  }

  SatResult solve() {
    if (!ok_) return SatResult::Unsat;
    if (propagate() != -1) return SatResult::Unsat;
    uint64_t conflicts = 0;
    int restart_idx = 1;
    uint64_t next_restart = 64 * luby(restart_idx);
    for (;;) {
      int confl = propagate();
      if (confl != -1) {
        ++conflicts;
        if (conflicts > budget_) return SatResult::Unknown;
        if (decision_level() == 0) return SatResult::Unsat;
        std::vector<int> learnt;
        int back_level = analyze(confl, learnt);
        backtrack(back_level);
        if (learnt.size() == 1) {
          enqueue(learnt[0], -1);
        } else {
          int ci = static_cast<int>(clauses_.size());
          clauses_.push_back(learnt);
          watch(ci);
          enqueue(learnt[0], ci);
        }
        decay_activities();
        if (conflicts >= next_restart) {
          backtrack(0);
          ++restart_idx;
          next_restart = conflicts + 64 * luby(restart_idx);
        }
      } else {
        int v = pick_branch();
        if (v == -1) {
          extract_model();
          return SatResult::Sat;
        }
        trail_lim_.push_back(static_cast<int>(trail_.size()));
        enqueue(phase_[v] ? pos(v) : negl(v), -1);
      }
    }
  }

  // 1-indexed truth values, valid after Sat.
  const std::vector<bool>& model() const { return model_; }

 private:
  // internal literal encoding: 2*var (positive) / 2*var+1 (negative)
  static int pos(int v) { return 2 * v; }
  static int negl(int v) { return 2 * v + 1; }
  static int ext_to_int(int l) {
    return l > 0 ? pos(l - 1) : negl(-l - 1);
  }
  static int var_of(int lit) { return lit >> 1; }
  static int negate(int lit) { return lit ^ 1; }

  int value(int lit) const {  // 1 true, -1 false, 0 undef
    int v = assigns_[var_of(lit)];
    return (lit & 1) ? -v : v;
  }

  bool add_clause(const std::vector<int>& ext) {
    std::vector<int> lits;
    for (int l : ext) lits.push_back(ext_to_int(l));
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (size_t i = 0; i + 1 < lits.size(); ++i)
      if (lits[i] == negate(lits[i + 1])) return true;  // tautology
    if (lits.empty()) return false;
    if (lits.size() == 1) {
      if (value(lits[0]) == -1) return false;
      if (value(lits[0]) == 0) enqueue(lits[0], -1);
      return true;
    }
    int ci = static_cast<int>(clauses_.size());
    clauses_.push_back(lits);
    watch(ci);
    return true;
  }

  void watch(int ci) {
    watches_[clauses_[ci][0]].push_back(ci);
    watches_[clauses_[ci][1]].push_back(ci);
  }

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void enqueue(int lit, int reason) {
    int v = var_of(lit);
    assigns_[v] = (lit & 1) ? -1 : 1;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(lit);
  }

  // returns conflicting clause index or -1
  int propagate() {
    while (qhead_ < trail_.size()) {
      int lit = trail_[qhead_++];
      int flit = negate(lit);  // clauses watching the falsified literal
      auto& ws = watches_[flit];
      size_t j = 0;
      for (size_t i = 0; i < ws.size(); ++i) {
        int ci = ws[i];
        auto& c = clauses_[ci];
        if (c[0] == flit) std::swap(c[0], c[1]);
        // c[1] == flit now
        if (value(c[0]) == 1) {
          ws[j++] = ci;
          continue;
        }
        bool moved = false;
        for (size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) != -1) {
            std::swap(c[1], c[k]);
            watches_[c[1]].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = ci;
        if (value(c[0]) == -1) {
          // conflict: restore remaining watches
          for (size_t k = i + 1; k < ws.size(); ++k) ws[j++] = ws[k];
          ws.resize(j);
          qhead_ = trail_.size();
          return ci;
        }
        enqueue(c[0], ci);
      }
      ws.resize(j);
    }
    return -1;
  }

  int analyze(int confl, std::vector<int>& learnt) {
    learnt.push_back(0);  // placeholder for the asserting literal
    int counter = 0;
    int lit = -1;
    size_t idx = trail_.size();
    int ci = confl;
    do {
      const auto& c = clauses_[ci];
      for (size_t k = (lit == -1 ? 0 : 1); k < c.size(); ++k) {
        int q = c[k];
        int v = var_of(q);
        if (!seen_[v] && level_[v] > 0) {
          seen_[v] = 1;
          bump(v);
          if (level_[v] >= decision_level()) {
            ++counter;
          } else {
            learnt.push_back(q);
          }
        }
      }
      do {
        lit = trail_[--idx];
      } while (!seen_[var_of(lit)]);
      seen_[var_of(lit)] = 0;
      ci = reason_[var_of(lit)];
      --counter;
    } while (counter > 0);
    learnt[0] = negate(lit);
    for (size_t i = 1; i < learnt.size(); ++i) seen_[var_of(learnt[i])] = 0;
    int back = 0;
    size_t pos_max = 1;
    for (size_t i = 1; i < learnt.size(); ++i)
      if (level_[var_of(learnt[i])] > back) {
        back = level_[var_of(learnt[i])];
        pos_max = i;
      }
    if (learnt.size() > 1) std::swap(learnt[1], learnt[pos_max]);
    return back;
  }

  void backtrack(int lvl) {
    if (decision_level() <= lvl) return;
    int bound = trail_lim_[lvl];
    for (int i = static_cast<int>(trail_.size()) - 1; i >= bound; --i) {
      int v = var_of(trail_[i]);
      phase_[v] = assigns_[v] == 1;
      assigns_[v] = 0;
      reason_[v] = -1;
    }
    trail_.resize(bound);
    trail_lim_.resize(lvl);
    qhead_ = trail_.size();
  }

  int pick_branch() {
    int best = -1;
    double best_act = -1.0;
    for (int v = 0; v < nvars_; ++v)
      if (assigns_[v] == 0 && activity_[v] > best_act) {
        best = v;
        best_act = activity_[v];
      }
    return best;
  }

  void bump(int v) {
    activity_[v] += inc_;
    if (activity_[v] > 1e100) {
      for (double& a : activity_) a *= 1e-100;
      inc_ *= 1e-100;
    }
  }
  void decay_activities() { inc_ /= 0.95; }

  // Luby sequence 1,1,2,1,1,2,4,... (1-based index)
  static uint64_t luby(int i) {
    for (int k = 1; k < 31; ++k) {
      if (i == (1 << k) - 1) return 1ull << (k - 1);
      if (i < (1 << k) - 1) return luby(i - (1 << (k - 1)) + 1);
    }
    return 1;
  }

  void extract_model() {
    model_.assign(nvars_ + 1, false);
    for (int v = 0; v < nvars_; ++v) model_[v + 1] = assigns_[v] == 1;
  }

  int nvars_;
  uint64_t budget_;
  bool ok_ = true;
  std::vector<std::vector<int>> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<int8_t> assigns_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<double> activity_;
  std::vector<bool> phase_;
  std::vector<char> seen_;
  std::vector<int> trail_;
  std::vector<int> trail_lim_;
  size_t qhead_ = 0;
  double inc_ = 1.0;
  std::vector<bool> model_;
};

struct SatAnswer {
  SatResult result = SatResult::Unknown;
  std::vector<bool> model;  // 1-indexed
};

inline bool model_satisfies(const CnfFormula& f, const std::vector<bool>& m) {
  for (const auto& c : f.clauses) {
    bool sat = false;
    for (int l : c)
      if ((l > 0 && m[l]) || (l < 0 && !m[-l])) {
        sat = true;
        break;
      }
    if (!sat) return false;
  }
  for (int a : f.assumptions)
    if (!((a > 0 && m[a]) || (a < 0 && !m[-a]))) return false;
  return true;
}

// Internal default path. Models are re-verified before they are surfaced.
inline SatAnswer solve_cnf(const CnfFormula& f, uint64_t budget = 4000000) {
  SatAnswer ans;
  if (f.trivially_unsat) {
    ans.result = SatResult::Unsat;
    return ans;
  }
  CdclSolver s(f, budget);
  ans.result = s.solve();
  if (ans.result == SatResult::Sat) {
    ans.model = s.model();
    if (!model_satisfies(f, ans.model))
      throw std::logic_error("sat: model verification failed");
  }
  return ans;
}

// ---------------------------------------------------------------------------
// DIMACS

inline std::string to_dimacs(const CnfFormula& f) {
  std::ostringstream os;
  os << "p cnf " << f.num_vars << ' '
     << (f.clauses.size() + f.assumptions.size()) << '\n';
  for (const auto& c : f.clauses) {
    for (int l : c) os << l << ' ';
    os << "0\n";
  }
  for (int a : f.assumptions) os << a << " 0\n";
  return os.str();
}

inline CnfFormula parse_dimacs(std::istream& in) {
  CnfFormula f;
  std::string tok;
  bool header = false;
  size_t expected = 0;
  std::vector<int> cur;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    if (!header) {
      std::string p, cnf;
      ls >> p >> cnf >> f.num_vars >> expected;
      if (p != "p" || cnf != "cnf")
        throw std::runtime_error("dimacs: bad header");
      header = true;
      continue;
    }
    int l;
    while (ls >> l) {
      if (l == 0) {
        f.add_clause(cur);
        cur.clear();
      } else {
        cur.push_back(l);
      }
    }
  }
  if (!cur.empty()) f.add_clause(cur);
  return f;
}

class ExternalSolverError : public std::runtime_error {
 public:
  ExternalSolverError(std::string msg, std::string raw)
      : std::runtime_error(std::move(msg)), raw_output(std::move(raw)) {}
  std::string raw_output;
};

// Runs `command <dimacs-file>` and parses the standard s/v answer lines.
inline SatAnswer external_solve(const CnfFormula& f,
                                const std::string& command) {
  std::string path = "/tmp/semml_sat_" + std::to_string(::getpid()) + "_" +
                     std::to_string(rand()) + ".cnf";
  {
    std::ofstream out(path);
    out << to_dimacs(f);
  }
  std::string cmd = command + " " + path + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    ::remove(path.c_str());
    throw ExternalSolverError("external solver: failed to start", "");
  }
  std::string output;
  char buf[4096];
  while (size_t n = ::fread(buf, 1, sizeof buf, pipe)) output.append(buf, n);
  ::pclose(pipe);
  ::remove(path.c_str());

  SatAnswer ans;
  std::istringstream is(output);
  std::string line;
  bool have_status = false;
  std::vector<int> lits;
  while (std::getline(is, line)) {
    if (line.rfind("s SATISFIABLE", 0) == 0) {
      ans.result = SatResult::Sat;
      have_status = true;
    } else if (line.rfind("s UNSATISFIABLE", 0) == 0) {
      ans.result = SatResult::Unsat;
      have_status = true;
    } else if (!line.empty() && line[0] == 'v') {
      std::istringstream ls(line.substr(1));
      int l;
      while (ls >> l)
        if (l != 0) lits.push_back(l);
    }
  }
  if (!have_status)
    throw ExternalSolverError("external solver: no status line", output);
  if (ans.result == SatResult::Sat) {
    ans.model.assign(f.num_vars + 1, false);
    for (int l : lits)
      if (std::abs(l) <= f.num_vars) ans.model[std::abs(l)] = l > 0;
    if (!model_satisfies(f, ans.model))
      throw ExternalSolverError("external solver: model does not satisfy", output);
  }
  return ans;
}

}  // namespace semml
