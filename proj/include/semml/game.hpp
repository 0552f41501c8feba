#pragma once

// Parity-game arena on top of the DPA: environment nodes are automaton
// states, system nodes are the distinct cofactors of the edge relation
// after the environment fixed its propositions. A recursive Zielonka solver
// runs on the explored part with frontier states wired as immediately
// losing for the probing player, and returns permissive (set-valued)
// strategies.

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "semml/automata.hpp"
#include "semml/bdd.hpp"

namespace semml {

enum class Player { Sys, Env };
inline Player opponent(Player p) {
  return p == Player::Sys ? Player::Env : Player::Sys;
}

enum class FrontierAssumption { LostForSys, LostForEnv };

class NotWon : public std::runtime_error {
 public:
  NotWon() : std::runtime_error("strategy: initial state not won by player") {}
};

// ---------------------------------------------------------------------------
// Explicit parity game (min-even, node priorities) with a recursive
// Zielonka solver. Every node must have at least one successor.

struct ParityGame {
  struct Node {
    Player owner;
    int priority;
    std::vector<uint32_t> succ;
  };
  std::vector<Node> nodes;
};

struct ParitySolution {
  std::vector<Player> winner;
  // permitted[v]: indices into nodes[v].succ; filled for nodes owned by
  // their winner, kept maximal per the attractor decomposition
  std::vector<std::vector<uint32_t>> permitted;
};

class ZielonkaSolver {
 public:
  explicit ZielonkaSolver(const ParityGame& g) : g_(g) {}

  ParitySolution solve() {
    ParitySolution sol;
    sol.winner.assign(g_.nodes.size(), Player::Env);
    sol.permitted.assign(g_.nodes.size(), {});
    std::vector<char> mask(g_.nodes.size(), 1);
    for (const auto& n : g_.nodes)
      if (n.succ.empty())
        throw std::invalid_argument("parity game: dead-end node");
    recurse(mask, sol);
    return sol;
  }

 private:
  struct Attr {
    std::vector<char> in;
    std::vector<int> rank;
  };

  // P-attractor to target within mask; rank decreases toward the target
  Attr attractor(const std::vector<char>& mask, const std::vector<char>& target,
                 Player p) const {
    size_t n = g_.nodes.size();
    Attr a;
    a.in.assign(n, 0);
    a.rank.assign(n, -1);
    std::deque<uint32_t> queue;
    for (uint32_t v = 0; v < n; ++v)
      if (mask[v] && target[v]) {
        a.in[v] = 1;
        a.rank[v] = 0;
        queue.push_back(v);
      }
    // counts of unprocessed successors for opponent nodes
    std::vector<int> pending(n, 0);
    for (uint32_t v = 0; v < n; ++v) {
      if (!mask[v]) continue;
      int cnt = 0;
      for (uint32_t t : g_.nodes[v].succ)
        if (mask[t]) ++cnt;
      pending[v] = cnt;
    }
    // reverse edges
    std::vector<std::vector<uint32_t>> preds(n);
    for (uint32_t v = 0; v < n; ++v) {
      if (!mask[v]) continue;
      for (uint32_t t : g_.nodes[v].succ)
        if (mask[t]) preds[t].push_back(v);
    }
    while (!queue.empty()) {
      uint32_t t = queue.front();
      queue.pop_front();
      for (uint32_t v : preds[t]) {
        if (a.in[v]) continue;
        if (g_.nodes[v].owner == p) {
          a.in[v] = 1;
          a.rank[v] = a.rank[t] + 1;
          queue.push_back(v);
        } else {
          if (--pending[v] == 0) {
            a.in[v] = 1;
            int mx = 0;
            for (uint32_t s : g_.nodes[v].succ)
              if (mask[s]) mx = std::max(mx, a.rank[s]);
            a.rank[v] = mx + 1;
            queue.push_back(v);
          }
        }
      }
    }
    return a;
  }

  void recurse(std::vector<char> mask, ParitySolution& sol) {
    size_t n = g_.nodes.size();
    int d = INT32_MAX;
    for (uint32_t v = 0; v < n; ++v)
      if (mask[v]) d = std::min(d, g_.nodes[v].priority);
    if (d == INT32_MAX) return;
    Player p = d % 2 == 0 ? Player::Sys : Player::Env;

    std::vector<char> target(n, 0);
    for (uint32_t v = 0; v < n; ++v)
      if (mask[v] && g_.nodes[v].priority == d) target[v] = 1;
    Attr a = attractor(mask, target, p);

    std::vector<char> sub(n, 0);
    bool sub_empty = true;
    for (uint32_t v = 0; v < n; ++v)
      if (mask[v] && !a.in[v]) {
        sub[v] = 1;
        sub_empty = false;
      }

    ParitySolution inner;
    inner.winner.assign(n, Player::Env);
    inner.permitted.assign(n, {});
    if (!sub_empty) recurse(sub, inner);

    bool opp_in_sub = false;
    for (uint32_t v = 0; v < n; ++v)
      if (sub[v] && inner.winner[v] == opponent(p)) opp_in_sub = true;

    if (!opp_in_sub) {
      // everything in mask is won by p
      for (uint32_t v = 0; v < n; ++v) {
        if (!mask[v]) continue;
        sol.winner[v] = p;
        if (g_.nodes[v].owner != p) continue;
        std::vector<uint32_t> perm;
        const auto& succ = g_.nodes[v].succ;
        if (target[v]) {
          for (uint32_t i = 0; i < succ.size(); ++i)
            if (mask[succ[i]]) perm.push_back(i);
        } else if (a.in[v]) {
          for (uint32_t i = 0; i < succ.size(); ++i)
            if (mask[succ[i]] && a.in[succ[i]] &&
                a.rank[succ[i]] < a.rank[v])
              perm.push_back(i);
        } else {
          perm = inner.permitted[v];
          for (uint32_t i = 0; i < succ.size(); ++i)
            if (mask[succ[i]] && a.in[succ[i]]) perm.push_back(i);
          std::sort(perm.begin(), perm.end());
          perm.erase(std::unique(perm.begin(), perm.end()), perm.end());
        }
        sol.permitted[v] = std::move(perm);
      }
      return;
    }

    // opponent wins part of the subgame; attract to it and solve the rest
    std::vector<char> opp_region(n, 0);
    for (uint32_t v = 0; v < n; ++v)
      if (sub[v] && inner.winner[v] == opponent(p)) opp_region[v] = 1;
    Attr b = attractor(mask, opp_region, opponent(p));

    std::vector<char> rest(n, 0);
    bool rest_empty = true;
    for (uint32_t v = 0; v < n; ++v)
      if (mask[v] && !b.in[v]) {
        rest[v] = 1;
        rest_empty = false;
      }
    ParitySolution final_sol;
    final_sol.winner.assign(n, Player::Env);
    final_sol.permitted.assign(n, {});
    if (!rest_empty) recurse(rest, final_sol);

    for (uint32_t v = 0; v < n; ++v) {
      if (!mask[v]) continue;
      if (b.in[v]) {
        sol.winner[v] = opponent(p);
        if (g_.nodes[v].owner != opponent(p)) continue;
        if (opp_region[v]) {
          sol.permitted[v] = inner.permitted[v];
        } else {
          const auto& succ = g_.nodes[v].succ;
          std::vector<uint32_t> perm;
          for (uint32_t i = 0; i < succ.size(); ++i)
            if (mask[succ[i]] && b.in[succ[i]] && b.rank[succ[i]] < b.rank[v])
              perm.push_back(i);
          sol.permitted[v] = std::move(perm);
        }
      } else {
        sol.winner[v] = final_sol.winner[v];
        sol.permitted[v] = final_sol.permitted[v];
      }
    }
  }

  const ParityGame& g_;
};

inline ParitySolution solve_parity(const ParityGame& g) {
  return ZielonkaSolver(g).solve();
}

// ---------------------------------------------------------------------------
// Arena

class Arena {
 public:
  struct EnvEdge {
    BddRef guard;  // over env variables
    uint32_t sys;
  };
  struct EnvNode {
    DpaBuilder::StateId dpa;
    bool expanded = false;
    std::vector<EnvEdge> edges;
  };
  struct SysEdge {
    BddRef guard;  // over sys variables
    uint32_t env_dst;
    int priority;
  };
  struct SysNode {
    std::vector<SysEdge> edges;
  };

  Arena(DpaBuilder& dpa, BddStore& bdd, const Partition& part)
      : dpa_(dpa), bdd_(bdd), part_(part) {
    neutral_priority_ = dpa.priority_bound();
    for (AtomId a : part.env) env_vars_.insert(dpa_.var_of_atom(a));
    initial_ = env_node_of(dpa_.initial());
  }

  uint32_t initial() const { return initial_; }
  size_t env_count() const { return env_nodes_.size(); }
  size_t sys_count() const { return sys_nodes_.size(); }
  const EnvNode& env_node(uint32_t i) const { return env_nodes_[i]; }
  const SysNode& sys_node(uint32_t i) const { return sys_nodes_[i]; }
  int neutral_priority() const { return neutral_priority_; }
  DpaBuilder& dpa() { return dpa_; }

  uint32_t env_node_of(DpaBuilder::StateId s) {
    auto it = env_ids_.find(s);
    if (it != env_ids_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(env_nodes_.size());
    env_nodes_.push_back(EnvNode{s, false, {}});
    env_ids_.emplace(s, id);
    frontier_.insert(id);
    return id;
  }

  std::vector<uint32_t> frontier() const {
    return std::vector<uint32_t>(frontier_.begin(), frontier_.end());
  }
  bool fully_explored() const { return frontier_.empty(); }

  // splits the DPA edge relation of this state on the environment
  // propositions; assignments with identical system cofactors share one
  // intermediate system node
  void expand(uint32_t env_id) {
    EnvNode& node = env_nodes_[env_id];
    if (node.expanded) return;
    const auto& dpa_edges = dpa_.successors(node.dpa);

    // environment support of the guards
    std::set<uint32_t> sup;
    for (const auto& e : dpa_edges)
      for (uint32_t v : bdd_.support(e.guard))
        if (env_vars_.count(v)) sup.insert(v);
    std::vector<uint32_t> env_sup(sup.begin(), sup.end());

    std::map<std::string, uint32_t> group_sys;  // signature -> sys node
    std::map<uint32_t, BddRef> group_guard;
    for (uint32_t bits = 0; bits < (1u << env_sup.size()); ++bits) {
      // cofactor every guard under this env assignment
      std::vector<SysEdge> rest;
      std::string sig;
      for (const auto& e : dpa_edges) {
        BddRef g = e.guard;
        for (size_t i = 0; i < env_sup.size(); ++i)
          g = bdd_.cofactor(g, env_sup[i], (bits >> i) & 1);
        if (g == BddStore::kFalse) continue;
        uint32_t dst = env_node_of(e.dst);
        rest.push_back(SysEdge{g, dst, e.priority});
        sig += std::to_string(g) + ":" + std::to_string(dst) + ":" +
               std::to_string(e.priority) + ";";
      }
      uint32_t sys_id;
      auto git = sys_ids_.find(sig);
      if (git != sys_ids_.end()) {
        sys_id = git->second;
      } else {
        sys_id = static_cast<uint32_t>(sys_nodes_.size());
        sys_nodes_.push_back(SysNode{std::move(rest)});
        sys_ids_.emplace(sig, sys_id);
      }
      BddRef cube = bdd_.tt();
      for (size_t i = env_sup.size(); i-- > 0;)
        cube = bdd_.and_(cube, bdd_.literal(env_sup[i], (bits >> i) & 1));
      auto it = group_guard.find(sys_id);
      if (it == group_guard.end())
        group_guard.emplace(sys_id, cube);
      else
        it->second = bdd_.or_(it->second, cube);
    }
    for (auto& [sys_id, guard] : group_guard)
      node.edges.push_back(EnvEdge{guard, sys_id});
    node.expanded = true;
    frontier_.erase(env_id);
  }

  void expand_all(size_t max_nodes = 1u << 20) {
    while (!frontier_.empty()) {
      if (env_nodes_.size() > max_nodes)
        throw TranslationLimit("arena budget exceeded");
      expand(*frontier_.begin());
    }
  }

  std::string to_dot() const {
    std::ostringstream os;
    os << "digraph arena {\n";
    for (uint32_t i = 0; i < env_nodes_.size(); ++i) {
      os << "  e" << i << " [shape=ellipse,label=\"" << env_nodes_[i].dpa
         << (env_nodes_[i].expanded ? "" : " ?") << "\"];\n";
      for (const auto& e : env_nodes_[i].edges)
        os << "  e" << i << " -> s" << e.sys << ";\n";
    }
    for (uint32_t i = 0; i < sys_nodes_.size(); ++i) {
      os << "  s" << i << " [shape=box,label=\"\"];\n";
      for (const auto& e : sys_nodes_[i].edges)
        os << "  s" << i << " -> e" << e.env_dst << " [label=\"" << e.priority
           << "\"];\n";
    }
    os << "}\n";
    return os.str();
  }

 private:
  DpaBuilder& dpa_;
  BddStore& bdd_;
  Partition part_;
  std::set<uint32_t> env_vars_;
  std::vector<EnvNode> env_nodes_;
  std::unordered_map<DpaBuilder::StateId, uint32_t> env_ids_;
  std::vector<SysNode> sys_nodes_;
  std::map<std::string, uint32_t> sys_ids_;
  std::set<uint32_t> frontier_;
  uint32_t initial_ = 0;
  int neutral_priority_;
};

// ---------------------------------------------------------------------------
// Solving a (possibly partial) arena under a frontier assumption.

struct ArenaSolution {
  FrontierAssumption assumption;
  std::vector<Player> env_winner;          // per arena env node
  std::vector<Player> sys_winner;          // per arena sys node
  std::vector<std::vector<uint32_t>> env_permitted;  // edge indices, env nodes
  std::vector<std::vector<uint32_t>> sys_permitted;  // edge indices, sys nodes

  // a result is sound for the player the frontier was turned against
  Player sound_for() const {
    return assumption == FrontierAssumption::LostForSys ? Player::Sys
                                                        : Player::Env;
  }
};

inline ArenaSolution solve(Arena& arena, FrontierAssumption assumption) {
  // solver graph: env nodes, sys nodes, one virtual node per sys edge
  // carrying its priority; frontier env nodes become sinks that lose for
  // the probing player
  size_t ne = arena.env_count(), ns = arena.sys_count();
  ParityGame game;
  int neutral = arena.neutral_priority();
  std::vector<uint32_t> env_base(ne), sys_base(ns);
  for (size_t i = 0; i < ne; ++i) {
    env_base[i] = static_cast<uint32_t>(game.nodes.size());
    game.nodes.push_back({Player::Env, neutral, {}});
  }
  for (size_t i = 0; i < ns; ++i) {
    sys_base[i] = static_cast<uint32_t>(game.nodes.size());
    game.nodes.push_back({Player::Sys, neutral, {}});
  }
  for (size_t i = 0; i < ne; ++i) {
    const auto& n = arena.env_node(i);
    if (!n.expanded) {
      int p = assumption == FrontierAssumption::LostForSys ? 1 : 2;
      game.nodes[env_base[i]].priority = p;
      game.nodes[env_base[i]].succ.push_back(env_base[i]);
      continue;
    }
    for (const auto& e : n.edges)
      game.nodes[env_base[i]].succ.push_back(sys_base[e.sys]);
  }
  for (size_t i = 0; i < ns; ++i) {
    for (const auto& e : arena.sys_node(i).edges) {
      uint32_t mid = static_cast<uint32_t>(game.nodes.size());
      game.nodes.push_back(
          {Player::Sys, e.priority, {env_base[e.env_dst]}});
      game.nodes[sys_base[i]].succ.push_back(mid);
    }
  }

  ParitySolution ps = solve_parity(game);
  ArenaSolution out;
  out.assumption = assumption;
  out.env_winner.resize(ne);
  out.sys_winner.resize(ns);
  out.env_permitted.assign(ne, {});
  out.sys_permitted.assign(ns, {});
  for (size_t i = 0; i < ne; ++i) {
    out.env_winner[i] = ps.winner[env_base[i]];
    if (out.env_winner[i] == Player::Env)
      out.env_permitted[i] = ps.permitted[env_base[i]];
  }
  for (size_t i = 0; i < ns; ++i) {
    out.sys_winner[i] = ps.winner[sys_base[i]];
    if (out.sys_winner[i] == Player::Sys)
      out.sys_permitted[i] = ps.permitted[sys_base[i]];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Non-deterministic strategies extracted from a solved arena.

struct SysStrategy {
  struct Choice {
    BddRef out_guard;  // permitted system assignments
    uint32_t dst;      // strategy node
  };
  struct Branch {
    BddRef in_guard;  // environment assignments
    std::vector<Choice> options;  // nonempty; any choice is winning
  };
  struct Node {
    DpaBuilder::StateId label;
    std::vector<Branch> branches;
  };
  std::vector<Node> nodes;  // 0 = initial
};

struct EnvStrategy {
  struct Response {
    BddRef in_guard;  // system assignments
    uint32_t dst;
  };
  struct Option {
    BddRef out_guard;  // permitted environment assignments
    std::vector<Response> responses;
  };
  struct Node {
    DpaBuilder::StateId label;
    std::vector<Option> options;  // nonempty
  };
  std::vector<Node> nodes;
};

inline SysStrategy extract_sys_strategy(Arena& arena,
                                        const ArenaSolution& sol) {
  if (sol.env_winner[arena.initial()] != Player::Sys) throw NotWon();
  SysStrategy strat;
  std::map<uint32_t, uint32_t> id_of;
  std::deque<uint32_t> queue{arena.initial()};
  id_of[arena.initial()] = 0;
  strat.nodes.emplace_back();
  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    const auto& env = arena.env_node(v);
    SysStrategy::Node node;
    node.label = env.dpa;
    for (const auto& ee : env.edges) {  // closed under environment moves
      SysStrategy::Branch br;
      br.in_guard = ee.guard;
      const auto& sys = arena.sys_node(ee.sys);
      for (uint32_t idx : sol.sys_permitted[ee.sys]) {
        const auto& se = sys.edges[idx];
        auto it = id_of.find(se.env_dst);
        uint32_t dst;
        if (it == id_of.end()) {
          dst = static_cast<uint32_t>(strat.nodes.size());
          id_of.emplace(se.env_dst, dst);
          strat.nodes.emplace_back();
          queue.push_back(se.env_dst);
        } else {
          dst = it->second;
        }
        br.options.push_back(SysStrategy::Choice{se.guard, dst});
      }
      if (br.options.empty())
        throw std::logic_error("strategy: empty permitted set");
      node.branches.push_back(std::move(br));
    }
    strat.nodes[id_of[v]] = std::move(node);
  }
  return strat;
}

inline EnvStrategy extract_env_strategy(Arena& arena,
                                        const ArenaSolution& sol) {
  if (sol.env_winner[arena.initial()] != Player::Env) throw NotWon();
  EnvStrategy strat;
  std::map<uint32_t, uint32_t> id_of;
  std::deque<uint32_t> queue{arena.initial()};
  id_of[arena.initial()] = 0;
  strat.nodes.emplace_back();
  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    const auto& env = arena.env_node(v);
    EnvStrategy::Node node;
    node.label = env.dpa;
    for (uint32_t idx : sol.env_permitted[v]) {
      const auto& ee = env.edges[idx];
      EnvStrategy::Option opt;
      opt.out_guard = ee.guard;
      for (const auto& se : arena.sys_node(ee.sys).edges) {
        auto it = id_of.find(se.env_dst);
        uint32_t dst;
        if (it == id_of.end()) {
          dst = static_cast<uint32_t>(strat.nodes.size());
          id_of.emplace(se.env_dst, dst);
          strat.nodes.emplace_back();
          queue.push_back(se.env_dst);
        } else {
          dst = it->second;
        }
        opt.responses.push_back(EnvStrategy::Response{se.guard, dst});
      }
      node.options.push_back(std::move(opt));
    }
    if (node.options.empty())
      throw std::logic_error("strategy: empty permitted set");
    strat.nodes[id_of[v]] = std::move(node);
  }
  return strat;
}

}  // namespace semml
