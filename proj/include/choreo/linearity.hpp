#ifndef CHOREO_LINEARITY_HPP
#define CHOREO_LINEARITY_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "choreo/ast.hpp"

// Channel environments: labelled trees recording channel usage. Nodes are
// immutable and shared; analyses work on a flattened positional view so that
// subtree sharing introduced by append never conflates distinct positions.

namespace choreo {

struct ChannelEnv;
using EnvPtr = std::shared_ptr<const ChannelEnv>;

enum class EnvKind { Leaf, Fork, Use, RecMark };

struct ChannelEnv {
  EnvKind kind;
  Channel channel;          // Use
  Participant sender;       // Use (may be *)
  Participant receiver;     // Use
  std::string rec_var;      // RecMark
  EnvPtr child1, child2;    // Fork: both; Use/RecMark: child1
};

inline EnvPtr env_leaf() {
  return std::make_shared<ChannelEnv>(ChannelEnv{EnvKind::Leaf, {}, {}, {}, {}, nullptr, nullptr});
}
inline EnvPtr env_use(Channel a, Participant s, Participant r, EnvPtr child) {
  return std::make_shared<ChannelEnv>(
      ChannelEnv{EnvKind::Use, std::move(a), std::move(s), std::move(r), {}, std::move(child), nullptr});
}
inline EnvPtr env_fork(EnvPtr l, EnvPtr r) {
  return std::make_shared<ChannelEnv>(ChannelEnv{EnvKind::Fork, {}, {}, {}, {}, std::move(l), std::move(r)});
}
inline EnvPtr env_rec(std::string var, EnvPtr child) {
  return std::make_shared<ChannelEnv>(
      ChannelEnv{EnvKind::RecMark, {}, {}, {}, std::move(var), std::move(child), nullptr});
}
// A single interaction node over a leaf.
inline EnvPtr env_node(Channel a, Participant s, Participant r) {
  return env_use(std::move(a), std::move(s), std::move(r), env_leaf());
}

// ⊛: grafts c2 at every leaf of c; the leaf is the identity on the left.
inline EnvPtr append_env(const EnvPtr& c, const EnvPtr& c2) {
  switch (c->kind) {
    case EnvKind::Leaf: return c2;
    case EnvKind::Use: return env_use(c->channel, c->sender, c->receiver, append_env(c->child1, c2));
    case EnvKind::RecMark: return env_rec(c->rec_var, append_env(c->child1, c2));
    case EnvKind::Fork: return env_fork(append_env(c->child1, c2), append_env(c->child2, c2));
  }
  return c2;
}

inline size_t leaf_count(const EnvPtr& c) {
  switch (c->kind) {
    case EnvKind::Leaf: return 1;
    case EnvKind::Use:
    case EnvKind::RecMark: return leaf_count(c->child1);
    case EnvKind::Fork: return leaf_count(c->child1) + leaf_count(c->child2);
  }
  return 1;
}

// Flattened positional view: stable pre-order ids, parent links.
struct EnvNode {
  EnvKind kind;
  Channel channel;
  Participant sender, receiver;
  std::string rec_var;
  int parent = -1;
  int depth = 0;
};

inline std::vector<EnvNode> flatten_env(const EnvPtr& c) {
  std::vector<EnvNode> out;
  struct W {
    std::vector<EnvNode>& out;
    void go(const EnvPtr& n, int parent, int depth) {
      int id = static_cast<int>(out.size());
      out.push_back(EnvNode{n->kind, n->channel, n->sender, n->receiver, n->rec_var, parent, depth});
      if (n->kind == EnvKind::Use || n->kind == EnvKind::RecMark) go(n->child1, id, depth + 1);
      if (n->kind == EnvKind::Fork) {
        go(n->child1, id, depth + 1);
        go(n->child2, id, depth + 1);
      }
    }
  } w{out};
  w.go(c, -1, 0);
  return out;
}

enum class DepKind { II, IO, OO };

// n1 ≺ n2: n2 lies strictly below n1.
inline bool env_ancestor(const std::vector<EnvNode>& nodes, int n1, int n2) {
  for (int p = nodes[n2].parent; p != -1; p = nodes[p].parent)
    if (p == n1) return true;
  return false;
}

// Single dependency edge between two Use nodes with n1 ≺ n2.
//   II: same receiver.  IO: receiver of n1 = sender of n2.
//   OO: same channel and sender; extended at runtime with a:*->r ≺ a:s->r.
inline bool dep_edge(const std::vector<EnvNode>& nodes, int n1, int n2, DepKind k) {
  const auto& a = nodes[n1];
  const auto& b = nodes[n2];
  if (a.kind != EnvKind::Use || b.kind != EnvKind::Use) return false;
  if (!env_ancestor(nodes, n1, n2)) return false;
  switch (k) {
    case DepKind::II: return a.receiver == b.receiver;
    case DepKind::IO: return a.receiver == b.sender;
    case DepKind::OO:
      if (a.channel != b.channel) return false;
      if (a.sender == b.sender && !a.sender.is_star()) return true;
      return a.sender.is_star() && a.receiver == b.receiver;
  }
  return false;
}

namespace detail {

// Chain search along the tree path from n1 down to n2. Intermediate nodes of
// a chain are exactly the path nodes since ≺ in a tree is path-ordered.
struct DepAnalysis {
  const std::vector<EnvNode>& nodes;
  std::map<std::tuple<int, int, bool>, bool> memo;

  std::vector<int> path(int n1, int n2) const {
    std::vector<int> rev;
    for (int p = n2; p != -1 && p != n1; p = nodes[p].parent) rev.push_back(p);
    rev.push_back(n1);
    return {rev.rbegin(), rev.rend()};
  }

  bool edge_ii_io(int i, int j) const {
    return dep_edge(nodes, i, j, DepKind::II) || dep_edge(nodes, i, j, DepKind::IO);
  }
  bool edge_oo_io(int i, int j) const {
    return dep_edge(nodes, i, j, DepKind::OO) || dep_edge(nodes, i, j, DepKind::IO);
  }

  // chain of >= 1 edges over {II,IO} whose last edge is II
  bool input_dep(int n1, int n2) {
    auto key = std::make_tuple(n1, n2, true);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    auto p = path(n1, n2);
    size_t k = p.size();
    // reach[i]: p[0] reaches p[i] via a (possibly empty) {II,IO} chain
    std::vector<bool> reach(k, false);
    reach[0] = true;
    for (size_t j = 1; j < k; ++j)
      for (size_t i = 0; i < j; ++i)
        if (reach[i] && edge_ii_io(p[i], p[j])) reach[j] = true;
    bool ok = false;
    for (size_t i = 0; i + 1 <= k - 1 && !ok; ++i)
      if (reach[i] && dep_edge(nodes, p[i], p[k - 1], DepKind::II)) ok = true;
    memo[key] = ok;
    return ok;
  }

  // chain of >= 1 edges over {OO,IO}
  bool output_dep(int n1, int n2) {
    auto key = std::make_tuple(n1, n2, false);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    auto p = path(n1, n2);
    size_t k = p.size();
    std::vector<bool> reach(k, false);
    reach[0] = true;
    bool ok = false;
    for (size_t j = 1; j < k; ++j) {
      for (size_t i = 0; i < j; ++i)
        if (reach[i] && edge_oo_io(p[i], p[j])) reach[j] = true;
      if (j == k - 1) ok = reach[j];
    }
    // reach[k-1] must be via >= 1 edge; reach[0] seeded true only helps as start
    ok = k >= 2 && reach[k - 1];
    memo[key] = ok;
    return ok;
  }
};

}  // namespace detail

inline bool has_input_dep(const std::vector<EnvNode>& nodes, int n1, int n2) {
  detail::DepAnalysis d{nodes, {}};
  return d.input_dep(n1, n2);
}
inline bool has_output_dep(const std::vector<EnvNode>& nodes, int n1, int n2) {
  detail::DepAnalysis d{nodes, {}};
  return d.output_dep(n1, n2);
}

// Linear: every ≺-ordered pair of equal-channel uses has both an input and an
// output dependency.
inline bool is_linear(const EnvPtr& c) {
  auto nodes = flatten_env(c);
  detail::DepAnalysis d{nodes, {}};
  std::map<std::string, std::vector<int>> by_channel;
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].kind == EnvKind::Use) by_channel[nodes[i].channel.name].push_back(static_cast<int>(i));
  for (const auto& [a, ids] : by_channel) {
    for (int i : ids)
      for (int j : ids) {
        if (i == j || !env_ancestor(nodes, i, j)) continue;
        if (!d.input_dep(i, j) || !d.output_dep(i, j)) return false;
      }
  }
  return true;
}

// ⊙: append preserving linearity; nullopt is the ⊥ result.
inline std::optional<EnvPtr> append_linear(const EnvPtr& c, const EnvPtr& c2) {
  auto r = append_env(c, c2);
  if (!is_linear(r)) return std::nullopt;
  return r;
}

// Channel environment of a global type.
inline EnvPtr chan_g(const GlobalPtr& g) {
  switch (g->kind) {
    case GKind::Msg: return env_use(g->channel, g->sender, g->receiver, chan_g(g->cont));
    case GKind::Rec: return env_rec(g->var, chan_g(g->body));
    case GKind::Choice:
    case GKind::Par: return env_fork(chan_g(g->left), chan_g(g->right));
    case GKind::Seq: return append_env(chan_g(g->left), chan_g(g->right));
    case GKind::End:
    case GKind::Var: return env_leaf();
  }
  return env_leaf();
}

namespace detail {
// Path from the root to the deepest RecMark labelled var; empty if absent.
inline bool deepest_rec_path(const EnvPtr& c, const std::string& var, int depth, int& best_depth,
                             std::vector<int>& cur, std::vector<int>& best) {
  bool found = false;
  if (c->kind == EnvKind::RecMark && c->rec_var == var && depth > best_depth) {
    best_depth = depth;
    best = cur;
    found = true;
  }
  auto descend = [&](const EnvPtr& child, int which) {
    cur.push_back(which);
    bool f = deepest_rec_path(child, var, depth + 1, best_depth, cur, best);
    cur.pop_back();
    return f;
  };
  switch (c->kind) {
    case EnvKind::Use:
    case EnvKind::RecMark: found |= descend(c->child1, 0); break;
    case EnvKind::Fork:
      found |= descend(c->child1, 0);
      found |= descend(c->child2, 1);
      break;
    case EnvKind::Leaf: break;
  }
  return found;
}

inline EnvPtr subtree_at(const EnvPtr& c, const std::vector<int>& path, size_t i = 0) {
  if (i == path.size()) return c;
  return subtree_at(path[i] == 0 ? c->child1 : c->child2, path, i + 1);
}

inline EnvPtr replace_at(const EnvPtr& c, const std::vector<int>& path, const EnvPtr& repl,
                         size_t i = 0) {
  if (i == path.size()) return repl;
  EnvPtr l = c->child1, r = c->child2;
  if (path[i] == 0)
    l = replace_at(c->child1, path, repl, i + 1);
  else
    r = replace_at(c->child2, path, repl, i + 1);
  return std::make_shared<ChannelEnv>(
      ChannelEnv{c->kind, c->channel, c->sender, c->receiver, c->rec_var, l, r});
}
}  // namespace detail

// Subtree rooted at the deepest RecMark(var); nullopt when the mark is absent.
inline std::optional<EnvPtr> subtree_at_rec(const EnvPtr& c, const std::string& var) {
  int best_depth = -1;
  std::vector<int> cur, best;
  if (!detail::deepest_rec_path(c, var, 0, best_depth, cur, best)) return std::nullopt;
  return detail::subtree_at(c, best);
}

// One-time unfolding: grafts a copy of the RecMark subtree below itself.
inline std::optional<EnvPtr> unfold_env_at(const EnvPtr& c, const std::string& var) {
  int best_depth = -1;
  std::vector<int> cur, best;
  if (!detail::deepest_rec_path(c, var, 0, best_depth, cur, best)) return std::nullopt;
  auto sub = detail::subtree_at(c, best);
  return detail::replace_at(c, best, append_env(sub, sub));
}

// DOT rendering with dependency edges overlaid (debugging aid).
inline std::string env_dot(const EnvPtr& c) {
  auto nodes = flatten_env(c);
  detail::DepAnalysis d{nodes, {}};
  std::string out = "digraph chanenv {\n";
  for (size_t i = 0; i < nodes.size(); ++i) {
    std::string label;
    switch (nodes[i].kind) {
      case EnvKind::Leaf: label = "•"; break;
      case EnvKind::Fork: label = "o"; break;
      case EnvKind::RecMark: label = "mu " + nodes[i].rec_var; break;
      case EnvKind::Use:
        label = nodes[i].channel.name + ": " + nodes[i].sender.name + "->" + nodes[i].receiver.name;
        break;
    }
    out += "  n" + std::to_string(i) + " [label=\"" + label + "\"];\n";
    if (nodes[i].parent >= 0)
      out += "  n" + std::to_string(nodes[i].parent) + " -> n" + std::to_string(i) + ";\n";
  }
  for (size_t i = 0; i < nodes.size(); ++i)
    for (size_t j = 0; j < nodes.size(); ++j) {
      if (i == j || nodes[i].kind != EnvKind::Use || nodes[j].kind != EnvKind::Use) continue;
      if (!env_ancestor(nodes, static_cast<int>(i), static_cast<int>(j))) continue;
      if (d.input_dep(static_cast<int>(i), static_cast<int>(j)))
        out += "  n" + std::to_string(i) + " -> n" + std::to_string(j) +
               " [style=dashed,color=blue,label=in];\n";
      if (d.output_dep(static_cast<int>(i), static_cast<int>(j)))
        out += "  n" + std::to_string(i) + " -> n" + std::to_string(j) +
               " [style=dashed,color=red,label=out];\n";
    }
  out += "}\n";
  return out;
}

}  // namespace choreo

#endif  // CHOREO_LINEARITY_HPP
