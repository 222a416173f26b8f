#ifndef CHOREO_SEMANTICS_HPP
#define CHOREO_SEMANTICS_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "choreo/ast.hpp"
#include "choreo/parser.hpp"

// Executable LTS for systems. Structural congruence is handled by
// normalization; recursion is unfolded lazily when a prefix is demanded,
// which terminates because recursion is prefix-guarded.

namespace choreo {

enum class LabelKind { SyncSend, SyncRecv, Tick };

struct Label {
  LabelKind kind = LabelKind::Tick;
  std::string participant;  // SyncSend / SyncRecv
  Channel channel;
  Sort sort;

  std::string str() const {
    switch (kind) {
      case LabelKind::Tick: return "tick";
      case LabelKind::SyncSend:
        return participant + ":" + channel.name + "!" + (sort.is_unit() ? "" : "<" + sort.name + ">");
      case LabelKind::SyncRecv:
        return participant + ":" + channel.name + "?" + (sort.is_unit() ? "" : "<" + sort.name + ">");
    }
    return {};
  }
  auto operator<=>(const Label&) const = default;
};

// Polarized channel action: output is the "co-name" side.
struct ReadyAction {
  Channel channel;
  bool output = false;
  auto operator<=>(const ReadyAction&) const = default;
};

using ReadySet = std::set<ReadyAction>;

// Unfolds top-level recursion binders until a choice or variable surfaces.
inline BehaviourPtr unfold_behaviour(BehaviourPtr p) {
  struct Sub {
    static BehaviourPtr go(const BehaviourPtr& q, const std::string& x, const BehaviourPtr& repl) {
      switch (q->kind) {
        case BKind::Internal:
        case BKind::External: {
          std::vector<Branch> bs;
          bs.reserve(q->branches.size());
          for (const auto& b : q->branches) bs.push_back({b.channel, b.sort, go(b.cont, x, repl)});
          return q->kind == BKind::Internal ? internal_choice(std::move(bs))
                                            : external_choice(std::move(bs));
        }
        case BKind::Rec: return q->var == x ? q : brec(q->var, go(q->body, x, repl));
        case BKind::Var: return q->var == x ? repl : q;
      }
      return q;
    }
  };
  while (p->kind == BKind::Rec) p = Sub::go(p->body, p->var, p);
  return p;
}

inline ReadySet ready(const BehaviourPtr& b) {
  ReadySet out;
  auto p = unfold_behaviour(b);
  if (p->kind == BKind::Internal)
    for (const auto& br : p->branches) out.insert({br.channel, true});
  if (p->kind == BKind::External)
    for (const auto& br : p->branches) out.insert({br.channel, false});
  return out;
}

// The ready set of a system: inputs and outputs offered by participants,
// plus an output for every non-empty queue.
inline ReadySet ready(const System& s) {
  ReadySet out;
  for (const auto& [n, p] : s.participants) {
    auto rs = ready(p);
    out.insert(rs.begin(), rs.end());
  }
  for (const auto& [a, q] : s.queues)
    if (!q.empty()) out.insert({Channel{a}, true});
  return out;
}

// ⟐(S): some channel is ready with both polarities.
inline bool onestep(const System& s) {
  auto rs = ready(s);
  for (const auto& act : rs)
    if (act.output && rs.count({act.channel, false})) return true;
  return false;
}

inline std::optional<BehaviourPtr> restrict_participant(const System& s, const std::string& n) {
  auto it = s.participants.find(n);
  if (it == s.participants.end()) return std::nullopt;
  return it->second;
}

inline std::optional<std::vector<Sort>> restrict_queue(const System& s, const std::string& a) {
  auto it = s.queues.find(a);
  if (it == s.queues.end()) return std::nullopt;
  return it->second;
}

inline bool terminated(const System& s) {
  for (const auto& [n, p] : s.participants)
    if (!is_zero(p)) return false;
  for (const auto& [a, q] : s.queues)
    if (!q.empty()) return false;
  return true;
}

inline System norm_system(const System& s) {
  System out;
  for (const auto& [n, p] : s.participants) out.participants.emplace(n, norm_local(p));
  out.queues = s.queues;
  return out;
}

// Programs are executed by lifting to a runtime system with empty queues.
inline System lift_runtime(const System& s) {
  System out = s;
  for (const auto& a : channels_of(s))
    out.queues.emplace(a, std::vector<Sort>{});
  return out;
}

// All derivable transitions of a runtime system. An output synchronizes with
// the channel's queue push; an input pops a matching queue head; a fully
// terminated system ticks to itself.
inline std::vector<std::pair<Label, System>> step(const System& s0) {
  System s = s0.is_program() && !s0.participants.empty() ? lift_runtime(s0) : s0;
  std::vector<std::pair<Label, System>> out;
  if (terminated(s)) {
    out.push_back({Label{LabelKind::Tick, "", {}, {}}, norm_system(s)});
    return out;
  }
  for (const auto& [n, p0] : s.participants) {
    auto p = unfold_behaviour(p0);
    if (p->kind == BKind::Internal) {
      for (const auto& br : p->branches) {
        auto qit = s.queues.find(br.channel.name);
        if (qit == s.queues.end()) continue;  // no queue, cannot push
        System next = s;
        next.participants[n] = br.cont;
        next.queues[br.channel.name].push_back(br.sort);
        out.push_back({Label{LabelKind::SyncSend, n, br.channel, br.sort}, norm_system(next)});
      }
    } else if (p->kind == BKind::External) {
      for (const auto& br : p->branches) {
        auto qit = s.queues.find(br.channel.name);
        if (qit == s.queues.end() || qit->second.empty()) continue;
        if (qit->second.front() != br.sort) continue;  // sort mismatch: no rule
        System next = s;
        next.participants[n] = br.cont;
        auto& q = next.queues[br.channel.name];
        q.erase(q.begin());
        out.push_back({Label{LabelKind::SyncRecv, n, br.channel, br.sort}, norm_system(next)});
      }
    }
  }
  return out;
}

// A queue head that the pending receiver cannot accept (rule error).
inline bool has_sort_error(const System& s) {
  for (const auto& [n, p0] : s.participants) {
    auto p = unfold_behaviour(p0);
    if (p->kind != BKind::External) continue;
    for (const auto& br : p->branches) {
      auto it = s.queues.find(br.channel.name);
      if (it != s.queues.end() && !it->second.empty() && it->second.front() != br.sort) return true;
    }
  }
  return false;
}

// Two distinct participants ready with the same polarity on one channel.
inline bool has_race(const System& s) {
  std::map<ReadyAction, int> counts;
  for (const auto& [n, p] : s.participants)
    for (const auto& act : ready(p)) counts[act]++;
  for (const auto& [act, c] : counts)
    if (c > 1) return true;
  return false;
}

inline std::string system_key(const System& s) { return print_system(norm_system(s)); }

inline uint64_t fnv1a(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string state_hash(const System& s) {
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(system_key(s))));
  return buf;
}

struct Exploration {
  std::vector<System> states;                         // discovery (BFS) order
  std::map<std::string, size_t> index;                // system_key -> state id
  std::vector<std::tuple<size_t, Label, size_t>> edges;
  std::vector<size_t> stuck;       // no transition, not terminated
  std::vector<size_t> terminated;  // all-zero behaviours, empty queues
  bool truncated = false;
};

// BFS over step up to `bound` distinct normalized states.
inline Exploration explore(const System& s0, size_t bound = 10000) {
  Exploration ex;
  System start = norm_system(s0.is_program() && !s0.participants.empty() ? lift_runtime(s0) : s0);
  std::deque<size_t> frontier;
  ex.states.push_back(start);
  ex.index.emplace(system_key(start), 0);
  frontier.push_back(0);
  while (!frontier.empty()) {
    size_t id = frontier.front();
    frontier.pop_front();
    System cur = ex.states[id];
    auto succs = step(cur);
    bool moved = false;
    for (const auto& [lab, next] : succs) {
      if (lab.kind == LabelKind::Tick) continue;  // self loop on terminated states
      moved = true;
      auto key = system_key(next);
      auto it = ex.index.find(key);
      size_t nid;
      if (it == ex.index.end()) {
        if (ex.states.size() >= bound) {
          ex.truncated = true;
          continue;
        }
        nid = ex.states.size();
        ex.states.push_back(next);
        ex.index.emplace(key, nid);
        frontier.push_back(nid);
      } else {
        nid = it->second;
      }
      ex.edges.emplace_back(id, lab, nid);
    }
    if (terminated(cur))
      ex.terminated.push_back(id);
    else if (!moved)
      ex.stuck.push_back(id);
  }
  return ex;
}

inline std::string explore_trace(const Exploration& ex) {
  std::string out;
  for (const auto& [from, lab, to] : ex.edges)
    out += state_hash(ex.states[from]) + " --" + lab.str() + "--> " + state_hash(ex.states[to]) + "\n";
  return out;
}

inline std::string explore_dot(const Exploration& ex) {
  std::string out = "digraph lts {\n";
  for (size_t i = 0; i < ex.states.size(); ++i)
    out += "  s" + std::to_string(i) + " [label=\"" + state_hash(ex.states[i]) + "\"];\n";
  for (const auto& [from, lab, to] : ex.edges)
    out += "  s" + std::to_string(from) + " -> s" + std::to_string(to) + " [label=\"" + lab.str() + "\"];\n";
  out += "}\n";
  return out;
}

}  // namespace choreo

#endif  // CHOREO_SEMANTICS_HPP
