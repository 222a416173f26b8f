#ifndef CHOREO_AST_HPP
#define CHOREO_AST_HPP

#include <algorithm>
#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Core terms: local behaviours, systems with FIFO queues, and global types.
// All nodes are immutable after construction and shared via shared_ptr, so
// values can be copied and passed across threads freely.

namespace choreo {

struct Channel {
  std::string name;
  auto operator<=>(const Channel&) const = default;
};

// Message sort; the unit sort has an empty name and is omitted when printing.
struct Sort {
  std::string name;
  bool is_unit() const { return name.empty(); }
  auto operator<=>(const Sort&) const = default;
};

// Participant names; "*" is reserved for the anonymous sender arising from
// queued messages in runtime typing. It never occurs in a System.
struct Participant {
  std::string name;
  static Participant star() { return Participant{"*"}; }
  bool is_star() const { return name == "*"; }
  auto operator<=>(const Participant&) const = default;
};

// ---------------------------------------------------------------------------
// Local behaviours

struct Behaviour;
using BehaviourPtr = std::shared_ptr<const Behaviour>;

struct Branch {
  Channel channel;
  Sort sort;
  BehaviourPtr cont;
};

enum class BKind { Internal, External, Rec, Var };

struct Behaviour {
  BKind kind;
  std::vector<Branch> branches;  // Internal / External
  std::string var;               // Rec / Var
  BehaviourPtr body;             // Rec
};

inline BehaviourPtr internal_choice(std::vector<Branch> bs) {
  return std::make_shared<Behaviour>(Behaviour{BKind::Internal, std::move(bs), {}, nullptr});
}
inline BehaviourPtr external_choice(std::vector<Branch> bs) {
  return std::make_shared<Behaviour>(Behaviour{BKind::External, std::move(bs), {}, nullptr});
}
inline BehaviourPtr bzero() { return internal_choice({}); }
inline BehaviourPtr bsend(Channel a, Sort e, BehaviourPtr cont) {
  return internal_choice({Branch{std::move(a), std::move(e), std::move(cont)}});
}
inline BehaviourPtr brecv(Channel a, Sort e, BehaviourPtr cont) {
  return external_choice({Branch{std::move(a), std::move(e), std::move(cont)}});
}
inline BehaviourPtr brec(std::string x, BehaviourPtr body) {
  return std::make_shared<Behaviour>(Behaviour{BKind::Rec, {}, std::move(x), std::move(body)});
}
inline BehaviourPtr bvar(std::string x) {
  return std::make_shared<Behaviour>(Behaviour{BKind::Var, {}, std::move(x), nullptr});
}

// 0 is the empty choice; internal and external empty choices are identified.
inline bool is_zero(const BehaviourPtr& p) {
  return (p->kind == BKind::Internal || p->kind == BKind::External) && p->branches.empty();
}

// ---------------------------------------------------------------------------
// Systems

struct System {
  // participant name -> behaviour (kept even when the behaviour is 0)
  std::map<std::string, BehaviourPtr> participants;
  // channel name -> queue contents, front = next to pop; empty map = program
  std::map<std::string, std::vector<Sort>> queues;

  bool is_program() const { return queues.empty(); }
};

// ---------------------------------------------------------------------------
// Global types

struct GlobalType;
using GlobalPtr = std::shared_ptr<const GlobalType>;

enum class GKind { Msg, Seq, Choice, Par, Rec, Var, End };

struct GlobalType {
  GKind kind;
  Participant sender, receiver;  // Msg
  Channel channel;               // Msg
  Sort sort;                     // Msg
  GlobalPtr cont;                // Msg
  GlobalPtr left, right;         // Seq / Choice / Par
  std::string var;               // Rec / Var
  GlobalPtr body;                // Rec
};

inline GlobalPtr gend() {
  return std::make_shared<GlobalType>(GlobalType{GKind::End, {}, {}, {}, {}, nullptr, nullptr, nullptr, {}, nullptr});
}
inline GlobalPtr gmsg(Participant s, Participant r, Channel a, Sort e, GlobalPtr cont) {
  return std::make_shared<GlobalType>(GlobalType{GKind::Msg, std::move(s), std::move(r), std::move(a),
                                                 std::move(e), std::move(cont), nullptr, nullptr, {}, nullptr});
}
inline GlobalPtr gseq(GlobalPtr l, GlobalPtr r) {
  return std::make_shared<GlobalType>(GlobalType{GKind::Seq, {}, {}, {}, {}, nullptr, std::move(l), std::move(r), {}, nullptr});
}
inline GlobalPtr gchoice(GlobalPtr l, GlobalPtr r) {
  return std::make_shared<GlobalType>(GlobalType{GKind::Choice, {}, {}, {}, {}, nullptr, std::move(l), std::move(r), {}, nullptr});
}
inline GlobalPtr gpar(GlobalPtr l, GlobalPtr r) {
  return std::make_shared<GlobalType>(GlobalType{GKind::Par, {}, {}, {}, {}, nullptr, std::move(l), std::move(r), {}, nullptr});
}
inline GlobalPtr grec(std::string x, GlobalPtr body) {
  return std::make_shared<GlobalType>(GlobalType{GKind::Rec, {}, {}, {}, {}, nullptr, nullptr, nullptr, std::move(x), std::move(body)});
}
inline GlobalPtr gvar(std::string x) {
  return std::make_shared<GlobalType>(GlobalType{GKind::Var, {}, {}, {}, {}, nullptr, nullptr, nullptr, std::move(x), nullptr});
}

inline bool is_end(const GlobalPtr& g) { return g->kind == GKind::End; }

// ---------------------------------------------------------------------------
// Channel / participant sets

namespace detail {
inline void collect_channels(const BehaviourPtr& p, std::set<std::string>& out) {
  switch (p->kind) {
    case BKind::Internal:
    case BKind::External:
      for (const auto& b : p->branches) {
        out.insert(b.channel.name);
        collect_channels(b.cont, out);
      }
      break;
    case BKind::Rec: collect_channels(p->body, out); break;
    case BKind::Var: break;
  }
}
inline void collect_channels(const GlobalPtr& g, std::set<std::string>& out) {
  switch (g->kind) {
    case GKind::Msg: out.insert(g->channel.name); collect_channels(g->cont, out); break;
    case GKind::Seq:
    case GKind::Choice:
    case GKind::Par: collect_channels(g->left, out); collect_channels(g->right, out); break;
    case GKind::Rec: collect_channels(g->body, out); break;
    case GKind::Var:
    case GKind::End: break;
  }
}
inline void collect_participants(const GlobalPtr& g, std::set<std::string>& out) {
  switch (g->kind) {
    case GKind::Msg:
      if (!g->sender.is_star()) out.insert(g->sender.name);
      out.insert(g->receiver.name);
      collect_participants(g->cont, out);
      break;
    case GKind::Seq:
    case GKind::Choice:
    case GKind::Par: collect_participants(g->left, out); collect_participants(g->right, out); break;
    case GKind::Rec: collect_participants(g->body, out); break;
    case GKind::Var:
    case GKind::End: break;
  }
}
}  // namespace detail

inline std::set<std::string> channels_of(const BehaviourPtr& p) {
  std::set<std::string> out;
  detail::collect_channels(p, out);
  return out;
}
inline std::set<std::string> channels_of(const System& s) {
  std::set<std::string> out;
  for (const auto& [n, p] : s.participants) detail::collect_channels(p, out);
  for (const auto& [a, q] : s.queues) out.insert(a);
  return out;
}
inline std::set<std::string> channels_of(const GlobalPtr& g) {
  std::set<std::string> out;
  detail::collect_channels(g, out);
  return out;
}
inline std::set<std::string> participants_of(const GlobalPtr& g) {
  std::set<std::string> out;
  detail::collect_participants(g, out);
  return out;
}

// ---------------------------------------------------------------------------
// Validation

// Binder distinctness is a parse-time hygiene property: the LTS unfolding
// μx.P ≡ P[μx.P/x] duplicates binders syntactically, so it is not checked
// here and step preserves validity.
inline void validate_behaviour(const std::string& who, const BehaviourPtr& p,
                               std::set<std::string> bound, std::vector<std::string>& out) {
  switch (p->kind) {
    case BKind::Internal:
    case BKind::External: {
      std::set<std::string> guards;
      for (const auto& b : p->branches) {
        if (!guards.insert(b.channel.name).second)
          out.push_back("duplicate guard " + b.channel.name + " in " +
                        (p->kind == BKind::Internal ? "internal" : "external") + " choice of " + who);
        validate_behaviour(who, b.cont, bound, out);
      }
      break;
    }
    case BKind::Rec: {
      // prefix-guardedness: every occurrence of var in body sits under a guard
      struct Guarded {
        static bool check(const BehaviourPtr& q, const std::string& x, bool guarded) {
          switch (q->kind) {
            case BKind::Internal:
            case BKind::External:
              for (const auto& b : q->branches)
                if (!check(b.cont, x, true)) return false;
              return true;
            case BKind::Rec: return check(q->body, x, guarded);
            case BKind::Var: return q->var != x || guarded;
          }
          return true;
        }
      };
      if (!Guarded::check(p->body, p->var, false))
        out.push_back("recursion variable " + p->var + " not prefix-guarded in " + who);
      bound.insert(p->var);
      validate_behaviour(who, p->body, bound, out);
      break;
    }
    case BKind::Var:
      if (!bound.count(p->var)) out.push_back("unbound recursion variable " + p->var + " in " + who);
      break;
  }
}

// Reports every violated syntactic invariant; empty result means valid.
inline std::vector<std::string> validate_system(const System& s) {
  std::vector<std::string> out;
  for (const auto& [n, p] : s.participants) {
    if (n == "*") out.push_back("participant name * is reserved");
    validate_behaviour(n, p, {}, out);
  }
  if (!s.queues.empty()) {
    auto chans = channels_of(s);
    for (const auto& c : chans)
      if (!s.queues.count(c)) out.push_back("runtime system lacks a queue for channel " + c);
  }
  return out;
}

inline std::vector<std::string> validate_global(const GlobalPtr& g) {
  std::vector<std::string> out;
  struct V {
    std::vector<std::string>& out;
    std::set<std::string> seen_binders;
    void go(const GlobalPtr& g, std::set<std::string> bound, bool guarded) {
      switch (g->kind) {
        case GKind::Msg:
          if (g->sender == g->receiver)
            out.push_back("sender equals receiver on channel " + g->channel.name);
          if (g->receiver.is_star()) out.push_back("* cannot receive");
          go(g->cont, bound, true);
          break;
        case GKind::Seq:
        case GKind::Choice:
        case GKind::Par:
          go(g->left, bound, guarded);
          go(g->right, bound, guarded);
          break;
        case GKind::Rec:
          if (!seen_binders.insert(g->var).second)
            out.push_back("recursion variable " + g->var + " bound twice");
          bound.insert(g->var);
          go(g->body, bound, false);
          break;
        case GKind::Var:
          if (!bound.count(g->var)) out.push_back("unbound recursion variable " + g->var);
          if (!guarded) out.push_back("recursion variable " + g->var + " not guarded");
          break;
        case GKind::End: break;
      }
    }
  } v{out, {}};
  v.go(g, {}, true);
  return out;
}

// ---------------------------------------------------------------------------
// Normal forms and equality

namespace detail {
// Canonical key used to sort choice branches and monoid arguments.
std::string behaviour_key(const BehaviourPtr& p);
std::string global_key(const GlobalPtr& g);
}  // namespace detail

// Canonical form: branches sorted by guard channel, empty choices collapsed
// to the unique 0. Idempotent; recursion is not unfolded.
inline BehaviourPtr norm_local(const BehaviourPtr& p) {
  switch (p->kind) {
    case BKind::Internal:
    case BKind::External: {
      if (p->branches.empty()) return bzero();
      std::vector<Branch> bs;
      bs.reserve(p->branches.size());
      for (const auto& b : p->branches) bs.push_back(Branch{b.channel, b.sort, norm_local(b.cont)});
      std::stable_sort(bs.begin(), bs.end(), [](const Branch& x, const Branch& y) {
        if (x.channel != y.channel) return x.channel < y.channel;
        if (x.sort != y.sort) return x.sort < y.sort;
        return detail::behaviour_key(x.cont) < detail::behaviour_key(y.cont);
      });
      return p->kind == BKind::Internal ? internal_choice(std::move(bs)) : external_choice(std::move(bs));
    }
    case BKind::Rec: {
      auto body = norm_local(p->body);
      return brec(p->var, std::move(body));
    }
    case BKind::Var: return p;
  }
  return p;
}

namespace detail {
inline std::string behaviour_key(const BehaviourPtr& p) {
  switch (p->kind) {
    case BKind::Internal:
    case BKind::External: {
      if (p->branches.empty()) return "0";
      std::string s = p->kind == BKind::Internal ? "I(" : "E(";
      for (const auto& b : p->branches)
        s += b.channel.name + "<" + b.sort.name + ">." + behaviour_key(b.cont) + ";";
      return s + ")";
    }
    case BKind::Rec: return "R" + p->var + "." + behaviour_key(p->body);
    case BKind::Var: return "V" + p->var;
  }
  return {};
}
}  // namespace detail

// Structural equality up to renaming of bound variables (terms assumed
// normalized by the caller when congruence-level equality is wanted).
inline bool behaviour_eq(const BehaviourPtr& p, const BehaviourPtr& q,
                         std::vector<std::pair<std::string, std::string>> env = {}) {
  if (is_zero(p) && is_zero(q)) return true;
  if (p->kind != q->kind) return false;
  switch (p->kind) {
    case BKind::Internal:
    case BKind::External: {
      if (p->branches.size() != q->branches.size()) return false;
      for (size_t i = 0; i < p->branches.size(); ++i) {
        const auto& a = p->branches[i];
        const auto& b = q->branches[i];
        if (a.channel != b.channel || a.sort != b.sort) return false;
        if (!behaviour_eq(a.cont, b.cont, env)) return false;
      }
      return true;
    }
    case BKind::Rec: {
      env.emplace_back(p->var, q->var);
      return behaviour_eq(p->body, q->body, env);
    }
    case BKind::Var: {
      for (auto it = env.rbegin(); it != env.rend(); ++it) {
        if (it->first == p->var || it->second == q->var)
          return it->first == p->var && it->second == q->var;
      }
      return p->var == q->var;
    }
  }
  return false;
}

// Congruence-level equality of behaviours (sorted branches, canonical 0).
inline bool local_eq(const BehaviourPtr& p, const BehaviourPtr& q) {
  return behaviour_eq(norm_local(p), norm_local(q));
}

// --- global normal form ---

namespace detail {

inline GlobalPtr norm_global_rec(const GlobalPtr& g);

// Flattens Choice/Par into the multiset of non-End arguments.
inline void monoid_args(const GlobalPtr& g, GKind op, std::vector<GlobalPtr>& out) {
  if (g->kind == op) {
    monoid_args(g->left, op, out);
    monoid_args(g->right, op, out);
  } else if (g->kind != GKind::End) {
    out.push_back(g);
  }
}

inline GlobalPtr rebuild_monoid(GKind op, std::vector<GlobalPtr> args) {
  if (args.empty()) return gend();
  std::stable_sort(args.begin(), args.end(), [](const GlobalPtr& x, const GlobalPtr& y) {
    return global_key(x) < global_key(y);
  });
  GlobalPtr acc = args.back();
  for (size_t i = args.size() - 1; i-- > 0;) {
    acc = op == GKind::Choice ? gchoice(args[i], acc) : gpar(args[i], acc);
  }
  return acc;
}

}  // namespace detail

// Canonical form under the structural congruence axioms: units of ⨟ removed,
// ⨟ re-associated right, prefixes pushed inside ⨟ (ι.(G⨟G') form), and
// commutative-monoid flattening/sorting for Choice and Par with unit End.
// Recursion is never unfolded here.
inline GlobalPtr norm_global(const GlobalPtr& g) {
  switch (g->kind) {
    case GKind::End:
    case GKind::Var: return g;
    case GKind::Msg: {
      auto cont = norm_global(g->cont);
      return gmsg(g->sender, g->receiver, g->channel, g->sort, std::move(cont));
    }
    case GKind::Rec: {
      auto body = norm_global(g->body);
      return grec(g->var, std::move(body));
    }
    case GKind::Choice:
    case GKind::Par: {
      std::vector<GlobalPtr> args;
      detail::monoid_args(g, g->kind, args);
      for (auto& a : args) a = norm_global(a);
      // normalization may surface fresh End units or nested ops
      std::vector<GlobalPtr> flat;
      for (const auto& a : args) detail::monoid_args(a, g->kind, flat);
      if (flat.empty()) return gend();
      if (flat.size() == 1) return flat[0];
      return detail::rebuild_monoid(g->kind, std::move(flat));
    }
    case GKind::Seq: {
      auto l = norm_global(g->left);
      auto r = norm_global(g->right);
      if (is_end(r)) return l;
      if (is_end(l)) return r;
      // (G ⨟ G') ⨟ G'' = G ⨟ (G' ⨟ G'')
      if (l->kind == GKind::Seq)
        return norm_global(gseq(l->left, gseq(l->right, r)));
      // ι.G1 ⨟ G' = ι.(G1 ⨟ G')
      if (l->kind == GKind::Msg)
        return gmsg(l->sender, l->receiver, l->channel, l->sort, norm_global(gseq(l->cont, r)));
      return gseq(std::move(l), std::move(r));
    }
  }
  return g;
}

namespace detail {
inline std::string global_key(const GlobalPtr& g) {
  switch (g->kind) {
    case GKind::End: return "0";
    case GKind::Var: return "V" + g->var;
    case GKind::Msg:
      return "M" + g->sender.name + ">" + g->receiver.name + ":" + g->channel.name + "<" +
             g->sort.name + ">." + global_key(g->cont);
    case GKind::Seq: return "S(" + global_key(g->left) + ";" + global_key(g->right) + ")";
    case GKind::Choice: return "C(" + global_key(g->left) + "," + global_key(g->right) + ")";
    case GKind::Par: return "P(" + global_key(g->left) + "," + global_key(g->right) + ")";
    case GKind::Rec: return "R" + g->var + "." + global_key(g->body);
  }
  return {};
}
}  // namespace detail

inline GlobalPtr unfold_global(const GlobalPtr& rec_term) {
  // μχ.G -> G[μχ.G/χ]
  struct Sub {
    static GlobalPtr go(const GlobalPtr& g, const std::string& x, const GlobalPtr& repl) {
      switch (g->kind) {
        case GKind::Msg: return gmsg(g->sender, g->receiver, g->channel, g->sort, go(g->cont, x, repl));
        case GKind::Seq: return gseq(go(g->left, x, repl), go(g->right, x, repl));
        case GKind::Choice: return gchoice(go(g->left, x, repl), go(g->right, x, repl));
        case GKind::Par: return gpar(go(g->left, x, repl), go(g->right, x, repl));
        case GKind::Rec: return g->var == x ? g : grec(g->var, go(g->body, x, repl));
        case GKind::Var: return g->var == x ? repl : g;
        case GKind::End: return g;
      }
      return g;
    }
  };
  return Sub::go(rec_term->body, rec_term->var, rec_term);
}

namespace detail {
inline bool global_eq_norm(const GlobalPtr& p, const GlobalPtr& q,
                           std::vector<std::pair<std::string, std::string>>& env, int unfold_budget) {
  if (p->kind != q->kind && unfold_budget > 0) {
    if (p->kind == GKind::Rec)
      return global_eq_norm(norm_global(unfold_global(p)), q, env, unfold_budget - 1);
    if (q->kind == GKind::Rec)
      return global_eq_norm(p, norm_global(unfold_global(q)), env, unfold_budget - 1);
  }
  if (p->kind != q->kind) return false;
  switch (p->kind) {
    case GKind::End: return true;
    case GKind::Var: {
      for (auto it = env.rbegin(); it != env.rend(); ++it)
        if (it->first == p->var || it->second == q->var)
          return it->first == p->var && it->second == q->var;
      return p->var == q->var;
    }
    case GKind::Msg:
      return p->sender == q->sender && p->receiver == q->receiver && p->channel == q->channel &&
             p->sort == q->sort && global_eq_norm(p->cont, q->cont, env, unfold_budget);
    case GKind::Seq:
    case GKind::Choice:
    case GKind::Par:
      return global_eq_norm(p->left, q->left, env, unfold_budget) &&
             global_eq_norm(p->right, q->right, env, unfold_budget);
    case GKind::Rec: {
      env.emplace_back(p->var, q->var);
      bool r = global_eq_norm(p->body, q->body, env, unfold_budget);
      env.pop_back();
      return r;
    }
  }
  return false;
}
}  // namespace detail

// Equality modulo structural congruence. The μχ.G ≡ G[μχ.G/χ] axiom is only
// applied one level, and only when one_level_unfold is set.
inline bool global_eq(const GlobalPtr& g1, const GlobalPtr& g2, bool one_level_unfold = false) {
  std::vector<std::pair<std::string, std::string>> env;
  return detail::global_eq_norm(norm_global(g1), norm_global(g2), env, one_level_unfold ? 8 : 0);
}

}  // namespace choreo

#endif  // CHOREO_AST_HPP
