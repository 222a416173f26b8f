#ifndef CHOREO_SYNTHESIS_HPP
#define CHOREO_SYNTHESIS_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "choreo/ast.hpp"
#include "choreo/linearity.hpp"
#include "choreo/parser.hpp"
#include "choreo/semantics.hpp"
#include "choreo/split.hpp"

// The validation judgement A; Γ; C ⊢ S ▷ G realized as a backtracking
// search. Forced rules (end, queue removal, unique sync pairs) are tried
// first; partition enumeration (∥) and system splitting (⨟) come last.
// Rule order affects speed, not the result: synthesised types are unique up
// to structural congruence.

namespace choreo {

struct Derivation {
  std::string rule;
  std::string conclusion;
  std::vector<std::shared_ptr<const Derivation>> premises;
};
using DerivPtr = std::shared_ptr<const Derivation>;

struct SynthContext {
  std::set<std::string> a_chans;                                  // A
  std::map<std::pair<std::string, std::string>, std::string> gamma;  // (participant, local var) -> chi
  EnvPtr cenv = env_leaf();                                       // C
};

struct SynthOptions {
  int unfold_budget = 2;      // per participant, per search branch
  bool exhaustive = false;    // collect all distinct result types
  size_t max_distinct = 128;  // cap on distinct types tracked per state
};

struct SynthResult {
  GlobalPtr type;
  DerivPtr derivation;
};

struct SynthOutcome {
  std::vector<SynthResult> results;  // distinct up to structural congruence
  std::string failure;               // deepest frontier when results is empty

  bool ok() const { return !results.empty(); }
  const GlobalPtr& type() const { return results.front().type; }
};

namespace detail {

inline std::string env_key(const EnvPtr& c) {
  std::string s;
  for (const auto& n : flatten_env(c)) {
    switch (n.kind) {
      case EnvKind::Leaf: s += "."; break;
      case EnvKind::Fork: s += "(" + std::to_string(n.parent) + ")o"; break;
      case EnvKind::RecMark: s += "(" + std::to_string(n.parent) + ")u" + n.rec_var; break;
      case EnvKind::Use:
        s += "(" + std::to_string(n.parent) + ")" + n.channel.name + ":" + n.sender.name + ">" +
             n.receiver.name;
        break;
    }
  }
  return s;
}

struct SynthState {
  std::map<std::string, BehaviourPtr> parts;           // zeros dropped
  std::map<std::string, std::vector<Sort>> queues;     // empties dropped
  SynthContext ctx;
  std::map<std::string, int> unfolds_used;

  std::string key() const {
    std::string s = "A{";
    for (const auto& a : ctx.a_chans) s += a + ",";
    s += "}G{";
    for (const auto& [k, v] : ctx.gamma) s += k.first + "." + k.second + ":" + v + ",";
    s += "}C{" + env_key(ctx.cenv) + "}S{";
    for (const auto& [n, p] : parts) s += n + "=" + choreo::detail::behaviour_key(p) + ";";
    s += "}Q{";
    for (const auto& [a, q] : queues) {
      s += a + "[";
      for (const auto& e : q) s += e.name + ",";
      s += "]";
    }
    s += "}U{";
    for (const auto& [n, u] : unfolds_used) s += n + ":" + std::to_string(u) + ",";
    return s + "}";
  }

  System to_system() const {
    System s;
    s.participants = parts;
    s.queues = queues;
    return s;
  }
};

// normalize: rule eq (behaviour normal forms, 0-participants removed) and
// rule [] (empty queues removed); reports which of the two fired
inline std::pair<bool, bool> normalize_state(SynthState& st) {
  bool eq_fired = false, box_fired = false;
  for (auto it = st.parts.begin(); it != st.parts.end();) {
    auto n = norm_local(it->second);
    if (is_zero(n)) {
      eq_fired = true;
      it = st.parts.erase(it);
    } else {
      it->second = n;
      ++it;
    }
  }
  for (auto it = st.queues.begin(); it != st.queues.end();) {
    if (it->second.empty()) {
      box_fired = true;
      it = st.queues.erase(it);
    } else {
      ++it;
    }
  }
  return {eq_fired, box_fired};
}

inline bool nostep_rest(const SynthState& st, const std::set<std::string>& removed_parts,
                        const std::set<std::string>& removed_queues = {}) {
  System rest;
  for (const auto& [n, p] : st.parts)
    if (!removed_parts.count(n)) rest.participants.emplace(n, p);
  for (const auto& [a, q] : st.queues)
    if (!removed_queues.count(a)) rest.queues.emplace(a, q);
  return !onestep(rest);
}

struct Synthesizer {
  SynthOptions opt;
  std::map<std::string, std::vector<SynthResult>> memo;
  int fresh_chi = 0;
  // deepest failure frontier for diagnostics
  size_t best_progress = 0;
  std::string frontier;
  size_t initial_size = 0;

  static size_t state_size(const SynthState& st) {
    size_t n = 0;
    struct C {
      static size_t count(const BehaviourPtr& p) {
        size_t k = 0;
        if (p->kind == BKind::Internal || p->kind == BKind::External)
          for (const auto& b : p->branches) k += 1 + count(b.cont);
        if (p->kind == BKind::Rec) k += 1 + count(p->body);
        return k;
      }
    };
    for (const auto& [name, p] : st.parts) n += C::count(p);
    for (const auto& [a, q] : st.queues) n += q.size();
    return n;
  }

  void note_failure(const SynthState& st) {
    size_t progress = initial_size - std::min(initial_size, state_size(st));
    if (progress >= best_progress) {
      best_progress = progress;
      frontier = print_system(st.to_system());
    }
  }

  std::vector<SynthResult> synth(SynthState st) {
    auto [eq_fired, box_fired] = normalize_state(st);
    auto k = st.key();
    if (auto it = memo.find(k); it != memo.end()) return it->second;
    memo.emplace(k, std::vector<SynthResult>{});  // cycle guard: revisits fail

    std::vector<SynthResult> results;
    auto add = [&, eq_fired = eq_fired, box_fired = box_fired](GlobalPtr g, DerivPtr d) {
      auto ng = norm_global(g);
      for (const auto& r : results)
        if (global_eq(r.type, ng)) return;
      if (box_fired) d = std::make_shared<Derivation>(Derivation{"[]", d->conclusion, {d}});
      if (eq_fired) d = std::make_shared<Derivation>(Derivation{"eq", d->conclusion, {d}});
      if (results.size() < opt.max_distinct) results.push_back({ng, std::move(d)});
    };
    auto done = [&]() { return !results.empty() && !opt.exhaustive; };
    std::string conclusion = print_system(st.to_system());
    auto leaf = [&](const std::string& rule) {
      return std::make_shared<Derivation>(Derivation{rule, conclusion, {}});
    };
    auto node = [&](const std::string& rule, std::vector<DerivPtr> prem) {
      return std::make_shared<Derivation>(Derivation{rule, conclusion, std::move(prem)});
    };

    // rule end (empty queues were removed by rule [], zeros by eq)
    if (st.parts.empty() && st.queues.empty()) {
      add(gend(), leaf("end"));
      memo[k] = results;
      return results;
    }

    // rules ; and ρ: a unique communication consumed, nothing else movable
    for (const auto& [s_name, sp] : st.parts) {
      if (done()) break;
      if (sp->kind != BKind::Internal || sp->branches.size() != 1) continue;
      const auto& ob = sp->branches[0];
      if (!st.ctx.a_chans.count(ob.channel.name)) continue;
      for (const auto& [r_name, rp] : st.parts) {
        if (done()) break;
        if (r_name == s_name || rp->kind != BKind::External || rp->branches.size() != 1) continue;
        const auto& ib = rp->branches[0];
        if (ib.channel != ob.channel || ib.sort != ob.sort) continue;
        if (!nostep_rest(st, {s_name, r_name})) continue;
        auto c2 = append_linear(st.ctx.cenv, env_node(ob.channel, Participant{s_name}, Participant{r_name}));
        if (!c2) continue;
        SynthState next = st;
        next.parts[s_name] = ob.cont;
        next.parts[r_name] = ib.cont;
        next.ctx.cenv = *c2;
        for (auto& sub : synth(next)) {
          add(gmsg(Participant{s_name}, Participant{r_name}, ob.channel, ob.sort, sub.type),
              node(";", {sub.derivation}));
          if (done()) break;
        }
      }
    }

    // rule ρ: the queue head replaces the sender; Γ is emptied
    for (const auto& [a, q] : st.queues) {
      if (done()) break;
      if (q.empty() || !st.ctx.a_chans.count(a)) continue;
      for (const auto& [r_name, rp] : st.parts) {
        if (done()) break;
        if (rp->kind != BKind::External || rp->branches.size() != 1) continue;
        const auto& ib = rp->branches[0];
        if (ib.channel.name != a || ib.sort != q.front()) continue;
        if (!nostep_rest(st, {r_name}, {a})) continue;
        auto c2 = append_linear(st.ctx.cenv, env_node(Channel{a}, Participant::star(), Participant{r_name}));
        if (!c2) continue;
        SynthState next = st;
        next.parts[r_name] = ib.cont;
        next.queues[a].erase(next.queues[a].begin());
        next.ctx.cenv = *c2;
        next.ctx.gamma.clear();
        for (auto& sub : synth(next)) {
          add(gmsg(Participant::star(), Participant{r_name}, Channel{a}, ib.sort, sub.type),
              node("rho", {sub.derivation}));
          if (done()) break;
        }
      }
    }

    // rule ⊕: a participant branches internally; every branch must be typable
    for (const auto& [s_name, sp] : st.parts) {
      if (done()) break;
      if (sp->kind != BKind::Internal || sp->branches.size() < 2) continue;
      if (!nostep_rest(st, {s_name})) continue;
      std::vector<std::vector<SynthResult>> branch_results;
      bool viable = true;
      for (const auto& br : sp->branches) {
        SynthState next = st;
        next.parts[s_name] = internal_choice({br});
        branch_results.push_back(synth(next));
        if (branch_results.back().empty()) {
          viable = false;
          break;
        }
      }
      if (!viable) continue;
      // combine: right-nested choice over one pick per branch
      struct Comb {
        static void go(const std::vector<std::vector<SynthResult>>& brs, size_t i,
                       std::vector<const SynthResult*>& picked, const std::function<void()>& emit) {
          if (i == brs.size()) {
            emit();
            return;
          }
          for (const auto& r : brs[i]) {
            picked.push_back(&r);
            go(brs, i + 1, picked, emit);
            picked.pop_back();
          }
        }
      };
      std::vector<const SynthResult*> picked;
      Comb::go(branch_results, 0, picked, [&]() {
        if (done()) return;
        GlobalPtr g = picked.back()->type;
        for (size_t i = picked.size() - 1; i-- > 0;) g = gchoice(picked[i]->type, g);
        std::vector<DerivPtr> prem;
        for (const auto* r : picked) prem.push_back(r->derivation);
        add(g, node("oplus", std::move(prem)));
      });
    }

    // rule +: discharge one branch of an external choice; all the guards of
    // the choice must be channels the system is entitled to use
    for (const auto& [r_name, rp] : st.parts) {
      if (done()) break;
      if (rp->kind != BKind::External || rp->branches.size() < 2) continue;
      bool guards_ok = true;
      for (const auto& b : rp->branches)
        if (!st.ctx.a_chans.count(b.channel.name)) guards_ok = false;
      if (!guards_ok) continue;
      for (size_t i = 0; i < rp->branches.size() && !done(); ++i) {
        std::vector<Branch> kept;
        for (size_t j = 0; j < rp->branches.size(); ++j)
          if (j != i) kept.push_back(rp->branches[j]);
        SynthState next = st;
        next.parts[r_name] = external_choice(std::move(kept));
        for (auto& sub : synth(next)) {
          add(sub.type, node("plus", {sub.derivation}));
          if (done()) break;
        }
      }
    }

    // rule μ: all recursion-headed participants enter a recursion together
    if (!done()) {
      std::vector<std::string> rec_heads;
      for (const auto& [n, p] : st.parts)
        if (p->kind == BKind::Rec) rec_heads.push_back(n);
      if (rec_heads.size() >= 2) {
        bool interact = false;
        for (size_t i = 0; i < rec_heads.size() && !interact; ++i)
          for (size_t j = i + 1; j < rec_heads.size() && !interact; ++j) {
            System two;
            two.participants.emplace(rec_heads[i], st.parts.at(rec_heads[i]));
            two.participants.emplace(rec_heads[j], st.parts.at(rec_heads[j]));
            interact = onestep(two);
          }
        bool gamma_fresh = true;
        for (const auto& n : rec_heads)
          if (st.ctx.gamma.count({n, st.parts.at(n)->var})) gamma_fresh = false;
        if (interact && gamma_fresh) {
          std::string chi = "X" + std::to_string(fresh_chi++);
          SynthState next = st;
          for (const auto& n : rec_heads) {
            const auto& p = st.parts.at(n);
            next.ctx.gamma[{n, p->var}] = chi;
            next.parts[n] = p->body;
          }
          next.ctx.cenv = append_env(st.ctx.cenv, env_rec(chi, env_leaf()));
          for (auto& sub : synth(next)) {
            add(grec(chi, sub.type), node("mu", {sub.derivation}));
            if (done()) break;
          }
        }
      }
    }

    // rule χ: every remaining participant sits at a local variable bound to
    // the same global recursion variable
    if (!done() && st.queues.empty() && !st.parts.empty()) {
      bool all_vars = true;
      for (const auto& [n, p] : st.parts)
        if (p->kind != BKind::Var) all_vars = false;
      if (all_vars) {
        std::set<std::string> chis;
        bool bound = true;
        for (const auto& [n, p] : st.parts) {
          auto it = st.ctx.gamma.find({n, p->var});
          if (it == st.ctx.gamma.end())
            bound = false;
          else
            chis.insert(it->second);
        }
        if (bound && chis.size() == 1) {
          const std::string& chi = *chis.begin();
          // all participants registered for chi must be present
          std::set<std::string> registered;
          for (const auto& [key, val] : st.ctx.gamma)
            if (val == chi) registered.insert(key.first);
          std::set<std::string> present;
          for (const auto& [n, p] : st.parts) present.insert(n);
          if (registered == present) {
            auto u = unfold_env_at(st.ctx.cenv, chi);
            if (u && is_linear(*u)) add(gvar(chi), leaf("chi"));
          }
        }
      }
    }

    // rule ∥: partition the participants and the channel entitlement
    if (!done() && st.parts.size() >= 2) try_par(st, results, add, done, node);

    // rule ⨟: cut the system at its unique coherent split
    if (!done()) {
      auto sys = st.to_system();
      if (auto cs = find_coherent_split(sys)) {
        auto halves = split_system(sys, *cs);
        if (halves) {
          SynthState first = st;
          first.parts = halves->first.participants;
          first.queues = halves->first.queues;
          for (auto& g1 : synth(first)) {
            if (done()) break;
            auto c2 = append_linear(st.ctx.cenv, chan_g(g1.type));
            if (!c2) continue;
            SynthState second = st;
            second.parts = halves->second.participants;
            second.queues = halves->second.queues;
            second.ctx.cenv = *c2;
            for (auto& g2 : synth(second)) {
              add(gseq(g1.type, g2.type), node("seq", {g1.derivation, g2.derivation}));
              if (done()) break;
            }
          }
        }
      }
    }

    // structural congruence: unfold a recursion-headed participant once
    if (!done()) {
      for (const auto& [n, p] : st.parts) {
        if (done()) break;
        if (p->kind != BKind::Rec) continue;
        int used = st.unfolds_used.count(n) ? st.unfolds_used.at(n) : 0;
        if (used >= opt.unfold_budget) continue;
        SynthState next = st;
        next.parts[n] = unfold_behaviour(p);
        next.unfolds_used[n] = used + 1;
        for (auto& sub : synth(next)) {
          add(sub.type, node("eq", {sub.derivation}));
          if (done()) break;
        }
      }
    }

    if (results.empty()) note_failure(st);
    memo[k] = results;
    return results;
  }

  template <typename Add, typename Done, typename Node>
  void try_par(const SynthState& st, std::vector<SynthResult>& results, Add& add, Done& done,
               Node& node) {
    std::vector<std::string> names;
    for (const auto& [n, p] : st.parts) names.push_back(n);
    size_t n = names.size();
    if (n > 10) return;
    std::map<std::string, std::set<std::string>> chans;
    for (const auto& [name, p] : st.parts) chans[name] = channels_of(p);

    for (uint64_t mask = 1; mask + 1 < (1ull << n); ++mask) {
      if (done()) return;
      if (mask & 1) continue;  // fix names[0] on side 0 to kill mirror splits
      std::set<std::string> side1, side2;
      for (size_t i = 0; i < n; ++i) ((mask >> i) & 1 ? side2 : side1).insert(names[i]);
      std::set<std::string> used1, used2;
      for (const auto& p : side1) used1.insert(chans[p].begin(), chans[p].end());
      for (const auto& p : side2) used2.insert(chans[p].begin(), chans[p].end());
      std::vector<std::string> contested;
      for (const auto& a : used1)
        if (used2.count(a)) contested.push_back(a);
      if (contested.size() > 12) continue;
      for (uint64_t cmask = 0; cmask < (1ull << contested.size()); ++cmask) {
        if (done()) return;
        std::set<std::string> a1, a2;
        for (const auto& a : st.ctx.a_chans) {
          bool u1 = used1.count(a) > 0, u2 = used2.count(a) > 0;
          if (u1 && !u2) a1.insert(a);
          else if (u2 && !u1) a2.insert(a);
          else if (!u1 && !u2) a1.insert(a);
        }
        bool valid = true;
        for (size_t ci = 0; ci < contested.size(); ++ci)
          ((cmask >> ci) & 1 ? a2 : a1).insert(contested[ci]);
        // queues follow their channel's side
        std::map<std::string, std::vector<Sort>> q1, q2;
        for (const auto& [a, q] : st.queues) {
          if (a1.count(a)) q1.emplace(a, q);
          else if (a2.count(a)) q2.emplace(a, q);
          else valid = false;
        }
        if (!valid) continue;
        SynthState s1 = st, s2 = st;
        s1.parts.clear();
        s2.parts.clear();
        for (const auto& p : side1) s1.parts.emplace(p, st.parts.at(p));
        for (const auto& p : side2) s2.parts.emplace(p, st.parts.at(p));
        s1.queues = q1;
        s2.queues = q2;
        s1.ctx.a_chans = a1;
        s2.ctx.a_chans = a2;
        s1.ctx.gamma.clear();
        s2.ctx.gamma.clear();
        auto r1 = synth(s1);
        if (r1.empty()) continue;
        auto r2 = synth(s2);
        for (auto& g1 : r1) {
          for (auto& g2 : r2) {
            add(gpar(g1.type, g2.type), node("par", {g1.derivation, g2.derivation}));
            if (done()) return;
          }
        }
      }
    }
  }
};

}  // namespace detail

inline SynthOutcome synth(const SynthContext& ctx, const System& s, SynthOptions opt = {}) {
  SynthOutcome out;
  auto errs = validate_system(s);
  if (!errs.empty()) {
    out.failure = "invalid system: " + errs.front();
    return out;
  }
  detail::Synthesizer engine;
  engine.opt = opt;
  detail::SynthState st{s.participants, s.queues, ctx, {}};
  engine.initial_size = detail::Synthesizer::state_size(st);
  auto res = engine.synth(std::move(st));
  if (res.empty()) {
    out.failure = "not typable; deepest frontier:\n" + engine.frontier;
    return out;
  }
  out.results = std::move(res);
  return out;
}

// Programs are validated with all their channels in otherwise empty
// environments.
inline SynthOutcome synth_program(const System& s, SynthOptions opt = {}) {
  SynthContext ctx;
  ctx.a_chans = channels_of(s);
  return synth(ctx, s, opt);
}

// Runtime systems use the same entry point; queues enable rules ρ and [].
inline SynthOutcome synth_runtime(const System& s, SynthOptions opt = {}) {
  return synth_program(s, opt);
}

inline std::string derivation_text(const DerivPtr& d, int indent = 0) {
  std::string out(indent * 2, ' ');
  out += "[" + d->rule + "]\n";
  for (const auto& p : d->premises) out += derivation_text(p, indent + 1);
  return out;
}

}  // namespace choreo

#endif  // CHOREO_SYNTHESIS_HPP
