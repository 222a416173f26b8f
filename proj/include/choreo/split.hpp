#ifndef CHOREO_SPLIT_HPP
#define CHOREO_SPLIT_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "choreo/ast.hpp"
#include "choreo/parser.hpp"
#include "choreo/semantics.hpp"

// Splitting judgements Ψ; Θ ⊢ S ▷ Ω, coherence, and the split function that
// cuts a system into two sequential parts.

namespace choreo {

// Behaviours augmented with the separator ε. ε marks the point where the
// rest of the behaviour belongs to the second part of the split; 0 marks a
// participant that terminates before the split.
struct SplitBehaviour;
using SplitPtr = std::shared_ptr<const SplitBehaviour>;

enum class SKind { Eps, Zero, Internal, External };

struct SBranch {
  Channel channel;
  Sort sort;
  SplitPtr cont;
};

struct SplitBehaviour {
  SKind kind;
  std::vector<SBranch> branches;
};

inline SplitPtr seps() { return std::make_shared<SplitBehaviour>(SplitBehaviour{SKind::Eps, {}}); }
inline SplitPtr szero() { return std::make_shared<SplitBehaviour>(SplitBehaviour{SKind::Zero, {}}); }
inline SplitPtr schoice(SKind k, std::vector<SBranch> bs) {
  return std::make_shared<SplitBehaviour>(SplitBehaviour{k, std::move(bs)});
}
inline SplitPtr sprefix(SKind k, Channel a, Sort e, SplitPtr cont) {
  return schoice(k, {SBranch{std::move(a), std::move(e), std::move(cont)}});
}

inline std::string split_key(const SplitPtr& w) {
  switch (w->kind) {
    case SKind::Eps: return "e";
    case SKind::Zero: return "0";
    case SKind::Internal:
    case SKind::External: {
      std::vector<std::string> parts;
      for (const auto& b : w->branches)
        parts.push_back(b.channel.name + "<" + b.sort.name + ">." + split_key(b.cont));
      std::sort(parts.begin(), parts.end());
      std::string s = w->kind == SKind::Internal ? "I(" : "E(";
      for (auto& p : parts) s += p + ";";
      return s + ")";
    }
  }
  return {};
}

inline bool split_eq(const SplitPtr& a, const SplitPtr& b) { return split_key(a) == split_key(b); }

inline void split_channels(const SplitPtr& w, std::set<std::string>& out) {
  if (w->kind == SKind::Internal || w->kind == SKind::External)
    for (const auto& b : w->branches) {
      out.insert(b.channel.name);
      split_channels(b.cont, out);
    }
}

// Ω: per-participant split prefixes plus per-queue consumed prefixes.
struct Omega {
  std::map<std::string, SplitPtr> parts;
  std::map<std::string, std::vector<Sort>> queues;

  std::string key() const {
    std::string s;
    for (const auto& [n, w] : parts) s += n + "=" + split_key(w) + "|";
    for (const auto& [a, q] : queues) {
      s += a + "=[";
      for (const auto& e : q) s += e.name + ",";
      s += "]|";
    }
    return s;
  }
};

using Ensemble = std::set<std::string>;
using Psi = std::vector<Ensemble>;
using Duo = std::pair<std::string, std::string>;  // ordered pair, first < second
using Theta = std::set<Duo>;

inline Duo make_duo(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

namespace detail {

inline bool contains_rec_or_var(const BehaviourPtr& p) {
  switch (p->kind) {
    case BKind::Rec:
    case BKind::Var: return true;
    case BKind::Internal:
    case BKind::External:
      for (const auto& b : p->branches)
        if (contains_rec_or_var(b.cont)) return true;
      return false;
  }
  return false;
}

// Ω(n) ≡ Ω'(n), or both are external choices with disjoint guards.
inline bool entry_compatible(const SplitPtr& a, const SplitPtr& b) {
  if (split_eq(a, b)) return true;
  if (a->kind != SKind::External || b->kind != SKind::External) return false;
  if (a->branches.empty() || b->branches.empty()) return false;
  for (const auto& x : a->branches)
    for (const auto& y : b->branches)
      if (x.channel == y.channel) return false;
  return true;
}

inline bool omega_compatible(const Omega& a, const Omega& b) {
  if (a.queues != b.queues) return false;
  std::set<std::string> names;
  for (const auto& [n, w] : a.parts) names.insert(n);
  for (const auto& [n, w] : b.parts) names.insert(n);
  for (const auto& n : names) {
    auto ia = a.parts.find(n);
    auto ib = b.parts.find(n);
    if (ia == a.parts.end() || ib == b.parts.end()) return false;
    if (!entry_compatible(ia->second, ib->second)) return false;
  }
  return true;
}

inline Omega omega_merge(const Omega& a, const Omega& b) {
  Omega out = a;
  for (const auto& [n, w] : b.parts) {
    auto& slot = out.parts[n];
    if (split_eq(slot, w)) continue;
    std::vector<SBranch> bs = slot->branches;
    bs.insert(bs.end(), w->branches.begin(), w->branches.end());
    slot = schoice(SKind::External, std::move(bs));
  }
  return out;
}

// Search state: behaviours and queues still to split, plus the environments.
struct SplitState {
  std::map<std::string, BehaviourPtr> parts;
  std::map<std::string, std::vector<Sort>> queues;
  Psi psi;
  Theta theta;

  std::string key() const {
    std::string s;
    for (const auto& [n, p] : parts) s += n + "=" + choreo::detail::behaviour_key(norm_local(p)) + "|";
    for (const auto& [a, q] : queues) {
      s += a + "[";
      for (const auto& e : q) s += e.name + ",";
      s += "]";
    }
    s += "P";
    for (const auto& ns : psi) {
      s += "{";
      for (const auto& n : ns) s += n + ",";
      s += "}";
    }
    s += "T";
    for (const auto& [x, y] : theta) s += "{" + x + "," + y + "}";
    return s;
  }
};

inline int ensemble_of(const Psi& psi, const std::string& n) {
  for (size_t i = 0; i < psi.size(); ++i)
    if (psi[i].count(n)) return static_cast<int>(i);
  return -1;
}

struct SplitSearch {
  std::map<std::string, std::vector<Omega>> memo;

  std::vector<Omega> run(const SplitState& st0) {
    SplitState st = st0;
    // eager moves: 0-participants complete before the split; empty queues drop
    Omega base;
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = st.parts.begin(); it != st.parts.end();) {
        if (is_zero(norm_local(it->second))) {
          base.parts[it->first] = szero();
          for (auto& ns : st.psi) ns.erase(it->first);
          it = st.parts.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
      for (auto it = st.queues.begin(); it != st.queues.end();) {
        if (it->second.empty()) {
          it = st.queues.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    }
    st.psi.erase(std::remove_if(st.psi.begin(), st.psi.end(), [](const Ensemble& e) { return e.empty(); }),
                 st.psi.end());

    auto k = st.key();
    if (auto it = memo.find(k); it != memo.end()) return prepend_all(it->second, base);

    std::vector<Omega> results;
    auto add = [&](const Omega& o) {
      for (const auto& r : results)
        if (r.key() == o.key()) return;
      results.push_back(o);
    };

    // ax: everything emptied
    if (st.parts.empty() && st.queues.empty()) {
      if (st.theta.empty()) add(Omega{});
      memo.emplace(k, results);
      return prepend_all(results, base);
    }

    // sync: an output prefix meets an input prefix in the same ensemble
    for (const auto& [n, pn] : st.parts) {
      auto p = norm_local(pn);
      if (p->kind != BKind::Internal || p->branches.size() != 1) continue;
      const auto& outb = p->branches[0];
      for (const auto& [m, qm] : st.parts) {
        if (m == n) continue;
        auto q = norm_local(qm);
        if (q->kind != BKind::External || q->branches.size() != 1) continue;
        const auto& inb = q->branches[0];
        if (inb.channel != outb.channel || inb.sort != outb.sort) continue;
        int en = ensemble_of(st.psi, n), em = ensemble_of(st.psi, m);
        if (en < 0 || en != em) continue;
        SplitState next = st;
        next.parts[n] = outb.cont;
        next.parts[m] = inb.cont;
        for (auto& o : run(next)) {
          o.parts[n] = sprefix(SKind::Internal, outb.channel, outb.sort, o.parts.at(n));
          o.parts[m] = sprefix(SKind::External, inb.channel, inb.sort, o.parts.at(m));
          add(o);
        }
      }
    }

    // q: a receive prefix consumes a matching queue head
    for (const auto& [n, pn] : st.parts) {
      auto p = norm_local(pn);
      if (p->kind != BKind::External || p->branches.size() != 1) continue;
      const auto& inb = p->branches[0];
      auto qit = st.queues.find(inb.channel.name);
      if (qit == st.queues.end() || qit->second.empty() || qit->second.front() != inb.sort) continue;
      SplitState next = st;
      next.parts[n] = inb.cont;
      next.queues[inb.channel.name].erase(next.queues[inb.channel.name].begin());
      for (auto& o : run(next)) {
        o.parts[n] = sprefix(SKind::External, inb.channel, inb.sort, o.parts.at(n));
        auto& consumed = o.queues[inb.channel.name];
        consumed.insert(consumed.begin(), inb.sort);
        add(o);
      }
    }

    // external choice: discharge one branch
    for (const auto& [n, pn] : st.parts) {
      auto p = norm_local(pn);
      if (p->kind != BKind::External || p->branches.size() < 2) continue;
      for (size_t i = 0; i < p->branches.size(); ++i) {
        std::vector<Branch> kept;
        for (size_t j = 0; j < p->branches.size(); ++j)
          if (j != i) kept.push_back(p->branches[j]);
        SplitState next = st;
        next.parts[n] = external_choice(std::move(kept));
        for (auto& o : run(next)) add(o);
      }
    }

    // internal choice: all branches must split compatibly; the chooser must
    // still interact with a peer of its ensemble
    for (const auto& [n, pn] : st.parts) {
      auto p = norm_local(pn);
      if (p->kind != BKind::Internal || p->branches.size() < 2) continue;
      int en = ensemble_of(st.psi, n);
      if (en < 0) continue;
      bool peer = false;
      for (const auto& m : st.psi[en]) {
        if (m == n || !st.parts.count(m)) continue;
        System two;
        two.participants.emplace(n, pn);
        two.participants.emplace(m, st.parts.at(m));
        if (onestep(two)) { peer = true; break; }
      }
      if (!peer) continue;
      std::vector<std::vector<Omega>> per_branch;
      bool ok = true;
      for (const auto& br : p->branches) {
        SplitState next = st;
        next.parts[n] = internal_choice({br});
        per_branch.push_back(run(next));
        if (per_branch.back().empty()) { ok = false; break; }
      }
      if (!ok) continue;
      // fold the branch results pairwise through compatible/merge
      std::vector<Omega> acc = per_branch[0];
      for (size_t i = 1; i < per_branch.size(); ++i) {
        std::vector<Omega> stage;
        for (const auto& a : acc)
          for (const auto& b : per_branch[i])
            if (omega_compatible(a, b)) stage.push_back(omega_merge(a, b));
        acc = std::move(stage);
        if (acc.empty()) break;
      }
      for (auto& o : acc) add(o);
    }

    // ε: a duo of Θ across two ensembles is marked for the second part; the
    // two are the first to interact there, so they must be able to interact
    // with each other right now
    for (const auto& duo : st.theta) {
      const auto& [n, m] = duo;
      if (!st.parts.count(n) || !st.parts.count(m)) continue;
      int en = ensemble_of(st.psi, n), em = ensemble_of(st.psi, m);
      if (en < 0 || em < 0 || en == em) continue;
      System two;
      two.participants.emplace(n, st.parts.at(n));
      two.participants.emplace(m, st.parts.at(m));
      if (!onestep(two)) continue;
      SplitState next = st;
      next.parts.erase(n);
      next.parts.erase(m);
      next.psi[en].erase(n);
      next.psi[em].erase(m);
      next.theta.erase(duo);
      for (auto& o : run(next)) {
        o.parts[n] = seps();
        o.parts[m] = seps();
        add(o);
      }
    }

    // rem: a non-terminated participant that cannot interact with anyone
    for (const auto& [n, pn] : st.parts) {
      auto p = norm_local(pn);
      if (is_zero(p)) continue;
      ReadySet mine = ready(p);
      bool can_interact = false;
      for (const auto& [m, qm] : st.parts) {
        if (m == n || can_interact) continue;
        for (const auto& act : ready(qm))
          if (mine.count({act.channel, !act.output})) { can_interact = true; break; }
      }
      for (const auto& [a, q] : st.queues)
        if (!q.empty() && mine.count({Channel{a}, false})) can_interact = true;
      if (can_interact) continue;
      SplitState next = st;
      next.parts.erase(n);
      for (auto& ns : next.psi) ns.erase(n);
      for (auto& o : run(next)) {
        o.parts[n] = seps();
        add(o);
      }
    }

    // drop a queue whose remaining contents belong to the second part
    for (const auto& [a, q] : st.queues) {
      SplitState next = st;
      next.queues.erase(a);
      for (auto& o : run(next)) {
        if (!o.queues.count(a)) o.queues[a] = {};
        add(o);
      }
    }

    memo.emplace(k, results);
    return prepend_all(results, base);
  }

  static std::vector<Omega> prepend_all(const std::vector<Omega>& os, const Omega& base) {
    std::vector<Omega> out;
    out.reserve(os.size());
    for (const auto& o : os) {
      Omega merged = o;
      for (const auto& [n, w] : base.parts) merged.parts.emplace(n, w);
      out.push_back(std::move(merged));
    }
    return out;
  }
};

}  // namespace detail

// All Ω such that Ψ; Θ ⊢ S ▷ Ω is derivable. Systems containing recursion
// binders or variables never split: no rule removes a recursive definition.
inline std::vector<Omega> derive_splits(const System& s, const Psi& psi, const Theta& theta) {
  for (const auto& [n, p] : s.participants)
    if (detail::contains_rec_or_var(p)) return {};
  detail::SplitState st{s.participants, s.queues, psi, theta};
  detail::SplitSearch search;
  auto res = search.run(st);
  // Ω is total on the participants and consumed queues default to empty
  for (auto& o : res) {
    for (const auto& [n, p] : s.participants)
      if (!o.parts.count(n)) o.parts[n] = szero();
    for (const auto& [a, q] : s.queues)
      if (!o.queues.count(a)) o.queues[a] = {};
  }
  return res;
}

// ---------------------------------------------------------------------------
// Coherence

namespace detail {
inline System restriction(const System& s, const Ensemble& ns) {
  System out;
  for (const auto& n : ns)
    if (auto it = s.participants.find(n); it != s.participants.end())
      out.participants.emplace(n, it->second);
  out.queues = s.queues;  // all queues of s take part
  return out;
}
}  // namespace detail

// Coherence of a derivable judgement: Θ is non-empty, every ensemble can
// interact, has a unique synchronising pair (or unique queue-synchroniser),
// Ω-linkage is total on each ensemble and Θ-linkage is total on Ψ.
inline bool coherent(const System& s, const Psi& psi, const Theta& theta, const Omega& omega) {
  if (theta.empty()) return false;
  for (const auto& ns : psi) {
    if (!onestep(detail::restriction(s, ns))) return false;
    std::vector<std::string> removable;
    for (const auto& n : ns) {
      Ensemble rest = ns;
      rest.erase(n);
      if (!onestep(detail::restriction(s, rest))) removable.push_back(n);
    }
    if (removable.size() != 1 && removable.size() != 2) return false;
  }
  // ⊛ total on each ensemble
  for (const auto& ns : psi) {
    std::vector<std::string> names(ns.begin(), ns.end());
    size_t k = names.size();
    std::vector<std::vector<bool>> linked(k, std::vector<bool>(k, false));
    for (size_t i = 0; i < k; ++i)
      for (size_t j = 0; j < k; ++j) {
        if (i == j) continue;
        std::set<std::string> ci, cj;
        split_channels(omega.parts.at(names[i]), ci);
        split_channels(omega.parts.at(names[j]), cj);
        for (const auto& a : ci)
          if (cj.count(a)) linked[i][j] = true;
      }
    for (size_t via = 0; via < k; ++via)
      for (size_t i = 0; i < k; ++i)
        for (size_t j = 0; j < k; ++j)
          if (linked[i][via] && linked[via][j]) linked[i][j] = true;
    for (size_t i = 0; i < k; ++i)
      for (size_t j = 0; j < k; ++j)
        if (i != j && !linked[i][j]) return false;
  }
  // ↔Θ total on Ψ
  size_t k = psi.size();
  std::vector<std::vector<bool>> tl(k, std::vector<bool>(k, true));
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      tl[i][j] = false;
      for (const auto& [x, y] : theta) {
        bool xi = psi[i].count(x), yi = psi[i].count(y);
        bool xj = psi[j].count(x), yj = psi[j].count(y);
        if ((xi && yj) || (yi && xj)) tl[i][j] = true;
      }
    }
  for (size_t via = 0; via < k; ++via)
    for (size_t i = 0; i < k; ++i)
      for (size_t j = 0; j < k; ++j)
        if (tl[i][via] && tl[via][j]) tl[i][j] = true;
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j)
      if (!tl[i][j]) return false;
  return true;
}

// Spec surface: one derivable Ω (the coherent one when it exists).
inline std::optional<Omega> derive_split(const System& s, const Psi& psi, const Theta& theta) {
  auto all = derive_splits(s, psi, theta);
  if (all.empty()) return std::nullopt;
  for (const auto& o : all)
    if (coherent(s, psi, theta, o)) return o;
  return all.front();
}

struct CoherentSplit {
  Psi psi;
  Theta theta;
  Omega omega;
};

namespace detail {

inline void partitions(const std::vector<std::string>& items, size_t i, Psi& cur,
                       std::vector<Psi>& out) {
  if (i == items.size()) {
    if (cur.size() >= 2) out.push_back(cur);
    return;
  }
  for (size_t bi = 0; bi < cur.size(); ++bi) {
    cur[bi].insert(items[i]);
    partitions(items, i + 1, cur, out);
    cur[bi].erase(items[i]);
  }
  cur.push_back({items[i]});
  partitions(items, i + 1, cur, out);
  cur.pop_back();
}

inline void disjoint_duo_subsets(const std::vector<Duo>& cands, size_t i, Theta& cur,
                                 std::vector<Theta>& out) {
  if (i == cands.size()) {
    if (!cur.empty()) out.push_back(cur);
    return;
  }
  disjoint_duo_subsets(cands, i + 1, cur, out);
  const auto& [a, b] = cands[i];
  for (const auto& [x, y] : cur)
    if (x == a || x == b || y == a || y == b) return;
  cur.insert(cands[i]);
  disjoint_duo_subsets(cands, i + 1, cur, out);
  cur.erase(cands[i]);
}

}  // namespace detail

// Searches candidate Ψ (partitions of the participants into connected
// ensembles) and Θ (disjoint cross-ensemble duos sharing a channel) for
// coherent judgements. Coherent environments are unique per system; with
// exhaust_all every candidate is collected so tests can assert uniqueness.
inline std::vector<CoherentSplit> find_coherent_splits(const System& s, bool exhaust_all = false) {
  std::vector<CoherentSplit> found;
  for (const auto& [n, p] : s.participants)
    if (detail::contains_rec_or_var(p)) return found;
  std::vector<std::string> names;
  for (const auto& [n, p] : s.participants) names.push_back(n);
  if (names.size() < 2 || names.size() > 8) return found;

  std::map<std::string, std::set<std::string>> chans;
  for (const auto& [n, p] : s.participants) chans[n] = channels_of(p);
  auto share = [&](const std::string& a, const std::string& b) {
    for (const auto& c : chans[a])
      if (chans[b].count(c)) return true;
    return false;
  };
  auto connected = [&](const Ensemble& ns) {
    if (ns.size() <= 1) return true;
    std::set<std::string> seen{*ns.begin()};
    bool grown = true;
    while (grown) {
      grown = false;
      for (const auto& n : ns) {
        if (seen.count(n)) continue;
        for (const auto& m : seen)
          if (share(n, m)) { seen.insert(n); grown = true; break; }
      }
    }
    return seen.size() == ns.size();
  };

  std::vector<Psi> psis;
  Psi cur;
  detail::partitions(names, 0, cur, psis);
  for (const auto& psi : psis) {
    bool ok = true;
    for (const auto& ns : psi)
      if (!connected(ns)) { ok = false; break; }
    if (!ok) continue;
    // duo candidates: cross-ensemble pairs sharing a channel, both active
    std::vector<Duo> cands;
    for (size_t i = 0; i < names.size(); ++i)
      for (size_t j = i + 1; j < names.size(); ++j) {
        const auto& a = names[i];
        const auto& b = names[j];
        if (detail::ensemble_of(psi, a) == detail::ensemble_of(psi, b)) continue;
        if (!share(a, b)) continue;
        if (is_zero(norm_local(s.participants.at(a))) || is_zero(norm_local(s.participants.at(b))))
          continue;
        cands.push_back(make_duo(a, b));
      }
    std::vector<Theta> thetas;
    Theta tcur;
    detail::disjoint_duo_subsets(cands, 0, tcur, thetas);
    for (const auto& theta : thetas) {
      for (const auto& omega : derive_splits(s, psi, theta)) {
        if (coherent(s, psi, theta, omega)) {
          found.push_back(CoherentSplit{psi, theta, omega});
          if (!exhaust_all) return found;
        }
      }
    }
  }
  return found;
}

inline std::optional<CoherentSplit> find_coherent_split(const System& s) {
  auto all = find_coherent_splits(s, false);
  if (all.empty()) return std::nullopt;
  return all.front();
}

// ---------------------------------------------------------------------------
// pre/post parts and the split function

// The first part of a split: the longest common prefix of p and w. For
// external choices the branches of p absent from w are retained, since they
// can still induce races in the first part.
inline BehaviourPtr pre_part(const BehaviourPtr& p0, const SplitPtr& w) {
  auto p = norm_local(p0);
  if (w->kind == SKind::Eps) return bzero();
  if (is_zero(p) && w->kind == SKind::Zero) return bzero();
  if (p->kind == BKind::Internal && w->kind == SKind::Internal) {
    std::vector<Branch> bs;
    for (const auto& pb : p->branches)
      for (const auto& wb : w->branches)
        if (pb.channel == wb.channel) bs.push_back({pb.channel, pb.sort, pre_part(pb.cont, wb.cont)});
    return internal_choice(std::move(bs));
  }
  if (p->kind == BKind::External && w->kind == SKind::External) {
    std::vector<Branch> bs;
    for (const auto& pb : p->branches) {
      bool matched = false;
      for (const auto& wb : w->branches)
        if (pb.channel == wb.channel) {
          matched = true;
          bs.push_back({pb.channel, pb.sort, pre_part(pb.cont, wb.cont)});
        }
      if (!matched) bs.push_back(pb);  // kept verbatim
    }
    return external_choice(std::move(bs));
  }
  throw std::logic_error("pre_part: split does not match the behaviour");
}

// The second part: the remainder of p after w. Undefined unless every
// matched branch leaves the same remainder.
inline std::optional<BehaviourPtr> post_part(const BehaviourPtr& p0, const SplitPtr& w) {
  auto p = norm_local(p0);
  if (w->kind == SKind::Eps) return p;
  if (is_zero(p) && w->kind == SKind::Zero) return bzero();
  if ((p->kind == BKind::Internal && w->kind == SKind::Internal) ||
      (p->kind == BKind::External && w->kind == SKind::External)) {
    std::optional<BehaviourPtr> common;
    bool any = false;
    for (const auto& pb : p->branches)
      for (const auto& wb : w->branches) {
        if (pb.channel != wb.channel) continue;
        any = true;
        auto rest = post_part(pb.cont, wb.cont);
        if (!rest) return std::nullopt;
        if (!common)
          common = rest;
        else if (!local_eq(*common, *rest))
          return std::nullopt;
      }
    if (!any) return std::nullopt;
    return common;
  }
  return std::nullopt;
}

// split(S) = (S1, S2) from the coherent judgement; undefined when there is
// no coherent split or a remainder is ambiguous.
inline std::optional<std::pair<System, System>> split_system(const System& s, const CoherentSplit& cs) {
  System s1, s2;
  for (const auto& [n, p] : s.participants) {
    const auto& w = cs.omega.parts.at(n);
    auto rest = post_part(p, w);
    if (!rest) return std::nullopt;
    s1.participants.emplace(n, norm_local(pre_part(p, w)));
    s2.participants.emplace(n, norm_local(*rest));
  }
  for (const auto& [a, q] : s.queues) {
    auto consumed = cs.omega.queues.count(a) ? cs.omega.queues.at(a) : std::vector<Sort>{};
    s1.queues[a] = consumed;
    if (consumed.size() > q.size()) return std::nullopt;
    s2.queues[a] = std::vector<Sort>(q.begin() + consumed.size(), q.end());
  }
  return std::make_pair(std::move(s1), std::move(s2));
}

inline std::optional<std::pair<System, System>> split_system(const System& s) {
  auto cs = find_coherent_split(s);
  if (!cs) return std::nullopt;
  return split_system(s, *cs);
}

}  // namespace choreo

#endif  // CHOREO_SPLIT_HPP
