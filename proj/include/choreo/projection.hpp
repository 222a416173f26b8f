#ifndef CHOREO_PROJECTION_HPP
#define CHOREO_PROJECTION_HPP

#include <optional>
#include <string>
#include <vector>

#include "choreo/ast.hpp"

// Projection of global types onto participants and channels. Undefined
// projections are nullopt values, mirroring the partial functions.

namespace choreo {

// Merges the behaviour of a participant in different choice branches.
// Clauses, in order: external choices with disjoint guards join by +,
// internal choices with disjoint guards join by ⊕, equal head prefixes
// recurse, congruent operands collapse, anything else is undefined.
//
// internal_join disables the ⊕ clause; the well-formedness rule for choice
// uses that restricted form on non-deciding participants.
inline std::optional<BehaviourPtr> merge(const BehaviourPtr& p0, const BehaviourPtr& q0,
                                         bool internal_join = true) {
  auto p = norm_local(p0);
  auto q = norm_local(q0);
  auto guards_disjoint = [](const BehaviourPtr& x, const BehaviourPtr& y) {
    for (const auto& a : x->branches)
      for (const auto& b : y->branches)
        if (a.channel == b.channel) return false;
    return true;
  };
  if (p->kind == BKind::External && q->kind == BKind::External && !p->branches.empty() &&
      !q->branches.empty() && guards_disjoint(p, q)) {
    std::vector<Branch> bs = p->branches;
    bs.insert(bs.end(), q->branches.begin(), q->branches.end());
    return norm_local(external_choice(std::move(bs)));
  }
  if (internal_join && p->kind == BKind::Internal && q->kind == BKind::Internal &&
      !p->branches.empty() && !q->branches.empty() && guards_disjoint(p, q)) {
    std::vector<Branch> bs = p->branches;
    bs.insert(bs.end(), q->branches.begin(), q->branches.end());
    return norm_local(internal_choice(std::move(bs)));
  }
  if (p->kind == q->kind && (p->kind == BKind::Internal || p->kind == BKind::External) &&
      p->branches.size() == 1 && q->branches.size() == 1 &&
      p->branches[0].channel == q->branches[0].channel &&
      p->branches[0].sort == q->branches[0].sort) {
    auto rest = merge(p->branches[0].cont, q->branches[0].cont, internal_join);
    if (!rest) return std::nullopt;
    Branch br{p->branches[0].channel, p->branches[0].sort, *rest};
    return p->kind == BKind::Internal ? internal_choice({std::move(br)})
                                      : external_choice({std::move(br)});
  }
  if (behaviour_eq(p, q)) return p;
  return std::nullopt;
}

// P{Q/0}: every 0 leaf of p replaced by q.
inline BehaviourPtr subst_end(const BehaviourPtr& p, const BehaviourPtr& q) {
  if (is_zero(p)) return q;
  switch (p->kind) {
    case BKind::Internal:
    case BKind::External: {
      std::vector<Branch> bs;
      bs.reserve(p->branches.size());
      for (const auto& b : p->branches) bs.push_back({b.channel, b.sort, subst_end(b.cont, q)});
      return p->kind == BKind::Internal ? internal_choice(std::move(bs))
                                        : external_choice(std::move(bs));
    }
    case BKind::Rec: return brec(p->var, subst_end(p->body, q));
    case BKind::Var: return p;
  }
  return p;
}

// G ↾ n. Messages project to send/receive prefixes on their endpoints,
// choices merge, ⨟ substitutes the second part for the 0 leaves of the
// first, a parallel projects the unique branch mentioning n.
inline std::optional<BehaviourPtr> project(const GlobalPtr& g, const Participant& n) {
  switch (g->kind) {
    case GKind::End: return bzero();
    case GKind::Var: return bvar(g->var);
    case GKind::Msg: {
      auto cont = project(g->cont, n);
      if (!cont) return std::nullopt;
      if (g->sender == n) return bsend(g->channel, g->sort, *cont);
      if (g->receiver == n) return brecv(g->channel, g->sort, *cont);
      return cont;
    }
    case GKind::Choice: {
      auto l = project(g->left, n);
      auto r = project(g->right, n);
      if (!l || !r) return std::nullopt;
      return merge(*l, *r);
    }
    case GKind::Par: {
      bool in_l = participants_of(g->left).count(n.name) > 0;
      bool in_r = participants_of(g->right).count(n.name) > 0;
      if (in_l && in_r) return std::nullopt;
      if (in_l) return project(g->left, n);
      if (in_r) return project(g->right, n);
      return bzero();
    }
    case GKind::Seq: {
      auto l = project(g->left, n);
      auto r = project(g->right, n);
      if (!l || !r) return std::nullopt;
      return subst_end(*l, *r);
    }
    case GKind::Rec: {
      if (!participants_of(g->body).count(n.name)) return bzero();
      auto body = project(g->body, n);
      if (!body) return std::nullopt;
      return brec(g->var, *body);
    }
  }
  return std::nullopt;
}

namespace detail {
inline bool has_star_prefix_on(const GlobalPtr& g, const Channel& a) {
  switch (g->kind) {
    case GKind::Msg:
      if (g->sender.is_star() && g->channel == a) return true;
      return has_star_prefix_on(g->cont, a);
    case GKind::Seq:
    case GKind::Choice:
    case GKind::Par:
      return has_star_prefix_on(g->left, a) || has_star_prefix_on(g->right, a);
    case GKind::Rec: return has_star_prefix_on(g->body, a);
    case GKind::Var:
    case GKind::End: return false;
  }
  return false;
}
}  // namespace detail

// Queue projection: the ⋆-prefixes on a channel, in order. Both branches of
// a choice must agree; a parallel may mention the channel on one side only.
inline std::optional<std::vector<Sort>> project_queue(const GlobalPtr& g, const Channel& a) {
  switch (g->kind) {
    case GKind::End:
    case GKind::Var: return std::vector<Sort>{};
    case GKind::Msg: {
      auto rest = project_queue(g->cont, a);
      if (!rest) return std::nullopt;
      if (g->sender.is_star() && g->channel == a) {
        std::vector<Sort> out{g->sort};
        out.insert(out.end(), rest->begin(), rest->end());
        return out;
      }
      return rest;
    }
    case GKind::Choice: {
      auto l = project_queue(g->left, a);
      auto r = project_queue(g->right, a);
      if (!l || !r || *l != *r) return std::nullopt;  // mergechan: equal or undefined
      return l;
    }
    case GKind::Par: {
      bool in_l = channels_of(g->left).count(a.name) > 0;
      bool in_r = channels_of(g->right).count(a.name) > 0;
      if (in_l && in_r) return std::nullopt;
      if (in_l) return project_queue(g->left, a);
      if (in_r) return project_queue(g->right, a);
      return std::vector<Sort>{};
    }
    case GKind::Seq: {
      auto l = project_queue(g->left, a);
      auto r = project_queue(g->right, a);
      if (!l || !r) return std::nullopt;
      l->insert(l->end(), r->begin(), r->end());
      return l;
    }
    case GKind::Rec:
      // runtime ⋆ only arises after reduction, never under a binder
      if (detail::has_star_prefix_on(g->body, a)) return std::nullopt;
      return std::vector<Sort>{};
  }
  return std::nullopt;
}

inline bool projectable(const GlobalPtr& g) {
  for (const auto& n : participants_of(g))
    if (!project(g, Participant{n})) return false;
  for (const auto& a : channels_of(g))
    if (!project_queue(g, Channel{a})) return false;
  return true;
}

// The parallel composition of all projections; participants whose projection
// is 0 are omitted. Queues are filled from the queue projections when the
// type contains ⋆-prefixes.
inline std::optional<System> project_system(const GlobalPtr& g) {
  System s;
  for (const auto& n : participants_of(g)) {
    auto p = project(g, Participant{n});
    if (!p) return std::nullopt;
    if (!is_zero(norm_local(*p))) s.participants.emplace(n, norm_local(*p));
  }
  bool any_star = false;
  for (const auto& a : channels_of(g)) {
    auto q = project_queue(g, Channel{a});
    if (!q) return std::nullopt;
    if (!q->empty()) any_star = true;
  }
  if (any_star) {
    for (const auto& a : channels_of(g)) s.queues.emplace(a, *project_queue(g, Channel{a}));
  }
  return s;
}

}  // namespace choreo

#endif  // CHOREO_PROJECTION_HPP
