#ifndef CHOREO_WELLFORMED_HPP
#define CHOREO_WELLFORMED_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "choreo/ast.hpp"
#include "choreo/linearity.hpp"
#include "choreo/parser.hpp"
#include "choreo/projection.hpp"

// Ready-set families of global types and the well-formedness judgement
// C ⊢ G, grouped as in the rule discussion: sequentiality, single
// threadedness, knowledge of choice.

namespace choreo {

struct GAction {
  Channel channel;
  Participant sender, receiver;
  auto operator<=>(const GAction&) const = default;
};

using GReadySet = std::set<GAction>;
using ParticipantSet = std::set<std::string>;
using PartitionFamily = std::set<ParticipantSet>;

// F(G): the initial interactions of G.
inline GReadySet g_fin(const GlobalPtr& g) {
  switch (g->kind) {
    case GKind::Msg: return {GAction{g->channel, g->sender, g->receiver}};
    case GKind::Choice:
    case GKind::Par: {
      auto l = g_fin(g->left);
      auto r = g_fin(g->right);
      l.insert(r.begin(), r.end());
      return l;
    }
    case GKind::Seq: return is_end(g->left) ? g_fin(g->right) : g_fin(g->left);
    case GKind::Rec: return g_fin(g->body);
    case GKind::Var:
    case GKind::End: return {};
  }
  return {};
}

// F_P(G): participants grouped by top-level concurrent branch.
inline PartitionFamily g_finp(const GlobalPtr& g) {
  if (g->kind == GKind::Par) {
    auto l = g_finp(g->left);
    auto r = g_finp(g->right);
    l.insert(r.begin(), r.end());
    return l;
  }
  return {participants_of(g)};
}

// F_O(G, P): participants grouped by the concurrent branches of the last
// part of G; partial (the choice clause requires branch agreement).
inline std::optional<PartitionFamily> g_fout(const GlobalPtr& g, ParticipantSet acc = {}) {
  switch (g->kind) {
    case GKind::Msg: {
      if (!g->sender.is_star()) acc.insert(g->sender.name);
      acc.insert(g->receiver.name);
      return g_fout(g->cont, std::move(acc));
    }
    case GKind::Par: {
      auto l = g_fout(g->left, {});
      auto r = g_fout(g->right, {});
      if (!l || !r) return std::nullopt;
      l->insert(r->begin(), r->end());
      return l;
    }
    case GKind::Choice: {
      auto l = g_fout(g->left, acc);
      auto r = g_fout(g->right, acc);
      if (!l || !r || *l != *r) return std::nullopt;
      return l;
    }
    case GKind::Rec: return g_fout(g->body, std::move(acc));
    case GKind::Seq: return g_fout(g->right, {});
    case GKind::End:
    case GKind::Var: return PartitionFamily{std::move(acc)};
  }
  return std::nullopt;
}

struct WfResult {
  bool ok = true;
  std::string rule;                 // outermost failing rule when !ok
  std::string subterm;              // printed failing subterm
  std::string detail;
  std::vector<std::string> trace;   // full rule applications (verbose mode)

  explicit operator bool() const { return ok; }
};

namespace detail {

inline bool par_free(const GlobalPtr& g) {
  switch (g->kind) {
    case GKind::Par: return false;
    case GKind::Msg: return par_free(g->cont);
    case GKind::Seq:
    case GKind::Choice: return par_free(g->left) && par_free(g->right);
    case GKind::Rec: return par_free(g->body);
    case GKind::Var:
    case GKind::End: return true;
  }
  return true;
}

struct WfChecker {
  bool verbose;
  std::vector<std::string> trace;

  WfResult fail(const std::string& rule, const GlobalPtr& g, const std::string& detail) {
    WfResult r;
    r.ok = false;
    r.rule = rule;
    r.subterm = print_global(g);
    r.detail = detail;
    r.trace = trace;
    return r;
  }

  WfResult check(const EnvPtr& c, const GlobalPtr& g) {
    if (verbose) trace.push_back("check " + print_global(g));
    switch (g->kind) {
      case GKind::End:
        return {};
      case GKind::Var: {
        auto u = unfold_env_at(c, g->var);
        if (!u) return fail("wf-chi", g, "no recursion mark for " + g->var);
        if (!is_linear(*u))
          return fail("wf-chi", g, "unfolding the channel environment at " + g->var + " breaks linearity");
        return {};
      }
      case GKind::Msg: {
        for (const auto& act : g_fin(g->cont)) {
          bool meets = act.sender == g->sender || act.sender == g->receiver ||
                       act.receiver == g->sender || act.receiver == g->receiver;
          if (!meets)
            return fail("wf-prefix", g,
                        "no ordering dependency with continuation interaction on " + act.channel.name);
        }
        auto c2 = append_linear(c, env_node(g->channel, g->sender, g->receiver));
        if (!c2) return fail("wf-prefix", g, "channel use on " + g->channel.name + " breaks linearity");
        return check(*c2, g->cont);
      }
      case GKind::Seq: {
        auto fo = g_fout(g->left);
        if (!fo) return fail("wf-seq", g, "F_O of the first part is undefined");
        for (const auto& act : g_fin(g->right)) {
          bool found = false;
          for (const auto& ns : *fo) {
            if (!ns.count(act.sender.name)) continue;
            for (const auto& ms : *fo)
              if (ns != ms && ms.count(act.receiver.name)) { found = true; break; }
            if (found) break;
          }
          if (!found)
            return fail("wf-seq", g,
                        "first interaction on " + act.channel.name +
                            " is not split across two concurrent branches of the first part");
        }
        auto fpl = g_finp(g->left);
        auto fpr = g_finp(g->right);
        for (const auto& ns : fpl) {
          bool meets = false;
          for (const auto& ms : fpr) {
            for (const auto& n : ns)
              if (ms.count(n)) { meets = true; break; }
            if (meets) break;
          }
          if (!meets)
            return fail("wf-seq", g, "a concurrent branch of the first part never reaches the second");
        }
        if (auto r = check(c, g->left); !r) return r;
        auto c2 = append_linear(c, chan_g(g->left));
        if (!c2) return fail("wf-seq", g, "sequencing breaks linearity");
        return check(*c2, g->right);
      }
      case GKind::Par: {
        auto pl = participants_of(g->left);
        auto pr = participants_of(g->right);
        for (const auto& n : pl)
          if (pr.count(n)) return fail("wf-par", g, "participant " + n + " appears in both branches");
        auto cl = channels_of(g->left);
        auto cr = channels_of(g->right);
        for (const auto& a : cl)
          if (cr.count(a)) return fail("wf-par", g, "channel " + a + " appears in both branches");
        if (auto r = check(c, g->left); !r) return r;
        return check(c, g->right);
      }
      case GKind::Choice: {
        auto fl = g_fin(g->left);
        auto fr = g_fin(g->right);
        if (fl.empty() || fr.empty())
          return fail("wf-choice", g, "a branch has no initial interaction");
        std::set<std::string> deciders;
        for (const auto& act : fl) deciders.insert(act.sender.name);
        for (const auto& act : fr) deciders.insert(act.sender.name);
        if (deciders.size() != 1)
          return fail("wf-choice", g, "the choice is decided by more than one participant");
        std::string decider = *deciders.begin();
        if (decider == "*") return fail("wf-choice", g, "a queue cannot decide a choice");
        std::set<std::string> gl, gr;
        for (const auto& act : fl) gl.insert(act.channel.name);
        for (const auto& act : fr) gr.insert(act.channel.name);
        for (const auto& a : gl)
          if (gr.count(a)) return fail("wf-choice", g, "guard channel " + a + " is shared by both branches");
        // knowledge of choice: a participant other than the decider may only
        // branch after being informed, i.e. its projections merge without the
        // internal-choice clause
        auto parts = participants_of(g);
        for (const auto& n : parts) {
          if (n == decider) continue;
          auto bl = project(g->left, Participant{n});
          auto br = project(g->right, Participant{n});
          if (!bl || !br || !merge(*bl, *br, /*internal_join=*/false))
            return fail("wf-choice", g, "participant " + n + " cannot learn which branch was chosen");
        }
        if (auto r = check(c, g->left); !r) return r;
        return check(c, g->right);
      }
      case GKind::Rec: {
        if (!par_free(g->body))
          return fail("wf-rec", g, "concurrent branches cannot appear under recursion");
        return check(append_env(c, env_rec(g->var, env_leaf())), g->body);
      }
    }
    return {};
  }
};

}  // namespace detail

// Derivability of C ⊢ G. G is normalized first, which realizes the G ⨟ 0
// special case by eliminating the unit.
inline WfResult wf(const EnvPtr& c, const GlobalPtr& g, bool verbose = false) {
  detail::WfChecker ck{verbose, {}};
  auto r = ck.check(c, norm_global(g));
  if (r.ok && verbose) r.trace = ck.trace;
  return r;
}

inline WfResult wf(const GlobalPtr& g, bool verbose = false) { return wf(env_leaf(), g, verbose); }

}  // namespace choreo

#endif  // CHOREO_WELLFORMED_HPP
