#include <catch2/catch_amalgamated.hpp>

#include "choreo/split.hpp"
#include "choreo/synthesis.hpp"
#include "support.hpp"

using namespace choreo;

namespace {
BehaviourPtr parse_b(const std::string& src) {
  return parse_system("P = " + src + ";").participants.at("P");
}
}  // namespace

TEST_CASE("coherent split of the buyer-seller system") {
  auto s = testing::buyer_seller();
  auto cs = find_coherent_split(s);
  REQUIRE(cs);
  // Ψ = {{B1,S1},{B2,S2}}, Θ = {{B1,B2}}
  REQUIRE(cs->psi.size() == 2);
  std::set<Ensemble> psi(cs->psi.begin(), cs->psi.end());
  CHECK(psi == std::set<Ensemble>{{"B1", "S1"}, {"B2", "S2"}});
  CHECK(cs->theta == Theta{make_duo("B1", "B2")});
  // Ω rows for B1 and the sellers
  CHECK(split_key(cs->omega.parts.at("B1")) ==
        split_key(sprefix(SKind::Internal, Channel{"t1"}, Sort{"order"},
                          sprefix(SKind::External, Channel{"p1"}, Sort{"price"}, seps()))));
  CHECK(split_key(cs->omega.parts.at("S1")) ==
        split_key(sprefix(SKind::External, Channel{"t1"}, Sort{"order"},
                          sprefix(SKind::Internal, Channel{"p1"}, Sort{"price"}, seps()))));
}

TEST_CASE("the coherent judgement is unique on corpus systems") {
  for (const char* name : {"buyer_seller.lst", "guarded_choice.lst"}) {
    auto s = testing::load_system(name);
    auto all = find_coherent_splits(s, /*exhaust_all=*/true);
    if (all.size() > 1) {
      for (size_t i = 1; i < all.size(); ++i) {
        CHECK(all[i].psi == all[0].psi);
        CHECK(all[i].theta == all[0].theta);
        CHECK(all[i].omega.key() == all[0].omega.key());
      }
    }
  }
}

TEST_CASE("split_system reproduces the golden table rows") {
  auto s = testing::buyer_seller();
  auto halves = split_system(s);
  REQUIRE(halves);
  auto& [s1, s2] = *halves;

  CHECK(local_eq(s1.participants.at("B1"), parse_b("t1!<order>. p1?<price>")));
  CHECK(local_eq(s2.participants.at("B1"),
                 parse_b("r?<price>. (c1!. t1!<addr> (+) c2!. no1!)")));
  CHECK(local_eq(s1.participants.at("S1"), parse_b("t1?<order>. p1!<price>")));
  CHECK(local_eq(s2.participants.at("S1"), parse_b("t1?<addr> + no1?")));
  CHECK(local_eq(s1.participants.at("S2"), parse_b("t2?<order>. p2!<price>")));
  CHECK(local_eq(s2.participants.at("S2"), parse_b("t2?<addr> + no2?")));
  CHECK(local_eq(s1.participants.at("B2"), parse_b("t2!<order>. p2?<price>")));
  CHECK(local_eq(s2.participants.at("B2"),
                 parse_b("r!<price>. (c2?. t2!<addr> + c1?. no2!)")));
}

TEST_CASE("derive_split via rule ax on the empty system") {
  auto omegas = derive_splits(System{}, {}, {});
  REQUIRE(omegas.size() == 1);
  CHECK(omegas[0].parts.empty());
}

TEST_CASE("empty system has no coherent split") {
  CHECK(!find_coherent_split(System{}));
  CHECK(!split_system(System{}));
}

TEST_CASE("a single synchronising pair cannot split") {
  auto s = parse_system("B = a!;\nC = a?;");
  CHECK(!find_coherent_split(s));
}

TEST_CASE("systems with recursion binders never split") {
  CHECK(!find_coherent_split(testing::load_system("rec_pair.lst")));
  CHECK(derive_splits(testing::load_system("rec_pair.lst"), {{"B"}, {"C"}}, {make_duo("B", "C")})
            .empty());
}

TEST_CASE("incompatible internal branch continuations fail to split") {
  // the chooser's own prefixes differ across branches, so no derivation
  // records them compatibly and only the pre-branch split exists; with no
  // later interaction there is no coherent judgement at all
  auto s = parse_system("A = x!<v>. (a!. b! (+) c!. d!);\nB = x?<v>. (a?. b? + c?. d?);");
  auto all = find_coherent_splits(s, true);
  CHECK(all.empty());
}

TEST_CASE("pre_part") {
  CHECK(is_zero(pre_part(parse_b("a!. b!"), seps())));
  // kept branches: unmatched external branches stay in the first part
  auto p = parse_b("a?. c! + b?. d!");
  auto w = sprefix(SKind::External, Channel{"a"}, Sort{}, seps());
  auto pre = pre_part(p, w);
  REQUIRE(pre->kind == BKind::External);
  REQUIRE(pre->branches.size() == 2);
  auto normed = norm_local(pre);
  CHECK(normed->branches[0].channel.name == "a");
  CHECK(is_zero(normed->branches[0].cont));          // split point
  CHECK(!is_zero(normed->branches[1].cont));         // original branch kept
  CHECK(local_eq(normed->branches[1].cont, parse_b("d!")));
}

TEST_CASE("post_part") {
  auto p = parse_b("a!. b!");
  CHECK(local_eq(*post_part(p, seps()), p));
  // diverging remainders are undefined
  auto q = parse_b("a!. b! (+) c!. d!");
  auto w = schoice(SKind::Internal, {SBranch{Channel{"a"}, Sort{}, seps()},
                                     SBranch{Channel{"c"}, Sort{}, seps()}});
  CHECK(!post_part(q, w));
  // equal remainders are fine
  auto q2 = parse_b("a!. e! (+) c!. e!");
  CHECK(local_eq(*post_part(q2, w), parse_b("e!")));
}

TEST_CASE("split then step commutes with step then split on a send") {
  // two ensembles {n,m} and {x,y}; x opens phase two by sending r to n
  auto s = parse_system(
      "n = a!<v>. d?<v>. r?;\nm = a?<v>. d!<v>;\nx = b!<v>. r!;\ny = b?<v>;");
  auto rt = lift_runtime(s);
  auto halves0 = split_system(rt);
  REQUIRE(halves0);
  CHECK(local_eq(halves0->first.participants.at("n"), parse_b("a!<v>. d?<v>")));
  CHECK(local_eq(halves0->second.participants.at("n"), parse_b("r?")));
  // step: n pushes v on a
  auto succs = step(rt);
  const System* after = nullptr;
  for (auto& [l, t] : succs)
    if (l.kind == LabelKind::SyncSend && l.participant == "n") after = &t;
  REQUIRE(after);
  auto halves1 = split_system(*after);
  REQUIRE(halves1);
  // phase-two rows are untouched by the send
  for (const auto& [name, p] : halves0->second.participants)
    CHECK(local_eq(p, halves1->second.participants.at(name)));
  // in the first part n lost the consumed prefix while the queue gained it
  CHECK(local_eq(halves1->first.participants.at("n"), parse_b("d?<v>")));
  REQUIRE(halves1->first.queues.count("a"));
  CHECK(halves1->first.queues.at("a").size() == 1);
  CHECK(halves1->second.queues.at("a").empty());
}
