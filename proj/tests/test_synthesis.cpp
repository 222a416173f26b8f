#include <catch2/catch_amalgamated.hpp>

#include "choreo/synthesis.hpp"
#include "support.hpp"

using namespace choreo;

TEST_CASE("synth of the buyer-seller system matches the expected global type") {
  auto out = synth_program(testing::buyer_seller());
  REQUIRE(out.ok());
  INFO(print_global(out.type()));
  CHECK(global_eq(out.type(), testing::buyer_seller_global()));
}

TEST_CASE("synth of a single message pair") {
  auto s = parse_system("s = a!<int>;\nr = a?<int>;");
  auto out = synth_program(s);
  REQUIRE(out.ok());
  auto expect = gmsg(Participant{"s"}, Participant{"r"}, Channel{"a"}, Sort{"int"}, gend());
  CHECK(global_eq(out.type(), expect));
}

TEST_CASE("synth of the empty system is end") {
  auto out = synth_program(System{});
  REQUIRE(out.ok());
  CHECK(is_end(out.type()));
}

TEST_CASE("race on b is not typable, the guarded variant is") {
  auto race = testing::load_system("race.lst");
  auto out = synth_program(race);
  CHECK(!out.ok());
  CHECK(!out.failure.empty());

  auto ok = synth_program(testing::load_system("guarded_choice.lst"));
  REQUIRE(ok.ok());
}

TEST_CASE("two independent pairs synthesise a parallel type") {
  auto out = synth_program(testing::load_system("two_pairs.lst"));
  REQUIRE(out.ok());
  auto expect = gpar(gmsg(Participant{"P1"}, Participant{"Q1"}, Channel{"a"}, Sort{"int"}, gend()),
                     gmsg(Participant{"P2"}, Participant{"Q2"}, Channel{"b"}, Sort{"bool"}, gend()));
  CHECK(global_eq(out.type(), expect));
  // the prefix rule alone cannot type it: the root of the result is a Par
  CHECK(norm_global(out.type())->kind == GKind::Par);
}

TEST_CASE("recursive pair synthesises a recursive type") {
  auto out = synth_program(testing::load_system("rec_pair.lst"));
  REQUIRE(out.ok());
  auto g = norm_global(out.type());
  REQUIRE(g->kind == GKind::Rec);
  REQUIRE(g->body->kind == GKind::Msg);
  CHECK(g->body->sender.name == "B");
  CHECK(g->body->receiver.name == "C");
  CHECK(g->body->channel.name == "a");
  CHECK(g->body->cont->kind == GKind::Var);
}

TEST_CASE("recursion with an exit branch") {
  auto out = synth_program(testing::load_system("rec_exit.lst"));
  REQUIRE(out.ok());
  auto g = norm_global(out.type());
  REQUIRE(g->kind == GKind::Rec);
  CHECK(g->body->kind == GKind::Choice);
}

TEST_CASE("the runtime star example types with an anonymous sender") {
  // S' = s[b!.a?] | r[b?] with a datum on queue a: the judgement uses *->s:a
  auto s = testing::load_system("runtime_star.lst");
  auto out = synth_runtime(s);
  REQUIRE(out.ok());
  auto g = norm_global(out.type());
  // b-exchange first, then the queued datum reaches s
  REQUIRE(g->kind == GKind::Msg);
  CHECK(g->channel.name == "b");
  CHECK(g->sender.name == "s");
  CHECK(g->receiver.name == "r");
  auto cont = g->cont;
  REQUIRE(cont->kind == GKind::Msg);
  CHECK(cont->sender.is_star());
  CHECK(cont->receiver.name == "s");
  CHECK(cont->channel.name == "a");
}

TEST_CASE("a program lifted with empty queues synthesises the same type") {
  for (const char* name : {"buyer_seller.lst", "two_pairs.lst", "pingpong.lst", "rec_pair.lst"}) {
    auto s = testing::load_system(name);
    auto out1 = synth_program(s);
    auto out2 = synth_runtime(lift_runtime(s));
    REQUIRE(out1.ok());
    REQUIRE(out2.ok());
    CHECK(global_eq(out1.type(), out2.type()));
  }
}

TEST_CASE("queue-first typing: the star prefix precedes the sender prefix") {
  // r must first receive the queued datum; a second exchange on a follows
  auto s = parse_system("s = a!<int>;\nr = a?<int>. a?<int>;\nqueue a = [int];");
  auto out = synth_runtime(s);
  REQUIRE(out.ok());
  auto g = norm_global(out.type());
  REQUIRE(g->kind == GKind::Msg);
  CHECK(g->sender.is_star());
  CHECK(g->channel.name == "a");
  REQUIRE(g->cont->kind == GKind::Msg);
  CHECK(g->cont->sender.name == "s");
  CHECK(g->cont->channel.name == "a");
}

TEST_CASE("derivation trees name their rules") {
  auto out = synth_program(testing::buyer_seller());
  REQUIRE(out.ok());
  auto text = derivation_text(out.results.front().derivation);
  CHECK(text.find("[seq]") != std::string::npos);
  CHECK(text.find("[par]") != std::string::npos);
  CHECK(text.find("[oplus]") != std::string::npos);
  CHECK(text.find("[;]") != std::string::npos);
  CHECK(text.find("[end]") != std::string::npos);
}

TEST_CASE("exhaustive mode: buyer-seller result is unique up to congruence") {
  SynthOptions opt;
  opt.exhaustive = true;
  auto out = synth_program(testing::buyer_seller(), opt);
  REQUIRE(out.ok());
  CHECK(out.results.size() == 1);
}

TEST_CASE("exhaustive mode: independent pairs stay unique") {
  SynthOptions opt;
  opt.exhaustive = true;
  auto out = synth_program(testing::load_system("two_pairs.lst"), opt);
  REQUIRE(out.ok());
  CHECK(out.results.size() == 1);
}

TEST_CASE("channel and participant bookkeeping") {
  for (const char* name : {"buyer_seller.lst", "two_pairs.lst", "guarded_choice.lst", "pingpong.lst"}) {
    auto s = testing::load_system(name);
    auto out = synth_program(s);
    REQUIRE(out.ok());
    auto g = out.type();
    auto gc = channels_of(g);
    auto sc = channels_of(s);
    for (const auto& a : gc) CHECK(sc.count(a));
    // participants: n in PARTS(G) iff restrict(s, n) is not 0
    auto gp = participants_of(g);
    for (const auto& [n, p] : s.participants) {
      if (is_zero(norm_local(p)))
        CHECK(!gp.count(n));
      else
        CHECK(gp.count(n));
    }
  }
}
