#include <catch2/catch_amalgamated.hpp>

#include "choreo/ast.hpp"
#include "choreo/parser.hpp"
#include "support.hpp"

using namespace choreo;

TEST_CASE("parse the buyer-seller system") {
  auto s = testing::buyer_seller();
  REQUIRE(s.participants.size() == 4);
  REQUIRE(s.participants.count("B1"));
  auto b1 = s.participants.at("B1");
  REQUIRE(b1->kind == BKind::Internal);
  REQUIRE(b1->branches.size() == 1);
  CHECK(b1->branches[0].channel.name == "t1");
  CHECK(b1->branches[0].sort.name == "order");
  // B1's final choice is a two-branch internal choice
  auto p = b1->branches[0].cont;   // p1?...
  p = p->branches[0].cont;         // r?...
  p = p->branches[0].cont;         // (c1!... (+) c2!...)
  CHECK(p->kind == BKind::Internal);
  CHECK(p->branches.size() == 2);
}

TEST_CASE("parse single participant end") {
  auto s = parse_system("P = end;");
  REQUIRE(s.participants.size() == 1);
  CHECK(is_zero(s.participants.at("P")));
}

TEST_CASE("recursion round-trips through print") {
  auto s = parse_system("P = rec X . a!<int>. X;");
  auto text = print_system(s);
  auto s2 = parse_system(text);
  CHECK(local_eq(s.participants.at("P"), s2.participants.at("P")));
}

TEST_CASE("parse queues") {
  auto s = parse_system("P = a?<int>;\nqueue a = [int, bool];\n");
  REQUIRE(!s.is_program());
  auto q = s.queues.at("a");
  REQUIRE(q.size() == 2);
  CHECK(q[0].name == "int");
  CHECK(q[1].name == "bool");
}

TEST_CASE("parse global examples") {
  auto g1 = parse_global("B1->S1:t1<order>. S1->B1:p1<price>. end");
  REQUIRE(g1->kind == GKind::Msg);
  CHECK(g1->sender.name == "B1");
  CHECK(g1->cont->kind == GKind::Msg);
  CHECK(is_end(g1->cont->cont));

  CHECK(is_end(parse_global("end")));

  auto g = testing::buyer_seller_global();
  REQUIRE(g->kind == GKind::Seq);
  CHECK(g->left->kind == GKind::Par);
  CHECK(g->right->kind == GKind::Msg);
  CHECK(g->right->cont->kind == GKind::Choice);
}

TEST_CASE("star sender parses, star receiver rejected") {
  auto g = parse_global("*->r:a<int>. end");
  CHECK(g->sender.is_star());
  CHECK_THROWS_AS(parse_global("r->*:a<int>. end"), ParseError);
}

TEST_CASE("parse errors carry spans inside the input") {
  std::string text = "P = a!<int>. ;";
  try {
    parse_system(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.span().line == 1);
    CHECK(e.span().column >= 1);
    CHECK(e.span().column <= int(text.size()) + 1);
  }
  CHECK_THROWS_AS(parse_system("P = a!; P = b!;"), ParseError);       // duplicate participant
  CHECK_THROWS_AS(parse_system("P = X;"), ParseError);                // unbound variable
  CHECK_THROWS_AS(parse_system("P = a? (+) b!;"), ParseError);        // mixed operands
  CHECK_THROWS_AS(parse_global("s->s:a. end"), ParseError);           // sender = receiver
  CHECK_THROWS_AS(parse_global("s->r:a. X"), ParseError);             // unbound chi
}

TEST_CASE("print_global of end") { CHECK(print_global(gend()) == "end"); }

TEST_CASE("print_system of the buyer-seller system has four definitions") {
  auto text = print_system(testing::buyer_seller());
  size_t count = 0;
  for (size_t at = text.find(" = "); at != std::string::npos; at = text.find(" = ", at + 1)) count++;
  CHECK(count == 4);
}

TEST_CASE("round trip: corpus") {
  for (const char* name : {"buyer_seller.lst", "rec_pair.lst", "rec_exit.lst", "two_pairs.lst",
                           "guarded_choice.lst", "race.lst", "runtime_star.lst", "pingpong.lst"}) {
    auto s = testing::load_system(name);
    auto s2 = parse_system(print_system(s), name);
    REQUIRE(s.participants.size() == s2.participants.size());
    for (const auto& [n, p] : s.participants) CHECK(local_eq(p, s2.participants.at(n)));
    CHECK(s.queues == s2.queues);
  }
  for (const char* name : {"buyer_seller.gt", "empty.gt", "informed_choice.gt"}) {
    auto g = testing::load_global(name);
    CHECK(global_eq(g, parse_global(print_global(g), name)));
  }
}

TEST_CASE("round trip: 1000 random behaviours and globals") {
  testing::Rng rng(4242);
  for (int i = 0; i < 1000; ++i) {
    System s;
    s.participants.emplace("P", testing::rand_behaviour(rng, 4));
    auto s2 = parse_system(print_system(s));
    CHECK(local_eq(s.participants.at("P"), s2.participants.at("P")));
  }
  for (int i = 0; i < 1000; ++i) {
    auto g = testing::rand_global(rng, 4);
    auto g2 = parse_global(print_global(g));
    CHECK(global_eq(g, g2));
  }
}
