#include <catch2/catch_amalgamated.hpp>

#include "choreo/linearity.hpp"
#include "choreo/parser.hpp"
#include "support.hpp"

using namespace choreo;

namespace {
Participant P(const std::string& n) { return Participant{n}; }
Channel C(const std::string& n) { return Channel{n}; }

EnvPtr chain(std::vector<std::tuple<std::string, std::string, std::string>> uses) {
  EnvPtr c = env_leaf();
  for (auto it = uses.rbegin(); it != uses.rend(); ++it)
    c = env_use(C(std::get<0>(*it)), P(std::get<1>(*it)), P(std::get<2>(*it)), c);
  return c;
}
}  // namespace

TEST_CASE("dep_edge clauses") {
  // II: same receiver
  auto c1 = chain({{"a", "s1", "r"}, {"b", "s2", "r"}});
  auto n1 = flatten_env(c1);
  CHECK(dep_edge(n1, 0, 1, DepKind::II));
  CHECK(!dep_edge(n1, 1, 0, DepKind::II));  // not an ancestor

  // IO: receiver of the first is the sender of the second
  auto c2 = chain({{"a", "s", "r"}, {"b", "r", "s2"}});
  auto n2 = flatten_env(c2);
  CHECK(dep_edge(n2, 0, 1, DepKind::IO));
  CHECK(!dep_edge(n2, 0, 1, DepKind::II));

  // OO under the runtime extension: a:*->r above a:s->r
  auto c3 = chain({{"a", "*", "r"}, {"a", "s", "r"}});
  auto n3 = flatten_env(c3);
  CHECK(dep_edge(n3, 0, 1, DepKind::OO));

  // OO proper: same channel, same sender
  auto c4 = chain({{"a", "s", "r1"}, {"a", "s", "r2"}});
  auto n4 = flatten_env(c4);
  CHECK(dep_edge(n4, 0, 1, DepKind::OO));

  // no OO across different channels or different non-star senders
  auto c5 = chain({{"a", "s1", "r"}, {"b", "s1", "r"}});
  CHECK(!dep_edge(flatten_env(c5), 0, 1, DepKind::OO));
  auto c6 = chain({{"a", "s1", "r"}, {"a", "s2", "r"}});
  CHECK(!dep_edge(flatten_env(c6), 0, 1, DepKind::OO));
}

TEST_CASE("input dependency through an IO chain ending in II") {
  // a:s'->r' -IO-> c1:r'->s -IO-> c2:s->r -II-> a:s->r
  auto c = chain({{"a", "sp", "rp"}, {"c1", "rp", "s"}, {"c2", "s", "r"}, {"a", "s", "r"}});
  auto nodes = flatten_env(c);
  CHECK(has_input_dep(nodes, 0, 3));
  // and the output chain a -IO-> c1 -IO-> a
  CHECK(has_output_dep(nodes, 0, 3));
}

TEST_CASE("direct II edge gives an input dependency") {
  auto c = chain({{"a", "s1", "r"}, {"a", "s2", "r"}});
  auto nodes = flatten_env(c);
  CHECK(has_input_dep(nodes, 0, 1));
}

TEST_CASE("two unrelated equal-channel nodes have no output dependency") {
  auto c = chain({{"a", "s1", "r1"}, {"a", "s2", "r2"}});
  auto nodes = flatten_env(c);
  CHECK(!has_output_dep(nodes, 0, 1));
  CHECK(!has_input_dep(nodes, 0, 1));
  CHECK(!is_linear(c));
}

TEST_CASE("single-node tree is linear") {
  CHECK(is_linear(env_node(C("a"), P("s"), P("r"))));
  CHECK(is_linear(env_leaf()));
}

TEST_CASE("unconnected repeated channel is not linear") {
  // a:s1->r1 . b:x->y . a:s2->r2 with no connecting participants
  auto c = chain({{"a", "s1", "r1"}, {"b", "x", "y"}, {"a", "s2", "r2"}});
  CHECK(!is_linear(c));
}

TEST_CASE("append_env") {
  auto c = env_node(C("a"), P("s"), P("r"));
  CHECK(leaf_count(append_env(env_leaf(), c)) == 1);
  auto nodes = flatten_env(append_env(env_leaf(), c));
  REQUIRE(nodes.size() == 2);
  CHECK(nodes[0].channel.name == "a");

  auto fork = env_fork(env_node(C("x"), P("s"), P("r")), env_node(C("y"), P("s"), P("r")));
  auto grafted = append_env(fork, c);
  // both leaves replaced
  int uses = 0;
  for (auto& n : flatten_env(grafted))
    if (n.kind == EnvKind::Use && n.channel.name == "a") uses++;
  CHECK(uses == 2);
}

TEST_CASE("leaf count multiplies under append (random trees)") {
  testing::Rng rng(314);
  auto rand_env = [&](auto&& self, int depth) -> EnvPtr {
    if (depth <= 0) return env_leaf();
    switch (testing::rand_int(rng, 0, 3)) {
      case 0: return env_leaf();
      case 1: return env_fork(self(self, depth - 1), self(self, depth - 1));
      case 2: return env_rec("X" + std::to_string(depth), self(self, depth - 1));
      default:
        return env_use(testing::rand_channel(rng), P("s" + std::to_string(testing::rand_int(rng, 0, 2))),
                       P("r" + std::to_string(testing::rand_int(rng, 0, 2))), self(self, depth - 1));
    }
  };
  for (int i = 0; i < 100; ++i) {
    auto c1 = rand_env(rand_env, 3);
    auto c2 = rand_env(rand_env, 3);
    CHECK(leaf_count(append_env(c1, c2)) == leaf_count(c1) * leaf_count(c2));
  }
}

TEST_CASE("append_linear") {
  auto lin = chain({{"a", "s", "r"}, {"b", "r", "s"}});
  auto r1 = append_linear(env_leaf(), lin);
  REQUIRE(r1);
  CHECK(leaf_count(*r1) == 1);

  // adding a use of a under an unrelated earlier use of a is undefined
  auto c = env_node(C("a"), P("s1"), P("r1"));
  CHECK(!append_linear(c, env_node(C("a"), P("s2"), P("r2"))));

  // a fresh channel can always be appended (linpref case: fresh channel)
  CHECK(append_linear(c, env_node(C("zz"), P("s2"), P("r2"))));
  CHECK(append_linear(c, env_node(C("zz"), Participant::star(), P("r2"))));
}

TEST_CASE("chan_g") {
  CHECK(chan_g(gend())->kind == EnvKind::Leaf);
  CHECK(chan_g(gvar("X"))->kind == EnvKind::Leaf);

  auto g1 = parse_global("B1->S1:t1<order>. S1->B1:p1<price>. end");
  auto env = chan_g(g1);
  auto nodes = flatten_env(env);
  REQUIRE(nodes.size() == 3);
  CHECK(nodes[0].channel.name == "t1");
  CHECK(nodes[0].sender.name == "B1");
  CHECK(nodes[0].receiver.name == "S1");
  CHECK(nodes[1].channel.name == "p1");
  CHECK(nodes[2].kind == EnvKind::Leaf);

  auto rec = parse_global("rec X . a->b:c. X");
  CHECK(chan_g(rec)->kind == EnvKind::RecMark);
  auto par = parse_global("a->b:c | d->e:f");
  CHECK(chan_g(par)->kind == EnvKind::Fork);
}

TEST_CASE("chan_g of sequencing concatenates leaf paths") {
  testing::Rng rng(315);
  auto path_channels = [](const EnvPtr& c) {
    // multiset of root-to-leaf channel strings
    std::vector<std::string> out;
    struct W {
      std::vector<std::string>& out;
      void go(const EnvPtr& n, std::string cur) {
        switch (n->kind) {
          case EnvKind::Leaf: out.push_back(cur); break;
          case EnvKind::Use: go(n->child1, cur + n->channel.name + ";"); break;
          case EnvKind::RecMark: go(n->child1, cur); break;
          case EnvKind::Fork:
            go(n->child1, cur);
            go(n->child2, cur);
            break;
        }
      }
    } w{out};
    w.go(c, "");
    std::sort(out.begin(), out.end());
    return out;
  };
  for (int i = 0; i < 50; ++i) {
    auto g1 = testing::rand_global(rng, 3);
    auto g2 = testing::rand_global(rng, 3);
    auto lhs = path_channels(chan_g(gseq(g1, g2)));
    // concatenation of every g1 path with every g2 path
    std::vector<std::string> rhs;
    for (const auto& p1 : path_channels(chan_g(g1)))
      for (const auto& p2 : path_channels(chan_g(g2))) rhs.push_back(p1 + p2);
    std::sort(rhs.begin(), rhs.end());
    CHECK(lhs == rhs);
  }
}

TEST_CASE("subtree_at_rec and unfold_env_at") {
  auto c = env_rec("X", env_node(C("a"), P("s"), P("r")));
  auto sub = subtree_at_rec(c, "X");
  REQUIRE(sub);
  CHECK((*sub)->kind == EnvKind::RecMark);
  CHECK(!subtree_at_rec(c, "Y"));

  // unfolding the mu over a single use stays linear: the copies are related
  // by a direct II edge and the same-sender OO edge
  auto u = unfold_env_at(c, "X");
  REQUIRE(u);
  CHECK(is_linear(*u));
  int uses = 0;
  for (auto& n : flatten_env(*u))
    if (n.kind == EnvKind::Use) uses++;
  CHECK(uses == 2);

  // nested marks: the deepest one wins
  auto nested = env_rec("X", env_rec("Y", env_node(C("a"), P("s"), P("r"))));
  auto suby = subtree_at_rec(nested, "Y");
  REQUIRE(suby);
  CHECK((*suby)->rec_var == "Y");
  auto subx = subtree_at_rec(nested, "X");
  REQUIRE(subx);
  CHECK((*subx)->rec_var == "X");
  // a second X mark deeper in the tree shadows the shallow one
  auto two_x = env_rec("X", env_fork(env_rec("X", env_node(C("b"), P("s"), P("r"))), env_leaf()));
  auto deepest = subtree_at_rec(two_x, "X");
  REQUIRE(deepest);
  CHECK((*deepest)->child1->kind == EnvKind::Use);
}

TEST_CASE("unfolding a cross-iteration race is rejected") {
  // channel a used with different endpoints in the two branches of a choice
  // under recursion: each iteration alone is linear (fork branches are not
  // ancestor-related) but iteration 2 below iteration 1 races on a
  auto c = env_rec("X", env_fork(env_node(C("a"), P("s"), P("r")),
                                 env_node(C("a"), P("s2"), P("r2"))));
  CHECK(is_linear(c));
  auto u = unfold_env_at(c, "X");
  REQUIRE(u);
  CHECK(!is_linear(*u));

  // with equal endpoints in both branches the unfolding stays linear
  auto ok = env_rec("X", env_fork(env_node(C("a"), P("s"), P("r")),
                                  env_node(C("a"), P("s"), P("r"))));
  auto u2 = unfold_env_at(ok, "X");
  REQUIRE(u2);
  CHECK(is_linear(*u2));
}

TEST_CASE("dep edges are monotone under unrelated growth") {
  testing::Rng rng(316);
  auto base = chain({{"a", "s", "r"}, {"b", "r", "s"}, {"a", "s", "r"}});
  auto nodes = flatten_env(base);
  REQUIRE(has_input_dep(nodes, 0, 2));
  REQUIRE(has_output_dep(nodes, 0, 2));
  // grafting more below keeps the edges between the original positions
  auto grown = append_env(base, env_node(C("zz"), P("x"), P("y")));
  auto nodes2 = flatten_env(grown);
  CHECK(has_input_dep(nodes2, 0, 2));
  CHECK(has_output_dep(nodes2, 0, 2));
}

TEST_CASE("env_dot renders nodes and dependencies") {
  auto c = chain({{"a", "s", "r"}, {"b", "r", "s"}, {"a", "s", "r"}});
  auto dot = env_dot(c);
  CHECK(dot.find("a: s->r") != std::string::npos);
  CHECK(dot.find("label=in") != std::string::npos);
  CHECK(dot.find("label=out") != std::string::npos);
}
