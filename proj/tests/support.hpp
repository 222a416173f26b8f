#ifndef CHOREO_TESTS_SUPPORT_HPP
#define CHOREO_TESTS_SUPPORT_HPP

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "choreo/ast.hpp"
#include "choreo/parser.hpp"

namespace testing {

using namespace choreo;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string corpus_path(const std::string& name) {
  return std::string(CHOREO_CORPUS_DIR) + "/" + name;
}

inline System load_system(const std::string& name) {
  return parse_system(read_file(corpus_path(name)), name);
}

inline GlobalPtr load_global(const std::string& name) {
  return parse_global(read_file(corpus_path(name)), name);
}

inline System buyer_seller() { return load_system("buyer_seller.lst"); }
inline GlobalPtr buyer_seller_global() { return load_global("buyer_seller.gt"); }

// ---------------------------------------------------------------------------
// Random term generators (deterministic given the engine state)

using Rng = std::mt19937_64;

inline int rand_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Channel rand_channel(Rng& rng, int n_channels = 4) {
  return Channel{"ch" + std::to_string(rand_int(rng, 0, n_channels - 1))};
}

inline Sort rand_sort(Rng& rng) {
  static const char* sorts[] = {"", "int", "bool", "price"};
  return Sort{sorts[rand_int(rng, 0, 3)]};
}

// Closed, syntactically valid behaviour. Guards within one choice are
// pairwise distinct; recursion variables are fresh and guarded.
inline BehaviourPtr rand_behaviour(Rng& rng, int depth, std::vector<std::string> bound = {},
                                   int* fresh = nullptr) {
  int own_fresh = 0;
  if (!fresh) fresh = &own_fresh;
  int pick = rand_int(rng, 0, depth <= 0 ? 1 : 9);
  if (pick <= 1) return bzero();
  if (pick <= 7) {
    bool internal = rand_int(rng, 0, 1) == 0;
    int width = rand_int(rng, 1, 3);
    std::vector<Branch> bs;
    std::set<std::string> used;
    for (int i = 0; i < width; ++i) {
      Channel a = rand_channel(rng);
      if (!used.insert(a.name).second) continue;
      bs.push_back(Branch{a, rand_sort(rng), rand_behaviour(rng, depth - 1, bound, fresh)});
    }
    return internal ? internal_choice(std::move(bs)) : external_choice(std::move(bs));
  }
  if (pick == 8 && !bound.empty()) {
    // a guarded use of a bound variable
    return bsend(rand_channel(rng), rand_sort(rng), bvar(bound[rand_int(rng, 0, int(bound.size()) - 1)]));
  }
  std::string x = "X" + std::to_string((*fresh)++);
  bound.push_back(x);
  auto body = rand_behaviour(rng, depth - 1, bound, fresh);
  return brec(x, bsend(rand_channel(rng), rand_sort(rng), body));
}

// Random global type; syntactically valid but with no well-formedness
// guarantees (choices, parallels and sequencing are unconstrained).
inline GlobalPtr rand_global(Rng& rng, int depth, std::vector<std::string> bound = {},
                             int* fresh = nullptr) {
  int own_fresh = 0;
  if (!fresh) fresh = &own_fresh;
  auto msg = [&](GlobalPtr cont) {
    int s = rand_int(rng, 0, 3);
    int r = rand_int(rng, 0, 3);
    if (r == s) r = (r + 1) % 4;
    return gmsg(Participant{"p" + std::to_string(s)}, Participant{"p" + std::to_string(r)},
                rand_channel(rng, 6), rand_sort(rng), std::move(cont));
  };
  int pick = rand_int(rng, 0, depth <= 0 ? 1 : 11);
  if (pick <= 1) return gend();
  if (pick <= 5) return msg(rand_global(rng, depth - 1, bound, fresh));
  if (pick <= 6) return gchoice(rand_global(rng, depth - 1, bound, fresh),
                                rand_global(rng, depth - 1, bound, fresh));
  if (pick <= 7) return gpar(rand_global(rng, depth - 1, bound, fresh),
                             rand_global(rng, depth - 1, bound, fresh));
  if (pick <= 8) return gseq(rand_global(rng, depth - 1, bound, fresh),
                             rand_global(rng, depth - 1, bound, fresh));
  if (pick <= 9 && !bound.empty())
    return msg(gvar(bound[rand_int(rng, 0, int(bound.size()) - 1)]));
  std::string x = "C" + std::to_string((*fresh)++);
  bound.push_back(x);
  return grec(x, msg(rand_global(rng, depth - 1, bound, fresh)));
}

// Random closed system (program): a handful of participants over a small
// channel pool; not necessarily typable.
inline System rand_system(Rng& rng, int max_parts = 4, int depth = 3) {
  System s;
  int n = rand_int(rng, 1, max_parts);
  for (int i = 0; i < n; ++i)
    s.participants.emplace("q" + std::to_string(i), rand_behaviour(rng, depth));
  return s;
}

}  // namespace testing

#endif
