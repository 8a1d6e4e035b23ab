#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "arp/builder.hpp"
#include "arp/diagram.hpp"
#include "arp/instance.hpp"
#include "arp/search.hpp"

using namespace arp;

namespace {

Diagram built_diagram(const Instance& inst, BoundMemo& memo) {
  Diagram d;
  BuildConfig config;
  (void)build_initial(d, inst, memo, config);
  return d;
}

}  // namespace

TEST_CASE("search stays within its evaluation budget at every width") {
  // The width*(n-1) budget presumes the trie already holds the root legs,
  // which construction guarantees; searches must share the build memo.
  const Instance inst = generate(4, 1);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  const Diagram d = built_diagram(inst, memo);

  for (int omega : {1, 2, 5, 400}) {
    const auto before = eval.full_calls();
    const SearchResult res = embedded_search(d, omega, memo, 1);
    CHECK(res.b_calls == eval.full_calls() - before);
    CHECK(res.b_calls <= static_cast<std::int64_t>(omega) * (4 - 1));
    REQUIRE(res.found);
    CHECK_NOTHROW(validate_tour(inst, res.tour));
    CHECK(evaluate_tour(inst, res.tour, memo) == res.cost);
  }
}

TEST_CASE("width one performs a single guided dive") {
  const Instance inst = generate(5, 2);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  const Diagram d = built_diagram(inst, memo);

  const auto before = eval.full_calls();
  const SearchResult res = embedded_search(d, 1, memo, 1);
  CHECK(eval.full_calls() - before <= 4);
  CHECK(!res.exhaustive);  // wider layers exist, so something was cut
  if (res.found) CHECK_NOTHROW(validate_tour(inst, res.tour));
}

TEST_CASE("a single-chain diagram is searched exhaustively and exactly") {
  const Instance inst = generate(3, 4);
  Diagram d = build_structure(inst, 64);
  const std::vector<int> want{2, 1, 3};
  for (int layer = 1; layer <= 3; ++layer) {
    for (int id : std::vector<int>(d.layers[layer])) {
      if (d.nodes[id].label != want[layer - 1]) d.remove_node(id);
    }
  }
  filter(d);
  REQUIRE(d.alive_nodes() == 5);

  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  memo.trie.set_horizon(inst.tau_max, inst.t_max);
  const SearchResult res = embedded_search(d, 4, memo, 1);
  CHECK(res.exhaustive);
  REQUIRE(res.found);
  CHECK(res.tour == Tour{0, 2, 1, 3});
  CHECK(res.cost == evaluate_tour(inst, res.tour, memo));
}

TEST_CASE("an unclipped beam equals full enumeration of the diagram") {
  const Instance inst = generate(4, 3);
  TransferEvaluator build_eval(inst.bodies);
  BoundMemo build_memo(build_eval);
  const Diagram d = built_diagram(inst, build_memo);

  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  memo.trie.set_horizon(inst.tau_max, inst.t_max);
  const SearchResult res = embedded_search(d, 4096, memo, 1);
  CHECK(res.exhaustive);
  REQUIRE(res.found);

  TransferEvaluator oracle_eval(inst.bodies);
  BoundMemo oracle(oracle_eval);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& path : enumerate_paths(d)) {
    std::vector<int> sorted = path;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      continue;
    }
    Tour tour{0};
    tour.insert(tour.end(), path.begin(), path.end());
    best = std::min(best, evaluate_tour(inst, tour, oracle));
  }
  CHECK(res.cost == best);
  CHECK(evaluate_tour(inst, res.tour, memo) == res.cost);
}

TEST_CASE("every beam width is floored by the exhaustive search") {
  // Widening is not monotone: an extra survivor's children can displace a
  // narrow beam's lucky pick at the next layer (seed 5 exhibits this at
  // width 4). What does hold is that no truncation beats none at all.
  for (std::uint64_t seed : {1ull, 2ull, 5ull}) {
    const Instance inst = generate(5, seed);
    TransferEvaluator eval(inst.bodies);
    BoundMemo memo(eval);
    const Diagram d = built_diagram(inst, memo);

    const SearchResult full = embedded_search(d, 4096, memo, 1);
    REQUIRE(full.exhaustive);
    REQUIRE(full.found);
    for (int omega : {1, 2, 4, 8, 16, 32}) {
      const SearchResult res = embedded_search(d, omega, memo, 1);
      if (!res.found) continue;
      CHECK(res.cost >= full.cost);
      CHECK(evaluate_tour(inst, res.tour, memo) == res.cost);
    }
  }
}

TEST_CASE("searching a dead diagram reports an exhaustive miss") {
  const Instance inst = generate(3, 1);
  TransferEvaluator build_eval(inst.bodies);
  BoundMemo build_memo(build_eval);
  Diagram d = built_diagram(inst, build_memo);
  filter(d, 0.1);  // nothing costs this little
  CHECK(shortest_path_value(d) == std::numeric_limits<double>::infinity());

  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  const SearchResult res = embedded_search(d, 8, memo, 1);
  CHECK(res.exhaustive);
  CHECK(!res.found);
  CHECK(res.b_calls == 0);
  CHECK(std::isinf(res.cost));
}

TEST_CASE("a nonpositive width is rejected") {
  const Instance inst = generate(3, 1);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  Diagram d = build_structure(inst, 16);
  CHECK_THROWS_AS(embedded_search(d, 0, memo, 1), std::invalid_argument);
}
