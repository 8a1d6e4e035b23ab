#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <vector>

#include "arp/instance.hpp"
#include "arp/memo.hpp"
#include "test_util.hpp"

using namespace arp;

namespace {

std::vector<int> random_tour(int n, TestRng& rng) {
  std::vector<int> tour{0};
  std::vector<int> rest;
  for (int k = 1; k <= n; ++k) rest.push_back(k);
  for (int k = n; k >= 1; --k) {
    const int pick = rng.uniform_int(0, k - 1);
    tour.push_back(rest[pick]);
    rest.erase(rest.begin() + pick);
  }
  return tour;
}

}  // namespace

TEST_CASE("trie runs one optimization per distinct prefix: 1e3 tours") {
  const Instance inst = generate(5, 17);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  memo.trie.set_horizon(inst.tau_max, inst.t_max);

  TestRng rng(123);
  std::set<std::vector<int>> prefixes;
  for (int round = 0; round < 1000; ++round) {
    std::vector<int> tour = random_tour(5, rng);
    // sometimes evaluate a strict prefix instead of the whole tour
    if (rng.uniform() < 0.3) {
      tour.resize(1 + static_cast<std::size_t>(rng.uniform_int(1, 5)));
    }
    (void)memo.trie.evaluate(tour, 1);
    for (std::size_t len = 2; len <= tour.size(); ++len) {
      prefixes.insert(std::vector<int>(tour.begin(), tour.begin() + len));
    }
    CHECK(eval.full_calls() == static_cast<std::int64_t>(prefixes.size()));
    CHECK(memo.trie.nodes() == static_cast<std::int64_t>(prefixes.size()));
  }
  // the workload must actually have exercised sharing
  CHECK(prefixes.size() < 1000);
}

TEST_CASE("trie results are reproducible and consistent with lookup") {
  const Instance inst = generate(4, 2);
  TransferEvaluator eval(inst.bodies);
  SolutionTrie trie(eval);
  trie.set_horizon(inst.tau_max, inst.t_max);

  const std::vector<int> tour{0, 2, 4, 1, 3};
  const auto v1 = trie.evaluate(tour, 1);
  const auto v2 = trie.evaluate(tour, 1);
  CHECK(v1.cost == v2.cost);
  CHECK(v1.est == v2.est);

  const SolutionTrie::Node* node = trie.lookup(tour);
  REQUIRE(node != nullptr);
  CHECK(node->cost == v1.cost);
  CHECK(node->est == v1.est);
  CHECK(trie.lookup({0, 3, 3}) == nullptr);
  CHECK(trie.lookup({1, 2}) == nullptr);

  // prefix costs are nondecreasing along the tour
  double prev = 0.0;
  for (std::size_t len = 2; len <= tour.size(); ++len) {
    const auto* p = trie.lookup({tour.begin(), tour.begin() + len});
    REQUIRE(p != nullptr);
    CHECK(p->cost >= prev);
    CHECK(p->cost == doctest::Approx(prev + p->leg_cost).epsilon(1e-12));
    prev = p->cost;
  }
}

TEST_CASE("an infeasible leg poisons the prefix without further calls") {
  const Instance inst = generate(3, 5);
  TransferEvaluator eval(inst.bodies);
  SolutionTrie trie(eval);
  trie.set_horizon(inst.tau_max, 0.5);  // half a day of travel: impossible

  const auto v = trie.evaluate({0, 1}, 1);
  CHECK(!v.feasible);
  CHECK(std::isinf(v.cost));

  const auto calls = eval.full_calls();
  const auto extended = trie.evaluate({0, 1, 2, 3}, 1);
  CHECK(!extended.feasible);
  CHECK(std::isinf(extended.cost));
  CHECK(eval.full_calls() == calls);  // children inherit the poison
  CHECK(trie.evaluate({0, 1}, 1).cost == v.cost);
}

TEST_CASE("interval tree matches a linear scan over 1e4 mixed operations") {
  BoundIntervalTree tree;
  struct Entry {
    double lo, hi, value;
  };
  std::vector<Entry> entries;
  TestRng rng(999);

  for (int op = 0; op < 10000; ++op) {
    // small discrete coordinate pool forces boundary ties
    const double a = rng.uniform_int(0, 40);
    const double b = rng.uniform_int(0, 40);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (rng.uniform() < 0.5) {
      const double value = rng.uniform(-10.0, 10.0);
      tree.insert(lo, hi, value);
      entries.push_back({lo, hi, value});
      CHECK(tree.size() == static_cast<std::int64_t>(entries.size()));
    } else {
      double got = 0.0;
      const bool found = tree.query(lo, hi, got);
      double want = -1e300;
      bool any = false;
      for (const Entry& e : entries) {
        if (e.lo <= lo && e.hi >= hi && e.value > want) {
          want = e.value;
          any = true;
        }
      }
      CHECK(found == any);
      if (any) CHECK(got == want);
    }
  }
}

TEST_CASE("interval tree save/load answers queries identically") {
  BoundIntervalTree tree;
  TestRng rng(12);
  for (int k = 0; k < 300; ++k) {
    const double lo = rng.uniform(0.0, 500.0);
    tree.insert(lo, lo + rng.uniform(0.0, 300.0), rng.uniform(0.0, 50.0));
  }
  std::string blob;
  tree.save(blob);
  BoundIntervalTree back;
  back.load(blob);
  CHECK(back.size() == tree.size());
  for (int k = 0; k < 500; ++k) {
    const double qlo = rng.uniform(0.0, 600.0);
    const double qhi = qlo + rng.uniform(0.0, 300.0);
    double a = 0.0, b = 0.0;
    const bool fa = tree.query(qlo, qhi, a);
    const bool fb = back.query(qlo, qhi, b);
    CHECK(fa == fb);
    if (fa) CHECK(a == b);
  }
}

TEST_CASE("trie save/load preserves every cached prefix bitwise") {
  const Instance inst = generate(4, 31);
  TransferEvaluator eval(inst.bodies);
  SolutionTrie trie(eval);
  trie.set_horizon(inst.tau_max, inst.t_max);
  TestRng rng(3);
  std::vector<std::vector<int>> tours;
  for (int k = 0; k < 12; ++k) tours.push_back(random_tour(4, rng));
  for (const auto& tour : tours) (void)trie.evaluate(tour, 1);

  std::string blob;
  trie.save(blob);

  TransferEvaluator eval2(inst.bodies);
  SolutionTrie back(eval2);
  back.load(blob);
  CHECK(back.nodes() == trie.nodes());

  const auto calls = eval2.full_calls();
  for (const auto& tour : tours) {
    for (std::size_t len = 2; len <= tour.size(); ++len) {
      const std::vector<int> prefix(tour.begin(), tour.begin() + len);
      const auto* a = trie.lookup(prefix);
      const auto* b = back.lookup(prefix);
      REQUIRE(a != nullptr);
      REQUIRE(b != nullptr);
      CHECK(a->cost == b->cost);
      CHECK(a->est == b->est);
      CHECK(a->leg_cost == b->leg_cost);
      CHECK(a->feasible == b->feasible);
    }
    (void)back.evaluate(tour, 1);
  }
  CHECK(eval2.full_calls() == calls);  // everything came from the snapshot
}

TEST_CASE("memo snapshot round-trips through a file") {
  const Instance inst = generate(3, 77);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  memo.trie.set_horizon(inst.tau_max, inst.t_max);
  (void)memo.trie.evaluate({0, 1, 2, 3}, 1);
  (void)memo.trie.evaluate({0, 3, 2, 1}, 1);
  memo.insert_bound(1, 2, 0.0, 100.0, 4.5);
  memo.insert_bound(1, 2, 50.0, 80.0, 6.25);
  memo.insert_bound(2, 3, 10.0, 40.0, 1.75);

  const std::string path = "memo_case.bin";
  memo.save(path);

  TransferEvaluator eval2(inst.bodies);
  BoundMemo back(eval2);
  back.load(path);
  std::remove(path.c_str());

  CHECK(back.trie.nodes() == memo.trie.nodes());
  const auto* node = back.trie.lookup({0, 1, 2, 3});
  REQUIRE(node != nullptr);
  CHECK(node->cost == memo.trie.lookup({0, 1, 2, 3})->cost);

  double got = 0.0;
  REQUIRE(back.query_bound(1, 2, 60.0, 70.0, got));
  CHECK(got == 6.25);
  REQUIRE(back.query_bound(1, 2, 20.0, 90.0, got));
  CHECK(got == 4.5);
  CHECK(!back.query_bound(3, 1, 10.0, 20.0, got));
  CHECK(!back.query_bound(2, 3, 0.0, 100.0, got));
}

TEST_CASE("query_bound returns the strongest containing window") {
  const Instance inst = generate(2, 1);
  TransferEvaluator eval(inst.bodies);
  BoundMemo memo(eval);
  memo.insert_bound(1, 2, 0.0, 100.0, 1.0);
  memo.insert_bound(1, 2, 10.0, 60.0, 3.0);
  memo.insert_bound(1, 2, 20.0, 40.0, 2.0);

  double got = 0.0;
  REQUIRE(memo.query_bound(1, 2, 25.0, 35.0, got));
  CHECK(got == 3.0);  // the tightest containing bound, not the narrowest
  REQUIRE(memo.query_bound(1, 2, 5.0, 90.0, got));
  CHECK(got == 1.0);
  REQUIRE(memo.query_bound(1, 2, 10.0, 60.0, got));
  CHECK(got == 3.0);  // exact boundary containment counts
  CHECK(!memo.query_bound(1, 2, -1.0, 5.0, got));
}
