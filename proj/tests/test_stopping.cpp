#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "restop/errors.hpp"
#include "restop/stopping.hpp"
#include "support.hpp"

using namespace restop;
using restop::testing::random_token_runs;
using restop::testing::two_sequence_runs;

TEST_CASE("delta on the two-sequence trie") {
  auto trie = WeightedTrie::build(two_sequence_runs());

  auto quarter = delta(trie, 0.25);
  CHECK(quarter.value == doctest::Approx(0.25).epsilon(1e-12));
  // maximizer stops after one non-success observation
  CHECK(quarter.maximizer.continue_prefixes() == std::vector<std::vector<Token>>{{}});

  auto three_quarters = delta(trie, 0.75);
  CHECK(three_quarters.value == doctest::Approx(-0.25).epsilon(1e-12));

  auto zero = delta(trie, 0.0);
  CHECK(zero.value == trie.total_success_mass());
}

TEST_CASE("find_stopping_rule on the two-sequence trie") {
  auto trie = WeightedTrie::build(two_sequence_runs());
  auto fit = find_stopping_rule(trie, 0.01);
  CHECK(fit.stats.ratio == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.stats.expected_time == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.rule.continue_prefixes() == std::vector<std::vector<Token>>{{}});
  CHECK(fit.iterations > 0);
}

TEST_CASE("all-success trie hits the ratio bound") {
  DiscretizedRun run;
  run.tokens = {Token::success()};
  run.costs = {1.0};
  auto trie = WeightedTrie::build(std::vector<DiscretizedRun>{run, run});
  auto fit = find_stopping_rule(trie, 0.01);
  CHECK(fit.stats.q == doctest::Approx(1.0));
  CHECK(fit.stats.c == doctest::Approx(1.0));
  CHECK(fit.stats.expected_time == doctest::Approx(1.0));
}

TEST_CASE("zero success mass is rejected") {
  DiscretizedRun run;
  run.tokens = {Token::bucket(1)};
  run.costs = {1.0};
  auto trie = WeightedTrie::build(std::vector<DiscretizedRun>{run});
  CHECK_THROWS_AS(find_stopping_rule(trie, 0.01), SuccessUnreachable);
}

TEST_CASE("evaluate_rule playouts") {
  auto runs = two_sequence_runs();
  auto never_stop = FixedThresholdRule::unbounded();
  auto stats = evaluate_rule(never_stop, runs);
  CHECK(stats.q == doctest::Approx(0.5));
  CHECK(stats.c == doctest::Approx(2.0));
  CHECK(stats.expected_time == doctest::Approx(4.0));

  auto trie = WeightedTrie::build(runs);
  auto fit = find_stopping_rule(trie, 0.01);
  auto opt_stats = evaluate_rule(fit.rule, runs);
  CHECK(opt_stats.q == doctest::Approx(0.5));
  CHECK(opt_stats.c == doctest::Approx(1.0));
  CHECK(opt_stats.expected_time == doctest::Approx(2.0));

  DiscretizedRun s;
  s.tokens = {Token::success()};
  s.costs = {1.0};
  auto all_s = evaluate_rule(fit.rule, std::vector<DiscretizedRun>{s, s});
  CHECK(all_s.q == doctest::Approx(1.0));
  CHECK(all_s.c == doctest::Approx(1.0));
}

TEST_CASE("fixed threshold rules") {
  auto runs = two_sequence_runs();
  auto t1 = evaluate_rule(FixedThresholdRule(1), runs);
  CHECK(t1.q == doctest::Approx(0.5));
  CHECK(t1.c == doctest::Approx(1.0));
  auto t3 = evaluate_rule(FixedThresholdRule(3), runs);
  CHECK(t3.q == doctest::Approx(0.5));
  CHECK(t3.c == doctest::Approx(2.0));
  CHECK_THROWS_AS(FixedThresholdRule(0), std::invalid_argument);
}

TEST_CASE("brute force oracle on hand instances") {
  auto two = brute_force_optimal(two_sequence_runs());
  CHECK(two.r_star == doctest::Approx(0.5).epsilon(1e-12));

  DiscretizedRun s;
  s.tokens = {Token::success()};
  s.costs = {1.0};
  auto single = brute_force_optimal(std::vector<DiscretizedRun>{s});
  CHECK(single.r_star == doctest::Approx(1.0));

  DiscretizedRun p;
  p.tokens = {Token::bucket(1), Token::success()};
  p.costs = {1.0, 1.0};
  DiscretizedRun q;
  q.tokens = {Token::bucket(2), Token::bucket(1)};
  q.costs = {1.0, 1.0};
  auto pair = brute_force_optimal(std::vector<DiscretizedRun>{p, q});
  CHECK(pair.r_star == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // the maximizer continues only behind bucket 1
  auto prefixes = pair.tree.continue_prefixes();
  REQUIRE(prefixes.size() == 2);
  CHECK(prefixes[1] == std::vector<Token>{Token::bucket(1)});
}

TEST_CASE("weighted branching trie, worked by hand") {
  // three runs with masses .3/.3/.4: success behind bucket 1 at depth 2,
  // a dead branch behind bucket 1, and success behind bucket 2
  DiscretizedRun s1{{Token::bucket(1), Token::success()}, {1.0, 1.0}, "s1"};
  DiscretizedRun dead{{Token::bucket(1), Token::bucket(1)}, {1.0, 1.0}, "dead"};
  DiscretizedRun s2{{Token::bucket(2), Token::success()}, {1.0, 1.0}, "s2"};
  std::vector<DiscretizedRun> runs{s1, dead, s2};
  std::vector<double> weights{0.3, 0.3, 0.4};

  auto trie = WeightedTrie::build(runs, weights);
  CHECK(trie.total_success_mass() == doctest::Approx(0.7));

  // f(B1) = -.6r + max(0, .3 - .6r), f(B2) = .4 - .8r
  CHECK(delta(trie, 0.25).value == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(delta(trie, 0.5).value == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(delta(trie, 0.35).value == doctest::Approx(0.0).epsilon(1e-12));

  // continuing behind both buckets gives q=.7, c=2; the depth-2 dead node
  // adds nothing, so the tie resolves to the smaller tree
  auto oracle = brute_force_optimal(runs, weights);
  CHECK(oracle.r_star == doctest::Approx(0.35).epsilon(1e-12));
  auto prefixes = oracle.tree.continue_prefixes();
  REQUIRE(prefixes.size() == 3);
  CHECK(prefixes[1] == std::vector<Token>{Token::bucket(1)});
  CHECK(prefixes[2] == std::vector<Token>{Token::bucket(2)});

  auto fit = find_stopping_rule(trie, 1e-6);
  CHECK(fit.stats.ratio == doctest::Approx(0.35).epsilon(1e-9));
  CHECK(fit.stats.expected_time == doctest::Approx(1.0 / 0.35).epsilon(1e-9));
}

TEST_CASE("bisection matches the brute-force oracle") {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 120; ++trial) {
    auto runs = random_token_runs(rng);
    auto oracle = brute_force_optimal(runs);
    auto trie = WeightedTrie::build(runs);
    auto fit = find_stopping_rule(trie, 0.01);
    CHECK(fit.stats.ratio >= oracle.r_star / 1.01 - 1e-12);
    CHECK(fit.stats.ratio <= oracle.r_star + 1e-9);
  }
}

TEST_CASE("delta sign test and monotonicity") {
  RngStream rng(12, 0);
  for (int trial = 0; trial < 60; ++trial) {
    auto runs = random_token_runs(rng);
    auto oracle = brute_force_optimal(runs);
    auto trie = WeightedTrie::build(runs);

    CHECK(delta(trie, 0.0).value == trie.total_success_mass());
    if (oracle.r_star > 0) {
      CHECK(delta(trie, oracle.r_star * 0.9).value > 0.0);
      CHECK(delta(trie, oracle.r_star * 1.1).value <= 0.0);
    }

    double prev = std::numeric_limits<double>::infinity();
    for (int g = 0; g <= 20; ++g) {
      double r = double(g) / 20.0;
      double v = delta(trie, r).value;
      CHECK(v <= prev + 1e-12);
      prev = v;
      if (r >= oracle.r_star) CHECK(v <= 1e-12);
    }
  }
}

TEST_CASE("maximizer reproduces delta exactly") {
  RngStream rng(13, 0);
  for (int trial = 0; trial < 50; ++trial) {
    auto runs = random_token_runs(rng);
    auto trie = WeightedTrie::build(runs);
    double r = rng.next_double();
    auto dr = delta(trie, r);
    auto stats = evaluate_rule(dr.maximizer, runs);
    CHECK(stats.q - r * stats.c == doctest::Approx(dr.value).epsilon(1e-12));
    auto on_trie = stats_on_trie(trie, dr.maximizer);
    CHECK(on_trie.q == doctest::Approx(stats.q).epsilon(1e-12));
    CHECK(on_trie.c == doctest::Approx(stats.c).epsilon(1e-12));
  }
}

TEST_CASE("no rule beats r_star on its own data") {
  RngStream rng(14, 0);
  for (int trial = 0; trial < 40; ++trial) {
    auto runs = random_token_runs(rng);
    auto oracle = brute_force_optimal(runs);
    // random threshold rules and random delta maximizers
    auto trie = WeightedTrie::build(runs);
    for (int j = 0; j < 4; ++j) {
      PolicyStats stats;
      if (j % 2 == 0) {
        stats = evaluate_rule(FixedThresholdRule(1 + (long long)rng.bounded(6)), runs);
      } else {
        stats = evaluate_rule(delta(trie, rng.next_double()).maximizer, runs);
      }
      CHECK(stats.q <= oracle.r_star * stats.c + 1e-9);
    }
  }
}

TEST_CASE("mass scaling leaves the maximizer unchanged") {
  RngStream rng(15, 0);
  for (int trial = 0; trial < 20; ++trial) {
    auto runs = random_token_runs(rng);
    auto trie = WeightedTrie::build(runs);
    auto scaled = trie;
    double factor = 0.25 + 3.0 * rng.next_double();
    for (int i = 0; i < scaled.size(); ++i) scaled.node_mut(i).mass *= factor;
    double r = rng.next_double();
    CHECK(delta(trie, r).maximizer.continue_prefixes() ==
          delta(scaled, r).maximizer.continue_prefixes());
  }
}

TEST_CASE("stopping tree serialization") {
  auto runs = two_sequence_runs();
  auto trie = WeightedTrie::build(runs);
  auto fit = find_stopping_rule(trie, 0.01);
  auto j = fit.rule.to_json();
  CHECK(j.at("unseen_action") == "stop");
  auto back = StoppingTree::from_json(j);
  CHECK(back.to_json() == j);

  // behavioral equality on random runs (default stop action)
  RngStream rng(16, 0);
  for (int trial = 0; trial < 20; ++trial) {
    auto probe_runs = random_token_runs(rng);
    auto probe_trie = WeightedTrie::build(probe_runs);
    auto rule = find_stopping_rule(probe_trie, 0.05).rule;
    auto round = StoppingTree::from_json(rule.to_json());
    auto others = random_token_runs(rng);
    auto s1 = evaluate_rule(rule, others);
    auto s2 = evaluate_rule(round, others);
    CHECK(s1.q == s2.q);
    CHECK(s1.c == s2.c);
  }
}

TEST_CASE("sub-unit costs widen the bisection bracket") {
  // per-step cost 0.5 pushes the best ratio above 1
  DiscretizedRun cheap_success;
  cheap_success.tokens = {Token::success()};
  cheap_success.costs = {0.5};
  DiscretizedRun cheap_fail;
  cheap_fail.tokens = {Token::bucket(1), Token::bucket(1)};
  cheap_fail.costs = {0.5, 0.5};
  std::vector<DiscretizedRun> runs{cheap_success, cheap_fail};
  auto trie = WeightedTrie::build(runs);
  CHECK(trie.min_step_cost() == 0.5);
  auto fit = find_stopping_rule(trie, 0.001);
  // optimal rule stops after one observation: q = 1/2, c = 1/2, ratio 1
  CHECK(fit.stats.ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.stats.expected_time == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("node limit guards the enumeration") {
  RngStream rng(17, 0);
  auto runs = random_token_runs(rng);
  CHECK_THROWS_AS(brute_force_optimal(runs, {}, 1), std::invalid_argument);
}
