#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "aoifl/matching.hpp"

using namespace aoifl;

namespace {

const PairEnergy X = std::nullopt;

EnergyTable random_table(std::size_t k, std::size_t n, double infeasible_rate, Rng& rng) {
  EnergyTable t(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.uniform() >= infeasible_rate) t.set(i, j, 0.01 + rng.uniform());
    }
  }
  return t;
}

}  // namespace

TEST_CASE("pair ordering") {
  CHECK(strictly_better(1.0, 2.0));
  CHECK_FALSE(strictly_better(2.0, 2.0));
  CHECK(strictly_better(1e300, X));
  CHECK_FALSE(strictly_better(X, X));
  CHECK_FALSE(strictly_better(X, 1.0));
  CHECK(not_worse(2.0, 2.0));
  CHECK(not_worse(X, X));
  CHECK_FALSE(not_worse(X, 5.0));
}

TEST_CASE("swap") {
  const Matching m{{2, 0, 1}};
  CHECK(swap(m, 1, 1) == m);
  CHECK(swap(swap(m, 0, 2), 0, 2) == m);
  const auto s = swap(m, 0, 2);
  CHECK(s.channel_of == std::vector<std::size_t>{1, 0, 2});
  CHECK(s.is_valid());
  CHECK(s.size() == m.size());
  CHECK_FALSE(Matching{{0, 0}}.is_valid());
}

TEST_CASE("the 2x2 example") {
  // rows = sub-channels, columns = devices
  const auto t = EnergyTable::from_rows({{1.0, 2.0}, {3.0, 1.0}});
  const Matching bad{{1, 0}};  // n1 -> k2 (2), n2 -> k1 (3)
  CHECK(total_cost(t, bad).energy == 5.0);
  CHECK(is_blocking_pair(t, bad, 0, 1));
  CHECK_FALSE(stability_check(t, bad));
  const auto run = run_matching_from(t, bad);
  CHECK(total_cost(t, run.matching).energy == 2.0);
  CHECK(run.matching.channel_of == std::vector<std::size_t>{0, 1});
  CHECK(stability_check(t, run.matching));
  CHECK(total_cost(t, exhaustive_matching(t)).energy == 2.0);
}

TEST_CASE("blocking pair edge cases") {
  const auto equal = EnergyTable::from_rows({{1.0, 1.0}, {1.0, 1.0}});
  CHECK_FALSE(is_blocking_pair(equal, Matching{{0, 1}}, 0, 1));
  const auto sentinel = EnergyTable::from_rows({{1.0, X}, {X, 5.0}});
  // Moving either device onto a sentinel entry never blocks.
  CHECK_FALSE(is_blocking_pair(sentinel, Matching{{0, 1}}, 0, 1));
  // One better, one unchanged: still blocking.
  const auto half = EnergyTable::from_rows({{2.0, 4.0}, {1.0, 4.0}});
  CHECK(is_blocking_pair(half, Matching{{0, 1}}, 0, 1));
  CHECK_FALSE(is_blocking_pair(half, Matching{{0, 1}}, 0, 0));
}

TEST_CASE("tiny tables") {
  const auto one = EnergyTable::from_rows({{3.0}});
  Rng rng(1);
  const auto run = run_matching(one, rng);
  CHECK(run.iterations == 1);
  CHECK(run.matching.channel_of == std::vector<std::size_t>{0});
  CHECK(stability_check(one, run.matching));
}

TEST_CASE("padding") {
  SUBCASE("virtual devices are zero-cost") {
    Rng rng(2);
    const auto t = random_table(4, 2, 0.0, rng);
    const auto p = t.padded();
    CHECK(p.is_square());
    CHECK(p.devices() == 4);
    CHECK(p.real_devices() == 2);
    for (std::size_t k = 0; k < 4; ++k) CHECK(*p.at(k, 3) == 0.0);
    const auto m = run_matching(p, rng).matching;
    double real_sum = 0;
    for (std::size_t n = 0; n < 2; ++n) real_sum += *p.at(m.channel_of[n], n);
    CHECK(total_cost(p, m).energy == real_sum);
  }
  SUBCASE("all-sentinel sub-channel ends up on a virtual device") {
    const auto t = EnergyTable::from_rows({{1.0, 2.0}, {X, X}, {3.0, 1.0}});
    const auto p = t.padded();
    const auto best = exhaustive_matching(p);
    CHECK(best.channel_of[2] == 1);
    CHECK(total_cost(p, best).infeasible == 0);
    CHECK(total_cost(p, best).energy == 2.0);
  }
  SUBCASE("virtual sub-channels are infeasible for real devices") {
    const auto t = EnergyTable::from_rows({{1.0, 2.0, 3.0}});
    const auto p = t.padded();
    CHECK(p.channels() == 3);
    CHECK_FALSE(p.at(1, 0).has_value());
    const auto pr = prune(exhaustive_matching(p), p);
    CHECK(pr.size() == 1);
    CHECK(pr[0].device == 0);
  }
}

TEST_CASE("random 6x6 tables: monotone trace, stable, bounded cycles") {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto t = random_table(6, 6, trial % 3 == 0 ? 0.3 : 0.0, rng);
    const auto run = run_matching(t, rng);
    CHECK(stability_check(t, run.matching));
    for (std::size_t i = 1; i < run.trace.size(); ++i) CHECK(run.trace[i] < run.trace[i - 1]);
    CHECK(run.trace.back() <= run.trace.front());
    CHECK(run.iterations <= 10);
    CHECK(run.cycle_costs.size() == run.iterations);
    CHECK(run.cycle_costs.back() == run.trace.back());
    CHECK(total_cost(t, exhaustive_matching(t)) <= total_cost(t, run.matching));
  }
}

TEST_CASE("exhaustive search") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_table(5, 5, 0.2, rng);
    const auto best = total_cost(t, exhaustive_matching(t));
    Matching m{std::vector<std::size_t>(5)};
    std::iota(m.channel_of.begin(), m.channel_of.end(), std::size_t{0});
    do {
      CHECK(best <= total_cost(t, m));
    } while (std::next_permutation(m.channel_of.begin(), m.channel_of.end()));
  }
  CHECK_THROWS(exhaustive_matching(random_table(9, 9, 0.0, rng)));
  CHECK_THROWS(exhaustive_matching(random_table(3, 4, 0.0, rng)));
}

TEST_CASE("prune") {
  Rng rng(5);
  const auto clean = random_table(4, 4, 0.0, rng);
  const auto m = run_matching(clean, rng).matching;
  CHECK(prune(m, clean).size() == 4);

  EnergyTable none(3, 3);
  CHECK(prune(Matching{{0, 1, 2}}, none).empty());

  const auto mixed = EnergyTable::from_rows({{1.0, X, 2.0}, {X, X, 3.0}, {4.0, 5.0, X}});
  const Matching mm{{0, 1, 2}};
  std::size_t finite = 0;
  for (std::size_t n = 0; n < 3; ++n) finite += mixed.at(mm.channel_of[n], n).has_value();
  const auto pr = prune(mm, mixed);
  CHECK(pr.size() == finite);
  CHECK(pr[0].energy == 1.0);
}

TEST_CASE("build_table matches the standalone solver") {
  SystemParams p;
  p.subchannels = 3;
  p.noise_w = 1e-15;
  p.eta = 1e-3;
  std::vector<DeviceProfile> devs(4);
  for (std::size_t i = 0; i < 4; ++i) {
    devs[i].id = i;
    devs[i].distance_m = 60.0 + 50.0 * i;
    devs[i].beta = 900;
  }
  Rng rng(6);
  const auto ch = sample_channels(devs, p, rng);
  const std::vector<std::size_t> sel{1, 3};
  const auto t = build_table(sel, ch, devs, p);
  CHECK(t.channels() == 3);
  CHECK(t.devices() == 2);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t n = 0; n < 2; ++n) {
      const auto r = solve(make_instance(devs[sel[n]], ch.at(k, sel[n]), p));
      CHECK(t.at(k, n).has_value() == r.feasible);
      if (r.feasible) CHECK(*t.at(k, n) == r.e_total);
    }
  }
  for (auto& d : devs) d.t_max_s = 1e-3;
  const auto dead = build_table(sel, ch, devs, p);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t n = 0; n < 2; ++n) CHECK_FALSE(dead.at(k, n).has_value());
  }
}
