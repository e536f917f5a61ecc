#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "aoifl/kkt.hpp"
#include "instances.hpp"

using namespace aoifl;
using aoifl::testing::random_instance;

namespace {

// C = 1 GHz, mu beta = 1e9, P |h|^2 = 1, B = D = 1e6: mu beta / C = 1 s and
// D upsilon1 = 1 s.
AllocationInstance unit_instance(double t_max) {
  AllocationInstance inst;
  inst.cpu_hz = 1e9;
  inst.power_w = 0.5;
  inst.beta = 1000;
  inst.gain = 2.0;
  inst.bandwidth_hz = 1e6;
  inst.gradient_bits = 1e6;
  inst.kappa = 1e-29;
  inst.mu_cycles = 1e6;
  inst.t_max_s = t_max;
  return inst;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("feasibility") {
  CHECK(feasible(unit_instance(2.0)));
  CHECK_FALSE(feasible(unit_instance(1.5)));
  CHECK(feasible(unit_instance(1e12)));
  CHECK(upsilon1(unit_instance(2.0)) == doctest::Approx(1e-6));
  auto bad = unit_instance(2.0);
  bad.beta = 0;
  CHECK_THROWS(feasible(bad));
}

TEST_CASE("Case 1 boundary") {
  const auto r = solve(unit_instance(2.0));
  REQUIRE(r.feasible);
  CHECK(r.case_id == 1);
  CHECK(r.tau == 1.0);
  CHECK(r.alpha * 0.5 * 2.0 == doctest::Approx(1.0));
  CHECK(r.e_cp == doctest::Approx(1e-2));
  CHECK(r.e_cm == doctest::Approx(0.5));
  CHECK(r.t_cp + r.t_cm == doctest::Approx(2.0));
  const auto o = oracle(unit_instance(2.0));
  CHECK(rel(r.e_total, o.e_total) <= 1e-9);
}

TEST_CASE("infeasible instance") {
  const auto r = solve(unit_instance(1.0));
  CHECK_FALSE(r.feasible);
  CHECK(r.case_id == 0);
  CHECK(std::isinf(r.e_total));
  CHECK_THROWS_AS(oracle(unit_instance(1.0)), std::invalid_argument);
  CHECK_FALSE(allocate(unit_instance(1.5), AllocationMode::fra2).feasible);
}

TEST_CASE("Case 3 with a heavy compute cost") {
  auto inst = unit_instance(2.2);
  inst.kappa = 1e-24;  // large kappa C^3 |h|^2
  const auto r = solve(inst);
  REQUIRE(r.feasible);
  CHECK(r.case_id == 3);
  CHECK(r.x2 == doctest::Approx(upsilon1(inst)).epsilon(1e-15));
  CHECK(r.x1 > 1.0);
  CHECK(r.t_cp + r.t_cm == doctest::Approx(inst.t_max_s).epsilon(1e-12));
  CHECK(rel(r.e_total, oracle(inst).e_total) <= 1e-6);
}

TEST_CASE("every case appears and matches the oracle") {
  Rng rng(11);
  int seen[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < 3000; ++i) {
    const auto inst = random_instance(rng, i % 50 == 0 ? 0.0 : testing::log_uniform(rng, 1e-6, 10));
    const auto r = solve(inst);
    REQUIRE(r.feasible);
    ++seen[r.case_id];
    const auto o = oracle(inst);
    CHECK(r.e_total <= o.e_total * (1 + 1e-4));
    CHECK(rel(r.e_total, o.e_total) <= 1e-4);
    CHECK(std::abs(r.t_cp + r.t_cm - inst.t_max_s) <= 1e-9 * inst.t_max_s);
    CHECK(r.tau <= 1.0);
    CHECK(r.alpha <= 1.0 + 1e-12);
  }
  for (int c = 1; c <= 4; ++c) CHECK(seen[c] > 0);
}

TEST_CASE("Case 4 root") {
  Rng rng(12);
  int found = 0;
  while (found < 1000) {
    const auto inst = random_instance(rng);
    const auto r = solve(inst);
    if (r.case_id != 4) continue;
    ++found;
    const auto [x1, x2] = case4_root(inst);
    CHECK(std::abs(stationarity_residual(inst, x1, x2)) <= 1e-9);
    CHECK(x2 > upsilon1(inst));
    CHECK(x2 < (inst.t_max_s - inst.full_compute_time()) / inst.gradient_bits);
    CHECK(rel(r.e_total, oracle(inst).e_total) <= 1e-4);
  }
}

TEST_CASE("case4_root outside Case 4") {
  CHECK_THROWS_AS(case4_root(unit_instance(1.0)), std::domain_error);
  auto c3 = unit_instance(2.2);
  c3.kappa = 1e-24;
  CHECK_THROWS_AS(case4_root(c3), std::domain_error);
}

TEST_CASE("oracle self-consistency and boundary") {
  const auto b = oracle(unit_instance(2.0));
  CHECK(b.x2 == doctest::Approx(upsilon1(unit_instance(2.0))));
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const auto inst = random_instance(rng);
    const double coarse = oracle(inst, 1000).e_total;
    const double fine = oracle(inst, 10000).e_total;
    CHECK(rel(coarse, fine) <= 1e-5);
  }
}

TEST_CASE("fixed baselines") {
  Rng rng(14);
  int fra1_feasible = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto inst = random_instance(rng);
    const auto s = solve(inst);
    const auto o = oracle(inst);
    const auto f1 = allocate(inst, AllocationMode::fra1);
    const auto f2 = allocate(inst, AllocationMode::fra2);
    CHECK(f1.tau == 0.5);
    CHECK(f2.alpha == 1.0);
    if (f1.feasible) {
      ++fra1_feasible;
      CHECK(f2.feasible);
      CHECK(s.e_total <= f1.e_total * (1 + 1e-12));
      CHECK(o.e_total <= f1.e_total * (1 + 1e-12));
    }
    if (f2.feasible) {
      CHECK(s.e_total <= f2.e_total * (1 + 1e-12));
      CHECK(o.e_total <= f2.e_total * (1 + 1e-12));
    }
  }
  CHECK(fra1_feasible > 0);
}

TEST_CASE("result fields agree with the wireless cost model") {
  Rng rng(15);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng);
    const auto r = solve(inst);
    SystemParams p;
    p.bandwidth_hz = inst.bandwidth_hz;
    p.gradient_bits = inst.gradient_bits;
    p.kappa = inst.kappa;
    p.mu_cycles = inst.mu_cycles;
    DeviceProfile d;
    d.cpu_hz = inst.cpu_hz;
    d.power_w = inst.power_w;
    d.beta = static_cast<std::size_t>(inst.beta);
    const auto cp = comp_time_energy(r.tau, d, p);
    const auto cm = comm_time_energy(r.alpha, d, inst.gain, p);
    CHECK(rel(cp.time_s, r.t_cp) <= 1e-9);
    CHECK(rel(cp.energy_j, r.e_cp) <= 1e-9);
    CHECK(rel(cm.time_s, r.t_cm) <= 1e-6);
    CHECK(rel(cm.energy_j, r.e_cm) <= 1e-6);
  }
}

TEST_CASE("mode names") {
  CHECK(parse_allocation_mode("fra1") == AllocationMode::fra1);
  CHECK(to_string(AllocationMode::kkt) == "kkt");
  CHECK_THROWS(parse_allocation_mode("fra3"));
}
