#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "aoifl/wireless.hpp"

using namespace aoifl;

TEST_CASE("dBm conversions") {
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  CHECK(dbm_to_watts(10.0) == doctest::Approx(0.01));
  CHECK(watts_to_dbm(dbm_to_watts(-17.5)) == doctest::Approx(-17.5));
  CHECK(noise_watts(-174.0, false, 1e6) == doctest::Approx(std::pow(10.0, -20.4)).epsilon(1e-12));
  CHECK(noise_watts(-174.0, true, 1e6) == doctest::Approx(std::pow(10.0, -14.4)).epsilon(1e-12));
}

TEST_CASE("deployment") {
  Rng r0(1);
  for (double d : deploy_devices(20, 0.0, r0)) CHECK(d == kMinDistanceM);

  Rng a(5), b(5);
  CHECK(deploy_devices(10, 200, a) == deploy_devices(10, 200, b));

  Rng rng(2);
  const double R = 200.0;
  const auto d = deploy_devices(100000, R, rng);
  double m2 = 0;
  for (double x : d) {
    CHECK(x <= R);
    m2 += x * x;
  }
  m2 /= static_cast<double>(d.size());
  CHECK(std::abs(m2 - R * R / 2) <= 0.02 * R * R / 2);
}

TEST_CASE("mean gain by hand") {
  SystemParams p;
  p.eta = 1.0;
  p.path_loss_exponent = 3.76;
  p.noise_w = std::pow(10.0, -20.4);
  const double g = mean_gain(100.0, p);
  CHECK(std::log10(g) == doctest::Approx(12.88).epsilon(1e-12));
  SystemParams q = p;
  q.noise_w *= 2;
  CHECK(mean_gain(100.0, q) == doctest::Approx(g / 2).epsilon(1e-14));
}

TEST_CASE("sampled gains") {
  SystemParams p;
  p.noise_w = 1e-15;
  std::vector<DeviceProfile> devs(3);
  devs[0].distance_m = 50;
  devs[1].distance_m = 120;
  devs[2].distance_m = 180;

  SUBCASE("no fading gives the mean gain, doubling noise halves it") {
    Rng rng(1);
    const auto c = sample_channels(devs, p, rng, FadingMode::none);
    SystemParams q = p;
    q.noise_w *= 2;
    Rng rng2(1);
    const auto c2 = sample_channels(devs, q, rng2, FadingMode::none);
    for (std::size_t n = 0; n < 3; ++n) {
      CHECK(c.at(0, n) == doctest::Approx(mean_gain(devs[n].distance_m, p)));
      CHECK(c2.at(0, n) == doctest::Approx(c.at(0, n) / 2).epsilon(1e-14));
    }
  }
  SUBCASE("per-device fading is shared across sub-channels") {
    Rng rng(3);
    const auto c = sample_channels(devs, p, rng, FadingMode::per_device);
    for (std::size_t n = 0; n < 3; ++n) CHECK(c.at(0, n) == c.at(3, n));
  }
  SUBCASE("Rayleigh mean over 1e5 draws") {
    p.subchannels = 1;
    Rng rng(4);
    double sum = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) sum += sample_channels(devs, p, rng).at(0, 1);
    const double expect = mean_gain(devs[1].distance_m, p);
    CHECK(std::abs(sum / draws - expect) <= 0.02 * expect);
  }
  SUBCASE("shape and determinism") {
    Rng a(7), b(7);
    const auto ca = sample_channels(devs, p, a);
    const auto cb = sample_channels(devs, p, b);
    CHECK(ca.subchannels() == p.subchannels);
    CHECK(ca.devices() == 3);
    for (std::size_t k = 0; k < p.subchannels; ++k) {
      for (std::size_t n = 0; n < 3; ++n) CHECK(ca.at(k, n) == cb.at(k, n));
    }
    CHECK(ca.at(0, 0) != ca.at(1, 0));
  }
}

TEST_CASE("computation cost") {
  SystemParams p;
  p.mu_cycles = 1e6;
  p.kappa = 1e-29;
  DeviceProfile d;
  d.cpu_hz = 1e9;
  d.beta = 1000;  // mu beta = 1e9 cycles
  const auto full = comp_time_energy(1.0, d, p);
  CHECK(full.time_s == doctest::Approx(1.0));
  CHECK(full.energy_j == doctest::Approx(1e-2));
  const auto half = comp_time_energy(0.5, d, p);
  CHECK(half.time_s == doctest::Approx(2.0));
  CHECK(half.energy_j == doctest::Approx(full.energy_j / 4));
  CHECK_THROWS(comp_time_energy(0.0, d, p));
  CHECK_THROWS(comp_time_energy(1.5, d, p));
  d.beta = 0;
  CHECK_THROWS(comp_time_energy(1.0, d, p));
}

TEST_CASE("communication cost") {
  SystemParams p;
  p.bandwidth_hz = 1e6;
  p.gradient_bits = 1e6;
  DeviceProfile d;
  d.power_w = 0.5;
  const double gain = 2.0;  // alpha P gain = 1 at alpha = 1
  const auto c = comm_time_energy(1.0, d, gain, p);
  CHECK(c.rate_bps == doctest::Approx(1e6));
  CHECK(c.time_s == doctest::Approx(1.0));
  CHECK(c.energy_j == doctest::Approx(0.5));
  CHECK_THROWS(comm_time_energy(0.0, d, gain, p));
  CHECK_THROWS(comm_time_energy(kMinAlpha / 2, d, gain, p));
  CHECK(comm_time_energy(1e-9, d, gain, p).time_s > 1e8);
  double prev = 0;
  for (int i = 1; i <= 200; ++i) {
    const double e = comm_time_energy(i / 200.0, d, gain, p).energy_j;
    CHECK(e > prev);
    prev = e;
  }
}
