#include "aoifl/wireless.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aoifl {

ChannelState::ChannelState(std::size_t subchannels, std::size_t devices)
    : subchannels_(subchannels), devices_(devices), gains_(subchannels * devices, 0.0) {}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double noise_watts(double dbm, bool per_hz, double bandwidth_hz) {
  const double w = dbm_to_watts(dbm);
  return per_hz ? w * bandwidth_hz : w;
}

std::vector<double> deploy_devices(std::size_t n, double radius_m, Rng& rng) {
  if (n < 1) throw std::invalid_argument("deploy_devices: need at least one device");
  if (radius_m < 0.0) throw std::invalid_argument("deploy_devices: negative radius");
  std::vector<double> d(n);
  for (double& v : d) v = std::max(kMinDistanceM, radius_m * std::sqrt(rng.uniform()));
  return d;
}

double mean_gain(double distance_m, const SystemParams& params) {
  const double d = std::max(kMinDistanceM, distance_m);
  return params.eta * std::pow(d, -params.path_loss_exponent) / params.noise_w;
}

ChannelState sample_channels(std::span<const DeviceProfile> devices, const SystemParams& params,
                             Rng& rng, FadingMode fading) {
  const std::size_t k_count = params.subchannels;
  ChannelState state(k_count, devices.size());
  std::vector<double> shared(devices.size(), 1.0);
  if (fading == FadingMode::per_device) {
    for (double& g : shared) g = rng.exponential();
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t n = 0; n < devices.size(); ++n) {
      double g = 1.0;
      if (fading == FadingMode::per_subchannel) g = rng.exponential();
      if (fading == FadingMode::per_device) g = shared[n];
      // Exp(1) can return exactly 0; keep the gain strictly positive.
      g = std::max(g, 1e-300);
      state.at(k, n) = g * mean_gain(devices[n].distance_m, params);
    }
  }
  return state;
}

ComputeCost comp_time_energy(double tau, const DeviceProfile& device, const SystemParams& params) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("comp_time_energy: tau outside (0, 1]");
  if (device.beta == 0) throw std::invalid_argument("comp_time_energy: device holds no samples");
  const double cycles = params.mu_cycles * static_cast<double>(device.beta);
  const double freq = tau * device.cpu_hz;
  return {cycles / freq, params.kappa * cycles * freq * freq};
}

CommCost comm_time_energy(double alpha, const DeviceProfile& device, double gain,
                          const SystemParams& params) {
  if (!(alpha >= kMinAlpha && alpha <= 1.0)) {
    throw std::invalid_argument("comm_time_energy: alpha outside [1e-12, 1]");
  }
  if (!(gain > 0.0)) throw std::invalid_argument("comm_time_energy: gain must be positive");
  const double snr = alpha * device.power_w * gain;
  const double rate = params.bandwidth_hz * std::log1p(snr) / std::numbers::ln2;
  const double t = params.gradient_bits / rate;
  return {rate, t, alpha * device.power_w * t};
}

}  // namespace aoifl
