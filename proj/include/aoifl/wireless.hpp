#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aoifl/rng.hpp"

namespace aoifl {

struct DeviceProfile {
  std::size_t id = 0;
  double distance_m = 1.0;
  double cpu_hz = 1e9;
  double power_w = 0.01;
  std::size_t beta = 1;
  double t_max_s = 5.0;
};

struct SystemParams {
  double bandwidth_hz = 1e6;
  double gradient_bits = 10e6;
  double kappa = 1e-29;
  double mu_cycles = 1e6;
  double eta = 1.0;
  double path_loss_exponent = 3.76;
  double noise_w = 3.981071705534985e-21;  // -174 dBm
  std::size_t subchannels = 4;
  double radius_m = 200.0;
};

enum class FadingMode {
  per_subchannel,  // independent |g|^2 for every (k, n)
  per_device,      // one |g|^2 per device, shared by its sub-channels
  none,            // |g|^2 = 1
};

/// K x N matrix of normalized gains |h_{k,n}|^2, row-major by sub-channel.
class ChannelState {
 public:
  ChannelState() = default;
  ChannelState(std::size_t subchannels, std::size_t devices);

  std::size_t subchannels() const { return subchannels_; }
  std::size_t devices() const { return devices_; }
  double at(std::size_t k, std::size_t n) const { return gains_[k * devices_ + n]; }
  double& at(std::size_t k, std::size_t n) { return gains_[k * devices_ + n]; }

 private:
  std::size_t subchannels_ = 0;
  std::size_t devices_ = 0;
  std::vector<double> gains_;
};

struct ComputeCost {
  double time_s = 0.0;
  double energy_j = 0.0;
};

struct CommCost {
  double rate_bps = 0.0;
  double time_s = 0.0;
  double energy_j = 0.0;
};

inline constexpr double kMinDistanceM = 1.0;
inline constexpr double kMinAlpha = 1e-12;

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Noise power in watts. When `per_hz` is set, `dbm` is a density and is
/// multiplied by the sub-channel bandwidth.
double noise_watts(double dbm, bool per_hz, double bandwidth_hz);

/// Server-to-device distances for uniform placement in a disc of radius R:
/// d = R sqrt(U), clamped below at kMinDistanceM.
std::vector<double> deploy_devices(std::size_t n, double radius_m, Rng& rng);

/// |h_{k,n}|^2 = eta |g|^2 d_n^{-a} / sigma^2 with |g|^2 ~ Exp(1).
ChannelState sample_channels(std::span<const DeviceProfile> devices, const SystemParams& params,
                             Rng& rng, FadingMode fading = FadingMode::per_subchannel);

/// Mean gain eta d^{-a} / sigma^2 (no fading).
double mean_gain(double distance_m, const SystemParams& params);

/// T_cp = mu beta / (tau C), E_cp = kappa mu beta (tau C)^2. tau in (0, 1].
ComputeCost comp_time_energy(double tau, const DeviceProfile& device, const SystemParams& params);

/// R = B log2(1 + alpha P |h|^2), T_cm = D / R, E_cm = alpha P T_cm.
/// alpha in [kMinAlpha, 1].
CommCost comm_time_energy(double alpha, const DeviceProfile& device, double gain,
                          const SystemParams& params);

}  // namespace aoifl
