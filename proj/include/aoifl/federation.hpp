#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "aoifl/learning.hpp"
#include "aoifl/rng.hpp"

namespace aoifl {

using DeviceId = std::size_t;
using GradientMap = std::map<DeviceId, Gradient>;
using WeightMap = std::map<DeviceId, double>;

/// Per-device age of information. Every entry is >= 1.
struct AoiVector {
  std::vector<std::size_t> ages;

  friend bool operator==(const AoiVector&, const AoiVector&) = default;
};

/// Ages before the first round: every device starts at 1.
AoiVector initial_aoi(std::size_t n_devices);

/// Uniform k-subset of {0..n-1} without replacement, returned sorted.
std::vector<DeviceId> select_random(std::size_t n_devices, std::size_t k, Rng& rng);

/// Devices in `prev_selected` reset to 1, all others age by one round.
AoiVector update_aoi(const AoiVector& aoi, std::span<const DeviceId> prev_selected);

/// w_n = A_n^p |S| / sum_{i in S} A_i^p. The weights of S sum to |S|.
/// `exponent` p defaults to 1.
WeightMap age_weights(const AoiVector& aoi, std::span<const DeviceId> selected,
                      double exponent = 1.0);

/// sum_{n in S} w_n beta_n grad_n / sum_{n in S} beta_n, with w = 1 when
/// `weights` is null. Summation runs in ascending device order.
Gradient aggregate(const GradientMap& grads, std::span<const std::size_t> betas,
                   std::span<const DeviceId> selected, const WeightMap* weights = nullptr);

/// w - lambda * grad.
ModelParams apply_update(const ModelParams& model, const Gradient& grad, double lambda);

/// aggregate(S, w) - aggregate(all devices, 1). `grads_all` must hold every
/// device 0..betas.size()-1.
Gradient selection_error(const GradientMap& grads_all, std::span<const std::size_t> betas,
                         std::span<const DeviceId> selected,
                         const WeightMap* weights = nullptr);

double weight_divergence(const ModelParams& w, const ModelParams& w_true);
double weight_divergence(std::span<const double> w, std::span<const double> w_true);

/// Upper bound on ||w(t+1) - w_T(t+1)|| after t = errors.size() rounds:
///   (1+lL)^t g0 + l ||sum_{i<=t} e_i|| + l^2 L sum_{j=1}^{t-1} (1+lL)^{j-1} ||sum_{i<=t-j} e_i||
double divergence_bound(std::span<const Gradient> errors, double lambda, double lipschitz,
                        double init_gap);

/// Same bound for every prefix length 1..errors.size(), in one pass.
std::vector<double> divergence_bound_series(std::span<const Gradient> errors, double lambda,
                                            double lipschitz, double init_gap);

using GradientFn = std::function<std::vector<double>(std::span<const double>)>;
using ParamPair = std::pair<std::vector<double>, std::vector<double>>;

/// max over pairs of ||grad(a) - grad(b)|| / ||a - b||. Identical pairs are
/// skipped; throws if no pair is usable. The result is a lower bound on the
/// true Lipschitz constant.
double estimate_lipschitz(std::span<const ParamPair> pairs, const GradientFn& grad);

/// Same, with grad = gradient of the global loss over all `shards`, weighted
/// by shard size.
double estimate_lipschitz(std::span<const ParamPair> pairs, const ModelDims& dims,
                          std::span<const DeviceDataset> shards);

/// Full-participation gradient sum_n beta_n grad f_n / sum_n beta_n.
Gradient global_gradient(const ModelParams& model, std::span<const DeviceDataset> shards);

/// Label histogram of device n, normalized by its sample count.
std::vector<double> device_distribution(const DeviceDataset& shard, std::size_t classes);

/// sum_{n in S} w_n beta_n P_n / sum_{n in S} beta_n, with w = 1 when
/// `weights` is null (the unweighted result sums to one).
std::vector<double> class_distribution(std::span<const DeviceDataset> shards,
                                       std::span<const DeviceId> selected, std::size_t classes,
                                       const WeightMap* weights = nullptr);

/// Closed-form E||g||^2 for a uniformly random s-subset:
///   (1 - s/N) sum_n beta_n^2 ||w_n grad_n - grad_F||^2 / (s (N-1) mean(beta)^2)
/// `grads_all` and `weights` are indexed by device.
double variance_formula(std::span<const Gradient> grads_all, std::span<const std::size_t> betas,
                        std::span<const double> weights, std::size_t s);

/// Exact mean of ||aggregate(S, w) - aggregate(N, 1)||^2 over all s-subsets.
/// Refuses when C(N, s) exceeds one million.
double variance_enumeration_oracle(std::span<const Gradient> grads_all,
                                   std::span<const std::size_t> betas,
                                   std::span<const double> weights, std::size_t s);

/// Shards whose class-c samples are whole copies of one shared pool per class.
struct SharedPoolFixture {
  std::vector<std::vector<Sample>> pools;  // pools[c] holds only label c
  std::vector<DeviceDataset> shards;
};

struct DecompositionSides {
  Gradient lhs;
  Gradient rhs;
};

/// lhs = selection error of S (weighted when `weights` is given);
/// rhs = sum_c [P_S(c) - P_N(c)] * mean gradient of -log p_c over pool c,
/// with P_S the weighted set distribution when `weights` is given.
/// Throws if a shard's class-c samples are not whole copies of pool c.
DecompositionSides error_decomposition_check(const ModelParams& model,
                                             const SharedPoolFixture& fixture,
                                             std::span<const DeviceId> selected,
                                             const WeightMap* weights = nullptr);

namespace vec {

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
std::vector<double> sub(std::span<const double> a, std::span<const double> b);

}  // namespace vec

}  // namespace aoifl
