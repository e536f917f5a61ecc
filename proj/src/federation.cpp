#include "aoifl/federation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aoifl {

namespace vec {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vec::dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("vec::axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

std::vector<double> sub(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vec::sub: size mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace vec

namespace {

std::vector<DeviceId> sorted_unique(std::span<const DeviceId> ids) {
  std::vector<DeviceId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw std::invalid_argument("device set contains duplicates");
  }
  return out;
}

std::vector<DeviceId> all_devices(std::size_t n) {
  std::vector<DeviceId> ids(n);
  std::iota(ids.begin(), ids.end(), DeviceId{0});
  return ids;
}

}  // namespace

AoiVector initial_aoi(std::size_t n_devices) {
  return AoiVector{std::vector<std::size_t>(n_devices, 1)};
}

std::vector<DeviceId> select_random(std::size_t n_devices, std::size_t k, Rng& rng) {
  if (k < 1 || k > n_devices) {
    throw std::invalid_argument("select_random: k must lie in [1, n_devices]");
  }
  std::vector<DeviceId> pool = all_devices(n_devices);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(n_devices - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

AoiVector update_aoi(const AoiVector& aoi, std::span<const DeviceId> prev_selected) {
  AoiVector out = aoi;
  for (auto& a : out.ages) ++a;
  for (DeviceId n : prev_selected) {
    if (n >= out.ages.size()) throw std::out_of_range("update_aoi: device id out of range");
    out.ages[n] = 1;
  }
  return out;
}

WeightMap age_weights(const AoiVector& aoi, std::span<const DeviceId> selected,
                      double exponent) {
  if (selected.empty()) throw std::invalid_argument("age_weights: empty selection");
  const auto ids = sorted_unique(selected);
  double total = 0.0;
  for (DeviceId n : ids) {
    if (n >= aoi.ages.size()) throw std::out_of_range("age_weights: device id out of range");
    total += std::pow(static_cast<double>(aoi.ages[n]), exponent);
  }
  const double size = static_cast<double>(ids.size());
  WeightMap w;
  for (DeviceId n : ids) {
    w[n] = std::pow(static_cast<double>(aoi.ages[n]), exponent) * size / total;
  }
  return w;
}

Gradient aggregate(const GradientMap& grads, std::span<const std::size_t> betas,
                   std::span<const DeviceId> selected, const WeightMap* weights) {
  if (selected.empty()) throw std::invalid_argument("aggregate: empty selection");
  const auto ids = sorted_unique(selected);

  std::size_t dim = 0;
  double beta_sum = 0.0;
  for (DeviceId n : ids) {
    auto it = grads.find(n);
    if (it == grads.end()) throw std::invalid_argument("aggregate: missing gradient for device");
    if (n >= betas.size()) throw std::out_of_range("aggregate: no beta for device");
    if (dim == 0) dim = it->second.size();
    if (it->second.size() != dim) throw std::invalid_argument("aggregate: gradient size mismatch");
    beta_sum += static_cast<double>(betas[n]);
  }

  Gradient out{std::vector<double>(dim, 0.0)};
  for (DeviceId n : ids) {
    double w = 1.0;
    if (weights != nullptr) {
      auto wit = weights->find(n);
      if (wit == weights->end()) throw std::invalid_argument("aggregate: missing weight for device");
      w = wit->second;
    }
    vec::axpy(w * static_cast<double>(betas[n]), grads.at(n).values, out.values);
  }
  for (double& g : out.values) g /= beta_sum;
  return out;
}

ModelParams apply_update(const ModelParams& model, const Gradient& grad, double lambda) {
  if (grad.size() != model.values.size()) {
    throw std::invalid_argument("apply_update: gradient shape mismatch");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("apply_update: lambda must be positive");
  ModelParams out = model;
  vec::axpy(-lambda, grad.values, out.values);
  return out;
}

Gradient selection_error(const GradientMap& grads_all, std::span<const std::size_t> betas,
                         std::span<const DeviceId> selected, const WeightMap* weights) {
  Gradient part = aggregate(grads_all, betas, selected, weights);
  const auto everyone = all_devices(betas.size());
  const Gradient full = aggregate(grads_all, betas, everyone);
  return Gradient{vec::sub(part.values, full.values)};
}

double weight_divergence(std::span<const double> w, std::span<const double> w_true) {
  if (w.size() != w_true.size()) throw std::invalid_argument("weight_divergence: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = w[i] - w_true[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double weight_divergence(const ModelParams& w, const ModelParams& w_true) {
  if (!(w.dims == w_true.dims)) throw std::invalid_argument("weight_divergence: dims mismatch");
  return weight_divergence(std::span<const double>(w.values),
                           std::span<const double>(w_true.values));
}

std::vector<double> divergence_bound_series(std::span<const Gradient> errors, double lambda,
                                            double lipschitz, double init_gap) {
  if (errors.empty()) throw std::invalid_argument("divergence_bound: empty error history");
  if (!(lambda > 0.0) || !(lipschitz > 0.0)) {
    throw std::invalid_argument("divergence_bound: lambda and L must be positive");
  }
  const std::size_t dim = errors.front().size();
  // prefix_norm[m] = ||sum_{i<=m} e_i||, m = 1..T
  std::vector<double> prefix_norm(errors.size() + 1, 0.0);
  std::vector<double> running(dim, 0.0);
  for (std::size_t m = 0; m < errors.size(); ++m) {
    vec::axpy(1.0, errors[m].values, running);
    prefix_norm[m + 1] = vec::norm(running);
  }

  const double growth = 1.0 + lambda * lipschitz;
  std::vector<double> out(errors.size());
  for (std::size_t t = 1; t <= errors.size(); ++t) {
    double tail = 0.0;
    double factor = 1.0;  // (1+lL)^{j-1}
    for (std::size_t j = 1; j + 1 <= t; ++j) {
      tail += factor * prefix_norm[t - j];
      factor *= growth;
    }
    out[t - 1] = std::pow(growth, static_cast<double>(t)) * init_gap +
                 lambda * prefix_norm[t] + lambda * lambda * lipschitz * tail;
  }
  return out;
}

double divergence_bound(std::span<const Gradient> errors, double lambda, double lipschitz,
                        double init_gap) {
  return divergence_bound_series(errors, lambda, lipschitz, init_gap).back();
}

double estimate_lipschitz(std::span<const ParamPair> pairs, const GradientFn& grad) {
  double best = 0.0;
  bool any = false;
  for (const auto& [a, b] : pairs) {
    const double dw = weight_divergence(a, b);
    if (dw == 0.0) continue;
    const auto ga = grad(a);
    const auto gb = grad(b);
    best = std::max(best, weight_divergence(ga, gb) / dw);
    any = true;
  }
  if (!any) throw std::invalid_argument("estimate_lipschitz: need at least one distinct pair");
  return best;
}

Gradient global_gradient(const ModelParams& model, std::span<const DeviceDataset> shards) {
  GradientMap grads;
  std::vector<std::size_t> betas(shards.size());
  for (std::size_t n = 0; n < shards.size(); ++n) {
    grads[n] = local_loss_and_gradient(model, shards[n]).grad;
    betas[n] = shards[n].beta();
  }
  return aggregate(grads, betas, all_devices(shards.size()));
}

double estimate_lipschitz(std::span<const ParamPair> pairs, const ModelDims& dims,
                          std::span<const DeviceDataset> shards) {
  GradientFn fn = [&](std::span<const double> w) {
    ModelParams m{dims, std::vector<double>(w.begin(), w.end())};
    return global_gradient(m, shards).values;
  };
  return estimate_lipschitz(pairs, fn);
}

std::vector<double> device_distribution(const DeviceDataset& shard, std::size_t classes) {
  if (shard.samples.empty()) throw std::invalid_argument("device_distribution: empty shard");
  std::vector<double> p(classes, 0.0);
  for (const Sample& s : shard.samples) {
    if (s.label >= classes) throw std::out_of_range("device_distribution: label out of range");
    p[s.label] += 1.0;
  }
  for (double& v : p) v /= static_cast<double>(shard.beta());
  return p;
}

std::vector<double> class_distribution(std::span<const DeviceDataset> shards,
                                       std::span<const DeviceId> selected, std::size_t classes,
                                       const WeightMap* weights) {
  if (selected.empty()) throw std::invalid_argument("class_distribution: empty selection");
  const auto ids = sorted_unique(selected);
  std::vector<double> out(classes, 0.0);
  double beta_sum = 0.0;
  for (DeviceId n : ids) {
    if (n >= shards.size()) throw std::out_of_range("class_distribution: device id out of range");
    const double w = weights == nullptr ? 1.0 : weights->at(n);
    const double beta = static_cast<double>(shards[n].beta());
    const auto p = device_distribution(shards[n], classes);
    vec::axpy(w * beta, p, out);
    beta_sum += beta;
  }
  for (double& v : out) v /= beta_sum;
  return out;
}

double variance_formula(std::span<const Gradient> grads_all, std::span<const std::size_t> betas,
                        std::span<const double> weights, std::size_t s) {
  const std::size_t n = grads_all.size();
  if (n < 2) throw std::invalid_argument("variance_formula: need at least two devices");
  if (betas.size() != n || weights.size() != n) {
    throw std::invalid_argument("variance_formula: betas/weights must cover every device");
  }
  if (s < 1 || s > n) throw std::invalid_argument("variance_formula: s out of range");

  const std::size_t dim = grads_all.front().size();
  double beta_sum = 0.0;
  std::vector<double> full(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    vec::axpy(static_cast<double>(betas[i]), grads_all[i].values, full);
    beta_sum += static_cast<double>(betas[i]);
  }
  for (double& v : full) v /= beta_sum;

  double acc = 0.0;
  std::vector<double> diff(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) diff[k] = weights[i] * grads_all[i].values[k] - full[k];
    const double b = static_cast<double>(betas[i]);
    acc += b * b * vec::dot(diff, diff);
  }
  const double nn = static_cast<double>(n);
  const double ss = static_cast<double>(s);
  const double mean_beta = beta_sum / nn;
  return (1.0 - ss / nn) * acc / (ss * (nn - 1.0) * mean_beta * mean_beta);
}

double variance_enumeration_oracle(std::span<const Gradient> grads_all,
                                   std::span<const std::size_t> betas,
                                   std::span<const double> weights, std::size_t s) {
  const std::size_t n = grads_all.size();
  if (betas.size() != n || weights.size() != n) {
    throw std::invalid_argument("variance_enumeration_oracle: betas/weights must cover every device");
  }
  if (s < 1 || s > n) throw std::invalid_argument("variance_enumeration_oracle: s out of range");

  double subsets = 1.0;
  for (std::size_t i = 0; i < s; ++i) {
    subsets = subsets * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  if (subsets > 1e6) {
    throw std::invalid_argument("variance_enumeration_oracle: more than 1e6 subsets");
  }

  GradientMap grads;
  WeightMap wmap;
  for (std::size_t i = 0; i < n; ++i) {
    grads[i] = grads_all[i];
    wmap[i] = weights[i];
  }

  // Walk all s-combinations in lexicographic order.
  std::vector<DeviceId> comb(s);
  std::iota(comb.begin(), comb.end(), DeviceId{0});
  double total = 0.0;
  std::size_t count = 0;
  while (true) {
    const Gradient e = selection_error(grads, betas, comb, &wmap);
    total += vec::dot(e.values, e.values);
    ++count;
    std::size_t i = s;
    while (i > 0 && comb[i - 1] == n - s + (i - 1)) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < s; ++j) comb[j] = comb[j - 1] + 1;
  }
  return total / static_cast<double>(count);
}

namespace {

bool is_whole_copies(const std::vector<Sample>& samples, const std::vector<Sample>& pool) {
  if (pool.empty()) return samples.empty();
  if (samples.size() % pool.size() != 0) return false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] == pool[i % pool.size()])) return false;
  }
  return true;
}

}  // namespace

DecompositionSides error_decomposition_check(const ModelParams& model,
                                             const SharedPoolFixture& fixture,
                                             std::span<const DeviceId> selected,
                                             const WeightMap* weights) {
  const std::size_t classes = model.dims.classes;
  if (fixture.pools.size() != classes) {
    throw std::invalid_argument("error_decomposition_check: one pool per class required");
  }
  for (std::size_t c = 0; c < classes; ++c) {
    for (const Sample& s : fixture.pools[c]) {
      if (s.label != c) throw std::invalid_argument("error_decomposition_check: pool label mismatch");
    }
  }
  for (const auto& shard : fixture.shards) {
    std::vector<std::vector<Sample>> per_class(classes);
    for (const Sample& s : shard.samples) {
      if (s.label >= classes) throw std::invalid_argument("error_decomposition_check: bad label");
      per_class[s.label].push_back(s);
    }
    for (std::size_t c = 0; c < classes; ++c) {
      if (!per_class[c].empty() && !is_whole_copies(per_class[c], fixture.pools[c])) {
        throw std::invalid_argument(
            "error_decomposition_check: class samples are not drawn from the shared pool");
      }
    }
  }

  const std::size_t n = fixture.shards.size();
  GradientMap grads;
  std::vector<std::size_t> betas(n);
  for (std::size_t i = 0; i < n; ++i) {
    grads[i] = local_loss_and_gradient(model, fixture.shards[i]).grad;
    betas[i] = fixture.shards[i].beta();
  }

  DecompositionSides out;
  out.lhs = selection_error(grads, betas, selected, weights);

  const auto everyone = all_devices(n);
  const auto p_sel = class_distribution(fixture.shards, selected, classes, weights);
  const auto p_all = class_distribution(fixture.shards, everyone, classes);
  out.rhs.values.assign(model.values.size(), 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    const double coeff = p_sel[c] - p_all[c];
    if (coeff == 0.0 || fixture.pools[c].empty()) continue;
    const auto pooled = local_loss_and_gradient(model, std::span<const Sample>(fixture.pools[c]));
    vec::axpy(coeff, pooled.grad.values, out.rhs.values);
  }
  return out;
}

}  // namespace aoifl
