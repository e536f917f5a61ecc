#include "aoifl/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "aoifl/rng.hpp"

namespace aoifl {
namespace {

void check_dims(const ModelParams& model, const Sample& s) {
  if (s.features.size() != model.dims.inputs) {
    throw std::invalid_argument("feature dimension does not match model inputs");
  }
  if (s.label >= model.dims.classes) {
    throw std::invalid_argument("label out of range for model classes");
  }
}

// Forward pass for one sample; fills hidden pre-activations, activations and
// logits, returns log-sum-exp of the logits.
double forward(const ModelParams& m, std::span<const double> x, std::vector<double>& pre,
               std::vector<double>& act, std::vector<double>& logits) {
  const auto& d = m.dims;
  const double* w1 = m.values.data() + m.w1_offset();
  const double* b1 = m.values.data() + m.b1_offset();
  const double* w2 = m.values.data() + m.w2_offset();
  const double* b2 = m.values.data() + m.b2_offset();

  for (std::size_t j = 0; j < d.hidden; ++j) {
    double z = b1[j];
    const double* row = w1 + j * d.inputs;
    for (std::size_t i = 0; i < d.inputs; ++i) z += row[i] * x[i];
    pre[j] = z;
    act[j] = z > 0.0 ? z : 0.0;
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < d.classes; ++c) {
    double z = b2[c];
    const double* row = w2 + c * d.hidden;
    for (std::size_t j = 0; j < d.hidden; ++j) z += row[j] * act[j];
    logits[c] = z;
    peak = std::max(peak, z);
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < d.classes; ++c) sum += std::exp(logits[c] - peak);
  return peak + std::log(sum);
}

}  // namespace

std::vector<DeviceDataset> partition_noniid(std::span<const Sample> dataset,
                                            std::size_t n_devices,
                                            std::size_t classes_per_device,
                                            std::uint64_t seed) {
  if (dataset.empty()) throw std::invalid_argument("partition_noniid: empty dataset");
  if (classes_per_device < 1) {
    throw std::invalid_argument("partition_noniid: classes_per_device must be >= 1");
  }
  if (n_devices < 1) throw std::invalid_argument("partition_noniid: n_devices must be >= 1");

  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset[i].label].push_back(i);

  std::vector<std::size_t> labels;
  for (const auto& [label, _] : by_class) labels.push_back(label);
  const std::size_t n_classes = labels.size();
  const std::size_t per_device = std::min(classes_per_device, n_classes);
  if (n_devices * per_device < n_classes) {
    throw std::invalid_argument(
        "partition_noniid: n_devices * classes_per_device must cover every class");
  }

  Rng rng = Rng::derive(seed, 0x5041525449ULL);
  rng.shuffle(std::span<std::size_t>(labels));

  // slots_of[label] = list of devices holding a slot for that label.
  std::map<std::size_t, std::vector<std::size_t>> slots_of;
  for (std::size_t dev = 0; dev < n_devices; ++dev) {
    for (std::size_t i = 0; i < per_device; ++i) {
      const std::size_t s = dev * per_device + i;
      slots_of[labels[s % n_classes]].push_back(dev);
    }
  }

  std::vector<std::vector<std::size_t>> members(n_devices);
  for (auto& [label, idx] : by_class) {
    const auto& devs = slots_of[label];
    rng.shuffle(std::span<std::size_t>(idx));
    const std::size_t m = idx.size();
    const std::size_t r = devs.size();
    for (std::size_t j = 0; j < r; ++j) {
      const std::size_t lo = j * m / r;
      const std::size_t hi = (j + 1) * m / r;
      for (std::size_t k = lo; k < hi; ++k) members[devs[j]].push_back(idx[k]);
    }
  }

  std::vector<DeviceDataset> shards(n_devices);
  for (std::size_t dev = 0; dev < n_devices; ++dev) {
    auto& ids = members[dev];
    if (ids.empty()) {
      throw std::invalid_argument("partition_noniid: a device received no samples");
    }
    std::sort(ids.begin(), ids.end());
    shards[dev].samples.reserve(ids.size());
    for (std::size_t i : ids) shards[dev].samples.push_back(dataset[i]);
  }
  return shards;
}

ModelParams init_model(const ModelDims& dims, std::uint64_t seed, double scale) {
  if (dims.inputs == 0 || dims.hidden == 0 || dims.classes == 0) {
    throw std::invalid_argument("init_model: dimensions must be positive");
  }
  ModelParams m{dims, std::vector<double>(dims.param_count(), 0.0)};
  Rng rng = Rng::derive(seed, 0x494E4954ULL);
  const double s1 = scale / std::sqrt(static_cast<double>(dims.inputs));
  const double s2 = scale / std::sqrt(static_cast<double>(dims.hidden));
  for (std::size_t i = 0; i < dims.inputs * dims.hidden; ++i) {
    m.values[m.w1_offset() + i] = s1 * rng.normal();
  }
  for (std::size_t i = 0; i < dims.hidden * dims.classes; ++i) {
    m.values[m.w2_offset() + i] = s2 * rng.normal();
  }
  return m;
}

LossAndGradient local_loss_and_gradient(const ModelParams& model,
                                        std::span<const Sample> data) {
  if (data.empty()) throw std::invalid_argument("local_loss_and_gradient: empty shard");
  const auto& d = model.dims;
  if (model.values.size() != d.param_count()) {
    throw std::invalid_argument("local_loss_and_gradient: parameter vector size mismatch");
  }

  LossAndGradient out;
  out.grad.values.assign(d.param_count(), 0.0);
  double* gw1 = out.grad.values.data() + model.w1_offset();
  double* gb1 = out.grad.values.data() + model.b1_offset();
  double* gw2 = out.grad.values.data() + model.w2_offset();
  double* gb2 = out.grad.values.data() + model.b2_offset();
  const double* w2 = model.values.data() + model.w2_offset();

  std::vector<double> pre(d.hidden), act(d.hidden), logits(d.classes), dz(d.classes),
      dh(d.hidden);
  double total = 0.0;
  for (const Sample& s : data) {
    check_dims(model, s);
    const double lse = forward(model, s.features, pre, act, logits);
    total += lse - logits[s.label];

    for (std::size_t c = 0; c < d.classes; ++c) dz[c] = std::exp(logits[c] - lse);
    dz[s.label] -= 1.0;

    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < d.classes; ++c) {
      gb2[c] += dz[c];
      double* grow = gw2 + c * d.hidden;
      const double* wrow = w2 + c * d.hidden;
      for (std::size_t j = 0; j < d.hidden; ++j) {
        grow[j] += dz[c] * act[j];
        dh[j] += wrow[j] * dz[c];
      }
    }
    for (std::size_t j = 0; j < d.hidden; ++j) {
      if (pre[j] <= 0.0) continue;
      gb1[j] += dh[j];
      double* grow = gw1 + j * d.inputs;
      for (std::size_t i = 0; i < d.inputs; ++i) grow[i] += dh[j] * s.features[i];
    }
  }

  const double inv = 1.0 / static_cast<double>(data.size());
  out.loss = total * inv;
  for (double& g : out.grad.values) g *= inv;
  return out;
}

LossAndGradient local_loss_and_gradient(const ModelParams& model,
                                        const DeviceDataset& data) {
  return local_loss_and_gradient(model, std::span<const Sample>(data.samples));
}

std::vector<double> predict_proba(const ModelParams& model, std::span<const double> x) {
  if (x.size() != model.dims.inputs) {
    throw std::invalid_argument("predict_proba: feature dimension mismatch");
  }
  std::vector<double> pre(model.dims.hidden), act(model.dims.hidden),
      logits(model.dims.classes);
  const double lse = forward(model, x, pre, act, logits);
  for (double& z : logits) z = std::exp(z - lse);
  return logits;
}

Evaluation evaluate(const ModelParams& model, std::span<const Sample> dataset) {
  if (dataset.empty()) throw std::invalid_argument("evaluate: empty dataset");
  const auto& d = model.dims;
  std::vector<double> pre(d.hidden), act(d.hidden), logits(d.classes);
  double total = 0.0;
  std::size_t correct = 0;
  for (const Sample& s : dataset) {
    check_dims(model, s);
    const double lse = forward(model, s.features, pre, act, logits);
    total += lse - logits[s.label];
    // max_element returns the first maximum, i.e. the lowest class index.
    const auto best = static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (best == s.label) ++correct;
  }
  const double n = static_cast<double>(dataset.size());
  return {total / n, static_cast<double>(correct) / n};
}

ClassificationTask make_gaussian_mixture(const GaussianMixtureSpec& spec,
                                         std::uint64_t seed) {
  if (spec.classes < 2 || spec.features < 1) {
    throw std::invalid_argument("make_gaussian_mixture: need >= 2 classes and >= 1 feature");
  }
  Rng rng = Rng::derive(seed, 0x44415441ULL);
  std::vector<std::vector<double>> means(spec.classes, std::vector<double>(spec.features));
  for (auto& mu : means) {
    for (double& v : mu) v = spec.separation * rng.normal();
  }
  auto draw = [&](std::size_t count) {
    std::vector<Sample> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      Sample& s = out[i];
      s.label = i % spec.classes;
      s.features.resize(spec.features);
      for (std::size_t f = 0; f < spec.features; ++f) {
        s.features[f] = means[s.label][f] + rng.normal();
      }
    }
    return out;
  };
  ClassificationTask task;
  task.train = draw(spec.train_samples);
  task.test = draw(spec.test_samples);
  task.classes = spec.classes;
  task.features = spec.features;
  return task;
}

}  // namespace aoifl
