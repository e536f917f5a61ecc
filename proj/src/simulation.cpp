#include "aoifl/simulation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace aoifl {
namespace {

enum Stream : std::uint64_t {
  kDeploy = 2,
  kChannels = 3,
  kSelection = 4,
  kMatching = 5,
  kDeviceParams = 6,
};

ClassificationTask load_task(const ExperimentConfig& config, std::uint64_t seed) {
  const auto& d = config.dataset;
  if (d.kind == DatasetKind::synthetic) {
    GaussianMixtureSpec spec;
    spec.classes = d.classes;
    spec.features = d.features;
    spec.train_samples = d.train_samples;
    spec.test_samples = d.test_samples;
    spec.separation = d.separation;
    return make_gaussian_mixture(spec, seed);
  }
  ClassificationTask task;
  task.train = load_idx(d.mnist_train_images, d.mnist_train_labels, d.train_samples);
  task.test = load_idx(d.mnist_test_images, d.mnist_test_labels, d.test_samples);
  if (task.train.empty() || task.test.empty()) throw std::runtime_error("empty MNIST subset");
  task.features = task.train.front().features.size();
  task.classes = d.classes;
  return task;
}

double draw(const Range& r, Rng& rng) {
  return r.lo == r.hi ? r.lo : r.lo + (r.hi - r.lo) * rng.uniform();
}

}  // namespace

Simulation::Simulation(const ExperimentConfig& config, std::uint64_t seed)
    : config_(config),
      system_(config.system_params()),
      channel_rng_(Rng::derive(seed, kChannels)),
      select_rng_(Rng::derive(seed, kSelection)),
      match_rng_(Rng::derive(seed, kMatching)) {
  validate(config_);
  task_ = load_task(config_, seed);
  shards_ = partition_noniid(task_.train, config_.devices, config_.dataset.classes_per_device, seed);
  betas_.resize(shards_.size());
  for (std::size_t n = 0; n < shards_.size(); ++n) betas_[n] = shards_[n].beta();

  const ModelDims dims{task_.features, config_.hidden, task_.classes};
  model_ = init_model(dims, seed, config_.init_scale);
  shadow_ = model_;
  aoi_ = initial_aoi(config_.devices);

  Rng deploy_rng = Rng::derive(seed, kDeploy);
  const auto distances = deploy_devices(config_.devices, config_.wireless.radius_m, deploy_rng);
  Rng param_rng = Rng::derive(seed, kDeviceParams);
  profiles_.resize(config_.devices);
  for (std::size_t n = 0; n < config_.devices; ++n) {
    auto& p = profiles_[n];
    p.id = n;
    p.distance_m = distances[n];
    p.beta = betas_[n];
    p.cpu_hz = draw(config_.wireless.cpu_hz, param_rng);
    p.power_w = dbm_to_watts(draw(config_.wireless.power_dbm, param_rng));
    p.t_max_s = draw(config_.wireless.t_max_s, param_rng);
  }
}

RoundRecord Simulation::run_round() {
  RoundRecord rec;
  rec.round = ++round_;
  rec.aoi = aoi_.ages;
  rec.candidates = select_random(config_.devices, config_.subchannels, select_rng_);

  if (config_.wireless.ideal) {
    rec.selected = rec.candidates;
  } else {
    const ChannelState channels =
        sample_channels(profiles_, system_, channel_rng_, config_.wireless.fading);
    const EnergyTable table =
        build_table(rec.candidates, channels, profiles_, system_, config_.allocation).padded();
    Matching matching;
    if (config_.assignment == AssignmentMode::matching) {
      MatchingRun run = run_matching(table, match_rng_);
      matching = std::move(run.matching);
      rec.matching_iterations = run.iterations;
    } else {
      matching = random_matching(table.devices(), match_rng_);
    }
    for (const auto& pair : prune(matching, table)) {
      const std::size_t id = rec.candidates[pair.device];
      const auto inst = make_instance(profiles_[id], channels.at(pair.channel, id), system_);
      const AllocationResult r = allocate(inst, config_.allocation);
      rec.allocations.push_back(
          {id, pair.channel, r.tau, r.alpha, r.t_cp, r.t_cm, r.e_cp, r.e_cm});
      rec.selected.push_back(id);
    }
    std::sort(rec.allocations.begin(), rec.allocations.end(),
              [](const auto& a, const auto& b) { return a.device < b.device; });
    std::sort(rec.selected.begin(), rec.selected.end());
    for (const auto& a : rec.allocations) rec.total_energy_j += a.e_cp + a.e_cm;
  }

  WeightMap weights;
  if (!rec.selected.empty()) {
    if (config_.aggregation == AggregationMode::age_weighted) {
      weights = age_weights(aoi_, rec.selected, config_.age_exponent);
    } else {
      for (auto n : rec.selected) weights[n] = 1.0;
    }
    for (auto n : rec.selected) rec.weights.push_back(weights.at(n));
  }

  if (config_.train) {
    std::vector<DeviceId> everyone(config_.devices);
    std::iota(everyone.begin(), everyone.end(), DeviceId{0});

    GradientMap grads;
    GradientMap shadow_grads;
    double loss = 0.0;
    double beta_sum = 0.0;
    for (std::size_t n = 0; n < shards_.size(); ++n) {
      auto lg = local_loss_and_gradient(model_, shards_[n]);
      loss += static_cast<double>(betas_[n]) * lg.loss;
      beta_sum += static_cast<double>(betas_[n]);
      grads[n] = std::move(lg.grad);
      shadow_grads[n] = local_loss_and_gradient(shadow_, shards_[n]).grad;
    }
    rec.train_loss = loss / beta_sum;

    const Gradient full = aggregate(grads, betas_, everyone);
    const Gradient full_shadow = aggregate(shadow_grads, betas_, everyone);
    Gradient applied{std::vector<double>(full.size(), 0.0)};
    if (!rec.selected.empty()) {
      applied = config_.aggregation == AggregationMode::age_weighted
                    ? aggregate(grads, betas_, rec.selected, &weights)
                    : aggregate(grads, betas_, rec.selected);
    }
    Gradient error{vec::sub(applied.values, full.values)};
    rec.error_norm = vec::norm(error.values);

    const double gap = weight_divergence(model_, shadow_);
    if (gap > 0.0) rec.lipschitz_ratio = weight_divergence(full.values, full_shadow.values) / gap;

    trajectory_.emplace_back(model_.values, shadow_.values);
    errors_.push_back(std::move(error));

    if (!rec.selected.empty()) model_ = apply_update(model_, applied, config_.learning_rate);
    shadow_ = apply_update(shadow_, full_shadow, config_.learning_rate);

    rec.divergence = weight_divergence(model_, shadow_);
    const Evaluation eval = evaluate(model_, task_.test);
    rec.test_loss = eval.loss;
    rec.test_accuracy = eval.accuracy;
  }

  aoi_ = update_aoi(aoi_, rec.selected);
  return rec;
}

RunResult run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  Simulation sim(config, seed);
  RunResult out;
  out.seed = seed;
  for (std::size_t t = 0; t < config.rounds; ++t) out.records.push_back(sim.run_round());
  if (config.train) {
    for (const auto& r : out.records) out.lipschitz = std::max(out.lipschitz, r.lipschitz_ratio);
    if (out.lipschitz > 0.0) {
      out.bound = divergence_bound_series(sim.error_history(), config.learning_rate,
                                          out.lipschitz, 0.0);
    }
  }
  return out;
}

ExperimentSummary summarize(const std::vector<RunResult>& runs) {
  ExperimentSummary s;
  if (runs.empty()) return s;
  std::size_t rounds = 0;
  double survivors = 0.0;
  for (const auto& run : runs) {
    if (run.records.empty()) continue;
    s.mean_final_accuracy += run.records.back().test_accuracy;
    s.mean_final_divergence += run.records.back().divergence;
    for (const auto& r : run.records) {
      survivors += static_cast<double>(r.selected.size());
      s.mean_energy_per_round_j += r.total_energy_j;
      ++rounds;
    }
  }
  const double n = static_cast<double>(runs.size());
  s.mean_final_accuracy /= n;
  s.mean_final_divergence /= n;
  if (survivors > 0.0) s.mean_energy_per_device_j = s.mean_energy_per_round_j / survivors;
  if (rounds > 0) {
    s.mean_survivors = survivors / static_cast<double>(rounds);
    s.mean_energy_per_round_j /= static_cast<double>(rounds);
  }
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  ExperimentResult result;
  result.config = config;
  for (auto seed : config.seeds) result.runs.push_back(run_seed(config, seed));
  result.summary = summarize(result.runs);
  return result;
}

}  // namespace aoifl
