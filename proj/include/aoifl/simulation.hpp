#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aoifl/config.hpp"
#include "aoifl/federation.hpp"
#include "aoifl/learning.hpp"
#include "aoifl/matching.hpp"
#include "aoifl/rng.hpp"
#include "aoifl/wireless.hpp"

namespace aoifl {

struct DeviceAllocation {
  std::size_t device = 0;
  std::size_t channel = 0;
  double tau = 0.0;
  double alpha = 0.0;
  double t_cp = 0.0;
  double t_cm = 0.0;
  double e_cp = 0.0;
  double e_cm = 0.0;
};

/// Everything logged for one round t.
///
/// train_loss is F(w(t), N) at the start of the round; test metrics and
/// divergence = ||w(t+1) - w_T(t+1)|| are taken after the update.
/// lipschitz_ratio is ||grad F(w(t)) - grad F(w_T(t))|| / ||w(t) - w_T(t)||,
/// or 0 when the two models coincide.
struct RoundRecord {
  std::size_t round = 0;
  std::vector<std::size_t> candidates;
  std::vector<std::size_t> selected;
  std::vector<std::size_t> aoi;
  std::vector<double> weights;  // aggregation weight per selected device
  std::vector<DeviceAllocation> allocations;
  double total_energy_j = 0.0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double divergence = 0.0;
  double error_norm = 0.0;
  double lipschitz_ratio = 0.0;
  std::size_t matching_iterations = 0;

  /// Energy per participating device, 0 when nobody took part.
  double energy_per_device_j() const {
    return selected.empty() ? 0.0 : total_energy_j / static_cast<double>(selected.size());
  }
};

/// Round-by-round state of one seeded run.
class Simulation {
 public:
  Simulation(const ExperimentConfig& config, std::uint64_t seed);

  /// sample channels -> draw K candidates -> energy table -> matching ->
  /// prune -> allocate -> local gradients -> aggregate -> update w and the
  /// full-participation shadow w_T -> advance AoI.
  RoundRecord run_round();

  std::size_t round() const { return round_; }
  const ModelParams& model() const { return model_; }
  const ModelParams& shadow() const { return shadow_; }
  const AoiVector& aoi() const { return aoi_; }
  const std::vector<DeviceDataset>& shards() const { return shards_; }
  const std::vector<DeviceProfile>& profiles() const { return profiles_; }
  const ClassificationTask& task() const { return task_; }
  /// e(t) = applied gradient - grad F(w(t), N), one entry per trained round.
  const std::vector<Gradient>& error_history() const { return errors_; }
  /// (w(t), w_T(t)) before each trained round's update.
  const std::vector<ParamPair>& trajectory() const { return trajectory_; }

 private:
  ExperimentConfig config_;
  SystemParams system_;
  ClassificationTask task_;
  std::vector<DeviceDataset> shards_;
  std::vector<std::size_t> betas_;
  std::vector<DeviceProfile> profiles_;
  ModelParams model_;
  ModelParams shadow_;
  AoiVector aoi_;
  Rng channel_rng_;
  Rng select_rng_;
  Rng match_rng_;
  std::size_t round_ = 0;
  std::vector<Gradient> errors_;
  std::vector<ParamPair> trajectory_;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<RoundRecord> records;
  /// max lipschitz_ratio over the run (0 if never positive).
  double lipschitz = 0.0;
  /// Divergence upper bound after each round, evaluated with `lipschitz`.
  std::vector<double> bound;
};

/// Means over every round of every seed. Energy per device divides the total
/// energy by the total number of participations.
struct ExperimentSummary {
  double mean_final_accuracy = 0.0;
  double mean_final_divergence = 0.0;
  double mean_survivors = 0.0;
  double mean_energy_per_round_j = 0.0;
  double mean_energy_per_device_j = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunResult> runs;
  ExperimentSummary summary;
};

RunResult run_seed(const ExperimentConfig& config, std::uint64_t seed);
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentSummary summarize(const std::vector<RunResult>& runs);

}  // namespace aoifl
