#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoifl/kkt.hpp"
#include "aoifl/learning.hpp"
#include "aoifl/wireless.hpp"

namespace aoifl {

enum class AggregationMode { conventional, age_weighted };
enum class AssignmentMode { matching, random };
enum class DatasetKind { synthetic, mnist };

std::string to_string(AggregationMode mode);
std::string to_string(AssignmentMode mode);
std::string to_string(DatasetKind kind);
std::string to_string(FadingMode mode);

/// Closed interval; lo == hi means a fixed value for every device.
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

struct DatasetConfig {
  DatasetKind kind = DatasetKind::synthetic;
  std::size_t classes = 10;
  std::size_t features = 20;
  std::size_t train_samples = 9000;
  std::size_t test_samples = 1000;
  double separation = 1.0;
  std::size_t classes_per_device = 1;
  std::string mnist_train_images;
  std::string mnist_train_labels;
  std::string mnist_test_images;
  std::string mnist_test_labels;

  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct WirelessConfig {
  /// Skip the radio model: every candidate takes part.
  bool ideal = false;
  double bandwidth_hz = 1e6;
  double gradient_bits = 10e6;
  double kappa = 1e-29;
  double mu_cycles = 1e6;
  double eta = 1.0;
  double path_loss_exponent = 3.76;
  double noise_dbm = -174.0;
  /// Read noise_dbm as dBm/Hz and scale by the bandwidth.
  bool noise_per_hz = false;
  double radius_m = 200.0;
  FadingMode fading = FadingMode::per_subchannel;
  Range cpu_hz{1e9, 1e9};
  Range power_dbm{10.0, 10.0};
  Range t_max_s{5.0, 5.0};

  friend bool operator==(const WirelessConfig&, const WirelessConfig&) = default;
};

struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{1};
  std::size_t devices = 10;
  std::size_t subchannels = 4;
  std::size_t rounds = 100;
  double learning_rate = 0.01;
  AggregationMode aggregation = AggregationMode::age_weighted;
  AssignmentMode assignment = AssignmentMode::matching;
  AllocationMode allocation = AllocationMode::kkt;
  double age_exponent = 1.0;
  /// When false only the radio side runs (no gradients, no model updates).
  bool train = true;
  std::size_t hidden = 32;
  double init_scale = 1.0;
  DatasetConfig dataset;
  WirelessConfig wireless;
  std::string output_dir = "out";

  SystemParams system_params() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Raised for unreadable, malformed or invalid configuration. what() carries
/// "line N: ..." when the offending entry has a position in the file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);
/// YAML text that parse_config maps back to an equal config.
std::string emit_config(const ExperimentConfig& config);
/// Throws ConfigError on violated invariants (K <= N, rounds >= 1, ...).
void validate(const ExperimentConfig& config);

}  // namespace aoifl
