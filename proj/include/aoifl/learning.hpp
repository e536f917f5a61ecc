#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aoifl {

struct Sample {
  std::vector<double> features;
  std::size_t label = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Local shard of one device. beta() is the sample count.
struct DeviceDataset {
  std::vector<Sample> samples;

  std::size_t beta() const { return samples.size(); }
};

struct ModelDims {
  std::size_t inputs = 0;
  std::size_t hidden = 32;
  std::size_t classes = 0;

  std::size_t param_count() const {
    return inputs * hidden + hidden + hidden * classes + classes;
  }
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// One-hidden-layer ReLU perceptron with a softmax output.
///
/// The flat vector stores, in this order:
///   W1  hidden x inputs, row-major (row j = weights into hidden unit j)
///   b1  hidden
///   W2  classes x hidden, row-major
///   b2  classes
struct ModelParams {
  ModelDims dims;
  std::vector<double> values;

  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return dims.inputs * dims.hidden; }
  std::size_t w2_offset() const { return b1_offset() + dims.hidden; }
  std::size_t b2_offset() const { return w2_offset() + dims.hidden * dims.classes; }
};

/// Flat vector congruent with ModelParams::values.
struct Gradient {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

struct LossAndGradient {
  double loss = 0.0;
  Gradient grad;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Splits `dataset` across devices so that each shard holds at most
/// `classes_per_device` distinct labels. Class slots are laid out as
/// slot s = device * classes_per_device + i, carrying class perm[s mod C]
/// where perm is a seeded shuffle of the present labels; each class's samples
/// are shuffled and cut into near-equal chunks over its slots. Samples keep
/// their original relative order inside a shard.
std::vector<DeviceDataset> partition_noniid(std::span<const Sample> dataset,
                                            std::size_t n_devices,
                                            std::size_t classes_per_device,
                                            std::uint64_t seed);

/// Weights W1 ~ N(0, scale^2 / inputs), W2 ~ N(0, scale^2 / hidden), biases 0.
ModelParams init_model(const ModelDims& dims, std::uint64_t seed, double scale = 1.0);

/// Mean cross-entropy over the shard and its exact full-batch gradient.
LossAndGradient local_loss_and_gradient(const ModelParams& model,
                                        std::span<const Sample> data);
LossAndGradient local_loss_and_gradient(const ModelParams& model,
                                        const DeviceDataset& data);

/// Class probabilities for one input.
std::vector<double> predict_proba(const ModelParams& model, std::span<const double> x);

/// Mean cross-entropy and argmax accuracy. Ties go to the lowest class index.
Evaluation evaluate(const ModelParams& model, std::span<const Sample> dataset);

struct GaussianMixtureSpec {
  std::size_t classes = 10;
  std::size_t features = 20;
  std::size_t train_samples = 9000;
  std::size_t test_samples = 1000;
  /// Standard deviation of the class means; within-class noise is unit.
  double separation = 1.0;
};

struct ClassificationTask {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::size_t classes = 0;
  std::size_t features = 0;
};

/// Balanced C-class Gaussian mixture. Class means are drawn once from the
/// seed and shared by the train and test splits; labels cycle 0..C-1.
ClassificationTask make_gaussian_mixture(const GaussianMixtureSpec& spec,
                                         std::uint64_t seed);

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Pixels are scaled to [0, 1]. `limit` = 0 reads everything.
std::vector<Sample> load_idx(const std::string& images_path,
                             const std::string& labels_path, std::size_t limit = 0);

}  // namespace aoifl
