#include "aoifl/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace aoifl {

std::string to_string(AggregationMode mode) {
  return mode == AggregationMode::conventional ? "conventional" : "age_weighted";
}

std::string to_string(AssignmentMode mode) {
  return mode == AssignmentMode::matching ? "matching" : "random";
}

std::string to_string(DatasetKind kind) {
  return kind == DatasetKind::synthetic ? "synthetic" : "mnist";
}

std::string to_string(FadingMode mode) {
  switch (mode) {
    case FadingMode::per_subchannel: return "per_subchannel";
    case FadingMode::per_device: return "per_device";
    case FadingMode::none: return "none";
  }
  return "per_subchannel";
}

SystemParams ExperimentConfig::system_params() const {
  SystemParams p;
  p.bandwidth_hz = wireless.bandwidth_hz;
  p.gradient_bits = wireless.gradient_bits;
  p.kappa = wireless.kappa;
  p.mu_cycles = wireless.mu_cycles;
  p.eta = wireless.eta;
  p.path_loss_exponent = wireless.path_loss_exponent;
  p.noise_w = noise_watts(wireless.noise_dbm, wireless.noise_per_hz, wireless.bandwidth_hz);
  p.subchannels = subchannels;
  p.radius_m = wireless.radius_m;
  return p;
}

namespace {

std::string at_line(const YAML::Node& node, const std::string& msg) {
  const auto mark = node.Mark();
  if (mark.is_null()) return msg;
  return "line " + std::to_string(mark.line + 1) + ": " + msg;
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& msg) {
  throw ConfigError(at_line(node, msg));
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
  }
}

std::size_t count(const YAML::Node& node, const std::string& key) {
  const auto v = scalar<long long>(node, key);
  if (v < 0) fail(node, "'" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

double real(const YAML::Node& node, const std::string& key) {
  const auto v = scalar<double>(node, key);
  if (!std::isfinite(v)) fail(node, "'" + key + "' must be finite");
  return v;
}

Range range(const YAML::Node& node, const std::string& key) {
  if (node.IsSequence()) {
    if (node.size() != 2) fail(node, "'" + key + "' range needs exactly two values");
    Range r{real(node[0], key), real(node[1], key)};
    if (r.lo > r.hi) fail(node, "'" + key + "' range is reversed");
    return r;
  }
  const double v = real(node, key);
  return {v, v};
}

using Handler = std::function<void(const YAML::Node&)>;

void walk(const YAML::Node& map, const std::string& section,
          const std::map<std::string, Handler>& handlers) {
  if (!map.IsMap()) fail(map, "'" + section + "' must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    auto it = handlers.find(key);
    if (it == handlers.end()) {
      fail(kv.first, "unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
    it->second(kv.second);
  }
}

struct Marks {
  std::map<std::string, YAML::Node> nodes;
  YAML::Node get(const std::string& key) const {
    auto it = nodes.find(key);
    return it == nodes.end() ? YAML::Node() : it->second;
  }
};

void check(bool ok, const Marks& marks, const std::string& key, const std::string& msg) {
  if (ok) return;
  const YAML::Node node = marks.get(key);
  if (node.IsDefined() && !node.IsNull()) fail(node, msg);
  throw ConfigError(msg);
}

void validate_with(const ExperimentConfig& c, const Marks& m) {
  check(!c.seeds.empty(), m, "seeds", "'seeds' must list at least one seed");
  check(c.devices >= 1, m, "devices", "'devices' must be at least 1");
  check(c.subchannels >= 1, m, "subchannels", "'subchannels' must be at least 1");
  check(c.subchannels <= c.devices, m, "subchannels", "'subchannels' (K) must not exceed 'devices' (N)");
  check(c.rounds >= 1, m, "rounds", "'rounds' must be at least 1");
  check(c.learning_rate > 0.0, m, "learning_rate", "'learning_rate' must be positive");
  check(c.hidden >= 1, m, "model.hidden", "'model.hidden' must be at least 1");
  check(c.init_scale >= 0.0, m, "model.init_scale", "'model.init_scale' must be non-negative");

  const auto& d = c.dataset;
  check(d.classes >= 2, m, "dataset.classes", "'dataset.classes' must be at least 2");
  check(d.features >= 1, m, "dataset.features", "'dataset.features' must be at least 1");
  check(d.train_samples >= 1, m, "dataset.train_samples", "'dataset.train_samples' must be positive");
  check(d.test_samples >= 1, m, "dataset.test_samples", "'dataset.test_samples' must be positive");
  check(d.classes_per_device >= 1, m, "dataset.classes_per_device",
        "'dataset.classes_per_device' must be at least 1");
  check(c.devices * d.classes_per_device >= d.classes, m, "devices",
        "'devices' x 'dataset.classes_per_device' must cover every class");
  check(d.train_samples >= c.devices * d.classes_per_device, m, "dataset.train_samples",
        "'dataset.train_samples' too small for one sample per device class slot");
  check(d.separation >= 0.0, m, "dataset.separation", "'dataset.separation' must be non-negative");
  if (d.kind == DatasetKind::mnist) {
    check(!d.mnist_train_images.empty() && !d.mnist_train_labels.empty() &&
              !d.mnist_test_images.empty() && !d.mnist_test_labels.empty(),
          m, "dataset.kind", "mnist dataset needs train/test image and label paths");
  }

  const auto& w = c.wireless;
  auto positive = [&](double v, const std::string& key) {
    check(v > 0.0, m, "wireless." + key, "'wireless." + key + "' must be positive");
  };
  positive(w.bandwidth_hz, "bandwidth_hz");
  positive(w.gradient_bits, "gradient_bits");
  positive(w.kappa, "kappa");
  positive(w.mu_cycles, "mu_cycles");
  positive(w.eta, "eta");
  positive(w.path_loss_exponent, "path_loss_exponent");
  positive(w.cpu_hz.lo, "cpu_hz");
  positive(w.t_max_s.lo, "t_max_s");
  check(w.radius_m >= 0.0, m, "wireless.radius_m", "'wireless.radius_m' must be non-negative");
}

ExperimentConfig from_yaml(const YAML::Node& root) {
  ExperimentConfig c;
  Marks marks;
  if (!root.IsDefined() || root.IsNull()) return c;

  auto mark = [&](const std::string& key, const YAML::Node& n) { marks.nodes[key] = n; };
  auto enum_value = [&](const YAML::Node& n, const std::string& key,
                        const std::vector<std::string>& allowed) {
    const auto v = scalar<std::string>(n, key);
    for (const auto& a : allowed) {
      if (v == a) return v;
    }
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
    fail(n, "'" + key + "' must be one of " + list + ", got '" + v + "'");
  };

  std::map<std::string, Handler> model = {
      {"hidden", [&](const YAML::Node& n) { mark("model.hidden", n); c.hidden = count(n, "model.hidden"); }},
      {"init_scale", [&](const YAML::Node& n) { mark("model.init_scale", n); c.init_scale = real(n, "model.init_scale"); }},
  };

  auto& d = c.dataset;
  std::map<std::string, Handler> dataset = {
      {"kind", [&](const YAML::Node& n) {
         mark("dataset.kind", n);
         d.kind = enum_value(n, "dataset.kind", {"synthetic", "mnist"}) == "synthetic"
                      ? DatasetKind::synthetic : DatasetKind::mnist;
       }},
      {"classes", [&](const YAML::Node& n) { mark("dataset.classes", n); d.classes = count(n, "dataset.classes"); }},
      {"features", [&](const YAML::Node& n) { mark("dataset.features", n); d.features = count(n, "dataset.features"); }},
      {"train_samples", [&](const YAML::Node& n) { mark("dataset.train_samples", n); d.train_samples = count(n, "dataset.train_samples"); }},
      {"test_samples", [&](const YAML::Node& n) { mark("dataset.test_samples", n); d.test_samples = count(n, "dataset.test_samples"); }},
      {"separation", [&](const YAML::Node& n) { mark("dataset.separation", n); d.separation = real(n, "dataset.separation"); }},
      {"classes_per_device", [&](const YAML::Node& n) { mark("dataset.classes_per_device", n); d.classes_per_device = count(n, "dataset.classes_per_device"); }},
      {"mnist_train_images", [&](const YAML::Node& n) { d.mnist_train_images = scalar<std::string>(n, "dataset.mnist_train_images"); }},
      {"mnist_train_labels", [&](const YAML::Node& n) { d.mnist_train_labels = scalar<std::string>(n, "dataset.mnist_train_labels"); }},
      {"mnist_test_images", [&](const YAML::Node& n) { d.mnist_test_images = scalar<std::string>(n, "dataset.mnist_test_images"); }},
      {"mnist_test_labels", [&](const YAML::Node& n) { d.mnist_test_labels = scalar<std::string>(n, "dataset.mnist_test_labels"); }},
  };

  auto& w = c.wireless;
  auto real_field = [&](const std::string& key, double& target) {
    return Handler([&, key](const YAML::Node& n) { mark("wireless." + key, n); target = real(n, "wireless." + key); });
  };
  std::map<std::string, Handler> wireless = {
      {"ideal", [&](const YAML::Node& n) { w.ideal = scalar<bool>(n, "wireless.ideal"); }},
      {"bandwidth_hz", real_field("bandwidth_hz", w.bandwidth_hz)},
      {"gradient_bits", real_field("gradient_bits", w.gradient_bits)},
      {"kappa", real_field("kappa", w.kappa)},
      {"mu_cycles", real_field("mu_cycles", w.mu_cycles)},
      {"eta", real_field("eta", w.eta)},
      {"path_loss_exponent", real_field("path_loss_exponent", w.path_loss_exponent)},
      {"noise_dbm", real_field("noise_dbm", w.noise_dbm)},
      {"radius_m", real_field("radius_m", w.radius_m)},
      {"noise_per_hz", [&](const YAML::Node& n) { w.noise_per_hz = scalar<bool>(n, "wireless.noise_per_hz"); }},
      {"fading", [&](const YAML::Node& n) {
         const auto v = enum_value(n, "wireless.fading", {"per_subchannel", "per_device", "none"});
         w.fading = v == "per_subchannel" ? FadingMode::per_subchannel
                    : v == "per_device"   ? FadingMode::per_device
                                          : FadingMode::none;
       }},
      {"cpu_hz", [&](const YAML::Node& n) { mark("wireless.cpu_hz", n); w.cpu_hz = range(n, "wireless.cpu_hz"); }},
      {"power_dbm", [&](const YAML::Node& n) { w.power_dbm = range(n, "wireless.power_dbm"); }},
      {"t_max_s", [&](const YAML::Node& n) { mark("wireless.t_max_s", n); w.t_max_s = range(n, "wireless.t_max_s"); }},
  };

  std::map<std::string, Handler> output = {
      {"dir", [&](const YAML::Node& n) { c.output_dir = scalar<std::string>(n, "output.dir"); }},
  };

  std::map<std::string, Handler> top = {
      {"seeds", [&](const YAML::Node& n) {
         mark("seeds", n);
         c.seeds.clear();
         if (n.IsSequence()) {
           for (const auto& s : n) c.seeds.push_back(scalar<std::uint64_t>(s, "seeds"));
         } else {
           c.seeds.push_back(scalar<std::uint64_t>(n, "seeds"));
         }
       }},
      {"devices", [&](const YAML::Node& n) { mark("devices", n); c.devices = count(n, "devices"); }},
      {"subchannels", [&](const YAML::Node& n) { mark("subchannels", n); c.subchannels = count(n, "subchannels"); }},
      {"rounds", [&](const YAML::Node& n) { mark("rounds", n); c.rounds = count(n, "rounds"); }},
      {"learning_rate", [&](const YAML::Node& n) { mark("learning_rate", n); c.learning_rate = real(n, "learning_rate"); }},
      {"aggregation", [&](const YAML::Node& n) {
         c.aggregation = enum_value(n, "aggregation", {"conventional", "age_weighted"}) == "conventional"
                             ? AggregationMode::conventional : AggregationMode::age_weighted;
       }},
      {"assignment", [&](const YAML::Node& n) {
         c.assignment = enum_value(n, "assignment", {"matching", "random"}) == "matching"
                            ? AssignmentMode::matching : AssignmentMode::random;
       }},
      {"allocation", [&](const YAML::Node& n) {
         c.allocation = parse_allocation_mode(enum_value(n, "allocation", {"kkt", "fra1", "fra2"}));
       }},
      {"age_exponent", [&](const YAML::Node& n) { c.age_exponent = real(n, "age_exponent"); }},
      {"train", [&](const YAML::Node& n) { c.train = scalar<bool>(n, "train"); }},
      {"model", [&](const YAML::Node& n) { walk(n, "model", model); }},
      {"dataset", [&](const YAML::Node& n) { walk(n, "dataset", dataset); }},
      {"wireless", [&](const YAML::Node& n) { walk(n, "wireless", wireless); }},
      {"output", [&](const YAML::Node& n) { walk(n, "output", output); }},
  };
  walk(root, "", top);
  validate_with(c, marks);
  return c;
}

}  // namespace

void validate(const ExperimentConfig& config) { validate_with(config, Marks{}); }

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return from_yaml(root);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  auto emit_range = [&](const Range& r) {
    if (r.lo == r.hi) {
      out << r.lo;
    } else {
      out << YAML::Flow << YAML::BeginSeq << r.lo << r.hi << YAML::EndSeq;
    }
  };
  out << YAML::BeginMap;
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << c.seeds;
  out << YAML::Key << "devices" << YAML::Value << c.devices;
  out << YAML::Key << "subchannels" << YAML::Value << c.subchannels;
  out << YAML::Key << "rounds" << YAML::Value << c.rounds;
  out << YAML::Key << "learning_rate" << YAML::Value << c.learning_rate;
  out << YAML::Key << "aggregation" << YAML::Value << to_string(c.aggregation);
  out << YAML::Key << "assignment" << YAML::Value << to_string(c.assignment);
  out << YAML::Key << "allocation" << YAML::Value << to_string(c.allocation);
  out << YAML::Key << "age_exponent" << YAML::Value << c.age_exponent;
  out << YAML::Key << "train" << YAML::Value << c.train;

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "hidden" << YAML::Value << c.hidden;
  out << YAML::Key << "init_scale" << YAML::Value << c.init_scale;
  out << YAML::EndMap;

  const auto& d = c.dataset;
  out << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(d.kind);
  out << YAML::Key << "classes" << YAML::Value << d.classes;
  out << YAML::Key << "features" << YAML::Value << d.features;
  out << YAML::Key << "train_samples" << YAML::Value << d.train_samples;
  out << YAML::Key << "test_samples" << YAML::Value << d.test_samples;
  out << YAML::Key << "separation" << YAML::Value << d.separation;
  out << YAML::Key << "classes_per_device" << YAML::Value << d.classes_per_device;
  if (d.kind == DatasetKind::mnist) {
    out << YAML::Key << "mnist_train_images" << YAML::Value << d.mnist_train_images;
    out << YAML::Key << "mnist_train_labels" << YAML::Value << d.mnist_train_labels;
    out << YAML::Key << "mnist_test_images" << YAML::Value << d.mnist_test_images;
    out << YAML::Key << "mnist_test_labels" << YAML::Value << d.mnist_test_labels;
  }
  out << YAML::EndMap;

  const auto& w = c.wireless;
  out << YAML::Key << "wireless" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ideal" << YAML::Value << w.ideal;
  out << YAML::Key << "bandwidth_hz" << YAML::Value << w.bandwidth_hz;
  out << YAML::Key << "gradient_bits" << YAML::Value << w.gradient_bits;
  out << YAML::Key << "kappa" << YAML::Value << w.kappa;
  out << YAML::Key << "mu_cycles" << YAML::Value << w.mu_cycles;
  out << YAML::Key << "eta" << YAML::Value << w.eta;
  out << YAML::Key << "path_loss_exponent" << YAML::Value << w.path_loss_exponent;
  out << YAML::Key << "noise_dbm" << YAML::Value << w.noise_dbm;
  out << YAML::Key << "noise_per_hz" << YAML::Value << w.noise_per_hz;
  out << YAML::Key << "radius_m" << YAML::Value << w.radius_m;
  out << YAML::Key << "fading" << YAML::Value << to_string(w.fading);
  out << YAML::Key << "cpu_hz" << YAML::Value;
  emit_range(w.cpu_hz);
  out << YAML::Key << "power_dbm" << YAML::Value;
  emit_range(w.power_dbm);
  out << YAML::Key << "t_max_s" << YAML::Value;
  emit_range(w.t_max_s);
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << c.output_dir;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace aoifl
