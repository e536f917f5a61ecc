#include "aoifl/figures.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "aoifl/matching.hpp"
#include "aoifl/metrics.hpp"
#include "aoifl/simulation.hpp"

namespace aoifl {
namespace {

std::vector<std::uint64_t> seed_list(std::size_t count) {
  std::vector<std::uint64_t> seeds(std::max<std::size_t>(count, 1));
  std::iota(seeds.begin(), seeds.end(), std::uint64_t{1});
  return seeds;
}

void apply_options(ExperimentConfig& c, const FigureOptions& o) {
  c.seeds = seed_list(o.seeds);
  if (o.rounds > 0) c.rounds = o.rounds;
}

// Mean of `field` at each round over all seeds.
std::vector<double> per_round_mean(const ExperimentResult& r,
                                   const std::function<double(const RoundRecord&)>& field) {
  const std::size_t rounds = r.config.rounds;
  std::vector<double> out(rounds, 0.0);
  for (const auto& run : r.runs) {
    for (std::size_t t = 0; t < rounds; ++t) out[t] += field(run.records[t]);
  }
  for (auto& v : out) v /= static_cast<double>(r.runs.size());
  return out;
}

std::string join(const std::string& dir, const std::string& file) {
  return dir.empty() ? file : dir + "/" + file;
}

std::vector<std::string> fig2(const std::string& dir, const FigureOptions& o) {
  std::vector<ExperimentResult> results;
  for (auto mode : {AggregationMode::conventional, AggregationMode::age_weighted}) {
    auto c = divergence_preset(mode);
    apply_options(c, o);
    results.push_back(run_experiment(c));
  }
  std::vector<std::vector<double>> cols;
  for (const auto& r : results) {
    cols.push_back(per_round_mean(r, [](const RoundRecord& x) { return x.divergence; }));
    cols.push_back(per_round_mean(r, [](const RoundRecord& x) { return x.test_accuracy; }));
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t t = 0; t < cols[0].size(); ++t) {
    rows.push_back({static_cast<double>(t + 1), cols[0][t], cols[2][t], cols[1][t], cols[3][t]});
  }
  const auto path = join(dir, "fig2.csv");
  write_csv(path,
            {"round", "divergence_conventional", "divergence_age_weighted", "accuracy_conventional",
             "accuracy_age_weighted"},
            rows);
  return {path};
}

std::vector<std::string> fig3(const std::string& dir, const FigureOptions& o) {
  std::vector<ExperimentResult> results;
  for (auto mode : {AssignmentMode::matching, AssignmentMode::random}) {
    auto c = availability_preset(mode);
    apply_options(c, o);
    results.push_back(run_experiment(c));
  }
  std::vector<std::vector<double>> cols;
  for (const auto& r : results) {
    cols.push_back(per_round_mean(
        r, [](const RoundRecord& x) { return static_cast<double>(x.selected.size()); }));
    cols.push_back(per_round_mean(r, [](const RoundRecord& x) { return x.test_accuracy; }));
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t t = 0; t < cols[0].size(); ++t) {
    rows.push_back({static_cast<double>(t + 1), cols[0][t], cols[2][t], cols[1][t], cols[3][t]});
  }
  const auto path = join(dir, "fig3.csv");
  write_csv(path,
            {"round", "survivors_matching", "survivors_random", "accuracy_matching",
             "accuracy_random"},
            rows);
  return {path};
}

std::vector<std::string> sweep(const std::string& dir, const std::string& name,
                               const std::string& x_name, const std::vector<double>& xs,
                               const std::function<void(ExperimentConfig&, double)>& set,
                               const FigureOptions& o) {
  std::vector<std::string> header{x_name};
  for (const auto& s : sweep_schemes()) {
    header.push_back(s.name + "_energy_per_device_j");
    header.push_back(s.name + "_energy_per_round_j");
    header.push_back(s.name + "_survivors");
  }
  std::vector<std::vector<double>> rows;
  for (double x : xs) {
    std::vector<double> row{x};
    for (const auto& s : sweep_schemes()) {
      auto c = radio_preset();
      c.allocation = s.allocation;
      c.assignment = s.assignment;
      set(c, x);
      apply_options(c, o);
      const auto summary = run_experiment(c).summary;
      row.push_back(summary.mean_energy_per_device_j);
      row.push_back(summary.mean_energy_per_round_j);
      row.push_back(summary.mean_survivors);
    }
    rows.push_back(std::move(row));
  }
  const auto path = join(dir, name + ".csv");
  write_csv(path, header, rows);
  return {path};
}

// Cost after each matching cycle against the exhaustive optimum, averaged
// over independent channel draws.
std::vector<std::string> fig9(const std::string& dir, const FigureOptions& o) {
  auto c = radio_preset();
  const std::size_t draws = (o.rounds > 0 ? o.rounds : 100);
  const auto seeds = seed_list(o.seeds);
  const auto params = c.system_params();

  std::vector<std::vector<MatchingCost>> traces;
  double exhaustive_energy = 0.0;
  double exhaustive_count = 0.0;
  std::size_t max_cycles = 0;
  for (auto seed : seeds) {
    Simulation sim(c, seed);
    Rng channel_rng = Rng::derive(seed, 0x464947);
    Rng select_rng = Rng::derive(seed, 0x53454C);
    Rng match_rng = Rng::derive(seed, 0x4D4154);
    for (std::size_t d = 0; d < draws; ++d) {
      const auto channels =
          sample_channels(sim.profiles(), params, channel_rng, c.wireless.fading);
      const auto candidates = select_random(c.devices, c.subchannels, select_rng);
      const auto table =
          build_table(candidates, channels, sim.profiles(), params, c.allocation).padded();
      auto run = run_matching(table, match_rng);
      std::vector<MatchingCost> trace{run.trace.front()};
      trace.insert(trace.end(), run.cycle_costs.begin(), run.cycle_costs.end());
      max_cycles = std::max(max_cycles, trace.size());
      traces.push_back(std::move(trace));
      const auto best = total_cost(table, exhaustive_matching(table));
      exhaustive_energy += best.energy;
      exhaustive_count += static_cast<double>(table.real_devices() - best.infeasible);
    }
  }
  const double count = static_cast<double>(traces.size());
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < max_cycles; ++i) {
    double energy = 0.0;
    double selected = 0.0;
    for (const auto& tr : traces) {
      const auto& cost = tr[std::min(i, tr.size() - 1)];
      energy += cost.energy;
      selected += static_cast<double>(c.subchannels - cost.infeasible);
    }
    rows.push_back({static_cast<double>(i), energy / count, selected / count,
                    exhaustive_energy / count, exhaustive_count / count});
  }
  const auto path = join(dir, "fig9.csv");
  write_csv(path,
            {"cycle", "matching_energy_j", "matching_selected", "exhaustive_energy_j",
             "exhaustive_selected"},
            rows);
  return {path};
}

}  // namespace

std::vector<std::string> figure_names() {
  return {"fig2", "fig3", "fig5", "fig6", "fig7", "fig8", "fig9"};
}

ExperimentConfig radio_preset() {
  ExperimentConfig c;
  c.devices = 10;
  c.subchannels = 4;
  c.rounds = 100;
  c.train = false;
  c.dataset.train_samples = 20000;
  c.dataset.test_samples = 10;
  c.wireless.gradient_bits = 10e6;
  c.wireless.noise_per_hz = true;
  c.wireless.eta = 1e-3;
  c.wireless.radius_m = 200.0;
  c.wireless.t_max_s = {5.0, 5.0};
  c.wireless.power_dbm = {10.0, 10.0};
  c.wireless.cpu_hz = {1e9, 1e9};
  return c;
}

ExperimentConfig divergence_preset(AggregationMode mode) {
  ExperimentConfig c;
  c.devices = 10;
  c.subchannels = 5;
  c.rounds = 100;
  c.learning_rate = 0.01;
  c.aggregation = mode;
  c.wireless.ideal = true;
  c.dataset.classes_per_device = 1;
  return c;
}

ExperimentConfig availability_preset(AssignmentMode mode) {
  ExperimentConfig c = radio_preset();
  c.subchannels = 5;
  c.assignment = mode;
  c.train = true;
  c.dataset.train_samples = 9000;
  c.dataset.test_samples = 1000;
  c.wireless.t_max_s = {10.0, 10.0};
  c.wireless.gradient_bits = 15e6;
  return c;
}

std::vector<Scheme> sweep_schemes() {
  return {{"kra_msa", AllocationMode::kkt, AssignmentMode::matching},
          {"fra1_msa", AllocationMode::fra1, AssignmentMode::matching},
          {"fra2_msa", AllocationMode::fra2, AssignmentMode::matching},
          {"kra_rsa", AllocationMode::kkt, AssignmentMode::random}};
}

std::vector<std::string> generate_figure(const std::string& name, const std::string& out_dir,
                                         const FigureOptions& options) {
  if (name == "fig2") return fig2(out_dir, options);
  if (name == "fig3") return fig3(out_dir, options);
  if (name == "fig5") {
    return sweep(out_dir, name, "t_max_s", {2, 3, 4, 5, 6, 7, 8},
                 [](ExperimentConfig& c, double x) { c.wireless.t_max_s = {x, x}; }, options);
  }
  if (name == "fig6") {
    return sweep(out_dir, name, "radius_m", {100, 150, 200, 250, 300, 350, 400},
                 [](ExperimentConfig& c, double x) { c.wireless.radius_m = x; }, options);
  }
  if (name == "fig7") {
    return sweep(out_dir, name, "power_dbm", {0, 5, 10, 15, 20, 25, 30},
                 [](ExperimentConfig& c, double x) { c.wireless.power_dbm = {x, x}; }, options);
  }
  if (name == "fig8") {
    return sweep(out_dir, name, "cpu_hz", {0.6e9, 0.8e9, 1.0e9, 1.2e9, 1.4e9, 1.6e9, 1.8e9},
                 [](ExperimentConfig& c, double x) { c.wireless.cpu_hz = {x, x}; }, options);
  }
  if (name == "fig9") return fig9(out_dir, options);
  throw std::invalid_argument("unknown figure '" + name + "'");
}

}  // namespace aoifl
