#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "aoifl/figures.hpp"
#include "aoifl/metrics.hpp"
#include "aoifl/simulation.hpp"
#include "json.hpp"

using namespace aoifl;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.seeds = {3};
  c.devices = 6;
  c.subchannels = 3;
  c.rounds = 6;
  c.learning_rate = 0.1;
  c.dataset.classes = 6;
  c.dataset.train_samples = 600;
  c.dataset.test_samples = 60;
  c.hidden = 8;
  c.wireless.noise_per_hz = true;
  c.wireless.eta = 1e-3;
  return c;
}

std::string tmp(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "aoifl_sim_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("round records are consistent") {
  auto c = small_config();
  Simulation sim(c, 3);
  for (int t = 1; t <= 6; ++t) {
    const auto before = sim.aoi();
    const auto r = sim.run_round();
    CHECK(r.round == static_cast<std::size_t>(t));
    CHECK(r.candidates.size() == 3);
    CHECK(r.aoi == before.ages);
    for (auto id : r.selected) {
      CHECK(std::find(r.candidates.begin(), r.candidates.end(), id) != r.candidates.end());
    }
    CHECK(r.allocations.size() == r.selected.size());
    CHECK(r.weights.size() == r.selected.size());
    double total = 0, wsum = 0;
    for (std::size_t i = 0; i < r.allocations.size(); ++i) {
      const auto& a = r.allocations[i];
      CHECK(a.device == r.selected[i]);
      total += a.e_cp + a.e_cm;
      CHECK(a.t_cp + a.t_cm <= sim.profiles()[a.device].t_max_s + 1e-9);
      wsum += r.weights[i];
    }
    CHECK(std::abs(total - r.total_energy_j) <= 1e-9);
    CHECK(wsum == doctest::Approx(static_cast<double>(r.selected.size())));
    for (std::size_t n = 0; n < c.devices; ++n) {
      const bool sel = std::find(r.selected.begin(), r.selected.end(), n) != r.selected.end();
      CHECK(sim.aoi().ages[n] == (sel ? 1 : before.ages[n] + 1));
    }
    CHECK(r.divergence == doctest::Approx(weight_divergence(sim.model(), sim.shadow())));
  }
}

TEST_CASE("empty rounds keep the model and age every device") {
  auto c = small_config();
  c.wireless.t_max_s = {1e-4, 1e-4};
  Simulation sim(c, 1);
  const auto w0 = sim.model().values;
  for (int t = 0; t < 3; ++t) {
    const auto r = sim.run_round();
    CHECK(r.selected.empty());
    CHECK(r.total_energy_j == 0.0);
    CHECK(r.energy_per_device_j() == 0.0);
  }
  CHECK(sim.model().values == w0);
  for (auto a : sim.aoi().ages) CHECK(a == 4);
  CHECK(sim.shadow().values != w0);
}

TEST_CASE("complete selection keeps zero divergence") {
  auto c = small_config();
  c.subchannels = c.devices;
  c.wireless.ideal = true;
  for (auto mode : {AggregationMode::conventional, AggregationMode::age_weighted}) {
    c.aggregation = mode;
    Simulation sim(c, 2);
    for (int t = 0; t < 5; ++t) {
      const auto r = sim.run_round();
      CHECK(r.selected.size() == c.devices);
      CHECK(r.divergence <= 1e-12);
      for (double w : r.weights) CHECK(w == 1.0);
    }
  }
}

TEST_CASE("ideal channel takes every candidate") {
  auto c = small_config();
  c.wireless.ideal = true;
  Simulation sim(c, 4);
  const auto r = sim.run_round();
  CHECK(r.selected == r.candidates);
  CHECK(r.total_energy_j == 0.0);
}

TEST_CASE("radio-only runs skip training") {
  auto c = small_config();
  c.train = false;
  Simulation sim(c, 5);
  const auto w0 = sim.model().values;
  sim.run_round();
  CHECK(sim.model().values == w0);
}

TEST_CASE("divergence stays under the bound") {
  auto c = small_config();
  c.rounds = 15;
  const auto run = run_seed(c, 7);
  REQUIRE(run.bound.size() == 15);
  for (std::size_t t = 0; t < 15; ++t) {
    CHECK(run.records[t].divergence <= run.bound[t] * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("runs are deterministic") {
  const auto c = small_config();
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  CHECK(metrics_csv(a) == metrics_csv(b));
  CHECK(metrics_json(a) == metrics_json(b));
  auto d = c;
  d.seeds = {4};
  CHECK(metrics_csv(run_experiment(d)) != metrics_csv(a));
  auto one = c;
  one.rounds = 1;
  CHECK(run_experiment(one).runs[0].records.size() == 1);
}

TEST_CASE("CSV export round trip") {
  auto c = small_config();
  c.seeds = {1, 2};
  const auto result = run_experiment(c);
  const auto path = tmp("m.csv");
  export_metrics(result, path, ExportFormat::csv);
  const auto table = read_csv(path);
  CHECK(table.rows.size() == 12);
  for (const auto& row : table.rows) CHECK(row.size() == table.header.size());
  const auto col = table.column("total_energy_j");
  double csv_total = 0, direct = 0;
  for (const auto& row : table.rows) csv_total += std::stod(row[col]);
  for (const auto& run : result.runs) {
    for (const auto& r : run.records) direct += r.total_energy_j;
  }
  CHECK(std::abs(csv_total - direct) <= 1e-9);
  const auto acc = table.column("test_accuracy");
  CHECK(std::stod(table.rows[5][acc]) == result.runs[0].records[5].test_accuracy);
}

TEST_CASE("JSON export validates") {
  const auto result = run_experiment(small_config());
  const auto text = metrics_json(result);
  CHECK(validate_metrics_json(text).empty());
  auto doc = nlohmann::json::parse(text);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["runs"][0]["records"].size() == 6);
  doc["runs"][0]["records"][0].erase("divergence");
  CHECK(validate_metrics_json(doc.dump()).size() == 1);
  doc["schema_version"] = 2;
  CHECK_FALSE(validate_metrics_json(doc.dump()).empty());
  CHECK_FALSE(validate_metrics_json("{").empty());
  CHECK_THROWS(export_metrics(result, "/proc/nope/x.csv", ExportFormat::csv));
}

TEST_CASE("summary") {
  auto c = small_config();
  c.seeds = {1, 2};
  const auto r = run_experiment(c);
  double energy = 0, survivors = 0;
  for (const auto& run : r.runs) {
    for (const auto& rec : run.records) {
      energy += rec.total_energy_j;
      survivors += static_cast<double>(rec.selected.size());
    }
  }
  CHECK(r.summary.mean_survivors == doctest::Approx(survivors / 12));
  CHECK(r.summary.mean_energy_per_round_j == doctest::Approx(energy / 12));
  CHECK(r.summary.mean_energy_per_device_j == doctest::Approx(energy / survivors));
  CHECK(r.summary.mean_final_accuracy ==
        doctest::Approx((r.runs[0].records.back().test_accuracy +
                         r.runs[1].records.back().test_accuracy) / 2));
}

TEST_CASE("figure presets") {
  CHECK(figure_names().size() == 7);
  const auto fig2 = divergence_preset(AggregationMode::age_weighted);
  CHECK(fig2.devices == 10);
  CHECK(fig2.subchannels == 5);
  const auto radio = radio_preset();
  CHECK(radio.subchannels == 4);
  CHECK(radio.wireless.t_max_s == Range{5, 5});
  CHECK(radio.wireless.gradient_bits == 10e6);
  const auto avail = availability_preset(AssignmentMode::random);
  CHECK(avail.wireless.t_max_s == Range{10, 10});
  CHECK(avail.wireless.gradient_bits == 15e6);
  CHECK_NOTHROW(validate(fig2));
  CHECK_NOTHROW(validate(radio));
  CHECK_NOTHROW(validate(avail));

  const auto dir = tmp("figs");
  const auto files = generate_figure("fig5", dir, {1, 5});
  REQUIRE(files.size() == 1);
  const auto t = read_csv(files[0]);
  CHECK(t.rows.size() == 7);
  CHECK(t.header.size() == 13);
  CHECK_THROWS(generate_figure("fig4", dir));
}
