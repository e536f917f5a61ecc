// aoifl: command-line front end for experiments, allocation and matching.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aoifl/config.hpp"
#include "aoifl/figures.hpp"
#include "aoifl/kkt.hpp"
#include "aoifl/matching.hpp"
#include "aoifl/metrics.hpp"
#include "aoifl/simulation.hpp"

namespace {

using namespace aoifl;

constexpr const char* kOutputEnv = "AOIFL_OUTPUT_DIR";

std::string output_dir(const std::string& fallback) {
  const char* env = std::getenv(kOutputEnv);
  return (env && *env) ? std::string(env) : fallback;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool skip_line(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

double parse_number(const std::string& tok, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size()) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": not a number: '" + tok + "'");
  }
  return v;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> rounds, std::string out, const std::string& format) {
  auto config = load_config(config_path);
  if (seed) config.seeds = {*seed};
  if (rounds) config.rounds = *rounds;
  validate(config);
  const auto fmt = parse_export_format(format);
  if (out.empty()) out = output_dir(config.output_dir) + "/metrics." + format;
  const auto result = run_experiment(config);
  export_metrics(result, out, fmt);
  const auto& s = result.summary;
  std::printf("wrote %s\n", out.c_str());
  std::printf("final_accuracy %.6f  final_divergence %.6g  survivors %.4f  energy_per_device_j %.6g\n",
              s.mean_final_accuracy, s.mean_final_divergence, s.mean_survivors,
              s.mean_energy_per_device_j);
  return 0;
}

// One instance per line: C P beta gain B D kappa mu T_max.
int cmd_solve(const std::string& path, const std::string& mode_text, bool with_oracle) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const auto mode = parse_allocation_mode(mode_text);
  std::printf("line,feasible,case,tau,alpha,t_cp,t_cm,e_cp,e_cm,e_total%s\n",
              with_oracle ? ",oracle_e_total" : "");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto tok = split_ws(line);
    if (tok.size() != 9) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 9 fields, got " +
                               std::to_string(tok.size()));
    }
    double v[9];
    for (int i = 0; i < 9; ++i) v[i] = parse_number(tok[i], line_no);
    const AllocationInstance inst{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
    const auto r = allocate(inst, mode);
    std::printf("%zu,%d,%d,%s,%s,%s,%s,%s,%s,%s", line_no, r.feasible ? 1 : 0, r.case_id,
                format_real(r.tau).c_str(), format_real(r.alpha).c_str(),
                format_real(r.t_cp).c_str(), format_real(r.t_cm).c_str(),
                format_real(r.e_cp).c_str(), format_real(r.e_cm).c_str(),
                format_real(r.e_total).c_str());
    if (with_oracle) {
      std::printf(",%s", feasible(inst) ? format_real(oracle(inst).e_total).c_str() : "inf");
    }
    std::printf("\n");
  }
  return 0;
}

// Rows are sub-channels, columns devices; "inf", "x" or "-" marks an
// infeasible pair.
EnergyTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::vector<PairEnergy>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::vector<PairEnergy> row;
    for (const auto& tok : split_ws(line)) {
      if (tok == "inf" || tok == "x" || tok == "-") {
        row.emplace_back(std::nullopt);
      } else {
        row.emplace_back(parse_number(tok, line_no));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": ragged table row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty table");
  return EnergyTable::from_rows(rows);
}

int cmd_match(const std::string& path, bool exhaustive, std::uint64_t seed) {
  const auto table = read_table(path).padded();
  Matching m;
  std::size_t cycles = 0;
  if (exhaustive) {
    m = exhaustive_matching(table);
  } else {
    Rng rng = Rng::derive(seed, 5);
    const auto run = run_matching(table, rng);
    m = run.matching;
    cycles = run.iterations;
  }
  std::printf("device,channel,energy\n");
  for (std::size_t n = 0; n < table.real_devices(); ++n) {
    const std::size_t k = m.channel_of[n];
    const auto& e = table.at(k, n);
    if (table.is_pad_channel(k)) {
      std::printf("%zu,-,inf\n", n);
    } else {
      std::printf("%zu,%zu,%s\n", n, k, e ? format_real(*e).c_str() : "inf");
    }
  }
  const auto cost = total_cost(table, m);
  std::printf("# total_energy %s infeasible %zu stable %d cycles %zu\n",
              format_real(cost.energy).c_str(), cost.infeasible,
              stability_check(table, m) ? 1 : 0, cycles);
  return 0;
}

int cmd_figs(const std::string& name, std::string out, std::size_t seeds, std::size_t rounds) {
  if (out.empty()) out = output_dir("out");
  std::vector<std::string> names;
  if (name == "all") {
    names = figure_names();
  } else {
    names = {name};
  }
  for (const auto& n : names) {
    for (const auto& file : generate_figure(n, out, {seeds, rounds})) {
      std::printf("wrote %s\n", file.c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-weighted federated learning simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment from a YAML config");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> rounds;
  std::string out;
  std::string format = "csv";
  run->add_option("config", config_path, "YAML config")->required();
  run->add_option("--seed", seed, "Single seed, replaces the config's list");
  run->add_option("--rounds", rounds, "Override the round count");
  run->add_option("--out", out, "Output file");
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* solve = app.add_subcommand("solve", "Solve allocation instances from a batch file");
  std::string batch;
  std::string mode = "kkt";
  bool with_oracle = false;
  solve->add_option("batch", batch, "One instance per line: C P beta gain B D kappa mu T_max")
      ->required();
  solve->add_option("--mode", mode, "kkt, fra1 or fra2");
  solve->add_flag("--oracle", with_oracle, "Also print the brute-force energy");

  auto* match = app.add_subcommand("match", "Assign sub-channels for an energy table");
  std::string table_path;
  bool exhaustive = false;
  std::uint64_t match_seed = 1;
  match->add_option("table", table_path, "Rows = sub-channels, columns = devices")->required();
  match->add_flag("--exhaustive", exhaustive, "Search all permutations");
  match->add_option("--seed", match_seed, "Seed for the initial matching");

  auto* figs = app.add_subcommand("figs", "Generate figure data");
  std::string fig_name;
  std::string fig_out;
  std::size_t fig_seeds = 5;
  std::size_t fig_rounds = 0;
  figs->add_option("name", fig_name, "fig2|fig3|fig5|fig6|fig7|fig8|fig9|all")->required();
  figs->add_option("--out", fig_out, "Output directory");
  figs->add_option("--seeds", fig_seeds, "Seeds per point");
  figs->add_option("--rounds", fig_rounds, "Rounds per run (fig9: draws per seed)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, seed, rounds, out, format);
    if (solve->parsed()) return cmd_solve(batch, mode, with_oracle);
    if (match->parsed()) return cmd_match(table_path, exhaustive, match_seed);
    if (figs->parsed()) return cmd_figs(fig_name, fig_out, fig_seeds, fig_rounds);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "aoifl: %s\n", e.what());
    return 2;
  }
  return 1;
}
