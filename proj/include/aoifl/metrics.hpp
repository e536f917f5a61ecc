#pragma once

#include <string>
#include <vector>

#include "aoifl/simulation.hpp"

namespace aoifl {

enum class ExportFormat { csv, json };

ExportFormat parse_export_format(const std::string& text);

inline constexpr int kMetricsSchemaVersion = 1;

/// CSV header, one row per (seed, round):
///   seed, round, candidates, survivors, selected, total_energy_j,
///   energy_per_device_j, train_loss, test_loss, test_accuracy, divergence,
///   bound, error_norm, lipschitz_ratio, matching_iterations
/// `candidates` and `selected` are ';'-joined device ids. Reals use %.17g.
std::string metrics_csv(const ExperimentResult& result);

/// JSON document {schema_version, config, summary, runs[{seed, lipschitz,
/// records[...]}]}; each record also lists per-device allocations.
std::string metrics_json(const ExperimentResult& result);

/// Writes metrics_csv or metrics_json to `path`, creating parent directories.
/// Throws std::runtime_error when the file cannot be written.
void export_metrics(const ExperimentResult& result, const std::string& path, ExportFormat format);

/// Structural check of a metrics JSON document; returns the problems found.
std::vector<std::string> validate_metrics_json(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

/// Plain CSV writer for figure data.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_real(double v);

}  // namespace aoifl
