#include "aoifl/metrics.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace aoifl {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string join_ids(const std::vector<std::size_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(ids[i]);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["seeds"] = c.seeds;
  j["devices"] = c.devices;
  j["subchannels"] = c.subchannels;
  j["rounds"] = c.rounds;
  j["learning_rate"] = c.learning_rate;
  j["aggregation"] = to_string(c.aggregation);
  j["assignment"] = to_string(c.assignment);
  j["allocation"] = to_string(c.allocation);
  j["age_exponent"] = c.age_exponent;
  j["train"] = c.train;
  j["hidden"] = c.hidden;
  j["dataset"] = {{"kind", to_string(c.dataset.kind)},
                  {"classes", c.dataset.classes},
                  {"features", c.dataset.features},
                  {"train_samples", c.dataset.train_samples},
                  {"test_samples", c.dataset.test_samples},
                  {"classes_per_device", c.dataset.classes_per_device}};
  const auto& w = c.wireless;
  j["wireless"] = {{"ideal", w.ideal},
                   {"bandwidth_hz", w.bandwidth_hz},
                   {"gradient_bits", w.gradient_bits},
                   {"kappa", w.kappa},
                   {"mu_cycles", w.mu_cycles},
                   {"eta", w.eta},
                   {"path_loss_exponent", w.path_loss_exponent},
                   {"noise_dbm", w.noise_dbm},
                   {"noise_per_hz", w.noise_per_hz},
                   {"radius_m", w.radius_m},
                   {"fading", to_string(w.fading)}};
  return j;
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExportFormat parse_export_format(const std::string& text) {
  if (text == "csv") return ExportFormat::csv;
  if (text == "json") return ExportFormat::json;
  throw std::invalid_argument("unknown format '" + text + "' (csv|json)");
}

std::string metrics_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "seed,round,candidates,survivors,selected,total_energy_j,energy_per_device_j,"
         "train_loss,test_loss,test_accuracy,divergence,bound,error_norm,lipschitz_ratio,"
         "matching_iterations\n";
  for (const auto& run : result.runs) {
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      const auto& r = run.records[i];
      const double bound = i < run.bound.size() ? run.bound[i] : 0.0;
      out << run.seed << ',' << r.round << ',' << join_ids(r.candidates) << ','
          << r.selected.size() << ',' << join_ids(r.selected) << ','
          << format_real(r.total_energy_j) << ',' << format_real(r.energy_per_device_j()) << ','
          << format_real(r.train_loss) << ',' << format_real(r.test_loss) << ','
          << format_real(r.test_accuracy) << ',' << format_real(r.divergence) << ','
          << format_real(bound) << ',' << format_real(r.error_norm) << ','
          << format_real(r.lipschitz_ratio) << ',' << r.matching_iterations << '\n';
    }
  }
  return out.str();
}

std::string metrics_json(const ExperimentResult& result) {
  ordered_json doc;
  doc["schema_version"] = kMetricsSchemaVersion;
  doc["config"] = config_json(result.config);
  const auto& s = result.summary;
  doc["summary"] = {{"mean_final_accuracy", s.mean_final_accuracy},
                    {"mean_final_divergence", s.mean_final_divergence},
                    {"mean_survivors", s.mean_survivors},
                    {"mean_energy_per_round_j", s.mean_energy_per_round_j},
                    {"mean_energy_per_device_j", s.mean_energy_per_device_j}};
  doc["runs"] = ordered_json::array();
  for (const auto& run : result.runs) {
    ordered_json jr;
    jr["seed"] = run.seed;
    jr["lipschitz"] = run.lipschitz;
    jr["records"] = ordered_json::array();
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      const auto& r = run.records[i];
      ordered_json rec;
      rec["round"] = r.round;
      rec["candidates"] = r.candidates;
      rec["selected"] = r.selected;
      rec["aoi"] = r.aoi;
      rec["weights"] = r.weights;
      rec["allocations"] = ordered_json::array();
      for (const auto& a : r.allocations) {
        rec["allocations"].push_back({{"device", a.device},
                                      {"channel", a.channel},
                                      {"tau", a.tau},
                                      {"alpha", a.alpha},
                                      {"t_cp", a.t_cp},
                                      {"t_cm", a.t_cm},
                                      {"e_cp", a.e_cp},
                                      {"e_cm", a.e_cm}});
      }
      rec["total_energy_j"] = r.total_energy_j;
      rec["energy_per_device_j"] = r.energy_per_device_j();
      rec["train_loss"] = r.train_loss;
      rec["test_loss"] = r.test_loss;
      rec["test_accuracy"] = r.test_accuracy;
      rec["divergence"] = r.divergence;
      rec["bound"] = i < run.bound.size() ? run.bound[i] : 0.0;
      rec["error_norm"] = r.error_norm;
      rec["lipschitz_ratio"] = r.lipschitz_ratio;
      rec["matching_iterations"] = r.matching_iterations;
      jr["records"].push_back(std::move(rec));
    }
    doc["runs"].push_back(std::move(jr));
  }
  return doc.dump(2) + "\n";
}

void export_metrics(const ExperimentResult& result, const std::string& path, ExportFormat format) {
  write_text(path, format == ExportFormat::csv ? metrics_csv(result) : metrics_json(result));
}

std::vector<std::string> validate_metrics_json(const std::string& text) {
  std::vector<std::string> problems;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    return {std::string("not JSON: ") + e.what()};
  }
  auto need = [&](const nlohmann::json& obj, const std::string& key, auto pred,
                  const std::string& where) {
    if (!obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
    } else if (!pred(obj[key])) {
      problems.push_back(where + ": wrong type for '" + key + "'");
    }
  };
  auto is_int = [](const nlohmann::json& v) { return v.is_number_integer(); };
  auto is_num = [](const nlohmann::json& v) { return v.is_number(); };
  auto is_obj = [](const nlohmann::json& v) { return v.is_object(); };
  auto is_arr = [](const nlohmann::json& v) { return v.is_array(); };

  if (!doc.is_object()) return {"top level is not an object"};
  need(doc, "schema_version", is_int, "document");
  if (doc.contains("schema_version") && doc["schema_version"] != kMetricsSchemaVersion) {
    problems.push_back("document: unsupported schema_version");
  }
  need(doc, "config", is_obj, "document");
  need(doc, "summary", is_obj, "document");
  need(doc, "runs", is_arr, "document");
  if (!problems.empty()) return problems;

  for (const char* key : {"mean_final_accuracy", "mean_final_divergence", "mean_survivors",
                          "mean_energy_per_round_j", "mean_energy_per_device_j"}) {
    need(doc["summary"], key, is_num, "summary");
  }
  for (std::size_t i = 0; i < doc["runs"].size(); ++i) {
    const auto& run = doc["runs"][i];
    const std::string where = "runs[" + std::to_string(i) + "]";
    need(run, "seed", is_int, where);
    need(run, "lipschitz", is_num, where);
    need(run, "records", is_arr, where);
    if (!run.contains("records") || !run["records"].is_array()) continue;
    for (std::size_t j = 0; j < run["records"].size(); ++j) {
      const auto& rec = run["records"][j];
      const std::string rw = where + ".records[" + std::to_string(j) + "]";
      need(rec, "round", is_int, rw);
      for (const char* key : {"candidates", "selected", "aoi", "weights", "allocations"}) {
        need(rec, key, is_arr, rw);
      }
      for (const char* key : {"total_energy_j", "energy_per_device_j", "train_loss", "test_loss",
                              "test_accuracy", "divergence", "bound", "error_norm",
                              "lipschitz_ratio"}) {
        need(rec, key, is_num, rw);
      }
      need(rec, "matching_iterations", is_int, rw);
      if (rec.contains("selected") && rec.contains("candidates") && rec["selected"].is_array() &&
          rec["candidates"].is_array() && rec["selected"].size() > rec["candidates"].size()) {
        problems.push_back(rw + ": more selected than candidates");
      }
    }
  }
  return problems;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("no CSV column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_real(row[i]);
    out << '\n';
  }
  write_text(path, out.str());
}

}  // namespace aoifl
