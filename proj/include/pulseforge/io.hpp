#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulseforge/errors.hpp"
#include "pulseforge/schedule.hpp"
#include "pulseforge/solver.hpp"

namespace pulseforge {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Run configuration (one JSON document = one reproducible experiment)
// ---------------------------------------------------------------------------

struct SweepSpec {
  double start = 0, end = 0;
  int count = 0;

  std::vector<double> points() const {
    std::vector<double> out;
    if (count == 1) {
      out.push_back(start);
      return out;
    }
    for (int i = 0; i < count; ++i)
      out.push_back(start + (end - start) * i / (count - 1));
    return out;
  }
};

struct EmitFlags {
  bool fidelity_csv = true;
  bool pulse_csv = false;
  bool spectrum_csv = false;
  bool bloch_csv = false;
  bool coefficients_json = true;
};

struct RunConfig {
  std::string scenario;  // qubit | pdc | transmon | snap
  json params = json::object();  // scenario-specific parameters
  int order = 2;
  std::vector<double> tf_points;
  double ode_rtol = 1e-11;
  double quad_rtol = 1e-10;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";
  EmitFlags emit;

  void validate() const {
    if (scenario != "qubit" && scenario != "pdc" && scenario != "transmon" &&
        scenario != "snap")
      throw ConfigError("unknown scenario '" + scenario + "'");
    if (tf_points.empty()) throw ConfigError("empty final-time sweep");
    if (order < 1 || order > 6) throw ConfigError("order must be in 1..6");
    if (scenario == "snap" && !seed_set)
      throw ConfigError("the snap scenario requires an explicit seed");
    if (scenario == "snap" && order % 2 != 0)
      throw ConfigError("the snap scenario corrects in even orders");
  }
};

inline SweepSpec parse_sweep_flag(const std::string& text) {
  SweepSpec sw;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d", &sw.start, &sw.end, &sw.count) !=
      3)
    throw ConfigError("sweep must be START:END:COUNT, got '" + text + "'");
  if (sw.count < 1) throw ConfigError("sweep count must be positive");
  return sw;
}

inline RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  cfg.scenario = j.value("scenario", "");
  cfg.params = j.value("params", json::object());
  cfg.order = j.value("order", 2);
  if (j.contains("tf_sweep")) {
    SweepSpec sw;
    sw.start = j["tf_sweep"].value("start", 0.0);
    sw.end = j["tf_sweep"].value("end", 0.0);
    sw.count = j["tf_sweep"].value("count", 0);
    cfg.tf_points = sw.points();
  }
  if (j.contains("tf_list"))
    cfg.tf_points = j["tf_list"].get<std::vector<double>>();
  if (j.contains("tf")) cfg.tf_points = {j["tf"].get<double>()};
  if (j.contains("tolerances")) {
    cfg.ode_rtol = j["tolerances"].value("ode", cfg.ode_rtol);
    cfg.quad_rtol = j["tolerances"].value("quadrature", cfg.quad_rtol);
  }
  if (j.contains("seed")) {
    cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.seed_set = true;
  }
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  if (j.contains("emit")) {
    const json& e = j["emit"];
    cfg.emit.fidelity_csv = e.value("fidelity_csv", true);
    cfg.emit.pulse_csv = e.value("pulse_csv", false);
    cfg.emit.spectrum_csv = e.value("spectrum_csv", false);
    cfg.emit.bloch_csv = e.value("bloch_csv", false);
    cfg.emit.coefficients_json = e.value("coefficients_json", true);
  }
  return cfg;
}

inline json config_to_json(const RunConfig& cfg) {
  json j;
  j["scenario"] = cfg.scenario;
  j["params"] = cfg.params;
  j["order"] = cfg.order;
  j["tf_list"] = cfg.tf_points;
  j["tolerances"] = {{"ode", cfg.ode_rtol}, {"quadrature", cfg.quad_rtol}};
  if (cfg.seed_set) j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["emit"] = {{"fidelity_csv", cfg.emit.fidelity_csv},
               {"pulse_csv", cfg.emit.pulse_csv},
               {"spectrum_csv", cfg.emit.spectrum_csv},
               {"bloch_csv", cfg.emit.bloch_csv},
               {"coefficients_json", cfg.emit.coefficients_json}};
  return j;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  in >> j;
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV emission: header row always present, 15 significant digits
// ---------------------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw ConfigError("cannot open '" + path.string() + "'");
    out_ << "# pulseforge csv v1\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  }

  void row(const std::vector<double>& values) {
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.14e", values[i]);
      out_ << buf << (i + 1 < values.size() ? "," : "\n");
    }
  }

 private:
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Per-order correction coefficients (the verify subcommand's input)
// ---------------------------------------------------------------------------

inline json field_to_json(const FourierField& f) {
  json j;
  j["t_f"] = f.t_f;
  j["k_min"] = f.k_min;
  j["k_max"] = f.k_max;
  j["constraint"] = to_string(f.constraint);
  j["c"] = std::vector<double>(f.c.data(), f.c.data() + f.c.size());
  j["d"] = std::vector<double>(f.d.data(), f.d.data() + f.d.size());
  return j;
}

inline FourierField field_from_json(const json& j) {
  FourierField f;
  f.t_f = j.at("t_f").get<double>();
  f.k_min = j.at("k_min").get<int>();
  f.k_max = j.at("k_max").get<int>();
  const std::string c = j.value("constraint", "free");
  if (c == "free") f.constraint = Constraint::free;
  else if (c == "zero") f.constraint = Constraint::zero;
  else if (c == "constant_only") f.constraint = Constraint::constant_only;
  else if (c == "boundary_zero") f.constraint = Constraint::boundary_zero;
  else throw ConfigError("unknown constraint '" + c + "'");
  auto cv = j.at("c").get<std::vector<double>>();
  auto dv = j.at("d").get<std::vector<double>>();
  f.c = Eigen::Map<const VectorXd>(cv.data(), cv.size());
  f.d = Eigen::Map<const VectorXd>(dv.data(), dv.size());
  return f;
}

// Flat per-order arrays {operator, k, c, d} plus the canonical field form.
inline json coefficients_to_json(
    const std::vector<std::map<std::string, FourierField>>& per_order) {
  json orders = json::array();
  for (std::size_t n = 0; n < per_order.size(); ++n) {
    json entry;
    entry["order"] = n + 1;
    json coeffs = json::array();
    json fields = json::object();
    for (const auto& [label, f] : per_order[n]) {
      for (int k = 0; k <= f.k_max; ++k) {
        if (f.c[k] == 0.0 && (k == 0 || f.d[k] == 0.0)) continue;
        coeffs.push_back({{"operator", label},
                          {"k", k},
                          {"c", f.c[k]},
                          {"d", k == 0 ? 0.0 : f.d[k]}});
      }
      fields[label] = field_to_json(f);
    }
    entry["coefficients"] = coeffs;
    entry["fields"] = fields;
    orders.push_back(entry);
  }
  return orders;
}

inline std::vector<std::map<std::string, FourierField>> coefficients_from_json(
    const json& orders) {
  std::vector<std::map<std::string, FourierField>> out;
  for (const auto& entry : orders) {
    std::map<std::string, FourierField> fields;
    for (auto it = entry.at("fields").begin(); it != entry.at("fields").end();
         ++it)
      fields[it.key()] = field_from_json(it.value());
    out.push_back(std::move(fields));
  }
  return out;
}

}  // namespace pulseforge
