// Batch front end: parse a declarative config, synthesize correction pulses,
// verify them by direct simulation, and persist results as CSV/JSON.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pulseforge/driver.hpp"

namespace fs = std::filesystem;
using namespace pulseforge;

namespace {

struct PointOutcome {
  PointResult result;
  bool failed = false;
  std::string error;
};

std::vector<PointOutcome> run_all(const RunConfig& cfg, int workers) {
  std::vector<PointOutcome> out(cfg.tf_points.size());
  if (workers <= 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  std::size_t next = 0, done = 0;
  std::vector<std::pair<std::size_t, std::future<PointOutcome>>> live;
  while (done < cfg.tf_points.size()) {
    while (next < cfg.tf_points.size() &&
           live.size() < static_cast<std::size_t>(workers)) {
      const double tf = cfg.tf_points[next];
      live.emplace_back(next, std::async(std::launch::async, [&cfg, tf] {
                          PointOutcome po;
                          try {
                            po.result = run_point(cfg, tf);
                          } catch (const std::exception& e) {
                            po.failed = true;
                            po.error = e.what();
                            po.result.t_f = tf;
                          }
                          return po;
                        }));
      ++next;
    }
    auto& [idx, fut] = live.front();
    out[idx] = fut.get();
    live.erase(live.begin());
    ++done;
  }
  return out;
}

json outcome_to_json(const PointOutcome& po) {
  json p;
  p["tf"] = po.result.t_f;
  if (po.failed) {
    p["error"] = po.error;
    return p;
  }
  p["orders"] = coefficients_to_json(po.result.fields_per_order);
  json res = json::object();
  for (const auto& [k, v] : po.result.metrics)
    if (!std::isnan(v)) res[k] = v;
  p["results"] = res;
  p["residuals"] = po.result.residuals;
  p["achieved_order"] = po.result.achieved_order;
  p["diverged"] = po.result.diverged;
  if (!po.result.note.empty()) p["note"] = po.result.note;
  return p;
}

// Sampled drive quadratures before and after correction, per scenario.
struct PulseSamples {
  std::vector<double> t, fx0, fy0, fx1, fy1;
};

PulseSamples sample_pulses(const RunConfig& cfg, double tf,
                           const std::map<std::string, FourierField>& total,
                           int count = 2048) {
  PulseSamples ps;
  ps.t.resize(count);
  ps.fx0.assign(count, 0.0);
  ps.fy0.assign(count, 0.0);
  ps.fx1.assign(count, 0.0);
  ps.fy1.assign(count, 0.0);
  auto field = [&](const std::string& k) -> const FourierField* {
    auto it = total.find(k);
    return it == total.end() ? nullptr : &it->second;
  };
  if (cfg.scenario == "snap") {
    auto sg = detail::make_snap(cfg, tf);
    std::vector<scenarios::SnapGate::LevelFields> lf(
        sg.n_keep, {FourierField::zeros(tf, 0, sg.k_max),
                    FourierField::zeros(tf, 0, sg.k_max)});
    for (int m = 0; m < sg.n_keep; ++m) {
      if (const auto* f = field("gx:" + std::to_string(m))) lf[m].gx = *f;
      if (const auto* f = field("gy:" + std::to_string(m))) lf[m].gy = *f;
    }
    auto [x0, y0] = sg.quadrature_samples({}, count);
    auto [x1, y1] = sg.quadrature_samples(lf, count);
    for (int i = 0; i < count; ++i) ps.t[i] = tf * i / count;
    ps.fx0 = x0;
    ps.fy0 = y0;
    ps.fx1 = x1;
    ps.fy1 = y1;
    return ps;
  }
  const FourierField* gx = field("gx");
  const FourierField* gy = field("gy");
  for (int i = 0; i < count; ++i) {
    const double t = tf * i / count;
    ps.t[i] = t;
    const double gxv = gx ? gx->eval(t) : 0.0;
    const double gyv = gy ? gy->eval(t) : 0.0;
    if (cfg.scenario == "pdc") {
      auto sc = detail::make_pdc(cfg, tf);
      ps.fy0[i] = sc.pump.eval(t);
      ps.fx1[i] = gxv;
      ps.fy1[i] = sc.pump.eval(t) + gyv;
    } else if (cfg.scenario == "transmon") {
      auto sc = detail::make_transmon(cfg, tf);
      ps.fx0[i] = sc.env.eval(t);
      ps.fx1[i] = sc.env.eval(t) + gxv;
      ps.fy1[i] = gyv;
    } else {
      auto sc = detail::make_qubit(cfg, tf);
      ps.fx0[i] = sc.env.eval(t);
      ps.fx1[i] = sc.env.eval(t) + gxv;
      ps.fy1[i] = gyv;
    }
  }
  return ps;
}

std::map<std::string, FourierField> summed_fields(const json& point) {
  auto per_order = coefficients_from_json(point.at("orders"));
  std::map<std::string, FourierField> total;
  for (const auto& inc : per_order)
    for (const auto& [label, f] : inc) {
      auto it = total.find(label);
      if (it == total.end()) {
        total.emplace(label, f);
      } else {
        it->second.c += f.c;
        it->second.d += f.d;
      }
    }
  return total;
}

void write_pulse_csv(const fs::path& path, const PulseSamples& ps) {
  CsvWriter csv(path, {"t", "fx_original", "fy_original", "fx_corrected",
                       "fy_corrected"});
  for (std::size_t i = 0; i < ps.t.size(); ++i)
    csv.row({ps.t[i], ps.fx0[i], ps.fy0[i], ps.fx1[i], ps.fy1[i]});
}

void write_spectrum_csv(const fs::path& path, const PulseSamples& ps,
                        double tf) {
  auto sx0 = pulse_spectrum(ps.fx0, tf);
  auto sy0 = pulse_spectrum(ps.fy0, tf);
  auto sx1 = pulse_spectrum(ps.fx1, tf);
  auto sy1 = pulse_spectrum(ps.fy1, tf);
  CsvWriter csv(path, {"omega", "mag_x_original", "mag_y_original",
                       "mag_x_corrected", "mag_y_corrected"});
  for (std::size_t k = 0; k < sx0.omega.size(); ++k)
    csv.row({sx0.omega[k], sx0.magnitude[k], sy0.magnitude[k],
             sx1.magnitude[k], sy1.magnitude[k]});
}

void write_bloch_csv(const fs::path& path, const RunConfig& cfg, double tf,
                     const std::map<std::string, FourierField>& total) {
  if (cfg.scenario != "qubit")
    throw ConfigError("bloch trajectories are defined for the qubit scenario");
  auto sc = detail::make_qubit(cfg, tf);
  PropagationOptions opts;
  opts.rtol = cfg.ode_rtol;
  opts.sample_stride = 8;
  Eigen::VectorXcd psi0(2);
  psi0 << 1.0, 0.0;
  CsvWriter csv(path, {"trace_id", "t", "x", "y", "z"});
  const MatrixFn ideal = [&](double t) {
    return sc.basis.matrix_from_coeffs(sc.h0()(t));
  };
  const std::array<MatrixFn, 3> hs = {ideal, sc.verify_hamiltonian({}),
                                      sc.verify_hamiltonian(total)};
  for (int trace = 0; trace < 3; ++trace) {
    auto states = propagate_state(hs[trace], psi0, tf, opts);
    for (const auto& p : bloch_trajectory(states))
      csv.row({double(trace), p.t, p.x, p.y, p.z});
  }
}

int cmd_run(const RunConfig& cfg, int workers) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  auto outcomes = run_all(cfg, workers);

  json doc;
  doc["metadata"] = {{"scenario", cfg.scenario},
                     {"params", cfg.params},
                     {"order", cfg.order},
                     {"tolerances",
                      {{"ode", cfg.ode_rtol}, {"quadrature", cfg.quad_rtol}}},
                     {"code_version", kVersion}};
  if (cfg.seed_set) doc["metadata"]["seed"] = cfg.seed;
  doc["points"] = json::array();
  for (const auto& po : outcomes) doc["points"].push_back(outcome_to_json(po));
  if (cfg.emit.coefficients_json) {
    std::ofstream out(fs::path(cfg.out_dir) / "coefficients.json");
    out << doc.dump(2) << "\n";
  }

  bool any_failed = false;
  if (cfg.emit.fidelity_csv) {
    std::vector<std::string> cols = {"tf"};
    for (const auto& po : outcomes)
      if (!po.failed) {
        for (const auto& [k, v] : po.result.metrics) cols.push_back(k);
        break;
      }
    CsvWriter csv(fs::path(cfg.out_dir) / "fidelity.csv", cols);
    for (const auto& po : outcomes) {
      if (po.failed) {
        any_failed = true;
        continue;
      }
      std::vector<double> row = {po.result.t_f};
      for (const auto& [k, v] : po.result.metrics) row.push_back(v);
      csv.row(row);
    }
  }

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].failed) {
      any_failed = true;
      continue;
    }
    if (!cfg.emit.pulse_csv && !cfg.emit.spectrum_csv && !cfg.emit.bloch_csv)
      continue;
    const auto& point = doc["points"][i];
    auto total = summed_fields(point);
    const double tf = outcomes[i].result.t_f;
    char tag[32];
    std::snprintf(tag, sizeof(tag), "%03zu", i);
    auto ps = sample_pulses(cfg, tf, total);
    if (cfg.emit.pulse_csv)
      write_pulse_csv(
          fs::path(cfg.out_dir) / ("pulse_" + std::string(tag) + ".csv"), ps);
    if (cfg.emit.spectrum_csv)
      write_spectrum_csv(
          fs::path(cfg.out_dir) / ("spectrum_" + std::string(tag) + ".csv"),
          ps, tf);
    if (cfg.emit.bloch_csv)
      write_bloch_csv(
          fs::path(cfg.out_dir) / ("bloch_" + std::string(tag) + ".csv"), cfg,
          tf, total);
  }

  if (any_failed) {
    json err = json::array();
    for (const auto& po : outcomes)
      if (po.failed)
        err.push_back({{"tf", po.result.t_f}, {"error", po.error}});
    std::ofstream out(fs::path(cfg.out_dir) / "error.json");
    out << err.dump(2) << "\n";
    std::cerr << "some sweep points failed; see error.json\n";
    return 1;
  }
  std::cout << "wrote " << cfg.out_dir << " (" << outcomes.size()
            << " sweep points)\n";
  return 0;
}

RunConfig config_for_point(const json& metadata) {
  RunConfig cfg;
  cfg.scenario = metadata.value("scenario", "");
  cfg.params = metadata.value("params", json::object());
  cfg.order = metadata.value("order", 2);
  if (metadata.contains("seed")) {
    cfg.seed = metadata["seed"].get<std::uint64_t>();
    cfg.seed_set = true;
  }
  if (metadata.contains("tolerances")) {
    cfg.ode_rtol = metadata["tolerances"].value("ode", cfg.ode_rtol);
    cfg.quad_rtol = metadata["tolerances"].value("quadrature", cfg.quad_rtol);
  }
  return cfg;
}

// Re-simulates every stored point from its stored coefficients and compares
// the stored headline metrics.
int cmd_verify(const std::string& coeff_path, double tol) {
  std::ifstream in(coeff_path);
  if (!in) throw ConfigError("cannot open '" + coeff_path + "'");
  json doc;
  in >> doc;
  RunConfig cfg = config_for_point(doc.at("metadata"));
  PropagationOptions opts;
  opts.rtol = cfg.ode_rtol;
  opts.atol = cfg.ode_rtol * 1e-2;

  double worst = 0;
  int checked = 0;
  for (const auto& point : doc.at("points")) {
    if (point.contains("error")) continue;
    const double tf = point.at("tf").get<double>();
    auto total = summed_fields(point);
    const json& res = point.at("results");
    auto compare = [&](const std::string& name, double recomputed) {
      if (!res.contains(name)) return;
      const double stored = res[name].get<double>();
      const double diff = std::abs(stored - recomputed);
      worst = std::max(worst, diff);
      ++checked;
      if (diff > tol * (1.0 + std::abs(stored)))
        std::printf("  MISMATCH %s at tf %.6g: stored %.15e recomputed %.15e\n",
                    name.c_str(), tf, stored, recomputed);
    };
    const int deepest = point.at("achieved_order").get<int>();
    if (cfg.scenario == "qubit") {
      auto sc = detail::make_qubit(cfg, tf);
      compare("eps_uncorrected", sc.epsilon_for({}, opts));
      compare("eps_order" + std::to_string(deepest),
              sc.epsilon_for(total, opts));
    } else if (cfg.scenario == "transmon") {
      auto sc = detail::make_transmon(cfg, tf);
      compare("eps_uncorrected", sc.epsilon_for({}, opts));
      compare("eps_order" + std::to_string(deepest),
              sc.epsilon_for(total, opts));
      compare("eps_drag", sc.epsilon_drag(opts));
    } else if (cfg.scenario == "pdc") {
      auto sc = detail::make_pdc(cfg, tf);
      compare("s_uncorrected_db", sc.squeezing({}, false, 40, opts).s_db);
      auto rep = sc.squeezing(total, false, 40, opts);
      compare("s_corrected_db", rep.s_db);
      compare("phi_corrected", rep.phi);
    } else if (cfg.scenario == "snap") {
      auto sg = detail::make_snap(cfg, tf);
      const int extra = cfg.params.value("sim_extra_levels", 0);
      std::vector<scenarios::SnapGate::LevelFields> lf(
          sg.n_keep, {FourierField::zeros(tf, 0, sg.k_max),
                      FourierField::zeros(tf, 0, sg.k_max)});
      for (int m = 0; m < sg.n_keep; ++m) {
        auto ix = total.find("gx:" + std::to_string(m));
        auto iy = total.find("gy:" + std::to_string(m));
        if (ix != total.end()) lf[m].gx = ix->second;
        if (iy != total.end()) lf[m].gy = iy->second;
      }
      compare("eps_uncorrected",
              sg.epsilon_for({}, sg.n_trunc + extra, opts));
      compare("eps_order" + std::to_string(deepest),
              sg.epsilon_for(lf, sg.n_trunc + extra, opts));
    }
  }
  std::printf("verify: %d metrics recomputed, worst deviation %.3e (tol %g)\n",
              checked, worst, tol);
  return worst <= tol ? 0 : 1;
}

int cmd_pointwise_csv(const std::string& coeff_path, int point_index,
                      const std::string& out_dir, bool spectrum) {
  std::ifstream in(coeff_path);
  if (!in) throw ConfigError("cannot open '" + coeff_path + "'");
  json doc;
  in >> doc;
  RunConfig cfg = config_for_point(doc.at("metadata"));
  const auto& points = doc.at("points");
  if (point_index < 0 || point_index >= static_cast<int>(points.size()))
    throw ConfigError("point index out of range");
  const auto& point = points[point_index];
  if (point.contains("error")) throw ConfigError("stored point failed");
  const double tf = point.at("tf").get<double>();
  auto total = summed_fields(point);
  fs::create_directories(out_dir);
  auto ps = sample_pulses(cfg, tf, total);
  if (spectrum) {
    write_spectrum_csv(fs::path(out_dir) / "spectrum.csv", ps, tf);
    std::cout << "wrote " << out_dir << "/spectrum.csv\n";
  } else {
    write_pulse_csv(fs::path(out_dir) / "pulse.csv", ps);
    std::cout << "wrote " << out_dir << "/pulse.csv\n";
  }
  return 0;
}

int cmd_bloch(const std::string& coeff_path, int point_index,
              const std::string& out_dir) {
  std::ifstream in(coeff_path);
  if (!in) throw ConfigError("cannot open '" + coeff_path + "'");
  json doc;
  in >> doc;
  RunConfig cfg = config_for_point(doc.at("metadata"));
  const auto& points = doc.at("points");
  if (point_index < 0 || point_index >= static_cast<int>(points.size()))
    throw ConfigError("point index out of range");
  const auto& point = points[point_index];
  const double tf = point.at("tf").get<double>();
  fs::create_directories(out_dir);
  write_bloch_csv(fs::path(out_dir) / "bloch.csv", cfg, tf,
                  summed_fields(point));
  std::cout << "wrote " << out_dir << "/bloch.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulseforge: constraint-compatible correction pulses from a "
               "Magnus order-by-order solve"};
  app.require_subcommand(1);

  std::string config_path, scenario, sweep_text, out_dir, coeff_path;
  double tf = 0, tol = 1e-10, ode_tol = 0;
  std::int64_t seed = -1;
  int order = 0, workers = 0, point_index = 0;
  bool emit_pulse = false, emit_spectrum = false, emit_bloch = false;

  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment description");
    cmd->add_option("--scenario", scenario,
                    "qubit | pdc | transmon | snap (overrides config)");
    cmd->add_option("--order", order, "correction order 1..6");
    cmd->add_option("--tf", tf, "single final time (scenario units)");
    cmd->add_option("--tf-sweep", sweep_text, "sweep START:END:COUNT");
    cmd->add_option("--seed", seed, "seed for multistart root searches");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--tol", ode_tol, "ODE relative tolerance");
    cmd->add_option("--workers", workers, "sweep worker threads");
    cmd->add_flag("--emit-pulse", emit_pulse, "write pulse CSVs");
    cmd->add_flag("--emit-spectrum", emit_spectrum, "write spectrum CSVs");
    cmd->add_flag("--emit-bloch", emit_bloch, "write Bloch CSVs");
  };

  CLI::App* run = app.add_subcommand(
      "run", "synthesize corrections and verify them by simulation");
  add_run_options(run);
  CLI::App* sweep =
      app.add_subcommand("sweep", "like run, over a final-time sweep");
  add_run_options(sweep);

  CLI::App* verify = app.add_subcommand(
      "verify", "re-simulate a coefficients.json and compare stored metrics");
  verify->add_option("--coefficients", coeff_path, "coefficients.json path")
      ->required();
  verify->add_option("--tol", tol, "comparison tolerance");

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "pulse spectra for one stored sweep point");
  spectrum->add_option("--coefficients", coeff_path)->required();
  spectrum->add_option("--point", point_index, "sweep point index");
  spectrum->add_option("--out", out_dir, "output directory")->required();

  CLI::App* bloch = app.add_subcommand(
      "bloch", "Bloch trajectories for one stored qubit sweep point");
  bloch->add_option("--coefficients", coeff_path)->required();
  bloch->add_option("--point", point_index, "sweep point index");
  bloch->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || sweep->parsed()) {
      RunConfig cfg;
      if (!config_path.empty()) cfg = load_config(config_path);
      if (!scenario.empty()) cfg.scenario = scenario;
      if (order > 0) cfg.order = order;
      if (!sweep_text.empty())
        cfg.tf_points = parse_sweep_flag(sweep_text).points();
      if (tf > 0) cfg.tf_points = {tf};
      if (seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.seed_set = true;
      }
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (ode_tol > 0) cfg.ode_rtol = ode_tol;
      if (emit_pulse) cfg.emit.pulse_csv = true;
      if (emit_spectrum) cfg.emit.spectrum_csv = true;
      if (emit_bloch) cfg.emit.bloch_csv = true;
      if (sweep->parsed() && sweep_text.empty() && cfg.tf_points.size() < 2)
        throw ConfigError("sweep requires --tf-sweep or a config sweep");
      return cmd_run(cfg, workers);
    }
    if (verify->parsed()) return cmd_verify(coeff_path, tol);
    if (spectrum->parsed())
      return cmd_pointwise_csv(coeff_path, point_index, out_dir, true);
    if (bloch->parsed()) return cmd_bloch(coeff_path, point_index, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
