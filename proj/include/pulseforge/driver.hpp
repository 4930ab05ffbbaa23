#pragma once

#include <cmath>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pulseforge/io.hpp"
#include "pulseforge/metrics.hpp"
#include "pulseforge/scenarios.hpp"

namespace pulseforge {

struct PointResult {
  double t_f = 0;
  // ordered metric columns, e.g. eps_uncorrected, eps_order1, ...
  std::vector<std::pair<std::string, double>> metrics;
  // per-order increments of the correction fields, canonical form
  std::vector<std::map<std::string, FourierField>> fields_per_order;
  std::vector<double> residuals;
  int achieved_order = 0;
  bool diverged = false;
  std::string note;

  double metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    throw Error("missing metric " + name);
  }
};

namespace detail {

inline scenarios::QubitStrongDriving make_qubit(const RunConfig& cfg,
                                                double tf) {
  const double theta0 = cfg.params.value("theta0", std::numbers::pi / 2);
  return scenarios::QubitStrongDriving(theta0, tf);
}

inline scenarios::PdcSqueezing make_pdc(const RunConfig& cfg, double tf) {
  const double r = cfg.params.value("target_r", 1.0);
  return scenarios::PdcSqueezing(tf, r);
}

inline scenarios::TransmonGate make_transmon(const RunConfig& cfg, double tf) {
  const double theta0 = cfg.params.value("theta0", std::numbers::pi / 2);
  const double eta = cfg.params.value("eta", std::numbers::sqrt2);
  return scenarios::TransmonGate(theta0, tf, eta);
}

inline scenarios::SnapGate make_snap(const RunConfig& cfg, double tf) {
  std::map<int, double> phases;
  if (cfg.params.contains("phases")) {
    for (auto it = cfg.params["phases"].begin();
         it != cfg.params["phases"].end(); ++it)
      phases[std::stoi(it.key())] = it.value().get<double>();
  } else {
    phases[0] = std::numbers::pi / 2;
    phases[4] = std::numbers::pi / 2;
  }
  const int n_trunc = cfg.params.value("n_trunc", 10);
  const int n_keep = cfg.params.value("n_keep", -1);
  const int k_max = cfg.params.value("k_max", 2);
  return scenarios::SnapGate(phases, tf, n_trunc, n_keep, k_max);
}

// Runs the linear order-by-order loop, backing off to the deepest
// convergent order when the series diverges.
inline std::pair<CorrectionResult, bool> correct_with_backoff(
    const CorrectionSetup& setup, int order) {
  try {
    return {correct_to_order(setup, order), false};
  } catch (const DivergingCorrection&) {
    for (int k = order - 1; k >= 1; --k) {
      try {
        return {correct_to_order(setup, k), true};
      } catch (const DivergingCorrection&) {
      }
    }
    throw;
  }
}

}  // namespace detail

inline PointResult run_point(const RunConfig& cfg, double tf) {
  PointResult pr;
  pr.t_f = tf;
  PropagationOptions verify_opts;
  verify_opts.rtol = cfg.ode_rtol;
  verify_opts.atol = cfg.ode_rtol * 1e-2;

  if (cfg.scenario == "qubit" || cfg.scenario == "transmon") {
    const bool is_qubit = cfg.scenario == "qubit";
    std::optional<scenarios::QubitStrongDriving> qs;
    std::optional<scenarios::TransmonGate> ts;
    CorrectionSetup setup;
    if (is_qubit) {
      qs.emplace(detail::make_qubit(cfg, tf));
      setup = qs->setup();
    } else {
      ts.emplace(detail::make_transmon(cfg, tf));
      setup = ts->setup();
    }
    setup.ode_rtol = cfg.ode_rtol;
    setup.assembly_rtol = cfg.quad_rtol;
    auto [res, diverged] = detail::correct_with_backoff(setup, cfg.order);
    pr.diverged = diverged;
    pr.achieved_order = res.order();
    auto eps_for = [&](const std::map<std::string, FourierField>& f) {
      return is_qubit ? qs->epsilon_for(f, verify_opts)
                      : ts->epsilon_for(f, verify_opts);
    };
    pr.metrics.emplace_back("eps_uncorrected", eps_for({}));
    for (int k = 1; k <= cfg.order; ++k) {
      if (k > res.order()) {
        pr.metrics.emplace_back("eps_order" + std::to_string(k),
                                std::nan(""));
        continue;
      }
      auto fields = fields_from_solution(res.column_map,
                                         res.summed_coefficients(k), tf);
      pr.metrics.emplace_back("eps_order" + std::to_string(k),
                              eps_for(fields));
      pr.fields_per_order.push_back(
          fields_from_solution(res.column_map, res.x[k - 1], tf));
    }
    if (!is_qubit) {
      pr.metrics.emplace_back("eps_drag", ts->epsilon_drag(verify_opts));
      auto leak = [&](const std::map<std::string, FourierField>& f) {
        auto tr = full_propagator_oracle(ts->verify_hamiltonian(f), 3,
                                         ts->t_f, verify_opts);
        return leakage_fraction(tr.u_final, ts->projector(), 2);
      };
      pr.metrics.emplace_back("leakage_uncorrected", leak({}));
      const int deepest = res.order();
      pr.metrics.emplace_back(
          "leakage_order" + std::to_string(deepest),
          leak(fields_from_solution(res.column_map,
                                    res.summed_coefficients(deepest), tf)));
    }
    for (const auto& d : res.diagnostics) pr.residuals.push_back(d.residual);
    if (diverged)
      pr.note = "correction series diverged; deepest convergent order " +
                std::to_string(res.order());
    return pr;
  }

  if (cfg.scenario == "pdc") {
    auto ps = detail::make_pdc(cfg, tf);
    auto setup = ps.setup();
    setup.ode_rtol = cfg.ode_rtol;
    setup.assembly_rtol = cfg.quad_rtol;
    auto [res, diverged] = detail::correct_with_backoff(setup, cfg.order);
    pr.diverged = diverged;
    pr.achieved_order = res.order();
    auto rwa = ps.squeezing({}, true, 40, verify_opts);
    auto unc = ps.squeezing({}, false, 40, verify_opts);
    auto fields = fields_from_solution(
        res.column_map, res.summed_coefficients(res.order()), tf);
    auto cor = ps.squeezing(fields, false, 40, verify_opts);
    pr.metrics.emplace_back("s_rwa_db", rwa.s_db);
    pr.metrics.emplace_back("s_uncorrected_db", unc.s_db);
    pr.metrics.emplace_back("phi_uncorrected", unc.phi);
    pr.metrics.emplace_back("s_corrected_db", cor.s_db);
    pr.metrics.emplace_back("phi_corrected", cor.phi);
    for (int k = 1; k <= res.order(); ++k)
      pr.fields_per_order.push_back(
          fields_from_solution(res.column_map, res.x[k - 1], tf));
    for (const auto& d : res.diagnostics) pr.residuals.push_back(d.residual);
    return pr;
  }

  if (cfg.scenario == "snap") {
    auto sg = detail::make_snap(cfg, tf);
    const int extra = cfg.params.value("sim_extra_levels", 0);
    const int n_sim = sg.n_trunc + extra;
    pr.metrics.emplace_back("eps_uncorrected",
                            sg.epsilon_for({}, n_sim, verify_opts));
    auto sol = sg.solve(cfg.order, cfg.seed);
    pr.achieved_order = 2 * sol.steps;
    std::vector<scenarios::SnapGate::LevelFields> running(
        sg.n_keep, {FourierField::zeros(tf, 0, sg.k_max),
                    FourierField::zeros(tf, 0, sg.k_max)});
    for (int s = 0; s < sol.steps; ++s) {
      std::map<std::string, FourierField> inc;
      for (int m = 0; m < sg.n_keep; ++m) {
        const auto& snap_f = sol.per_step_fields[s][m];
        inc["gx:" + std::to_string(m)] = snap_f.gx;
        inc["gy:" + std::to_string(m)] = snap_f.gy;
        running[m].gx.c += snap_f.gx.c;
        running[m].gx.d += snap_f.gx.d;
        running[m].gy.c += snap_f.gy.c;
        running[m].gy.d += snap_f.gy.d;
      }
      pr.fields_per_order.push_back(std::move(inc));
      pr.metrics.emplace_back("eps_order" + std::to_string(2 * (s + 1)),
                              sg.epsilon_for(running, n_sim, verify_opts));
    }
    pr.metrics.emplace_back("decoupling_defect", sol.decoupling_defect);
    pr.metrics.emplace_back("weight_ratio", sol.spectral_weight_ratio);
    for (const auto& d : sol.diagnostics) pr.residuals.push_back(d.residual);
    return pr;
  }

  throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

// Sweep over final times on a small worker pool; results arrive in sweep
// order regardless of scheduling.
inline std::vector<PointResult> run_sweep(const RunConfig& cfg,
                                          int max_workers = 0) {
  if (max_workers <= 0)
    max_workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<PointResult> out(cfg.tf_points.size());
  std::size_t next = 0, done = 0;
  std::vector<std::pair<std::size_t, std::future<PointResult>>> live;
  while (done < cfg.tf_points.size()) {
    while (next < cfg.tf_points.size() &&
           live.size() < static_cast<std::size_t>(max_workers)) {
      const double tf = cfg.tf_points[next];
      live.emplace_back(next, std::async(std::launch::async, [&cfg, tf] {
                          return run_point(cfg, tf);
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

}  // namespace pulseforge
