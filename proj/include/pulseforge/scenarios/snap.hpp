#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "pulseforge/metrics.hpp"
#include "pulseforge/propagation.hpp"
#include "pulseforge/quadrature.hpp"
#include "pulseforge/solver.hpp"

namespace pulseforge::scenarios {

// Number-selective qubit drives on a dispersively coupled cavity: each tone
// at w_q + chi*m is resonant for cavity level m and imprints a geometric
// phase there via a cyclic two-half pulse (a pi rotation about x followed by
// a pi rotation about an equatorial axis whose azimuth sets the phase). All
// other levels see detuned rotations - the error. Units: chi = 1.
//
// Off-resonant errors proportional to sigma_z on undriven levels cannot be
// reached by the drive at first order; the corrections therefore cancel the
// *sum* of the first two Magnus terms per level, which is quadratic in the
// free coefficients. Levels decouple approximately (each correction tone is
// assumed to act only on its own level); the residual coupling is measured,
// not assumed.
struct SnapGate {
  std::map<int, double> phases;  // level -> target phase
  double t_f = 50.0;
  double chi = 1.0;
  int n_trunc = 10;
  int n_keep = 10;  // levels that receive correction tones / equations
  int k_max = 2;    // correction harmonics per quadrature
  OperatorBasis block = pauli_basis();

  SnapGate(std::map<int, double> phases_, double tf_, int n_trunc_ = 10,
           int n_keep_ = -1, int k_max_ = 2)
      : phases(std::move(phases_)), t_f(tf_), n_trunc(n_trunc_),
        n_keep(n_keep_ < 0 ? n_trunc_ : n_keep_), k_max(k_max_) {
    int top = 0;
    for (const auto& [lvl, g] : phases) {
      if (lvl < 0) throw InvalidParameter("snap: negative level");
      top = std::max(top, lvl);
    }
    if (n_trunc < top + 1)
      throw InvalidParameter("snap: truncation below the driven levels");
    if (n_keep > n_trunc)
      throw InvalidParameter("snap: more corrected levels than kept levels");
    if (2 * (2 * k_max + 1) < 4)
      throw InvalidParameter("snap: fewer than four free parameters a level");
  }

  bool driven(int level) const { return phases.count(level) > 0; }

  bool all_levels_driven() const {
    for (int n = 0; n < n_trunc; ++n)
      if (!driven(n)) return false;
    return true;
  }

  // --- original drive -------------------------------------------------

  double pulse_amp() const { return 2 * std::numbers::pi / t_f; }

  double half_env(double t, int half) const {
    const bool in_half = (half == 0) ? (t < 0.5 * t_f) : (t >= 0.5 * t_f);
    if (!in_half) return 0.0;
    return 1.0 - std::cos(4 * std::numbers::pi * t / t_f);
  }

  // Quadrature envelopes of the tone addressing `level`: first half rotates
  // about x by pi, second half about the equatorial axis at azimuth
  // (gamma - pi) by pi, closing the loop with geometric phase gamma.
  double fx(int level, double t) const {
    auto it = phases.find(level);
    if (it == phases.end()) return 0.0;
    const double ax = it->second - std::numbers::pi;
    return pulse_amp() *
           (half_env(t, 0) + std::cos(ax) * half_env(t, 1));
  }
  double fy(int level, double t) const {
    auto it = phases.find(level);
    if (it == phases.end()) return 0.0;
    const double ax = it->second - std::numbers::pi;
    return pulse_amp() * (-std::sin(ax)) * half_env(t, 1);
  }

  // Action of a tone with quadratures (fxv, fyv) and detuning `det` on one
  // cavity level, in block Pauli coefficients.
  static void tone_action(double t, double det, double fxv, double fyv,
                          VectorXd& add) {
    const double c = std::cos(det * t), s = std::sin(det * t);
    add[0] += 0.5 * (fxv * c - fyv * s);
    add[1] += 0.5 * (-fxv * s - fyv * c);
  }

  CoeffFn block_h0(int n) const {
    const SnapGate* self = this;
    return [self, n](double t) {
      VectorXd h = VectorXd::Zero(3);
      if (self->driven(n))
        tone_action(t, 0.0, self->fx(n, t), self->fy(n, t), h);
      return h;
    };
  }

  // Cross action of all original drive tones on block n.
  CoeffFn block_v(int n) const {
    const SnapGate* self = this;
    return [self, n](double t) {
      VectorXd h = VectorXd::Zero(3);
      for (const auto& [m, g] : self->phases)
        if (m != n)
          tone_action(t, self->chi * (n - m), self->fx(m, t), self->fy(m, t),
                      h);
      return h;
    };
  }

  // --- correction bookkeeping ------------------------------------------

  struct LevelFields {
    FourierField gx, gy;
  };

  // Per-level free parameters, both envelopes: [c_0..c_k, d_1..d_k] each.
  // The constant terms are essential: on an undriven level the correction
  // enters the first two Magnus terms' x/y components only through the
  // envelope means (cross products of z-free vectors stay in the plane), so
  // without them the per-level system generically has no root.
  int params_per_level() const { return 2 * (2 * k_max + 1); }

  LevelFields fields_from_params(const VectorXd& x) const {
    LevelFields lf{FourierField::zeros(t_f, 0, k_max),
                   FourierField::zeros(t_f, 0, k_max)};
    const int stride = 2 * k_max + 1;
    lf.gx.c[0] = x[0];
    lf.gy.c[0] = x[stride];
    for (int k = 1; k <= k_max; ++k) {
      lf.gx.c[k] = x[k];
      lf.gx.d[k] = x[k_max + k];
      lf.gy.c[k] = x[stride + k];
      lf.gy.d[k] = x[stride + k_max + k];
    }
    return lf;
  }

  struct Solution {
    std::vector<LevelFields> fields;             // accumulated, per level
    std::vector<std::vector<LevelFields>> per_step_fields;  // increments
    std::vector<SolveDiagnostics> diagnostics;   // per (step, level)
    double decoupling_defect = 0;                // full coupled |O1 + O2|
    double spectral_weight_ratio = 0;            // correction vs original L2
    int steps = 0;
  };

  // Resonant own-tone correction action on block n for given accumulated
  // level fields.
  static CoeffFn own_correction(const LevelFields& lf) {
    const FourierField gx = lf.gx, gy = lf.gy;
    return [gx, gy](double t) {
      VectorXd h(3);
      h[0] = 0.5 * gx.eval(t);
      h[1] = -0.5 * gy.eval(t);
      h[2] = 0.0;
      return h;
    };
  }

  // Original-drive error plus the full action (resonant and cross) of every
  // accumulated correction tone on block n. Only the new update is treated
  // as level-local; the already-found corrections enter exactly, so each
  // step also cancels the residue the decoupling left behind.
  CoeffFn block_fixed_fields(int n,
                             const std::vector<LevelFields>& acc) const {
    const SnapGate* self = this;
    const std::vector<LevelFields> fields = acc;
    return [self, n, fields](double t) {
      VectorXd h = VectorXd::Zero(3);
      for (const auto& [m, g] : self->phases)
        if (m != n)
          tone_action(t, self->chi * (n - m), self->fx(m, t), self->fy(m, t),
                      h);
      for (int m = 0; m < static_cast<int>(fields.size()); ++m)
        tone_action(t, self->chi * (n - m), fields[m].gx.eval(t),
                    fields[m].gy.eval(t), h);
      return h;
    };
  }

  // Unit-coefficient shapes of the level-local correction parameters, in
  // the order used by fields_from_params.
  std::vector<CorrectionChannel> level_channels() const {
    std::vector<CorrectionChannel> out;
    const double w1 = 2 * std::numbers::pi / t_f;
    auto push = [&](const std::string& label, int k, char kind, int comp,
                    double sign) {
      double w = w1 * k;
      if (kind == 'c')
        out.push_back({label, k, 'c', [comp, sign, w](double t, VectorXd& s) {
                         s.setZero();
                         s[comp] = sign * 0.5 * std::cos(w * t);
                       }});
      else
        out.push_back({label, k, 's', [comp, sign, w](double t, VectorXd& s) {
                         s.setZero();
                         s[comp] = sign * 0.5 * std::sin(w * t);
                       }});
    };
    push("gx", 0, 'c', 0, 1.0);
    for (int k = 1; k <= k_max; ++k) push("gx", k, 'c', 0, 1.0);
    for (int k = 1; k <= k_max; ++k) push("gx", k, 's', 0, 1.0);
    push("gy", 0, 'c', 1, -1.0);
    for (int k = 1; k <= k_max; ++k) push("gy", k, 'c', 1, -1.0);
    for (int k = 1; k <= k_max; ++k) push("gy", k, 's', 1, -1.0);
    return out;
  }

  // One quadratic step of order 2s for a single level; returns the update.
  VectorXd solve_level_step(int n, int step,
                            const std::vector<LevelFields>& acc,
                            std::uint64_t seed, SolveDiagnostics* diag,
                            double ode_rtol = 1e-9) const {
    CoeffFn h0 = block_h0(n);
    CoeffFn prev = block_fixed_fields(n, acc);
    VectorXd tail = VectorXd::Zero(3);
    if (step > 1) {
      MagnusStack st = integrate_magnus_in_frame(h0, prev, block, 2 * step,
                                                 t_f, ode_rtol, 1e-13);
      tail = st.partial_sum(2 * step) - st.partial_sum(2);
    }
    QuadraticResidual qr = magnus2_quadratic_residual(
        h0, prev, level_channels(), block, t_f, tail, ode_rtol);
    QuadraticSolveOptions qopts;
    qopts.seed = seed;
    return solve_quadratic_residual(qr, qopts, diag);
  }

  static std::uint64_t mix_seed(std::uint64_t master, int level, int step) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL *
                                   (std::uint64_t)(1 + level + 131 * step);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Order-by-order solve: step s cancels the Magnus sum through order 2s.
  Solution solve(int order, std::uint64_t seed,
                 double ode_rtol = 1e-9) const {
    if (order % 2 != 0 || order < 2)
      throw InvalidParameter("snap: correction order must be even");
    const int steps = order / 2;
    Solution sol;
    sol.steps = steps;
    sol.fields.assign(n_keep, LevelFields{FourierField::zeros(t_f, 0, k_max),
                                          FourierField::zeros(t_f, 0, k_max)});
    for (int s = 1; s <= steps; ++s) {
      // all levels of one step solve against the same snapshot, so the
      // per-level solves stay order-independent (and parallelizable)
      const std::vector<LevelFields> snapshot = sol.fields;
      std::vector<LevelFields> increments;
      for (int n = 0; n < n_keep; ++n) {
        SolveDiagnostics diag;
        VectorXd x = solve_level_step(n, s, snapshot, mix_seed(seed, n, s),
                                      &diag, ode_rtol);
        LevelFields upd = fields_from_params(x);
        sol.fields[n].gx.c += upd.gx.c;
        sol.fields[n].gx.d += upd.gx.d;
        sol.fields[n].gy.c += upd.gy.c;
        sol.fields[n].gy.d += upd.gy.d;
        increments.push_back(std::move(upd));
        sol.diagnostics.push_back(diag);
      }
      sol.per_step_fields.push_back(std::move(increments));
    }
    sol.decoupling_defect = coupled_magnus_defect(sol.fields, ode_rtol);
    sol.spectral_weight_ratio = weight_ratio(sol.fields);
    return sol;
  }

  // Full coupled first-plus-second Magnus norm with every correction tone
  // acting on every level (the decoupling approximation's defect).
  double coupled_magnus_defect(const std::vector<LevelFields>& fields,
                               double ode_rtol = 1e-11) const {
    double acc = 0;
    for (int n = 0; n < n_trunc; ++n) {
      CoeffFn h0 = block_h0(n);
      const SnapGate* self = this;
      CoeffFn vfix = block_v(n);
      CoeffFn full = [self, n, vfix, &fields](double t) {
        VectorXd h = vfix(t);
        for (int m = 0; m < static_cast<int>(fields.size()); ++m)
          tone_action(t, self->chi * (n - m), fields[m].gx.eval(t),
                      fields[m].gy.eval(t), h);
        return h;
      };
      MagnusStack st =
          integrate_magnus_in_frame(h0, full, block, 2, t_f, ode_rtol);
      acc += st.partial_sum(2).squaredNorm();
    }
    return std::sqrt(acc);
  }

  double weight_ratio(const std::vector<LevelFields>& fields) const {
    auto l2 = [&](const std::function<double(double)>& f) {
      return integrate([&](double t) { return f(t) * f(t); }, 0, t_f, 1e-10,
                       1e-10);
    };
    double corr = 0, orig = 0;
    for (int m = 0; m < static_cast<int>(fields.size()); ++m) {
      corr += l2([&](double t) { return fields[m].gx.eval(t); });
      corr += l2([&](double t) { return fields[m].gy.eval(t); });
    }
    for (const auto& [m, g] : phases) {
      orig += l2([&](double t) { return fx(m, t); });
      orig += l2([&](double t) { return fy(m, t); });
    }
    return std::sqrt(corr / orig);
  }

  // --- all-levels linear variant ---------------------------------------

  // When every kept level is driven, the ideal evolution reaches all blocks
  // and the conjugated correction acquires sigma_z components everywhere;
  // the general linear route applies.
  CorrectionSetup linear_setup(const OperatorBasis& full_basis) const {
    if (!all_levels_driven())
      throw InvalidParameter(
          "snap linear route requires drives on every kept level");
    CorrectionSetup cs;
    cs.basis = &full_basis;
    const SnapGate* self = this;
    const int nt = n_trunc;
    cs.h0 = [self, nt](double t) {
      VectorXd h = VectorXd::Zero(3 * nt);
      VectorXd blockh(3);
      for (int n = 0; n < nt; ++n) {
        blockh.setZero();
        tone_action(t, 0.0, self->fx(n, t), self->fy(n, t), blockh);
        h.segment(3 * n, 3) = blockh;
      }
      return h;
    };
    cs.v = [self, nt](double t) {
      VectorXd h = VectorXd::Zero(3 * nt);
      VectorXd blockh(3);
      for (int n = 0; n < nt; ++n) {
        blockh.setZero();
        for (const auto& [m, g] : self->phases)
          if (m != n)
            tone_action(t, self->chi * (n - m), self->fx(m, t),
                        self->fy(m, t), blockh);
        h.segment(3 * n, 3) = blockh;
      }
      return h;
    };
    const double w1 = 2 * std::numbers::pi / t_f;
    for (int m = 0; m < n_keep; ++m)
      for (int k = 1; k <= k_max; ++k) {
        const double w = w1 * k;
        cs.channels.push_back({"gx:" + std::to_string(m), k, 'c',
                               [m, w](double t, VectorXd& s) {
                                 s.setZero();
                                 s[3 * m] = 0.5 * std::cos(w * t);
                               }});
        cs.channels.push_back({"gx:" + std::to_string(m), k, 's',
                               [m, w](double t, VectorXd& s) {
                                 s.setZero();
                                 s[3 * m] = 0.5 * std::sin(w * t);
                               }});
        cs.channels.push_back({"gy:" + std::to_string(m), k, 'c',
                               [m, w](double t, VectorXd& s) {
                                 s.setZero();
                                 s[3 * m + 1] = -0.5 * std::cos(w * t);
                               }});
        cs.channels.push_back({"gy:" + std::to_string(m), k, 's',
                               [m, w](double t, VectorXd& s) {
                                 s.setZero();
                                 s[3 * m + 1] = -0.5 * std::sin(w * t);
                               }});
      }
    cs.policy = SolvePolicy::min_norm;
    cs.t_f = t_f;
    return cs;
  }

  // Converts a linear-route result to per-level fields.
  std::vector<LevelFields> fields_from_linear(
      const CorrectionResult& res) const {
    auto by_label =
        fields_from_solution(res.column_map, res.summed_coefficients(res.order()),
                             t_f);
    std::vector<LevelFields> out(n_keep,
                                 LevelFields{FourierField::zeros(t_f, 0, k_max),
                                             FourierField::zeros(t_f, 0, k_max)});
    for (int m = 0; m < n_keep; ++m) {
      auto ix = by_label.find("gx:" + std::to_string(m));
      auto iy = by_label.find("gy:" + std::to_string(m));
      if (ix != by_label.end()) out[m].gx = ix->second;
      if (iy != by_label.end()) out[m].gy = iy->second;
    }
    return out;
  }

  // --- verification ------------------------------------------------------

  // Per-level 2x2 propagators with every tone (original plus corrections)
  // acting on every level.
  std::vector<MatrixXcd> block_unitaries(
      const std::vector<LevelFields>& fields, int n_sim,
      const PropagationOptions& opts = {}) const {
    std::vector<MatrixXcd> out;
    const SnapGate* self = this;
    for (int n = 0; n < n_sim; ++n) {
      const MatrixFn h = [self, n, &fields](double t) {
        VectorXd c = VectorXd::Zero(3);
        for (const auto& [m, g] : self->phases)
          tone_action(t, self->chi * (n - m), self->fx(m, t), self->fy(m, t),
                      c);
        for (int m = 0; m < static_cast<int>(fields.size()); ++m)
          tone_action(t, self->chi * (n - m), fields[m].gx.eval(t),
                      fields[m].gy.eval(t), c);
        return self->block.matrix_from_coeffs(c);
      };
      out.push_back(propagate_unitary(h, 2, t_f, opts).u_final);
    }
    return out;
  }

  // Ideal per-level unitaries: the imprinted phase on driven levels (qubit
  // ground and excited sectors conjugate), identity elsewhere.
  MatrixXcd target_block(int n) const {
    auto it = phases.find(n);
    if (it == phases.end()) return MatrixXcd::Identity(2, 2);
    MatrixXcd u = MatrixXcd::Zero(2, 2);
    u(0, 0) = std::exp(cxd(0, it->second));
    u(1, 1) = std::exp(cxd(0, -it->second));
    return u;
  }

  // Average fidelity error over the truncated space (qubit x levels below
  // n_trunc), simulated with n_sim >= n_trunc levels.
  double epsilon_for(const std::vector<LevelFields>& fields, int n_sim = -1,
                     const PropagationOptions& opts = {}) const {
    if (n_sim < 0) n_sim = n_trunc;
    auto us = block_unitaries(fields, n_sim, opts);
    const int dim = 2 * n_sim;
    MatrixXcd u = MatrixXcd::Zero(dim, dim);
    MatrixXcd tgt = MatrixXcd::Identity(dim, dim);
    MatrixXcd proj = MatrixXcd::Zero(dim, dim);
    for (int n = 0; n < n_sim; ++n) {
      const int ig = n, ie = n_sim + n;  // qubit-major indexing
      u(ig, ig) = us[n](0, 0);
      u(ig, ie) = us[n](0, 1);
      u(ie, ig) = us[n](1, 0);
      u(ie, ie) = us[n](1, 1);
      if (n < n_trunc) {
        MatrixXcd tb = target_block(n);
        tgt(ig, ig) = tb(0, 0);
        tgt(ie, ie) = tb(1, 1);
        proj(ig, ig) = 1;
        proj(ie, ie) = 1;
      }
    }
    return avg_fidelity_error(u, tgt, proj, 2 * n_trunc);
  }

  // Combined drive quadratures relative to the qubit carrier (what a signal
  // generator would synthesize); used for spectra.
  std::pair<std::vector<double>, std::vector<double>> quadrature_samples(
      const std::vector<LevelFields>& fields, int count = 2048) const {
    std::vector<double> xs(count), ys(count);
    for (int i = 0; i < count; ++i) {
      const double t = t_f * i / count;
      double fxt = 0, fyt = 0;
      auto add_tone = [&](int m, double fxv, double fyv) {
        const double c = std::cos(chi * m * t), s = std::sin(chi * m * t);
        fxt += fxv * c + fyv * s;
        fyt += -fxv * s + fyv * c;
      };
      for (const auto& [m, g] : phases) add_tone(m, fx(m, t), fy(m, t));
      for (int m = 0; m < static_cast<int>(fields.size()); ++m)
        add_tone(m, fields[m].gx.eval(t), fields[m].gy.eval(t));
      xs[i] = fxt;
      ys[i] = fyt;
    }
    return {xs, ys};
  }
};

}  // namespace pulseforge::scenarios
