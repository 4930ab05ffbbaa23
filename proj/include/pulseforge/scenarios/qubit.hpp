#pragma once

#include <map>
#include <numbers>
#include <string>

#include "pulseforge/metrics.hpp"
#include "pulseforge/propagation.hpp"
#include "pulseforge/quadrature.hpp"
#include "pulseforge/solver.hpp"

namespace pulseforge::scenarios {

// Resonantly driven two-level system beyond the rotating-wave regime. Units:
// the qubit (= drive) frequency is 1, times are measured in 1/omega_q. The
// rotating frame keeps the counter-rotating terms at 2 omega_d; they are the
// error to be averaged away. Correction knobs: two quadrature envelopes on
// the single physical drive line plus a static detuning, i.e. effective
// three-axis control from one control line.
struct QubitStrongDriving {
  double theta0 = std::numbers::pi / 2;
  double t_f = 5.0;
  double wd = 1.0;
  OperatorBasis basis = pauli_basis();
  Envelope env;

  QubitStrongDriving(double theta0_, double tf_)
      : theta0(theta0_), t_f(tf_),
        env(Envelope::raised_cosine(theta0_, tf_)) {
    if (theta0 < 0 || theta0 > 2 * std::numbers::pi)
      throw InvalidParameter("qubit scenario: theta0 outside [0, 2 pi]");
  }

  CoeffFn h0() const {
    const Envelope e = env;
    return [e](double t) {
      VectorXd h = VectorXd::Zero(3);
      h[0] = 0.5 * e.eval(t);
      return h;
    };
  }

  CoeffFn v() const {
    const Envelope e = env;
    const double w = wd;
    return [e, w](double t) {
      const double f = e.eval(t);
      VectorXd h = VectorXd::Zero(3);
      h[0] = 0.5 * f * std::cos(2 * w * t);
      h[1] = -0.5 * f * std::sin(2 * w * t);
      return h;
    };
  }

  // Rotating-frame coefficients of the correction for given quadrature
  // envelope values: the two-quadrature drive keeps its full fast structure,
  // the detuning acts along sigma_z.
  static void w_coeffs(double t, double wd, double gx, double gy, double delta,
                       VectorXd& out) {
    const double cg = gx * std::cos(wd * t) + gy * std::sin(wd * t);
    out[0] = cg * std::cos(wd * t);
    out[1] = -cg * std::sin(wd * t);
    out[2] = delta;
  }

  // Three free parameters: the first harmonic of each quadrature envelope
  // (vanishing at the pulse edges) and the static detuning.
  std::vector<CorrectionChannel> channels() const {
    const double w1 = 2 * std::numbers::pi / t_f;
    const double w = wd;
    std::vector<CorrectionChannel> out;
    out.push_back({"gx", 1, 'b', [w1, w](double t, VectorXd& s) {
                     w_coeffs(t, w, 1.0 - std::cos(w1 * t), 0.0, 0.0, s);
                   }});
    out.push_back({"gy", 1, 'b', [w1, w](double t, VectorXd& s) {
                     w_coeffs(t, w, 0.0, 1.0 - std::cos(w1 * t), 0.0, s);
                   }});
    out.push_back({"delta", 0, '0', [w](double t, VectorXd& s) {
                     w_coeffs(t, w, 0.0, 0.0, 1.0, s);
                   }});
    return out;
  }

  CorrectionSetup setup() const {
    CorrectionSetup cs;
    cs.basis = &basis;
    cs.h0 = h0();
    cs.v = v();
    cs.channels = channels();
    cs.policy = SolvePolicy::exact;
    cs.t_f = t_f;
    return cs;
  }

  MatrixXcd target() const {
    const double a = 0.5 * theta0;
    MatrixXcd u(2, 2);
    u << std::cos(a), cxd(0, -std::sin(a)), cxd(0, -std::sin(a)), std::cos(a);
    return u;
  }

  // Full rotating-frame Hamiltonian for verification, given summed
  // correction envelopes (empty map = uncorrected run).
  MatrixFn verify_hamiltonian(
      const std::map<std::string, FourierField>& fields) const {
    const Envelope e = env;
    const double w = wd;
    const OperatorBasis* b = &basis;
    auto get = [&fields](const char* k) {
      auto it = fields.find(k);
      return it == fields.end() ? FourierField::zeros(1.0, 0, 0) : it->second;
    };
    const FourierField gx = get("gx"), gy = get("gy"), dl = get("delta");
    const bool corrected = !fields.empty();
    return [e, w, b, gx, gy, dl, corrected](double t) {
      const double f = e.eval(t);
      VectorXd h(3);
      h[0] = 0.5 * f * (1.0 + std::cos(2 * w * t));
      h[1] = -0.5 * f * std::sin(2 * w * t);
      h[2] = 0.0;
      if (corrected) {
        VectorXd wv(3);
        w_coeffs(t, w, gx.eval(t), gy.eval(t), dl.eval(t), wv);
        h += wv;
      }
      return b->matrix_from_coeffs(h);
    };
  }

  double epsilon_for(const std::map<std::string, FourierField>& fields,
                     const PropagationOptions& opts = {}) const {
    auto tr = full_propagator_oracle(verify_hamiltonian(fields), 2, t_f, opts);
    return avg_fidelity_error(tr.u_final, target(),
                              MatrixXcd::Identity(2, 2), 2);
  }

  // The reduced 3x3 system matrix evaluated by direct quadrature of the
  // closed-form integrands (the accumulated angle has an analytic form).
  // Rows: sx, sy, sz equations; columns: gx, gy, delta parameters.
  MatrixXd reduced_system_matrix(double quad_tol = 1e-12) const {
    const Envelope e = env;
    const double w = wd, w1 = 2 * std::numbers::pi / t_f;
    auto q = [&](const std::function<double(double)>& fn) {
      return integrate(fn, 0, t_f, quad_tol, quad_tol);
    };
    auto base = [w1](double t) { return 1.0 - std::cos(w1 * t); };
    MatrixXd p(3, 3);
    p(0, 0) = q([&](double t) {
      return base(t) * std::cos(w * t) * std::cos(w * t);
    });
    p(0, 1) = q([&](double t) {
      return base(t) * std::sin(w * t) * std::cos(w * t);
    });
    p(0, 2) = 0.0;
    p(1, 0) = q([&](double t) {
      return -base(t) * std::sin(w * t) * std::cos(w * t) *
             std::cos(e.theta(t));
    });
    p(1, 1) = q([&](double t) {
      return -base(t) * std::sin(w * t) * std::sin(w * t) *
             std::cos(e.theta(t));
    });
    p(1, 2) = q([&](double t) { return std::sin(e.theta(t)); });
    p(2, 0) = q([&](double t) {
      return base(t) * std::sin(w * t) * std::cos(w * t) *
             std::sin(e.theta(t));
    });
    p(2, 1) = q([&](double t) {
      return base(t) * std::sin(w * t) * std::sin(w * t) *
             std::sin(e.theta(t));
    });
    p(2, 2) = q([&](double t) { return std::cos(e.theta(t)); });
    return p;
  }

  // Derivative-based alternative correction (needs a third control axis, so
  // it is for comparison only): first order from integrating the error by
  // parts, second order from the bracket with the accumulated first term.
  CoeffFn derivative_w1() const {
    const Envelope e = env;
    const double w = wd;
    return [e, w](double t) {
      const double fd = e.derivative(t), f = e.eval(t), th = e.theta(t);
      VectorXd out(3);
      out[0] = fd * std::sin(2 * w * t) / (4 * w);
      out[1] = (fd * std::cos(th) - f * f * std::sin(th)) *
               std::cos(2 * w * t) / (4 * w);
      out[2] = -(fd * std::sin(th) + f * f * std::cos(th)) *
               std::cos(2 * w * t) / (4 * w);
      return out;
    };
  }

  CoeffFn derivative_w2() const {
    const Envelope e = env;
    const double w = wd;
    const OperatorBasis* b = &basis;
    CoeffFn w1fn = derivative_w1();
    return [e, w, b, w1fn](double t) {
      const double f = e.eval(t), th = e.theta(t);
      VectorXd omega1(3);  // accumulated first Magnus term of v + w1
      omega1[0] = f * std::sin(2 * w * t) / (4 * w);
      omega1[1] = f * std::cos(2 * w * t) * std::cos(th) / (4 * w);
      omega1[2] = -f * std::cos(2 * w * t) * std::sin(th) / (4 * w);
      VectorXd vt(3);  // rotated error fields, same picture as omega1
      vt[0] = 0.5 * f * std::cos(2 * w * t);
      vt[1] = -0.5 * f * std::sin(2 * w * t) * std::cos(th);
      vt[2] = 0.5 * f * std::sin(2 * w * t) * std::sin(th);
      const VectorXd a = vt + w1fn(t);
      return VectorXd(-0.5 * b->commutator(a, omega1));
    };
  }
};

}  // namespace pulseforge::scenarios
