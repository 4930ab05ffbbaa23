#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "pulseforge/metrics.hpp"
#include "pulseforge/propagation.hpp"
#include "pulseforge/solver.hpp"

namespace pulseforge::scenarios {

// Three-level transmon model: the drive on the 0<->1 transition also drives
// 1<->2 with relative strength eta, leaking population out of the
// computational subspace. Units: |alpha| = 1 (alpha < 0), times in 1/|alpha|.
// The rotating frame is resonant with the qubit; fast 2 w_d terms are
// dropped (leakage dominates them by w_d / |alpha|).
//
// Bookkeeping detail: the projector onto the leakage level is not traceless,
// so the Magnus algebra runs in the traceless eight-operator basis with the
// diagonal element l8; the anharmonicity and the static-detuning knob map
// onto l8 with fixed coefficients (trace parts are global phase and are
// dropped).
struct TransmonGate {
  double theta0 = std::numbers::pi / 2;
  double t_f = 5.0;
  double alpha = -1.0;
  double eta = std::numbers::sqrt2;
  OperatorBasis basis = gellmann3_basis();
  Envelope env;

  TransmonGate(double theta0_, double tf_, double eta_ = std::numbers::sqrt2)
      : theta0(theta0_), t_f(tf_), eta(eta_),
        env(Envelope::raised_cosine(theta0_, tf_)) {
    if (eta <= 0) throw InvalidParameter("transmon scenario: eta must be > 0");
    if (tf_ < 2.0)
      throw InvalidParameter("transmon scenario: |alpha| t_f must be >= 2");
  }

  CoeffFn h0() const {
    const Envelope e = env;
    const double a8 = -alpha / std::sqrt(3.0);  // alpha |2><2| modulo trace
    return [e, a8](double t) {
      VectorXd h = VectorXd::Zero(8);
      h[0] = 0.5 * e.eval(t);
      h[7] = a8;
      return h;
    };
  }

  CoeffFn v() const {
    const Envelope e = env;
    const double et = eta;
    return [e, et](double t) {
      VectorXd h = VectorXd::Zero(8);
      h[3] = 0.5 * et * e.eval(t);  // 1<->2 transition drive
      return h;
    };
  }

  // Correction coefficients for given envelope values: the two quadratures
  // reach sx and sy together with their eta-scaled leakage companions; the
  // static detuning acts along sz + 3 |2><2|, i.e. sz - sqrt(3) l8 modulo
  // trace.
  static void w_coeffs(double eta, double gx, double gy, double delta,
                       VectorXd& out) {
    out.setZero();
    out[0] = 0.5 * gx;
    out[3] = 0.5 * eta * gx;
    out[1] = -0.5 * gy;
    out[4] = 0.5 * eta * gy;
    out[2] = 0.5 * delta;
    out[7] = -0.5 * std::sqrt(3.0) * delta;
  }

  // Free harmonics 1..K on both quadrature envelopes; the bandwidth must
  // reach the anharmonicity to address the leakage transition.
  int harmonic_count() const {
    const int from_bandwidth = static_cast<int>(
        std::ceil(std::abs(alpha) * t_f / (2 * std::numbers::pi)));
    return std::max(7, from_bandwidth);
  }

  std::vector<CorrectionChannel> channels() const {
    const int kmax = harmonic_count();
    if (2 * (2 * kmax + 1) + 1 < 7)
      throw InsufficientBandwidth(
          "fewer free coefficients than correction equations");
    std::vector<CorrectionChannel> out;
    const double w1 = 2 * std::numbers::pi / t_f;
    const double et = eta;
    // the constant terms matter beyond first order: commutators of the
    // leakage operators feed the qubit-sector equations, whose only
    // non-oscillatory control is the envelope mean
    out.push_back({"gx", 0, 'c', [et](double, VectorXd& s) {
                     w_coeffs(et, 1.0, 0, 0, s);
                   }});
    out.push_back({"gy", 0, 'c', [et](double, VectorXd& s) {
                     w_coeffs(et, 0, 1.0, 0, s);
                   }});
    for (int k = 1; k <= kmax; ++k) {
      const double w = w1 * k;
      out.push_back({"gx", k, 'c', [et, w](double t, VectorXd& s) {
                       w_coeffs(et, std::cos(w * t), 0, 0, s);
                     }});
      out.push_back({"gx", k, 's', [et, w](double t, VectorXd& s) {
                       w_coeffs(et, std::sin(w * t), 0, 0, s);
                     }});
      out.push_back({"gy", k, 'c', [et, w](double t, VectorXd& s) {
                       w_coeffs(et, 0, std::cos(w * t), 0, s);
                     }});
      out.push_back({"gy", k, 's', [et, w](double t, VectorXd& s) {
                       w_coeffs(et, 0, std::sin(w * t), 0, s);
                     }});
    }
    out.push_back({"delta", 0, '0', [et](double, VectorXd& s) {
                     w_coeffs(et, 0, 0, 1.0, s);
                   }});
    return out;
  }

  MatrixXcd projector() const {
    MatrixXcd p = MatrixXcd::Zero(3, 3);
    p(0, 0) = 1;
    p(1, 1) = 1;
    return p;
  }

  // Seven equations: the row of the diagonal l8 element is dropped (it acts
  // as a phase on the computational subspace plus action on the leakage
  // level only).
  std::vector<int> active_rows() const { return {0, 1, 2, 3, 4, 5, 6}; }

  CorrectionSetup setup() const {
    CorrectionSetup cs;
    cs.basis = &basis;
    cs.h0 = h0();
    cs.v = v();
    cs.channels = channels();
    cs.active_rows = active_rows();
    cs.policy = SolvePolicy::min_norm;
    cs.t_f = t_f;
    return cs;
  }

  MatrixXcd target() const {
    const double a = 0.5 * theta0;
    MatrixXcd u = MatrixXcd::Identity(3, 3);
    u(0, 0) = std::cos(a);
    u(1, 1) = std::cos(a);
    u(0, 1) = cxd(0, -std::sin(a));
    u(1, 0) = cxd(0, -std::sin(a));
    return u;
  }

  MatrixFn verify_hamiltonian(
      const std::map<std::string, FourierField>& fields) const {
    const Envelope e = env;
    const double et = eta, al = alpha;
    const OperatorBasis* b = &basis;
    auto get = [&fields](const char* k) {
      auto it = fields.find(k);
      return it == fields.end() ? FourierField::zeros(1.0, 0, 0) : it->second;
    };
    const FourierField gx = get("gx"), gy = get("gy"), dl = get("delta");
    const bool corrected = !fields.empty();
    return [e, et, al, b, gx, gy, dl, corrected](double t) {
      VectorXd h = VectorXd::Zero(8);
      const double f = e.eval(t);
      h[0] = 0.5 * f;
      h[7] = -al / std::sqrt(3.0);
      h[3] = 0.5 * et * f;
      if (corrected) {
        VectorXd wv(8);
        w_coeffs(et, gx.eval(t), gy.eval(t), dl.eval(t), wv);
        h += wv;
      }
      return b->matrix_from_coeffs(h);
    };
  }

  double epsilon_for(const std::map<std::string, FourierField>& fields,
                     const PropagationOptions& opts = {}) const {
    auto tr = full_propagator_oracle(verify_hamiltonian(fields), 3, t_f, opts);
    return avg_fidelity_error(tr.u_final, target(), projector(), 2);
  }

  // First-order derivative-style baseline: quadrature envelope proportional
  // to the derivative of the drive. Comparison trace only. (The textbook
  // detuning shift (eta^2-4) f^2 / (4 alpha) was measured to worsen this
  // baseline against the rotating-frame target at every gate time tried, so
  // the stronger derivative-only variant is the one reported.)
  double epsilon_drag(const PropagationOptions& opts = {}) const {
    const Envelope e = env;
    const double et = eta, al = alpha;
    const OperatorBasis* b = &basis;
    const MatrixFn h = [e, et, al, b](double t) {
      VectorXd hv = VectorXd::Zero(8);
      const double f = e.eval(t);
      hv[0] = 0.5 * f;
      hv[7] = -al / std::sqrt(3.0);
      hv[3] = 0.5 * et * f;
      VectorXd wv(8);
      const double gy = -et * et * e.derivative(t) / (4 * al);
      w_coeffs(et, 0.0, gy, 0.0, wv);
      return b->matrix_from_coeffs(hv + wv);
    };
    auto tr = full_propagator_oracle(h, 3, t_f, opts);
    return avg_fidelity_error(tr.u_final, target(), projector(), 2);
  }

  // Closed-form interaction-picture error coefficients (half-angle rotation
  // of the leakage pair under the qubit drive plus the anharmonicity phase).
  CoeffFn v_interaction_closed_form() const {
    const Envelope e = env;
    const double et = eta, al = alpha;
    return [e, et, al](double t) {
      const double f = e.eval(t), th = e.theta(t);
      VectorXd v = VectorXd::Zero(8);
      const double c = 0.5 * et * f;
      v[3] = c * std::cos(0.5 * th) * std::cos(al * t);
      v[4] = c * std::cos(0.5 * th) * std::sin(al * t);
      v[5] = c * std::sin(0.5 * th) * std::sin(al * t);
      v[6] = -c * std::sin(0.5 * th) * std::cos(al * t);
      return v;
    };
  }
};

}  // namespace pulseforge::scenarios
