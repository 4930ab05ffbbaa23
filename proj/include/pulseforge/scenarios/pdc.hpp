#pragma once

#include <map>
#include <numbers>
#include <string>

#include "pulseforge/metrics.hpp"
#include "pulseforge/propagation.hpp"
#include "pulseforge/quadrature.hpp"
#include "pulseforge/solver.hpp"

namespace pulseforge::scenarios {

// Parametrically pumped cavity generating squeezing on a short time scale.
// Units: the cavity frequency is 1, the pump runs at w_d = 2. The rotating
// frame at half the pump frequency leaves the su(1,1) ideal generator plus
// fast terms at w_d and 2 w_d; the coefficient dynamics is exactly
// three-dimensional even though the Hilbert space is not. Correction knobs:
// two quadrature envelopes of the pump plus a static pump detuning.
struct PdcSqueezing {
  double t_f = 20.0;
  double wd = 2.0;
  OperatorBasis algebra = su11_basis(8);  // structure constants only
  Envelope pump;

  explicit PdcSqueezing(double tf_, double target_r = 1.0)
      : t_f(tf_), pump(Envelope::raised_cosine(target_r, tf_)) {
    if (tf_ <= 0) throw InvalidParameter("pdc scenario: t_f must be positive");
  }

  CoeffFn h0() const {
    const Envelope e = pump;
    return [e](double t) {
      VectorXd h = VectorXd::Zero(3);
      h[1] = e.eval(t);
      return h;
    };
  }

  CoeffFn v() const {
    const Envelope e = pump;
    const double w = wd;
    return [e, w](double t) {
      const double f = e.eval(t);
      VectorXd h(3);
      h[0] = f * std::sin(2 * w * t);
      h[1] = -f * std::cos(2 * w * t);
      h[2] = 2 * f * std::sin(w * t);
      return h;
    };
  }

  // Correction coefficients for given envelope values. The quadratic pump
  // operator carries both squeezing generators and the number operator, so a
  // single pump envelope feeds all three directions.
  static void w_coeffs(double t, double wd, double gx, double gy, double delta,
                       VectorXd& out) {
    const double g = gx * std::cos(wd * t) + gy * std::sin(wd * t);
    out[0] = 2 * g * std::cos(wd * t);
    out[1] = 2 * g * std::sin(wd * t);
    out[2] = 2 * g + delta;
  }

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
    cs.basis = &algebra;
    cs.h0 = h0();
    cs.v = v();
    cs.channels = channels();
    cs.policy = SolvePolicy::exact;
    cs.t_f = t_f;
    return cs;
  }

  // Reduced system matrix by quadrature of the closed hyperbolic forms.
  // Note the middle row: the mu_y equation follows w_y(t) = 2 g(t) sin(w_d t)
  // with a plus sign (the printed appendix table carries a stray minus there,
  // inconsistent with its own interaction-picture fields).
  MatrixXd reduced_system_matrix(double quad_tol = 1e-12) const {
    const Envelope e = pump;
    const double w = wd, w1 = 2 * std::numbers::pi / t_f;
    auto q = [&](const std::function<double(double)>& fn) {
      return integrate(fn, 0, t_f, quad_tol, quad_tol);
    };
    auto base = [w1](double t) { return 1.0 - std::cos(w1 * t); };
    auto ch = [&](double t) { return std::cosh(2 * e.theta(t)); };
    auto sh = [&](double t) { return std::sinh(2 * e.theta(t)); };
    MatrixXd p(3, 3);
    p(0, 0) = q([&](double t) {
      return base(t) * ((1 + std::cos(2 * w * t)) * ch(t) +
                        2 * std::cos(w * t) * sh(t));
    });
    p(0, 1) = q([&](double t) {
      return base(t) *
             (std::sin(2 * w * t) * ch(t) + 2 * std::sin(w * t) * sh(t));
    });
    p(0, 2) = q(sh);
    p(1, 0) = q([&](double t) { return base(t) * std::sin(2 * w * t); });
    p(1, 1) = q([&](double t) { return base(t) * (1 - std::cos(2 * w * t)); });
    p(1, 2) = 0.0;
    p(2, 0) = q([&](double t) {
      return base(t) * ((1 + std::cos(2 * w * t)) * sh(t) +
                        2 * std::cos(w * t) * ch(t));
    });
    p(2, 1) = q([&](double t) {
      return base(t) *
             (std::sin(2 * w * t) * sh(t) + 2 * std::sin(w * t) * ch(t));
    });
    p(2, 2) = q(ch);
    return p;
  }

  // Evolves the vacuum in a truncated Fock space under the full pump
  // Hamiltonian; empty field map = uncorrected, `rwa` drops the fast terms.
  Eigen::VectorXcd evolve(const std::map<std::string, FourierField>& fields,
                          int cut, bool rwa = false,
                          const PropagationOptions& opts = {}) const {
    OperatorBasis rep = su11_basis(cut);
    const Envelope e = pump;
    const double w = wd;
    CoeffFn verr = v();
    auto get = [&fields](const char* k) {
      auto it = fields.find(k);
      return it == fields.end() ? FourierField::zeros(1.0, 0, 0) : it->second;
    };
    const FourierField gx = get("gx"), gy = get("gy"), dl = get("delta");
    const bool corrected = !fields.empty();
    const MatrixFn h = [&, corrected, gx, gy, dl](double t) {
      VectorXd c = VectorXd::Zero(3);
      c[1] = e.eval(t);
      if (!rwa) c += verr(t);
      if (corrected) {
        VectorXd wc(3);
        w_coeffs(t, w, gx.eval(t), gy.eval(t), dl.eval(t), wc);
        c += wc;
      }
      return rep.matrix_from_coeffs(c);
    };
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(cut);
    vac[0] = 1.0;
    return propagate_state(h, vac, t_f, opts).back().second;
  }

  SqueezeReport squeezing(const std::map<std::string, FourierField>& fields,
                          bool rwa = false, int initial_cut = 40,
                          const PropagationOptions& opts = {}) const {
    SqueezeReport rep = squeezing_with_auto_cut(
        [&](int cut) {
          Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(cut);
          vac[0] = 1.0;
          return std::make_pair(vac, evolve(fields, cut, rwa, opts));
        },
        initial_cut);
    rep.t_f = t_f;
    return rep;
  }
};

}  // namespace pulseforge::scenarios
