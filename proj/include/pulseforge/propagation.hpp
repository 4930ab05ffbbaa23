#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pulseforge/algebra.hpp"
#include "pulseforge/ode.hpp"

namespace pulseforge {

using CoeffFn = std::function<VectorXd(double)>;     // t -> basis coefficients
using MatrixFn = std::function<MatrixXcd(double)>;   // t -> Hamiltonian matrix

struct PropagatorTrace {
  double t_f = 0;
  MatrixXcd u_final;
  std::vector<std::pair<double, MatrixXcd>> samples;

  // max_t || U(t)^dag U(t) - 1 ||_max over the stored samples
  double unitarity_defect() const {
    double worst = 0;
    const auto check = [&](const MatrixXcd& u) {
      const MatrixXcd g = u.adjoint() * u;
      const MatrixXcd dev =
          g - MatrixXcd::Identity(u.rows(), u.cols());
      worst = std::max(worst, dev.cwiseAbs().maxCoeff());
    };
    for (const auto& [t, u] : samples) check(u);
    check(u_final);
    return worst;
  }
};

struct PropagationOptions {
  double rtol = 1e-11;
  double atol = 1e-13;
  int sample_stride = 64;
};

// Solves dU/dt = -i H(t) U, U(0) = 1.
inline PropagatorTrace propagate_unitary(const MatrixFn& h, int dim, double t_f,
                                         const PropagationOptions& opts = {}) {
  OdeOptions oo;
  oo.rtol = opts.rtol;
  oo.atol = opts.atol;
  oo.sample_stride = opts.sample_stride;
  MatrixXcd hbuf(dim, dim);
  const OdeRhs rhs = [&h, dim, &hbuf](double t, const Eigen::VectorXd& y,
                                      Eigen::VectorXd& dy) {
    const MatrixXcd u = unpack_complex(y, dim, dim);
    hbuf = h(t);
    const MatrixXcd du = cxd(0, -1) * (hbuf * u);
    dy = pack_complex(du);
  };
  const MatrixXcd u0 = MatrixXcd::Identity(dim, dim);
  OdeSolution sol = integrate_ode(rhs, pack_complex(u0), 0.0, t_f, oo);
  PropagatorTrace tr;
  tr.t_f = t_f;
  tr.u_final = unpack_complex(sol.y_final, dim, dim);
  tr.samples.reserve(sol.samples.size());
  for (auto& [t, y] : sol.samples)
    tr.samples.emplace_back(t, unpack_complex(y, dim, dim));
  return tr;
}

// Ideal propagator for H0(t) = sum_j h_j(t) A_j.
inline PropagatorTrace ideal_propagator(const CoeffFn& h,
                                        const OperatorBasis& basis, double t_f,
                                        const PropagationOptions& opts = {}) {
  const MatrixFn hm = [&h, &basis](double t) {
    return basis.matrix_from_coeffs(h(t));
  };
  return propagate_unitary(hm, basis.dim, t_f, opts);
}

// Ground-truth verifier: same integrator, Hamiltonian given directly as a
// matrix-valued function (may include fast lab-frame terms).
inline PropagatorTrace full_propagator_oracle(const MatrixFn& h, int dim,
                                              double t_f,
                                              const PropagationOptions& opts = {}) {
  return propagate_unitary(h, dim, t_f, opts);
}

// State evolution d psi/dt = -i H(t) psi.
inline std::vector<std::pair<double, Eigen::VectorXcd>> propagate_state(
    const MatrixFn& h, const Eigen::VectorXcd& psi0, double t_f,
    const PropagationOptions& opts = {}) {
  const Eigen::Index dim = psi0.size();
  OdeOptions oo;
  oo.rtol = opts.rtol;
  oo.atol = opts.atol;
  oo.sample_stride = opts.sample_stride;
  const OdeRhs rhs = [&h, dim](double t, const Eigen::VectorXd& y,
                               Eigen::VectorXd& dy) {
    const MatrixXcd psi = unpack_complex(y, dim, 1);
    const MatrixXcd dpsi = cxd(0, -1) * (h(t) * psi);
    dy = pack_complex(dpsi);
  };
  OdeSolution sol = integrate_ode(rhs, pack_complex(psi0), 0.0, t_f, oo);
  std::vector<std::pair<double, Eigen::VectorXcd>> out;
  out.reserve(sol.samples.size() + 1);
  for (auto& [t, y] : sol.samples)
    out.emplace_back(t, Eigen::VectorXcd(unpack_complex(y, dim, 1)));
  if (out.empty() || out.back().first != t_f)
    out.emplace_back(t_f, Eigen::VectorXcd(unpack_complex(sol.y_final, dim, 1)));
  return out;
}

// Interaction-picture transformation coefficients a_{j,l}(t), defined by
// U0^dag(t) A_j U0(t) = sum_l a_{j,l}(t) A_l and obtained from the adjoint
// ODE da/dt = -G(h(t)) a with G_jc = sum_m h_m f_mjc, a(0) = 1.
class FrameCoefficients {
 public:
  std::string basis_id;
  int n_ops = 0;
  double t_f = 0;

  MatrixXd at(double t) const {
    const Eigen::VectorXd y = sol_.at(t);
    return Eigen::Map<const MatrixXd>(y.data(), n_ops, n_ops);
  }

  const OdeSolution& solution() const { return sol_; }
  OdeSolution sol_;
};

enum class FrameValidation { automatic, full, off };

inline FrameCoefficients frame_coefficients(
    const CoeffFn& h, const OperatorBasis& basis, double t_f,
    double rtol = 1e-9, FrameValidation validation = FrameValidation::automatic) {
  const int n = basis.num_ops();
  MatrixXd g(n, n);
  const OdeRhs rhs = [&](double t, const Eigen::VectorXd& y,
                         Eigen::VectorXd& dy) {
    const Eigen::Map<const MatrixXd> a(y.data(), n, n);
    basis.adjoint_generator(h(t), g);
    Eigen::Map<MatrixXd> da(dy.data(), n, n);
    dy.resize(y.size());
    new (&da) Eigen::Map<MatrixXd>(dy.data(), n, n);
    da = -g * a;
  };
  OdeOptions oo;
  oo.rtol = rtol;
  oo.atol = rtol * 1e-2;
  oo.dense = true;
  MatrixXd a0 = MatrixXd::Identity(n, n);
  Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(a0.data(), n * n);

  FrameCoefficients fc;
  fc.basis_id = basis.id;
  fc.n_ops = n;
  fc.t_f = t_f;
  fc.sol_ = integrate_ode(rhs, y0, 0.0, t_f, oo);

  const bool do_validate =
      validation == FrameValidation::full ||
      (validation == FrameValidation::automatic && !basis.truncated_matrices);
  if (do_validate) {
    // Spot-check against direct conjugation at ten deterministic times.
    const MatrixFn hm = [&h, &basis](double t) {
      return basis.matrix_from_coeffs(h(t));
    };
    PropagationOptions po;
    po.rtol = 1e-11;
    po.atol = 1e-13;
    po.sample_stride = 0;
    std::vector<double> times;
    for (int i = 1; i <= 10; ++i) {
      double frac = std::fmod(0.5 + 0.6180339887498949 * i, 1.0);
      times.push_back(t_f * frac);
    }
    std::sort(times.begin(), times.end());
    MatrixXcd u = MatrixXcd::Identity(basis.dim, basis.dim);
    double prev = 0;
    for (double s : times) {
      if (s > prev) {
        PropagatorTrace seg = propagate_unitary(
            [&hm, prev](double t) { return hm(t + prev); }, basis.dim,
            s - prev, po);
        u = seg.u_final * u;
        prev = s;
      }
      const MatrixXd a = fc.at(s);
      for (int j = 0; j < n; ++j) {
        MatrixXcd conj = u.adjoint() * basis.ops[j] * u;
        MatrixXcd rec = MatrixXcd::Zero(basis.dim, basis.dim);
        for (int l = 0; l < n; ++l) rec += a(j, l) * basis.ops[l];
        if ((conj - rec).cwiseAbs().maxCoeff() > 1e-8)
          throw ClosureViolation(
              "frame coefficients disagree with direct conjugation at t = " +
              std::to_string(s));
      }
    }
  }
  return fc;
}

// Fields in the interaction picture: vtilde_j(t) = sum_l a_{l,j}(t) v_l(t).
inline CoeffFn to_interaction_picture(const CoeffFn& fields,
                                      const FrameCoefficients& frame) {
  return [fields, &frame](double t) -> VectorXd {
    return frame.at(t).transpose() * fields(t);
  };
}

}  // namespace pulseforge
