#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "pulseforge/algebra.hpp"
#include "pulseforge/propagation.hpp"

namespace pulseforge {

inline constexpr int kMaxMagnusOrder = 6;

// Magnus terms of U_I = exp(sum_k Omega_k) for a coefficient-valued
// Hamiltonian H_I(t) = sum_j hI_j(t) A_j. Stored as real coefficients of
// the anti-Hermitian generators -i A_j:
//   Omega_k = sum_j omega[k-1][j] * (-i A_j).
struct MagnusStack {
  int order = 0;
  double t_f = 0;
  std::string basis_id;
  std::vector<VectorXd> omega;

  const VectorXd& term(int k) const { return omega.at(k - 1); }

  // sum_{k=1}^{upto} Omega_k(t_f) in the -iA_j convention
  VectorXd partial_sum(int upto) const {
    VectorXd s = VectorXd::Zero(omega.at(0).size());
    for (int k = 1; k <= upto; ++k) s += omega.at(k - 1);
    return s;
  }
};

namespace detail {

// B_j / j! for the Magnus generator recursion (B_1 = -1/2 convention).
inline constexpr double magnus_weight[6] = {
    -1.0 / 2, 1.0 / 12, 0.0, -1.0 / 720, 0.0, 0.0};

// d/dt Omega_n from the standard recursion
//   S_n^(1)  = [Omega_{n-1}, A]
//   S_n^(j)  = sum_{q=1}^{n-j} [Omega_q, S_{n-q}^(j-1)]
//   dOmega_n = sum_{j=1}^{n-1} (B_j / j!) S_n^(j),  dOmega_1 = A.
// All brackets evaluated through structure constants in coefficient space.
class MagnusRhs {
 public:
  MagnusRhs(const OperatorBasis& basis, int order)
      : basis_(basis), order_(order), n_(basis.num_ops()) {
    s_.assign(order + 1, std::vector<VectorXd>(order, VectorXd::Zero(n_)));
    tmp_.resize(n_);
  }

  // omegas: flat (order * n) view; domegas: same layout, overwritten
  void operator()(const double* omegas, const VectorXd& a, double* domegas) {
    using CMap = Eigen::Map<const VectorXd>;
    using Map = Eigen::Map<VectorXd>;
    Map(domegas, n_) = a;
    for (int nn = 2; nn <= order_; ++nn) {
      basis_.commutator_into(CMap(omegas + (nn - 2) * n_, n_), a, s_[nn][1]);
      for (int j = 2; j <= nn - 1; ++j) {
        s_[nn][j].setZero();
        for (int q = 1; q <= nn - j; ++q) {
          basis_.commutator_into(CMap(omegas + (q - 1) * n_, n_),
                                 s_[nn - q][j - 1], tmp_);
          s_[nn][j] += tmp_;
        }
      }
      Map d(domegas + (nn - 1) * n_, n_);
      d.setZero();
      for (int j = 1; j <= nn - 1; ++j) {
        const double w = magnus_weight[j - 1];
        if (w != 0.0) d += w * s_[nn][j];
      }
    }
  }

 private:
  const OperatorBasis& basis_;
  int order_, n_;
  std::vector<std::vector<VectorXd>> s_;
  VectorXd tmp_;
};

}  // namespace detail

// Solves the coupled Magnus ODE system for H_I given directly in coefficient
// form. All orders are integrated simultaneously.
inline MagnusStack integrate_magnus(const CoeffFn& h_i,
                                    const OperatorBasis& basis, int order,
                                    double t_f, double rtol = 1e-11,
                                    double atol = 1e-13) {
  if (order < 1 || order > kMaxMagnusOrder)
    throw UnsupportedOrder("integrate_magnus: order must be in 1..6");
  const int n = basis.num_ops();
  detail::MagnusRhs core(basis, order);
  VectorXd abuf(n);
  const OdeRhs rhs = [&](double t, const Eigen::VectorXd& y,
                         Eigen::VectorXd& dy) {
    abuf = h_i(t);
    core(y.data(), abuf, dy.data());
  };
  OdeOptions oo;
  oo.rtol = rtol;
  oo.atol = atol;
  OdeSolution sol =
      integrate_ode(rhs, VectorXd::Zero(order * n), 0.0, t_f, oo);
  MagnusStack st;
  st.order = order;
  st.t_f = t_f;
  st.basis_id = basis.id;
  for (int k = 0; k < order; ++k) st.omega.push_back(sol.y_final.segment(k * n, n));
  return st;
}

// Same, but for rotating-frame fields(t) transformed on the fly by the frame
// coefficients of h0: the adjoint ODE is co-integrated so H_I needs no
// interpolation. Returns the stack; optionally exposes the frame solution.
inline MagnusStack integrate_magnus_in_frame(const CoeffFn& h0,
                                             const CoeffFn& fields,
                                             const OperatorBasis& basis,
                                             int order, double t_f,
                                             double rtol = 1e-11,
                                             double atol = 1e-13) {
  if (order < 1 || order > kMaxMagnusOrder)
    throw UnsupportedOrder("integrate_magnus_in_frame: order must be in 1..6");
  const int n = basis.num_ops();
  detail::MagnusRhs core(basis, order);
  MatrixXd g(n, n);
  VectorXd hi(n);
  const OdeRhs rhs = [&](double t, const Eigen::VectorXd& y,
                         Eigen::VectorXd& dy) {
    const Eigen::Map<const MatrixXd> a(y.data(), n, n);
    basis.adjoint_generator(h0(t), g);
    Eigen::Map<MatrixXd>(dy.data(), n, n) = -g * a;
    hi.noalias() = a.transpose() * fields(t);
    core(y.data() + n * n, hi, dy.data() + n * n);
  };
  VectorXd y0 = VectorXd::Zero(n * n + order * n);
  Eigen::Map<MatrixXd>(y0.data(), n, n) = MatrixXd::Identity(n, n);
  OdeOptions oo;
  oo.rtol = rtol;
  oo.atol = atol;
  OdeSolution sol = integrate_ode(rhs, y0, 0.0, t_f, oo);
  MagnusStack st;
  st.order = order;
  st.t_f = t_f;
  st.basis_id = basis.id;
  for (int k = 0; k < order; ++k)
    st.omega.push_back(sol.y_final.segment(n * n + k * n, n));
  return st;
}

// || exp(sum_k Omega_k(t_f)) - U_I(t_f) ||_max in the matrix representation.
inline double magnus_defect(const MagnusStack& stack, const CoeffFn& h_i,
                            const OperatorBasis& basis,
                            const PropagationOptions& opts = {}) {
  MatrixXcd gen = MatrixXcd::Zero(basis.dim, basis.dim);
  for (const auto& w : stack.omega)
    gen += cxd(0, -1) * basis.matrix_from_coeffs(w);
  const MatrixXcd approx = gen.exp();
  PropagatorTrace ui = ideal_propagator(h_i, basis, stack.t_f, opts);
  return (approx - ui.u_final).cwiseAbs().maxCoeff();
}

struct ScalingFit {
  double slope = 0;
  double intercept = 0;
  double max_residual = 0;
  std::vector<double> norms;
};

// Fits log ||Omega_j(t_f)|| against log(t_f) over a sweep of final times.
// For an error Hamiltonian oscillating at fixed frequency the slope equals
// the scaling exponent in (omega_V t_f).
inline ScalingFit nonresonant_scaling_probe(
    const std::function<MagnusStack(double)>& run, int j,
    const std::vector<double>& tf_list) {
  if (tf_list.size() < 3)
    throw FitFailure("scaling probe needs at least three final times");
  const double lo = *std::min_element(tf_list.begin(), tf_list.end());
  const double hi = *std::max_element(tf_list.begin(), tf_list.end());
  if (!(lo > 0) || hi / lo < 10.0)
    throw FitFailure("scaling probe: t_f list must span at least one decade");
  ScalingFit fit;
  std::vector<double> xs, ys;
  for (double tf : tf_list) {
    MagnusStack st = run(tf);
    const double nrm = st.term(j).norm();
    fit.norms.push_back(nrm);
    if (!(nrm > 0) || !std::isfinite(nrm))
      throw FitFailure("scaling probe: degenerate Magnus norm");
    xs.push_back(std::log(tf));
    ys.push_back(std::log(nrm));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) throw FitFailure("scaling probe: singular fit");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  for (std::size_t i = 0; i < xs.size(); ++i)
    fit.max_residual = std::max(
        fit.max_residual, std::abs(ys[i] - fit.slope * xs[i] - fit.intercept));
  return fit;
}

}  // namespace pulseforge
