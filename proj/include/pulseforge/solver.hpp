#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pulseforge/algebra.hpp"
#include "pulseforge/magnus.hpp"
#include "pulseforge/schedule.hpp"

namespace pulseforge {

enum class SolvePolicy { exact, min_norm, quadratic };

// One free parameter of the correction ansatz. The parameter multiplies an
// operator-valued time profile s_p(t) in basis coefficients; a single
// envelope parameter may feed several basis operators at once.
struct CorrectionChannel {
  std::string op_label;  // reporting label, e.g. "gx", "gy", "delta"
  int harmonic = 0;
  char kind = 'c';  // 'c' cos, 's' sin, 'b' 1-cos, '0' constant
  std::function<void(double, VectorXd&)> shape;  // overwrites the output
};

struct ColumnInfo {
  std::string op_label;
  int harmonic = 0;
  char kind = 'c';
};

struct SolveDiagnostics {
  int rank = 0;
  double residual = 0;
  VectorXd singular_values;
  int multistart_converged = 0;
  double best_root_norm = 0;
};

// Assembled linear system for one correction order: rows are basis-operator
// equations, columns are free ansatz parameters.
struct CorrectionProblem {
  MatrixXd m;  // num_ops x num_channels, all rows
  VectorXd y;  // full length num_ops
  std::vector<ColumnInfo> column_map;
  std::vector<int> active_rows;
  SolvePolicy policy = SolvePolicy::min_norm;
  double svd_cutoff = 1e-10;

  MatrixXd active_m() const {
    MatrixXd out(active_rows.size(), m.cols());
    for (std::size_t i = 0; i < active_rows.size(); ++i)
      out.row(i) = m.row(active_rows[i]);
    return out;
  }
  VectorXd active_y() const {
    VectorXd out(active_rows.size());
    for (std::size_t i = 0; i < active_rows.size(); ++i)
      out[i] = y[active_rows[i]];
    return out;
  }
};

// Builds plain Fourier channels from per-operator field templates, honoring
// the constraint taxonomy. Column order: all cosine-type columns operator by
// operator, then all sine-type columns.
inline std::vector<CorrectionChannel> channels_from_templates(
    const std::vector<FourierField>& templates,
    const std::vector<std::string>& labels) {
  std::vector<CorrectionChannel> cos_cols, sin_cols;
  for (std::size_t l = 0; l < templates.size(); ++l) {
    const FourierField& f = templates[l];
    const std::string& label = labels[l];
    const int op = static_cast<int>(l);
    switch (f.constraint) {
      case Constraint::zero:
        break;
      case Constraint::constant_only: {
        cos_cols.push_back({label, 0, 'c',
                            [op](double, VectorXd& out) {
                              out.setZero();
                              out[op] = 1.0;
                            }});
        break;
      }
      case Constraint::free:
        for (int k = f.k_min; k <= f.k_max; ++k) {
          const double w = f.omega(k);
          cos_cols.push_back({label, k, 'c',
                              [op, w](double t, VectorXd& out) {
                                out.setZero();
                                out[op] = std::cos(w * t);
                              }});
        }
        for (int k = std::max(1, f.k_min); k <= f.k_max; ++k) {
          const double w = f.omega(k);
          sin_cols.push_back({label, k, 's',
                              [op, w](double t, VectorXd& out) {
                                out.setZero();
                                out[op] = std::sin(w * t);
                              }});
        }
        break;
      case Constraint::boundary_zero:
        for (int k = std::max(1, f.k_min); k <= f.k_max; ++k) {
          const double w = f.omega(k);
          cos_cols.push_back({label, k, 'b',
                              [op, w](double t, VectorXd& out) {
                                out.setZero();
                                out[op] = 1.0 - std::cos(w * t);
                              }});
        }
        for (int k = std::max(1, f.k_min); k <= f.k_max; ++k) {
          const double w = f.omega(k);
          sin_cols.push_back({label, k, 's',
                              [op, w](double t, VectorXd& out) {
                                out.setZero();
                                out[op] = std::sin(w * t);
                              }});
        }
        break;
    }
  }
  std::vector<CorrectionChannel> out = std::move(cos_cols);
  out.insert(out.end(), std::make_move_iterator(sin_cols.begin()),
             std::make_move_iterator(sin_cols.end()));
  return out;
}

// System matrix M_ip = sum_l int_0^tf a_{l,i}(t) s_{p,l}(t) dt. The frame
// coefficients are co-integrated with the column quadratures, so no dense
// interpolation enters.
inline CorrectionProblem assemble_m(const CoeffFn& h0,
                                    const std::vector<CorrectionChannel>& chans,
                                    const OperatorBasis& basis, double t_f,
                                    double rtol = 1e-10) {
  const int n = basis.num_ops();
  const int p = static_cast<int>(chans.size());
  if (p == 0) throw InvalidParameter("assemble_m: no free parameters");
  MatrixXd g(n, n);
  VectorXd s(n), col(n);
  const OdeRhs rhs = [&](double t, const Eigen::VectorXd& y,
                         Eigen::VectorXd& dy) {
    const Eigen::Map<const MatrixXd> a(y.data(), n, n);
    basis.adjoint_generator(h0(t), g);
    Eigen::Map<MatrixXd>(dy.data(), n, n) = -g * a;
    for (int q = 0; q < p; ++q) {
      chans[q].shape(t, s);
      col.noalias() = a.transpose() * s;
      dy.segment(n * n + q * n, n) = col;
    }
  };
  VectorXd y0 = VectorXd::Zero(n * n + p * n);
  Eigen::Map<MatrixXd>(y0.data(), n, n) = MatrixXd::Identity(n, n);
  OdeOptions oo;
  oo.rtol = rtol;
  oo.atol = rtol * 1e-2;
  OdeSolution sol = integrate_ode(rhs, y0, 0.0, t_f, oo);

  CorrectionProblem prob;
  prob.m.resize(n, p);
  for (int q = 0; q < p; ++q)
    prob.m.col(q) = sol.y_final.segment(n * n + q * n, n);
  prob.y = VectorXd::Zero(n);
  for (const auto& ch : chans)
    prob.column_map.push_back({ch.op_label, ch.harmonic, ch.kind});
  prob.active_rows.resize(n);
  for (int i = 0; i < n; ++i) prob.active_rows[i] = i;
  return prob;
}

// Right-hand side for correction order n, from the Magnus stack of the
// Hamiltonian corrected through order n-1:
//   y_j = -sum_{k=1}^{n} Omega_{k,j}(t_f)   (coefficients of -i A_j).
inline VectorXd assemble_y(const MagnusStack& stack, int order) {
  if (order < 1 || order > stack.order)
    throw InvalidParameter("assemble_y: order outside the stack");
  return -stack.partial_sum(order);
}

// Drops equation rows whose operators act strictly outside the computational
// subspace (up to a uniform phase on it): A = c P + (1-P) A (1-P). Dropping
// anything else would silently ignore errors that reach the subspace.
inline CorrectionProblem project_subspace(CorrectionProblem prob,
                                          const std::vector<int>& drop_ops,
                                          const OperatorBasis& basis,
                                          const MatrixXcd& projector) {
  const double rank = projector.trace().real();
  const MatrixXcd q =
      MatrixXcd::Identity(projector.rows(), projector.cols()) - projector;
  for (int d : drop_ops) {
    const MatrixXcd& a = basis.ops[d];
    const cxd c = (projector * a * projector).trace() / rank;
    const MatrixXcd outside = c * projector + q * a * q;
    if ((a - outside).cwiseAbs().maxCoeff() > 1e-12)
      throw InvalidDrop("operator " + basis.labels[d] +
                        " has support inside the computational subspace");
  }
  std::vector<int> keep;
  for (int r : prob.active_rows)
    if (std::find(drop_ops.begin(), drop_ops.end(), r) == drop_ops.end())
      keep.push_back(r);
  prob.active_rows = std::move(keep);
  return prob;
}

// Minimum-norm least-squares solution via SVD with relative cutoff. For a
// square full-rank system this is the exact solve.
inline VectorXd solve_min_norm(const CorrectionProblem& prob,
                               SolveDiagnostics* diag = nullptr) {
  const MatrixXd a = prob.active_m();
  const VectorXd b = prob.active_y();
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd sv = svd.singularValues();
  const double cutoff = prob.svd_cutoff * (sv.size() ? sv[0] : 0.0);
  VectorXd inv = VectorXd::Zero(sv.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) {
      inv[i] = 1.0 / sv[i];
      ++rank;
    }
  const VectorXd x =
      svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * b);
  const double residual = (a * x - b).norm();
  if (diag) {
    diag->rank = rank;
    diag->residual = residual;
    diag->singular_values = sv;
  }
  if (residual > 1e-8 * (1.0 + b.norm()))
    throw NoSolution(
        "correction system has no solution within the declared constraints "
        "(residual " +
        std::to_string(residual) + ")");
  return x;
}

// ---------------------------------------------------------------------------
// Order-by-order linear correction loop
// ---------------------------------------------------------------------------

struct CorrectionSetup {
  const OperatorBasis* basis = nullptr;
  CoeffFn h0;
  CoeffFn v;
  std::vector<CorrectionChannel> channels;
  std::vector<int> active_rows;  // empty -> all
  SolvePolicy policy = SolvePolicy::min_norm;
  double t_f = 0;
  double ode_rtol = 1e-11;
  double assembly_rtol = 1e-10;
  double svd_cutoff = 1e-10;
  double divergence_factor = 10.0;
};

struct CorrectionResult {
  std::vector<ColumnInfo> column_map;
  std::vector<VectorXd> x;  // one coefficient vector per order
  std::vector<double> y_norms;
  std::vector<SolveDiagnostics> diagnostics;
  std::vector<CorrectionChannel> channels;
  double t_f = 0;

  int order() const { return static_cast<int>(x.size()); }

  // channel coefficients summed over orders 1..upto
  VectorXd summed_coefficients(int upto) const {
    VectorXd s = VectorXd::Zero(x.at(0).size());
    for (int k = 0; k < upto; ++k) s += x.at(k);
    return s;
  }

  // correction fields W(t) in basis coefficients, orders 1..upto
  CoeffFn field_fn(int n_ops, int upto) const {
    const VectorXd coeff = summed_coefficients(upto);
    auto chans = channels;  // shared copy for the closure
    return [coeff, chans = std::move(chans), n_ops](double t) {
      VectorXd w = VectorXd::Zero(n_ops);
      VectorXd s(n_ops);
      for (Eigen::Index p = 0; p < coeff.size(); ++p) {
        chans[p].shape(t, s);
        w += coeff[p] * s;
      }
      return w;
    };
  }
};

inline CorrectionResult correct_to_order(const CorrectionSetup& setup,
                                         int order) {
  if (order < 1 || order > kMaxMagnusOrder)
    throw UnsupportedOrder("correct_to_order: order must be in 1..6");
  const OperatorBasis& basis = *setup.basis;
  CorrectionProblem prob =
      assemble_m(setup.h0, setup.channels, basis, setup.t_f,
                 setup.assembly_rtol);
  prob.policy = setup.policy;
  prob.svd_cutoff = setup.svd_cutoff;
  if (!setup.active_rows.empty()) prob.active_rows = setup.active_rows;

  CorrectionResult res;
  res.column_map = prob.column_map;
  res.channels = setup.channels;
  res.t_f = setup.t_f;

  const int n = basis.num_ops();
  for (int k = 1; k <= order; ++k) {
    // fields of the partially corrected Hamiltonian (error + found orders)
    CoeffFn fields;
    if (k == 1) {
      fields = setup.v;
    } else {
      CoeffFn w_prev = res.field_fn(n, k - 1);
      CoeffFn v = setup.v;
      fields = [v, w_prev](double t) { return VectorXd(v(t) + w_prev(t)); };
    }
    MagnusStack stack = integrate_magnus_in_frame(
        setup.h0, fields, basis, k, setup.t_f, setup.ode_rtol);
    prob.y = assemble_y(stack, k);
    SolveDiagnostics diag;
    VectorXd xk = solve_min_norm(prob, &diag);
    // Divergence guard against non-convergent correction series. The order-2
    // step is exempt: for nonresonant errors the second Magnus term decays
    // one power slower than the boundary-suppressed first term, so a large
    // x2/x1 ratio is the healthy generic case, not divergence.
    if (k >= 3) {
      double prev_max = 0;
      for (const auto& xv : res.x) prev_max = std::max(prev_max, xv.norm());
      if (xk.norm() > setup.divergence_factor * prev_max && prev_max > 1e-12)
        throw DivergingCorrection(
            "correction coefficients grew from " + std::to_string(prev_max) +
            " to " + std::to_string(xk.norm()) + " at order " +
            std::to_string(k));
    }
    res.x.push_back(std::move(xk));
    res.y_norms.push_back(prob.active_y().norm());
    res.diagnostics.push_back(std::move(diag));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Quadratic residual solver (per-level number-selective corrections)
// ---------------------------------------------------------------------------

// Componentwise quadratic polynomial map R(x) = r0 + L x + x^T Q x.
struct QuadraticResidual {
  VectorXd r0;
  MatrixXd lin;                // n_eq x n_par
  std::vector<MatrixXd> quad;  // n_eq symmetric n_par x n_par

  int n_eq() const { return static_cast<int>(r0.size()); }
  int n_par() const { return static_cast<int>(lin.cols()); }

  VectorXd eval(const VectorXd& x) const {
    VectorXd r = r0 + lin * x;
    for (int i = 0; i < n_eq(); ++i) r[i] += x.dot(quad[i] * x);
    return r;
  }
  MatrixXd jacobian(const VectorXd& x) const {
    MatrixXd j = lin;
    for (int i = 0; i < n_eq(); ++i) j.row(i) += 2.0 * (quad[i] * x).transpose();
    return j;
  }
};

// Recovers the exact polynomial structure of a quadratic map from point
// evaluations (polarization identities).
inline QuadraticResidual polarize_quadratic(
    const std::function<VectorXd(const VectorXd&)>& f, int n_par) {
  QuadraticResidual qr;
  VectorXd zero = VectorXd::Zero(n_par);
  qr.r0 = f(zero);
  const int n_eq = static_cast<int>(qr.r0.size());
  qr.lin.resize(n_eq, n_par);
  qr.quad.assign(n_eq, MatrixXd::Zero(n_par, n_par));
  std::vector<VectorXd> fp(n_par), fm(n_par);
  for (int p = 0; p < n_par; ++p) {
    VectorXd e = zero;
    e[p] = 1.0;
    fp[p] = f(e);
    e[p] = -1.0;
    fm[p] = f(e);
    qr.lin.col(p) = 0.5 * (fp[p] - fm[p]);
    const VectorXd qpp = 0.5 * (fp[p] + fm[p]) - qr.r0;
    for (int i = 0; i < n_eq; ++i) qr.quad[i](p, p) = qpp[i];
  }
  for (int p = 0; p < n_par; ++p)
    for (int q = p + 1; q < n_par; ++q) {
      VectorXd e = zero;
      e[p] = 1.0;
      e[q] = 1.0;
      const VectorXd fpq = f(e);
      for (int i = 0; i < n_eq; ++i) {
        const double cross = 0.5 * (fpq[i] - qr.r0[i] - qr.lin(i, p) -
                                    qr.lin(i, q) - qr.quad[i](p, p) -
                                    qr.quad[i](q, q));
        qr.quad[i](p, q) = cross;
        qr.quad[i](q, p) = cross;
      }
    }
  return qr;
}

// Exact polynomial structure of R(x) = (Omega_1 + Omega_2)(t_f) + tail for
// fields = fixed + sum_p x_p shape_p transformed by the frame of h0. One
// augmented ODE pass integrates the frame, the first-order pieces Q_a and
// the symmetrized second-order pair table T_ab = S_ab + S_ba with
// S_ab = -(1/2) int [Q_a, h_b]; the residual is then
//   R(x) = Q_0 + T_00 + tail + sum_p x_p (Q_p + T_0p) + sum_pq x_p x_q T'_pq.
inline QuadraticResidual magnus2_quadratic_residual(
    const CoeffFn& h0, const CoeffFn& fixed,
    const std::vector<CorrectionChannel>& channels, const OperatorBasis& basis,
    double t_f, const VectorXd& tail, double rtol = 1e-10) {
  const int n = basis.num_ops();
  const int np = static_cast<int>(channels.size());
  const int na = np + 1;  // fixed fields are slot 0
  const int pairs = na * (na + 1) / 2;
  auto pair_index = [na](int a, int b) {
    if (a > b) std::swap(a, b);
    return a * na - a * (a - 1) / 2 + (b - a);
  };
  MatrixXd g(n, n);
  std::vector<VectorXd> ht(na, VectorXd(n));
  VectorXd raw(n), tmp(n), tmp2(n);
  const OdeRhs rhs = [&](double t, const Eigen::VectorXd& y,
                         Eigen::VectorXd& dy) {
    const Eigen::Map<const MatrixXd> a(y.data(), n, n);
    basis.adjoint_generator(h0(t), g);
    Eigen::Map<MatrixXd>(dy.data(), n, n) = -g * a;
    raw = fixed(t);
    ht[0].noalias() = a.transpose() * raw;
    for (int p = 0; p < np; ++p) {
      channels[p].shape(t, raw);
      ht[p + 1].noalias() = a.transpose() * raw;
    }
    for (int al = 0; al < na; ++al) dy.segment(n * n + al * n, n) = ht[al];
    const int toff = n * n + na * n;
    for (int al = 0; al < na; ++al) {
      const Eigen::Map<const VectorXd> qa(y.data() + n * n + al * n, n);
      for (int be = al; be < na; ++be) {
        const Eigen::Map<const VectorXd> qb(y.data() + n * n + be * n, n);
        basis.commutator_into(qa, ht[be], tmp);
        if (be == al) {
          dy.segment(toff + pair_index(al, be) * n, n) = -0.5 * tmp;
        } else {
          basis.commutator_into(qb, ht[al], tmp2);
          dy.segment(toff + pair_index(al, be) * n, n) = -0.5 * (tmp + tmp2);
        }
      }
    }
  };
  VectorXd y0 = VectorXd::Zero(n * n + na * n + pairs * n);
  Eigen::Map<MatrixXd>(y0.data(), n, n) = MatrixXd::Identity(n, n);
  OdeOptions oo;
  oo.rtol = rtol;
  oo.atol = rtol * 1e-2;
  OdeSolution sol = integrate_ode(rhs, y0, 0.0, t_f, oo);

  auto q_of = [&](int a) {
    return VectorXd(sol.y_final.segment(n * n + a * n, n));
  };
  auto t_of = [&](int a, int b) {
    return VectorXd(
        sol.y_final.segment(n * n + na * n + pair_index(a, b) * n, n));
  };
  QuadraticResidual qr;
  qr.r0 = q_of(0) + t_of(0, 0) + tail;
  qr.lin.resize(n, np);
  qr.quad.assign(n, MatrixXd::Zero(np, np));
  for (int p = 0; p < np; ++p) {
    qr.lin.col(p) = q_of(p + 1) + t_of(0, p + 1);
    const VectorXd tpp = t_of(p + 1, p + 1);
    for (int i = 0; i < n; ++i) qr.quad[i](p, p) = tpp[i];
    for (int q = p + 1; q < np; ++q) {
      const VectorXd tpq = t_of(p + 1, q + 1);
      for (int i = 0; i < n; ++i) {
        qr.quad[i](p, q) = 0.5 * tpq[i];
        qr.quad[i](q, p) = 0.5 * tpq[i];
      }
    }
  }
  return qr;
}

struct QuadraticSolveOptions {
  int multistart = 32;
  double root_tol = 1e-9;
  double lambda_rel = 1e-6;
  std::uint64_t seed = 1;
  int max_iter = 300;
};

// Damped least-squares iteration with a small pull toward the origin,
// multistarted; returns the smallest-norm root with ||R|| <= root_tol.
// Ties go to the earliest start under the seeded order.
inline VectorXd solve_quadratic_residual(const QuadraticResidual& qr,
                                         const QuadraticSolveOptions& opts = {},
                                         SolveDiagnostics* diag = nullptr) {
  const int np = qr.n_par();
  const double lam_reg = opts.lambda_rel * std::max(qr.lin.norm(), 1e-30);

  auto refine = [&](VectorXd x) -> std::pair<bool, VectorXd> {
    double lam_lm = 1e-3;
    double phi = qr.eval(x).squaredNorm() + lam_reg * x.squaredNorm();
    for (int it = 0; it < opts.max_iter; ++it) {
      const VectorXd r = qr.eval(x);
      const MatrixXd j = qr.jacobian(x);
      const MatrixXd h =
          j.transpose() * j +
          (lam_lm + lam_reg) * MatrixXd::Identity(np, np);
      const VectorXd grad = j.transpose() * r + lam_reg * x;
      const VectorXd step = -h.ldlt().solve(grad);
      const VectorXd xn = x + step;
      const double phin = qr.eval(xn).squaredNorm() + lam_reg * xn.squaredNorm();
      if (phin < phi) {
        x = xn;
        phi = phin;
        lam_lm = std::max(lam_lm / 3.0, 1e-14);
        if (step.norm() < 1e-14 * (1.0 + x.norm())) break;
      } else {
        lam_lm *= 4.0;
        if (lam_lm > 1e12) break;
      }
    }
    // polish with minimum-norm Gauss-Newton steps and backtracking, free of
    // the regularization pull
    double mu = 1e-12;
    for (int it = 0; it < 120; ++it) {
      const VectorXd r = qr.eval(x);
      const double rn = r.norm();
      if (rn < 1e-13) break;
      const MatrixXd j = qr.jacobian(x);
      const MatrixXd jjt =
          j * j.transpose() +
          mu * MatrixXd::Identity(qr.n_eq(), qr.n_eq());
      const VectorXd step = -j.transpose() * jjt.ldlt().solve(r);
      double alpha = 1.0;
      bool moved = false;
      while (alpha > 1e-8) {
        if (qr.eval(x + alpha * step).norm() < rn) {
          x += alpha * step;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (moved) {
        mu = std::max(mu / 10.0, 1e-12);
      } else {
        mu *= 100.0;
        if (mu > 1e6) break;
      }
    }
    return {qr.eval(x).norm() <= opts.root_tol, x};
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  // natural parameter scale: minimum-norm solution of the linearized system
  Eigen::JacobiSVD<MatrixXd> svd(qr.lin,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd x_lin = svd.solve(-qr.r0);
  const double scale = std::max(x_lin.norm(), 1e-12);

  bool found = false;
  VectorXd best;
  double best_norm = 0, best_residual = std::numeric_limits<double>::max();
  int converged = 0;
  for (int s = 0; s < opts.multistart; ++s) {
    VectorXd x0 = VectorXd::Zero(np);
    if (s == 1) x0 = x_lin;
    if (s >= 2)
      for (int i = 0; i < np; ++i) x0[i] = scale * gauss(rng);
    auto [ok, root] = refine(x0);
    best_residual = std::min(best_residual, qr.eval(root).norm());
    if (!ok) continue;
    ++converged;
    if (!found || root.norm() < best_norm) {
      found = true;
      best = root;
      best_norm = root.norm();
    }
  }
  if (diag) {
    diag->multistart_converged = converged;
    diag->best_root_norm = best_norm;
    diag->residual = found ? qr.eval(best).norm() : best_residual;
  }
  if (!found)
    throw NoRootFound("no quadratic root converged; best residual " +
                      std::to_string(best_residual));
  return best;
}

// Canonical per-label Fourier fields from a solved coefficient vector.
inline std::map<std::string, FourierField> fields_from_solution(
    const std::vector<ColumnInfo>& column_map, const VectorXd& x, double t_f) {
  std::map<std::string, FourierField> out;
  int k_max = 0;
  for (const auto& ci : column_map) k_max = std::max(k_max, ci.harmonic);
  for (Eigen::Index p = 0; p < x.size(); ++p) {
    const ColumnInfo& ci = column_map[p];
    auto it = out.find(ci.op_label);
    if (it == out.end())
      it = out.emplace(ci.op_label,
                       FourierField::zeros(t_f, 0, k_max)).first;
    FourierField& f = it->second;
    switch (ci.kind) {
      case 'c':
      case '0':
        f.c[ci.harmonic] += x[p];
        break;
      case 's':
        f.d[ci.harmonic] += x[p];
        break;
      case 'b':  // 1 - cos(w_k t)
        f.c[0] += x[p];
        f.c[ci.harmonic] -= x[p];
        break;
      default:
        throw InvalidParameter("unknown column kind");
    }
  }
  return out;
}

}  // namespace pulseforge
