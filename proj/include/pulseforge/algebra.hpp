#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "pulseforge/errors.hpp"

namespace pulseforge {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using cxd = std::complex<double>;

// Real coefficients w.r.t. an OperatorBasis: H = sum_j values[j] * A_j.
struct OperatorCoeffs {
  VectorXd values;
  std::string basis_id;
};

// Nonzero structure-constant entry: [A_a, A_b] = i * sum_c f_abc A_c.
struct StructureEntry {
  int a, b, c;
  double f;
};

// A finite set of Hermitian operators {A_j} closing under commutation.
//
// The structure constants are the algebraic ground truth; the matrices are
// the representation used for state simulation. For Fock-truncated bosonic
// algebras the two agree only away from the truncation corner, which
// `truncated_matrices` marks.
class OperatorBasis {
 public:
  std::string id;
  int dim = 0;  // Hilbert-space dimension of the matrix representation
  std::vector<MatrixXcd> ops;
  std::vector<std::string> labels;
  MatrixXd gram;  // Tr(A_a A_b)
  std::vector<StructureEntry> structure;
  bool truncated_matrices = false;

  int num_ops() const { return static_cast<int>(ops.size()); }

  double structure_constant(int a, int b, int c) const {
    for (const auto& e : structure)
      if (e.a == a && e.b == b && e.c == c) return e.f;
    return 0.0;
  }

  // Coefficient-space commutator: for X = sum u_a (-i A_a) and
  // Y = sum v_b (-i A_b), returns w with [X, Y] = sum w_c (-i A_c).
  VectorXd commutator(const VectorXd& u, const VectorXd& v) const {
    VectorXd out = VectorXd::Zero(num_ops());
    for (const auto& e : structure) out[e.c] += e.f * u[e.a] * v[e.b];
    return out;
  }

  void commutator_into(const VectorXd& u, const VectorXd& v,
                       VectorXd& out) const {
    out.setZero();
    for (const auto& e : structure) out[e.c] += e.f * u[e.a] * v[e.b];
  }

  // Adjoint generator of H0 = sum_m h_m A_m acting on frame coefficients:
  // da/dt = -G(h) a, with G_jc = sum_m h_m f_mjc.
  void adjoint_generator(const VectorXd& h, MatrixXd& g) const {
    g.setZero();
    for (const auto& e : structure) g(e.b, e.c) += e.f * h[e.a];
  }

  MatrixXcd matrix_from_coeffs(const VectorXd& x) const {
    MatrixXcd m = MatrixXcd::Zero(dim, dim);
    for (int j = 0; j < num_ops(); ++j) m += x[j] * ops[j];
    return m;
  }

  double gram_condition() const { return gram_cond_; }

  const Eigen::LDLT<MatrixXd>& gram_solver() const { return gram_solver_; }

  void finalize();  // computes gram and validates; throws on bad bases

 private:
  Eigen::LDLT<MatrixXd> gram_solver_;
  double gram_cond_ = 0;
};

inline void OperatorBasis::finalize() {
  const int n = num_ops();
  for (int j = 0; j < n; ++j) {
    const double herm_dev = (ops[j] - ops[j].adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > 1e-12)
      throw InvalidParameter("basis operator " + labels[j] + " not Hermitian");
  }
  gram.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      const double g = (ops[a] * ops[b]).trace().real();
      gram(a, b) = g;
      gram(b, a) = g;
    }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0) throw SingularGram("basis operators are linearly dependent");
  gram_cond_ = hi / lo;
  if (gram_cond_ > 1e12)
    throw SingularGram("basis Gram matrix condition number exceeds 1e12");
  gram_solver_.compute(gram);
}

// Unique decomposition op = sum_j x_j A_j via the Gram solve
// gram * x = b, b_a = Tr(A_a op).
inline OperatorCoeffs decompose(const MatrixXcd& op, const OperatorBasis& basis) {
  const int n = basis.num_ops();
  VectorXd b(n);
  for (int a = 0; a < n; ++a) b[a] = (basis.ops[a] * op).trace().real();
  VectorXd x = basis.gram_solver().solve(b);
  MatrixXcd rec = basis.matrix_from_coeffs(x);
  const double resid = (rec - op).cwiseAbs().maxCoeff();
  if (resid > 1e-8)
    throw NotInSpan("operator not in basis span, residual " +
                    std::to_string(resid));
  return {std::move(x), basis.id};
}

namespace detail {

// Levi-Civita symbol on {0,1,2}; zero unless a permutation.
inline int epsilon3(int a, int b, int c) {
  const int p = (a - b) * (b - c) * (c - a);
  return p > 0 ? 1 : (p < 0 ? -1 : 0);
}

inline MatrixXcd pauli_x2() {
  MatrixXcd m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
// Convention with |0> the ground state: sigma_y = i|0><1| - i|1><0|,
// sigma_z = |1><1| - |0><0|.
inline MatrixXcd pauli_y2() {
  MatrixXcd m(2, 2);
  m << 0, cxd(0, 1), cxd(0, -1), 0;
  return m;
}
inline MatrixXcd pauli_z2() {
  MatrixXcd m(2, 2);
  m << -1, 0, 0, 1;
  return m;
}

inline MatrixXcd lowering(int n) {
  MatrixXcd a = MatrixXcd::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
  return a;
}

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Structure constants from the matrices via the Gram solve of each
// commutator; throws ClosureViolation if a commutator leaves the span.
inline std::vector<StructureEntry> numeric_structure(
    const std::vector<MatrixXcd>& ops, const Eigen::LDLT<MatrixXd>& gs) {
  const int n = static_cast<int>(ops.size());
  std::vector<StructureEntry> entries;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      // [A_a, A_b] = i sum_c f_abc A_c  ->  decompose -i [A_a, A_b]
      MatrixXcd comm = cxd(0, -1) * (ops[a] * ops[b] - ops[b] * ops[a]);
      VectorXd rhs(n);
      for (int c = 0; c < n; ++c) rhs[c] = (ops[c] * comm).trace().real();
      VectorXd f = gs.solve(rhs);
      MatrixXcd rec = MatrixXcd::Zero(ops[0].rows(), ops[0].cols());
      for (int c = 0; c < n; ++c) rec += f[c] * ops[c];
      if ((rec - comm).cwiseAbs().maxCoeff() > 1e-10)
        throw ClosureViolation("commutator not in basis span");
      for (int c = 0; c < n; ++c)
        if (std::abs(f[c]) > 1e-12) entries.push_back({a, b, c, f[c]});
    }
  return entries;
}

}  // namespace detail

// Two-level Pauli basis {sigma_x, sigma_y, sigma_z}; f_abc = 2 eps_abc.
inline OperatorBasis pauli_basis() {
  OperatorBasis b;
  b.id = "pauli_su2";
  b.dim = 2;
  b.ops = {detail::pauli_x2(), detail::pauli_y2(), detail::pauli_z2()};
  b.labels = {"sx", "sy", "sz"};
  for (int a = 0; a < 3; ++a)
    for (int bb = 0; bb < 3; ++bb)
      for (int c = 0; c < 3; ++c)
        if (int e = detail::epsilon3(a, bb, c); e != 0)
          b.structure.push_back({a, bb, c, 2.0 * e});
  b.finalize();
  return b;
}

// su(1,1) generators mu_x, mu_y, mu_z from quadratic bosonic forms. The
// structure constants are exact and independent of the Fock cut; the
// matrices are the exact operators compressed to the truncated space and
// are meant for state simulation only.
inline OperatorBasis su11_basis(int fock_cut) {
  if (fock_cut < 4) throw InvalidParameter("su11_basis: fock_cut must be >= 4");
  OperatorBasis b;
  b.id = "su11_mu(" + std::to_string(fock_cut) + ")";
  b.dim = fock_cut;
  const MatrixXcd a = detail::lowering(fock_cut);
  const MatrixXcd ad = a.adjoint();
  const MatrixXcd a2 = a * a, ad2 = ad * ad;
  MatrixXcd mx = 0.5 * (a2 + ad2);
  MatrixXcd my = cxd(0, -0.5) * (a2 - ad2);
  MatrixXcd mz = MatrixXcd::Zero(fock_cut, fock_cut);
  for (int k = 0; k < fock_cut; ++k) mz(k, k) = k + 0.5;  // number + 1/2
  b.ops = {mx, my, mz};
  b.labels = {"mux", "muy", "muz"};
  // [mu_x, mu_y] = 2i mu_z, [mu_x, mu_z] = 2i mu_y, [mu_z, mu_y] = 2i mu_x
  b.structure = {{0, 1, 2, 2.0},  {1, 0, 2, -2.0}, {0, 2, 1, 2.0},
                 {2, 0, 1, -2.0}, {2, 1, 0, 2.0},  {1, 2, 0, -2.0}};
  b.truncated_matrices = true;
  b.finalize();
  return b;
}

// Three-level basis of eight traceless Hermitian operators with totally
// antisymmetric structure constants: qubit sector sx, sy, sz, the 1<->2 and
// 0<->2 transition operators, and the diagonal l8.
inline OperatorBasis gellmann3_basis() {
  OperatorBasis b;
  b.id = "gellmann3";
  b.dim = 3;
  auto outer = [](int i, int j) {
    MatrixXcd m = MatrixXcd::Zero(3, 3);
    m(i, j) = 1;
    return m;
  };
  const cxd I(0, 1);
  MatrixXcd l1 = outer(0, 1) + outer(1, 0);
  MatrixXcd l2 = I * outer(0, 1) - I * outer(1, 0);
  MatrixXcd l3 = outer(1, 1) - outer(0, 0);
  MatrixXcd l4 = outer(1, 2) + outer(2, 1);
  MatrixXcd l5 = I * outer(2, 1) - I * outer(1, 2);
  MatrixXcd l6 = outer(0, 2) + outer(2, 0);
  MatrixXcd l7 = I * outer(2, 0) - I * outer(0, 2);
  MatrixXcd l8 =
      (outer(0, 0) + outer(1, 1) - 2.0 * outer(2, 2)) / std::sqrt(3.0);
  b.ops = {l1, l2, l3, l4, l5, l6, l7, l8};
  b.labels = {"sx", "sy", "sz", "nx12", "ny12", "nx02", "ny02", "l8"};
  b.finalize();
  b.structure = detail::numeric_structure(b.ops, b.gram_solver());
  return b;
}

// 3N operators sigma_alpha (x) |n><n| on qubit tensor truncated Fock space,
// ordered level-major: index 3n + alpha. Block-diagonal su(2) constants.
inline OperatorBasis qubit_fock_basis(int n_levels) {
  if (n_levels < 2)
    throw InvalidParameter("qubit_fock_basis: n_levels must be >= 2");
  OperatorBasis b;
  b.id = "qubit_fock(" + std::to_string(n_levels) + ")";
  b.dim = 2 * n_levels;
  const MatrixXcd paulis[3] = {detail::pauli_x2(), detail::pauli_y2(),
                               detail::pauli_z2()};
  const char* names[3] = {"sx", "sy", "sz"};
  for (int n = 0; n < n_levels; ++n) {
    MatrixXcd proj = MatrixXcd::Zero(n_levels, n_levels);
    proj(n, n) = 1;
    for (int al = 0; al < 3; ++al) {
      b.ops.push_back(detail::kron(paulis[al], proj));
      b.labels.push_back(std::string(names[al]) + ":" + std::to_string(n));
    }
  }
  for (int n = 0; n < n_levels; ++n)
    for (int a = 0; a < 3; ++a)
      for (int bb = 0; bb < 3; ++bb)
        for (int c = 0; c < 3; ++c)
          if (int e = detail::epsilon3(a, bb, c); e != 0)
            b.structure.push_back({3 * n + a, 3 * n + bb, 3 * n + c, 2.0 * e});
  b.finalize();
  return b;
}

enum class BasisKind { pauli_su2, su11_mu, gellmann3, qubit_fock };

inline OperatorBasis build_basis(BasisKind kind, int size_param = 0) {
  switch (kind) {
    case BasisKind::pauli_su2:
      return pauli_basis();
    case BasisKind::su11_mu:
      return su11_basis(size_param);
    case BasisKind::gellmann3:
      return gellmann3_basis();
    case BasisKind::qubit_fock:
      return qubit_fock_basis(size_param);
  }
  throw InvalidParameter("unknown basis kind");
}

}  // namespace pulseforge
