#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pulseforge/algebra.hpp"
#include "pulseforge/errors.hpp"

namespace pulseforge {

struct GateReport {
  double epsilon = 0;
  double leakage = 0;
  int order = 0;
  double t_f = 0;
  std::string scenario;
};

struct SqueezeReport {
  double s_db = 0;  // squeezing of the y quadrature in dB
  double phi = 0;   // angle of maximal squeezing relative to the y axis
  double t_f = 0;
};

// Average fidelity error over the subspace selected by the projector:
//   eps = 1 - [Tr(M M^dag) + |Tr M|^2] / (d (d + 1)),  M = P Ut^dag U P.
// Leakage out of the subspace enters through the non-unitarity of M.
inline double avg_fidelity_error(const MatrixXcd& u, const MatrixXcd& u_target,
                                 const MatrixXcd& projector, int d) {
  const MatrixXcd m = projector * u_target.adjoint() * u * projector;
  const double t1 = (m * m.adjoint()).trace().real();
  const cxd t2 = m.trace();
  return 1.0 - (t1 + std::norm(t2)) / (d * (d + 1.0));
}

// Population escaping the subspace, averaged over its basis states:
//   L = Tr[(1 - P) U P U^dag] / d.
inline double leakage_fraction(const MatrixXcd& u, const MatrixXcd& projector,
                               int d) {
  const MatrixXcd q =
      MatrixXcd::Identity(u.rows(), u.cols()) - projector;
  return (q * u * projector * u.adjoint()).trace().real() / d;
}

namespace detail {

struct QuadratureMoments {
  double var_x = 0, var_y = 0, cov = 0;
};

inline QuadratureMoments quadrature_moments(const Eigen::VectorXcd& psi) {
  const int n = static_cast<int>(psi.size());
  const MatrixXcd a = lowering(n);
  const MatrixXcd x = (a + a.adjoint()) / std::sqrt(2.0);
  const MatrixXcd y = cxd(0, -1) * (a - a.adjoint()) / std::sqrt(2.0);
  auto ev = [&](const MatrixXcd& op) {
    return (psi.adjoint() * op * psi)(0, 0).real();
  };
  QuadratureMoments mo;
  const double mx = ev(x), my = ev(y);
  mo.var_x = ev(x * x) - mx * mx;
  mo.var_y = ev(y * y) - my * my;
  mo.cov = ev(0.5 * (x * y + y * x)) - mx * my;
  return mo;
}

// variance of the y axis rotated by phi
inline double rotated_variance(const QuadratureMoments& m, double phi) {
  const double s = std::sin(phi), c = std::cos(phi);
  return s * s * m.var_x + c * c * m.var_y - 2 * s * c * m.cov;
}

}  // namespace detail

inline double fock_tail(const Eigen::VectorXcd& psi, int levels = 4) {
  double tail = 0;
  const int n = static_cast<int>(psi.size());
  for (int k = std::max(0, n - levels); k < n; ++k) tail += std::norm(psi[k]);
  return tail;
}

// Squeezing in dB of the final state relative to the initial one, plus the
// angle at which the squeezing is maximal (variance minimization over the
// quadrature angle to 1e-6 rad).
inline SqueezeReport squeezing_db(const Eigen::VectorXcd& psi_initial,
                                  const Eigen::VectorXcd& psi_final,
                                  double tail_tol = 1e-8) {
  if (fock_tail(psi_initial) > tail_tol || fock_tail(psi_final) > tail_tol)
    throw TruncationError("state population too close to the Fock cut");
  const auto mi = detail::quadrature_moments(psi_initial);
  const auto mf = detail::quadrature_moments(psi_final);
  SqueezeReport rep;
  rep.s_db = -10.0 * std::log10(mf.var_y / mi.var_y);

  // coarse scan plus golden-section refinement on the final-state variance
  const double pi = std::numbers::pi;
  double best_phi = 0, best_v = detail::rotated_variance(mf, 0.0);
  double worst_v = best_v;
  const int scan = 720;
  for (int i = 0; i <= scan; ++i) {
    const double phi = -pi / 2 + pi * i / scan;
    const double v = detail::rotated_variance(mf, phi);
    worst_v = std::max(worst_v, v);
    if (v < best_v) {
      best_v = v;
      best_phi = phi;
    }
  }
  if (worst_v - best_v < 1e-12 * worst_v) {
    rep.phi = 0.0;  // rotationally degenerate (e.g. vacuum): report zero
    return rep;
  }
  double lo = best_phi - pi / scan, hi = best_phi + pi / scan;
  const double gr = (std::sqrt(5.0) - 1) / 2;
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  while (hi - lo > 1e-7) {
    if (detail::rotated_variance(mf, c) < detail::rotated_variance(mf, d)) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - gr * (hi - lo);
    d = lo + gr * (hi - lo);
  }
  double phi = 0.5 * (lo + hi);
  if (phi <= -pi / 2) phi += pi;  // fold into (-pi/2, pi/2]
  if (phi > pi / 2) phi -= pi;
  rep.phi = phi;
  return rep;
}

// Evolves states with a caller-supplied factory at increasing Fock cuts
// until the truncation tail is below tolerance, then reports squeezing.
using StatePairMaker = std::function<
    std::pair<Eigen::VectorXcd, Eigen::VectorXcd>(int fock_cut)>;

inline SqueezeReport squeezing_with_auto_cut(const StatePairMaker& make,
                                             int initial_cut = 40,
                                             double tail_tol = 1e-8,
                                             int max_cut = 640) {
  for (int cut = initial_cut; cut <= max_cut; cut *= 2) {
    auto [psi_i, psi_f] = make(cut);
    if (fock_tail(psi_i) > tail_tol || fock_tail(psi_f) > tail_tol) continue;
    return squeezing_db(psi_i, psi_f, tail_tol);
  }
  throw TruncationError("no Fock cut up to the maximum met the tail tolerance");
}

// ---------------------------------------------------------------------------
// Pulse spectra and Bloch trajectories
// ---------------------------------------------------------------------------

struct SpectrumTable {
  std::vector<double> omega;      // angular frequency
  std::vector<double> magnitude;  // amplitude-normalized |DFT|
  double bin_width = 0;           // 2 pi / t_f, the resolution bin
};

namespace detail {

inline void fft_radix2(std::vector<cxd>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2 * std::numbers::pi / static_cast<double>(len);
    const cxd wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cxd w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cxd u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

}  // namespace detail

// Amplitude spectrum of uniform samples over [0, t_f]. Hann-windowed to keep
// sidelobes below one percent and zero-padded 4x so peak locations are
// resolved below the bin width.
inline SpectrumTable pulse_spectrum(const std::vector<double>& samples,
                                    double t_f) {
  if (samples.size() < 8)
    throw InvalidParameter("pulse_spectrum: too few samples");
  const std::size_t ns = samples.size();
  std::size_t n = 1;
  while (n < ns) n <<= 1;
  const std::size_t padded = 4 * n;
  std::vector<cxd> buf(padded, 0.0);
  double window_sum = 0;
  for (std::size_t i = 0; i < ns; ++i) {
    const double w =
        0.5 - 0.5 * std::cos(2 * std::numbers::pi * static_cast<double>(i) /
                             static_cast<double>(ns - 1));
    buf[i] = samples[i] * w;
    window_sum += w;
  }
  detail::fft_radix2(buf);
  const double dt = t_f / static_cast<double>(ns);
  const double t_window = dt * static_cast<double>(padded);
  SpectrumTable tab;
  tab.bin_width = 2 * std::numbers::pi / t_f;
  const std::size_t half = padded / 2;
  tab.omega.reserve(half);
  tab.magnitude.reserve(half);
  for (std::size_t k = 0; k < half; ++k) {
    tab.omega.push_back(2 * std::numbers::pi * static_cast<double>(k) /
                        t_window);
    const double one_sided = (k == 0) ? 1.0 : 2.0;  // DC is not doubled
    tab.magnitude.push_back(one_sided * std::abs(buf[k]) / window_sum);
  }
  return tab;
}

// Angular frequencies of local maxima above a relative floor.
inline std::vector<double> spectrum_peaks(const SpectrumTable& tab,
                                          double rel_floor = 1e-3) {
  double top = 0;
  for (double m : tab.magnitude) top = std::max(top, m);
  std::vector<double> peaks;
  if (tab.magnitude.size() > 1 && tab.magnitude[0] > tab.magnitude[1] &&
      tab.magnitude[0] > rel_floor * top)
    peaks.push_back(tab.omega[0]);
  for (std::size_t k = 1; k + 1 < tab.magnitude.size(); ++k)
    if (tab.magnitude[k] > tab.magnitude[k - 1] &&
        tab.magnitude[k] >= tab.magnitude[k + 1] &&
        tab.magnitude[k] > rel_floor * top)
      peaks.push_back(tab.omega[k]);
  return peaks;
}

struct BlochPoint {
  double t, x, y, z;
};

// Pauli expectation trajectory of a two-level state trace.
inline std::vector<BlochPoint> bloch_trajectory(
    const std::vector<std::pair<double, Eigen::VectorXcd>>& trace) {
  const OperatorBasis b = pauli_basis();
  std::vector<BlochPoint> out;
  out.reserve(trace.size());
  for (const auto& [t, psi] : trace) {
    BlochPoint p;
    p.t = t;
    p.x = (psi.adjoint() * b.ops[0] * psi)(0, 0).real();
    p.y = (psi.adjoint() * b.ops[1] * psi)(0, 0).real();
    p.z = (psi.adjoint() * b.ops[2] * psi)(0, 0).real();
    out.push_back(p);
  }
  return out;
}

}  // namespace pulseforge
