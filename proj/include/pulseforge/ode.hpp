#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "pulseforge/errors.hpp"

namespace pulseforge {

using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 -> heuristic
  double max_step = 0.0;      // 0 -> interval length
  bool dense = false;         // keep interpolation coefficients per step
  int sample_stride = 0;      // >0 -> keep every Nth accepted state
  long max_steps = 50'000'000;
};

// One accepted step of the continuous extension (quartic interpolant).
struct OdeSegment {
  double t0 = 0, h = 0;
  Eigen::VectorXd r1, r2, r3, r4, r5;
};

class OdeSolution {
 public:
  double t_begin = 0, t_end = 0;
  Eigen::VectorXd y_final;
  long accepted = 0, rejected = 0;
  std::vector<OdeSegment> segments;                      // when dense
  std::vector<std::pair<double, Eigen::VectorXd>> samples;  // when sampled

  // Interpolated state at t (requires dense integration).
  Eigen::VectorXd at(double t) const {
    if (segments.empty()) throw Error("OdeSolution::at requires dense output");
    const double lo = std::min(t_begin, t_end), hi = std::max(t_begin, t_end);
    if (t < lo - 1e-12 * (hi - lo + 1) || t > hi + 1e-12 * (hi - lo + 1))
      throw OutOfDomain("interpolation time outside integration interval");
    t = std::clamp(t, lo, hi);
    // binary search over segments (stored in integration order, forward time)
    std::size_t a = 0, b = segments.size();
    while (b - a > 1) {
      std::size_t m = (a + b) / 2;
      if (segments[m].t0 <= t)
        a = m;
      else
        b = m;
    }
    const OdeSegment& s = segments[a];
    double th = std::clamp((t - s.t0) / s.h, 0.0, 1.0);
    const double th1 = 1.0 - th;
    return s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
  }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension weights (Hairer's contd5).
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace detail

// Integrates y' = f(t, y) from t0 to t1 (t1 > t0) with adaptive step control.
inline OdeSolution integrate_ode(const OdeRhs& f, const Eigen::VectorXd& y0,
                                 double t0, double t1,
                                 const OdeOptions& opts = {}) {
  using namespace detail;
  if (!(t1 > t0)) throw InvalidParameter("integrate_ode: need t1 > t0");
  const Eigen::Index n = y0.size();
  OdeSolution sol;
  sol.t_begin = t0;
  sol.t_end = t1;

  Eigen::VectorXd y = y0, ynew(n), err(n), sc(n);
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n);

  const double span = t1 - t0;
  const double hmax = opts.max_step > 0 ? opts.max_step : span;
  f(t0, y, k1);
  double h = opts.initial_step;
  if (h <= 0) {
    const double d0 = y.cwiseAbs().maxCoeff() + opts.atol;
    const double d1n = k1.cwiseAbs().maxCoeff() + opts.atol;
    h = 0.01 * d0 / d1n;
    h = std::min({h, hmax, span / 10});
    h = std::max(h, 1e-12 * span);
  }

  double t = t0;
  bool first_sample = true;
  if (opts.sample_stride > 0 && first_sample) {
    sol.samples.emplace_back(t, y);
    first_sample = false;
  }

  long steps = 0;
  while (t < t1) {
    if (++steps > opts.max_steps)
      throw IntegratorFailure("integrate_ode: step budget exhausted");
    if (h < 16 * std::numeric_limits<double>::epsilon() * std::abs(t1))
      throw IntegratorFailure("integrate_ode: step size underflow");
    if (t + h > t1) h = t1 - t;

    ytmp = y + h * (a21 * k1);
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + h, ynew, k7);  // FSAL

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double errnorm = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s =
          opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double q = err[i] / s;
      errnorm += q * q;
    }
    errnorm = std::sqrt(errnorm / static_cast<double>(n));

    if (errnorm <= 1.0) {
      if (opts.dense) {
        OdeSegment seg;
        seg.t0 = t;
        seg.h = h;
        seg.r1 = y;
        seg.r2 = ynew - y;
        seg.r3 = h * k1 - seg.r2;
        seg.r4 = seg.r2 - h * k7 - seg.r3;
        seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        sol.segments.push_back(std::move(seg));
      }
      t += h;
      y.swap(ynew);
      k1.swap(k7);
      ++sol.accepted;
      if (opts.sample_stride > 0 &&
          (sol.accepted % opts.sample_stride == 0 || t >= t1))
        sol.samples.emplace_back(t, y);
    } else {
      ++sol.rejected;
    }

    double fac = 0.9 * std::pow(std::max(errnorm, 1e-16), -0.2);
    fac = std::clamp(fac, 0.2, 8.0);
    h = std::min(h * fac, hmax);
  }

  sol.y_final = std::move(y);
  return sol;
}

// Complex <-> real packing helpers for complex linear systems.
inline Eigen::VectorXd pack_complex(const Eigen::MatrixXcd& m) {
  Eigen::VectorXd v(2 * m.size());
  const std::complex<double>* p = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    v[2 * i] = p[i].real();
    v[2 * i + 1] = p[i].imag();
  }
  return v;
}

inline Eigen::MatrixXcd unpack_complex(const Eigen::VectorXd& v,
                                       Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXcd m(rows, cols);
  std::complex<double>* p = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i)
    p[i] = {v[2 * i], v[2 * i + 1]};
  return m;
}

}  // namespace pulseforge
