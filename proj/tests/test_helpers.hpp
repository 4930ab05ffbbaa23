#pragma once

#include <memory>
#include <numbers>
#include <random>

#include "pulseforge/magnus.hpp"

namespace pulseforge::testing {

// Random band-limited coefficient field on su(2), normalized so that
// max_t ||h(t)|| * tf = strength.
inline CoeffFn random_su2_field(std::mt19937_64& rng, double tf,
                                double strength) {
  std::normal_distribution<double> g;
  auto c = std::make_shared<Eigen::Matrix<double, 3, 6>>();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 6; ++k) (*c)(i, k) = g(rng);
  auto raw = [c, tf](double t) {
    VectorXd h = VectorXd::Zero(3);
    for (int k = 1; k <= 3; ++k) {
      const double w = 2 * std::numbers::pi * k * t / tf;
      for (int i = 0; i < 3; ++i)
        h[i] += (*c)(i, 2 * (k - 1)) * std::cos(w) +
                (*c)(i, 2 * (k - 1) + 1) * std::sin(w);
    }
    return h;
  };
  double peak = 0;
  for (int i = 0; i <= 400; ++i)
    peak = std::max(peak, raw(tf * i / 400.0).norm());
  const double scale = strength / (peak * tf);
  return [raw, scale](double t) { return VectorXd(scale * raw(t)); };
}

// Independent double-integral evaluation of the second Magnus term on a
// uniform grid with cumulative Simpson prefixes.
inline VectorXd omega2_nested(const CoeffFn& h, const OperatorBasis& b,
                              double tf) {
  const int m = 4000;  // intervals, even
  const double dt = tf / m;
  std::vector<VectorXd> a(m + 1), q(m + 1);
  for (int i = 0; i <= m; ++i) a[i] = h(i * dt);
  q[0] = VectorXd::Zero(b.num_ops());
  for (int i = 2; i <= m; i += 2)
    q[i] = q[i - 2] + dt / 3.0 * (a[i - 2] + 4.0 * a[i - 1] + a[i]);
  for (int i = 1; i <= m; i += 2)
    q[i] = q[i - 1] +
           dt / 12.0 * (5.0 * a[i - 1] + 8.0 * a[i] - a[std::min(i + 1, m)]);
  VectorXd acc = VectorXd::Zero(b.num_ops());
  for (int i = 0; i <= m; ++i) {
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * b.commutator(a[i], q[i]);
  }
  return 0.5 * dt / 3.0 * acc;
}

}  // namespace pulseforge::testing
