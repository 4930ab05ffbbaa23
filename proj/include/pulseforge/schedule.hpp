#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pulseforge/errors.hpp"

namespace pulseforge {

enum class Constraint { free, zero, constant_only, boundary_zero };

inline const char* to_string(Constraint c) {
  switch (c) {
    case Constraint::free: return "free";
    case Constraint::zero: return "zero";
    case Constraint::constant_only: return "constant_only";
    case Constraint::boundary_zero: return "boundary_zero";
  }
  return "?";
}

// Truncated Fourier series on [0, t_f]:
//   w(t) = sum_{k=k_min}^{k_max} c_k cos(w_k t) + d_k sin(w_k t),
// with w_k = 2 pi k / t_f and d_0 = 0.
struct FourierField {
  double t_f = 1.0;
  int k_min = 0;
  int k_max = 0;
  Eigen::VectorXd c;  // size k_max + 1
  Eigen::VectorXd d;  // size k_max + 1, d[0] unused (= 0)
  Constraint constraint = Constraint::free;

  static FourierField zeros(double t_f, int k_min, int k_max,
                            Constraint constr = Constraint::free) {
    FourierField f;
    f.t_f = t_f;
    f.k_min = k_min;
    f.k_max = k_max;
    f.c = Eigen::VectorXd::Zero(k_max + 1);
    f.d = Eigen::VectorXd::Zero(k_max + 1);
    f.constraint = constr;
    return f;
  }

  double omega(int k) const { return 2.0 * std::numbers::pi * k / t_f; }

  void validate() const {
    if (t_f <= 0) throw InvalidParameter("FourierField: t_f must be positive");
    if (k_min < 0 || k_max < k_min)
      throw InvalidParameter("FourierField: bad harmonic range");
    if (c.size() != k_max + 1 || d.size() != k_max + 1)
      throw InvalidParameter("FourierField: coefficient size mismatch");
    if (std::abs(d[0]) > 0)
      throw InvalidParameter("FourierField: d_0 must vanish");
    switch (constraint) {
      case Constraint::zero:
        if (c.cwiseAbs().maxCoeff() > 0 || d.cwiseAbs().maxCoeff() > 0)
          throw InvalidParameter("zero-constrained field has coefficients");
        break;
      case Constraint::constant_only:
        if (c.tail(k_max).cwiseAbs().maxCoeff() > 0 ||
            d.cwiseAbs().maxCoeff() > 0)
          throw InvalidParameter(
              "constant-only field has time-dependent coefficients");
        break;
      case Constraint::boundary_zero:
        if (std::abs(c.sum()) > 1e-12)
          throw InvalidParameter(
              "boundary-zero field: cosine coefficients must sum to zero");
        break;
      case Constraint::free:
        break;
    }
    if (!c.allFinite() || !d.allFinite())
      throw InvalidParameter("FourierField: non-finite coefficients");
  }

  double eval(double t) const {
    if (t < -1e-12 * t_f || t > t_f * (1 + 1e-12))
      throw OutOfDomain("FourierField::eval: t outside [0, t_f]");
    double acc = 0;
    for (int k = k_min; k <= k_max; ++k) {
      const double w = omega(k) * t;
      acc += c[k] * std::cos(w);
      if (k > 0) acc += d[k] * std::sin(w);
    }
    return acc;
  }

  // Antiderivative from 0 to t.
  double integral(double t) const {
    double acc = 0;
    for (int k = k_min; k <= k_max; ++k) {
      if (k == 0) {
        acc += c[0] * t;
      } else {
        const double wk = omega(k);
        acc += c[k] * std::sin(wk * t) / wk + d[k] * (1 - std::cos(wk * t)) / wk;
      }
    }
    return acc;
  }
};

// Named analytic envelopes.
//
// raised_cosine:  f(t) = (amplitude / t_f) [1 - cos(2 pi t / t_f)]
//                 vanishes at both endpoints; integral over [0, t_f] equals
//                 amplitude.
// snap_half:      f(t) = amplitude [1 - cos(4 pi t / t_f)] on one half of
//                 [0, t_f] and zero on the other; `phase` records the drive
//                 axis azimuth used by the SNAP scenario builder.
// custom:         linear interpolation through uniform samples on [0, t_f].
struct Envelope {
  enum class Kind { raised_cosine, snap_half, custom };
  Kind kind = Kind::raised_cosine;
  double t_f = 1.0;
  double amplitude = 0.0;
  double phase = 0.0;
  int half = 0;  // snap_half: 0 -> [0, t_f/2), 1 -> [t_f/2, t_f]
  std::vector<double> samples;

  static Envelope raised_cosine(double amplitude, double t_f) {
    Envelope e;
    e.kind = Kind::raised_cosine;
    e.amplitude = amplitude;
    e.t_f = t_f;
    return e;
  }

  static Envelope snap_half(double amplitude, double phase, int half,
                            double t_f) {
    Envelope e;
    e.kind = Kind::snap_half;
    e.amplitude = amplitude;
    e.phase = phase;
    e.half = half;
    e.t_f = t_f;
    return e;
  }

  static Envelope custom(std::vector<double> samples, double t_f) {
    if (samples.size() < 2)
      throw InvalidParameter("Envelope::custom needs at least two samples");
    Envelope e;
    e.kind = Kind::custom;
    e.samples = std::move(samples);
    e.t_f = t_f;
    return e;
  }

  void check_domain(double t) const {
    if (t < -1e-12 * t_f || t > t_f * (1 + 1e-12))
      throw OutOfDomain("Envelope: t outside [0, t_f]");
  }

  double eval(double t) const {
    check_domain(t);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (kind) {
      case Kind::raised_cosine:
        return amplitude / t_f * (1.0 - std::cos(two_pi * t / t_f));
      case Kind::snap_half: {
        const bool in_half = (half == 0) ? (t < 0.5 * t_f) : (t >= 0.5 * t_f);
        if (!in_half) return 0.0;
        return amplitude * (1.0 - std::cos(2 * two_pi * t / t_f));
      }
      case Kind::custom: {
        const double x = std::clamp(t / t_f, 0.0, 1.0) * (samples.size() - 1);
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(x),
                                             samples.size() - 2);
        const double frac = x - static_cast<double>(i);
        return samples[i] * (1 - frac) + samples[i + 1] * frac;
      }
    }
    return 0.0;
  }

  double derivative(double t) const {
    check_domain(t);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (kind) {
      case Kind::raised_cosine:
        return amplitude / t_f * two_pi / t_f * std::sin(two_pi * t / t_f);
      case Kind::snap_half: {
        const bool in_half = (half == 0) ? (t < 0.5 * t_f) : (t >= 0.5 * t_f);
        if (!in_half) return 0.0;
        return amplitude * 2 * two_pi / t_f * std::sin(2 * two_pi * t / t_f);
      }
      case Kind::custom: {
        const double dx = t_f / (samples.size() - 1);
        const double x = std::clamp(t / t_f, 0.0, 1.0) * (samples.size() - 1);
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(x),
                                             samples.size() - 2);
        return (samples[i + 1] - samples[i]) / dx;
      }
    }
    return 0.0;
  }

  // Accumulated angle theta(t) = int_0^t f. Closed forms where available.
  double theta(double t) const {
    check_domain(t);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (kind) {
      case Kind::raised_cosine:
        return amplitude / t_f *
               (t - t_f / two_pi * std::sin(two_pi * t / t_f));
      case Kind::snap_half: {
        auto prim = [&](double u) {  // antiderivative of 1 - cos(4 pi u/t_f)
          return u - t_f / (2 * two_pi) * std::sin(2 * two_pi * u / t_f);
        };
        const double lo = (half == 0) ? 0.0 : 0.5 * t_f;
        const double hi = (half == 0) ? std::min(t, 0.5 * t_f) : t;
        if (hi <= lo) return 0.0;
        return amplitude * (prim(hi) - prim(lo));
      }
      case Kind::custom: {
        // trapezoid over the sample grid up to t
        const double dx = t_f / (samples.size() - 1);
        double acc = 0, x = 0;
        for (std::size_t i = 0; i + 1 < samples.size(); ++i, x += dx) {
          if (t <= x) break;
          const double hi = std::min(t, x + dx);
          const double f0 = samples[i];
          const double f1 = eval(hi);
          acc += 0.5 * (f0 + f1) * (hi - x);
        }
        return acc;
      }
    }
    return 0.0;
  }
};

}  // namespace pulseforge
