#pragma once

#include <cmath>
#include <functional>

#include "pulseforge/errors.hpp"

namespace pulseforge {

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK constants).
inline constexpr double gk_xk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct GkResult {
  double value;
  double error;
};

template <class F>
GkResult gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = gk_wk[7] * fc;
  double resg = gk_wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double x = h * gk_xk[i];
    const double f1 = f(c - x), f2 = f(c + x);
    resk += gk_wk[i] * (f1 + f2);
    if (i % 2 == 1) resg += gk_wg[i / 2] * (f1 + f2);
  }
  return {resk * h, std::abs((resk - resg) * h)};
}

template <class F>
double adaptive_gk(const F& f, double a, double b, double abs_tol,
                   double rel_tol, int depth, double whole_scale) {
  if (depth > 60)
    throw QuadratureFailure("adaptive quadrature recursion limit reached");
  const GkResult r = gk15(f, a, b);
  if (r.error <= abs_tol + rel_tol * std::max(std::abs(r.value), whole_scale))
    return r.value;
  const double m = 0.5 * (a + b);
  return adaptive_gk(f, a, m, 0.5 * abs_tol, rel_tol, depth + 1, whole_scale) +
         adaptive_gk(f, m, b, 0.5 * abs_tol, rel_tol, depth + 1, whole_scale);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double abs_tol = 1e-12,
                        double rel_tol = 1e-12) {
  if (a == b) return 0.0;
  const detail::GkResult coarse = detail::gk15(f, a, b);
  return detail::adaptive_gk(f, a, b, abs_tol, rel_tol, 0,
                             std::abs(coarse.value));
}

}  // namespace pulseforge
