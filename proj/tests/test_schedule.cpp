#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pulseforge/quadrature.hpp"
#include "pulseforge/schedule.hpp"

using namespace pulseforge;
namespace nums = std::numbers;

TEST_CASE("fourier field: pointwise evaluation") {
  auto f = FourierField::zeros(2.0, 0, 2);
  CHECK(f.eval(0.7) == 0.0);

  f.c[1] = 1.0;
  CHECK(f.eval(0.0) == doctest::Approx(1.0));
  CHECK(f.eval(2.0) == doctest::Approx(1.0).epsilon(1e-12));

  auto g = FourierField::zeros(1.0, 0, 2);
  g.c[1] = 0.3;
  g.d[2] = -0.1;
  // 0.3 cos(pi/2) - 0.1 sin(pi) = 0 at t = t_f / 4
  CHECK(g.eval(0.25) == doctest::Approx(0.0).epsilon(1e-14));

  CHECK_THROWS_AS(g.eval(1.5), OutOfDomain);
  CHECK_THROWS_AS(g.eval(-0.2), OutOfDomain);
}

TEST_CASE("fourier field: constraint validation") {
  auto f = FourierField::zeros(1.0, 0, 3, Constraint::zero);
  CHECK_NOTHROW(f.validate());
  f.c[2] = 0.5;
  CHECK_THROWS_AS(f.validate(), InvalidParameter);

  auto g = FourierField::zeros(1.0, 0, 3, Constraint::constant_only);
  g.c[0] = 1.2;
  CHECK_NOTHROW(g.validate());
  g.d[1] = 0.1;
  CHECK_THROWS_AS(g.validate(), InvalidParameter);

  auto h = FourierField::zeros(1.0, 0, 2, Constraint::boundary_zero);
  h.c[1] = 0.4;
  h.c[2] = -0.4;
  CHECK_NOTHROW(h.validate());
  CHECK(h.eval(0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(h.eval(1.0) == doctest::Approx(0.0).epsilon(1e-12));
  h.c[2] = -0.3;
  CHECK_THROWS_AS(h.validate(), InvalidParameter);
}

TEST_CASE("fourier field: analytic integral matches quadrature") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  auto f = FourierField::zeros(1.7, 0, 4);
  for (int k = 0; k <= 4; ++k) {
    f.c[k] = g(rng);
    if (k > 0) f.d[k] = g(rng);
  }
  for (double t : {0.3, 0.9, 1.7}) {
    const double oracle =
        integrate([&](double u) { return f.eval(u); }, 0, t, 1e-13, 1e-13);
    CHECK(f.integral(t) == doctest::Approx(oracle).epsilon(1e-11));
  }
}

TEST_CASE("raised cosine envelope: boundary values and accumulated angle") {
  const double tf = 3.0;
  auto e = Envelope::raised_cosine(nums::pi / 2, tf);
  CHECK(e.eval(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(e.eval(tf) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(e.theta(0.0) == 0.0);
  CHECK(e.theta(tf) == doctest::Approx(nums::pi / 2).epsilon(1e-13));
  CHECK_THROWS_AS(e.eval(tf * 1.5), OutOfDomain);

  // unit-integral pump envelope
  auto p = Envelope::raised_cosine(1.0, 5.0);
  CHECK(p.theta(5.0) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("accumulated angle matches adaptive quadrature on random envelopes") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> amp(0.2, 3.0), tfd(0.5, 8.0),
      frac(0.1, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double tf = tfd(rng);
    Envelope e;
    switch (rep % 3) {
      case 0:
        e = Envelope::raised_cosine(amp(rng), tf);
        break;
      case 1:
        e = Envelope::snap_half(amp(rng), 0.0, rep % 2, tf);
        break;
      default: {
        std::vector<double> s(41);
        for (std::size_t i = 0; i < s.size(); ++i)
          s[i] = std::sin(0.37 * i) + 1.2;
        e = Envelope::custom(s, tf);
      }
    }
    const double t = tf * frac(rng);
    // integrate piecewise between envelope breakpoints so the adaptive rule
    // sees smooth integrands
    std::vector<double> knots{0.0};
    if (e.kind == Envelope::Kind::snap_half && t > 0.5 * tf)
      knots.push_back(0.5 * tf);
    if (e.kind == Envelope::Kind::custom) {
      const double dx = tf / (e.samples.size() - 1);
      for (double x = dx; x < t; x += dx) knots.push_back(x);
    }
    knots.push_back(t);
    double oracle = 0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
      oracle += integrate([&](double u) { return e.eval(u); }, knots[i],
                          knots[i + 1], 1e-14, 1e-13);
    CHECK(e.theta(t) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("snap half envelope: support and smoothness at the split") {
  const double tf = 4.0;
  auto first = Envelope::snap_half(1.5, 0.0, 0, tf);
  auto second = Envelope::snap_half(1.5, 0.0, 1, tf);
  CHECK(first.eval(3.0) == 0.0);
  CHECK(second.eval(1.0) == 0.0);
  CHECK(first.eval(2.0 - 1e-9) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(second.eval(2.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(first.eval(1.0) == doctest::Approx(1.5 * 2.0));  // peak of 1 - cos
}
