#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pulseforge/ode.hpp"
#include "pulseforge/quadrature.hpp"

using namespace pulseforge;

TEST_CASE("ode: exponential decay") {
  OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy = -y;
  };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  OdeOptions oo;
  oo.rtol = 1e-12;
  oo.atol = 1e-14;
  auto sol = integrate_ode(rhs, y0, 0, 1, oo);
  CHECK(sol.y_final[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-11));
}

TEST_CASE("ode: dense output of the harmonic oscillator") {
  OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  Eigen::VectorXd y0(2);
  y0 << 0.0, 1.0;  // y = sin t
  OdeOptions oo;
  oo.rtol = 1e-11;
  oo.atol = 1e-13;
  oo.dense = true;
  auto sol = integrate_ode(rhs, y0, 0, 10, oo);
  CHECK(sol.y_final[0] == doctest::Approx(std::sin(10.0)).epsilon(1e-9));
  for (double t : {0.1, 1.7, 3.3, 6.289, 9.99}) {
    auto y = sol.at(t);
    CHECK(y[0] == doctest::Approx(std::sin(t)).epsilon(5e-9));
    CHECK(y[1] == doctest::Approx(std::cos(t)).epsilon(5e-9));
  }
  CHECK_THROWS_AS(sol.at(10.5), OutOfDomain);
}

TEST_CASE("ode: step underflow reported") {
  // derivative blows up near t = 0.5
  OdeRhs rhs = [](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(1);
    dy[0] = y[0] / (0.5 - t);
  };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  CHECK_THROWS_AS(integrate_ode(rhs, y0, 0, 1.0, {}), IntegratorFailure);
}

TEST_CASE("quadrature: smooth and oscillatory integrands") {
  const double pi = std::numbers::pi;
  CHECK(integrate([](double t) { return std::sin(t); }, 0, pi) ==
        doctest::Approx(2.0).epsilon(1e-13));
  const double val =
      integrate([](double t) { return std::cos(50 * t); }, 0, 10, 1e-14, 1e-14);
  CHECK(val == doctest::Approx(std::sin(500.0) / 50.0).epsilon(1e-10));
  CHECK(integrate([](double) { return 1.0; }, 2, 2) == 0.0);
}
