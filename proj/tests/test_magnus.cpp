#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pulseforge/magnus.hpp"
#include "pulseforge/schedule.hpp"
#include "test_helpers.hpp"

using namespace pulseforge;
namespace nums = std::numbers;

namespace {

// Closed-form interaction-picture error coefficients of the resonantly
// driven qubit (counter-rotating terms rotated by the accumulated angle).
struct QubitTilde {
  Envelope env;
  double wd = 1.0;
  explicit QubitTilde(double tf, double theta0 = nums::pi / 2)
      : env(Envelope::raised_cosine(theta0, tf)) {}
  VectorXd operator()(double t) const {
    const double f = env.eval(t), th = env.theta(t);
    VectorXd v(3);
    v[0] = 0.5 * f * std::cos(2 * wd * t);
    v[1] = -0.5 * f * std::sin(2 * wd * t) * std::cos(th);
    v[2] = 0.5 * f * std::sin(2 * wd * t) * std::sin(th);
    return v;
  }
};

MagnusStack truncated(const MagnusStack& st, int order) {
  MagnusStack out = st;
  out.order = order;
  out.omega.resize(order);
  return out;
}

}  // namespace

TEST_CASE("magnus: zero Hamiltonian gives zero terms") {
  OperatorBasis b = pauli_basis();
  auto st = integrate_magnus([](double) { return VectorXd::Zero(3); }, b, 4,
                             2.0);
  for (int k = 1; k <= 4; ++k) CHECK(st.term(k).norm() <= 1e-14);
}

TEST_CASE("magnus: self-commuting Hamiltonian keeps only the first term") {
  OperatorBasis b = pauli_basis();
  VectorXd c(3);
  c << 0.3, -0.1, 0.7;
  const double tf = 1.7;
  auto st =
      integrate_magnus([&](double) { return c; }, b, 4, tf, 1e-12, 1e-14);
  CHECK((st.term(1) - c * tf).cwiseAbs().maxCoeff() <= 1e-11);
  for (int k = 2; k <= 4; ++k) CHECK(st.term(k).norm() <= 1e-11);
}

TEST_CASE("magnus generator recursion reproduces the explicit low orders") {
  OperatorBasis b = pauli_basis();
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  detail::MagnusRhs rhs(b, 4);
  for (int rep = 0; rep < 5; ++rep) {
    VectorXd state(12), a(3), out(12);
    for (int i = 0; i < 12; ++i) state[i] = g(rng);
    for (int i = 0; i < 3; ++i) a[i] = g(rng);
    rhs(state.data(), a, out.data());
    auto om = [&](int k) { return VectorXd(state.segment(3 * (k - 1), 3)); };
    VectorXd d2 = -0.5 * b.commutator(om(1), a);
    VectorXd d3 = -0.5 * b.commutator(om(2), a) +
                  (1.0 / 12) * b.commutator(om(1), b.commutator(om(1), a));
    VectorXd d4 = -0.5 * b.commutator(om(3), a) +
                  (1.0 / 12) * (b.commutator(om(2), b.commutator(om(1), a)) +
                                b.commutator(om(1), b.commutator(om(2), a)));
    CHECK((out.segment(0, 3) - a).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((out.segment(3, 3) - d2).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((out.segment(6, 3) - d3).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((out.segment(9, 3) - d4).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("magnus second term agrees with the nested double integral") {
  OperatorBasis b = pauli_basis();
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 3; ++rep) {
    const double tf = 1.0 + 0.7 * rep;
    CoeffFn h = pulseforge::testing::random_su2_field(rng, tf, 1.2);
    auto st = integrate_magnus(h, b, 2, tf, 1e-12, 1e-14);
    VectorXd oracle = pulseforge::testing::omega2_nested(h, b, tf);
    CHECK((st.term(2) - oracle).norm() <= 1e-6 * std::max(oracle.norm(), 1e-3));
  }
}

TEST_CASE("magnus defect: commuting case sits at integrator noise") {
  OperatorBasis b = pauli_basis();
  VectorXd c(3);
  c << 0.4, 0.0, 0.2;
  CoeffFn h = [&](double) { return c; };
  auto st = integrate_magnus(h, b, 1, 2.0);
  CHECK(magnus_defect(st, h, b) <= 1e-9);
}

TEST_CASE("magnus defect decreases with order for the driven qubit") {
  const double tf = 20.0;
  QubitTilde vt(tf);
  OperatorBasis b = pauli_basis();
  CoeffFn h = [&](double t) { return vt(t); };
  auto st = integrate_magnus(h, b, 4, tf, 1e-12, 1e-14);
  const double d1 = magnus_defect(truncated(st, 1), h, b);
  const double d2 = magnus_defect(truncated(st, 2), h, b);
  const double d4 = magnus_defect(truncated(st, 4), h, b);
  CHECK(d2 < d1);
  CHECK(d4 < d2);
  CHECK(d4 <= 1e-6);
}

TEST_CASE("magnus orders five and six carry the expected convergence order") {
  OperatorBasis b = pauli_basis();
  std::mt19937_64 rng(41);
  const double tf = 1.0;
  CoeffFn base = pulseforge::testing::random_su2_field(rng, tf, 2.0);
  for (int order : {5, 6}) {
    std::vector<double> xs, ys;
    for (double s : {1.0, 0.5, 0.25}) {
      CoeffFn h = [base, s](double t) { return VectorXd(s * base(t)); };
      auto st = integrate_magnus(h, b, order, tf, 1e-13, 1e-15);
      const double d = magnus_defect(truncated(st, order), h, b,
                                     {1e-12, 1e-14, 64});
      xs.push_back(std::log(s));
      ys.push_back(std::log(d));
    }
    const double slope = (ys.front() - ys.back()) / (xs.front() - xs.back());
    INFO("order ", order, " defect slope ", slope);
    CHECK(slope >= order + 0.6);
    // the next omitted term dominates: exp of the kept terms is accurate to
    // one order beyond the truncation
  }
}

TEST_CASE("magnus in-frame integration matches the closed-form fields") {
  const double tf = 6.0;
  OperatorBasis b = pauli_basis();
  QubitTilde vt(tf);
  Envelope env = Envelope::raised_cosine(nums::pi / 2, tf);
  CoeffFn h0 = [&](double t) {
    VectorXd h = VectorXd::Zero(3);
    h[0] = 0.5 * env.eval(t);
    return h;
  };
  CoeffFn v = [&](double t) {
    const double f = env.eval(t);
    VectorXd h(3);
    h << 0.5 * f * std::cos(2 * t), -0.5 * f * std::sin(2 * t), 0.0;
    return h;
  };
  auto direct = integrate_magnus([&](double t) { return vt(t); }, b, 4, tf,
                                 1e-12, 1e-14);
  auto framed = integrate_magnus_in_frame(h0, v, b, 4, tf, 1e-12, 1e-14);
  for (int k = 1; k <= 4; ++k)
    CHECK((direct.term(k) - framed.term(k)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("magnus: unsupported orders are rejected") {
  OperatorBasis b = pauli_basis();
  CoeffFn h = [](double) { return VectorXd::Zero(3); };
  CHECK_THROWS_AS(integrate_magnus(h, b, 7, 1.0), UnsupportedOrder);
  CHECK_THROWS_AS(integrate_magnus(h, b, 0, 1.0), UnsupportedOrder);
}

TEST_CASE("nonresonant scaling probe fits the first-order decay") {
  // Constant drive at fixed total angle: the oscillatory error then has a
  // nonvanishing boundary value, which is what the inverse-frequency law
  // assumes. (An envelope vanishing smoothly at the boundary kills the
  // leading boundary term and decays faster.)
  OperatorBasis b = pauli_basis();
  auto runner = [&](double tf) {
    const double amp = nums::pi / 2 / tf;
    CoeffFn h = [amp, tf](double t) {
      const double th = amp * t;
      VectorXd v(3);
      v[0] = 0.5 * amp * std::cos(2 * t);
      v[1] = -0.5 * amp * std::sin(2 * t) * std::cos(th);
      v[2] = 0.5 * amp * std::sin(2 * t) * std::sin(th);
      return v;
    };
    return integrate_magnus(h, b, 1, tf, 1e-12, 1e-14);
  };
  std::vector<double> tfs;
  for (int i = 0; i < 6; ++i) tfs.push_back(15.0 * std::pow(10.0, i / 5.0));
  auto fit = nonresonant_scaling_probe(runner, 1, tfs);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(0.3));
  CHECK_THROWS_AS(nonresonant_scaling_probe(runner, 1, {10.0, 20.0}),
                  FitFailure);
  CHECK_THROWS_AS(nonresonant_scaling_probe(runner, 1, {10.0, 20.0, 30.0}),
                  FitFailure);
}
