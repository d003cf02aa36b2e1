#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "heatlab/scenario.hpp"
#include "heatlab/semigroup.hpp"
#include "heatlab/space.hpp"
#include "helpers.hpp"

using namespace heatlab;

namespace {

DirichletSpace two_point() {
  Vector mu(2);
  mu << 1, 1;
  return DirichletSpace(mu, {Edge{0, 1, 1.0}}, Vector());
}

}  // namespace

TEST_CASE("atomic measures") {
  AtomicMeasure d = AtomicMeasure::dirac(6, 2, 1.5);
  CHECK(d.size() == 6);
  CHECK(d.total() == 1.5);
  CHECK(d.support() == std::vector<int>{2});

  Vector m(4);
  m << 0, 1, 0, 2;
  CHECK(AtomicMeasure(m).support() == std::vector<int>{1, 3});
  CHECK(AtomicMeasure::zero(3).support().empty());

  expect_error(Errc::invalid_input, [] { AtomicMeasure::dirac(4, 4); });
  expect_error(Errc::invalid_input, [] {
    Vector bad(2);
    bad << 1, -0.5;
    AtomicMeasure{bad};
  });
}

TEST_CASE("two-point space: closed-form spectrum and kernel") {
  HeatEngine engine(two_point());
  REQUIRE(engine.method() == HeatEngine::Method::dense_spectral);
  CHECK(engine.eigenvalues()[0] >= 0.0);
  CHECK(engine.eigenvalues()[0] <= 1e-13);
  CHECK(engine.eigenvalues()[1] == doctest::Approx(2.0).epsilon(1e-13));

  // Basis columns are mu-orthonormal.
  Matrix gram = engine.basis().transpose() *
                engine.space().mu().asDiagonal() * engine.basis();
  CHECK((gram - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-13);

  for (double t : {0.05, 0.4, 1.0, 3.0}) {
    const double on = 0.5 * (1.0 + std::exp(-2.0 * t));
    const double off = 0.5 * (1.0 - std::exp(-2.0 * t));
    CHECK(engine.kernel(t, 0, 0) == doctest::Approx(on).epsilon(1e-13));
    CHECK(engine.kernel(t, 1, 1) == doctest::Approx(on).epsilon(1e-13));
    CHECK(engine.kernel(t, 0, 1) == doctest::Approx(off).epsilon(1e-13));
  }
}

TEST_CASE("cycle(3): eigenvalues {0,3,3} and kernel values") {
  HeatEngine engine(build_cycle(3));
  CHECK(engine.eigenvalues()[0] <= 1e-13);
  CHECK(engine.eigenvalues()[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(engine.eigenvalues()[2] == doctest::Approx(3.0).epsilon(1e-12));

  const double on = (1.0 + 2.0 * std::exp(-3.0)) / 3.0;
  const double off = (1.0 - std::exp(-3.0)) / 3.0;
  CHECK(engine.kernel(1.0, 0, 0) == doctest::Approx(on).epsilon(1e-13));
  CHECK(engine.kernel(1.0, 2, 2) == doctest::Approx(on).epsilon(1e-13));
  CHECK(engine.kernel(1.0, 0, 2) == doctest::Approx(off).epsilon(1e-13));
  CHECK(heat_kernel(engine, 1.0, 0, 1) == engine.kernel(1.0, 0, 1));
}

TEST_CASE("kernel matrix: exact symmetry, positivity, mass") {
  DirichletSpace s = random_connected_space(3, 24, 0.2, 0.3);
  HeatEngine engine(s);
  for (double t : {1e-3, 0.1, 1.0, 10.0}) {
    Matrix K = engine.kernel_matrix(t);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(K.minCoeff() >= -1e-14);
    for (int x = 0; x < s.size(); x += 7)
      for (int y = 0; y < s.size(); y += 5)
        CHECK(std::abs(K(x, y) - engine.kernel(t, x, y)) <= 1e-12);
  }
}

TEST_CASE("chapman-kolmogorov and the semigroup identity") {
  DirichletSpace s = random_connected_space(9, 30, 0.15, 0.2);
  HeatEngine engine(s);
  Matrix M = s.mu().asDiagonal();
  Matrix lhs = engine.kernel_matrix(1.1);
  Matrix rhs = engine.kernel_matrix(0.7) * M * engine.kernel_matrix(0.4);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-11);

  std::mt19937 rng(4);
  std::normal_distribution<double> gauss;
  Vector f(s.size());
  for (int i = 0; i < s.size(); ++i) f[i] = gauss(rng);
  Vector once = engine.apply(1.1, f);
  Vector twice = engine.apply(0.4, engine.apply(0.7, f));
  CHECK((once - twice).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + f.cwiseAbs().maxCoeff()));

  // apply at t = 0 is the identity, bitwise.
  Vector same = engine.apply(0.0, f);
  CHECK((same - f).cwiseAbs().maxCoeff() == 0.0);

  // mu-symmetry: <P_t f, g>_mu = <f, P_t g>_mu.
  Vector g(s.size());
  for (int i = 0; i < s.size(); ++i) g[i] = gauss(rng);
  double a = (engine.apply(0.6, f).array() * s.mu().array() * g.array()).sum();
  double b = (f.array() * s.mu().array() * engine.apply(0.6, g).array()).sum();
  CHECK(std::abs(a - b) <= 1e-11);
}

TEST_CASE("conservation dichotomy") {
  HeatEngine free_engine(build_cycle(11));
  Vector ones = Vector::Ones(11);
  for (double t : {0.01, 1.0, 25.0})
    CHECK((free_engine.apply(t, ones) - ones).cwiseAbs().maxCoeff() <= 1e-12);

  HeatEngine killed(build_path(7, 1.0, Endpoint::absorbing, Endpoint::reflecting));
  Vector survive = killed.apply(1.0, Vector::Ones(7));
  CHECK(survive.minCoeff() < 1.0 - 1e-8);
  CHECK(survive.maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("measure evolution matches kernel columns") {
  DirichletSpace s = build_cycle(8, 0.7, 1.3);
  HeatEngine engine(s);
  for (int y : {0, 3}) {
    Vector v = engine.apply_measure(0.9, AtomicMeasure::dirac(8, y, 2.0));
    Matrix K = engine.kernel_matrix(0.9);
    CHECK((v - 2.0 * K.col(y)).cwiseAbs().maxCoeff() <= 1e-13);
  }
  Vector mass = Vector::Zero(8);
  mass[1] = 0.5;
  mass[6] = 1.5;
  Vector direct = engine.apply_measure(0.9, mass);
  Vector split = 0.25 * engine.apply_measure(0.9, AtomicMeasure::dirac(8, 1, 2.0)) +
                 0.75 * engine.apply_measure(0.9, AtomicMeasure::dirac(8, 6, 2.0));
  CHECK((direct - split).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((apply_semigroup_measure(engine, 0.9, AtomicMeasure(mass)) - direct)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("time and argument gates") {
  HeatEngine engine(build_cycle(4));
  Vector f = Vector::Ones(4);
  expect_error(Errc::invalid_time, [&] { engine.kernel(0.0, 0, 0); });
  expect_error(Errc::invalid_time, [&] { engine.kernel(-1.0, 0, 0); });
  expect_error(Errc::invalid_time, [&] { engine.kernel_matrix(0.0); });
  expect_error(Errc::invalid_time,
               [&] { engine.apply_measure(0.0, AtomicMeasure::dirac(4, 0)); });
  expect_error(Errc::invalid_time, [&] { engine.apply(-0.5, f); });
  expect_error(Errc::invalid_input, [&] { engine.kernel(1.0, 0, 4); });
  expect_error(Errc::invalid_input, [&] { engine.apply(1.0, Vector::Ones(3)); });
  expect_error(Errc::invalid_input,
               [&] { engine.apply_measure(1.0, Vector::Ones(5)); });

  DirichletSpace other = build_cycle(5);
  Subdomain U(other, {0, 1});
  expect_error(Errc::invalid_input, [&] { engine.restricted_apply(U, 1.0, f); });
}

TEST_CASE("restricted semigroup = engine of the restricted space") {
  DirichletSpace c = build_cycle(8);
  HeatEngine engine(c);
  Subdomain U(c, {0, 1, 2, 3, 4});
  Vector f(8);
  f << 0.2, 1.0, 0.5, 0, 0.3, 2.0, 0, 0.1;

  // t = 0: pointwise restriction.
  CHECK((engine.restricted_apply(U, 0.0, f) - U.cut(f)).cwiseAbs().maxCoeff() == 0.0);

  Restriction r = restrict_space(c, U);
  HeatEngine local(r.space);
  Vector flocal(5);
  for (int i = 0; i < 5; ++i) flocal[i] = f[r.vertices[i]];
  Vector evolved = local.apply(0.7, flocal);
  Vector lifted = Vector::Zero(8);
  for (int i = 0; i < 5; ++i) lifted[r.vertices[i]] = evolved[i];
  CHECK((engine.restricted_apply(U, 0.7, f) - lifted).cwiseAbs().maxCoeff() <= 1e-13);

  CHECK(engine.restricted_engine(U).space().content_hash() ==
        r.space.content_hash());
  CHECK((restricted_semigroup(engine, U, 0.7, f) -
         engine.restricted_apply(U, 0.7, f))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("domain monotonicity and exhaustion convergence") {
  DirichletSpace c = build_cycle(9);
  HeatEngine engine(c);
  Subdomain U1(c, {0, 1, 2});
  Subdomain U2(c, {8, 0, 1, 2, 3, 4});
  Vector f = Vector::Zero(9);
  f[1] = 1.0;
  f[2] = 0.4;
  for (double t : {0.05, 0.3, 2.0}) {
    Vector a = engine.restricted_apply(U1, t, f);
    Vector b = engine.restricted_apply(U2, t, f);
    Vector full = engine.apply(t, f);
    CHECK((b - a).minCoeff() >= -1e-12);
    CHECK((full - b).minCoeff() >= -1e-12);
  }
  // The full stage reproduces the unrestricted semigroup.
  Vector gap = engine.restricted_apply(Subdomain::full(c), 0.8, f) - engine.apply(0.8, f);
  CHECK(gap.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("expm-action mode agrees with the dense engine") {
  DirichletSpace s = random_connected_space(5, 12, 0.2, 0.3);
  HeatEngine dense(s);
  HeatEngine walker(s, /*dense_threshold=*/2);
  REQUIRE(walker.method() == HeatEngine::Method::expm_action);

  std::mt19937 rng(17);
  std::normal_distribution<double> gauss;
  Vector f(12);
  for (int i = 0; i < 12; ++i) f[i] = gauss(rng);
  for (double t : {1e-3, 0.2, 1.0, 5.0}) {
    CHECK((walker.apply(t, f) - dense.apply(t, f)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((walker.kernel_matrix(t) - dense.kernel_matrix(t)).cwiseAbs().maxCoeff() <=
          1e-12);
  }
  CHECK(walker.kernel(1.0, 3, 7) ==
        doctest::Approx(dense.kernel(1.0, 3, 7)).epsilon(1e-11));
  Vector nu = f.cwiseAbs();
  CHECK((walker.apply_measure(1.0, nu) - dense.apply_measure(1.0, nu))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);

  expect_error(Errc::insufficient_data, [&] { walker.eigenvalues(); });
  expect_error(Errc::insufficient_data, [&] { walker.basis(); });
}

TEST_CASE("kernel is jointly continuous along a time sweep") {
  HeatEngine engine(build_cycle(3));
  const double step = 1e-4;
  double prev = engine.kernel(0.5, 0, 1);
  double worst = 0.0;
  for (int i = 1; i <= 10000; ++i) {
    const double t = 0.5 + i * step;
    const double p = engine.kernel(t, 0, 1);
    worst = std::max(worst, std::abs(p - prev));
    prev = p;
    if (i % 1000 == 0) {
      const double closed = (1.0 - std::exp(-3.0 * t)) / 3.0;
      CHECK(p == doctest::Approx(closed).epsilon(1e-12));
    }
  }
  CHECK(worst <= 1e-4);
}
