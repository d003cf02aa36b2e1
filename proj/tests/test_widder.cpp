#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "heatlab/solutions.hpp"
#include "heatlab/space.hpp"
#include "heatlab/widder.hpp"
#include "helpers.hpp"

using namespace heatlab;

namespace {

std::vector<double> log_grid(double a, double b, int count) {
  std::vector<double> ts(count);
  for (int i = 0; i < count; ++i)
    ts[i] = a * std::pow(b / a, double(i) / (count - 1));
  ts.front() = a;
  ts.back() = b;
  return ts;
}

// Base grid with the eps values spliced in exactly (nearby points dropped).
std::vector<double> with_eps(std::vector<double> base, const std::vector<double>& eps) {
  for (double e : eps)
    base.erase(std::remove_if(base.begin(), base.end(),
                              [&](double t) { return std::abs(t - e) <= 5e-3 * e; }),
               base.end());
  base.insert(base.end(), eps.begin(), eps.end());
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end()), base.end());
  return base;
}

const std::vector<double> kEps{4e-4, 2e-4, 1e-4};

SpaceTimeFunction kernel_solution(const HeatEngine& engine, const AtomicMeasure& nu0,
                                  const std::vector<double>& times) {
  SpaceTimeFunction u = sample_semigroup_measure(engine, times, nu0);
  u.values = u.values.cwiseMax(0.0);
  return u;
}

}  // namespace

TEST_CASE("local decomposition recovers the initial measure") {
  DirichletSpace c = build_cycle(6);
  HeatEngine engine(c);
  Vector mass = Vector::Zero(6);
  mass[2] = 0.7;
  mass[4] = 0.3;
  AtomicMeasure nu0(mass);
  SpaceTimeFunction u =
      kernel_solution(engine, nu0, with_eps(log_grid(1e-4, 2.0, 40), kEps));

  WidderDecomposition dec =
      widder_local_decompose(engine, u, Subdomain::full(c), kEps);

  CHECK((dec.nu.mass - mass).cwiseAbs().sum() <= 1e-6);
  CHECK(dec.richardson_applied);
  CHECK(dec.richardson_order > 0.5);
  CHECK(dec.richardson_order < 2.0);
  REQUIRE(dec.eps_trace.size() == 3);
  CHECK(dec.eps_trace[0].first == 4e-4);
  CHECK(dec.eps_trace[2].first == 1e-4);
  CHECK(dec.eps_trace[2].second <= dec.eps_trace[0].second + 1e-15);

  CHECK(dec.h.values.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(dec.reconstruction_residual <= 1e-10);
  CHECK(dec.h_nonnegativity_slack >= -1e-10);
  CHECK(dec.monotone_slack <= 1e-8);
  CHECK(dec.h.values.minCoeff() >= -dec.tau);
  CHECK(dec.h.nonnegative == (dec.h.values.minCoeff() >= -1e-12));

  // The reported h is exactly the raw difference clipped at -tau.
  CHECK((dec.h.values - dec.h_raw.cwiseMax(-dec.tau)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(dec.h.domain == Subdomain::full(c).members());
}

TEST_CASE("local decomposition on a proper subdomain") {
  DirichletSpace c = build_cycle(6);
  HeatEngine engine(c);
  SpaceTimeFunction u = kernel_solution(engine, AtomicMeasure::dirac(6, 2),
                                        with_eps(log_grid(1e-4, 2.0, 40), kEps));
  Subdomain U(c, {1, 2, 3});
  WidderDecomposition dec = widder_local_decompose(engine, u, U, kEps);
  // The trace lives on U only.
  for (int x : dec.nu.support()) CHECK(U.contains(x));
  CHECK(std::abs(dec.nu.mass[2] - 1.0) <= 1e-6);
  CHECK(dec.nu.total() == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(dec.h.domain == U.members());
}

TEST_CASE("input gates fire in a fixed order") {
  DirichletSpace c = build_cycle(6);
  HeatEngine engine(c);
  Subdomain full = Subdomain::full(c);
  SpaceTimeFunction u =
      kernel_solution(engine, AtomicMeasure::dirac(6, 0),
                      with_eps(log_grid(1e-4, 2.0, 40), kEps));

  expect_error(Errc::invalid_input,
               [&] { widder_local_decompose(engine, u, full, {}); });

  SpaceTimeFunction two;
  two.times = {0.5, 1.0};
  two.values = Matrix::Ones(2, 6);
  expect_error(Errc::insufficient_data,
               [&] { widder_local_decompose(engine, two, full, {0.5}); });

  SpaceTimeFunction from_zero;
  from_zero.times = {0.0, 0.5, 1.0};
  from_zero.values = Matrix::Ones(3, 6);
  expect_error(Errc::invalid_time,
               [&] { widder_local_decompose(engine, from_zero, full, {0.5}); });

  SpaceTimeFunction dipped = u;
  dipped.nonnegative = false;
  dipped.values(3, 3) = -1.0;
  expect_error(Errc::invalid_input,
               [&] { widder_local_decompose(engine, dipped, full, kEps); });

  // eps values must be grid times.
  expect_error(Errc::invalid_input,
               [&] { widder_local_decompose(engine, u, full, {3.3e-4}); });
  expect_error(Errc::invalid_input,
               [&] { widder_local_decompose(engine, u, full, {-1e-4}); });

  // Data that does not solve the equation is not decomposable.
  SpaceTimeFunction noise = u;
  noise.nonnegative = false;
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < noise.values.rows(); ++i)
    for (int x = 0; x < 6; ++x) noise.values(i, x) = unif(rng);
  expect_error(Errc::not_applicable,
               [&] { widder_local_decompose(engine, noise, full, kEps); });

  // U must sit inside the interior of the claimed domain.
  SpaceTimeFunction partial = u;
  partial.domain = {0, 1, 2};  // interior on the cycle: {1}
  expect_error(Errc::not_applicable, [&] {
    widder_local_decompose(engine, partial, Subdomain(c, {1, 2}), kEps);
  });
}

TEST_CASE("a killed evolution masquerading as conservative fails loudly") {
  // Ground state of the Dirichlet restriction of cycle(8) to {0..4}, extended
  // by zero: an exact solution on the claimed interior {1,2,3}, but its trace
  // measure evolves under the full (conservative) semigroup, which keeps the
  // mass that the restricted evolution kills; u - P_t nu_eps then goes
  // negative on U at late times.
  DirichletSpace c = build_cycle(8);
  HeatEngine engine(c);
  Restriction r = restrict_space(c, std::vector<int>{0, 1, 2, 3, 4});
  HeatEngine local(r.space);
  const double lambda0 = local.eigenvalues()[0];
  CHECK(lambda0 == doctest::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-12));
  Vector phi = local.basis().col(0);
  if (phi.sum() < 0) phi = -phi;

  std::vector<double> eps{4e-3, 2e-3, 1e-3};
  std::vector<double> times = with_eps(log_grid(1e-3, 30.0, 45), eps);
  SpaceTimeFunction u;
  u.times = times;
  u.values = Matrix::Zero(static_cast<Eigen::Index>(times.size()), 8);
  for (std::size_t i = 0; i < times.size(); ++i)
    for (int k = 0; k < 5; ++k)
      u.values(static_cast<Eigen::Index>(i), r.vertices[k]) =
          std::exp(-lambda0 * times[i]) * phi[k];
  u.domain = {0, 1, 2, 3, 4};
  u.nonnegative = true;
  CHECK(solution_residual(c, u).passes);

  expect_error(Errc::decomposition_failed, [&] {
    widder_local_decompose(engine, u, Subdomain(c, {1, 2, 3}), eps);
  });
}

TEST_CASE("global decomposition along an exhaustion") {
  DirichletSpace c = build_cycle(6);
  HeatEngine engine(c);
  Vector mass = Vector::Zero(6);
  mass[0] = 1.0;
  mass[3] = 0.5;
  SpaceTimeFunction u = kernel_solution(engine, AtomicMeasure(mass),
                                        with_eps(log_grid(1e-4, 2.0, 40), kEps));
  Exhaustion ex = exhaustion_of(c, {{5, 0, 1}, {4, 5, 0, 1, 2}, {0, 1, 2, 3, 4, 5}});

  WidderDecomposition dec = widder_global_decompose(engine, u, ex, kEps);
  CHECK((dec.nu.mass - mass).cwiseAbs().sum() <= 1e-6);
  CHECK(dec.stage_consistency_gap <= 1e-10);
  CHECK(dec.richardson_applied);
  CHECK(dec.reconstruction_residual <= 1e-10);
  CHECK(dec.h.values.cwiseAbs().maxCoeff() <= 1e-6);

  SpaceTimeFunction partial = u;
  partial.domain = {0, 1, 2, 3};
  expect_error(Errc::not_applicable,
               [&] { widder_global_decompose(engine, partial, ex, kEps); });

  expect_error(Errc::invalid_exhaustion, [&] {
    Exhaustion truncated({Subdomain(c, {0, 1})});
    widder_global_decompose(engine, u, truncated, kEps);
  });
}

TEST_CASE("uniqueness verification and the counterfeit probe") {
  DirichletSpace c = build_cycle(6);
  HeatEngine engine(c);
  const std::vector<double> eps1{4e-4, 2e-4, 1e-4};
  const std::vector<double> eps2{6e-4, 3e-4, 1.5e-4};
  std::vector<double> times = with_eps(log_grid(1e-4, 2.0, 40), eps1);
  times = with_eps(times, eps2);
  SpaceTimeFunction u = kernel_solution(engine, AtomicMeasure::dirac(6, 0), times);
  Subdomain full = Subdomain::full(c);

  WidderDecomposition dec1 = widder_local_decompose(engine, u, full, eps1);
  WidderDecomposition dec2 = widder_local_decompose(engine, u, full, eps2);

  std::vector<Vector> tests{Vector::Ones(6), Vector::Unit(6, 0), Vector::Unit(6, 3)};
  UniquenessReport rep = verify_uniqueness(engine, u, dec1, dec2, tests);
  CHECK(rep.nu_agree);
  CHECK(rep.nu_gap_l1 <= 1e-3);
  CHECK(rep.reconstructs1);
  CHECK(rep.reconstructs2);
  CHECK(rep.h_nonneg1);
  CHECK(rep.h_nonneg2);
  CHECK_FALSE(rep.flagged1);
  CHECK_FALSE(rep.flagged2);
  CHECK(rep.weak_limit.size() == tests.size());
  CHECK(rep.weak_gap1 <= 1e-2);
  CHECK(rep.weak_gap2 <= 1e-2);

  // Counterfeit: shift mass onto vertex 3 and re-derive a perfectly
  // reconstructing h; the negativity/weak-limit channels must flag it.
  WidderDecomposition fake = dec2;
  fake.nu.mass[3] += 0.1;
  for (int i = 0; i < u.time_count(); ++i)
    fake.h.values.row(i) =
        u.values.row(i) -
        engine.apply_measure(u.times[i], fake.nu).transpose();
  UniquenessReport probe = verify_uniqueness(engine, u, dec1, fake, tests);
  CHECK(probe.flagged2);
  CHECK_FALSE(probe.flagged1);
  CHECK_FALSE(probe.nu_agree);
}
