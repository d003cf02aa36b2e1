#include "heatlab/widder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int grid_index(const std::vector<double>& times, double t) {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return static_cast<int>(i);
  return -1;
}

Vector trace_measure(const DirichletSpace& space, const SpaceTimeFunction& u,
                     const Subdomain& U, int eps_index) {
  Vector nu = Vector::Zero(space.size());
  for (int x : U.members()) nu[x] = std::max(0.0, u.values(eps_index, x)) * space.mu(x);
  return nu;
}

}  // namespace

WidderDecomposition widder_local_decompose(const HeatEngine& engine, const SpaceTimeFunction& u,
                                           const Subdomain& U,
                                           const std::vector<double>& eps_grid) {
  const DirichletSpace& space = engine.space();
  u.validate(space);
  if (eps_grid.empty()) fail(Errc::invalid_input, "eps grid must be nonempty");
  if (u.time_count() < 3) fail(Errc::insufficient_data, "decomposition needs a time grid");
  if (u.times.front() <= 0.0) fail(Errc::invalid_time, "solution grid must start at t > 0");
  if (u.values.size() && u.values.minCoeff() < -1e-12)
    fail(Errc::invalid_input, "decomposition requires a nonnegative solution");

  std::vector<double> eps = eps_grid;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  std::vector<int> eps_idx;
  for (double e : eps) {
    if (!(e > 0.0)) fail(Errc::invalid_input, "eps values must be positive");
    int i = grid_index(u.times, e);
    if (i < 0) fail(Errc::invalid_input, "eps values must be grid times of u");
    eps_idx.push_back(i);
  }

  // Theorem hypotheses: u solves on a neighborhood of U.
  ResidualReport resid = solution_residual(space, u);
  if (!resid.passes)
    fail(Errc::not_applicable, "u does not pass the residual check on its claimed domain");
  Subdomain claimed = u.claimed(space);
  for (int x : U.members()) {
    const auto& inner = claimed.interior();
    if (!std::binary_search(inner.begin(), inner.end(), x))
      fail(Errc::not_applicable, "claimed domain interior does not contain U");
  }

  WidderDecomposition dec;
  dec.tau = std::max({resid.tolerance, resid.max_residual, 1e-10 * (1.0 + u.max_abs())});

  // Trace functions h_eps(t) = u(t) - P_{t-eps}[1_U u(eps) mu]; their
  // nonnegativity on U is the minimality step inside the theorem's proof.
  const int m = u.time_count();
  std::vector<Matrix> h_eps(eps.size());
  dec.h_nonnegativity_slack = kInf;
  for (std::size_t j = 0; j < eps.size(); ++j) {
    Vector nu_eps = trace_measure(space, u, U, eps_idx[j]);
    h_eps[j] = Matrix::Constant(m, space.size(), std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < m; ++i) {
      const double dt = u.times[i] - eps[j];
      if (dt <= 0.0) continue;
      h_eps[j].row(i) = u.values.row(i) - engine.apply_measure(dt, nu_eps).transpose();
      for (int x : U.members())
        dec.h_nonnegativity_slack = std::min(dec.h_nonnegativity_slack, h_eps[j](i, x));
    }
  }
  if (dec.h_nonnegativity_slack < -10.0 * dec.tau)
    fail(Errc::decomposition_failed,
         "trace function dips below -10 tau: not a nonnegative solution at claimed tolerance");

  dec.monotone_slack = -kInf;
  for (std::size_t j = 0; j + 1 < eps.size(); ++j) {
    // eps is descending: h at eps[j+1] (smaller) should sit below h at eps[j].
    for (int i = 0; i < m; ++i) {
      if (u.times[i] - eps[j] <= 0.0) continue;
      for (int x : U.members())
        dec.monotone_slack = std::max(dec.monotone_slack, h_eps[j + 1](i, x) - h_eps[j](i, x));
    }
  }
  if (!std::isfinite(dec.monotone_slack)) dec.monotone_slack = 0.0;

  // nu from the smallest eps, Richardson-accelerated through zero when the
  // eps-trace decays at a consistent rate.
  std::vector<Vector> nus(eps.size());
  for (std::size_t j = 0; j < eps.size(); ++j) nus[j] = trace_measure(space, u, U, eps_idx[j]);
  Vector nu = nus.back();
  if (eps.size() >= 3) {
    const std::size_t k = eps.size();
    const Vector &a = nus[k - 1], &b = nus[k - 2], &c = nus[k - 3];
    const double e1 = eps[k - 1], e2 = eps[k - 2], e3 = eps[k - 3];
    const double d1 = (a - b).lpNorm<1>();
    const double d2 = (b - c).lpNorm<1>();
    if (d2 > 0.0 && d1 > 0.0) {
      const double order = std::log(d2 / d1) / std::log(e3 / e2);
      if (order > 0.2 && order < 4.0) {
        const double l1 = e2 * e3 / ((e2 - e1) * (e3 - e1));
        const double l2 = e1 * e3 / ((e1 - e2) * (e3 - e2));
        const double l3 = e1 * e2 / ((e1 - e3) * (e2 - e3));
        nu = (l1 * a + l2 * b + l3 * c).cwiseMax(0.0);
        dec.richardson_applied = true;
        dec.richardson_order = order;
      }
    }
  }
  dec.nu = AtomicMeasure(nu);

  for (std::size_t j = 0; j < eps.size(); ++j)
    dec.eps_trace.emplace_back(eps[j], (nus[j] - nu).lpNorm<1>());

  // h = u - P_t nu, clipped below at -tau; the raw values are kept.
  dec.h_raw.resize(m, space.size());
  Matrix pt_nu(m, space.size());
  for (int i = 0; i < m; ++i) {
    pt_nu.row(i) = engine.apply_measure(u.times[i], dec.nu).transpose();
    dec.h_raw.row(i) = u.values.row(i) - pt_nu.row(i);
  }
  for (int x : U.members())
    dec.h_nonnegativity_slack =
        std::min(dec.h_nonnegativity_slack, dec.h_raw.col(x).minCoeff());

  dec.h.times = u.times;
  dec.h.values = dec.h_raw.cwiseMax(-dec.tau);
  dec.h.domain = U.members();
  dec.h.nonnegative = dec.h.values.minCoeff() >= -1e-12;
  dec.reconstruction_residual =
      (u.values - pt_nu - dec.h.values).cwiseAbs().maxCoeff();
  return dec;
}

WidderDecomposition widder_global_decompose(const HeatEngine& engine, const SpaceTimeFunction& u,
                                            const Exhaustion& exhaustion,
                                            const std::vector<double>& eps_grid) {
  const DirichletSpace& space = engine.space();
  u.validate(space);
  if (!u.claims_full())
    fail(Errc::not_applicable, "global decomposition needs a solution claimed on all of X");
  if (!exhaustion.stages().back().is_full())
    fail(Errc::invalid_exhaustion, "exhaustion must end at the full space");

  std::vector<WidderDecomposition> stages;
  stages.reserve(exhaustion.size());
  for (int s = 0; s < exhaustion.size(); ++s)
    stages.push_back(widder_local_decompose(engine, u, exhaustion.stage(s), eps_grid));

  WidderDecomposition dec = stages.back();
  const double total = std::max(1e-30, dec.nu.total());
  for (int s = 0; s + 1 < exhaustion.size(); ++s) {
    double gap = 0.0;
    for (int x : exhaustion.stage(s).members())
      gap += std::abs(stages[s + 1].nu.mass[x] - stages[s].nu.mass[x]);
    dec.stage_consistency_gap = std::max(dec.stage_consistency_gap, gap);
  }
  if (dec.stage_consistency_gap > 1e-8 * total)
    fail(Errc::decomposition_failed, "exhaustion stages disagree on shared vertices");

  // h_n = u - P_t nu_n must decrease in n (the nu_n increase).
  for (int s = 0; s + 1 < static_cast<int>(stages.size()); ++s) {
    double slack = (stages[s + 1].h_raw - stages[s].h_raw).maxCoeff();
    dec.monotone_slack = std::max(dec.monotone_slack, slack);
  }
  return dec;
}

UniquenessReport verify_uniqueness(const HeatEngine& engine, const SpaceTimeFunction& u,
                                   const WidderDecomposition& dec1,
                                   const WidderDecomposition& dec2,
                                   const std::vector<Vector>& test_functions) {
  const DirichletSpace& space = engine.space();
  u.validate(space);
  UniquenessReport report;
  const double scale = std::max(1.0, u.max_abs());

  report.nu_gap_l1 = (dec1.nu.mass - dec2.nu.mass).lpNorm<1>();
  report.combined_tolerance =
      1e-3 * std::max({1.0, dec1.nu.total(), dec2.nu.total()});
  report.nu_agree = report.nu_gap_l1 <= report.combined_tolerance;

  auto reconstruction = [&](const WidderDecomposition& dec) {
    double err = 0.0;
    for (int i = 0; i < u.time_count(); ++i) {
      Vector pt = engine.apply_measure(u.times[i], dec.nu);
      err = std::max(err,
                     (u.values.row(i).transpose() - pt - dec.h.values.row(i).transpose())
                         .cwiseAbs()
                         .maxCoeff());
    }
    return err;
  };
  report.recon_error1 = reconstruction(dec1);
  report.recon_error2 = reconstruction(dec2);
  report.reconstructs1 = report.recon_error1 <= std::max(1e-6 * scale, 10.0 * dec1.tau);
  report.reconstructs2 = report.recon_error2 <= std::max(1e-6 * scale, 10.0 * dec2.tau);

  // h must stay nonnegative down to the smallest sampled times.
  report.h_min1 = dec1.h.values.minCoeff();
  report.h_min2 = dec2.h.values.minCoeff();
  const double h_tol = 1e-6 * scale;
  report.h_nonneg1 = report.h_min1 >= -h_tol;
  report.h_nonneg2 = report.h_min2 >= -h_tol;

  // Weak-limit test: <u(t), f>_mu extrapolated to t = 0 from the two
  // earliest samples must match the pairing with each candidate measure.
  const double t1 = u.times[0], t2 = u.times[1];
  const double mass_scale =
      std::max({dec1.nu.total(), dec2.nu.total(),
                (u.values.row(0).transpose().cwiseProduct(space.mu())).lpNorm<1>(), 1e-12});
  for (const Vector& f : test_functions) {
    WeakLimitSample sample;
    const double p1 = (u.values.row(0).transpose().array() * f.array() * space.mu().array()).sum();
    const double p2 = (u.values.row(1).transpose().array() * f.array() * space.mu().array()).sum();
    sample.extrapolated = p1 + (p1 - p2) * t1 / (t2 - t1);
    sample.pairing1 = f.dot(dec1.nu.mass);
    sample.pairing2 = f.dot(dec2.nu.mass);
    sample.gap1 = std::abs(sample.extrapolated - sample.pairing1);
    sample.gap2 = std::abs(sample.extrapolated - sample.pairing2);
    const double f_scale = std::max(1e-12, f.cwiseAbs().maxCoeff() * mass_scale);
    report.weak_gap1 = std::max(report.weak_gap1, sample.gap1 / f_scale);
    report.weak_gap2 = std::max(report.weak_gap2, sample.gap2 / f_scale);
    report.weak_limit.push_back(sample);
  }

  report.flagged1 = !report.reconstructs1 || !report.h_nonneg1 || report.weak_gap1 > 0.01;
  report.flagged2 = !report.reconstructs2 || !report.h_nonneg2 || report.weak_gap2 > 0.01;
  return report;
}

}  // namespace heatlab
