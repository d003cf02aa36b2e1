#include "heatlab/solutions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

std::vector<int> SpaceTimeFunction::claimed_members() const {
  if (!domain.empty()) return domain;
  std::vector<int> all(vertex_count());
  for (int i = 0; i < vertex_count(); ++i) all[i] = i;
  return all;
}

Subdomain SpaceTimeFunction::claimed(const DirichletSpace& space) const {
  return Subdomain(space, claimed_members());
}

void SpaceTimeFunction::validate(const DirichletSpace& space) const {
  if (values.cols() != space.size())
    fail(Errc::invalid_input, "solution vertex count mismatch");
  if (values.rows() != static_cast<Eigen::Index>(times.size()))
    fail(Errc::invalid_input, "solution time count mismatch");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      fail(Errc::invalid_input, "solution times must be strictly increasing");
  if (!values.allFinite()) fail(Errc::invalid_input, "solution values must be finite");
  if (nonnegative && values.size() && values.minCoeff() < -1e-12)
    fail(Errc::invalid_input, "solution flagged nonnegative has negative values");
  if (!domain.empty()) Subdomain probe(space, domain);  // bounds/dedup check
}

SpaceTimeFunction sample_semigroup(const HeatEngine& engine, const std::vector<double>& times,
                                   const Vector& f) {
  SpaceTimeFunction u;
  u.times = times;
  u.values.resize(times.size(), engine.space().size());
  for (std::size_t i = 0; i < times.size(); ++i)
    u.values.row(i) = engine.apply(times[i], f).transpose();
  u.nonnegative = f.minCoeff() >= 0.0;
  return u;
}

SpaceTimeFunction sample_semigroup_measure(const HeatEngine& engine,
                                           const std::vector<double>& times,
                                           const AtomicMeasure& nu) {
  SpaceTimeFunction u;
  u.times = times;
  u.values.resize(times.size(), engine.space().size());
  for (std::size_t i = 0; i < times.size(); ++i)
    u.values.row(i) = engine.apply_measure(times[i], nu).transpose();
  u.nonnegative = true;
  return u;
}

ResidualReport solution_residual(const DirichletSpace& space, const SpaceTimeFunction& u) {
  u.validate(space);
  const int m = u.time_count();
  if (m < 3) fail(Errc::insufficient_data, "residual needs at least three time samples");
  const std::vector<int> members = u.claimed_members();
  const auto& ts = u.times;

  // Third divided differences per window of four consecutive samples; the
  // local truncation error of the central difference at t_i is about
  // dt+ dt- u'''/6 and dd3 estimates u'''/6 directly.
  Matrix dd3;
  if (m >= 4) {
    Matrix d1(m - 1, space.size()), d2(m - 2, space.size());
    for (int i = 0; i + 1 < m; ++i)
      d1.row(i) = (u.values.row(i + 1) - u.values.row(i)) / (ts[i + 1] - ts[i]);
    for (int i = 0; i + 2 < m; ++i)
      d2.row(i) = (d1.row(i + 1) - d1.row(i)) / (ts[i + 2] - ts[i]);
    dd3.resize(m - 3, space.size());
    for (int i = 0; i + 3 < m; ++i)
      dd3.row(i) = (d2.row(i + 1) - d2.row(i)) / (ts[i + 3] - ts[i]);
  }

  ResidualReport report;
  const double scale = 1.0 + u.max_abs();
  // Sample values carry absolute rounding noise of order 2e-14 * scale
  // (eigen-sum cancellation at n up to ~1e4 vertices); the difference
  // quotient and the generator row amplify it by the stencil weights and
  // by ||L||_inf respectively, so the floor scales with both.
  double generator_rate = 0.0;
  for (int x = 0; x < space.size(); ++x) {
    double row = space.killing(x);
    for (auto [y, w] : space.neighbors(x)) row += w;
    generator_rate = std::max(generator_rate, 2.0 * row / space.mu(x));
  }
  double worst_ratio = 0.0;
  for (int i = 1; i + 1 < m; ++i) {
    const double dm = ts[i] - ts[i - 1];
    const double dp = ts[i + 1] - ts[i];
    const double wm = -dp / (dm * (dm + dp));
    const double w0 = (dp - dm) / (dm * dp);
    const double wp = dm / (dp * (dm + dp));
    const double stencil = std::abs(wm) + std::abs(w0) + std::abs(wp);
    Vector dudt =
        wm * u.values.row(i - 1).transpose() + w0 * u.values.row(i).transpose() +
        wp * u.values.row(i + 1).transpose();
    Vector lu = space.apply_generator(u.values.row(i).transpose());

    double local_c3 = 0.0;
    if (m >= 4) {
      for (int j = std::max(0, i - 3); j <= std::min(m - 4, i); ++j)
        for (int x : members) local_c3 = std::max(local_c3, std::abs(dd3(j, x)));
    }
    const double tau_i = 2.0 * local_c3 * dm * dp +
                         scale * (1e-12 + 2e-14 * (stencil + generator_rate));

    double local_max = 0.0;
    int local_arg = -1;
    for (int x : members) {
      double r = std::abs(dudt[x] + lu[x]);
      if (r > local_max) {
        local_max = r;
        local_arg = x;
      }
    }
    if (local_max > report.max_residual) {
      report.max_residual = local_max;
      report.argmax_time = i;
      report.argmax_vertex = local_arg;
    }
    report.tolerance = std::max(report.tolerance, tau_i);
    report.c3 = std::max(report.c3, local_c3);
    worst_ratio = std::max(worst_ratio, local_max / tau_i);
  }
  report.passes = worst_ratio <= 1.0;
  return report;
}

double harnack_ratio(const SpaceTimeFunction& u, const HarnackWindow& window) {
  if (!(window.a < window.b && window.b < window.c && window.c < window.d))
    fail(Errc::invalid_window, "window times must satisfy a < b < c < d");
  if (u.time_count() == 0 || window.a < u.times.front() - 1e-15 ||
      window.d > u.times.back() + 1e-15)
    fail(Errc::invalid_window, "window outside the solution grid");
  if (window.K.empty()) fail(Errc::invalid_window, "window needs a nonempty vertex set");
  std::vector<int> members = u.claimed_members();
  for (int x : window.K) {
    if (x < 0 || x >= u.vertex_count()) fail(Errc::invalid_window, "window vertex out of range");
    if (!std::binary_search(members.begin(), members.end(), x))
      fail(Errc::invalid_window, "window set must lie in the claimed domain");
  }
  if (u.values.minCoeff() < -1e-12)
    fail(Errc::invalid_input, "harnack ratio requires a nonnegative solution");

  double num = -kInf, den = kInf;
  bool saw_early = false, saw_late = false;
  for (int i = 0; i < u.time_count(); ++i) {
    const double t = u.times[i];
    if (t >= window.a - 1e-15 && t <= window.b + 1e-15) {
      saw_early = true;
      for (int x : window.K) num = std::max(num, u.values(i, x));
    }
    if (t >= window.c - 1e-15 && t <= window.d + 1e-15) {
      saw_late = true;
      for (int x : window.K) den = std::min(den, u.values(i, x));
    }
  }
  if (!saw_early || !saw_late)
    fail(Errc::invalid_window, "window contains no grid samples");
  if (den <= 0.0) return kInf;
  return std::max(num, 0.0) / den;
}

double harnack_family_constant(const HeatEngine& engine, const HarnackWindow& window,
                               int time_samples) {
  if (time_samples < 4) fail(Errc::invalid_input, "need at least four time samples");
  std::vector<double> times(time_samples);
  for (int i = 0; i < time_samples; ++i)
    times[i] = window.a + (window.d - window.a) * i / (time_samples - 1);
  double worst = 0.0;
  for (int y = 0; y < engine.space().size(); ++y) {
    SpaceTimeFunction u = sample_semigroup_measure(
        engine, times, AtomicMeasure::dirac(engine.space().size(), y));
    worst = std::max(worst, harnack_ratio(u, window));
  }
  return worst;
}

CaccioppoliReport caccioppoli_check(const DirichletSpace& space, const Subdomain& U,
                                    const Subdomain& V, const CutoffFunction& psi,
                                    const SpaceTimeFunction& u) {
  u.validate(space);
  if (psi.values.size() != space.size()) fail(Errc::invalid_cutoff, "cutoff length mismatch");
  // closure(V) = V plus its neighbors; psi must be identically 1 there and
  // vanish outside U.
  std::vector<char> closure(space.size(), 0);
  for (int x : V.members()) {
    closure[x] = 1;
    for (auto [y, w] : space.neighbors(x)) closure[y] = 1;
  }
  for (int x = 0; x < space.size(); ++x) {
    if (closure[x] && psi.values[x] != 1.0)
      fail(Errc::invalid_cutoff, "cutoff must equal 1 on the closure of V");
    if (!U.contains(x) && psi.values[x] != 0.0)
      fail(Errc::invalid_cutoff, "cutoff support escapes U");
  }

  CaccioppoliReport report;
  const int m = u.time_count();
  std::vector<double> e1(m);
  for (int i = 0; i < m; ++i) {
    Vector g = psi.values.cwiseProduct(u.at(i));
    e1[i] = space.energy(g) + (g.array().square() * space.mu().array()).sum();
  }
  for (int i = 0; i + 1 < m; ++i)
    report.lhs += 0.5 * (e1[i] + e1[i + 1]) * (u.times[i + 1] - u.times[i]);

  double M = 0.0;
  std::vector<char> hood(space.size(), 0);
  for (int x : U.members()) {
    hood[x] = 1;
    for (auto [y, w] : space.neighbors(x)) hood[y] = 1;
  }
  for (int i = 0; i < m; ++i)
    for (int x = 0; x < space.size(); ++x)
      if (hood[x]) M = std::max(M, u.values(i, x));
  report.sup_u = M;

  const double T = u.times.back();
  const double e_psi = space.energy(psi.values);
  const double kill_psi = (space.killing().array() * psi.values.array().square()).sum();
  report.rhs_bound =
      M * M * (T * U.measure() + 10.0 * T * e_psi + 20.0 * U.measure() + T * kill_psi);
  report.passes = report.lhs <= report.rhs_bound * (1.0 + 1e-12) + 1e-12;
  return report;
}

SpaceTimeFunction extend_by_zero(const DirichletSpace& space, const SpaceTimeFunction& u,
                                 double check_tol) {
  u.validate(space);
  if (u.time_count() == 0) fail(Errc::insufficient_data, "empty solution");
  if (u.times.front() <= 0.0)
    fail(Errc::invalid_input, "solution already reaches nonpositive times");

  double norm2 = 0.0;
  for (int x : u.claimed_members()) norm2 += u.values(0, x) * u.values(0, x) * space.mu(x);
  const double norm = std::sqrt(norm2);
  if (norm > check_tol)
    fail(Errc::extension_refused,
         "earliest sample has L2 norm " + fmt(norm) + " > " + fmt(check_tol));

  const int mirror = std::min(3, u.time_count());
  SpaceTimeFunction out;
  out.domain = u.domain;
  out.nonnegative = u.nonnegative;
  out.times.reserve(u.times.size() + mirror);
  for (int i = mirror - 1; i >= 0; --i) out.times.push_back(-u.times[i]);
  out.times.insert(out.times.end(), u.times.begin(), u.times.end());
  out.values = Matrix::Zero(out.times.size(), u.vertex_count());
  out.values.bottomRows(u.values.rows()) = u.values;
  return out;
}

MaxPrincipleReport maximum_principle_check(const DirichletSpace& space, const Subdomain& U,
                                           const SpaceTimeFunction& u) {
  u.validate(space);
  MaxPrincipleReport report;
  const int m = u.time_count();
  if (m < 3) {
    report.reason = "fewer than three time samples";
    return report;
  }

  for (int x : U.members()) {
    if (u.values(0, x) > 1e-12) {
      report.reason = "initial sample is positive on U";
      return report;
    }
  }
  for (int i = 0; i < m; ++i)
    for (int x = 0; x < space.size(); ++x)
      if (!U.contains(x) && u.values(i, x) > 1e-12) {
        report.reason = "positive part escapes U";
        return report;
      }

  // Residual against the killed (Dirichlet-restricted) generator on U.
  Restriction r = restrict_space(space, U);
  SpaceTimeFunction ur;
  ur.times = u.times;
  ur.values.resize(m, r.space.size());
  for (int i = 0; i < m; ++i)
    for (std::size_t j = 0; j < r.vertices.size(); ++j)
      ur.values(i, j) = u.values(i, r.vertices[j]);
  report.residual = solution_residual(r.space, ur);
  if (!report.residual.passes) {
    report.reason = "does not solve the killed equation on U at grid tolerance";
    return report;
  }

  const double rho = std::max(report.residual.max_residual, report.residual.tolerance);
  report.tau = 1e-12 + (u.times.back() - u.times.front()) * rho;
  report.max_value = -kInf;
  for (int i = 0; i < m; ++i)
    for (int x : U.members())
      if (u.values(i, x) > report.max_value) {
        report.max_value = u.values(i, x);
        report.argmax_time = i;
        report.argmax_vertex = x;
      }
  report.verdict = report.max_value <= report.tau ? Verdict::pass : Verdict::fail;
  if (report.verdict == Verdict::fail)
    report.reason = "u = " + fmt(report.max_value) + " at (t index " +
                    std::to_string(report.argmax_time) + ", vertex " +
                    std::to_string(report.argmax_vertex) + ") exceeds tau = " + fmt(report.tau);
  return report;
}

MinimalityReport minimality_check(const HeatEngine& engine, const SpaceTimeFunction& u,
                                  const Vector& f) {
  const DirichletSpace& space = engine.space();
  u.validate(space);
  MinimalityReport report;
  if (!u.claims_full()) {
    report.reason = "minimality needs a solution claimed on the full space";
    return report;
  }
  if (u.values.minCoeff() < -1e-12) {
    report.reason = "solution is not nonnegative";
    return report;
  }
  int i0 = -1;
  for (int i = 0; i < u.time_count(); ++i)
    if (std::abs(u.times[i]) <= 1e-12) i0 = i;
  if (i0 < 0) {
    report.reason = "grid does not contain t = 0";
    return report;
  }
  for (int x = 0; x < space.size(); ++x)
    if (f[x] > u.values(i0, x) + 1e-12) {
      report.reason = "f exceeds u(0)";
      return report;
    }
  report.residual = solution_residual(space, u);
  if (!report.residual.passes) {
    report.reason = "u does not pass the residual check on X";
    return report;
  }

  const double rho = std::max(report.residual.max_residual, report.residual.tolerance);
  const double floor = 1e-12 * (1.0 + f.cwiseAbs().maxCoeff());
  report.min_slack = kInf;
  bool ok = true;
  for (int i = 0; i < u.time_count(); ++i) {
    const double t = u.times[i];
    if (t < 0.0) continue;
    Vector pf = engine.apply(t, f);
    double slack = (u.at(i) - pf).minCoeff();
    report.min_slack = std::min(report.min_slack, slack);
    const double tau_t = floor + t * rho;
    report.tau = std::max(report.tau, tau_t);
    if (slack < -tau_t) ok = false;
  }

  // Exhaustion route: killed semigroups of growing balls stay below u and
  // climb to the free semigroup at the full stage.
  Vector fplus = f.cwiseMax(0.0);
  int center = 0;
  fplus.maxCoeff(&center);
  const Matrix hop_metric = graph_metric(space);
  auto hops = [&](int radius) {
    std::vector<int> members;
    for (int x = 0; x < space.size(); ++x)
      if (hop_metric(center, x) <= radius) members.push_back(x);
    return members;
  };
  int diam = static_cast<int>(hop_metric.maxCoeff());
  std::vector<std::vector<int>> stages{hops(std::max(1, diam / 3)),
                                       hops(std::max(2, (2 * diam) / 3))};
  std::vector<int> full(space.size());
  for (int x = 0; x < space.size(); ++x) full[x] = x;
  stages.push_back(full);
  Exhaustion exhaustion = exhaustion_of(space, stages);

  report.exhaustion_monotone = true;
  report.exhaustion_final_gap = 0.0;
  const double t_probe = u.times.back() > 0.0 ? u.times.back() : 0.0;
  Vector prev;
  for (int s = 0; s < exhaustion.size(); ++s) {
    Vector ps = engine.restricted_apply(exhaustion.stage(s), t_probe, fplus);
    if (s > 0 && (ps - prev).minCoeff() < -1e-12) report.exhaustion_monotone = false;
    prev = ps;
  }
  report.exhaustion_final_gap =
      (prev - engine.apply(t_probe, fplus)).cwiseAbs().maxCoeff();

  if (!report.exhaustion_monotone || report.exhaustion_final_gap > 1e-12) ok = false;
  report.verdict = ok ? Verdict::pass : Verdict::fail;
  if (!ok) report.reason = "min slack " + fmt(report.min_slack) + " below -tau";
  return report;
}

L1MassReport l1_mass_bound(const HeatEngine& engine, const SpaceTimeFunction& u,
                           const std::vector<int>& K, double T_prime) {
  const DirichletSpace& space = engine.space();
  u.validate(space);
  if (K.empty()) fail(Errc::invalid_input, "K must be nonempty");
  for (int x : K)
    if (x < 0 || x >= space.size()) fail(Errc::invalid_input, "K vertex out of range");
  if (u.values.minCoeff() < -1e-12)
    fail(Errc::invalid_input, "mass bound requires a nonnegative solution");

  const auto& ts = u.times;
  const double T = ts.back();
  std::vector<int> early;
  for (int i = 0; i < u.time_count(); ++i)
    if (ts[i] <= T_prime + 1e-15) early.push_back(i);
  int second = -1;
  double target = 0.5 * (T_prime + T);
  for (int i = 0; i < u.time_count(); ++i) {
    if (ts[i] <= T_prime + 1e-15 || ts[i] >= T - 1e-15) continue;
    if (second < 0 || std::abs(ts[i] - target) < std::abs(ts[second] - target)) second = i;
  }
  if (early.empty() || second < 0)
    fail(Errc::insufficient_data, "grid too coarse: need samples at t <= T' and T' < t < T");

  L1MassReport report;
  report.t_second = ts[second];
  for (int i : early) {
    double mass = 0.0;
    for (int k : K) mass += u.values(i, k) * space.mu(k);
    report.sup_mass = std::max(report.sup_mass, mass);
  }
  u.at(second).maxCoeff(&report.probe_vertex);

  report.c = kInf;
  for (int i : early) {
    const double s = ts[second] - ts[i];
    for (int k : K) report.c = std::min(report.c, engine.kernel(s, report.probe_vertex, k));
  }
  if (report.c <= 0.0) {
    report.bound = kInf;
    report.passes = true;  // vacuous: positive kernels make this unreachable
    return report;
  }
  report.bound = u.values(second, report.probe_vertex) / report.c;
  report.passes = report.sup_mass <= report.bound * (1.0 + 1e-9) + 1e-12;
  return report;
}

}  // namespace heatlab
