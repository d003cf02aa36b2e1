#include "heatlab/energy.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double edge_length(const DirichletSpace& space, const Edge& e) {
  return std::sqrt(2.0 * std::min(space.mu(e.u), space.mu(e.v)) / e.w);
}

/// Largest edgewise ratio (1/2) w (df)^2 / min(mu); <= 1 means f is feasible.
double lipschitz_ratio(const DirichletSpace& space, const Vector& f) {
  double ratio = 0.0;
  for (const Edge& e : space.edges()) {
    double d = f[e.u] - f[e.v];
    ratio = std::max(ratio, 0.5 * e.w * d * d / std::min(space.mu(e.u), space.mu(e.v)));
  }
  return ratio;
}

Vector dijkstra(const DirichletSpace& space, int source) {
  const int n = space.size();
  Vector dist = Vector::Constant(n, kInf);
  dist[source] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, x] = heap.top();
    heap.pop();
    if (d > dist[x]) continue;
    for (auto [y, w] : space.neighbors(x)) {
      double len = std::sqrt(2.0 * std::min(space.mu(x), space.mu(y)) / w);
      if (d + len < dist[y]) {
        dist[y] = d + len;
        heap.push({dist[y], y});
      }
    }
  }
  return dist;
}

std::vector<int> bfs_hops(const DirichletSpace& space, const std::vector<int>& sources) {
  std::vector<int> dist(space.size(), -1);
  std::deque<int> queue;
  for (int s : sources) {
    if (dist[s] < 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    for (auto [y, w] : space.neighbors(x))
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
  }
  return dist;
}

/// Killing-free stiffness matrix: f^T K g = E0(f, g).
Matrix stiffness0(const DirichletSpace& space) {
  Matrix K = Matrix::Zero(space.size(), space.size());
  for (const Edge& e : space.edges()) {
    K(e.u, e.u) += e.w;
    K(e.v, e.v) += e.w;
    K(e.u, e.v) -= e.w;
    K(e.v, e.u) -= e.w;
  }
  return K;
}

std::vector<int> open_ball(const Matrix& metric, int x, double r) {
  std::vector<int> ball;
  for (int v = 0; v < metric.rows(); ++v)
    if (metric(x, v) < r) ball.push_back(v);
  return ball;
}

/// mu-orthonormal eigenbasis of the induced (killing-free) subgraph on
/// `verts`; columns of the result, in the local vertex order.
Matrix induced_eigenbasis(const DirichletSpace& space, const std::vector<int>& verts) {
  const int m = static_cast<int>(verts.size());
  std::vector<int> local(space.size(), -1);
  for (int i = 0; i < m; ++i) local[verts[i]] = i;
  Matrix K = Matrix::Zero(m, m);
  Matrix M = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) M(i, i) = space.mu(verts[i]);
  for (const Edge& e : space.edges()) {
    int i = local[e.u], j = local[e.v];
    if (i < 0 || j < 0) continue;
    K(i, i) += e.w;
    K(j, j) += e.w;
    K(i, j) -= e.w;
    K(j, i) -= e.w;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(K, M);
  if (solver.info() != Eigen::Success)
    fail(Errc::invalid_geometry, "ball eigenbasis computation failed");
  return solver.eigenvectors();
}

}  // namespace

EnergyMeasure energy_measure(const DirichletSpace& space, const Vector& f) {
  return energy_measure(space, f, f);
}

EnergyMeasure energy_measure(const DirichletSpace& space, const Vector& f, const Vector& g) {
  if (f.size() != space.size() || g.size() != space.size())
    fail(Errc::invalid_input, "function length mismatch");
  Vector density = Vector::Zero(space.size());
  for (const Edge& e : space.edges()) {
    double half = 0.5 * e.w * (f[e.u] - f[e.v]) * (g[e.u] - g[e.v]);
    density[e.u] += half;
    density[e.v] += half;
  }
  return EnergyMeasure{std::move(density)};
}

EnergyIdentityReport check_energy_identities(const DirichletSpace& space, const Vector& f,
                                             const Vector& g, const Vector& h, const Vector& k) {
  const int n = space.size();
  EnergyIdentityReport report;

  Vector fg = f.cwiseProduct(g);
  Vector gamma_fg_h = energy_measure(space, fg, h).density;
  Vector gamma_g_h = energy_measure(space, g, h).density;
  Vector gamma_f_h = energy_measure(space, f, h).density;
  report.leibniz_naive_residual =
      gamma_fg_h - f.cwiseProduct(gamma_g_h) - g.cwiseProduct(gamma_f_h);

  // Symmetrized Leibniz: with fbar, gbar averaged along each edge, the
  // factorization (fg)(x)-(fg)(y) = fbar dg + gbar df is an exact identity.
  Vector sym = Vector::Zero(n);
  for (const Edge& e : space.edges()) {
    double df = f[e.u] - f[e.v], dg = g[e.u] - g[e.v], dh = h[e.u] - h[e.v];
    double fbar = 0.5 * (f[e.u] + f[e.v]), gbar = 0.5 * (g[e.u] + g[e.v]);
    double dfg = fg[e.u] - fg[e.v];
    double half = 0.5 * e.w * dh * (dfg - fbar * dg - gbar * df);
    sym[e.u] += half;
    sym[e.v] += half;
  }
  report.leibniz_symmetrized_residual = sym;
  report.leibniz_symmetrized_max_abs = sym.lpNorm<Eigen::Infinity>();

  Vector gamma_h = energy_measure(space, h).density;
  Vector gamma_k = energy_measure(space, k).density;
  Vector gamma_h_k = energy_measure(space, h, k).density;
  double lhs_cs = 0.0;
  for (int x = 0; x < n; ++x) lhs_cs += std::abs(fg[x]) * std::abs(gamma_h_k[x]);
  double rhs_cs = (f.array().square() * gamma_h.array()).sum() *
                  (g.array().square() * gamma_k.array()).sum();
  report.cauchy_schwarz_slack = rhs_cs - lhs_cs * lhs_cs;

  double am_gm = kInf;
  for (int x = 0; x < n; ++x)
    am_gm = std::min(am_gm, 0.5 * (gamma_h[x] + gamma_k[x]) - std::abs(gamma_h_k[x]));
  report.am_gm_slack = am_gm;

  // Product bound with edgewise-symmetrized weights, accumulated per vertex.
  Vector gamma_f = energy_measure(space, f).density;
  Vector gamma_g = energy_measure(space, g).density;
  Vector lhs_pb = energy_measure(space, fg).density;
  Vector rhs_pb = Vector::Zero(n);
  for (const Edge& e : space.edges()) {
    double df = f[e.u] - f[e.v], dg = g[e.u] - g[e.v];
    double fbar = 0.5 * (f[e.u] + f[e.v]), gbar = 0.5 * (g[e.u] + g[e.v]);
    double half = 0.5 * e.w * 2.0 * (fbar * fbar * dg * dg + gbar * gbar * df * df);
    rhs_pb[e.u] += half;
    rhs_pb[e.v] += half;
  }
  report.product_bound_slack = (rhs_pb - lhs_pb).minCoeff();
  return report;
}

double cutoff_operator_norm(const DirichletSpace& space, const Vector& psi) {
  const int n = space.size();
  Matrix G = stiffness0(space);
  for (int x = 0; x < n; ++x) G(x, x) += space.killing(x) + space.mu(x);
  Matrix A = psi.asDiagonal() * G * psi.asDiagonal();
  A = Matrix(0.5 * (A + A.transpose()));
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(A, G);
  if (solver.info() != Eigen::Success)
    fail(Errc::invalid_cutoff, "cutoff operator-norm computation failed");
  return solver.eigenvalues().maxCoeff();
}

CutoffFunction make_cutoff(const DirichletSpace& space, const Vector& values,
                           const std::vector<int>& K, const std::vector<int>& U) {
  const int n = space.size();
  if (values.size() != n) fail(Errc::invalid_cutoff, "cutoff length mismatch");
  Subdomain inside(space, U);
  if (K.empty()) fail(Errc::invalid_cutoff, "cutoff one-set must be nonempty");
  if (!inside.contains_all(K)) fail(Errc::invalid_cutoff, "one-set must lie inside U");
  for (int x = 0; x < n; ++x)
    if (values[x] < 0.0 || values[x] > 1.0 || !std::isfinite(values[x]))
      fail(Errc::invalid_cutoff, "cutoff values must lie in [0,1]");
  for (int x : K)
    if (values[x] != 1.0) fail(Errc::invalid_cutoff, "cutoff must equal 1 on the one-set");
  std::vector<int> support;
  for (int x = 0; x < n; ++x)
    if (values[x] > 0.0) {
      if (!inside.contains(x)) fail(Errc::invalid_cutoff, "cutoff support escapes U");
      support.push_back(x);
    }
  CutoffFunction psi;
  psi.values = values;
  psi.one_set = K;
  std::sort(psi.one_set.begin(), psi.one_set.end());
  psi.support = std::move(support);
  psi.c_psi = cutoff_operator_norm(space, values);
  return psi;
}

CutoffFunction make_ramp_cutoff(const DirichletSpace& space, const std::vector<int>& K,
                                const std::vector<int>& U) {
  const int n = space.size();
  Subdomain inside(space, U);
  std::vector<int> complement;
  for (int x = 0; x < n; ++x)
    if (!inside.contains(x)) complement.push_back(x);

  Vector values(n);
  if (complement.empty()) {
    values.setOnes();
  } else {
    std::vector<int> to_k = bfs_hops(space, K);
    std::vector<int> to_out = bfs_hops(space, complement);
    for (int x = 0; x < n; ++x) {
      if (!inside.contains(x))
        values[x] = 0.0;
      else if (to_k[x] == 0)
        values[x] = 1.0;
      else
        values[x] = static_cast<double>(to_out[x]) / (to_k[x] + to_out[x]);
    }
  }
  return make_cutoff(space, values, K, U);
}

DistanceBracket intrinsic_distance(const DirichletSpace& space, int x, int y, double tol) {
  const int n = space.size();
  if (x < 0 || x >= n || y < 0 || y >= n) fail(Errc::invalid_input, "vertex out of range");
  if (x == y) return DistanceBracket{0.0, 0.0};

  Vector dist = dijkstra(space, x);
  const double upper = dist[y];

  // The distance function itself is feasible for the edgewise constraint
  // (triangle inequality), so the seed already certifies lower = upper up to
  // rounding; the ascent loop can only improve the certificate.
  auto certify = [&](Vector f) {
    double ratio = lipschitz_ratio(space, f);
    if (ratio > 1.0) f /= std::sqrt(ratio);
    return f[y] - f[x];
  };
  double lower = certify(dist);
  Vector f = dist;
  double step = 0.5 * std::max(tol, upper * 1e-3);
  for (int iter = 0; iter < 40 && upper - lower > 0.25 * tol; ++iter) {
    Vector trial = f;
    trial[y] += step;
    trial[x] -= step;
    double val = certify(trial);
    if (val > lower) {
      lower = val;
      f = trial;
    } else {
      step *= 0.5;
    }
  }
  lower = std::min(lower, upper);
  return DistanceBracket{lower, upper};
}

Matrix intrinsic_metric(const DirichletSpace& space) {
  const int n = space.size();
  Matrix d(n, n);
  for (int x = 0; x < n; ++x) d.row(x) = dijkstra(space, x).transpose();
  d = 0.5 * (d + d.transpose());
  return d;
}

Matrix graph_metric(const DirichletSpace& space) {
  const int n = space.size();
  Matrix d(n, n);
  for (int x = 0; x < n; ++x) {
    auto hops = bfs_hops(space, {x});
    for (int v = 0; v < n; ++v) d(x, v) = hops[v];
  }
  return d;
}

DoublingPoincareReport check_doubling_poincare(const DirichletSpace& space, const Matrix& metric,
                                               const std::vector<double>& radii) {
  const int n = space.size();
  if (metric.rows() != n || metric.cols() != n)
    fail(Errc::invalid_input, "metric size mismatch");
  if (metric.minCoeff() < 0.0 || (metric - metric.transpose()).lpNorm<Eigen::Infinity>() > 1e-12)
    fail(Errc::invalid_input, "metric must be symmetric and nonnegative");

  DoublingPoincareReport report;
  for (int x = 0; x < n; ++x) {
    for (double r : radii) {
      DoublingPoincareSample sample;
      sample.x = x;
      sample.r = r;
      std::vector<int> ball = open_ball(metric, x, r);
      if (ball.empty()) {
        sample.skipped = true;
        ++report.skipped_count;
        report.samples.push_back(sample);
        continue;
      }
      std::vector<int> ball2 = open_ball(metric, x, 2.0 * r);
      sample.vol_r = static_cast<int>(ball.size());
      sample.vol_2r = static_cast<int>(ball2.size());
      for (int v : ball) sample.mu_r += space.mu(v);
      for (int v : ball2) sample.mu_2r += space.mu(v);
      sample.doubling_ratio = sample.mu_2r / sample.mu_r;

      if (ball2.size() > 1) {
        std::vector<int> local(n, -1);
        for (int i = 0; i < static_cast<int>(ball2.size()); ++i) local[ball2[i]] = i;
        Matrix basis = induced_eigenbasis(space, ball2);
        double scale = 0.0;
        for (int v : ball2) scale += space.mu(v);
        for (int c = 0; c < basis.cols(); ++c) {
          Vector fv = basis.col(c);
          double mean_num = 0.0, mean_den = 0.0;
          for (int v : ball) {
            mean_num += fv[local[v]] * space.mu(v);
            mean_den += space.mu(v);
          }
          double mean = mean_num / mean_den;
          double lhs = 0.0;
          for (int v : ball) {
            double d = fv[local[v]] - mean;
            lhs += d * d * space.mu(v);
          }
          double energy = 0.0;
          for (const Edge& e : space.edges()) {
            int i = local[e.u], j = local[e.v];
            if (i < 0 || j < 0) continue;
            double d = fv[i] - fv[j];
            energy += e.w * d * d;
          }
          double rhs0 = r * r * energy;
          if (rhs0 > 1e-14 * scale)
            sample.poincare = std::max(sample.poincare, lhs / rhs0);
        }
      }
      report.max_doubling_ratio = std::max(report.max_doubling_ratio, sample.doubling_ratio);
      report.max_poincare = std::max(report.max_poincare, sample.poincare);
      report.samples.push_back(sample);
    }
  }
  return report;
}

double check_cutoff_sobolev(const DirichletSpace& space, const CutoffFunction& psi, int x0,
                            double R, double s, double beta, double theta, const Matrix& metric) {
  const int n = space.size();
  if (x0 < 0 || x0 >= n) fail(Errc::invalid_input, "center out of range");
  if (!(s > 0.0) || !(s <= R)) fail(Errc::invalid_input, "need 0 < s <= R");
  if (psi.values.size() != n) fail(Errc::invalid_cutoff, "cutoff length mismatch");

  std::vector<int> ball_s = open_ball(metric, x0, s);
  std::vector<int> ball_2s = open_ball(metric, x0, 2.0 * s);
  if (ball_s.empty() || ball_2s.empty()) fail(Errc::invalid_ball, "empty metric ball");

  Vector gamma_psi = energy_measure(space, psi.values).density;
  Matrix basis = induced_eigenbasis(space, ball_2s);
  std::vector<int> local(n, -1);
  for (int i = 0; i < static_cast<int>(ball_2s.size()); ++i) local[ball_2s[i]] = i;

  const double prefactor = std::pow(s / R, 2.0 * theta);
  double c2 = 0.0;
  for (int c = 0; c < basis.cols(); ++c) {
    // Extend the ball eigenfunction by zero to the whole space.
    Vector f = Vector::Zero(n);
    for (int i = 0; i < static_cast<int>(ball_2s.size()); ++i) f[ball_2s[i]] = basis(i, c);
    Vector gamma_f = energy_measure(space, f).density;
    double lhs = 0.0;
    for (int v : ball_s) lhs += f[v] * f[v] * gamma_psi[v];
    double rhs = 0.0;
    for (int v : ball_2s) rhs += gamma_f[v] + std::pow(s, beta) * f[v] * f[v] * space.mu(v);
    rhs *= prefactor;
    if (rhs > 0.0) c2 = std::max(c2, lhs / rhs);
  }
  return c2;
}

}  // namespace heatlab
