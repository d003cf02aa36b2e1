#include "heatlab/semigroup.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace heatlab {

AtomicMeasure::AtomicMeasure(Vector m) : mass(std::move(m)) {
  for (int x = 0; x < mass.size(); ++x)
    if (mass[x] < 0.0 || !std::isfinite(mass[x]))
      fail(Errc::invalid_input, "measure atoms must be nonnegative and finite");
}

AtomicMeasure AtomicMeasure::dirac(int n, int y, double m) {
  if (y < 0 || y >= n) fail(Errc::invalid_input, "dirac atom out of range");
  Vector v = Vector::Zero(n);
  v[y] = m;
  return AtomicMeasure(std::move(v));
}

std::vector<int> AtomicMeasure::support() const {
  std::vector<int> s;
  for (int x = 0; x < mass.size(); ++x)
    if (mass[x] > 0.0) s.push_back(x);
  return s;
}

namespace {

void check_time(double t, bool strict) {
  if (!std::isfinite(t) || (strict ? !(t > 0.0) : t < 0.0))
    fail(Errc::invalid_time, strict ? "time must be positive" : "time must be nonnegative");
}

}  // namespace

HeatEngine::HeatEngine(const DirichletSpace& space, int dense_threshold)
    : space_(space), dense_threshold_(dense_threshold) {
  const int n = space_.size();
  method_ = n <= dense_threshold_ ? Method::dense_spectral : Method::expm_action;
  if (method_ != Method::dense_spectral) return;

  // Symmetrized generator S = M^{1/2} L M^{-1/2}, assembled entrywise so it
  // is exactly symmetric.
  Vector sqrt_mu = space_.mu().cwiseSqrt();
  Matrix S = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x)
    S(x, x) = space_.killing(x) / space_.mu(x);
  for (const Edge& e : space_.edges()) {
    S(e.u, e.u) += e.w / space_.mu(e.u);
    S(e.v, e.v) += e.w / space_.mu(e.v);
    const double off = -e.w / (sqrt_mu[e.u] * sqrt_mu[e.v]);
    S(e.u, e.v) = off;
    S(e.v, e.u) = off;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(S);
  if (solver.info() != Eigen::Success)
    fail(Errc::invalid_geometry, "eigendecomposition of the generator failed");
  eigenvalues_ = solver.eigenvalues();
  for (int i = 0; i < n; ++i) {
    if (eigenvalues_[i] < -1e-10)
      fail(Errc::invalid_geometry, "generator has a negative eigenvalue beyond tolerance");
    if (eigenvalues_[i] < 0.0) eigenvalues_[i] = 0.0;
  }
  basis_ = sqrt_mu.cwiseInverse().asDiagonal() * solver.eigenvectors();
}

const Vector& HeatEngine::eigenvalues() const {
  if (method_ != Method::dense_spectral)
    fail(Errc::insufficient_data, "spectrum not materialized in expm-action mode");
  return eigenvalues_;
}

const Matrix& HeatEngine::basis() const {
  if (method_ != Method::dense_spectral)
    fail(Errc::insufficient_data, "basis not materialized in expm-action mode");
  return basis_;
}

double HeatEngine::kernel(double t, int x, int y) const {
  check_time(t, /*strict=*/true);
  const int n = space_.size();
  if (x < 0 || x >= n || y < 0 || y >= n) fail(Errc::invalid_input, "kernel vertex out of range");
  if (method_ == Method::dense_spectral) {
    // Scalar sum: symmetric in (x, y) exactly, since each term is.
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += std::exp(-eigenvalues_[i] * t) * basis_(x, i) * basis_(y, i);
    return acc;
  }
  Vector col = expm_action(t, Vector::Unit(n, y));
  return col[x] / space_.mu(y);
}

Matrix HeatEngine::kernel_matrix(double t) const {
  check_time(t, /*strict=*/true);
  const int n = space_.size();
  if (method_ == Method::dense_spectral) {
    Vector half = (-0.5 * t * eigenvalues_.array()).exp();
    Matrix W = basis_ * half.asDiagonal();
    Matrix K(n, n);
    K.noalias() = W * W.transpose();
    K = Matrix(K.selfadjointView<Eigen::Lower>());
    return K;
  }
  Matrix K(n, n);
  for (int y = 0; y < n; ++y)
    K.col(y) = expm_action(t, Vector::Unit(n, y)) / space_.mu(y);
  K = Matrix((0.5 * (K + K.transpose())).selfadjointView<Eigen::Lower>());
  return K;
}

Vector HeatEngine::apply(double t, const Vector& f) const {
  check_time(t, /*strict=*/false);
  if (f.size() != space_.size()) fail(Errc::invalid_input, "function length mismatch");
  if (t == 0.0) return f;
  if (method_ == Method::dense_spectral) {
    Vector coeff = basis_.transpose() * (space_.mu().asDiagonal() * f);
    coeff.array() *= (-t * eigenvalues_.array()).exp();
    return basis_ * coeff;
  }
  return expm_action(t, f);
}

Vector HeatEngine::apply_measure(double t, const AtomicMeasure& nu) const {
  return apply_measure(t, nu.mass);
}

Vector HeatEngine::apply_measure(double t, const Vector& mass) const {
  check_time(t, /*strict=*/true);
  if (mass.size() != space_.size()) fail(Errc::invalid_input, "measure length mismatch");
  if (method_ == Method::dense_spectral) {
    Vector coeff = basis_.transpose() * mass;
    coeff.array() *= (-t * eigenvalues_.array()).exp();
    return basis_ * coeff;
  }
  return expm_action(t, mass.cwiseQuotient(space_.mu()));
}

Vector HeatEngine::expm_action(double t, Vector v) const {
  if (t == 0.0) return v;
  // Substep so that dt * ||L||_inf <= 1, then sum the truncated Taylor series
  // of e^{-dt L} v; e^{-sL} is an L^inf contraction so intermediate growth is
  // bounded by the series of dt ||L||.
  double norm = 0.0;
  for (int x = 0; x < space_.size(); ++x) {
    double row = space_.killing(x);
    for (auto [y, w] : space_.neighbors(x)) row += w;
    norm = std::max(norm, 2.0 * row / space_.mu(x));
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(t * norm)));
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) {
    Vector term = v;
    Vector acc = v;
    for (int k = 1; k <= 60; ++k) {
      term = space_.apply_generator(term) * (-dt / k);
      acc += term;
      if (term.lpNorm<Eigen::Infinity>() <= 1e-17 * std::max(1.0, acc.lpNorm<Eigen::Infinity>()))
        break;
    }
    v = std::move(acc);
  }
  return v;
}

const HeatEngine& HeatEngine::restricted_for(const std::vector<int>& members) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = restricted_cache_.find(members);
  if (it == restricted_cache_.end()) {
    Restriction r = restrict_space(space_, members);
    RestrictedEntry entry;
    entry.vertices = r.vertices;
    entry.engine = std::make_unique<HeatEngine>(r.space, dense_threshold_);
    it = restricted_cache_.emplace(members, std::move(entry)).first;
  }
  return *it->second.engine;
}

const HeatEngine& HeatEngine::restricted_engine(const Subdomain& U) const {
  if (&U.parent() != &space_ && U.parent().content_hash() != space_.content_hash())
    fail(Errc::invalid_input, "subdomain belongs to a different space");
  return restricted_for(U.members());
}

Vector HeatEngine::restricted_apply(const Subdomain& U, double t, const Vector& f) const {
  check_time(t, /*strict=*/false);
  if (f.size() != space_.size()) fail(Errc::invalid_input, "function length mismatch");
  if (U.is_full()) return apply(t, f);
  const HeatEngine& sub = restricted_engine(U);
  const auto& verts = U.members();
  const int m = static_cast<int>(verts.size());
  Vector fr(m);
  for (int i = 0; i < m; ++i) fr[i] = f[verts[i]];
  Vector gr = sub.apply(t, fr);
  Vector out = Vector::Zero(space_.size());
  for (int i = 0; i < m; ++i) out[verts[i]] = gr[i];
  return out;
}

double heat_kernel(const HeatEngine& engine, double t, int x, int y) {
  return engine.kernel(t, x, y);
}

Vector apply_semigroup(const HeatEngine& engine, double t, const Vector& f) {
  return engine.apply(t, f);
}

Vector apply_semigroup_measure(const HeatEngine& engine, double t, const AtomicMeasure& nu) {
  return engine.apply_measure(t, nu);
}

Vector restricted_semigroup(const HeatEngine& engine, const Subdomain& U, double t,
                            const Vector& f) {
  return engine.restricted_apply(U, t, f);
}

}  // namespace heatlab
