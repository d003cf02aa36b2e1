#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "heatlab/space.hpp"
#include "heatlab/types.hpp"

namespace heatlab {

/// Nonnegative atomic measure nu = sum_x mass(x) delta_x.  Note the atom
/// masses are plain numbers, not densities: integrating f against nu is
/// sum_x f(x) mass(x) with no mu factor.
struct AtomicMeasure {
  Vector mass;

  AtomicMeasure() = default;
  explicit AtomicMeasure(Vector m);
  static AtomicMeasure dirac(int n, int y, double m = 1.0);
  static AtomicMeasure zero(int n) { return AtomicMeasure(Vector::Zero(n)); }

  int size() const { return static_cast<int>(mass.size()); }
  double total() const { return mass.sum(); }
  std::vector<int> support() const;
};

/// Heat semigroup P_t = e^{-tL} of a space, with the heat kernel taken with
/// respect to mu:  p(t,x,y) = sum_i e^{-lambda_i t} phi_i(x) phi_i(y) over a
/// mu-orthonormal eigenbasis, so that (P_t f)(x) = sum_y p(t,x,y) f(y) mu(y).
///
/// Small spaces use a dense eigendecomposition of the symmetrized generator
/// S = M^{1/2} L M^{-1/2}; above `dense_threshold` vertices semigroup actions
/// fall back to substepped truncated-Taylor evaluation of e^{-tL}v (kernel
/// entries then cost one action per column).  The engine is immutable after
/// construction and all queries are safe to run concurrently.
class HeatEngine {
 public:
  enum class Method { dense_spectral, expm_action };

  explicit HeatEngine(const DirichletSpace& space, int dense_threshold = 2000);

  const DirichletSpace& space() const { return space_; }
  Method method() const { return method_; }

  /// Spectrum of L (ascending, clamped at 0); dense mode only.
  const Vector& eigenvalues() const;
  /// mu-orthonormal eigenfunctions as columns; dense mode only.
  const Matrix& basis() const;

  double kernel(double t, int x, int y) const;
  /// Full kernel matrix p(t,.,.) — exactly symmetric.
  Matrix kernel_matrix(double t) const;
  Vector apply(double t, const Vector& f) const;
  Vector apply_measure(double t, const AtomicMeasure& nu) const;
  Vector apply_measure(double t, const Vector& mass) const;

  /// Semigroup of the Dirichlet restriction to U, extended by zero off U.
  /// Restricted engines are built on demand and cached per member set.
  Vector restricted_apply(const Subdomain& U, double t, const Vector& f) const;
  /// The cached engine of restrict_space(space, U), for kernel-level queries.
  const HeatEngine& restricted_engine(const Subdomain& U) const;

 private:
  Vector expm_action(double t, Vector v) const;
  const HeatEngine& restricted_for(const std::vector<int>& members) const;

  DirichletSpace space_;
  Method method_;
  int dense_threshold_;
  Vector eigenvalues_;
  Matrix basis_;  // phi, columns mu-orthonormal

  struct RestrictedEntry {
    std::unique_ptr<HeatEngine> engine;
    std::vector<int> vertices;
  };
  mutable std::mutex cache_mutex_;
  mutable std::map<std::vector<int>, RestrictedEntry> restricted_cache_;
};

double heat_kernel(const HeatEngine& engine, double t, int x, int y);
Vector apply_semigroup(const HeatEngine& engine, double t, const Vector& f);
Vector apply_semigroup_measure(const HeatEngine& engine, double t, const AtomicMeasure& nu);
Vector restricted_semigroup(const HeatEngine& engine, const Subdomain& U, double t,
                            const Vector& f);

}  // namespace heatlab
