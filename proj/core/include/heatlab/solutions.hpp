#pragma once

#include <string>
#include <vector>

#include "heatlab/energy.hpp"
#include "heatlab/semigroup.hpp"
#include "heatlab/space.hpp"
#include "heatlab/types.hpp"

namespace heatlab {

/// Grid-sampled space-time function.  `values` always stores all vertices
/// (row per time sample); `domain` is the member set on which the function
/// claims to solve the heat equation — empty means the full vertex set.
/// Values outside the claim are carried as data (they feed the generator
/// stencil at claimed vertices near the boundary) but are never themselves
/// required to satisfy the equation.
struct SpaceTimeFunction {
  std::vector<double> times;
  Matrix values;  // times.size() x n
  std::vector<int> domain;
  bool nonnegative = false;

  int time_count() const { return static_cast<int>(times.size()); }
  int vertex_count() const { return static_cast<int>(values.cols()); }
  Vector at(int i) const { return values.row(i).transpose(); }
  double max_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
  bool claims_full() const { return domain.empty(); }
  std::vector<int> claimed_members() const;
  Subdomain claimed(const DirichletSpace& space) const;
  void validate(const DirichletSpace& space) const;
};

SpaceTimeFunction sample_semigroup(const HeatEngine& engine, const std::vector<double>& times,
                                   const Vector& f);
SpaceTimeFunction sample_semigroup_measure(const HeatEngine& engine,
                                           const std::vector<double>& times,
                                           const AtomicMeasure& nu);

/// Heat-equation residual max over claimed vertices and interior time points
/// of |d_t u + L u|, with d_t the three-point central difference on the
/// (possibly nonuniform) grid.  The pass tolerance is the local truncation
/// model tau_i = 2 |u'''/6| dt+ dt- with the third derivative estimated from
/// third divided differences near each interior point, plus a data-noise
/// floor amplified by the stencil weights and ||L||_inf, so verdicts stay
/// consistent under grid refinement and under the rounding noise of
/// spectrally sampled data.
struct ResidualReport {
  double max_residual = 0.0;
  double tolerance = 0.0;  // largest local tolerance on the grid
  bool passes = false;
  double c3 = 0.0;  // largest third-divided-difference magnitude
  int argmax_time = -1;
  int argmax_vertex = -1;
};

ResidualReport solution_residual(const DirichletSpace& space, const SpaceTimeFunction& u);

struct HarnackWindow {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  std::vector<int> K;
};

/// max over [a,b] x K of u divided by min over [c,d] x K of u (grid samples
/// replace esssup/essinf); +infinity when the denominator vanishes.
double harnack_ratio(const SpaceTimeFunction& u, const HarnackWindow& window);

/// Empirical Harnack constant: the largest harnack_ratio over the solution
/// family {P_t delta_y}_y, each sampled on `time_samples` points of [a,d].
double harnack_family_constant(const HeatEngine& engine, const HarnackWindow& window,
                               int time_samples = 33);

/// Caccioppoli-type bound: time quadrature of E_1(psi u(t)) against the
/// constant assembled from the proof chain,
///   M^2 ( T mu(U) + 10 T E(psi) + 20 mu(U) + T sum killing psi^2 ),
/// with M the sup of u over U and its neighbors.
struct CaccioppoliReport {
  double lhs = 0.0;
  double rhs_bound = 0.0;
  double sup_u = 0.0;
  bool passes = false;
};

CaccioppoliReport caccioppoli_check(const DirichletSpace& space, const Subdomain& U,
                                    const Subdomain& V, const CutoffFunction& psi,
                                    const SpaceTimeFunction& u);

/// Extends u by zero to negative times (mirroring up to three of its leading
/// grid gaps), provided the earliest sample is already small:
/// ||u(t_0)||_{L^2(mu, claimed members)} <= check_tol, else extension-refused.
SpaceTimeFunction extend_by_zero(const DirichletSpace& space, const SpaceTimeFunction& u,
                                 double check_tol);

struct MaxPrincipleReport {
  Verdict verdict = Verdict::not_applicable;
  std::string reason;
  double max_value = 0.0;
  double tau = 0.0;
  int argmax_time = -1;
  int argmax_vertex = -1;
  ResidualReport residual;  // against the Dirichlet-restricted generator on U
};

/// u(t_0) <= 0 and u(t)^+ supported in U and u solves the killed equation on
/// U  =>  u stays <= tau on [t_0, T] x U, with tau the accumulated residual
/// budget; unmet preconditions yield not-applicable, never failure.
MaxPrincipleReport maximum_principle_check(const DirichletSpace& space, const Subdomain& U,
                                           const SpaceTimeFunction& u);

struct MinimalityReport {
  Verdict verdict = Verdict::not_applicable;
  std::string reason;
  double min_slack = 0.0;  // min over grid of u(t) - P_t f
  double tau = 0.0;        // accumulated tolerance at the worst time
  bool exhaustion_monotone = false;
  double exhaustion_final_gap = 0.0;
  ResidualReport residual;
};

/// Minimality of the semigroup evolution: f <= u(0) implies P_t f <= u(t).
/// Also walks the exhaustion route (P_t^{U_i} f^+ <= u stagewise, converging
/// to P_t f at the full stage).
MinimalityReport minimality_check(const HeatEngine& engine, const SpaceTimeFunction& u,
                                  const Vector& f);

struct L1MassReport {
  double sup_mass = 0.0;  // max over t <= T' of the u(t)-mass of K
  double bound = 0.0;     // u(T'', probe) / c
  double c = 0.0;         // min kernel over the needed (s, probe, K) range
  int probe_vertex = -1;
  double t_second = 0.0;  // the chosen T''
  bool passes = false;
};

/// "Heat cannot flow out of K too rapidly": the early mass in K is bounded by
/// a single later observation at the probe vertex (argmax of u(T'')) divided
/// by the minimal kernel value connecting the probe back to K.
L1MassReport l1_mass_bound(const HeatEngine& engine, const SpaceTimeFunction& u,
                           const std::vector<int>& K, double T_prime);

}  // namespace heatlab
