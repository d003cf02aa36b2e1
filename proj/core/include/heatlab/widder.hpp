#pragma once

#include <utility>
#include <vector>

#include "heatlab/semigroup.hpp"
#include "heatlab/solutions.hpp"
#include "heatlab/space.hpp"

namespace heatlab {

/// Decomposition u = P_t nu + h of a nonnegative solution into the evolution
/// of an initial measure plus a boundary-influx part vanishing at t <= 0.
/// `h` is clipped below at -tau (tau propagated from the residual model);
/// `h_raw` keeps the unclipped values for diagnostics.
struct WidderDecomposition {
  AtomicMeasure nu;
  SpaceTimeFunction h;
  Matrix h_raw;
  double reconstruction_residual = 0.0;
  /// (eps, || 1_U u(eps) mu - nu ||_1) for each requested eps, descending.
  std::vector<std::pair<double, double>> eps_trace;
  double h_nonnegativity_slack = 0.0;  // min of the trace functions h_eps on U
  double tau = 0.0;
  bool richardson_applied = false;
  double richardson_order = 0.0;  // estimated decay order of the eps-trace
  double monotone_slack = 0.0;    // worst violation of h_eps decreasing in eps
  double stage_consistency_gap = 0.0;  // global route only
};

/// Local decomposition on U from the trace nu = 1_U u(eps*) mu at the
/// smallest eps, Richardson-extrapolated across eps_grid when the trace
/// decays regularly.  Requires u to solve on a neighborhood of U (claimed
/// domain whose interior contains U) — otherwise not-applicable.  A trace
/// function h_eps dipping below -10 tau on U means u was not a nonnegative
/// solution at the claimed tolerance: decomposition-failed.
WidderDecomposition widder_local_decompose(const HeatEngine& engine, const SpaceTimeFunction& u,
                                           const Subdomain& U,
                                           const std::vector<double>& eps_grid);

/// Global decomposition along an exhaustion: stagewise traces must agree on
/// earlier stages (they are increasing in the stage), the final stage gives
/// nu, and the h_n decrease to h.
WidderDecomposition widder_global_decompose(const HeatEngine& engine, const SpaceTimeFunction& u,
                                            const Exhaustion& exhaustion,
                                            const std::vector<double>& eps_grid);

struct WeakLimitSample {
  double extrapolated = 0.0;  // lim_{t->0} sum_x u(t,x) f(x) mu(x)
  double pairing1 = 0.0;      // sum f d(nu1)
  double pairing2 = 0.0;
  double gap1 = 0.0;
  double gap2 = 0.0;
};

/// Report-only comparison of two candidate decompositions of the same u:
/// total-variation gap of the measures, reconstruction quality, h-positivity
/// at small times, and the weak-limit test  <u(t), f>_mu -> <f, nu>  per test
/// function.  `flagged` marks a decomposition inconsistent with u.
struct UniquenessReport {
  double nu_gap_l1 = 0.0;
  double combined_tolerance = 0.0;
  bool nu_agree = false;
  double recon_error1 = 0.0, recon_error2 = 0.0;
  bool reconstructs1 = false, reconstructs2 = false;
  double h_min1 = 0.0, h_min2 = 0.0;
  bool h_nonneg1 = false, h_nonneg2 = false;
  std::vector<WeakLimitSample> weak_limit;
  double weak_gap1 = 0.0, weak_gap2 = 0.0;  // worst normalized weak-limit gaps
  bool flagged1 = false, flagged2 = false;
};

UniquenessReport verify_uniqueness(const HeatEngine& engine, const SpaceTimeFunction& u,
                                   const WidderDecomposition& dec1,
                                   const WidderDecomposition& dec2,
                                   const std::vector<Vector>& test_functions);

}  // namespace heatlab
