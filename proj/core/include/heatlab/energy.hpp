#pragma once

#include <optional>
#include <vector>

#include "heatlab/space.hpp"
#include "heatlab/types.hpp"

namespace heatlab {

/// Energy-measure density Gamma(f)(x) = (1/2) sum_y w_xy (f(x)-f(y))^2, the
/// "half the edge sum at each endpoint" convention; sum_x Gamma(f)(x) equals
/// the killing-free form E0(f,f) exactly.  The signed version Gamma(f,g)
/// replaces the square by (f(x)-f(y))(g(x)-g(y)).
struct EnergyMeasure {
  Vector density;

  double total() const { return density.sum(); }
};

EnergyMeasure energy_measure(const DirichletSpace& space, const Vector& f);
EnergyMeasure energy_measure(const DirichletSpace& space, const Vector& f, const Vector& g);

/// Residuals/slacks of the energy-measure calculus on a quadruple (f,g,h,k).
/// The discrete Gamma satisfies the Leibniz rule only with the symmetrized
/// convention fbar(x,y) = (f(x)+f(y))/2 inside the edge sum; the naive
/// (pointwise-f) residual is reported as a discretization diagnostic and is
/// not asserted to vanish.
struct EnergyIdentityReport {
  Vector leibniz_naive_residual;        // Gamma(fg,h) - f Gamma(g,h) - g Gamma(f,h)
  Vector leibniz_symmetrized_residual;  // same with edgewise-averaged f, g
  double leibniz_symmetrized_max_abs = 0.0;
  double cauchy_schwarz_slack = 0.0;  // (sum|fg||G(h,k)|)^2 vs sum f^2 G(h) * sum g^2 G(k)
  double am_gm_slack = 0.0;           // pointwise min over x of the AM-GM bound
  double product_bound_slack = 0.0;   // Gamma(fg) <= 2(fbar^2 Gamma(g) + gbar^2 Gamma(f))
};

EnergyIdentityReport check_energy_identities(const DirichletSpace& space, const Vector& f,
                                             const Vector& g, const Vector& h, const Vector& k);

/// psi in [0,1], equal to 1 on `one_set`, vanishing outside `support`.
/// `c_psi` is the operator norm of f -> psi f in the E_1 inner product
/// (largest generalized eigenvalue of (D_psi G D_psi, G), G = stiffness + M),
/// so E_1(psi f) <= c_psi E_1(f) for every f.
struct CutoffFunction {
  Vector values;
  std::vector<int> one_set;
  std::vector<int> support;
  double c_psi = 0.0;
};

/// Validates a user-supplied psi as a cutoff for K inside U.
CutoffFunction make_cutoff(const DirichletSpace& space, const Vector& values,
                           const std::vector<int>& K, const std::vector<int>& U);
/// Graph-distance ramp: 1 on K, 0 off U, interpolated by hop distances inside.
CutoffFunction make_ramp_cutoff(const DirichletSpace& space, const std::vector<int>& K,
                                const std::vector<int>& U);
double cutoff_operator_norm(const DirichletSpace& space, const Vector& psi);

/// Certified bracket for the intrinsic distance
///   d(x,y) = sup { f(y) - f(x) : (1/2) w_uv (f(u)-f(v))^2 <= min(mu_u, mu_v)
///                  on every edge },
/// i.e. f 1-Lipschitz with respect to the edge lengths
/// l(u,v) = sqrt(2 min(mu_u, mu_v) / w_uv).  `upper` is the shortest-path
/// bound in l; `lower` comes from the best feasible f found by projected
/// ascent (seeded with the distance function itself), rescaled post hoc so
/// the edgewise Lipschitz ratio is exactly <= 1.
struct DistanceBracket {
  double lower = 0.0;
  double upper = 0.0;

  double gap() const { return upper - lower; }
};

DistanceBracket intrinsic_distance(const DirichletSpace& space, int x, int y, double tol = 1e-6);

/// All-pairs shortest-path matrix in the intrinsic edge lengths.
Matrix intrinsic_metric(const DirichletSpace& space);
/// All-pairs hop-count metric.
Matrix graph_metric(const DirichletSpace& space);

/// Volume-doubling and Poincare samples on open metric balls B(x,r) = {d < r}.
struct DoublingPoincareSample {
  int x = 0;
  double r = 0.0;
  int vol_r = 0;   // vertex count of B(x,r)
  int vol_2r = 0;  // vertex count of B(x,2r)
  double mu_r = 0.0;
  double mu_2r = 0.0;
  double doubling_ratio = 0.0;  // mu(B(x,2r)) / mu(B(x,r))
  double poincare = 0.0;        // smallest P over the ball eigenbasis
  bool skipped = false;         // empty ball
};

struct DoublingPoincareReport {
  std::vector<DoublingPoincareSample> samples;
  double max_doubling_ratio = 0.0;
  double max_poincare = 0.0;
  int skipped_count = 0;
};

DoublingPoincareReport check_doubling_poincare(const DirichletSpace& space, const Matrix& metric,
                                               const std::vector<double>& radii);

/// Smallest c2 with
///   sum_{B(x0,s)} f^2 Gamma(psi)
///     <= c2 (s/R)^{2 theta} ( sum_{B(x0,2s)} Gamma(f) + s^beta sum_{B(x0,2s)} f^2 mu )
/// over the Laplacian eigenbasis of the induced subgraph on B(x0,2s).
double check_cutoff_sobolev(const DirichletSpace& space, const CutoffFunction& psi, int x0,
                            double R, double s, double beta, double theta, const Matrix& metric);

}  // namespace heatlab
