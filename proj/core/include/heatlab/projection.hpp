#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "heatlab/semigroup.hpp"
#include "heatlab/solutions.hpp"
#include "heatlab/space.hpp"

namespace heatlab {

/// Finite group of space automorphisms (mu-, weight- and killing-preserving
/// vertex permutations) acting freely.  `elements` is the full group closure,
/// identity first.
struct GroupAction {
  std::vector<std::vector<int>> elements;

  int order() const { return static_cast<int>(elements.size()); }
};

/// Validates generators as free automorphisms and enumerates their closure.
GroupAction make_group_action(const DirichletSpace& space,
                              const std::vector<std::vector<int>>& generators);

struct QuotientMap {
  std::vector<int> pi;                   // X1 -> X2
  std::vector<std::vector<int>> fibers;  // per quotient vertex, ascending
  int group_order = 1;
  std::uint64_t space1_hash = 0;
  std::uint64_t space2_hash = 0;
};

struct Quotient {
  DirichletSpace space;
  QuotientMap map;
};

/// Orbit quotient: mu2 = mu1 at any orbit representative, edge weights
/// averaged over the group (intra-orbit edges drop as loops), killing carried
/// over.  The construction is validated against the generator identity
/// L2 f ∘ pi = L1 (f ∘ pi), which must hold to rounding.
Quotient build_quotient(const DirichletSpace& space1, const GroupAction& action);

/// max over sample pairs (x2, y2) of |p2(t, x2, y2) - sum_{z in fiber(y2)}
/// p1(t, lift(x2), z)|; exact in finite spaces.  Empty `sample_pairs` means
/// all pairs.
double verify_kernel_projection(const HeatEngine& engine1, const HeatEngine& engine2,
                                const QuotientMap& map, double t,
                                const std::vector<std::pair<int, int>>& sample_pairs = {});

/// v(t, x) = u2(t, pi(x)); solves upstairs at the same tolerance by the
/// generator identity.
SpaceTimeFunction lift_solution(const QuotientMap& map, const SpaceTimeFunction& u2);

/// Fiber-spread lift: every point of the fiber over z carries the full atom
/// nu2({z}), so that P1_t(lifted nu) = (P2_t nu2) ∘ pi.
AtomicMeasure lift_measure(const QuotientMap& map, const AtomicMeasure& nu2);

}  // namespace heatlab
