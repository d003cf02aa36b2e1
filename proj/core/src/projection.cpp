#include "heatlab/projection.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace heatlab {

namespace {

std::vector<int> compose(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[b[i]];
  return c;
}

void check_automorphism(const DirichletSpace& space, const std::vector<int>& g) {
  const int n = space.size();
  if (static_cast<int>(g.size()) != n)
    fail(Errc::invalid_action, "permutation length mismatch");
  std::vector<char> seen(n, 0);
  for (int x : g) {
    if (x < 0 || x >= n || seen[x]) fail(Errc::invalid_action, "not a permutation");
    seen[x] = 1;
  }
  for (int x = 0; x < n; ++x) {
    if (space.mu(g[x]) != space.mu(x))
      fail(Errc::invalid_action, "permutation does not preserve mu");
    if (space.killing(g[x]) != space.killing(x))
      fail(Errc::invalid_action, "permutation does not preserve killing");
  }
  for (const Edge& e : space.edges())
    if (space.weight(g[e.u], g[e.v]) != e.w)
      fail(Errc::invalid_action, "permutation does not preserve edge weights");
}

}  // namespace

GroupAction make_group_action(const DirichletSpace& space,
                              const std::vector<std::vector<int>>& generators) {
  const int n = space.size();
  std::vector<int> identity(n);
  for (int i = 0; i < n; ++i) identity[i] = i;
  for (const auto& g : generators) check_automorphism(space, g);

  constexpr int kMaxOrder = 4096;
  std::set<std::vector<int>> seen{identity};
  std::vector<std::vector<int>> elements{identity};
  for (std::size_t head = 0; head < elements.size(); ++head) {
    for (const auto& g : generators) {
      std::vector<int> next = compose(g, elements[head]);
      if (seen.insert(next).second) {
        if (static_cast<int>(elements.size()) >= kMaxOrder)
          fail(Errc::invalid_action, "group closure exceeds supported order");
        elements.push_back(std::move(next));
      }
    }
  }

  for (const auto& g : elements) {
    if (g == identity) continue;
    for (int x = 0; x < n; ++x)
      if (g[x] == x) fail(Errc::invalid_action, "action is not free: fixed point found");
  }
  return GroupAction{std::move(elements)};
}

Quotient build_quotient(const DirichletSpace& space1, const GroupAction& action) {
  const int n = space1.size();
  if (action.elements.empty() || static_cast<int>(action.elements[0].size()) != n)
    fail(Errc::invalid_action, "action does not match the space");
  for (const auto& g : action.elements) check_automorphism(space1, g);

  // Orbits, represented by their least vertex and ordered by it.
  std::vector<int> orbit_of(n, -1);
  std::vector<std::vector<int>> fibers;
  for (int x = 0; x < n; ++x) {
    if (orbit_of[x] >= 0) continue;
    std::set<int> orbit;
    for (const auto& g : action.elements) orbit.insert(g[x]);
    int z = static_cast<int>(fibers.size());
    fibers.emplace_back(orbit.begin(), orbit.end());
    for (int y : fibers.back()) {
      if (orbit_of[y] >= 0) fail(Errc::invalid_action, "orbits are not disjoint");
      orbit_of[y] = z;
    }
  }
  const int m = static_cast<int>(fibers.size());
  const int order = action.order();
  for (const auto& fiber : fibers)
    if (static_cast<int>(fiber.size()) != order)
      fail(Errc::invalid_action, "action is not free: short orbit");

  Vector mu2(m), killing2(m);
  for (int z = 0; z < m; ++z) {
    mu2[z] = space1.mu(fibers[z][0]);
    killing2[z] = space1.killing(fibers[z][0]);
  }
  std::map<std::pair<int, int>, double> weights;
  for (const Edge& e : space1.edges()) {
    int a = orbit_of[e.u], b = orbit_of[e.v];
    if (a == b) continue;  // intra-orbit edges become loops and vanish
    if (a > b) std::swap(a, b);
    weights[{a, b}] += e.w / order;
  }
  std::vector<Edge> edges2;
  edges2.reserve(weights.size());
  for (const auto& [key, w] : weights) edges2.push_back({key.first, key.second, w});

  Quotient q{DirichletSpace(std::move(mu2), std::move(edges2), std::move(killing2)),
             QuotientMap{std::move(orbit_of), std::move(fibers), order, space1.content_hash(), 0}};
  q.map.space2_hash = q.space.content_hash();

  // The construction is only correct if the projection intertwines the
  // generators exactly; verify on the full coordinate basis.
  for (int z = 0; z < m; ++z) {
    Vector f = Vector::Unit(m, z);
    Vector lifted(n);
    for (int x = 0; x < n; ++x) lifted[x] = f[q.map.pi[x]];
    Vector down = q.space.apply_generator(f);
    Vector up = space1.apply_generator(lifted);
    for (int x = 0; x < n; ++x)
      if (std::abs(up[x] - down[q.map.pi[x]]) > 1e-12)
        fail(Errc::invalid_action, "generator identity violated by the quotient recipe");
  }
  return q;
}

double verify_kernel_projection(const HeatEngine& engine1, const HeatEngine& engine2,
                                const QuotientMap& map, double t,
                                const std::vector<std::pair<int, int>>& sample_pairs) {
  if (engine1.space().content_hash() != map.space1_hash ||
      engine2.space().content_hash() != map.space2_hash)
    fail(Errc::invalid_input, "engines do not match the quotient map");
  if (!(t > 0.0)) fail(Errc::invalid_time, "time must be positive");
  const int m = engine2.space().size();

  std::vector<std::pair<int, int>> pairs = sample_pairs;
  if (pairs.empty()) {
    pairs.reserve(m * m);
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y) pairs.push_back({x, y});
  }

  double max_gap = 0.0;
  for (auto [x2, y2] : pairs) {
    if (x2 < 0 || x2 >= m || y2 < 0 || y2 >= m)
      fail(Errc::invalid_input, "sample pair out of range");
    const int x1 = map.fibers[x2][0];
    double folded = 0.0;
    for (int z : map.fibers[y2]) folded += engine1.kernel(t, x1, z);
    max_gap = std::max(max_gap, std::abs(engine2.kernel(t, x2, y2) - folded));
  }
  return max_gap;
}

SpaceTimeFunction lift_solution(const QuotientMap& map, const SpaceTimeFunction& u2) {
  const int n = static_cast<int>(map.pi.size());
  SpaceTimeFunction v;
  v.times = u2.times;
  v.nonnegative = u2.nonnegative;
  v.values.resize(u2.values.rows(), n);
  for (int x = 0; x < n; ++x) v.values.col(x) = u2.values.col(map.pi[x]);
  if (!u2.domain.empty()) {
    for (int x = 0; x < n; ++x)
      if (std::binary_search(u2.domain.begin(), u2.domain.end(), map.pi[x]))
        v.domain.push_back(x);
  }
  return v;
}

AtomicMeasure lift_measure(const QuotientMap& map, const AtomicMeasure& nu2) {
  const int n = static_cast<int>(map.pi.size());
  Vector mass(n);
  for (int x = 0; x < n; ++x) mass[x] = nu2.mass[map.pi[x]];
  return AtomicMeasure(std::move(mass));
}

}  // namespace heatlab
