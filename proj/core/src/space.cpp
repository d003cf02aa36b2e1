#include "heatlab/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <set>
#include <sstream>

namespace heatlab {

std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_geometry: return "invalid-geometry";
    case Errc::invalid_exhaustion: return "invalid-exhaustion";
    case Errc::invalid_time: return "invalid-time";
    case Errc::invalid_window: return "invalid-window";
    case Errc::invalid_cutoff: return "invalid-cutoff";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::extension_refused: return "extension-refused";
    case Errc::decomposition_failed: return "decomposition-failed";
    case Errc::invalid_action: return "invalid-action";
    case Errc::invalid_input: return "invalid-input";
    case Errc::invalid_ball: return "invalid-ball";
    case Errc::not_applicable: return "not-applicable";
  }
  return "unknown";
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "not-applicable";
  }
  return "unknown";
}

namespace {

// FNV-1a over a canonical byte stream; stable across platforms with IEEE doubles.
struct Fnv1a {
  std::uint64_t state = 1469598103934665603ull;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= b[i];
      state *= 1099511628211ull;
    }
  }
  void f64(double x) {
    if (x == 0.0) x = 0.0;  // normalize -0.0
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    bytes(&bits, sizeof bits);
  }
  void i32(int x) {
    std::int32_t v = x;
    bytes(&v, sizeof v);
  }
};

}  // namespace

DirichletSpace::DirichletSpace(Vector mu, std::vector<Edge> edges, Vector killing)
    : mu_(std::move(mu)), killing_(std::move(killing)), edges_(std::move(edges)) {
  const int n = static_cast<int>(mu_.size());
  if (n <= 0) fail(Errc::invalid_geometry, "space needs at least one vertex");
  if (killing_.size() == 0) killing_ = Vector::Zero(n);
  if (killing_.size() != n) fail(Errc::invalid_geometry, "killing length mismatch");
  for (int x = 0; x < n; ++x) {
    if (!(mu_[x] > 0.0) || !std::isfinite(mu_[x]))
      fail(Errc::invalid_geometry, "mu must be positive and finite");
    if (killing_[x] < 0.0 || !std::isfinite(killing_[x]))
      fail(Errc::invalid_geometry, "killing must be nonnegative and finite");
  }

  // Canonicalize: orient u < v, drop zero weights, merge duplicates.
  std::vector<Edge> canon;
  canon.reserve(edges_.size());
  for (Edge e : edges_) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
      fail(Errc::invalid_geometry, "edge endpoint out of range");
    if (e.u == e.v) fail(Errc::invalid_geometry, "self-loops are not allowed");
    if (e.w < 0.0 || !std::isfinite(e.w))
      fail(Errc::invalid_geometry, "edge weight must be nonnegative and finite");
    if (e.w == 0.0) continue;
    if (e.u > e.v) std::swap(e.u, e.v);
    canon.push_back(e);
  }
  std::sort(canon.begin(), canon.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  std::vector<Edge> merged;
  for (const Edge& e : canon) {
    if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v)
      merged.back().w += e.w;
    else
      merged.push_back(e);
  }
  edges_ = std::move(merged);

  adj_.assign(n, {});
  for (const Edge& e : edges_) {
    adj_[e.u].emplace_back(e.v, e.w);
    adj_[e.v].emplace_back(e.u, e.w);
  }
  for (auto& nb : adj_) std::sort(nb.begin(), nb.end());

  // Connectivity of the positive-weight graph.
  if (n > 1) {
    std::vector<char> seen(n, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int count = 1;
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      for (auto [y, w] : adj_[x]) {
        if (!seen[y]) {
          seen[y] = 1;
          ++count;
          queue.push_back(y);
        }
      }
    }
    if (count != n) fail(Errc::invalid_geometry, "graph must be connected");
  }

  Fnv1a h;
  h.i32(n);
  for (int x = 0; x < n; ++x) h.f64(mu_[x]);
  for (int x = 0; x < n; ++x) h.f64(killing_[x]);
  h.i32(static_cast<int>(edges_.size()));
  for (const Edge& e : edges_) {
    h.i32(e.u);
    h.i32(e.v);
    h.f64(e.w);
  }
  hash_ = h.state;
}

double DirichletSpace::weight(int x, int y) const {
  for (auto [z, w] : adj_[x])
    if (z == y) return w;
  return 0.0;
}

double DirichletSpace::energy(const Vector& f, const Vector& g) const {
  return energy0(f, g) + (killing_.array() * f.array() * g.array()).sum();
}

double DirichletSpace::energy0(const Vector& f, const Vector& g) const {
  double acc = 0.0;
  for (const Edge& e : edges_) acc += e.w * (f[e.u] - f[e.v]) * (g[e.u] - g[e.v]);
  return acc;
}

Vector DirichletSpace::apply_generator(const Vector& f) const {
  const int n = size();
  Vector out(n);
  for (int x = 0; x < n; ++x) {
    double acc = killing_[x] * f[x];
    for (auto [y, w] : adj_[x]) acc += w * (f[x] - f[y]);
    out[x] = acc / mu_[x];
  }
  return out;
}

Matrix DirichletSpace::generator_matrix() const {
  const int n = size();
  Matrix L = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    double diag = killing_[x];
    for (auto [y, w] : adj_[x]) {
      diag += w;
      L(x, y) = -w / mu_[x];
    }
    L(x, x) = diag / mu_[x];
  }
  return L;
}

std::string DirichletSpace::hash_hex() const {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << hash_;
  return os.str();
}

Subdomain::Subdomain(const DirichletSpace& parent, std::vector<int> members)
    : parent_(&parent), members_(std::move(members)) {
  const int n = parent.size();
  if (members_.empty()) fail(Errc::invalid_geometry, "subdomain must be nonempty");
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (members_.front() < 0 || members_.back() >= n)
    fail(Errc::invalid_geometry, "subdomain vertex out of range");
  mask_.assign(n, 0);
  for (int x : members_) mask_[x] = 1;
  for (int x : members_) {
    bool inner = true;
    for (auto [y, w] : parent.neighbors(x))
      if (!mask_[y]) {
        inner = false;
        break;
      }
    if (inner) interior_.push_back(x);
  }
}

Subdomain Subdomain::full(const DirichletSpace& parent) {
  std::vector<int> all(parent.size());
  for (int i = 0; i < parent.size(); ++i) all[i] = i;
  return Subdomain(parent, std::move(all));
}

bool Subdomain::contains_all(const std::vector<int>& xs) const {
  return std::all_of(xs.begin(), xs.end(), [&](int x) { return contains(x); });
}

double Subdomain::measure() const {
  double acc = 0.0;
  for (int x : members_) acc += parent_->mu(x);
  return acc;
}

bool Subdomain::is_connected() const {
  std::vector<char> seen(parent_->size(), 0);
  std::deque<int> queue{members_.front()};
  seen[members_.front()] = 1;
  int count = 1;
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    for (auto [y, w] : parent_->neighbors(x)) {
      if (mask_[y] && !seen[y]) {
        seen[y] = 1;
        ++count;
        queue.push_back(y);
      }
    }
  }
  return count == size();
}

Vector Subdomain::indicator() const {
  Vector v = Vector::Zero(parent_->size());
  for (int x : members_) v[x] = 1.0;
  return v;
}

Vector Subdomain::cut(const Vector& f) const {
  Vector v = Vector::Zero(parent_->size());
  for (int x : members_) v[x] = f[x];
  return v;
}

Exhaustion::Exhaustion(std::vector<Subdomain> stages) : stages_(std::move(stages)) {
  if (stages_.empty()) fail(Errc::invalid_exhaustion, "exhaustion must have at least one stage");
}

Exhaustion exhaustion_of(const DirichletSpace& space,
                         const std::vector<std::vector<int>>& stages) {
  if (stages.empty()) fail(Errc::invalid_exhaustion, "exhaustion must have at least one stage");
  std::vector<Subdomain> built;
  built.reserve(stages.size());
  for (const auto& members : stages) {
    Subdomain stage(space, members);
    if (!stage.is_connected())
      fail(Errc::invalid_exhaustion, "each exhaustion stage must be connected");
    if (!built.empty()) {
      for (int x : built.back().members())
        if (!stage.contains(x))
          fail(Errc::invalid_exhaustion, "exhaustion stages must be increasing");
    }
    built.push_back(std::move(stage));
  }
  if (!built.back().is_full())
    fail(Errc::invalid_exhaustion, "final exhaustion stage must cover the space");
  return Exhaustion(std::move(built));
}

DirichletSpace build_path(int n, double spacing, Endpoint left, Endpoint right) {
  if (n < 2) fail(Errc::invalid_geometry, "path needs at least two vertices");
  if (!(spacing > 0.0)) fail(Errc::invalid_geometry, "spacing must be positive");
  const double w = 1.0 / (2.0 * spacing);
  Vector mu = Vector::Constant(n, spacing);
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, w});
  Vector killing = Vector::Zero(n);
  if (left == Endpoint::absorbing) killing[0] += w;
  if (right == Endpoint::absorbing) killing[n - 1] += w;
  return DirichletSpace(std::move(mu), std::move(edges), std::move(killing));
}

DirichletSpace build_cycle(int n, double weight, double mu) {
  if (n < 3) fail(Errc::invalid_geometry, "cycle needs at least three vertices");
  if (!(weight > 0.0) || !(mu > 0.0))
    fail(Errc::invalid_geometry, "cycle weight and mu must be positive");
  std::vector<Edge> edges;
  edges.reserve(n);
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, weight});
  return DirichletSpace(Vector::Constant(n, mu), std::move(edges), Vector::Zero(n));
}

Grid2D build_grid_2d(int nx, int ny, double spacing,
                     const std::vector<std::array<int, 2>>& holes) {
  if (nx < 1 || ny < 1) fail(Errc::invalid_geometry, "grid needs positive dimensions");
  if (!(spacing > 0.0)) fail(Errc::invalid_geometry, "spacing must be positive");
  std::set<std::pair<int, int>> hole_set;
  for (auto [ix, iy] : holes) {
    if (ix < 0 || ix >= nx || iy < 0 || iy >= ny)
      fail(Errc::invalid_geometry, "hole outside grid");
    // Holes model interior absorbing obstacles; a hole touching the outer
    // boundary would silently change the domain's shape instead.
    if (ix == 0 || ix == nx - 1 || iy == 0 || iy == ny - 1)
      fail(Errc::invalid_geometry, "hole on the outer grid boundary");
    hole_set.insert({ix, iy});
  }

  std::vector<std::array<int, 2>> coords;
  std::vector<std::vector<int>> index(ny, std::vector<int>(nx, -1));
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      if (hole_set.count({ix, iy})) continue;
      index[iy][ix] = static_cast<int>(coords.size());
      coords.push_back({ix, iy});
    }
  const int n = static_cast<int>(coords.size());
  if (n < 1) fail(Errc::invalid_geometry, "grid is all holes");

  const double w = 0.5;
  Vector mu = Vector::Constant(n, spacing * spacing);
  Vector killing = Vector::Zero(n);
  std::vector<Edge> edges;
  for (int v = 0; v < n; ++v) {
    auto [ix, iy] = coords[v];
    // Right and up edges; killing from adjacent holes (interior absorbing walls).
    const std::array<std::array<int, 2>, 4> steps{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
    for (auto [dx, dy] : steps) {
      int jx = ix + dx, jy = iy + dy;
      if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
      int u = index[jy][jx];
      if (u < 0) {
        killing[v] += w;
      } else if (dx > 0 || dy > 0) {
        edges.push_back({v, u, w});
      }
    }
  }
  return Grid2D{DirichletSpace(std::move(mu), std::move(edges), std::move(killing)),
                nx, ny, spacing, std::move(coords), std::move(index)};
}

int Restriction::local_index(int parent_vertex) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), parent_vertex);
  if (it == vertices.end() || *it != parent_vertex) return -1;
  return static_cast<int>(it - vertices.begin());
}

Restriction restrict_space(const DirichletSpace& space, const std::vector<int>& members) {
  return restrict_space(space, Subdomain(space, members));
}

Restriction restrict_space(const DirichletSpace& space, const Subdomain& U) {
  if (!U.is_connected()) fail(Errc::invalid_geometry, "restriction target must be connected");
  const auto& verts = U.members();
  const int m = static_cast<int>(verts.size());
  std::vector<int> local(space.size(), -1);
  for (int i = 0; i < m; ++i) local[verts[i]] = i;

  Vector mu(m), killing(m);
  std::vector<Edge> edges;
  for (int i = 0; i < m; ++i) {
    const int x = verts[i];
    mu[i] = space.mu(x);
    double kill = space.killing(x);
    for (auto [y, w] : space.neighbors(x)) {
      int j = local[y];
      if (j < 0)
        kill += w;  // Dirichlet condition: edges leaving U become killing.
      else if (j > i)
        edges.push_back({i, j, w});
    }
    killing[i] = kill;
  }
  return Restriction{DirichletSpace(std::move(mu), std::move(edges), std::move(killing)), verts};
}

}  // namespace heatlab
