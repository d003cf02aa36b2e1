#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "heatlab/types.hpp"

namespace heatlab {

struct Edge {
  int u = 0;
  int v = 0;
  double w = 0.0;
};

enum class Endpoint { reflecting, absorbing };

/// Finite weighted graph carrying a vertex measure mu, symmetric edge weights
/// and a nonnegative killing rate per vertex.  Together these define the
/// Dirichlet form
///
///   E(f,g) = sum_{x<y} w_xy (f(x)-f(y))(g(x)-g(y)) + sum_x killing(x) f(x) g(x)
///
/// with generator (Lf)(x) = (1/mu(x)) [ sum_y w_xy (f(x)-f(y)) + killing(x) f(x) ],
/// so that E(f,g) = <f, Lg>_mu exactly and M*L is symmetric (M = diag(mu)).
///
/// Construction validates mu > 0, w >= 0 with zero diagonal, killing >= 0 and
/// connectivity of the positive-weight graph.  Instances are immutable and
/// safe to share across threads.
class DirichletSpace {
 public:
  DirichletSpace(Vector mu, std::vector<Edge> edges, Vector killing);

  int size() const { return static_cast<int>(mu_.size()); }
  const Vector& mu() const { return mu_; }
  double mu(int x) const { return mu_[x]; }
  double total_mass() const { return mu_.sum(); }
  const Vector& killing() const { return killing_; }
  double killing(int x) const { return killing_[x]; }
  bool is_conservative() const { return killing_.maxCoeff() <= 0.0; }

  const std::vector<Edge>& edges() const { return edges_; }
  /// Neighbors of x as (vertex, weight) pairs.
  const std::vector<std::pair<int, double>>& neighbors(int x) const { return adj_[x]; }
  double weight(int x, int y) const;

  /// Full form E(f,g) including the killing term.
  double energy(const Vector& f, const Vector& g) const;
  double energy(const Vector& f) const { return energy(f, f); }
  /// Killing-free part of the form.
  double energy0(const Vector& f, const Vector& g) const;

  Vector apply_generator(const Vector& f) const;
  Matrix generator_matrix() const;

  /// Content hash of the canonical description (vertex count, mu, sorted
  /// edges, killing); used to key engine caches and solution sidecars.
  std::uint64_t content_hash() const { return hash_; }
  std::string hash_hex() const;

 private:
  Vector mu_;
  Vector killing_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
  std::uint64_t hash_ = 0;
};

/// Vertex subset of a parent space.  `interior` is the set of members all of
/// whose neighbors are members: the discrete analog of "compactly supported
/// inside U".  It is computed, never user-supplied.
class Subdomain {
 public:
  Subdomain(const DirichletSpace& parent, std::vector<int> members);

  static Subdomain full(const DirichletSpace& parent);

  const DirichletSpace& parent() const { return *parent_; }
  const std::vector<int>& members() const { return members_; }
  const std::vector<int>& interior() const { return interior_; }
  bool contains(int x) const { return mask_[x] != 0; }
  bool contains_all(const std::vector<int>& xs) const;
  int size() const { return static_cast<int>(members_.size()); }
  bool is_full() const { return size() == parent_->size(); }
  double measure() const;
  bool is_connected() const;

  /// 1 on members, 0 elsewhere.
  Vector indicator() const;
  /// Pointwise restriction: f on members, 0 elsewhere.
  Vector cut(const Vector& f) const;

 private:
  const DirichletSpace* parent_;
  std::vector<int> members_;
  std::vector<char> mask_;
  std::vector<int> interior_;
};

/// Increasing chain of connected subdomains ending at the full vertex set.
class Exhaustion {
 public:
  explicit Exhaustion(std::vector<Subdomain> stages);
  const std::vector<Subdomain>& stages() const { return stages_; }
  int size() const { return static_cast<int>(stages_.size()); }
  const Subdomain& stage(int i) const { return stages_[i]; }

 private:
  std::vector<Subdomain> stages_;
};

/// Validates the given member lists as an exhaustion of `space`.
Exhaustion exhaustion_of(const DirichletSpace& space, const std::vector<std::vector<int>>& stages);

/// 1D grid of n vertices at the given spacing.  Weights are 1/(2*spacing) so
/// the generator discretizes -(1/2) d^2/dx^2 (the convention under which the
/// kernel per unit length reproduces the classical Gaussian 1/sqrt(2*pi*t));
/// mu = spacing per vertex.  An absorbing end adds killing equal to the cut
/// edge weight, i.e. the Dirichlet restriction of a one-longer path.
DirichletSpace build_path(int n, double spacing, Endpoint left = Endpoint::reflecting,
                          Endpoint right = Endpoint::reflecting);

/// Cycle graph with uniform weight and measure, killing = 0.
DirichletSpace build_cycle(int n, double weight = 1.0, double mu = 1.0);

/// 2D grid with deleted holes.  Vertices are the grid points minus the holes;
/// `coords[v]` gives the (ix, iy) position of vertex v and `vertex_at` maps a
/// position back (-1 for holes).  Weights are 1/2 (the 2D discretization of
/// the (1/2)-Laplacian form), mu = spacing^2; neighbors of holes acquire
/// killing equal to the cut edge weight.
struct Grid2D {
  DirichletSpace space;
  int nx = 0;
  int ny = 0;
  double spacing = 1.0;
  std::vector<std::array<int, 2>> coords;
  std::vector<std::vector<int>> index;  // index[iy][ix] = vertex or -1

  int vertex_at(int ix, int iy) const { return index[iy][ix]; }
};

Grid2D build_grid_2d(int nx, int ny, double spacing,
                     const std::vector<std::array<int, 2>>& holes = {});

/// Dirichlet restriction of a space to a member set, with the vertex
/// renumbering retained: `vertices[i]` is the parent index of restricted
/// vertex i.  Each member x gains killing += sum of weights to non-members.
struct Restriction {
  DirichletSpace space;
  std::vector<int> vertices;

  int local_index(int parent_vertex) const;
};

Restriction restrict_space(const DirichletSpace& space, const std::vector<int>& members);
Restriction restrict_space(const DirichletSpace& space, const Subdomain& U);

}  // namespace heatlab
