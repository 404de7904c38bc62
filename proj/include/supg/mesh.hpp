#pragma once

// Uniform simplicial meshes of the unit square and cube with facet topology.

#include "supg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <variant>
#include <vector>

namespace supg {

/// A (Dim-1)-dimensional facet. The normal is n+, the outward normal of
/// cells[0]; cells[0] is always the adjacent cell with the smaller index.
template <int Dim>
struct Facet {
  std::array<Index, Dim> vertices{};  // ascending global indices
  std::array<Index, 2> cells{-1, -1};
  std::array<int, 2> local_index{-1, -1};
  Vec<Dim> normal = Vec<Dim>::Zero();
  Vec<Dim> barycenter = Vec<Dim>::Zero();
  double measure = 0.0;
  double diameter = 0.0;

  bool is_boundary() const { return cells[1] < 0; }
};

/// Affine map x = origin + jacobian * xi from the reference simplex.
template <int Dim>
struct AffineMap {
  Vec<Dim> origin;
  Mat<Dim> jacobian;
  Mat<Dim> inverse;
  double det = 0.0;

  Vec<Dim> to_physical(const Vec<Dim>& xi) const { return origin + jacobian * xi; }
  Vec<Dim> to_reference(const Vec<Dim>& x) const { return inverse * (x - origin); }
};

template <int Dim>
class Mesh {
 public:
  static constexpr int dim = Dim;
  static constexpr int vertices_per_cell = Dim + 1;

  using CellVertices = std::array<Index, Dim + 1>;

  Mesh(int subdivisions, std::vector<Vec<Dim>> vertices, std::vector<CellVertices> cells)
      : subdivisions_(subdivisions), vertices_(std::move(vertices)), cells_(std::move(cells)) {
    build_geometry();
    build_facets();
  }

  int subdivisions() const { return subdivisions_; }
  Index n_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index n_cells() const { return static_cast<Index>(cells_.size()); }
  Index n_facets() const { return static_cast<Index>(facets_.size()); }

  const std::vector<Vec<Dim>>& vertices() const { return vertices_; }
  const Vec<Dim>& vertex(Index v) const { return vertices_[v]; }
  const CellVertices& cell(Index c) const { return cells_[c]; }
  const std::vector<CellVertices>& cells() const { return cells_; }

  /// Facet of cell c opposite its local vertex i.
  Index cell_facet(Index c, int i) const { return cell_facets_[c][i]; }
  const Facet<Dim>& facet(Index f) const { return facets_[f]; }
  const std::vector<Facet<Dim>>& facets() const { return facets_; }

  const AffineMap<Dim>& map(Index c) const { return maps_[c]; }
  double cell_measure(Index c) const { return measures_[c]; }
  double cell_diameter(Index c) const { return diameters_[c]; }
  Vec<Dim> cell_barycenter(Index c) const {
    Vec<Dim> b = Vec<Dim>::Zero();
    for (Index v : cells_[c]) b += vertices_[v];
    return b / double(Dim + 1);
  }

  /// Outward unit normal of cell c on its local facet i.
  Vec<Dim> outward_normal(Index c, int i) const {
    const Facet<Dim>& f = facets_[cell_facets_[c][i]];
    return f.cells[0] == c ? Vec<Dim>(f.normal) : Vec<Dim>(-f.normal);
  }

  /// Cell containing x together with reference coordinates. Points on an
  /// interface resolve to the cell on the lower-coordinate side.
  std::pair<Index, Vec<Dim>> locate(const Vec<Dim>& x) const {
    const double tol = 1e-12;
    for (int i = 0; i < Dim; ++i) {
      if (x(i) < -tol || x(i) > 1.0 + tol) {
        throw GeometryError("point outside the unit domain");
      }
    }
    const int n = subdivisions_;
    std::array<int, Dim> box{};
    Vec<Dim> local;
    for (int i = 0; i < Dim; ++i) {
      const double s = x(i) * n;
      int b = static_cast<int>(std::ceil(s - 1e-10)) - 1;
      b = std::clamp(b, 0, n - 1);
      box[i] = b;
      local(i) = s - b;
    }
    Index cell = 0;
    if constexpr (Dim == 2) {
      const Index sq = box[0] + Index(n) * box[1];
      cell = 2 * sq + (local(0) + 1e-12 >= local(1) ? 0 : 1);
    } else {
      const Index cube = box[0] + Index(n) * (box[1] + Index(n) * box[2]);
      std::array<int, 3> perm{0, 1, 2};
      std::stable_sort(perm.begin(), perm.end(),
                       [&](int a, int b) { return local(a) > local(b) + 1e-12; });
      cell = 6 * cube + kuhn_index(perm);
    }
    Vec<Dim> xi = maps_[cell].to_reference(x);
    return {cell, xi};
  }

  /// Plain-text dump: vertex table followed by cell table.
  void dump(std::ostream& os) const {
    os << "vertices " << n_vertices() << '\n';
    for (const auto& v : vertices_) {
      for (int i = 0; i < Dim; ++i) os << (i ? " " : "") << v(i);
      os << '\n';
    }
    os << "cells " << n_cells() << '\n';
    for (const auto& c : cells_) {
      for (int i = 0; i <= Dim; ++i) os << (i ? " " : "") << c[i];
      os << '\n';
    }
  }

  // Position of a Kuhn permutation in the per-cube cell ordering.
  static int kuhn_index(const std::array<int, 3>& perm) {
    static const std::array<std::array<int, 3>, 6> perms = kuhn_permutations();
    for (int p = 0; p < 6; ++p) {
      if (perms[p] == perm) return p;
    }
    return 0;
  }

  static std::array<std::array<int, 3>, 6> kuhn_permutations() {
    return {{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  }

 private:
  void build_geometry() {
    maps_.resize(cells_.size());
    measures_.resize(cells_.size());
    diameters_.resize(cells_.size());
    double factorial = 1.0;
    for (int i = 2; i <= Dim; ++i) factorial *= i;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      AffineMap<Dim>& m = maps_[c];
      m.origin = vertices_[cells_[c][0]];
      for (int i = 0; i < Dim; ++i) {
        m.jacobian.col(i) = vertices_[cells_[c][i + 1]] - m.origin;
      }
      m.det = m.jacobian.determinant();
      if (!(m.det > 0.0)) throw GeometryError("degenerate or inverted cell");
      m.inverse = m.jacobian.inverse();
      measures_[c] = m.det / factorial;
      double diam = 0.0;
      for (int a = 0; a <= Dim; ++a) {
        for (int b = a + 1; b <= Dim; ++b) {
          diam = std::max(diam, (vertices_[cells_[c][a]] - vertices_[cells_[c][b]]).norm());
        }
      }
      diameters_[c] = diam;
    }
  }

  void build_facets() {
    std::map<std::array<Index, Dim>, Index> lookup;
    cell_facets_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      for (int i = 0; i <= Dim; ++i) {
        std::array<Index, Dim> key{};
        int n = 0;
        for (int j = 0; j <= Dim; ++j) {
          if (j != i) key[n++] = cells_[c][j];
        }
        std::sort(key.begin(), key.end());
        auto [it, inserted] = lookup.try_emplace(key, static_cast<Index>(facets_.size()));
        if (inserted) {
          Facet<Dim> f;
          f.vertices = key;
          f.cells[0] = static_cast<Index>(c);
          f.local_index[0] = i;
          fill_facet_geometry(f, vertices_[cells_[c][i]]);
          facets_.push_back(f);
        } else {
          Facet<Dim>& f = facets_[it->second];
          if (f.cells[1] >= 0) throw GeometryError("non-manifold facet");
          f.cells[1] = static_cast<Index>(c);
          f.local_index[1] = i;
        }
        cell_facets_[c][i] = it->second;
      }
    }
  }

  // Geometry of a facet; `opposite` is the vertex of cells[0] not on it.
  void fill_facet_geometry(Facet<Dim>& f, const Vec<Dim>& opposite) const {
    std::array<Vec<Dim>, Dim> p;
    for (int i = 0; i < Dim; ++i) p[i] = vertices_[f.vertices[i]];
    f.barycenter = Vec<Dim>::Zero();
    for (const auto& q : p) f.barycenter += q;
    f.barycenter /= double(Dim);
    Vec<Dim> n;
    if constexpr (Dim == 2) {
      const Vec<2> t = p[1] - p[0];
      n = Vec<2>(t(1), -t(0));
      f.measure = t.norm();
    } else {
      const Vec<3> c = (p[1] - p[0]).cross(p[2] - p[0]);
      n = c;
      f.measure = 0.5 * c.norm();
    }
    n.normalize();
    if (n.dot(opposite - p[0]) > 0.0) n = -n;
    f.normal = n;
    double diam = 0.0;
    for (int a = 0; a < Dim; ++a) {
      for (int b = a + 1; b < Dim; ++b) diam = std::max(diam, (p[a] - p[b]).norm());
    }
    f.diameter = diam;
  }

  int subdivisions_;
  std::vector<Vec<Dim>> vertices_;
  std::vector<CellVertices> cells_;
  std::vector<std::array<Index, Dim + 1>> cell_facets_;
  std::vector<Facet<Dim>> facets_;
  std::vector<AffineMap<Dim>> maps_;
  std::vector<double> measures_;
  std::vector<double> diameters_;
};

/// Uniform mesh of the unit square (N^2 squares, each cut along the diagonal
/// from (i, j) to (i+1, j+1)) or cube (N^3 cubes, Kuhn subdivision into six
/// tetrahedra). Cell vertex order gives a positive Jacobian determinant.
template <int Dim>
Mesh<Dim> build_uniform_mesh(int n) {
  static_assert(Dim == 2 || Dim == 3);
  if (n < 1) throw ArgumentError("mesh subdivision count must be at least 1");
  const Index np = n + 1;
  std::vector<Vec<Dim>> vertices;
  std::vector<std::array<Index, Dim + 1>> cells;
  if constexpr (Dim == 2) {
    vertices.reserve(np * np);
    for (Index j = 0; j < np; ++j) {
      for (Index i = 0; i < np; ++i) vertices.emplace_back(double(i) / n, double(j) / n);
    }
    auto id = [np](Index i, Index j) { return i + np * j; };
    cells.reserve(2 * Index(n) * n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) {
        cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  } else {
    vertices.reserve(np * np * np);
    for (Index k = 0; k < np; ++k) {
      for (Index j = 0; j < np; ++j) {
        for (Index i = 0; i < np; ++i) {
          vertices.emplace_back(double(i) / n, double(j) / n, double(k) / n);
        }
      }
    }
    auto id = [np](const std::array<Index, 3>& c) { return c[0] + np * (c[1] + np * c[2]); };
    const auto perms = Mesh<3>::kuhn_permutations();
    cells.reserve(6 * Index(n) * n * n);
    for (Index k = 0; k < n; ++k) {
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
          for (const auto& perm : perms) {
            std::array<Index, 3> c{i, j, k};
            std::array<Index, 4> tet{};
            tet[0] = id(c);
            for (int s = 0; s < 3; ++s) {
              c[perm[s]] += 1;
              tet[s + 1] = id(c);
            }
            // Orientation follows the permutation parity.
            Mat<3> jac;
            for (int s = 0; s < 3; ++s) jac.col(s) = vertices[tet[s + 1]] - vertices[tet[0]];
            if (jac.determinant() < 0.0) std::swap(tet[2], tet[3]);
            cells.push_back(tet);
          }
        }
      }
    }
  }
  return Mesh<Dim>(n, std::move(vertices), std::move(cells));
}

using AnyMesh = std::variant<Mesh<2>, Mesh<3>>;

/// Runtime-dimension entry point.
inline AnyMesh build_uniform_mesh(int dim, int n) {
  if (dim == 2) return build_uniform_mesh<2>(n);
  if (dim == 3) return build_uniform_mesh<3>(n);
  throw ArgumentError("dimension must be 2 or 3, got " + std::to_string(dim));
}

enum class FacetKind { Interior, Inflow, Outflow };

inline const char* to_string(FacetKind k) {
  switch (k) {
    case FacetKind::Interior: return "interior";
    case FacetKind::Inflow: return "inflow";
    case FacetKind::Outflow: return "outflow";
  }
  return "?";
}

template <int Dim>
struct FacetGeometry {
  Vec<Dim> normal;
  double measure;
  double diameter;
  Vec<Dim> barycenter;
};

template <int Dim>
FacetGeometry<Dim> facet_geometry(const Mesh<Dim>& mesh, Index f) {
  if (f < 0 || f >= mesh.n_facets()) throw ArgumentError("facet id out of range");
  const Facet<Dim>& fa = mesh.facet(f);
  return {fa.normal, fa.measure, fa.diameter, fa.barycenter};
}

/// Inflow/outflow label per facet (Interior for interior facets). A boundary
/// facet is Inflow when beta . n < 0 at its barycenter; sample points are
/// checked for a sign change beyond 1e-12 * max|beta|.
template <int Dim>
std::vector<FacetKind> classify_boundary_facets(const Mesh<Dim>& mesh,
                                                const std::function<Vec<Dim>(const Vec<Dim>&)>& beta) {
  std::vector<FacetKind> kinds(mesh.n_facets(), FacetKind::Interior);
  // Sample points: vertices, barycenter and edge midpoints of each facet.
  std::vector<std::pair<Index, std::vector<Vec<Dim>>>> samples;
  double beta_max = 0.0;
  for (Index f = 0; f < mesh.n_facets(); ++f) {
    const Facet<Dim>& fa = mesh.facet(f);
    if (!fa.is_boundary()) continue;
    std::vector<Vec<Dim>> pts;
    pts.push_back(fa.barycenter);
    for (int a = 0; a < Dim; ++a) {
      pts.push_back(mesh.vertex(fa.vertices[a]));
      for (int b = a + 1; b < Dim; ++b) {
        pts.push_back(0.5 * (mesh.vertex(fa.vertices[a]) + mesh.vertex(fa.vertices[b])));
      }
    }
    for (const auto& p : pts) beta_max = std::max(beta_max, beta(p).norm());
    samples.emplace_back(f, std::move(pts));
  }
  const double tau = 1e-12 * beta_max;
  for (const auto& [f, pts] : samples) {
    const Vec<Dim>& n = mesh.facet(f).normal;
    const double bn = beta(pts[0]).dot(n);
    const FacetKind kind = bn < 0.0 ? FacetKind::Inflow : FacetKind::Outflow;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double s = beta(pts[i]).dot(n);
      if ((kind == FacetKind::Inflow && s > tau) || (kind == FacetKind::Outflow && s < -tau)) {
        throw MixedFacetError("boundary facet " + std::to_string(f) +
                              " straddles the inflow and outflow boundary");
      }
    }
    kinds[f] = kind;
  }
  return kinds;
}

}  // namespace supg
