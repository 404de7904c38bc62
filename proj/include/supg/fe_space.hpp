#pragma once

#include "supg/mesh.hpp"
#include "supg/quadrature.hpp"
#include "supg/reference_element.hpp"

#include <map>
#include <span>
#include <vector>

namespace supg {

/// Basis functions of one cell at one point, in physical coordinates and
/// already multiplied by the global orientation signs. Column j is local DOF j.
template <int Dim>
struct ShapeValues {
  Eigen::Matrix<double, Dim, Eigen::Dynamic> value;
  std::vector<Mat<Dim>> jacobian;
  Eigen::Matrix<double, curl_dim<Dim>, Eigen::Dynamic> curl;
  Eigen::Matrix<double, Dim, Eigen::Dynamic> curlcurl;  // empty unless requested

  int size() const { return static_cast<int>(value.cols()); }
};

/// H(curl)-conforming space of second-kind Nedelec elements on a mesh.
///
/// Global edge functionals are oriented from the lower to the higher global
/// vertex index, so a cell's local basis function equals +/- the global one
/// (sign (-1)^(j+1) for moment j on a reversed edge). Face moments are tied to
/// face vertices, so faces need a permutation and no signs.
template <int Dim>
class FeSpace {
 public:
  using Reference = NedelecReference<Dim>;
  static constexpr int n_local_edges = Reference::n_edges;

  FeSpace(const Mesh<Dim>& mesh, int degree) : mesh_(&mesh), ref_(degree) {
    build_edges();
    build_dof_map();
  }

  const Mesh<Dim>& mesh() const { return *mesh_; }
  const Reference& reference() const { return ref_; }
  int degree() const { return ref_.degree(); }
  int dofs_per_cell() const { return ref_.n_dofs(); }
  Index n_dofs() const { return n_dofs_; }
  Index n_edges() const { return static_cast<Index>(edges_.size()); }
  const std::array<Index, 2>& edge(Index e) const { return edges_[e]; }

  std::span<const Index> cell_dofs(Index c) const {
    return {dofs_.data() + c * ref_.n_dofs(), static_cast<std::size_t>(ref_.n_dofs())};
  }
  std::span<const double> cell_signs(Index c) const {
    return {signs_.data() + c * ref_.n_dofs(), static_cast<std::size_t>(ref_.n_dofs())};
  }

  /// DOFs whose functionals live on boundary edges or faces, ascending.
  const std::vector<Index>& boundary_dofs() const { return boundary_dofs_; }
  bool is_boundary_dof(Index d) const { return boundary_mask_[d]; }

  /// Map a reference tabulation to cell c (covariant Piola).
  ShapeValues<Dim> map(Index c, const typename Reference::Tabulation& t) const {
    const AffineMap<Dim>& m = mesh_->map(c);
    const Mat<Dim> jinv_t = m.inverse.transpose();
    const int n = ref_.n_dofs();
    const auto sg = cell_signs(c);
    ShapeValues<Dim> s;
    s.value = jinv_t * t.value;
    s.jacobian.resize(n);
    s.curl.resize(curl_dim<Dim>, n);
    for (int j = 0; j < n; ++j) {
      s.value.col(j) *= sg[j];
      s.jacobian[j] = sg[j] * (jinv_t * t.jacobian[j] * m.inverse);
      const CurlVec<Dim> ref_curl = curl_from_jacobian<Dim>(t.jacobian[j]);
      if constexpr (Dim == 2) {
        s.curl.col(j) = sg[j] * ref_curl / m.det;
      } else {
        s.curl.col(j) = sg[j] * (m.jacobian * ref_curl) / m.det;
      }
    }
    if (!t.hessian.empty()) {
      s.curlcurl.resize(Dim, n);
      for (int j = 0; j < n; ++j) {
        std::array<Mat<Dim>, Dim> h;
        for (int i = 0; i < Dim; ++i) {
          h[i].setZero();
          for (int a = 0; a < Dim; ++a) {
            h[i] += jinv_t(i, a) * (jinv_t * t.hessian[j][a] * m.inverse);
          }
        }
        s.curlcurl.col(j) = sg[j] * curlcurl_from_hessians<Dim>(h);
      }
    }
    return s;
  }

  ShapeValues<Dim> shape_values(Index c, const Vec<Dim>& xi, bool with_second = false) const {
    return map(c, ref_.tabulate(xi, with_second));
  }

  /// Canonical interpolation: every global functional applied to u.
  template <class Field>
  Eigen::VectorXd interpolate(const Field& u) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_dofs_);
    const int pe = ref_.dofs_per_edge();
    for (Index e = 0; e < n_edges(); ++e) {
      const Vec<Dim>& a = mesh_->vertex(edges_[e][0]);
      const Vec<Dim>& b = mesh_->vertex(edges_[e][1]);
      for (int j = 0; j < pe; ++j) out(e * pe + j) = edge_moment<Dim>(u, a, b, j, edge_rule_);
    }
    if constexpr (Dim == 3) {
      if (ref_.dofs_per_face() > 0) {
        for (Index f = 0; f < mesh_->n_facets(); ++f) {
          const auto p = face_corners(f);
          for (int m = 0; m < 3; ++m) out(face_offset_ + 3 * f + m) = face_moment(u, p, m, face_rule_);
        }
      }
    }
    if (ref_.n_interior_dofs() > 0) {
      for (Index c = 0; c < mesh_->n_cells(); ++c) {
        const AffineMap<Dim>& m = mesh_->map(c);
        auto pulled = [&](const Vec<Dim>& xi) -> Vec<Dim> {
          return m.jacobian.transpose() * u(m.to_physical(xi));
        };
        for (int i = 0; i < ref_.n_interior_dofs(); ++i) {
          out(interior_offset_ + 3 * c + i) = ref_.interior_moment(pulled, i);
        }
      }
    }
    return out;
  }

  /// Values of the boundary functionals for tangential data trace(x, n); only
  /// the tangential part of the returned vector matters. Ordered as
  /// boundary_dofs().
  template <class Trace>
  Eigen::VectorXd interpolate_boundary(const Trace& trace) const {
    std::map<Index, double> values;
    const int pe = ref_.dofs_per_edge();
    for (Index e = 0; e < n_edges(); ++e) {
      const Index f = edge_boundary_facet_[e];
      if (f < 0) continue;
      const Vec<Dim> n = mesh_->facet(f).normal;
      auto u = [&](const Vec<Dim>& x) -> Vec<Dim> { return trace(x, n); };
      const Vec<Dim>& a = mesh_->vertex(edges_[e][0]);
      const Vec<Dim>& b = mesh_->vertex(edges_[e][1]);
      for (int j = 0; j < pe; ++j) values[e * pe + j] = edge_moment<Dim>(u, a, b, j, edge_rule_);
    }
    if constexpr (Dim == 3) {
      if (ref_.dofs_per_face() > 0) {
        for (Index f = 0; f < mesh_->n_facets(); ++f) {
          if (!mesh_->facet(f).is_boundary()) continue;
          const Vec<3> n = mesh_->facet(f).normal;
          auto u = [&](const Vec<3>& x) -> Vec<3> { return trace(x, n); };
          const auto p = face_corners(f);
          for (int m = 0; m < 3; ++m) values[face_offset_ + 3 * f + m] = face_moment(u, p, m, face_rule_);
        }
      }
    }
    Eigen::VectorXd out(boundary_dofs_.size());
    for (std::size_t i = 0; i < boundary_dofs_.size(); ++i) out(i) = values.at(boundary_dofs_[i]);
    return out;
  }

  /// Position of a global edge's DOFs relative to a cell's local edge.
  struct LocalEdge {
    Index global;
    bool reversed;
  };
  LocalEdge local_edge(Index c, int e) const { return cell_edges_[c * n_local_edges + e]; }

 private:
  std::array<Vec<3>, 3> face_corners(Index f) const {
    const auto& fv = mesh_->facet(f).vertices;
    std::array<Vec<3>, 3> p;
    for (int i = 0; i < 3; ++i) {
      for (int d = 0; d < Dim; ++d) p[i](d) = mesh_->vertex(fv[i])(d);
    }
    return p;
  }

  void build_edges() {
    std::map<std::array<Index, 2>, Index> lookup;
    const auto eds = Reference::edges();
    cell_edges_.resize(mesh_->n_cells() * n_local_edges);
    for (Index c = 0; c < mesh_->n_cells(); ++c) {
      const auto& cv = mesh_->cell(c);
      for (int e = 0; e < n_local_edges; ++e) {
        const Index a = cv[eds[e][0]];
        const Index b = cv[eds[e][1]];
        const std::array<Index, 2> key{std::min(a, b), std::max(a, b)};
        auto [it, inserted] = lookup.try_emplace(key, static_cast<Index>(edges_.size()));
        if (inserted) edges_.push_back(key);
        cell_edges_[c * n_local_edges + e] = {it->second, a > b};
      }
    }
    edge_boundary_facet_.assign(edges_.size(), -1);
    for (Index f = 0; f < mesh_->n_facets(); ++f) {
      const Facet<Dim>& fa = mesh_->facet(f);
      if (!fa.is_boundary()) continue;
      for (int a = 0; a < Dim; ++a) {
        for (int b = a + 1; b < Dim; ++b) {
          const Index e = lookup.at({fa.vertices[a], fa.vertices[b]});
          if (edge_boundary_facet_[e] < 0) edge_boundary_facet_[e] = f;
        }
      }
    }
    edge_rule_ = simplex_quadrature<1>(2 * ref_.degree() + 6);
    if constexpr (Dim == 3) face_rule_ = simplex_quadrature<2>(2 * ref_.degree() + 4);
  }

  void build_dof_map() {
    const int n = ref_.n_dofs();
    const int pe = ref_.dofs_per_edge();
    face_offset_ = n_edges() * pe;
    const Index n_face_dofs = Dim == 3 ? mesh_->n_facets() * ref_.dofs_per_face() : 0;
    interior_offset_ = face_offset_ + n_face_dofs;
    n_dofs_ = interior_offset_ + mesh_->n_cells() * ref_.n_interior_dofs();
    dofs_.resize(mesh_->n_cells() * n);
    signs_.assign(mesh_->n_cells() * n, 1.0);
    for (Index c = 0; c < mesh_->n_cells(); ++c) {
      Index* d = dofs_.data() + c * n;
      double* s = signs_.data() + c * n;
      for (int e = 0; e < n_local_edges; ++e) {
        const LocalEdge le = local_edge(c, e);
        for (int j = 0; j < pe; ++j) {
          d[ref_.edge_dof(e, j)] = le.global * pe + j;
          if (le.reversed && j % 2 == 0) s[ref_.edge_dof(e, j)] = -1.0;
        }
      }
      if (ref_.dofs_per_face() > 0) {
        const auto fcs = Reference::faces();
        const auto& cv = mesh_->cell(c);
        for (int f = 0; f < Reference::n_faces; ++f) {
          const Index gf = mesh_->cell_facet(c, f);
          const auto& fv = mesh_->facet(gf).vertices;
          for (int m = 0; m < 3; ++m) {
            const Index gv = cv[fcs[f][m]];
            const int slot = static_cast<int>(std::find(fv.begin(), fv.end(), gv) - fv.begin());
            d[ref_.face_dof(f, m)] = face_offset_ + 3 * gf + slot;
          }
        }
      }
      for (int m = 0; m < ref_.n_interior_dofs(); ++m) {
        d[ref_.interior_dof(m)] = interior_offset_ + 3 * c + m;
      }
    }
    boundary_mask_.assign(n_dofs_, false);
    for (Index e = 0; e < n_edges(); ++e) {
      if (edge_boundary_facet_[e] < 0) continue;
      for (int j = 0; j < pe; ++j) boundary_mask_[e * pe + j] = true;
    }
    if (Dim == 3 && ref_.dofs_per_face() > 0) {
      for (Index f = 0; f < mesh_->n_facets(); ++f) {
        if (!mesh_->facet(f).is_boundary()) continue;
        for (int m = 0; m < 3; ++m) boundary_mask_[face_offset_ + 3 * f + m] = true;
      }
    }
    for (Index i = 0; i < n_dofs_; ++i) {
      if (boundary_mask_[i]) boundary_dofs_.push_back(i);
    }
  }

  const Mesh<Dim>* mesh_;
  Reference ref_;
  std::vector<std::array<Index, 2>> edges_;
  std::vector<LocalEdge> cell_edges_;
  std::vector<Index> edge_boundary_facet_;
  std::vector<Index> dofs_;
  std::vector<double> signs_;
  std::vector<bool> boundary_mask_;
  std::vector<Index> boundary_dofs_;
  Index n_dofs_ = 0;
  Index face_offset_ = 0;
  Index interior_offset_ = 0;
  QuadratureRule<1> edge_rule_;
  QuadratureRule<2> face_rule_;
};

/// A finite element function: coefficients of the global basis.
template <int Dim>
class DiscreteField {
 public:
  DiscreteField(const FeSpace<Dim>& space, Eigen::VectorXd coefficients)
      : space_(&space), coeffs_(std::move(coefficients)) {
    if (coeffs_.size() != space.n_dofs()) {
      throw ArgumentError("coefficient vector length does not match the space");
    }
  }

  const FeSpace<Dim>& space() const { return *space_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }

  Eigen::VectorXd local_coefficients(Index c) const {
    const auto d = space_->cell_dofs(c);
    Eigen::VectorXd out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out(i) = coeffs_(d[i]);
    return out;
  }

  Vec<Dim> value(Index c, const Vec<Dim>& xi) const {
    return space_->shape_values(c, xi).value * local_coefficients(c);
  }

  CurlVec<Dim> curl(Index c, const Vec<Dim>& xi) const {
    return space_->shape_values(c, xi).curl * local_coefficients(c);
  }

  /// Value at a physical point; interface points use the lower-side cell.
  Vec<Dim> operator()(const Vec<Dim>& x) const {
    const auto [c, xi] = space_->mesh().locate(x);
    return value(c, xi);
  }

 private:
  const FeSpace<Dim>* space_;
  Eigen::VectorXd coeffs_;
};

}  // namespace supg
