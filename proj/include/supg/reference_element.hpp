#pragma once

// Second-kind Nedelec element of degree k in {1, 2} on the reference simplex.
//
// The local space is the full (P_k)^Dim. Degrees of freedom:
//   edges  : int_0^1 u(x(s)) . (x_b - x_a) q_j(s) ds, q_j orthonormal Legendre
//            on [0, 1], j = 0..k, edge oriented from its lower to higher vertex;
//   faces  : (3D, k = 2) int_F u . (x - p_m) normalized by 2|F|, one per face
//            vertex p_m;
//   cells  : (2D, k = 2) int_T u . (x - p_m) on the reference cell, m = 0..2.
// All functionals are invariant under the covariant Piola map.

#include "supg/geometry.hpp"
#include "supg/quadrature.hpp"

#include <Eigen/LU>

#include <cmath>
#include <vector>

namespace supg {

namespace detail {

inline double legendre01(int j, double s) {
  switch (j) {
    case 0: return 1.0;
    case 1: return std::sqrt(3.0) * (2.0 * s - 1.0);
    case 2: return std::sqrt(5.0) * (6.0 * s * s - 6.0 * s + 1.0);
    default: throw ArgumentError("Legendre degree out of range");
  }
}

inline double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace detail

/// Edge moment j of a field along the segment a -> b.
template <int Dim, class Field>
double edge_moment(const Field& u, const Vec<Dim>& a, const Vec<Dim>& b, int j,
                   const QuadratureRule<1>& rule) {
  const Vec<Dim> e = b - a;
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double s = rule.points[q](0);
    sum += rule.weights[q] * u(Vec<Dim>(a + s * e)).dot(e) * detail::legendre01(j, s);
  }
  return sum;
}

/// Face moment of a field against x - p_m over the triangle (p0, p1, p2),
/// integrated in the parameter domain (i.e. divided by 2|F|).
template <class Field>
double face_moment(const Field& u, const std::array<Vec<3>, 3>& p, int m,
                   const QuadratureRule<2>& rule) {
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec<3> x = p[0] + rule.points[q](0) * (p[1] - p[0]) + rule.points[q](1) * (p[2] - p[0]);
    sum += rule.weights[q] * u(x).dot(x - p[m]);
  }
  return sum;
}

template <int Dim>
class NedelecReference {
 public:
  static constexpr int n_vertices = Dim + 1;
  static constexpr int n_edges = Dim == 2 ? 3 : 6;
  static constexpr int n_faces = Dim == 2 ? 0 : 4;

  /// Reference tabulation at one point: values (Dim x n), Jacobians and,
  /// optionally, Hessians of each component.
  struct Tabulation {
    Eigen::Matrix<double, Dim, Eigen::Dynamic> value;
    std::vector<Mat<Dim>> jacobian;
    std::vector<std::array<Mat<Dim>, Dim>> hessian;
  };

  explicit NedelecReference(int degree) : degree_(degree) {
    if (degree != 1 && degree != 2) {
      throw ArgumentError("Nedelec degree must be 1 or 2, got " + std::to_string(degree));
    }
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        if constexpr (Dim == 2) {
          exponents_.push_back({a, b});
        } else {
          for (int c = 0; a + b + c <= degree; ++c) exponents_.push_back({a, b, c});
        }
      }
    }
    n_dofs_ = Dim * static_cast<int>(exponents_.size());
    edge_rule_ = simplex_quadrature<1>(2 * degree + 2);
    if constexpr (Dim == 3) face_rule_ = simplex_quadrature<2>(degree + 2);
    cell_rule_ = simplex_quadrature<Dim>(degree + 2);

    // Duality matrix against the monomial spanning set; the basis is its inverse.
    Eigen::MatrixXd dual(n_dofs_, n_dofs_);
    for (int p = 0; p < n_dofs_; ++p) {
      const int mono = p / Dim;
      const int comp = p % Dim;
      auto psi = [&](const Vec<Dim>& xi) {
        Vec<Dim> v = Vec<Dim>::Zero();
        v(comp) = monomial(mono, xi);
        return v;
      };
      dual.col(p) = apply_functionals(psi);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(dual);
    coeffs_ = lu.inverse();
  }

  int degree() const { return degree_; }
  int n_dofs() const { return n_dofs_; }
  int dofs_per_edge() const { return degree_ + 1; }
  int dofs_per_face() const { return (Dim == 3 && degree_ == 2) ? 3 : 0; }
  int n_interior_dofs() const { return (Dim == 2 && degree_ == 2) ? 3 : 0; }

  int edge_dof(int e, int j) const { return e * dofs_per_edge() + j; }
  int face_dof(int f, int m) const { return n_edges * dofs_per_edge() + f * 3 + m; }
  int interior_dof(int m) const { return n_edges * dofs_per_edge() + m; }

  /// Local edges as vertex pairs (a, b), a < b.
  static std::array<std::array<int, 2>, n_edges> edges() {
    if constexpr (Dim == 2) {
      return {{{0, 1}, {0, 2}, {1, 2}}};
    } else {
      return {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    }
  }

  /// Local face i is opposite vertex i; vertices ascending.
  static std::array<std::array<int, 3>, 4> faces() {
    return {{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};
  }

  static Vec<Dim> vertex(int i) {
    Vec<Dim> v = Vec<Dim>::Zero();
    if (i > 0) v(i - 1) = 1.0;
    return v;
  }

  /// All local functionals applied to a reference field, in local DOF order.
  template <class Field>
  Eigen::VectorXd apply_functionals(const Field& u) const {
    Eigen::VectorXd out(n_dofs_);
    const auto eds = edges();
    for (int e = 0; e < n_edges; ++e) {
      for (int j = 0; j <= degree_; ++j) {
        out(edge_dof(e, j)) =
            edge_moment<Dim>(u, vertex(eds[e][0]), vertex(eds[e][1]), j, edge_rule_);
      }
    }
    if constexpr (Dim == 3) {
      if (dofs_per_face() > 0) {
        const auto fcs = faces();
        for (int f = 0; f < 4; ++f) {
          const std::array<Vec<3>, 3> p{vertex(fcs[f][0]), vertex(fcs[f][1]), vertex(fcs[f][2])};
          for (int m = 0; m < 3; ++m) out(face_dof(f, m)) = face_moment(u, p, m, face_rule_);
        }
      }
    }
    for (int m = 0; m < n_interior_dofs(); ++m) out(interior_dof(m)) = interior_moment(u, m);
    return out;
  }

  /// Interior moment m on the reference cell.
  template <class Field>
  double interior_moment(const Field& u, int m) const {
    double sum = 0.0;
    for (std::size_t q = 0; q < cell_rule_.size(); ++q) {
      const Vec<Dim>& xi = cell_rule_.points[q];
      sum += cell_rule_.weights[q] * u(xi).dot(xi - vertex(m));
    }
    return sum;
  }

  Tabulation tabulate(const Vec<Dim>& xi, bool with_hessian = false) const {
    const int nm = static_cast<int>(exponents_.size());
    std::vector<double> val(nm);
    std::vector<Vec<Dim>> grad(nm);
    std::vector<Mat<Dim>> hess(with_hessian ? nm : 0);
    for (int a = 0; a < nm; ++a) {
      const auto& e = exponents_[a];
      val[a] = monomial(a, xi);
      for (int l = 0; l < Dim; ++l) {
        if (e[l] == 0) {
          grad[a](l) = 0.0;
          continue;
        }
        auto d = e;
        d[l] -= 1;
        grad[a](l) = e[l] * eval_exponent(d, xi);
      }
      if (with_hessian) {
        for (int l = 0; l < Dim; ++l) {
          for (int m = 0; m < Dim; ++m) {
            auto d = e;
            double f = d[l];
            d[l] -= 1;
            if (f == 0.0) {
              hess[a](l, m) = 0.0;
              continue;
            }
            f *= d[m];
            d[m] -= 1;
            hess[a](l, m) = f == 0.0 ? 0.0 : f * eval_exponent(d, xi);
          }
        }
      }
    }
    Tabulation t;
    t.value.setZero(Dim, n_dofs_);
    t.jacobian.assign(n_dofs_, Mat<Dim>::Zero());
    if (with_hessian) {
      std::array<Mat<Dim>, Dim> zero;
      for (auto& z : zero) z.setZero();
      t.hessian.assign(n_dofs_, zero);
    }
    for (int j = 0; j < n_dofs_; ++j) {
      for (int p = 0; p < n_dofs_; ++p) {
        const double c = coeffs_(p, j);
        if (c == 0.0) continue;
        const int a = p / Dim;
        const int comp = p % Dim;
        t.value(comp, j) += c * val[a];
        t.jacobian[j].row(comp) += c * grad[a].transpose();
        if (with_hessian) t.hessian[j][comp] += c * hess[a];
      }
    }
    return t;
  }

  /// Coefficients of the basis in the monomial spanning set; column j is
  /// basis function j, row a * Dim + i is monomial a in component i.
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }

 private:
  double eval_exponent(const std::array<int, Dim>& e, const Vec<Dim>& xi) const {
    double r = 1.0;
    for (int l = 0; l < Dim; ++l) {
      if (e[l] < 0) return 0.0;
      r *= detail::ipow(xi(l), e[l]);
    }
    return r;
  }

  double monomial(int a, const Vec<Dim>& xi) const { return eval_exponent(exponents_[a], xi); }

  int degree_;
  int n_dofs_ = 0;
  std::vector<std::array<int, Dim>> exponents_;
  Eigen::MatrixXd coeffs_;
  QuadratureRule<1> edge_rule_;
  QuadratureRule<2> face_rule_;
  QuadratureRule<Dim> cell_rule_;
};

}  // namespace supg
