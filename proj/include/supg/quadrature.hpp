#pragma once

// Simplex quadrature by collapsed (Duffy) products of Gauss-Jacobi rules.

#include "supg/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace supg {

/// Points in reference coordinates of the unit simplex
/// {xi_i >= 0, sum xi_i <= 1}; weights sum to its measure 1/D!.
template <int D>
struct QuadratureRule {
  std::vector<Vec<D>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
};

inline constexpr int max_quadrature_degree = 12;

/// Gauss-Jacobi rule on [0, 1] for the weight (1 - t)^a with n points.
inline std::pair<std::vector<double>, std::vector<double>> gauss_jacobi(int n, int a) {
  // Golub-Welsch on [-1, 1] with weight (1 - x)^a (1 + x)^0.
  const double al = a;
  const double be = 0.0;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double s = 2.0 * i + al + be;
    jac(i, i) = i == 0 ? (be - al) / (al + be + 2.0) : (be * be - al * al) / (s * (s + 2.0));
    if (i + 1 < n) {
      const double k = i + 1;
      const double t = 2.0 * k + al + be;
      const double off = std::sqrt(4.0 * k * (k + al) * (k + be) * (k + al + be) /
                                   (t * t * (t + 1.0) * (t - 1.0)));
      jac(i, i + 1) = off;
      jac(i + 1, i) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  // mu0 = integral of (1 - x)^a over [-1, 1] = 2^(a+1) / (a+1).
  const double mu0 = std::pow(2.0, al + 1.0) / (al + 1.0);
  std::vector<double> pts(n), wts(n);
  for (int i = 0; i < n; ++i) {
    const double x = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    pts[i] = 0.5 * (x + 1.0);
    wts[i] = mu0 * v * v / std::pow(2.0, al + 1.0);
  }
  return {pts, wts};
}

/// Rule on the reference D-simplex (D = 1, 2, 3) exact for polynomials of
/// total degree <= degree.
template <int D>
QuadratureRule<D> simplex_quadrature(int degree) {
  static_assert(D >= 1 && D <= 3);
  if (degree < 0 || degree > max_quadrature_degree) {
    throw ArgumentError("unsupported quadrature degree " + std::to_string(degree));
  }
  const int n = degree / 2 + 1;
  QuadratureRule<D> rule;
  rule.degree = degree;
  const auto [s, ws] = gauss_jacobi(n, 0);
  if constexpr (D == 1) {
    for (int i = 0; i < n; ++i) {
      rule.points.push_back(Vec<1>(s[i]));
      rule.weights.push_back(ws[i]);
    }
  } else if constexpr (D == 2) {
    const auto [t, wt] = gauss_jacobi(n, 1);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        rule.points.push_back(Vec<2>(s[i] * (1.0 - t[j]), t[j]));
        rule.weights.push_back(ws[i] * wt[j]);
      }
    }
  } else {
    const auto [t, wt] = gauss_jacobi(n, 1);
    const auto [r, wr] = gauss_jacobi(n, 2);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const double x3 = r[k];
          const double x2 = t[j] * (1.0 - r[k]);
          const double x1 = s[i] * (1.0 - t[j]) * (1.0 - r[k]);
          rule.points.push_back(Vec<3>(x1, x2, x3));
          rule.weights.push_back(ws[i] * wt[j] * wr[k]);
        }
      }
    }
  }
  return rule;
}

/// Quadrature on a physical facet given by its Dim vertices: physical points
/// and weights scaled to the facet measure.
template <int Dim>
struct FacetQuadrature {
  std::vector<Vec<Dim>> points;
  std::vector<double> weights;
};

template <int Dim>
FacetQuadrature<Dim> map_facet_rule(const QuadratureRule<Dim - 1>& rule,
                                    const std::array<Vec<Dim>, Dim>& corners, double measure) {
  double ref_measure = 1.0;
  for (int i = 2; i < Dim; ++i) ref_measure /= i;
  FacetQuadrature<Dim> out;
  out.points.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    Vec<Dim> x = corners[0];
    for (int i = 0; i < Dim - 1; ++i) x += rule.points[q](i) * (corners[i + 1] - corners[0]);
    out.points.push_back(x);
    out.weights.push_back(rule.weights[q] * measure / ref_measure);
  }
  return out;
}

}  // namespace supg
