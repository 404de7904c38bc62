#pragma once

// Second-order forward-mode jets. A Jet carries a value together with its
// gradient and Hessian with respect to the Dim spatial coordinates, which is
// all the strong operators need (curl, curl curl, grad(beta . u)).

#include "supg/geometry.hpp"

#include <cmath>
#include <functional>

namespace supg {

template <int Dim>
struct Jet {
  double value = 0.0;
  Vec<Dim> grad = Vec<Dim>::Zero();
  Mat<Dim> hess = Mat<Dim>::Zero();

  Jet() = default;
  Jet(double v) : value(v) {}  // NOLINT: constants promote implicitly

  static Jet variable(double v, int axis) {
    Jet j(v);
    j.grad(axis) = 1.0;
    return j;
  }
};

template <int Dim>
using JetVec = std::array<Jet<Dim>, Dim>;

/// A vector field written once over jets; evaluating it yields the value and
/// all first and second derivatives exactly.
template <int Dim>
using JetField = std::function<JetVec<Dim>(const JetVec<Dim>&)>;

namespace detail {

// Chain rule for a scalar function with derivatives d1, d2 at a.value.
template <int Dim>
Jet<Dim> chain(const Jet<Dim>& a, double f, double d1, double d2) {
  Jet<Dim> r;
  r.value = f;
  r.grad = d1 * a.grad;
  r.hess = d1 * a.hess + d2 * a.grad * a.grad.transpose();
  return r;
}

}  // namespace detail

template <int Dim>
Jet<Dim> operator+(const Jet<Dim>& a, const Jet<Dim>& b) {
  Jet<Dim> r;
  r.value = a.value + b.value;
  r.grad = a.grad + b.grad;
  r.hess = a.hess + b.hess;
  return r;
}

template <int Dim>
Jet<Dim> operator-(const Jet<Dim>& a, const Jet<Dim>& b) {
  Jet<Dim> r;
  r.value = a.value - b.value;
  r.grad = a.grad - b.grad;
  r.hess = a.hess - b.hess;
  return r;
}

template <int Dim>
Jet<Dim> operator-(const Jet<Dim>& a) {
  Jet<Dim> r;
  r.value = -a.value;
  r.grad = -a.grad;
  r.hess = -a.hess;
  return r;
}

template <int Dim>
Jet<Dim> operator*(const Jet<Dim>& a, const Jet<Dim>& b) {
  Jet<Dim> r;
  r.value = a.value * b.value;
  r.grad = a.value * b.grad + b.value * a.grad;
  r.hess = a.value * b.hess + b.value * a.hess + a.grad * b.grad.transpose() +
           b.grad * a.grad.transpose();
  return r;
}

template <int Dim>
Jet<Dim> operator+(const Jet<Dim>& a, double b) {
  Jet<Dim> r = a;
  r.value += b;
  return r;
}
template <int Dim>
Jet<Dim> operator+(double a, const Jet<Dim>& b) {
  return b + a;
}
template <int Dim>
Jet<Dim> operator-(const Jet<Dim>& a, double b) {
  return a + (-b);
}
template <int Dim>
Jet<Dim> operator-(double a, const Jet<Dim>& b) {
  return (-b) + a;
}
template <int Dim>
Jet<Dim> operator*(const Jet<Dim>& a, double b) {
  Jet<Dim> r;
  r.value = a.value * b;
  r.grad = a.grad * b;
  r.hess = a.hess * b;
  return r;
}
template <int Dim>
Jet<Dim> operator*(double a, const Jet<Dim>& b) {
  return b * a;
}

template <int Dim>
Jet<Dim> operator/(const Jet<Dim>& a, const Jet<Dim>& b) {
  const double t = b.value;
  return a * detail::chain(b, 1.0 / t, -1.0 / (t * t), 2.0 / (t * t * t));
}
template <int Dim>
Jet<Dim> operator/(const Jet<Dim>& a, double b) {
  return a * (1.0 / b);
}

template <int Dim>
Jet<Dim> exp(const Jet<Dim>& a) {
  const double e = std::exp(a.value);
  return detail::chain(a, e, e, e);
}

template <int Dim>
Jet<Dim> sin(const Jet<Dim>& a) {
  const double s = std::sin(a.value);
  const double c = std::cos(a.value);
  return detail::chain(a, s, c, -s);
}

template <int Dim>
Jet<Dim> cos(const Jet<Dim>& a) {
  const double s = std::sin(a.value);
  const double c = std::cos(a.value);
  return detail::chain(a, c, -s, -c);
}

/// Coordinate jets at x: x_i with unit gradient along axis i.
template <int Dim>
JetVec<Dim> seed(const Vec<Dim>& x) {
  JetVec<Dim> out;
  for (int i = 0; i < Dim; ++i) out[i] = Jet<Dim>::variable(x(i), i);
  return out;
}

/// Pointwise data of a smooth vector field: value, Jacobian d(i, j) = du_i/dx_j,
/// and per-component Hessians.
template <int Dim>
struct FieldJet {
  Vec<Dim> value;
  Mat<Dim> jacobian;
  std::array<Mat<Dim>, Dim> hessian;

  CurlVec<Dim> curl() const { return curl_from_jacobian<Dim>(jacobian); }
  Vec<Dim> curlcurl() const { return curlcurl_from_hessians<Dim>(hessian); }
  double divergence() const { return jacobian.trace(); }
};

template <int Dim>
FieldJet<Dim> to_field_jet(const JetVec<Dim>& u) {
  FieldJet<Dim> out;
  for (int i = 0; i < Dim; ++i) {
    out.value(i) = u[i].value;
    out.jacobian.row(i) = u[i].grad.transpose();
    out.hessian[i] = u[i].hess;
  }
  return out;
}

template <int Dim>
FieldJet<Dim> evaluate_jet(const JetField<Dim>& field, const Vec<Dim>& x) {
  return to_field_jet<Dim>(field(seed<Dim>(x)));
}

}  // namespace supg
