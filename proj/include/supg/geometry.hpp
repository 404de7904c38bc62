#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace supg {

using Index = std::int64_t;

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;

template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

/// Number of components of the curl: a scalar in 2D, a vector in 3D.
template <int Dim>
inline constexpr int curl_dim = Dim == 2 ? 1 : 3;

template <int Dim>
using CurlVec = Eigen::Matrix<double, curl_dim<Dim>, 1>;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class MixedFacetError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// Curl of a field with Jacobian d(i, j) = du_i / dx_j.
template <int Dim>
CurlVec<Dim> curl_from_jacobian(const Mat<Dim>& d) {
  if constexpr (Dim == 2) {
    return CurlVec<2>(d(1, 0) - d(0, 1));
  } else {
    return CurlVec<3>(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
  }
}

// curl curl u = grad(div u) - laplace(u), from the component Hessians.
template <int Dim>
Vec<Dim> curlcurl_from_hessians(const std::array<Mat<Dim>, Dim>& hess) {
  Vec<Dim> out = Vec<Dim>::Zero();
  for (int i = 0; i < Dim; ++i) {
    for (int j = 0; j < Dim; ++j) {
      out(i) += hess[j](i, j) - hess[i](j, j);
    }
  }
  return out;
}

/// a x c where c is a curl value. In 2D c is the out-of-plane component,
/// so a x (0, 0, c) = (a_2 c, -a_1 c).
template <int Dim>
Vec<Dim> cross_curl(const Vec<Dim>& a, const CurlVec<Dim>& c) {
  if constexpr (Dim == 2) {
    return Vec<2>(a(1) * c(0), -a(0) * c(0));
  } else {
    return a.cross(c);
  }
}

/// In-plane cross product; a scalar (stored as a 1-vector) in 2D.
template <int Dim>
CurlVec<Dim> cross(const Vec<Dim>& a, const Vec<Dim>& b) {
  if constexpr (Dim == 2) {
    return CurlVec<2>(a(0) * b(1) - a(1) * b(0));
  } else {
    return a.cross(b);
  }
}

/// Rotation by pi/2 used by the reduced 2D operators, R = [[0, 1], [-1, 0]].
inline Mat<2> rotation_matrix() {
  Mat<2> r;
  r << 0.0, 1.0, -1.0, 0.0;
  return r;
}

}  // namespace supg
