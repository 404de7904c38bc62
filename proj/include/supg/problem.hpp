#pragma once

// PDE data for  curl(eps curl u) - beta x curl u + grad(beta . u) + gamma u = f
// with the boundary condition  n x u + chi_in (u . n) n = g  (3D) or its
// rotated 2D analogue  (Rn . u) Rn + chi_in (u . n) n = g.

#include "supg/jet.hpp"
#include "supg/mesh.hpp"

#include <Eigen/Eigenvalues>

#include <numbers>
#include <optional>
#include <string>

namespace supg {

template <int Dim>
using ScalarFunction = std::function<double(const Vec<Dim>&)>;
template <int Dim>
using VectorFunction = std::function<Vec<Dim>(const Vec<Dim>&)>;
/// Boundary data g(x, n) at a boundary point with outward unit normal n.
template <int Dim>
using BoundaryFunction = std::function<Vec<Dim>(const Vec<Dim>&, const Vec<Dim>&)>;

template <int Dim>
struct ProblemSpec {
  std::string name;
  double epsilon = 1.0;
  JetField<Dim> beta;
  ScalarFunction<Dim> gamma;
  bool gamma_is_zero = false;
  VectorFunction<Dim> source;
  BoundaryFunction<Dim> boundary;
  std::optional<JetField<Dim>> exact;

  bool has_exact() const { return exact.has_value(); }

  Vec<Dim> beta_value(const Vec<Dim>& x) const {
    const JetVec<Dim> b = beta(seed<Dim>(x));
    Vec<Dim> out;
    for (int i = 0; i < Dim; ++i) out(i) = b[i].value;
    return out;
  }

  /// Value and Jacobian of beta.
  FieldJet<Dim> beta_jet(const Vec<Dim>& x) const { return evaluate_jet<Dim>(beta, x); }

  FieldJet<Dim> exact_jet(const Vec<Dim>& x) const {
    if (!exact) throw ArgumentError("problem '" + name + "' has no exact solution");
    return evaluate_jet<Dim>(*exact, x);
  }

  VectorFunction<Dim> beta_function() const {
    return [b = beta](const Vec<Dim>& x) {
      const JetVec<Dim> j = b(seed<Dim>(x));
      Vec<Dim> out;
      for (int i = 0; i < Dim; ++i) out(i) = j[i].value;
      return out;
    };
  }
};

// ---------------------------------------------------------------------------
// Lie advection and its formal dual

/// L_beta u = -beta x curl u + grad(beta . u) from pointwise data.
template <int Dim>
Vec<Dim> lie_advection(const Vec<Dim>& beta, const CurlVec<Dim>& curl_u,
                       const Vec<Dim>& grad_beta_dot_u) {
  return -cross_curl<Dim>(beta, curl_u) + grad_beta_dot_u;
}

template <int Dim>
Vec<Dim> lie_advection(const FieldJet<Dim>& beta, const FieldJet<Dim>& u) {
  const Vec<Dim> grad_bu = beta.jacobian.transpose() * u.value + u.jacobian.transpose() * beta.value;
  return lie_advection<Dim>(beta.value, u.curl(), grad_bu);
}

/// Same operator written with Jacobians: (Du) beta + (D beta)^T u.
template <int Dim>
Vec<Dim> lie_advection_jacobian(const Vec<Dim>& beta, const Mat<Dim>& dbeta, const Vec<Dim>& u,
                                const Mat<Dim>& du) {
  return du * beta + dbeta.transpose() * u;
}

/// Rotated 2D form  -R beta div(R u) + grad(beta . u).
inline Vec<2> lie_advection_rotated(const FieldJet<2>& beta, const FieldJet<2>& u) {
  const Mat<2> r = rotation_matrix();
  const Mat<2> d_ru = r * u.jacobian;
  const double div_ru = d_ru.trace();
  const Vec<2> grad_bu = beta.jacobian.transpose() * u.value + u.jacobian.transpose() * beta.value;
  return -(r * beta.value) * div_ru + grad_bu;
}

/// Dual operator curl(beta x v) - beta div v, differentiated through jets.
template <int Dim>
Vec<Dim> lie_advection_dual(const JetVec<Dim>& beta, const JetVec<Dim>& v) {
  Jet<Dim> div_v;
  for (int i = 0; i < Dim; ++i) div_v = div_v + Jet<Dim>(v[i].grad(i));
  Vec<Dim> out;
  if constexpr (Dim == 2) {
    const Jet<2> s = beta[0] * v[1] - beta[1] * v[0];
    out << s.grad(1), -s.grad(0);
  } else {
    const std::array<Jet<3>, 3> w{beta[1] * v[2] - beta[2] * v[1], beta[2] * v[0] - beta[0] * v[2],
                                  beta[0] * v[1] - beta[1] * v[0]};
    out << w[2].grad(1) - w[1].grad(2), w[0].grad(2) - w[2].grad(0), w[1].grad(0) - w[0].grad(1);
  }
  for (int i = 0; i < Dim; ++i) out(i) -= beta[i].value * div_v.value;
  return out;
}

/// Closed form of the dual: -(div beta) v + (D beta) v - (Dv) beta.
template <int Dim>
Vec<Dim> lie_advection_dual_jacobian(const Vec<Dim>& beta, const Mat<Dim>& dbeta, const Vec<Dim>& v,
                                     const Mat<Dim>& dv) {
  return -dbeta.trace() * v + dbeta * v - dv * beta;
}

// ---------------------------------------------------------------------------
// Boundary traces

/// Tangential part of u recovered from boundary data g.
template <int Dim>
Vec<Dim> tangential_trace(const Vec<Dim>& g, const Vec<Dim>& n) {
  if constexpr (Dim == 2) {
    const Vec<2> rn = rotation_matrix() * n;
    return rn.dot(g) * rn;
  } else {
    return g.cross(n);
  }
}

/// Full trace of u on an inflow facet, reconstructed from g.
template <int Dim>
Vec<Dim> inflow_trace(const Vec<Dim>& g, const Vec<Dim>& n) {
  return tangential_trace<Dim>(g, n) + g.dot(n) * n;
}

/// The boundary operator applied to a field value.
template <int Dim>
Vec<Dim> boundary_operator(const Vec<Dim>& u, const Vec<Dim>& n, bool inflow) {
  Vec<Dim> g;
  if constexpr (Dim == 2) {
    const Vec<2> rn = rotation_matrix() * n;
    g = rn.dot(u) * rn;
  } else {
    g = n.cross(u);
  }
  if (inflow) g += u.dot(n) * n;
  return g;
}

// ---------------------------------------------------------------------------
// Friedrichs condition

struct FriedrichsReport {
  double min_rho = 0.0;
  Index samples = 0;
  bool pass = false;
};

/// Smallest eigenvalue of (gamma - div beta / 2) I + (D beta + D beta^T) / 2.
template <int Dim>
double friedrichs_rho_at(const ProblemSpec<Dim>& spec, const Vec<Dim>& x) {
  const FieldJet<Dim> b = spec.beta_jet(x);
  const Mat<Dim> s = (spec.gamma(x) - 0.5 * b.divergence()) * Mat<Dim>::Identity() +
                     0.5 * (b.jacobian + b.jacobian.transpose());
  Eigen::SelfAdjointEigenSolver<Mat<Dim>> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Samples at cell barycenters and mesh vertices.
template <int Dim>
FriedrichsReport friedrichs_rho(const ProblemSpec<Dim>& spec, const Mesh<Dim>& mesh, double rho0) {
  FriedrichsReport r;
  r.min_rho = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    r.min_rho = std::min(r.min_rho, friedrichs_rho_at(spec, mesh.cell_barycenter(c)));
    ++r.samples;
  }
  for (const auto& v : mesh.vertices()) {
    r.min_rho = std::min(r.min_rho, friedrichs_rho_at(spec, v));
    ++r.samples;
  }
  r.pass = r.min_rho >= rho0;
  return r;
}

// ---------------------------------------------------------------------------
// Problem construction

/// Data manufactured from an exact solution: f from the strong operator, g
/// from the boundary operator with the inflow indicator taken from beta.
template <int Dim>
ProblemSpec<Dim> make_manufactured(std::string name, double epsilon, JetField<Dim> beta,
                                   ScalarFunction<Dim> gamma, JetField<Dim> exact) {
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  ProblemSpec<Dim> p;
  p.name = std::move(name);
  p.epsilon = epsilon;
  p.beta = beta;
  p.gamma = gamma;
  p.exact = exact;
  p.source = [epsilon, beta, gamma, exact](const Vec<Dim>& x) {
    const FieldJet<Dim> b = evaluate_jet<Dim>(beta, x);
    const FieldJet<Dim> u = evaluate_jet<Dim>(exact, x);
    return Vec<Dim>(epsilon * u.curlcurl() + lie_advection<Dim>(b, u) + gamma(x) * u.value);
  };
  p.boundary = [beta, exact](const Vec<Dim>& x, const Vec<Dim>& n) {
    const JetVec<Dim> bj = beta(seed<Dim>(x));
    const JetVec<Dim> uj = exact(seed<Dim>(x));
    Vec<Dim> b, u;
    for (int i = 0; i < Dim; ++i) {
      b(i) = bj[i].value;
      u(i) = uj[i].value;
    }
    return boundary_operator<Dim>(u, n, b.dot(n) < 0.0);
  };
  return p;
}

template <int Dim>
JetField<Dim> constant_velocity(const Vec<Dim>& b) {
  return [b](const JetVec<Dim>&) {
    JetVec<Dim> out;
    for (int i = 0; i < Dim; ++i) out[i] = Jet<Dim>(b(i));
    return out;
  };
}

template <int Dim>
ProblemSpec<Dim> make_layer_problem(std::string name, double epsilon, const Vec<Dim>& beta,
                                    VectorFunction<Dim> source) {
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  ProblemSpec<Dim> p;
  p.name = std::move(name);
  p.epsilon = epsilon;
  p.beta = constant_velocity<Dim>(beta);
  p.gamma = [](const Vec<Dim>&) { return 0.0; };
  p.gamma_is_zero = true;
  p.source = std::move(source);
  p.boundary = [](const Vec<Dim>&, const Vec<Dim>&) { return Vec<Dim>::Zero().eval(); };
  return p;
}

inline constexpr double default_epsilon = 1e-6;

/// Spatial dimension of a preset (example 3 runs in either).
inline int example_dimension(int id) {
  switch (id) {
    case 1: return 3;
    case 2: case 3: case 4: case 5: case 6: return 2;
    default: throw ArgumentError("example id must be in 1..6, got " + std::to_string(id));
  }
}

inline double example_default_epsilon(int id) { return id == 5 ? 1e-3 : default_epsilon; }

namespace detail {

inline ProblemSpec<3> example1(double eps) {
  JetField<3> beta = [](const JetVec<3>& x) {
    return JetVec<3>{1.0 - x[2] * 0.5, 2.0 + x[0], 3.0 - x[1]};
  };
  JetField<3> u = [](const JetVec<3>& x) {
    return JetVec<3>{x[1] * exp(x[0] * x[2]), -(x[0] * x[0] * x[1]), sin(x[0] * x[1] * x[2])};
  };
  return make_manufactured<3>("example1", eps, beta, [](const Vec<3>&) { return 8.0; }, u);
}

inline ProblemSpec<2> example2(double eps) {
  JetField<2> beta = [](const JetVec<2>& x) { return JetVec<2>{x[1] - 0.5, 0.5 - x[0]}; };
  JetField<2> u = [](const JetVec<2>& x) {
    const double pi = std::numbers::pi;
    return JetVec<2>{16.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]),
                     exp(x[0]) * sin(pi * x[0]) * sin(pi * x[1])};
  };
  return make_manufactured<2>("example2", eps, beta, [](const Vec<2>&) { return 1.0; }, u);
}

}  // namespace detail

/// Experiment presets 1..6.
template <int Dim>
ProblemSpec<Dim> make_example(int id, double eps) {
  const int native = example_dimension(id);
  if (id != 3 && native != Dim) {
    throw ArgumentError("example " + std::to_string(id) + " is defined in " + std::to_string(native) +
                        "D only");
  }
  if constexpr (Dim == 3) {
    auto p = detail::example1(eps);
    if (id == 3) p.name = "example3";
    return p;
  } else {
    switch (id) {
      case 2:
      case 3: {
        auto p = detail::example2(eps);
        if (id == 3) p.name = "example3";
        return p;
      }
      case 4:
        return make_layer_problem<2>("example4", eps, Vec<2>(1.0, 2.0),
                                     [](const Vec<2>&) { return Vec<2>(1.0, 1.0); });
      case 5:
        return make_layer_problem<2>("example5", eps, Vec<2>(1.0, 0.0), [](const Vec<2>& x) {
          return (x(1) > 0.25 && x(1) < 0.75) ? Vec<2>(1.0, 1.0) : Vec<2>(0.0, 0.0);
        });
      case 6:
        return make_layer_problem<2>("example6", eps, Vec<2>(1.0, 0.0),
                                     [](const Vec<2>&) { return Vec<2>(1.0, 0.0); });
      default:
        break;
    }
  }
  throw ArgumentError("example id must be in 1..6, got " + std::to_string(id));
}

}  // namespace supg
