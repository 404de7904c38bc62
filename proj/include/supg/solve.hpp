#pragma once

// Linear solves and the nonlinear SOLD iteration.

#include "supg/forms.hpp"

#include <Eigen/SparseLU>
#ifdef SUPG_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <iostream>

namespace supg {

struct SolveReport {
  int iterations = 0;
  double final_update = 0.0;
  bool converged = false;
  std::vector<double> updates;
  std::vector<double> residuals;  // relative residual of each linear solve
};

/// Direct sparse solve; throws SolverError when the factorization fails.
inline Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                                    double* relative_residual = nullptr) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw ArgumentError("system dimensions do not match");
  Eigen::VectorXd x;
  if (a.rows() == 0) {
    x.resize(0);
  } else {
#ifdef SUPG_HAVE_UMFPACK
    Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
#else
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
#endif
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SolverError("sparse factorization failed (singular matrix?)");
    x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw SolverError("sparse solve failed");
  }
  if (relative_residual) {
    const double nb = b.norm();
    const double nr = (a * x - b).norm();
    *relative_residual = nb > 0.0 ? nr / nb : nr;
  }
  return x;
}

/// Solve the linear (Galerkin, S1, S2 or SUPG) scheme; returns global coefficients.
template <int Dim>
Eigen::VectorXd solve_linear(const Discretization<Dim>& disc, double* relative_residual = nullptr) {
  const ReducedSystem red = disc.apply_dirichlet(disc.assemble());
  return red.expand(solve_sparse(red.matrix, red.rhs, relative_residual));
}

/// Minimal-norm solution of G z = b for symmetric positive semidefinite G;
/// eigenvalues below 1e-12 trace(G) are treated as zero.
template <int Dim>
Vec<Dim> minimal_norm_solve(const Mat<Dim>& g, const Vec<Dim>& b) {
  const double tau = 1e-12 * g.trace();
  Vec<Dim> z = Vec<Dim>::Zero();
  if (!(g.trace() > 0.0)) return z;
  Eigen::SelfAdjointEigenSolver<Mat<Dim>> es(g);
  for (int i = 0; i < Dim; ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > tau) {
      const Vec<Dim> v = es.eigenvectors().col(i);
      z += v * (v.dot(b) / lam);
    }
  }
  return z;
}

/// Piecewise constant SOLD direction on one cell: the minimal-norm minimizer
/// of ||M(u) z - R~(u)||_T, where column j of M(u) is L~_{e_j} u.
template <int Dim>
Vec<Dim> compute_sold_z(const Discretization<Dim>& disc, const CellData<Dim>& cd, const Eigen::VectorXd& u) {
  Eigen::VectorXd up(cd.patch_size());
  for (int i = 0; i < cd.patch_size(); ++i) up(i) = u(cd.patch[i]);
  const Eigen::MatrixXd phi = cd.stacked_values();
  const Eigen::MatrixXd lt = disc.discrete_advection(cd, disc.advective_lifting(cd), phi);
  const Eigen::VectorXd residual = disc.modified_operator(cd, lt, phi) * up - disc.effective_source(cd, phi);
  const int rows = Dim * cd.n_points();
  Eigen::MatrixXd m(rows, Dim);
  for (int j = 0; j < Dim; ++j) {
    m.col(j) = disc.directional_advection(cd, Vec<Dim>::Unit(j), phi) * up;
  }
  const Eigen::VectorXd w = disc.stacked_weights(cd);
  const Mat<Dim> g = m.transpose() * w.asDiagonal() * m;
  const Vec<Dim> b = m.transpose() * w.asDiagonal() * residual;
  return minimal_norm_solve<Dim>(g, b);
}

struct SoldOptions {
  double damping = 0.5;
  double tolerance = 1e-8;
  int max_iterations = 50;
  bool verbose = false;
};

template <int Dim>
struct SoldResult {
  Eigen::VectorXd coefficients;
  std::vector<Vec<Dim>> z;
  SolveReport report;
};

/// Damped Picard iteration with z frozen per step, started from SUPG.
template <int Dim>
SoldResult<Dim> solve_sold(const Discretization<Dim>& disc, const SoldOptions& opt = {}) {
  const AssembledSystem<Dim> base = disc.assemble();
  const Eigen::VectorXd bvals = disc.boundary_values();
  const auto& bdofs = disc.space().boundary_dofs();
  SoldResult<Dim> out;
  double res = 0.0;
  {
    const ReducedSystem red = eliminate(base.matrix, base.rhs, bdofs, bvals);
    out.coefficients = red.expand(solve_sparse(red.matrix, red.rhs, &res));
    out.report.residuals.push_back(res);
  }
  const Index nc = disc.space().mesh().n_cells();
  out.z.assign(nc, Vec<Dim>::Zero());
  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (Index c = 0; c < nc; ++c) {
      out.z[c] = disc.sigma(c) == 0.0 ? Vec<Dim>::Zero()
                                      : compute_sold_z(disc, disc.cell_data(c), out.coefficients);
    }
    const AssembledSystem<Dim> sold = disc.assemble_sold_term(out.z);
    const ReducedSystem red = eliminate(base.matrix + sold.matrix, base.rhs + sold.rhs, bdofs, bvals);
    const Eigen::VectorXd next = red.expand(solve_sparse(red.matrix, red.rhs, &res));
    out.report.residuals.push_back(res);
    const Eigen::VectorXd damped = opt.damping * next + (1.0 - opt.damping) * out.coefficients;
    const double scale = damped.norm();
    const double update = (damped - out.coefficients).norm() / (scale > 0.0 ? scale : 1.0);
    out.coefficients = damped;
    out.report.iterations = it;
    out.report.final_update = update;
    out.report.updates.push_back(update);
    if (opt.verbose) std::cout << "sold iteration " << it << " relative update " << update << '\n';
    if (update <= opt.tolerance) {
      out.report.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace supg
