#pragma once

// Error norms, convergence orders and layer diagnostics.

#include "supg/forms.hpp"

#include <cmath>
#include <limits>

namespace supg {

/// Squared contributions to the energy norm.
struct EnergyNormParts {
  double curl = 0.0;           // eps ||curl e||^2
  double l2 = 0.0;             // w ||e||^2, w = 1 unless a weight is requested
  double advection = 0.0;      // sum_T delta_T ||L~ e||_T^2
  double interior_jump = 0.0;  // 1/2 sum_F <|[alpha] beta . n|, |[[e]]|^2>
  double boundary = 0.0;       // 1/2 sum_F <|beta . n|, |e|^2> on the boundary

  double total() const { return curl + l2 + advection + interior_jump + boundary; }
  double norm() const { return std::sqrt(total()); }
};

struct ErrorNorms {
  double l2_error = 0.0;
  EnergyNormParts energy;
  double energy_error() const { return energy.norm(); }
};

/// Exactness used for error integrals.
inline int error_quadrature_degree(int k) { return 2 * k + 4; }

/// L2 and energy errors of u_h against the exact solution. The stabilization
/// setup determines alpha and delta_T exactly as in the solve; with centered
/// alpha the interior jump part vanishes, which gives the S2-only norm.
template <int Dim>
ErrorNorms error_norms(const FeSpace<Dim>& space, const ProblemSpec<Dim>& spec, const Eigen::VectorXd& uh,
                       StabilizationConfig config, double l2_weight = 1.0) {
  if (!spec.has_exact()) throw ArgumentError("error norms need an exact solution");
  config.cell_degree = config.facet_degree = error_quadrature_degree(space.degree());
  const Discretization<Dim> disc(space, spec, config);
  const Mesh<Dim>& mesh = space.mesh();
  ErrorNorms out;
  double l2 = 0.0;
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    const CellData<Dim> cd = disc.cell_data(c);
    Eigen::VectorXd up(cd.patch_size());
    for (int i = 0; i < cd.patch_size(); ++i) up(i) = uh(cd.patch[i]);
    const Eigen::VectorXd ut = up.head(cd.n);
    Eigen::VectorXd lth;
    Eigen::VectorXd exact_lift;
    if (cd.delta > 0.0) {
      const Eigen::MatrixXd phi = cd.stacked_values();
      lth = disc.discrete_advection(cd, disc.advective_lifting(cd), phi) * up;
      exact_lift = disc.lifting_apply(cd, [&](const FacetPoint<Dim>& fp) -> Vec<Dim> {
        if (fp.kind != FacetKind::Inflow) return Vec<Dim>::Zero();
        return spec.beta_value(fp.x).dot(fp.normal) * spec.exact_jet(fp.x).value;
      });
    }
    for (int q = 0; q < cd.n_points(); ++q) {
      const FieldJet<Dim> u = spec.exact_jet(cd.points[q]);
      const Vec<Dim> e = u.value - cd.shapes[q].value * ut;
      const CurlVec<Dim> ce = u.curl() - cd.shapes[q].curl * ut;
      const double w = cd.weights[q];
      l2 += w * e.squaredNorm();
      out.energy.curl += w * spec.epsilon * ce.squaredNorm();
      if (cd.delta > 0.0) {
        const Vec<Dim> lu = lie_advection<Dim>(cd.beta[q], u) - cd.shapes[q].value * exact_lift;
        const Vec<Dim> le = lu - lth.segment(q * Dim, Dim);
        out.energy.advection += w * cd.delta * le.squaredNorm();
      }
    }
  }
  out.l2_error = std::sqrt(l2);
  out.energy.l2 = l2_weight * l2;

  // Facet parts.
  const auto rule = simplex_quadrature<Dim - 1>(error_quadrature_degree(space.degree()));
  const DiscreteField<Dim> field(space, uh);
  for (Index f = 0; f < mesh.n_facets(); ++f) {
    const Facet<Dim>& fa = mesh.facet(f);
    std::array<Vec<Dim>, Dim> corners;
    for (int a = 0; a < Dim; ++a) corners[a] = mesh.vertex(fa.vertices[a]);
    const FacetQuadrature<Dim> fq = map_facet_rule<Dim>(rule, corners, fa.measure);
    for (std::size_t q = 0; q < fq.points.size(); ++q) {
      const Vec<Dim>& x = fq.points[q];
      const double bn = spec.beta_value(x).dot(fa.normal);
      const Index c0 = fa.cells[0];
      const Vec<Dim> v0 = field.value(c0, mesh.map(c0).to_reference(x));
      if (fa.is_boundary()) {
        const Vec<Dim> e = spec.exact_jet(x).value - v0;
        out.energy.boundary += 0.5 * fq.weights[q] * std::abs(bn) * e.squaredNorm();
      } else {
        const double ap = alpha_plus(config, bn);
        const double jump_alpha = 2.0 * ap - 1.0;
        if (jump_alpha == 0.0) continue;
        const Index c1 = fa.cells[1];
        const Vec<Dim> v1 = field.value(c1, mesh.map(c1).to_reference(x));
        out.energy.interior_jump += 0.5 * fq.weights[q] * std::abs(jump_alpha * bn) * (v0 - v1).squaredNorm();
      }
    }
  }
  return out;
}

/// Sparse matrix E with v^T E v = |||v|||^2 for discrete v (l2 part weighted).
template <int Dim>
Eigen::SparseMatrix<double> energy_matrix(const Discretization<Dim>& disc, double l2_weight) {
  const FeSpace<Dim>& space = disc.space();
  const Mesh<Dim>& mesh = space.mesh();
  const Index nd = space.n_dofs();
  const double eps = disc.spec().epsilon;
  TripletAccumulator acc(nd, nd);
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    const CellData<Dim> cd = disc.cell_data(c);
    const Eigen::MatrixXd phi = cd.stacked_values();
    const Eigen::VectorXd w = disc.stacked_weights(cd);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(cd.patch_size(), cd.patch_size());
    local.topLeftCorner(cd.n, cd.n) += l2_weight * phi.transpose() * w.asDiagonal() * phi;
    for (int q = 0; q < cd.n_points(); ++q) {
      local.topLeftCorner(cd.n, cd.n) += cd.weights[q] * eps * cd.shapes[q].curl.transpose() * cd.shapes[q].curl;
    }
    if (cd.delta > 0.0) {
      const Eigen::MatrixXd lt = disc.discrete_advection(cd, disc.advective_lifting(cd), phi);
      local += cd.delta * lt.transpose() * w.asDiagonal() * lt;
    }
    for (int j = 0; j < cd.patch_size(); ++j) {
      for (int i = 0; i < cd.patch_size(); ++i) acc.add(cd.patch[i], cd.patch[j], local(i, j));
    }
  }
  const auto rule = simplex_quadrature<Dim - 1>(2 * space.degree() + 2);
  for (Index f = 0; f < mesh.n_facets(); ++f) {
    const Facet<Dim>& fa = mesh.facet(f);
    std::array<Vec<Dim>, Dim> corners;
    for (int a = 0; a < Dim; ++a) corners[a] = mesh.vertex(fa.vertices[a]);
    const FacetQuadrature<Dim> fq = map_facet_rule<Dim>(rule, corners, fa.measure);
    const int n = space.dofs_per_cell();
    const int sides = fa.is_boundary() ? 1 : 2;
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(sides * n, sides * n);
    for (std::size_t q = 0; q < fq.points.size(); ++q) {
      const Vec<Dim>& x = fq.points[q];
      const double bn = disc.spec().beta_value(x).dot(fa.normal);
      double coef = 0.5 * std::abs(bn);
      if (!fa.is_boundary()) coef *= std::abs(2.0 * alpha_plus(disc.config(), bn) - 1.0);
      if (coef == 0.0) continue;
      Eigen::MatrixXd jump(Dim, sides * n);
      for (int s = 0; s < sides; ++s) {
        const Index c = fa.cells[s];
        jump.middleCols(s * n, n) = (s == 0 ? 1.0 : -1.0) * space.shape_values(c, mesh.map(c).to_reference(x)).value;
      }
      local += fq.weights[q] * coef * jump.transpose() * jump;
    }
    for (int a = 0; a < sides * n; ++a) {
      const Index ga = space.cell_dofs(fa.cells[a / n])[a % n];
      for (int b = 0; b < sides * n; ++b) {
        const Index gb = space.cell_dofs(fa.cells[b / n])[b % n];
        acc.add(ga, gb, local(a, b));
      }
    }
  }
  return acc.finish();
}

// ---------------------------------------------------------------------------
// Convergence tables

struct ErrorRecord {
  int n = 0;
  Index dofs = 0;
  double l2_error = 0.0;
  double l2_order = std::numeric_limits<double>::quiet_NaN();
  double energy_error = 0.0;
  double energy_order = std::numeric_limits<double>::quiet_NaN();
  double seconds = std::numeric_limits<double>::quiet_NaN();
};

/// Orders between consecutive rows, log2(e_prev / e_curr); N must double.
inline void convergence_orders(std::vector<ErrorRecord>& records) {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].n != 2 * records[i - 1].n) {
      throw ArgumentError("convergence orders need N to double between rows");
    }
    records[i].l2_order = std::log2(records[i - 1].l2_error / records[i].l2_error);
    records[i].energy_order = std::log2(records[i - 1].energy_error / records[i].energy_error);
  }
}

// ---------------------------------------------------------------------------
// Layer diagnostics

struct Oscillation {
  double overshoot = 0.0;
  double undershoot = 0.0;
};

/// Axis-aligned sampling box [lo, hi] with `per_axis` points per direction.
template <int Dim>
struct SampleBox {
  Vec<Dim> lo;
  Vec<Dim> hi;
  int per_axis = 41;

  std::vector<Vec<Dim>> points() const {
    if (per_axis < 1) throw ArgumentError("empty sampling box");
    for (int i = 0; i < Dim; ++i) {
      if (hi(i) < lo(i)) throw ArgumentError("empty sampling box");
    }
    std::vector<Vec<Dim>> out;
    Index total = 1;
    for (int i = 0; i < Dim; ++i) total *= per_axis;
    for (Index idx = 0; idx < total; ++idx) {
      Index r = idx;
      Vec<Dim> x;
      for (int i = 0; i < Dim; ++i) {
        const int j = static_cast<int>(r % per_axis);
        r /= per_axis;
        x(i) = per_axis == 1 ? lo(i) : lo(i) + (hi(i) - lo(i)) * j / double(per_axis - 1);
      }
      out.push_back(x);
    }
    return out;
  }
};

/// Range of one component of a field over a box.
template <int Dim>
std::pair<double, double> sample_range(const DiscreteField<Dim>& field, int component, const SampleBox<Dim>& box) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& x : box.points()) {
    const double v = field(x)(component);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

template <int Dim>
Oscillation oscillation_metric(const DiscreteField<Dim>& field, int component, const SampleBox<Dim>& box,
                               double lower, double upper) {
  const auto [lo, hi] = sample_range(field, component, box);
  return {std::max(0.0, hi - upper), std::max(0.0, lower - lo)};
}

struct SectionSample {
  double coordinate;
  double value;
};

/// Samples of one component along the segment a -> b; the coordinate is the
/// distance from a.
template <int Dim>
std::vector<SectionSample> cross_section(const DiscreteField<Dim>& field, int component, const Vec<Dim>& a,
                                         const Vec<Dim>& b, int samples) {
  if (samples < 2) throw ArgumentError("a cross-section needs at least two samples");
  for (int i = 0; i < Dim; ++i) {
    if (std::min(a(i), b(i)) < 0.0 || std::max(a(i), b(i)) > 1.0) {
      throw ArgumentError("cross-section line leaves the unit domain");
    }
  }
  std::vector<SectionSample> out;
  const double len = (b - a).norm();
  for (int s = 0; s < samples; ++s) {
    const double t = double(s) / (samples - 1);
    const Vec<Dim> x = a + t * (b - a);
    out.push_back({t * len, field(x)(component)});
  }
  return out;
}

/// Mean |value| inside (lo, hi) divided by the mean outside.
inline double plateau_ratio(const std::vector<SectionSample>& section, double lo, double hi) {
  double in = 0.0, out = 0.0;
  int nin = 0, nout = 0;
  for (const auto& s : section) {
    if (s.coordinate > lo && s.coordinate < hi) {
      in += std::abs(s.value);
      ++nin;
    } else {
      out += std::abs(s.value);
      ++nout;
    }
  }
  if (nin == 0) return 0.0;
  in /= nin;
  out = nout > 0 ? out / nout : 0.0;
  return out > 0.0 ? in / out : std::numeric_limits<double>::infinity();
}

/// Largest absolute component of u_a - u_b (same space) over a lattice of
/// order 4 on each cell plus the cell quadrature points.
template <int Dim>
double max_norm_difference(const FeSpace<Dim>& space, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const DiscreteField<Dim> diff(space, a - b);
  std::vector<Vec<Dim>> pts;
  const int order = 4;
  if constexpr (Dim == 2) {
    for (int i = 0; i <= order; ++i) {
      for (int j = 0; i + j <= order; ++j) pts.emplace_back(double(i) / order, double(j) / order);
    }
  } else {
    for (int i = 0; i <= order; ++i) {
      for (int j = 0; i + j <= order; ++j) {
        for (int l = 0; i + j + l <= order; ++l) pts.emplace_back(double(i) / order, double(j) / order, double(l) / order);
      }
    }
  }
  for (const auto& p : simplex_quadrature<Dim>(2 * space.degree() + 3).points) pts.push_back(p);
  std::vector<typename NedelecReference<Dim>::Tabulation> tabs;
  for (const auto& p : pts) tabs.push_back(space.reference().tabulate(p));
  double m = 0.0;
  for (Index c = 0; c < space.mesh().n_cells(); ++c) {
    const Eigen::VectorXd local = diff.local_coefficients(c);
    for (const auto& t : tabs) m = std::max(m, (space.map(c, t).value * local).cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace supg
