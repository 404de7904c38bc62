#pragma once

// Facet-by-facet evaluation of the upwind coupling, written without the
// cell patches or local mass solves used by the assembly. It serves as an
// oracle for the lifting identity
//   sum_F <beta . n+, [[u]] . {v}_alpha>_F + sum_{F inflow} <beta . n, u . v>_F
//     = sum_T (r_alpha(beta . n+ [[u]]), v)_T.

#include "supg/forms.hpp"

namespace supg::testing {

template <int Dim>
double facet_sum_form(const Discretization<Dim>& disc, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const FeSpace<Dim>& space = disc.space();
  const Mesh<Dim>& mesh = space.mesh();
  const DiscreteField<Dim> fu(space, u), fv(space, v);
  const auto rule = simplex_quadrature<Dim - 1>(2 * space.degree() + 2);
  double total = 0.0;
  for (Index f = 0; f < mesh.n_facets(); ++f) {
    const Facet<Dim>& fa = mesh.facet(f);
    std::array<Vec<Dim>, Dim> corners;
    for (int a = 0; a < Dim; ++a) corners[a] = mesh.vertex(fa.vertices[a]);
    const FacetQuadrature<Dim> fq = map_facet_rule<Dim>(rule, corners, fa.measure);
    for (std::size_t q = 0; q < fq.points.size(); ++q) {
      const Vec<Dim>& x = fq.points[q];
      const Index cp = fa.cells[0];
      const Vec<Dim> up = fu.value(cp, mesh.map(cp).to_reference(x));
      const Vec<Dim> vp = fv.value(cp, mesh.map(cp).to_reference(x));
      // fa.normal points out of fa.cells[0]
      const double bn = disc.spec().beta_value(x).dot(fa.normal);
      if (fa.is_boundary()) {
        if (disc.facet_kinds()[f] == FacetKind::Inflow) total += fq.weights[q] * bn * up.dot(vp);
        continue;
      }
      const Index cm = fa.cells[1];
      const Vec<Dim> um = fu.value(cm, mesh.map(cm).to_reference(x));
      const Vec<Dim> vm = fv.value(cm, mesh.map(cm).to_reference(x));
      const double ap = alpha_plus(disc.config(), bn);
      total += fq.weights[q] * bn * (up - um).dot(ap * vp + (1.0 - ap) * vm);
    }
  }
  return total;
}

/// The same quantity through the element liftings.
template <int Dim>
double lifted_form(const Discretization<Dim>& disc, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  double total = 0.0;
  for (Index c = 0; c < disc.space().mesh().n_cells(); ++c) {
    const CellData<Dim> cd = disc.cell_data(c);
    Eigen::VectorXd up(cd.patch_size());
    for (int i = 0; i < cd.patch_size(); ++i) up(i) = u(cd.patch[i]);
    Eigen::VectorXd vt(cd.n);
    for (int i = 0; i < cd.n; ++i) vt(i) = v(cd.patch[i]);
    const Eigen::VectorXd lift = disc.advective_lifting(cd) * up;
    total += vt.dot(cd.mass * lift);
  }
  return total;
}

}  // namespace supg::testing
