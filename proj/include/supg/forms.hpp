#pragma once

// Discrete forms of the SUPG scheme. Everything is assembled cell by cell:
// the discrete advection on T, L~ v = L_beta v - r_alpha(beta . n [[v]]),
// involves the traces of v from the facet neighbours of T, so every cell
// works on a patch of DOFs (T plus its neighbours).

#include "supg/fe_space.hpp"
#include "supg/problem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Sparse>

#include <functional>
#include <optional>

namespace supg {

enum class AlphaRule { Upwind, Centered, Custom };
enum class DeltaRule { Zero, PerN, Regime };
enum class Variant { Galerkin, S1Only, S2Only, Supg, Sold };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Galerkin: return "none";
    case Variant::S1Only: return "s1";
    case Variant::S2Only: return "s2";
    case Variant::Supg: return "supg";
    case Variant::Sold: return "sold";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "none" || s == "galerkin") return Variant::Galerkin;
  if (s == "s1" || s == "s1_only") return Variant::S1Only;
  if (s == "s2" || s == "s2_only") return Variant::S2Only;
  if (s == "supg") return Variant::Supg;
  if (s == "sold") return Variant::Sold;
  throw ArgumentError("unknown variant '" + s + "' (expected none, s1, s2, supg or sold)");
}

struct StabilizationConfig {
  AlphaRule alpha = AlphaRule::Upwind;
  std::function<double(double)> custom_alpha_plus;  // alpha+ from beta . n+
  DeltaRule delta = DeltaRule::PerN;
  double c0 = 0.4;  // delta = c0 / N, or c0 h in the advective regime
  double c1 = 1.0;  // delta = c1 h^2 / eps in the diffusive regime
  bool cap_delta = false;
  double c_inv = -1.0;  // negative: measure on the mesh
  double rho0 = 1.0;
  double sigma = 0.0;  // SOLD: sigma_T = sigma / N
  int cell_degree = -1;   // quadrature exactness, -1 for 2k + 3
  int facet_degree = -1;  // -1 for 2k + 2
};

/// Preset configuration of each variant.
inline StabilizationConfig variant_config(Variant v, double c0 = 0.4, double sigma = 1.1) {
  StabilizationConfig c;
  c.c0 = c0;
  switch (v) {
    case Variant::Galerkin:
      c.alpha = AlphaRule::Centered;
      c.delta = DeltaRule::Zero;
      break;
    case Variant::S1Only:
      c.delta = DeltaRule::Zero;
      break;
    case Variant::S2Only:
      c.alpha = AlphaRule::Centered;
      break;
    case Variant::Supg:
      break;
    case Variant::Sold:
      c.sigma = sigma;
      break;
  }
  return c;
}

/// alpha+ on an interior facet for a given beta . n+.
inline double alpha_plus(const StabilizationConfig& cfg, double beta_n_plus) {
  switch (cfg.alpha) {
    case AlphaRule::Upwind: return beta_n_plus > 0.0 ? 0.0 : 1.0;
    case AlphaRule::Centered: return 0.5;
    case AlphaRule::Custom:
      if (!cfg.custom_alpha_plus) throw ArgumentError("custom alpha rule without a weight function");
      return cfg.custom_alpha_plus(beta_n_plus);
  }
  return 0.5;
}

/// Largest C with ||curl curl v||_T <= C h_T^-1 ||curl v||_T over all cells,
/// from a generalized eigenproblem restricted to the range of the curl.
template <int Dim>
double measure_c_inv(const FeSpace<Dim>& space) {
  const int k = space.degree();
  const auto rule = simplex_quadrature<Dim>(2 * k);
  std::vector<typename NedelecReference<Dim>::Tabulation> tabs;
  for (const auto& p : rule.points) tabs.push_back(space.reference().tabulate(p, true));
  const int n = space.dofs_per_cell();
  double best = 0.0;
  const Mesh<Dim>& mesh = space.mesh();
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    const double jac = mesh.map(c).det;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const ShapeValues<Dim> s = space.map(c, tabs[q]);
      const double w = rule.weights[q] * jac;
      a += w * s.curlcurl.transpose() * s.curlcurl;
      b += w * s.curl.transpose() * s.curl;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(b);
    const double top = eb.eigenvalues().maxCoeff();
    if (top <= 0.0) continue;
    std::vector<int> keep;
    for (int i = 0; i < n; ++i) {
      if (eb.eigenvalues()(i) > 1e-10 * top) keep.push_back(i);
    }
    Eigen::MatrixXd p(n, keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      p.col(i) = eb.eigenvectors().col(keep[i]) / std::sqrt(eb.eigenvalues()(keep[i]));
    }
    const Eigen::MatrixXd reduced = p.transpose() * a * p;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(reduced, Eigen::EigenvaluesOnly);
    const double lam = std::max(0.0, er.eigenvalues().maxCoeff());
    best = std::max(best, std::sqrt(lam) * mesh.cell_diameter(c));
  }
  return best;
}

/// One quadrature point on the boundary of a cell.
template <int Dim>
struct FacetPoint {
  Vec<Dim> x;
  double weight = 0.0;
  Vec<Dim> normal;       // outward normal of the cell
  double alpha = 0.0;    // weight of this cell's side
  int local_facet = 0;
  FacetKind kind = FacetKind::Interior;
  ShapeValues<Dim> own;                            // this cell's basis at x
  Eigen::Matrix<double, Dim, Eigen::Dynamic> other;  // neighbour's basis, empty on the boundary
};

/// Everything one cell kernel needs: patch numbering, mapped shapes and
/// coefficients at the cell quadrature points, and facet point data.
template <int Dim>
struct CellData {
  using Block = Eigen::Matrix<double, Dim, Eigen::Dynamic>;

  Index cell = 0;
  int n = 0;
  std::vector<Index> patch;  // first n entries: the cell's own DOFs
  std::array<std::vector<int>, Dim + 1> neighbor_slots;  // per local facet, local -> patch
  std::vector<double> weights;
  std::vector<Vec<Dim>> points;
  std::vector<ShapeValues<Dim>> shapes;
  std::vector<FieldJet<Dim>> beta;
  std::vector<double> gamma;
  std::vector<Vec<Dim>> source;
  std::vector<FacetPoint<Dim>> facet_points;
  Eigen::MatrixXd mass;
  Eigen::LDLT<Eigen::MatrixXd> mass_solver;
  double delta = 0.0;

  int patch_size() const { return static_cast<int>(patch.size()); }
  int n_points() const { return static_cast<int>(weights.size()); }

  /// Basis values stacked over quadrature points: row q * Dim + i.
  Eigen::MatrixXd stacked_values() const {
    Eigen::MatrixXd out(Dim * n_points(), n);
    for (int q = 0; q < n_points(); ++q) out.middleRows(q * Dim, Dim) = shapes[q].value;
    return out;
  }
};

/// Sparse accumulation in bounded batches of triplets.
class TripletAccumulator {
 public:
  TripletAccumulator(Index rows, Index cols, std::size_t batch = 4'000'000)
      : rows_(rows), cols_(cols), batch_(batch), sum_(rows, cols) {
    buffer_.reserve(std::min<std::size_t>(batch, 1'000'000));
  }

  void add(Index i, Index j, double v) {
    if (v == 0.0) return;
    buffer_.emplace_back(i, j, v);
    if (buffer_.size() >= batch_) flush();
  }

  Eigen::SparseMatrix<double> finish() {
    flush();
    sum_.makeCompressed();
    return std::move(sum_);
  }

 private:
  void flush() {
    if (buffer_.empty()) return;
    Eigen::SparseMatrix<double> part(rows_, cols_);
    part.setFromTriplets(buffer_.begin(), buffer_.end());
    buffer_.clear();
    sum_ += part;
  }

  Index rows_, cols_;
  std::size_t batch_;
  std::vector<Eigen::Triplet<double, Index>> buffer_;
  Eigen::SparseMatrix<double> sum_;
};

template <int Dim>
struct AssembledSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

/// A system restricted to the free DOFs with the constrained values moved
/// to the right-hand side.
struct ReducedSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::vector<Index> free_dofs;
  std::vector<Index> constrained_dofs;
  Eigen::VectorXd constrained_values;
  Index n_total = 0;

  Eigen::VectorXd expand(const Eigen::VectorXd& free_values) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_total);
    for (std::size_t i = 0; i < free_dofs.size(); ++i) out(free_dofs[i]) = free_values(i);
    for (std::size_t i = 0; i < constrained_dofs.size(); ++i) out(constrained_dofs[i]) = constrained_values(i);
    return out;
  }

  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const {
    Eigen::VectorXd out(free_dofs.size());
    for (std::size_t i = 0; i < free_dofs.size(); ++i) out(i) = full(free_dofs[i]);
    return out;
  }
};

/// Eliminate the listed DOFs: A_ff x_f = b_f - A_fc x_c.
inline ReducedSystem eliminate(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                               const std::vector<Index>& constrained, const Eigen::VectorXd& values) {
  ReducedSystem r;
  r.n_total = a.rows();
  r.constrained_dofs = constrained;
  r.constrained_values = values;
  std::vector<Index> slot(a.rows(), -1);
  std::vector<double> fixed(a.rows(), 0.0);
  std::vector<bool> is_fixed(a.rows(), false);
  for (std::size_t i = 0; i < constrained.size(); ++i) {
    is_fixed[constrained[i]] = true;
    fixed[constrained[i]] = values(i);
  }
  for (Index i = 0; i < a.rows(); ++i) {
    if (!is_fixed[i]) {
      slot[i] = static_cast<Index>(r.free_dofs.size());
      r.free_dofs.push_back(i);
    }
  }
  const Index nf = static_cast<Index>(r.free_dofs.size());
  r.rhs.resize(nf);
  for (Index i = 0; i < nf; ++i) r.rhs(i) = b(r.free_dofs[i]);
  std::vector<Eigen::Triplet<double, Index>> trip;
  trip.reserve(a.nonZeros());
  for (Index j = 0; j < a.outerSize(); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) {
      const Index i = it.row();
      if (is_fixed[i]) continue;
      if (is_fixed[j]) {
        r.rhs(slot[i]) -= it.value() * fixed[j];
      } else {
        trip.emplace_back(slot[i], slot[j], it.value());
      }
    }
  }
  r.matrix.resize(nf, nf);
  r.matrix.setFromTriplets(trip.begin(), trip.end());
  r.matrix.makeCompressed();
  return r;
}

/// Discretization of one problem on one space with one stabilization setup.
template <int Dim>
class Discretization {
 public:
  using Block = Eigen::Matrix<double, Dim, Eigen::Dynamic>;
  using WeightFunction = std::function<double(const Vec<Dim>& x, const Vec<Dim>& normal)>;

  Discretization(const FeSpace<Dim>& space, const ProblemSpec<Dim>& spec, StabilizationConfig config)
      : space_(&space), spec_(&spec), config_(std::move(config)) {
    const int k = space.degree();
    cell_rule_ = simplex_quadrature<Dim>(config_.cell_degree >= 0 ? config_.cell_degree : 2 * k + 3);
    facet_rule_ = simplex_quadrature<Dim - 1>(config_.facet_degree >= 0 ? config_.facet_degree : 2 * k + 2);
    for (const auto& p : cell_rule_.points) tabs_.push_back(space.reference().tabulate(p, true));
    kinds_ = classify_boundary_facets<Dim>(space.mesh(), spec.beta_function());
    compute_deltas();
  }

  const FeSpace<Dim>& space() const { return *space_; }
  const ProblemSpec<Dim>& spec() const { return *spec_; }
  const StabilizationConfig& config() const { return config_; }
  const std::vector<FacetKind>& facet_kinds() const { return kinds_; }
  const std::vector<double>& deltas() const { return delta_; }
  double c_inv() const { return c_inv_; }

  /// SOLD parameter sigma_T (uniform, sigma / N).
  double sigma(Index) const { return config_.sigma / space_->mesh().subdivisions(); }

  /// Weight alpha of cell c's side at a point of its local facet i.
  double side_alpha(Index c, int i, const Vec<Dim>& x) const {
    const Mesh<Dim>& mesh = space_->mesh();
    const Index f = mesh.cell_facet(c, i);
    const Facet<Dim>& fa = mesh.facet(f);
    if (fa.is_boundary()) return kinds_[f] == FacetKind::Inflow ? 1.0 : 0.0;
    const double ap = alpha_plus(config_, spec_->beta_value(x).dot(fa.normal));
    return fa.cells[0] == c ? ap : 1.0 - ap;
  }

  CellData<Dim> cell_data(Index c) const {
    const Mesh<Dim>& mesh = space_->mesh();
    CellData<Dim> cd;
    cd.cell = c;
    cd.n = space_->dofs_per_cell();
    cd.delta = delta_[c];
    const auto own = space_->cell_dofs(c);
    cd.patch.assign(own.begin(), own.end());
    for (int i = 0; i <= Dim; ++i) {
      const Facet<Dim>& fa = mesh.facet(mesh.cell_facet(c, i));
      if (fa.is_boundary()) continue;
      const Index nb = fa.cells[0] == c ? fa.cells[1] : fa.cells[0];
      for (Index d : space_->cell_dofs(nb)) {
        auto it = std::find(cd.patch.begin(), cd.patch.end(), d);
        int slot = static_cast<int>(it - cd.patch.begin());
        if (it == cd.patch.end()) cd.patch.push_back(d);
        cd.neighbor_slots[i].push_back(slot);
      }
    }
    const AffineMap<Dim>& m = mesh.map(c);
    const int nq = static_cast<int>(cell_rule_.size());
    cd.weights.resize(nq);
    cd.points.resize(nq);
    cd.shapes.resize(nq);
    cd.beta.resize(nq);
    cd.gamma.resize(nq);
    cd.source.resize(nq);
    cd.mass = Eigen::MatrixXd::Zero(cd.n, cd.n);
    for (int q = 0; q < nq; ++q) {
      cd.weights[q] = cell_rule_.weights[q] * m.det;
      cd.points[q] = m.to_physical(cell_rule_.points[q]);
      cd.shapes[q] = space_->map(c, tabs_[q]);
      cd.beta[q] = spec_->beta_jet(cd.points[q]);
      cd.gamma[q] = spec_->gamma(cd.points[q]);
      cd.source[q] = spec_->source(cd.points[q]);
      cd.mass += cd.weights[q] * cd.shapes[q].value.transpose() * cd.shapes[q].value;
    }
    cd.mass_solver.compute(cd.mass);
    if (cd.mass_solver.info() != Eigen::Success) throw GeometryError("singular local mass matrix");
    for (int i = 0; i <= Dim; ++i) {
      const Index f = mesh.cell_facet(c, i);
      const Facet<Dim>& fa = mesh.facet(f);
      std::array<Vec<Dim>, Dim> corners;
      for (int a = 0; a < Dim; ++a) corners[a] = mesh.vertex(fa.vertices[a]);
      const FacetQuadrature<Dim> fq = map_facet_rule<Dim>(facet_rule_, corners, fa.measure);
      const Vec<Dim> normal = mesh.outward_normal(c, i);
      const Index nb = fa.is_boundary() ? -1 : (fa.cells[0] == c ? fa.cells[1] : fa.cells[0]);
      for (std::size_t q = 0; q < fq.points.size(); ++q) {
        FacetPoint<Dim> fp;
        fp.x = fq.points[q];
        fp.weight = fq.weights[q];
        fp.normal = normal;
        fp.local_facet = i;
        fp.kind = kinds_[f];
        fp.alpha = side_alpha(c, i, fp.x);
        fp.own = space_->shape_values(c, m.to_reference(fp.x));
        if (nb >= 0) fp.other = space_->shape_values(nb, mesh.map(nb).to_reference(fp.x)).value;
        cd.facet_points.push_back(std::move(fp));
      }
    }
    return cd;
  }

  /// M_T^-1 B_w, acting on patch coefficients: lifting of alpha w [[v]] where
  /// w(x, n_T) multiplies the jump (beta . n for the advection).
  Eigen::MatrixXd lifting_matrix(const CellData<Dim>& cd, const WeightFunction& w) const {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(cd.n, cd.patch_size());
    for (const auto& fp : cd.facet_points) {
      if (fp.alpha == 0.0) continue;
      const double s = fp.weight * fp.alpha * w(fp.x, fp.normal);
      if (s == 0.0) continue;
      const Eigen::MatrixXd ft = s * fp.own.value.transpose();
      b.leftCols(cd.n) += ft * fp.own.value;
      if (fp.other.cols() > 0) {
        const Eigen::MatrixXd cross = ft * fp.other;
        const auto& slots = cd.neighbor_slots[fp.local_facet];
        for (int j = 0; j < cd.n; ++j) b.col(slots[j]) -= cross.col(j);
      }
    }
    return cd.mass_solver.solve(b);
  }

  Eigen::MatrixXd advective_lifting(const CellData<Dim>& cd) const {
    return lifting_matrix(cd, [this](const Vec<Dim>& x, const Vec<Dim>& n) {
      return spec_->beta_value(x).dot(n);
    });
  }

  /// Coefficients on T of r_alpha(v) for arbitrary facet data v(x, n_T).
  Eigen::VectorXd lifting_apply(const CellData<Dim>& cd,
                                const std::function<Vec<Dim>(const FacetPoint<Dim>&)>& data) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(cd.n);
    for (const auto& fp : cd.facet_points) {
      if (fp.alpha == 0.0) continue;
      b += fp.weight * fp.alpha * fp.own.value.transpose() * data(fp);
    }
    return cd.mass_solver.solve(b);
  }

  /// Coefficients on T of the lifting of the inflow data beta . n u_in.
  Eigen::VectorXd inflow_lifting(const CellData<Dim>& cd) const {
    return lifting_apply(cd, [this](const FacetPoint<Dim>& fp) -> Vec<Dim> {
      if (fp.kind != FacetKind::Inflow) return Vec<Dim>::Zero();
      const Vec<Dim> uin = inflow_trace<Dim>(spec_->boundary(fp.x, fp.normal), fp.normal);
      return spec_->beta_value(fp.x).dot(fp.normal) * uin;
    });
  }

  /// L_beta of each basis function, stacked (Dim * nq) x n.
  Eigen::MatrixXd stacked_advection(const CellData<Dim>& cd) const {
    Eigen::MatrixXd out(Dim * cd.n_points(), cd.n);
    for (int q = 0; q < cd.n_points(); ++q) {
      const auto& s = cd.shapes[q];
      const FieldJet<Dim>& b = cd.beta[q];
      for (int j = 0; j < cd.n; ++j) {
        out.block(q * Dim, j, Dim, 1) = s.jacobian[j] * b.value + b.jacobian.transpose() * s.value.col(j);
      }
    }
    return out;
  }

  /// (Dv) z of each basis function for a constant vector z.
  Eigen::MatrixXd stacked_directional(const CellData<Dim>& cd, const Vec<Dim>& z) const {
    Eigen::MatrixXd out(Dim * cd.n_points(), cd.n);
    for (int q = 0; q < cd.n_points(); ++q) {
      for (int j = 0; j < cd.n; ++j) out.block(q * Dim, j, Dim, 1) = cd.shapes[q].jacobian[j] * z;
    }
    return out;
  }

  /// Discrete advection L~ on the patch at the cell quadrature points.
  Eigen::MatrixXd discrete_advection(const CellData<Dim>& cd, const Eigen::MatrixXd& lift,
                                     const Eigen::MatrixXd& phi) const {
    Eigen::MatrixXd lt = -phi * lift;
    lt.leftCols(cd.n) += stacked_advection(cd);
    return lt;
  }

  /// The modified operator eps curl curl + L~ + gamma on the patch.
  Eigen::MatrixXd modified_operator(const CellData<Dim>& cd, const Eigen::MatrixXd& lt,
                                    const Eigen::MatrixXd& phi) const {
    Eigen::MatrixXd at = lt;
    const double eps = spec_->epsilon;
    for (int q = 0; q < cd.n_points(); ++q) {
      at.block(q * Dim, 0, Dim, cd.n) += eps * cd.shapes[q].curlcurl + cd.gamma[q] * phi.middleRows(q * Dim, Dim);
    }
    return at;
  }

  /// Source minus the lifted inflow data, stacked over quadrature points.
  Eigen::VectorXd effective_source(const CellData<Dim>& cd, const Eigen::MatrixXd& phi) const {
    Eigen::VectorXd f(Dim * cd.n_points());
    for (int q = 0; q < cd.n_points(); ++q) f.segment(q * Dim, Dim) = cd.source[q];
    bool has_inflow = false;
    for (const auto& fp : cd.facet_points) has_inflow = has_inflow || fp.kind == FacetKind::Inflow;
    if (has_inflow) f -= phi * inflow_lifting(cd);
    return f;
  }

  Eigen::VectorXd stacked_weights(const CellData<Dim>& cd) const {
    Eigen::VectorXd w(Dim * cd.n_points());
    for (int q = 0; q < cd.n_points(); ++q) w.segment(q * Dim, Dim).setConstant(cd.weights[q]);
    return w;
  }

  /// Global matrix of a_h and right-hand side F_h.
  AssembledSystem<Dim> assemble() const {
    const Index nd = space_->n_dofs();
    TripletAccumulator acc(nd, nd);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nd);
    const double eps = spec_->epsilon;
    for (Index c = 0; c < space_->mesh().n_cells(); ++c) {
      const CellData<Dim> cd = cell_data(c);
      const int n = cd.n;
      const int p = cd.patch_size();
      const Eigen::MatrixXd phi = cd.stacked_values();
      const Eigen::MatrixXd lift = advective_lifting(cd);
      const Eigen::MatrixXd lt = discrete_advection(cd, lift, phi);
      const Eigen::VectorXd w = stacked_weights(cd);
      Eigen::MatrixXd local = Eigen::MatrixXd::Zero(p, p);
      Eigen::VectorXd f(Dim * cd.n_points());
      for (int q = 0; q < cd.n_points(); ++q) f.segment(q * Dim, Dim) = cd.source[q];

      // (eps curl u, curl v) + (L~ u + gamma u, v)
      Eigen::MatrixXd reaction = lt;
      for (int q = 0; q < cd.n_points(); ++q) {
        reaction.block(q * Dim, 0, Dim, n) += cd.gamma[q] * phi.middleRows(q * Dim, Dim);
        local.topLeftCorner(n, n) +=
            cd.weights[q] * eps * cd.shapes[q].curl.transpose() * cd.shapes[q].curl;
      }
      const Eigen::MatrixXd wphi_t = (w.asDiagonal() * phi).transpose();
      local.topRows(n) += wphi_t * reaction;
      Eigen::VectorXd flocal = Eigen::VectorXd::Zero(p);
      flocal.head(n) += wphi_t * f;

      if (cd.delta > 0.0) {
        const Eigen::MatrixXd at = modified_operator(cd, lt, phi);
        const Eigen::MatrixXd wlt_t = cd.delta * (w.asDiagonal() * lt).transpose();
        local += wlt_t * at;
        flocal += wlt_t * f;
      }

      // Inflow boundary data.
      for (const auto& fp : cd.facet_points) {
        if (fp.kind != FacetKind::Inflow) continue;
        const Vec<Dim> uin = inflow_trace<Dim>(spec_->boundary(fp.x, fp.normal), fp.normal);
        const FieldJet<Dim> b = spec_->beta_jet(fp.x);
        const double s = fp.weight * b.value.dot(fp.normal);
        flocal.head(n) -= s * fp.own.value.transpose() * uin;
        if (cd.delta > 0.0) {
          Eigen::MatrixXd ltf = -fp.own.value * lift;
          for (int j = 0; j < n; ++j) {
            ltf.col(j) += fp.own.jacobian[j] * b.value + b.jacobian.transpose() * fp.own.value.col(j);
          }
          flocal -= cd.delta * s * ltf.transpose() * uin;
        }
      }
      scatter(cd, local, flocal, acc, rhs);
    }
    return {acc.finish(), rhs};
  }

  /// Frozen-direction SOLD term  sum_T sigma_T (R~(u), L~_z v)_T  split into
  /// matrix and right-hand side (the source part of the residual).
  AssembledSystem<Dim> assemble_sold_term(const std::vector<Vec<Dim>>& z) const {
    const Index nd = space_->n_dofs();
    TripletAccumulator acc(nd, nd);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nd);
    for (Index c = 0; c < space_->mesh().n_cells(); ++c) {
      const double sg = sigma(c);
      if (sg == 0.0 || z[c].squaredNorm() == 0.0) continue;
      const CellData<Dim> cd = cell_data(c);
      const Eigen::MatrixXd phi = cd.stacked_values();
      const Eigen::MatrixXd lt = discrete_advection(cd, advective_lifting(cd), phi);
      const Eigen::MatrixXd at = modified_operator(cd, lt, phi);
      const Eigen::MatrixXd ltz = directional_advection(cd, z[c], phi);
      const Eigen::MatrixXd wltz_t = sg * (stacked_weights(cd).asDiagonal() * ltz).transpose();
      const Eigen::MatrixXd local = wltz_t * at;
      const Eigen::VectorXd flocal = wltz_t * effective_source(cd, phi);
      scatter(cd, local, flocal, acc, rhs);
    }
    return {acc.finish(), rhs};
  }

  /// L~_z on the patch for a constant direction z (lifting weighted by z . n).
  Eigen::MatrixXd directional_advection(const CellData<Dim>& cd, const Vec<Dim>& z,
                                        const Eigen::MatrixXd& phi) const {
    const Eigen::MatrixXd lift =
        lifting_matrix(cd, [&z](const Vec<Dim>&, const Vec<Dim>& n) { return z.dot(n); });
    Eigen::MatrixXd out = -phi * lift;
    out.leftCols(cd.n) += stacked_directional(cd, z);
    return out;
  }

  /// Values of the constrained boundary DOFs from the tangential data.
  Eigen::VectorXd boundary_values() const {
    const ProblemSpec<Dim>* spec = spec_;
    return space_->interpolate_boundary([spec](const Vec<Dim>& x, const Vec<Dim>& n) {
      return tangential_trace<Dim>(spec->boundary(x, n), n);
    });
  }

  ReducedSystem apply_dirichlet(const AssembledSystem<Dim>& sys) const {
    return eliminate(sys.matrix, sys.rhs, space_->boundary_dofs(), boundary_values());
  }

 private:
  void scatter(const CellData<Dim>& cd, const Eigen::MatrixXd& local, const Eigen::VectorXd& flocal,
               TripletAccumulator& acc, Eigen::VectorXd& rhs) const {
    const int p = cd.patch_size();
    for (int j = 0; j < p; ++j) {
      for (int i = 0; i < p; ++i) acc.add(cd.patch[i], cd.patch[j], local(i, j));
    }
    for (int i = 0; i < p; ++i) rhs(cd.patch[i]) += flocal(i);
  }

  void compute_deltas() {
    const Mesh<Dim>& mesh = space_->mesh();
    const double nsub = mesh.subdivisions();
    delta_.assign(mesh.n_cells(), 0.0);
    if (config_.delta == DeltaRule::Zero) return;
    const double eps = spec_->epsilon;
    if (config_.cap_delta) c_inv_ = config_.c_inv >= 0.0 ? config_.c_inv : measure_c_inv(*space_);
    for (Index c = 0; c < mesh.n_cells(); ++c) {
      const double h = mesh.cell_diameter(c);
      const AffineMap<Dim>& m = mesh.map(c);
      double bmax = 0.0, gmax = 0.0;
      for (const auto& xi : cell_rule_.points) {
        const Vec<Dim> x = m.to_physical(xi);
        bmax = std::max(bmax, spec_->beta_value(x).norm());
        gmax = std::max(gmax, std::abs(spec_->gamma(x)));
      }
      double d = 0.0;
      if (config_.delta == DeltaRule::PerN) {
        d = config_.c0 / nsub;
      } else {
        d = bmax * h / (2.0 * eps) > 1.0 ? config_.c0 * h : config_.c1 * h * h / eps;
      }
      if (config_.cap_delta) {
        if (c_inv_ > 0.0) d = std::min(d, h * h / (2.0 * c_inv_ * c_inv_ * eps));
        if (!spec_->gamma_is_zero && gmax > 0.0) d = std::min(d, config_.rho0 / (2.0 * gmax * gmax));
      }
      delta_[c] = d;
    }
  }

  const FeSpace<Dim>* space_;
  const ProblemSpec<Dim>* spec_;
  StabilizationConfig config_;
  QuadratureRule<Dim> cell_rule_;
  QuadratureRule<Dim - 1> facet_rule_;
  std::vector<typename NedelecReference<Dim>::Tabulation> tabs_;
  std::vector<FacetKind> kinds_;
  std::vector<double> delta_;
  double c_inv_ = 0.0;
};

}  // namespace supg
