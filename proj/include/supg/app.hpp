#pragma once

// Experiment driver: run configuration, presets and file output.

#include "supg/analysis.hpp"
#include "supg/solve.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace supg {

class IoError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  int example = 2;
  int dim = 2;
  int k = 1;
  std::vector<int> ns{8, 16, 32};
  std::optional<double> epsilon;  // empty: the example's default
  Variant variant = Variant::Supg;
  DeltaRule delta_rule = DeltaRule::PerN;
  bool cap_delta = false;
  double c0 = 0.4;
  double c1 = 1.0;
  double c_sigma = 1.1;
  double theta = 0.5;
  double tolerance = 1e-8;
  int max_iterations = 50;
  std::string out_dir = "out";
  unsigned seed = 1;
  bool verbose = false;
  bool timing = false;       // write wall-clock seconds into CSV files
  bool allow_large = false;  // lift the 3D size guard

  double eps() const { return epsilon ? *epsilon : example_default_epsilon(example); }

  StabilizationConfig stabilization() const {
    StabilizationConfig s = variant_config(variant, c0, c_sigma);
    if (s.delta != DeltaRule::Zero) s.delta = delta_rule;
    s.c1 = c1;
    s.cap_delta = cap_delta;
    return s;
  }

  SoldOptions sold_options() const { return {theta, tolerance, max_iterations, verbose}; }
};

// ---------------------------------------------------------------------------
// Config files: one `key = value` per line, `#` starts a comment.

inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ArgumentError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw ArgumentError("not an integer: '" + item + "'");
    }
    if (used != item.size()) throw ArgumentError("not an integer: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ArgumentError(key + ": not a number: '" + v + "'");
  }
  if (used != v.size()) throw ArgumentError(key + ": not a number: '" + v + "'");
  return d;
}

inline int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw ArgumentError(key + ": expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ArgumentError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Apply recognized keys; unknown keys are an error so typos do not pass silently.
inline void apply_key_values(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, v] : kv) {
    if (key == "example") cfg.example = detail::to_int(key, v);
    else if (key == "dim") cfg.dim = detail::to_int(key, v);
    else if (key == "k") cfg.k = detail::to_int(key, v);
    else if (key == "N") cfg.ns = parse_int_list(v);
    else if (key == "eps") cfg.epsilon = detail::to_double(key, v);
    else if (key == "variant") cfg.variant = parse_variant(v);
    else if (key == "delta_rule") {
      if (v == "per_n") cfg.delta_rule = DeltaRule::PerN;
      else if (v == "regime") cfg.delta_rule = DeltaRule::Regime;
      else throw ArgumentError("delta_rule: expected per_n or regime, got '" + v + "'");
    }
    else if (key == "cap_delta") cfg.cap_delta = detail::to_bool(key, v);
    else if (key == "c0") cfg.c0 = detail::to_double(key, v);
    else if (key == "c1") cfg.c1 = detail::to_double(key, v);
    else if (key == "sigma") cfg.c_sigma = detail::to_double(key, v);
    else if (key == "theta") cfg.theta = detail::to_double(key, v);
    else if (key == "tol") cfg.tolerance = detail::to_double(key, v);
    else if (key == "max_iter") cfg.max_iterations = detail::to_int(key, v);
    else if (key == "out") cfg.out_dir = v;
    else if (key == "seed") cfg.seed = static_cast<unsigned>(detail::to_int(key, v));
    else if (key == "verbose") cfg.verbose = detail::to_bool(key, v);
    else if (key == "timing") cfg.timing = detail::to_bool(key, v);
    else if (key == "allow_large") cfg.allow_large = detail::to_bool(key, v);
    else throw ArgumentError("unknown config key '" + key + "'");
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  apply_key_values(cfg, parse_key_values(in));
}

/// Checks a configuration; `table` additionally requires a doubling N list.
inline void validate(const RunConfig& cfg, bool table) {
  if (cfg.example < 1 || cfg.example > 6) {
    throw ArgumentError("example must be in 1..6, got " + std::to_string(cfg.example));
  }
  if (cfg.dim != 2 && cfg.dim != 3) throw ArgumentError("dim must be 2 or 3");
  if (cfg.example != 3 && example_dimension(cfg.example) != cfg.dim) {
    throw ArgumentError("example " + std::to_string(cfg.example) + " is defined for dim " +
                        std::to_string(example_dimension(cfg.example)) + "; pass --dim " +
                        std::to_string(example_dimension(cfg.example)));
  }
  if (cfg.k != 1 && cfg.k != 2) throw ArgumentError("k must be 1 or 2");
  if (cfg.ns.empty()) throw ArgumentError("N list is empty");
  for (int n : cfg.ns) {
    if (n < 1) throw ArgumentError("N must be positive");
  }
  if (table) {
    for (std::size_t i = 1; i < cfg.ns.size(); ++i) {
      if (cfg.ns[i] != 2 * cfg.ns[i - 1]) {
        throw ArgumentError("a convergence table needs N to double between entries (e.g. 8,16,32)");
      }
    }
  }
  if (!(cfg.eps() > 0.0)) throw ArgumentError("eps must be positive");
  if (cfg.c0 < 0.0 || cfg.c1 < 0.0 || cfg.c_sigma < 0.0) throw ArgumentError("c0, c1 and sigma must be non-negative");
  if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw ArgumentError("theta must lie in (0, 1]");
  if (cfg.max_iterations < 1) throw ArgumentError("max_iter must be at least 1");
  if (cfg.dim == 3 && !cfg.allow_large) {
    const int cap = cfg.k == 1 ? 16 : 8;
    for (int n : cfg.ns) {
      if (n > cap) {
        throw ArgumentError("3D runs with k=" + std::to_string(cfg.k) + " are capped at N=" + std::to_string(cap) +
                            " (direct solver memory); pass --allow-large to override");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Output

/// Scientific notation with five significant digits and a bare exponent,
/// e.g. 4.5381e-3; NaN prints as "-".
inline std::string format_sci(double v) {
  if (std::isnan(v)) return "-";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  std::string s(buf);
  const auto e = s.find('e');
  const int ex = std::stoi(s.substr(e + 1));
  return s.substr(0, e) + "e" + std::to_string(ex);
}

inline void write_csv(const std::vector<ErrorRecord>& records, std::ostream& os, bool with_seconds) {
  os << "N,dofs,l2_error,l2_order,energy_error,energy_order,seconds\n";
  for (const auto& r : records) {
    os << r.n << ',' << r.dofs << ',' << format_sci(r.l2_error) << ',' << format_sci(r.l2_order) << ','
       << format_sci(r.energy_error) << ',' << format_sci(r.energy_order) << ','
       << (with_seconds ? format_sci(r.seconds) : std::string("-")) << '\n';
  }
}

inline void write_csv(const std::vector<ErrorRecord>& records, const std::string& path, bool with_seconds = false) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  write_csv(records, os, with_seconds);
  if (!os) throw IoError("write failed: " + path);
}

/// Legacy VTK unstructured grid. An H(curl) field is multivalued at vertices
/// (only tangential parts match), so point data is the average of the values
/// from all cells sharing the vertex.
template <int Dim>
void write_vtk(const FeSpace<Dim>& space, const Eigen::VectorXd& coeffs, std::ostream& os,
               const std::string& name = "u") {
  const Mesh<Dim>& mesh = space.mesh();
  const DiscreteField<Dim> field(space, coeffs);
  std::vector<Vec<Dim>> sum(mesh.n_vertices(), Vec<Dim>::Zero());
  std::vector<int> count(mesh.n_vertices(), 0);
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    for (int i = 0; i <= Dim; ++i) {
      Vec<Dim> xi = Vec<Dim>::Zero();
      if (i > 0) xi(i - 1) = 1.0;
      const Index v = mesh.cell(c)[i];
      sum[v] += field.value(c, xi);
      ++count[v];
    }
  }
  os << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << std::setprecision(12);
  os << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& x : mesh.vertices()) {
    os << x(0) << ' ' << x(1) << ' ' << (Dim == 3 ? x(2) : 0.0) << '\n';
  }
  os << "CELLS " << mesh.n_cells() << ' ' << mesh.n_cells() * (Dim + 2) << '\n';
  for (const auto& cv : mesh.cells()) {
    os << Dim + 1;
    for (auto v : cv) os << ' ' << v;
    os << '\n';
  }
  os << "CELL_TYPES " << mesh.n_cells() << '\n';
  for (Index c = 0; c < mesh.n_cells(); ++c) os << (Dim == 2 ? 5 : 10) << '\n';
  os << "POINT_DATA " << mesh.n_vertices() << "\nVECTORS " << name << " double\n";
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    const Vec<Dim> u = count[v] > 0 ? Vec<Dim>(sum[v] / count[v]) : Vec<Dim>::Zero();
    os << u(0) << ' ' << u(1) << ' ' << (Dim == 3 ? u(2) : 0.0) << '\n';
  }
}

template <int Dim>
void write_vtk(const FeSpace<Dim>& space, const Eigen::VectorXd& coeffs, const std::string& path,
               const std::string& name = "u") {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  write_vtk(space, coeffs, os, name);
  if (!os) throw IoError("write failed: " + path);
}

inline void write_tsv(const std::vector<SectionSample>& section, std::ostream& os) {
  os << std::setprecision(10);
  for (const auto& s : section) os << s.coordinate << '\t' << s.value << '\n';
}

inline void write_tsv(const std::vector<SectionSample>& section, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  write_tsv(section, os);
  if (!os) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Experiments

/// Solution of one configuration on one mesh, kept together with its space.
template <int Dim>
struct Solution {
  std::shared_ptr<const Mesh<Dim>> mesh;
  std::shared_ptr<const FeSpace<Dim>> space;
  Eigen::VectorXd coefficients;
  SolveReport report;
  double seconds = 0.0;
};

/// Solve `spec` with the given stabilization on an N-mesh; SOLD runs the
/// Picard iteration, every other variant one linear solve.
template <int Dim>
Solution<Dim> solve_problem(const ProblemSpec<Dim>& spec, int k, int n, const StabilizationConfig& stab,
                            const SoldOptions& sold = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  Solution<Dim> s;
  s.mesh = std::make_shared<const Mesh<Dim>>(build_uniform_mesh<Dim>(n));
  s.space = std::make_shared<const FeSpace<Dim>>(*s.mesh, k);
  const Discretization<Dim> disc(*s.space, spec, stab);
  if (stab.sigma > 0.0) {
    SoldResult<Dim> r = solve_sold(disc, sold);
    s.coefficients = std::move(r.coefficients);
    s.report = std::move(r.report);
  } else {
    double res = 0.0;
    s.coefficients = solve_linear(disc, &res);
    s.report.converged = true;
    s.report.residuals.push_back(res);
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

/// Convergence table of a manufactured example for one stabilization setup.
template <int Dim>
std::vector<ErrorRecord> convergence_table(const ProblemSpec<Dim>& spec, int k, const std::vector<int>& ns,
                                           const StabilizationConfig& stab, const SoldOptions& sold = {},
                                           std::ostream* log = nullptr) {
  std::vector<ErrorRecord> records;
  for (int n : ns) {
    const auto t0 = std::chrono::steady_clock::now();
    const Solution<Dim> s = solve_problem(spec, k, n, stab, sold);
    const ErrorNorms e = error_norms(*s.space, spec, s.coefficients, stab);
    ErrorRecord r;
    r.n = n;
    r.dofs = s.space->n_dofs();
    r.l2_error = e.l2_error;
    r.energy_error = e.energy_error();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    records.push_back(r);
    if (log) {
      *log << "  N=" << n << " dofs=" << r.dofs << " l2=" << format_sci(r.l2_error)
           << " energy=" << format_sci(r.energy_error) << '\n';
    }
  }
  convergence_orders(records);
  return records;
}

/// Galerkin and SUPG on an N-mesh against a 4N SUPG reference, sampled on
/// the smooth interior box [0.1, 0.7]^2.
struct LayerComparison {
  std::array<Oscillation, 2> galerkin;
  std::array<Oscillation, 2> supg;
  Solution<2> galerkin_solution;
  Solution<2> supg_solution;
};

inline LayerComparison compare_layer_oscillations(const ProblemSpec<2>& spec, int k, int n, double c0 = 0.4) {
  LayerComparison out;
  const StabilizationConfig supg = variant_config(Variant::Supg, c0);
  const Solution<2> ref = solve_problem(spec, k, 4 * n, supg);
  const DiscreteField<2> rf(*ref.space, ref.coefficients);
  const SampleBox<2> box{Vec<2>(0.1, 0.1), Vec<2>(0.7, 0.7)};
  out.galerkin_solution = solve_problem(spec, k, n, variant_config(Variant::Galerkin));
  out.supg_solution = solve_problem(spec, k, n, supg);
  const DiscreteField<2> fg(*out.galerkin_solution.space, out.galerkin_solution.coefficients);
  const DiscreteField<2> fs(*out.supg_solution.space, out.supg_solution.coefficients);
  for (int comp = 0; comp < 2; ++comp) {
    const auto [lo, hi] = sample_range(rf, comp, box);
    out.galerkin[comp] = oscillation_metric(fg, comp, box, lo, hi);
    out.supg[comp] = oscillation_metric(fs, comp, box, lo, hi);
  }
  return out;
}

/// SUPG with c0 = 10 against SOLD (c0 and sigma from `sold_setup`), both
/// measured in the max norm against a SUPG solve on 8N interpolated onto the
/// N-mesh.
struct SoldComparison {
  Solution<2> supg;
  Solution<2> sold;
  Eigen::VectorXd reference;
  double supg_error = 0.0;
  double sold_error = 0.0;
};

inline SoldComparison compare_sold(const ProblemSpec<2>& spec, int k, int n, const StabilizationConfig& sold_setup,
                                   const SoldOptions& opt = {}) {
  if (!(sold_setup.sigma > 0.0)) throw ArgumentError("the SOLD comparison needs sigma > 0");
  SoldComparison out;
  StabilizationConfig supg = sold_setup;
  supg.sigma = 0.0;
  const Solution<2> ref = solve_problem(spec, k, 8 * n, supg);
  const DiscreteField<2> rf(*ref.space, ref.coefficients);
  supg.c0 = 10.0;
  out.supg = solve_problem(spec, k, n, supg);
  out.reference = out.supg.space->interpolate([&](const Vec<2>& x) { return rf(x); });
  out.sold = solve_problem(spec, k, n, sold_setup, opt);
  out.supg_error = max_norm_difference(*out.supg.space, out.supg.coefficients, out.reference);
  out.sold_error = max_norm_difference(*out.sold.space, out.sold.coefficients, out.reference);
  return out;
}

namespace detail {

inline std::string stem(const RunConfig& cfg, const std::string& variant) {
  std::ostringstream s;
  s << "example" << cfg.example << "_d" << cfg.dim << "_k" << cfg.k << "_" << variant;
  return s.str();
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

inline std::string path_in(const RunConfig& cfg, const std::string& file) {
  return (std::filesystem::path(cfg.out_dir) / file).string();
}

/// Manufactured examples: one CSV per stabilization setup.
template <int Dim>
int convergence_run(const RunConfig& cfg, std::ostream& log) {
  const ProblemSpec<Dim> spec = make_example<Dim>(cfg.example, cfg.eps());
  if (!spec.has_exact()) {
    throw ArgumentError("example " + std::to_string(cfg.example) + " has no exact solution; use `run` instead");
  }
  std::vector<Variant> variants{cfg.variant};
  if (cfg.example == 3) variants = {Variant::S1Only, Variant::S2Only, Variant::Supg};
  RunConfig c = cfg;
  for (Variant v : variants) {
    c.variant = v;
    log << "example " << cfg.example << ", d=" << Dim << ", k=" << cfg.k << ", eps=" << format_sci(cfg.eps())
        << ", variant " << to_string(v) << '\n';
    const auto records = convergence_table(spec, cfg.k, cfg.ns, c.stabilization(), c.sold_options(), &log);
    const std::string path = path_in(cfg, stem(cfg, to_string(v)) + ".csv");
    write_csv(records, path, cfg.timing);
    log << "  wrote " << path << '\n';
  }
  return 0;
}

inline void write_summary(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
}

/// Layer examples 4-6 and single solves of the manufactured ones.
template <int Dim>
int single_run(const RunConfig& cfg, std::ostream& log) {
  const ProblemSpec<Dim> spec = make_example<Dim>(cfg.example, cfg.eps());
  const int n = cfg.ns.front();
  std::vector<std::pair<std::string, std::string>> summary{
      {"example", std::to_string(cfg.example)}, {"dim", std::to_string(Dim)}, {"k", std::to_string(cfg.k)},
      {"N", std::to_string(n)}, {"eps", format_sci(cfg.eps())}};

  if constexpr (Dim == 2) {
    if (cfg.example == 4) {
      const LayerComparison cmp = compare_layer_oscillations(spec, cfg.k, n, cfg.c0);
      for (const auto* side : {&cmp.galerkin, &cmp.supg}) {
        const std::string name = side == &cmp.galerkin ? "galerkin" : "supg";
        for (int comp = 0; comp < 2; ++comp) {
          const Oscillation& o = (*side)[comp];
          const std::string tag = name + "_u" + std::to_string(comp + 1);
          summary.emplace_back(tag + "_overshoot", format_sci(o.overshoot));
          summary.emplace_back(tag + "_undershoot", format_sci(o.undershoot));
          log << name << " u" << comp + 1 << ": overshoot " << format_sci(o.overshoot) << ", undershoot "
              << format_sci(o.undershoot) << '\n';
        }
      }
      for (const auto& [name, s] : {std::pair{"none", &cmp.galerkin_solution}, std::pair{"supg", &cmp.supg_solution}}) {
        write_vtk(*s->space, s->coefficients, path_in(cfg, stem(cfg, name) + ".vtk"));
      }
      write_summary(path_in(cfg, stem(cfg, "summary") + ".txt"), summary);
      return 0;
    }
    if (cfg.example == 5) {
      for (Variant v : {Variant::Galerkin, cfg.variant == Variant::Galerkin ? Variant::Supg : cfg.variant}) {
        RunConfig c = cfg;
        c.variant = v;
        const Solution<2> s = solve_problem(spec, cfg.k, n, c.stabilization(), c.sold_options());
        const DiscreteField<2> f(*s.space, s.coefficients);
        for (int comp = 0; comp < 2; ++comp) {
          const auto sec = cross_section(f, comp, Vec<2>(0.5, 0.0), Vec<2>(0.5, 1.0), 201);
          const std::string tag = std::string(to_string(v)) + "_u" + std::to_string(comp + 1);
          write_tsv(sec, path_in(cfg, stem(cfg, tag) + "_x0.5.tsv"));
          summary.emplace_back(tag + "_plateau_ratio", format_sci(plateau_ratio(sec, 0.25, 0.75)));
        }
        write_vtk(*s.space, s.coefficients, path_in(cfg, stem(cfg, to_string(v)) + ".vtk"));
        log << to_string(v) << ": wrote VTK and cross-sections\n";
      }
      write_summary(path_in(cfg, stem(cfg, "summary") + ".txt"), summary);
      return 0;
    }
    if (cfg.example == 6) {
      RunConfig c = cfg;
      c.variant = Variant::Sold;
      const SoldComparison cmp = compare_sold(spec, cfg.k, n, c.stabilization(), cfg.sold_options());
      const Solution<2>& supg = cmp.supg;
      const Solution<2>& sold = cmp.sold;
      const Eigen::VectorXd& refi = cmp.reference;
      const double es = cmp.supg_error;
      const double eo = cmp.sold_error;
      summary.emplace_back("supg_c0", "10");
      summary.emplace_back("supg_max_error", format_sci(es));
      summary.emplace_back("sold_max_error", format_sci(eo));
      summary.emplace_back("sold_iterations", std::to_string(sold.report.iterations));
      summary.emplace_back("sold_converged", sold.report.converged ? "yes" : "no");
      summary.emplace_back("sold_final_update", format_sci(sold.report.final_update));
      log << "max error vs reference: supg(c0=10) " << format_sci(es) << ", sold " << format_sci(eo) << " ("
          << sold.report.iterations << " iterations, " << (sold.report.converged ? "converged" : "not converged")
          << ")\n";
      write_vtk(*supg.space, refi, path_in(cfg, stem(cfg, "reference") + ".vtk"));
      write_vtk(*supg.space, supg.coefficients, path_in(cfg, stem(cfg, "supg") + ".vtk"));
      write_vtk(*sold.space, sold.coefficients, path_in(cfg, stem(cfg, "sold") + ".vtk"));
      const std::vector<std::pair<std::string, const Eigen::VectorXd*>> fields{
          {"reference", &refi}, {"supg", &supg.coefficients}, {"sold", &sold.coefficients}};
      for (const auto& [tag, u] : fields) {
        const DiscreteField<2> f(*supg.space, *u);
        write_tsv(cross_section(f, 0, Vec<2>(0.5, 0.0), Vec<2>(0.5, 1.0), 201),
                  path_in(cfg, stem(cfg, tag) + "_u1_x0.5.tsv"));
      }
      write_summary(path_in(cfg, stem(cfg, "summary") + ".txt"), summary);
      return 0;
    }
  }

  const StabilizationConfig stab = cfg.stabilization();
  const Solution<Dim> s = solve_problem(spec, cfg.k, n, stab, cfg.sold_options());
  summary.emplace_back("variant", to_string(cfg.variant));
  summary.emplace_back("dofs", std::to_string(s.space->n_dofs()));
  if (stab.sigma > 0.0) {
    summary.emplace_back("sold_iterations", std::to_string(s.report.iterations));
    summary.emplace_back("sold_converged", s.report.converged ? "yes" : "no");
  }
  log << "example " << cfg.example << ", N=" << n << ", dofs=" << s.space->n_dofs();
  if (spec.has_exact()) {
    const ErrorNorms e = error_norms(*s.space, spec, s.coefficients, stab);
    summary.emplace_back("l2_error", format_sci(e.l2_error));
    summary.emplace_back("energy_error", format_sci(e.energy_error()));
    log << ", l2=" << format_sci(e.l2_error) << ", energy=" << format_sci(e.energy_error());
  }
  log << '\n';
  write_vtk(*s.space, s.coefficients, path_in(cfg, stem(cfg, to_string(cfg.variant)) + ".vtk"));
  write_summary(path_in(cfg, stem(cfg, "summary") + ".txt"), summary);
  return 0;
}

}  // namespace detail

enum class Command { Run, Convergence };

/// Runs one experiment and writes its artifacts into cfg.out_dir.
inline int run_experiment(const RunConfig& cfg, Command cmd, std::ostream& log) {
  validate(cfg, cmd == Command::Convergence);
  detail::ensure_dir(cfg.out_dir);
  if (cmd == Command::Convergence) {
    return cfg.dim == 2 ? detail::convergence_run<2>(cfg, log) : detail::convergence_run<3>(cfg, log);
  }
  return cfg.dim == 2 ? detail::single_run<2>(cfg, log) : detail::single_run<3>(cfg, log);
}

/// Mesh and space statistics for `mesh-info`.
template <int Dim>
void mesh_info(const RunConfig& cfg, std::ostream& os) {
  const ProblemSpec<Dim> spec = make_example<Dim>(cfg.example, cfg.eps());
  for (int n : cfg.ns) {
    const Mesh<Dim> mesh = build_uniform_mesh<Dim>(n);
    const FeSpace<Dim> space(mesh, cfg.k);
    const auto kinds = classify_boundary_facets<Dim>(mesh, spec.beta_function());
    Index inflow = 0, outflow = 0;
    for (auto kd : kinds) {
      inflow += kd == FacetKind::Inflow;
      outflow += kd == FacetKind::Outflow;
    }
    os << "N=" << n << " vertices=" << mesh.n_vertices() << " cells=" << mesh.n_cells()
       << " facets=" << mesh.n_facets() << " edges=" << space.n_edges() << " dofs=" << space.n_dofs()
       << " boundary_dofs=" << space.boundary_dofs().size() << " inflow_facets=" << inflow
       << " outflow_facets=" << outflow << '\n';
  }
}

/// Solve at the first N and write only the VTK file.
template <int Dim>
std::string export_vtk(const RunConfig& cfg) {
  const ProblemSpec<Dim> spec = make_example<Dim>(cfg.example, cfg.eps());
  const Solution<Dim> s = solve_problem(spec, cfg.k, cfg.ns.front(), cfg.stabilization(), cfg.sold_options());
  const std::string path = detail::path_in(cfg, detail::stem(cfg, to_string(cfg.variant)) + ".vtk");
  write_vtk(*s.space, s.coefficients, path);
  return path;
}

}  // namespace supg
