// Command line front end: run, convergence, mesh-info, export-vtk.

#include "supg/supg.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
  std::string config;
  int example = 0;
  int dim = 0;
  int k = 0;
  std::string ns;
  double eps = 0.0;
  std::string variant;
  double c0 = 0.0;
  double sigma = 0.0;
  std::string out;
  unsigned seed = 0;
  bool verbose = false;
  bool timing = false;
  bool allow_large = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "key = value file; flags override its entries");
  sub->add_option("--example", f.example, "experiment preset 1..6");
  sub->add_option("--dim", f.dim, "spatial dimension (2 or 3)");
  sub->add_option("--k", f.k, "polynomial degree (1 or 2)");
  sub->add_option("--N", f.ns, "subdivisions per axis, comma separated (e.g. 8,16,32)");
  sub->add_option("--eps", f.eps, "diffusion coefficient");
  sub->add_option("--variant", f.variant, "none, s1, s2, supg or sold");
  sub->add_option("--c0", f.c0, "SUPG constant, delta_T = c0 / N");
  sub->add_option("--sigma", f.sigma, "SOLD constant, sigma_T = sigma / N");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "seed recorded with the run");
  sub->add_flag("--verbose", f.verbose, "print SOLD iterations");
  sub->add_flag("--timing", f.timing, "write wall-clock seconds into CSV files");
  sub->add_flag("--allow-large", f.allow_large, "lift the 3D mesh size guard");
}

supg::RunConfig resolve(CLI::App* sub, const Flags& f) {
  supg::RunConfig cfg;
  if (!f.config.empty()) supg::load_config_file(cfg, f.config);
  auto given = [sub](const char* name) { return sub->count(name) > 0; };
  if (given("--example")) {
    cfg.example = f.example;
    if (!given("--dim") && cfg.example != 3) cfg.dim = supg::example_dimension(cfg.example);
  }
  if (given("--dim")) cfg.dim = f.dim;
  if (given("--k")) cfg.k = f.k;
  if (given("--N")) cfg.ns = supg::parse_int_list(f.ns);
  if (given("--eps")) cfg.epsilon = f.eps;
  if (given("--variant")) cfg.variant = supg::parse_variant(f.variant);
  if (given("--c0")) cfg.c0 = f.c0;
  if (given("--sigma")) cfg.c_sigma = f.sigma;
  if (given("--out")) cfg.out_dir = f.out;
  if (given("--seed")) cfg.seed = f.seed;
  if (f.verbose) cfg.verbose = true;
  if (f.timing) cfg.timing = true;
  if (f.allow_large) cfg.allow_large = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SUPG and SOLD solvers for magnetic advection-diffusion with edge elements"};
  app.require_subcommand(1);
  Flags f;
  auto* run = app.add_subcommand("run", "solve one configuration and write VTK, TSV and a summary");
  auto* conv = app.add_subcommand("convergence", "error table over an N sequence, written as CSV");
  auto* info = app.add_subcommand("mesh-info", "mesh and DOF statistics");
  auto* vtk = app.add_subcommand("export-vtk", "solve at the first N and write a VTK file");
  for (auto* s : {run, conv, info, vtk}) add_common(s, f);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    supg::RunConfig cfg = resolve(sub, f);
    if (sub == run) return supg::run_experiment(cfg, supg::Command::Run, std::cout);
    if (sub == conv) return supg::run_experiment(cfg, supg::Command::Convergence, std::cout);
    supg::validate(cfg, false);
    if (sub == info) {
      if (cfg.dim == 2) supg::mesh_info<2>(cfg, std::cout);
      else supg::mesh_info<3>(cfg, std::cout);
      return 0;
    }
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.dim == 2 ? supg::export_vtk<2>(cfg) : supg::export_vtk<3>(cfg);
    std::cout << "wrote " << path << '\n';
    return 0;
  } catch (const supg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
