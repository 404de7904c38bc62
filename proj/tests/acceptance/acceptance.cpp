// Acceptance checks. `acceptance AC<n>` runs one criterion and prints a
// single PASS/FAIL line; `acceptance all` runs every criterion in turn.

#include "../support/checks.hpp"

#include "supg/app.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

using namespace supg;
using namespace supg::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string sci(double v) { return format_sci(v); }

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

bool within(double v, double centre, double tol) { return std::abs(v - centre) <= tol; }

bool within_factor(double v, double ref, double factor) { return v <= factor * ref && v >= ref / factor; }

std::vector<ErrorRecord> table(int example, int dim_hint, int k, const std::vector<int>& ns, Variant v) {
  const StabilizationConfig cfg = variant_config(v);
  if (dim_hint == 3) return convergence_table(make_example<3>(example, 1e-6), k, ns, cfg);
  return convergence_table(make_example<2>(example, 1e-6), k, ns, cfg);
}

void print_orders(Outcome& o, const std::string& tag, const std::vector<ErrorRecord>& r) {
  o.detail << ' ' << tag << " l2";
  for (const auto& e : r) o.detail << ' ' << (std::isnan(e.l2_order) ? std::string("-") : fixed2(e.l2_order));
  o.detail << " energy";
  for (const auto& e : r) o.detail << ' ' << (std::isnan(e.energy_order) ? std::string("-") : fixed2(e.energy_order));
  o.detail << ';';
}

// ---------------------------------------------------------------------------

void ac1(Outcome& o) {
  std::mt19937 rng(11);
  const double tol = 1e-10;
  const double jumps = jump_identity_defect(1000, rng);
  const double sum2 = advection_sum_defect<2>(1000, rng);
  const double sum3 = advection_sum_defect<3>(1000, rng);
  double ibp = 0.0, lift = 0.0;
  for (int k : {1, 2}) {
    ibp = std::max(ibp, integration_by_parts_defect<2>(k, 4, rng));
    ibp = std::max(ibp, integration_by_parts_defect<3>(k, 4, rng));
    for (AlphaRule a : {AlphaRule::Upwind, AlphaRule::Centered}) {
      lift = std::max(lift, lifting_identity_defect<2>(k, 4, a, 3, rng));
      lift = std::max(lift, lifting_identity_defect<3>(k, 4, a, 3, rng));
    }
  }
  o.detail << " jump/average " << sci(jumps) << "; advection sum " << sci(std::max(sum2, sum3))
           << "; integration by parts " << sci(ibp) << "; lifting adjoint " << sci(lift) << ';';
  o.require(jumps <= tol, "jump/average identities");
  o.require(sum2 <= tol && sum3 <= tol, "advection sum identity");
  o.require(ibp <= tol, "integration by parts");
  o.require(lift <= tol, "lifting adjoint identity");
}

void ac2(Outcome& o) {
  std::mt19937 rng(12);
  double dual = 0.0, tang = 0.0, curl = 0.0, interp = 0.0;
  for (int k : {1, 2}) {
    dual = std::max({dual, duality_defect<2>(k), duality_defect<3>(k)});
    tang = std::max({tang, tangential_jump<2>(k, 4, rng), tangential_jump<3>(k, 4, rng)});
    curl = std::max({curl, curl_fd_defect<2>(k, 4, 200, rng), curl_fd_defect<3>(k, 4, 200, rng)});
    interp = std::max({interp, polynomial_interpolation_defect<2>(k, 4, 200, rng),
                       polynomial_interpolation_defect<3>(k, 4, 200, rng)});
  }
  o.detail << " duality " << sci(dual) << "; tangential jump " << sci(tang) << "; curl vs differences "
           << sci(curl) << "; (P_k)^d interpolation " << sci(interp) << ';';
  o.require(dual <= 1e-10, "duality");
  o.require(tang <= 1e-10, "tangential continuity");
  o.require(curl <= 1e-6, "curl against finite differences");
  o.require(interp <= 1e-10, "polynomial reproduction");
}

void ac3(Outcome& o) {
  double worst = 0.0;
  for (int k : {1, 2}) {
    for (int n : {2, 4}) {
      for (Variant v : {Variant::Galerkin, Variant::Supg, Variant::Sold}) {
        worst = std::max(worst, patch_test_error<2>(k, n, v));
        worst = std::max(worst, patch_test_error<3>(k, n, v));
      }
    }
  }
  o.detail << " largest L2 error " << sci(worst) << " over galerkin/supg/sold, d=2,3, k=1,2, N=2,4;";
  o.require(worst <= 1e-9, "patch test");
}

void ac4(Outcome& o) {
  std::mt19937 rng(14);
  const auto r21 = coercivity_check<2>(make_example<2>(2, 1e-6), 1, 8, 100, rng);
  const auto r22 = coercivity_check<2>(make_example<2>(2, 1e-6), 2, 8, 100, rng);
  const auto r31 = coercivity_check<3>(make_example<3>(1, 1e-6), 1, 4, 100, rng);
  for (const auto& [tag, r] : {std::pair{"2D k=1", r21}, std::pair{"2D k=2", r22}, std::pair{"3D k=1", r31}}) {
    o.detail << ' ' << tag << " min a(v,v)/|||v|||^2 = " << fixed2(r.min_ratio) << " (rho0 " << fixed2(r.rho0)
             << ", C_inv " << fixed2(r.c_inv) << ");";
    o.require(r.min_ratio >= 0.5, std::string(tag) + " coercivity");
  }
}

void ac5(Outcome& o) {
  // Reference errors for eps = 1e-6: L2 then energy, N = 8, 16, ...
  const std::vector<double> k1_l2{1.8923e-2, 4.5381e-3, 1.1168e-3, 2.7822e-4, 6.9577e-5};
  const std::vector<double> k1_en{6.5878e-2, 2.3435e-2, 8.2808e-3, 2.9241e-3, 1.0332e-3};
  const std::vector<double> k2_l2{9.8305e-4, 1.3192e-4, 1.7674e-5, 2.3639e-6};
  const std::vector<double> k2_en{4.7249e-3, 8.5139e-4, 1.5164e-4, 2.6911e-5};

  const auto s1 = table(2, 2, 1, {8, 16, 32, 64, 128}, Variant::Supg);
  const auto s2 = table(2, 2, 2, {8, 16, 32, 64}, Variant::Supg);
  const auto g1 = table(2, 2, 1, {64, 128}, Variant::Galerkin);
  print_orders(o, "supg k=1", s1);
  print_orders(o, "supg k=2", s2);
  o.detail << " galerkin k=1 64->128 l2 order " << fixed2(g1[1].l2_order) << ';';

  for (std::size_t i = 2; i < s1.size(); ++i) {
    o.require(within(s1[i].l2_order, 2.0, 0.15), "k=1 L2 order at N=" + std::to_string(s1[i].n));
    o.require(within(s1[i].energy_order, 1.50, 0.15), "k=1 energy order at N=" + std::to_string(s1[i].n));
  }
  for (std::size_t i = 2; i < s2.size(); ++i) {
    o.require(within(s2[i].l2_order, 2.9, 0.2), "k=2 L2 order at N=" + std::to_string(s2[i].n));
    o.require(within(s2[i].energy_order, 2.49, 0.15), "k=2 energy order at N=" + std::to_string(s2[i].n));
  }
  double worst = 1.0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    worst = std::max({worst, s1[i].l2_error / k1_l2[i], k1_l2[i] / s1[i].l2_error, s1[i].energy_error / k1_en[i],
                      k1_en[i] / s1[i].energy_error});
  }
  for (std::size_t i = 0; i < s2.size(); ++i) {
    worst = std::max({worst, s2[i].l2_error / k2_l2[i], k2_l2[i] / s2[i].l2_error, s2[i].energy_error / k2_en[i],
                      k2_en[i] / s2[i].energy_error});
  }
  o.detail << " k=1 N=16 L2 " << sci(s1[1].l2_error) << "; largest factor to reference table " << fixed2(worst) << ';';
  o.require(worst <= 3.0, "error magnitudes within a factor 3");
  o.require(g1[1].l2_order < 1.3, "galerkin L2 order degrades below 1.3");
}

void ac6(Outcome& o) {
  const auto s1 = table(1, 3, 1, {2, 4, 8, 16}, Variant::Supg);
  print_orders(o, "k=1", s1);
  o.detail << " N=16 L2 " << sci(s1.back().l2_error) << ';';
  o.require(s1.back().l2_order >= 1.9, "k=1 final L2 order");
  o.require(within(s1.back().energy_order, 1.54, 0.2), "k=1 final energy order");
  const auto s2 = table(1, 3, 2, {2, 4, 8}, Variant::Supg);
  print_orders(o, "k=2", s2);
  o.require(s2.back().l2_order >= 2.8, "k=2 final L2 order");
}

void ac7(Outcome& o) {
  const std::vector<int> ns{8, 16, 32, 64};
  const auto s2 = table(3, 2, 2, ns, Variant::S2Only);
  const auto s1 = table(3, 2, 2, ns, Variant::S1Only);
  print_orders(o, "S2 only", s2);
  print_orders(o, "S1 only", s1);
  for (std::size_t i = 1; i < s2.size(); ++i) {
    o.require(s2[i].l2_order >= 2.85, "S2-only L2 order at N=" + std::to_string(s2[i].n));
  }
  o.require(s1.back().l2_order <= 2.45, "S1-only final L2 order");
}

void ac8(Outcome& o) {
  const LayerComparison cmp = compare_layer_oscillations(make_example<2>(4, 1e-6), 1, 16);
  const double g = cmp.galerkin[0].overshoot, s = cmp.supg[0].overshoot;
  o.detail << " example 4 u1 overshoot galerkin " << sci(g) << ", supg " << sci(s) << ';';
  o.require(g > 0.0 && g >= 5.0 * s, "galerkin overshoot at least 5x supg");

  const Solution<2> sol = solve_problem(make_example<2>(5, 1e-3), 1, 32, variant_config(Variant::Supg));
  const DiscreteField<2> f(*sol.space, sol.coefficients);
  double best = 0.0;
  for (int comp = 0; comp < 2; ++comp) {
    const double r = plateau_ratio(cross_section(f, comp, Vec<2>(0.5, 0.0), Vec<2>(0.5, 1.0), 201), 0.25, 0.75);
    o.detail << " example 5 u" << comp + 1 << " plateau ratio " << fixed2(r) << ';';
    best = std::max(best, r);
  }
  o.require(best > 5.0, "plateau in 0.25 < y < 0.75");
}

void ac9(Outcome& o) {
  StabilizationConfig cfg = variant_config(Variant::Sold, 0.4, 1.1);
  const SoldComparison cmp = compare_sold(make_example<2>(6, 1e-6), 1, 8, cfg);
  const double ratio = cmp.sold_error / cmp.supg_error;
  o.detail << " max error supg(c0=10) " << sci(cmp.supg_error) << ", sold " << sci(cmp.sold_error) << ", ratio "
           << fixed2(ratio) << "; picard " << cmp.sold.report.iterations << " iterations, final update "
           << sci(cmp.sold.report.final_update) << ';';
  o.require(ratio <= 0.7, "sold/supg max-error ratio <= 0.7");
  o.require(cmp.sold.report.converged, "picard iteration converged within 50 steps");
}

struct Criterion {
  const char* title;
  double budget_seconds;
  void (*run)(Outcome&);
};

const std::map<std::string, Criterion>& criteria() {
  static const std::map<std::string, Criterion> table{
      {"AC1", {"algebraic identities", 60, ac1}},     {"AC2", {"element suite", 60, ac2}},
      {"AC3", {"patch test", 60, ac3}},               {"AC4", {"coercivity", 120, ac4}},
      {"AC5", {"2D convergence", 600, ac5}},          {"AC6", {"3D convergence", 1800, ac6}},
      {"AC7", {"stabilization split", 600, ac7}},     {"AC8", {"layer behaviour", 120, ac8}},
      {"AC9", {"SOLD against SUPG", 120, ac9}},
  };
  return table;
}

bool run_one(const std::string& id) {
  const Criterion& c = criteria().at(id);
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.run(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs <= c.budget_seconds, "runtime budget " + std::to_string(int(c.budget_seconds)) + " s");
  std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << ": " << c.title << " (" << fixed2(secs) << " s)"
            << o.detail.str() << std::endl;
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  if (which == "all") {
    bool ok = true;
    for (const auto& [id, c] : criteria()) ok = run_one(id) && ok;
    return ok ? 0 : 1;
  }
  if (!criteria().count(which)) {
    std::cerr << "unknown criterion '" << which << "' (expected AC1..AC9 or all)\n";
    return 2;
  }
  return run_one(which) ? 0 : 1;
}
