// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Usage: acceptance [work_dir]   (exit status 1 if any line fails)
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kickshift/kickshift.hpp"
#include "oracles.hpp"

using namespace kickshift;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
  std::printf("%s %-34s %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

/// Runs the check, turning an exception into a failing line.
void check(const std::string& id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("error: ") + e.what());
  }
}

fs::path work;

json run(const std::string& name, const std::vector<std::string>& overrides = {}, unsigned threads = 1) {
  const fs::path dir = work / name;
  fs::remove_all(dir);
  return run_preset(name, overrides, {dir, threads, false, {}}).manifest;
}

double worst_norm_error(const std::string& name) {
  const auto norm = read_csv(work / name / "trajectory.csv").numbers("norm");
  double w = 0.0;
  for (double n : norm) w = std::max(w, std::abs(n - 1.0));
  return w;
}

PropagationPlan plan_for(PulseTrain pulses, double dt, double t_end) {
  PropagationPlan p;
  p.dt = dt;
  p.t_end = t_end;
  p.pulses = std::move(pulses);
  p.boundary_limit = 0.0;
  return p;
}

// ---- pulse algebra -----------------------------------------------------------------

void pulse_algebra() {
  check("pulse.displacement_over_up", [] {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> le0(-3.0, 2.0), lw(-3.5, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      SingleCyclePulse p;
      p.E0 = std::pow(10.0, le0(rng));
      p.omega = std::pow(10.0, lw(rng));
      const double ratio = p.displacement(p.t_end()) / p.up();
      worst = std::max(worst, std::abs(ratio - 3 * pi / 8));
    }
    // The listed 1.17810 is 3 pi / 8 = 1.1780972 rounded to five places.
    const bool listed = std::abs(3 * pi / 8 - 1.17810) < 5e-6;
    report("pulse.displacement_over_up", worst < 1e-12 && listed,
           fmt("max |ratio - 3 pi/8| = %.3g (100 draws), 3 pi/8 = %.7f", worst, 3 * pi / 8));
  });
  struct Caption {
    double alpha, omega, intensity, tol;
  };
  for (const Caption c : {Caption{1000, 0.057, 4.26e18, 0.02}, Caption{1000, 0.0059, 4.78e14, 0.02},
                          Caption{1000, 0.00117, 7.66e11, 0.05}, Caption{1000, 0.00088, 2.45e11, 0.05},
                          Caption{1000, 0.0006, 4.78e10, 0.05}, Caption{5, 6, 1.31e22, 0.02}}) {
    const std::string id = fmt("pulse.design(%g,%g)", c.alpha, c.omega);
    check(id, [&] {
      const double got = design_for_displacement(c.alpha, c.omega).intensity();
      const double rel = got / c.intensity - 1.0;
      report(id, std::abs(rel) <= c.tol,
             fmt("%.4g W/cm2 vs %.3g (%+.2f%%, tol %.0f%%)", got, c.intensity, 100 * rel, 100 * c.tol));
    });
  }
}

// ---- propagator oracles ------------------------------------------------------------

void propagator_oracles() {
  check("propagator.free_particle", [] {
    const auto g = build_grid(GridSystem::cartesian_1d, {512.0}, {0.25});
    const auto psi0 = gaussian_packet(g, -100.0, 2.0, 0.0, -100.0);
    std::vector<SingleCyclePulse> pulses{presets::pulse_of(resolve_config("transport-surrogate", "", {}), 1.0),
                                         presets::pulse_of(resolve_config("helium-singlet", "", {}), 1.0),
                                         design_for_displacement(5.0, 6.0, 1.0)};
    double shift = 0.0, pz = 0.0, norm = 0.0;
    for (const auto& p : pulses) {
      const PulseTrain train({p});
      const double dt = std::min(0.05, (2 * pi / (4 * p.omega)) / 20);
      const auto tr = propagate(psi0, plan_for(train, dt, p.t_end() + 1.0), zero_potential(g));
      shift = std::max(shift, std::abs((tr.z.back() - tr.z.front()) / p.final_displacement() - 1.0));
      pz = std::max(pz, std::abs(tr.pz.back() - tr.pz.front()));
      norm = std::max(norm, std::abs(tr.norm.back() - 1.0));
    }
    report("propagator.free_particle", shift < 1e-6 && pz < 1e-10 && norm < 1e-10,
           fmt("rel shift err %.2g, dpz %.2g, dnorm %.2g (3 preset pulses)", shift, pz, norm));
  });
  check("propagator.coherent_state", [] {
    const auto g = build_grid(GridSystem::cartesian_1d, {32.0}, {0.125});
    const auto v = sample_potential(g, [](double z) { return 0.5 * z * z; });
    double worst = 0.0;
    propagate(gaussian_packet(g, 1.0, std::sqrt(0.5)), plan_for({}, 0.01, 2 * pi), v,
              [&](std::size_t, double t, const WaveField& psi) {
                worst = std::max(worst, std::abs(expectation_z(psi) - std::cos(t)));
              });
    report("propagator.coherent_state", worst < 1e-4, fmt("max |<z> - cos t| = %.2g over one period", worst));
  });
  check("propagator.field_free_energy", [] {
    const auto g = build_grid(GridSystem::cylindrical_rz, {32.0, 64.0}, {0.25, 0.25}, {{0.0, 0.125}});
    const auto v = coulomb_potential(g);
    const auto psi0 = superposition(pi / 4, pi / 2, hydrogenic_state({1, 0}, g), hydrogenic_state({2, 1}, g));
    auto plan = plan_for({}, 0.0025, 25.0);
    plan.record_every = 100;
    const auto tr = propagate(psi0, plan, v);
    double w = 0.0;
    for (double e : tr.energy) w = std::max(w, std::abs(e - tr.energy.front()) / std::abs(tr.energy.front()));
    report("propagator.field_free_energy", w < 1e-6 && tr.steps == 10000,
           fmt("max |dE/E| = %.2g over %zu steps", w, tr.steps));
  });
}

// ---- eigenstates -------------------------------------------------------------------

void eigenstates() {
  check("eigen.chain_site", [] {
    const double e = run("relax-chain-site")["results"]["energy_au"].get<double>();
    report("eigen.chain_site", std::abs(e + 0.322) <= 0.003, fmt("E = %.5f (target -0.322 +- 0.003)", e));
  });
  check("eigen.helium", [] {
    const double e = run("relax-helium")["results"]["energy_au"].get<double>();
    const double ref = oracle::helium_dvr(128, 0.25).ground;
    report("eigen.helium", std::abs(e + 2.90) <= 0.02 && std::abs(e - ref) <= 0.02,
           fmt("E = %.5f, independent DVR %.5f (target -2.90 +- 0.02)", e, ref));
  });
  check("eigen.hydrogen", [] {
    const double e = run("relax-hydrogen")["results"]["energy_au"].get<double>();
    report("eigen.hydrogen", std::abs(e + 0.5) <= 0.02, fmt("E = %.5f at d = 0.25 (target -0.5 +- 0.02)", e));
  });
}

// ---- transport ---------------------------------------------------------------------

void chain() {
  check("chain.single_pulse_shift", [] {
    const auto m = run("chain2-roundtrip");
    const double s = m["results"]["first_shift_au"].get<double>();
    report("chain.single_pulse_shift", std::abs(s - 5.0) <= 0.2, fmt("<z> shift %.4f after +5 (target 5 +- 0.2)", s));
    const double f = m["results"]["fidelity"].get<double>();
    report("chain.roundtrip_fidelity(+5,-5)", f >= 0.90, fmt("F = %.4f (target >= 0.90)", f));
  });
  check("chain.roundtrip_fidelity", [] {
    const double f = run("chain4-roundtrip")["results"]["fidelity"].get<double>();
    report("chain.roundtrip_fidelity", f >= 0.90, fmt("F = %.4f for +5,+5,+5,-15 (target >= 0.90)", f));
  });
  check("chain.unitarity", [] {
    const double w = std::max(worst_norm_error("chain2-roundtrip"), worst_norm_error("chain4-roundtrip"));
    report("chain.unitarity", w < 1e-8, fmt("max |norm - 1| = %.2g", w));
  });
}

void helium() {
  for (const char* spin : {"singlet", "triplet"}) {
    const std::string name = std::string("helium-") + spin;
    check(name, [&] {
      const auto r = run(name)["results"];
      const double z1 = r["z_final_au"][0].get<double>(), z2 = r["z_final_au"][1].get<double>();
      report(name + ".relocation", std::abs(z1 - 15.5) <= 0.3 && std::abs(z2 - 15.5) <= 0.3,
             fmt("(%.4f, %.4f) (target 15.5 +- 0.3)", z1, z2));
      const double x = r["max_exchange_residual"].get<double>();
      report(name + ".exchange_residual", x < 1e-8, fmt("max residual %.2g over the run", x));
      if (r.contains("max_diagonal_ratio")) {
        const double d = r["max_diagonal_ratio"].get<double>();
        report(name + ".diagonal_node", d < 1e-8, fmt("max |psi(z,z)| / max |psi| = %.2g", d));
      }
      const double w = worst_norm_error(name);
      report(name + ".unitarity", w < 1e-8, fmt("max |norm - 1| = %.2g", w));
    });
  }
}

// ---- phase retrieval ---------------------------------------------------------------

void retrieval_pipeline() {
  check("scan.field_free_vs_oracle", [] {
    const fs::path dir = work / "phase-scan-field-free";
    fs::remove_all(dir);
    run_preset("phase-scan", {"scan.mode=field-free"}, {dir, 1, false, {}});
    const double rho_ij = oracle::pz_matrix_element(2, 1, 3, 2, 128, 512, 0.5, 0.25).real();
    const auto csv = read_csv(dir / "scan.csv");
    const auto th = csv.numbers("theta_rad"), ph = csv.numbers("phi_rad"), pz = csv.numbers("pz_au");
    double w = 0.0;
    for (std::size_t i = 0; i < pz.size(); ++i) w = std::max(w, std::abs(pz[i] - pz_model(th[i], ph[i], rho_ij)));
    report("scan.field_free_vs_oracle", w < 1e-6 && pz.size() == 36,
           fmt("max |pz - rho_ij cos(phi) sin(2 theta)| = %.2g, rho_ij = %.6f", w, rho_ij));
  });
  check("scan.synthetic_fit", [] {
    ScanTable t;
    t.theta_values = default_theta_values();
    t.phi_values = default_phi_values();
    for (double p : t.phi_values) {
      std::vector<double> row;
      for (double th : t.theta_values) row.push_back(0.09 * std::cos(p - 0.033 * pi) * std::sin(2 * th));
      t.pz.push_back(row);
    }
    const auto f = fit_scan(t);
    const double w = std::max({std::abs(f.a), std::abs(f.b - 0.09), std::abs(f.phi0 + 0.033 * pi)});
    report("scan.synthetic_fit", w < 1e-10, fmt("a %.2g, b %.10f, phi0/pi %.10f", f.a, f.b, f.phi0 / pi));
  });
  check("scan.surrogate", [] {
    const auto m = run("phase-scan");
    const auto& fit = m["phase_fit"];
    const double r = fit["residual_over_b"].get<double>();
    report("scan.surrogate_residual", r < 0.05,
           fmt("rms/b = %.4f, b = %.4f, phi0/pi = %.4f", r, fit["b"].get<double>(), fit["phi0_rad"].get<double>() / pi));
    // Rows are ordered by increasing phi in (0, pi/2]; amplitudes B ~ cos(phi + phi0) must fall strictly.
    std::vector<double> B;
    for (const auto& row : fit["rows"]) B.push_back(row["B"].get<double>());
    bool ordered = B.size() == 4;
    for (std::size_t i = 1; i < B.size(); ++i) ordered &= B[i] < B[i - 1];
    std::ostringstream os;
    os << "B =";
    for (double b : B) os << ' ' << fmt("%.5f", b);
    report("scan.surrogate_phi_ordering", ordered, os.str());
  });
}

}  // namespace

int main(int argc, char** argv) {
  work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "kickshift_acceptance";
  fs::create_directories(work);
  pulse_algebra();
  propagator_oracles();
  eigenstates();
  chain();
  helium();
  retrieval_pipeline();
  std::printf("NOTE %-34s %s\n", "transport-full",
              "paper-scale (9,8)/(10,9) run is flagged long and not run here");
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
