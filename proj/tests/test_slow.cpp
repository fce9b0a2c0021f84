// Preset-scale checks: eigenstate energies against oracles, dt halving,
// the displacement identity, and exchange symmetry through whole runs.
#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <numbers>

#include "kickshift/kickshift.hpp"
#include "oracles.hpp"

using namespace kickshift;
namespace fs = std::filesystem;

namespace {

/// Runs a preset once per (name, overrides) and keeps the manifest results.
const json& results(const std::string& name, const std::vector<std::string>& overrides = {}) {
  static std::map<std::string, json> cache;
  std::string key = name;
  for (const auto& o : overrides) key += "|" + o;
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const fs::path dir = fs::temp_directory_path() / ("kickshift_slow_" + std::to_string(cache.size()));
  fs::remove_all(dir);
  const auto r = run_preset(name, overrides, {dir, 1, false, {}});
  fs::remove_all(dir);
  return cache[key] = r.manifest["results"];
}

const std::vector<std::string> chain_single{"pulse.sequence=5 au"};
const std::vector<std::string> chain_single_half{"pulse.sequence=5 au", "plan.dt=0.0005 au"};

}  // namespace

TEST(Eigenstates, ChainSiteEnergy) {
  const auto& r = results("relax-chain-site");
  EXPECT_NEAR(r["energy_au"].get<double>(), -0.322, 0.003);
  EXPECT_GT(r["left_half_probability"].get<double>(), 0.99);
}

TEST(Eigenstates, HeliumGroundAgainstIndependentDiagonalisation) {
  const auto& r = results("relax-helium");
  const auto dvr = oracle::helium_dvr(128, 0.25);
  EXPECT_NEAR(dvr.ground, -2.901545, 1e-5);  // frozen
  EXPECT_NEAR(r["energy_au"].get<double>(), dvr.ground, 0.02);
  EXPECT_NEAR(r["energy_au"].get<double>(), -2.90, 0.02);
  EXPECT_LT(r["exchange_residual"].get<double>(), 1e-10);
}

TEST(Eigenstates, HydrogenAtQuarterSpacing) {
  EXPECT_NEAR(results("relax-hydrogen")["energy_au"].get<double>(), -0.5, 0.02);
}

// ---- dt halving ------------------------------------------------------------------

TEST(StepHalving, Surrogate) {
  const auto& a = results("transport-surrogate");
  const auto& b = results("transport-surrogate", {"plan.dt=0.025 au"});
  EXPECT_LT(std::abs(a["z_shift_au"].get<double>() - b["z_shift_au"].get<double>()), 1e-4);
  EXPECT_LT(std::abs(a["pz_final_au"].get<double>() - b["pz_final_au"].get<double>()), 1e-4);
}

TEST(StepHalving, ChainSinglePulse) {
  const auto& a = results("chain2-roundtrip", chain_single);
  const auto& b = results("chain2-roundtrip", chain_single_half);
  EXPECT_LT(std::abs(a["first_shift_au"].get<double>() - b["first_shift_au"].get<double>()), 1e-4);
  EXPECT_LT(std::abs(a["displaced_fidelity"].get<double>() - b["displaced_fidelity"].get<double>()), 1e-4);
}

TEST(StepHalving, Helium) {
  for (const char* p : {"helium-singlet", "helium-triplet"}) {
    const auto& a = results(p);
    const auto& b = results(p, {"plan.dt=1e-4 au", "plan.record_every=400", "plan.density_every=400"});
    EXPECT_LT(std::abs(a["z_final_au"][0].get<double>() - b["z_final_au"][0].get<double>()), 1e-4) << p;
    EXPECT_LT(std::abs(a["displaced_fidelity"].get<double>() - b["displaced_fidelity"].get<double>()), 1e-4) << p;
  }
}

// ---- displacement identity -------------------------------------------------------

TEST(DisplacementIdentity, ChainSitePulse) {
  // Preset pulse: omega = 6, window 2.09 au.
  EXPECT_GT(results("chain2-roundtrip", chain_single)["displaced_fidelity"].get<double>(), 0.95);
}

TEST(DisplacementIdentity, ChainSiteShortPulse) {
  const auto& r = results("chain2-roundtrip", {"pulse.sequence=5 au", "pulse.omega=24 au"});
  EXPECT_GT(r["displaced_fidelity"].get<double>(), 0.95);
  EXPECT_NEAR(r["first_shift_au"].get<double>(), 5.0, 0.2);
}

/// Relaxed helium ground state on the transport grid, pushed by one pulse of the given omega.
double helium_displaced_fidelity(double omega) {
  static const auto c = resolve_config("helium-singlet", "", {});
  static const GridPtr g = presets::helium_grid(c);
  static const auto v = helium_model(g).total();
  static const auto ground = relax(v, gaussian_packet(g, 0.0, 1.0, 0.0, 0.0), RelaxOptions{0.02, 1e-11});
  const auto pulse = design_for_displacement(presets::pulse_of(c, 0.0).final_displacement(), omega);
  PropagationPlan plan;
  plan.dt = std::min(c.quantity("plan.dt"), (2.0 * std::numbers::pi / (4.0 * omega)) / 20.0);
  plan.t_end = pulse.t_end();
  plan.pulses = PulseTrain({pulse});
  plan.boundary_limit = 1e-8;
  const auto tr = propagate(ground.state, plan, v);
  return fidelity(tr.final_state, translate_z(ground.state, pulse.final_displacement()));
}

TEST(DisplacementIdentity, HeliumGroundState) {
  // Preset pulse: omega = 9.2, about 3 |E|.
  EXPECT_GT(helium_displaced_fidelity(presets::pulse_of(resolve_config("helium-singlet", "", {}), 0.0).omega), 0.95);
}

TEST(DisplacementIdentity, HeliumGroundStateShortPulse) {
  // omega = 50 |E|.
  EXPECT_GT(helium_displaced_fidelity(147.2), 0.95);
}

// ---- exchange symmetry ------------------------------------------------------------

TEST(ExchangeSymmetry, ThroughHeliumRuns) {
  const auto& s = results("helium-singlet");
  const auto& t = results("helium-triplet");
  EXPECT_LT(s["max_exchange_residual"].get<double>(), 1e-8);
  EXPECT_LT(t["max_exchange_residual"].get<double>(), 1e-8);
  EXPECT_LT(t["max_diagonal_ratio"].get<double>(), 1e-8);
  EXPECT_NEAR(s["norm_final"].get<double>(), 1.0, 1e-8);
}
