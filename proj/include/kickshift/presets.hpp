#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kickshift/config.hpp"
#include "kickshift/io.hpp"
#include "kickshift/manifest.hpp"
#include "kickshift/models.hpp"
#include "kickshift/retrieval.hpp"
#include "kickshift/solver.hpp"

namespace kickshift {

struct RunOptions {
  std::filesystem::path out_dir;
  unsigned threads = 1;
  bool dry_run = false;
  /// Receives one-line progress messages (may be empty).
  std::function<void(const std::string&)> log;
};

struct RunResult {
  json manifest;
  std::filesystem::path manifest_path;
  /// Resolved config and cost estimate for dry runs.
  std::string report;
};

struct Preset {
  std::string name;
  std::string description;
  bool long_running = false;
  std::function<Schema()> schema;
  std::function<RunResult(const Config&, const RunOptions&)> run;
};

namespace presets {

// ---- schema fragments -----------------------------------------------------

inline void add(Schema& s, const std::string& key, Kind kind, std::string def, std::string help, bool list = false) {
  s[key] = KeySpec{kind, std::move(def), std::move(help), list};
}

inline void cylindrical_grid_keys(Schema& s, const char* rho, const char* z, const char* d, const char* offset) {
  add(s, "grid.extent_rho", Kind::length, rho, "radial box size");
  add(s, "grid.extent_z", Kind::length, z, "axial box size");
  add(s, "grid.spacing", Kind::length, d, "node spacing on both axes");
  add(s, "grid.offset_z", Kind::length, offset, "shift of the z nodes (half a cell keeps nuclei off nodes)");
  add(s, "grid.radial_kinetic", Kind::text, "conservative", "conservative | sine");
}

inline void pulse_keys(Schema& s, const char* alpha, const char* omega) {
  add(s, "pulse.alpha", Kind::length, alpha, "target final displacement (sign sets direction)");
  add(s, "pulse.omega", Kind::frequency, omega, "angular frequency");
  add(s, "pulse.E0", Kind::field, "", "peak-strength parameter; overrides alpha when set");
  add(s, "pulse.intensity", Kind::intensity, "", "intensity; overrides alpha when set (E0 wins over both)");
  add(s, "pulse.t_start", Kind::time, "0 au", "window start");
}

inline void plan_keys(Schema& s, const char* dt, const char* boundary) {
  add(s, "plan.dt", Kind::time, dt, "time step");
  add(s, "plan.t_after", Kind::time, "0 au", "field-free time appended after the last pulse");
  add(s, "plan.record_every", Kind::integer, "10", "observable cadence in steps");
  add(s, "plan.density_every", Kind::integer, "10", "P(z) cadence in steps (0 disables)");
  add(s, "plan.snapshot_count", Kind::integer, "3", "evenly spaced full-grid density snapshots");
  add(s, "plan.snapshot_stride", Kind::integer, "1", "snapshot downsampling stride per axis");
  add(s, "plan.boundary_limit", Kind::real, boundary, "abort when edge density exceeds this (0 disables)");
}

inline void state_keys(Schema& s, const char* si, const char* sj, const char* theta, const char* phi) {
  add(s, "model.state_i", Kind::text, si, "lower state as n,l");
  add(s, "model.state_j", Kind::text, sj, "upper state as n,l");
  add(s, "model.theta", Kind::angle, theta, "polar Bloch angle");
  add(s, "model.phi", Kind::angle, phi, "relative phase");
}

// ---- config readers -------------------------------------------------------

inline RadialKinetic radial_of(const Config& c) { return radial_kinetic_from_string(c.text("grid.radial_kinetic")); }

inline GridPtr cylindrical_grid(const Config& c) {
  GridOptions o;
  o.offsets = {0.0, c.quantity("grid.offset_z")};
  o.radial = radial_of(c);
  const double d = c.quantity("grid.spacing");
  return build_grid(GridSystem::cylindrical_rz, {c.quantity("grid.extent_rho"), c.quantity("grid.extent_z")}, {d, d}, o);
}

inline SingleCyclePulse pulse_of(const Config& c, double t_start) {
  const double omega = c.quantity("pulse.omega");
  const double alpha = c.quantity("pulse.alpha");
  if (c.has_value("pulse.E0") || c.has_value("pulse.intensity")) {
    if (!(omega > 0.0)) throw ConfigError("pulse.omega must be positive");
    SingleCyclePulse p;
    p.omega = omega;
    p.t_start = t_start;
    p.sign = alpha < 0.0 ? -1 : 1;
    p.E0 = c.has_value("pulse.E0") ? c.quantity("pulse.E0") : intensity_to_field(c.quantity("pulse.intensity"));
    return p;
  }
  return design_for_displacement(alpha, omega, t_start);
}

inline HydrogenicLabel label_of(const Config& c, const std::string& key) {
  const auto parts = detail::split(c.text(key), ',');
  if (parts.size() != 2) throw ConfigError("'" + key + "' expects n,l");
  HydrogenicLabel l{static_cast<int>(detail::parse_number(parts[0], key)),
                    static_cast<int>(detail::parse_number(parts[1], key))};
  l.validate();
  return l;
}

inline void read_plan_records(const Config& c, PropagationPlan& p) {
  auto nonneg = [&](const char* k) {
    const auto v = c.integer(k);
    if (v < 0) throw ConfigError(std::string(k) + " must be >= 0");
    return static_cast<std::size_t>(v);
  };
  p.dt = c.quantity("plan.dt");
  p.record_every = nonneg("plan.record_every");
  p.density_every = nonneg("plan.density_every");
  p.snapshot_stride = std::max<std::size_t>(1, nonneg("plan.snapshot_stride"));
  p.boundary_limit = std::stod(c.text("plan.boundary_limit"));
  const std::size_t count = nonneg("plan.snapshot_count");
  for (std::size_t i = 0; i < count; ++i)
    p.snapshot_times.push_back(count == 1 ? p.t_end
                                          : p.t_start + (p.t_end - p.t_start) * static_cast<double>(i) /
                                                            static_cast<double>(count - 1));
}

inline std::filesystem::path prepare_dir(const RunOptions& o) {
  std::filesystem::create_directories(o.out_dir);
  return o.out_dir;
}

inline void say(const RunOptions& o, const std::string& m) {
  if (o.log) o.log(m);
}

/// Rough cost of a propagation: memory in bytes and floating-point work.
inline json cost_estimate(const Grid& g, std::size_t steps) {
  const double n = static_cast<double>(g.size());
  double flops_per_step = 0.0;
  if (g.is_cylindrical()) {
    const double nr = static_cast<double>(g.axis(0).n_points), nz = static_cast<double>(g.axis(1).n_points);
    flops_per_step = 2.0 * (5.0 * n * std::log2(nz)) + 2.0 * (4.0 * nr * nr * nz);
  } else {
    flops_per_step = 2.0 * 5.0 * n * std::log2(n);
  }
  const double radial = g.is_cylindrical() ? std::pow(static_cast<double>(g.axis(0).n_points), 2) * 8.0 : 0.0;
  return json{{"nodes", g.size()},
              {"steps", steps},
              {"memory_bytes", n * 16.0 * 6.0 + radial},
              {"gflop", flops_per_step * static_cast<double>(steps) * 1e-9}};
}

inline RunResult dry(const std::string& name, const Config& c, const json& cost) {
  RunResult r;
  std::ostringstream os;
  os << "# preset " << name << "\n" << c.dump() << "\n# estimate\n" << cost.dump(2) << "\n";
  r.report = os.str();
  r.manifest = json{{"preset", name}, {"dry_run", true}, {"estimate", cost}};
  return r;
}

inline RunResult finish(ManifestBuilder& m) {
  RunResult r;
  r.manifest_path = m.write();
  r.manifest = m.doc();
  return r;
}

// Writes the standard trajectory outputs and registers them.
inline void write_trajectory_outputs(ManifestBuilder& m, const Trajectory& tr, const Grid& g, std::size_t stride,
                                     const std::string& plan_hash) {
  const auto dir = m.dir();
  write_trajectory_csv(dir / "trajectory.csv", tr);
  m.add_output(dir / "trajectory.csv", "csv", "t_au,norm,z_au,pz_au,energy_au");
  if (!tr.density.times.empty() || !tr.snapshots.empty()) {
    for (const auto& p : export_density(tr, g, stride, dir, "density"))
      m.add_output(p, p.extension() == ".csv" ? "csv" : "snapshot",
                   p.extension() == ".csv" ? "P(z,t) long format with alpha overlay" : "full-grid density");
  }
  write_checkpoint(dir / "final.kschk", tr.final_state, tr.times.empty() ? 0.0 : tr.times.back(), plan_hash);
  m.add_output(dir / "final.kschk", "checkpoint", "final wavefield");
}

// ---- pipelines ------------------------------------------------------------

inline Schema design_schema() {
  Schema s;
  pulse_keys(s, "1000 au", "0.057 au");
  add(s, "model.delta_e", Kind::frequency, "0.0012 au", "level spacing for the distortion advisory");
  add(s, "output.samples", Kind::integer, "201", "samples of A(t) and alpha(t) written to pulse.csv");
  return s;
}

inline RunResult run_design(const Config& c, const RunOptions& o) {
  const SingleCyclePulse p = pulse_of(c, c.quantity("pulse.t_start"));
  if (o.dry_run) return dry("design", c, json{{"samples", c.integer("output.samples")}});
  ManifestBuilder m("design", prepare_dir(o));
  m.set_config(c);
  m.add_pulse(p);
  const auto adv = distortion_ratio(p, c.quantity("model.delta_e"));
  auto& r = m.results();
  r["E0_au"] = p.E0;
  r["intensity_wpcm2"] = p.intensity();
  r["final_displacement_au"] = p.final_displacement();
  r["displacement_per_up"] = p.final_displacement() / (p.sign * p.up());
  r["duration_au"] = p.duration();
  r["duration_fs"] = p.duration() * au_time_as / 1000.0;
  r["distortion_ratio"] = adv.ratio;
  r["distortion_prone"] = adv.distortion_prone;
  const auto n = static_cast<std::size_t>(std::max<long long>(2, c.integer("output.samples")));
  const auto path = m.dir() / "pulse.csv";
  CsvWriter w(path, {"t_au", "A_au", "alpha_au"});
  for (std::size_t i = 0; i < n; ++i) {
    const double t = p.t_start + p.duration() * static_cast<double>(i) / static_cast<double>(n - 1);
    w.row({t, p.vector_potential(t), p.displacement(t)});
  }
  w.close();
  m.add_output(path, "csv", "A(t) and alpha(t) over the window");
  return finish(m);
}

inline Schema transport_schema(bool full) {
  Schema s;
  if (full) {
    cylindrical_grid_keys(s, "512 au", "4096 au", "0.25 au", "0.125 au");
    state_keys(s, "9,8", "10,9", "1/4 pi rad", "0 rad");
    pulse_keys(s, "1000 au", "0.057 au");
    plan_keys(s, "0.05 au", "1e-10");
    add(s, "run.allow_long", Kind::flag, "false", "must be true to execute the paper-scale run");
    s["plan.snapshot_stride"].default_value = "4";
    s["plan.density_every"].default_value = "100";
    s["plan.record_every"].default_value = "100";
  } else {
    cylindrical_grid_keys(s, "64 au", "256 au", "0.5 au", "0.25 au");
    state_keys(s, "2,1", "3,2", "1/4 pi rad", "1/2 pi rad");
    pulse_keys(s, "50 au", "1.5 au");
    plan_keys(s, "0.05 au", "1e-8");
  }
  return s;
}

inline RunResult run_transport(const std::string& name, const Config& c, const RunOptions& o) {
  const bool full = c.schema().contains("run.allow_long");
  const GridPtr g = cylindrical_grid(c);
  const SingleCyclePulse pulse = pulse_of(c, c.quantity("pulse.t_start"));
  PropagationPlan plan;
  plan.pulses = PulseTrain({pulse});
  plan.t_start = 0.0;
  plan.t_end = pulse.t_end() + c.quantity("plan.t_after");
  read_plan_records(c, plan);
  plan.validate();
  if (o.dry_run) return dry(name, c, cost_estimate(*g, plan.steps()));
  if (full && !c.flag("run.allow_long"))
    throw ConfigError(name + " is a long-running paper-scale preset; set run.allow_long=true to execute it");

  SuperpositionSpec spec{c.quantity("model.theta"), c.quantity("model.phi"), label_of(c, "model.state_i"),
                         label_of(c, "model.state_j")};
  const auto dir = prepare_dir(o);
  std::size_t nr = g->axis(0).n_points / plan.snapshot_stride + 1, nz = g->axis(1).n_points / plan.snapshot_stride + 1;
  ensure_space(dir, plan.snapshot_times.size() * nr * nz * 8 + g->size() * 16);

  ManifestBuilder m(name, dir);
  m.set_config(c);
  m.set_grid(*g);
  m.set_plan(plan);
  say(o, "building states");
  const auto v = coulomb_potential(g);
  const WaveField psi0 = superposition(spec, g);
  say(o, "propagating " + std::to_string(plan.steps()) + " steps");
  const Trajectory tr = propagate(psi0, plan, v);

  const auto& d = tr.density;
  auto centroid = [&](const std::vector<double>& p) {
    double s = 0.0, n = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      s += d.z_axis[j] * p[j];
      n += p[j];
    }
    return s / n;
  };
  auto& r = m.results();
  r["delta_e_au"] = spec.delta_e();
  r["distortion_ratio"] = distortion_ratio(pulse, spec.delta_e()).ratio;
  r["final_displacement_au"] = pulse.final_displacement();
  r["z_shift_au"] = tr.z.back() - tr.z.front();
  r["pz_initial_au"] = tr.pz.front();
  r["pz_final_au"] = tr.pz.back();
  r["norm_final"] = tr.norm.back();
  r["max_boundary_density"] = tr.max_boundary;
  if (!d.times.empty()) {
    const auto& last = d.density.back();
    r["density_centroid_shift_au"] = centroid(last) - centroid(d.density.front());
    r["density_argmax_z_au"] = d.z_axis[static_cast<std::size_t>(std::max_element(last.begin(), last.end()) - last.begin())];
  }
  write_trajectory_outputs(m, tr, *g, plan.snapshot_stride, plan.hash());
  return finish(m);
}

inline Schema chain_schema(const char* sequence) {
  Schema s;
  cylindrical_grid_keys(s, "32 au", "128 au", "0.125 au", "0.0625 au");
  add(s, "model.Z", Kind::real, "0.8", "site charge");
  add(s, "model.R", Kind::length, "5 au", "site spacing");
  add(s, "model.sites", Kind::integer, "4", "number of sites");
  add(s, "relax.dtau", Kind::time, "0.05 au", "imaginary time step");
  add(s, "relax.tol", Kind::real, "1e-10", "energy convergence");
  add(s, "pulse.sequence", Kind::length, sequence, "displacement of each pulse", true);
  add(s, "pulse.omega", Kind::frequency, "6 au", "angular frequency of every pulse");
  add(s, "pulse.gap", Kind::time, "0 au", "field-free time between pulses");
  plan_keys(s, "0.001 au", "1e-5");
  s["plan.record_every"].default_value = "100";
  s["plan.density_every"].default_value = "100";
  return s;
}

inline RunResult run_chain(const std::string& name, const Config& c, const RunOptions& o) {
  const GridPtr g = cylindrical_grid(c);
  const auto seq = c.quantities("pulse.sequence");
  if (seq.empty()) throw ConfigError("pulse.sequence is empty");
  const double gap = c.quantity("pulse.gap");
  PropagationPlan plan;
  plan.pulses = PulseTrain::sequence(seq, c.quantity("pulse.omega"), 0.0, gap);
  plan.t_end = plan.pulses.end_time() + c.quantity("plan.t_after");
  read_plan_records(c, plan);
  plan.snapshot_times.clear();
  plan.snapshot_times.push_back(0.0);
  for (const auto& p : plan.pulses.pulses()) plan.snapshot_times.push_back(p.t_end());
  plan.validate();
  if (o.dry_run) return dry(name, c, cost_estimate(*g, plan.steps()));

  const double Z = std::stod(c.text("model.Z"));
  const double R = c.quantity("model.R");
  const int n_sites = static_cast<int>(c.integer("model.sites"));
  const auto sites = chain_sites(R, n_sites);
  const double left = sites.back();

  ManifestBuilder m(name, prepare_dir(o));
  m.set_config(c);
  m.set_grid(*g);
  m.set_plan(plan);
  const auto v = chain_potential(g, Z, R, n_sites);
  say(o, "relaxing the left-site state");
  const auto rr = relax(site_potential(g, Z, left), gaussian_packet(g, left, 1.0),
                        RelaxOptions{c.quantity("relax.dtau"), std::stod(c.text("relax.tol"))});
  say(o, "propagating " + std::to_string(plan.steps()) + " steps");

  // <z> at the end of each pulse window.
  std::vector<double> z_after;
  std::size_t next = 0;
  const auto& ps = plan.pulses.pulses();
  const double dt = plan.effective_dt();
  const Trajectory tr = propagate(rr.state, plan, v, [&](std::size_t, double t, const WaveField& psi) {
    if (next < ps.size() && t >= ps[next].t_end() - 0.5 * dt) {
      z_after.push_back(expectation_z(psi));
      ++next;
    }
  });

  auto& r = m.results();
  r["site_energy_au"] = rr.energy;
  r["site_energy_in_chain_au"] = total_energy(rr.state, v);
  r["relax_iterations"] = rr.iterations;
  r["z_initial_au"] = tr.z.front();
  json za = json::array();
  for (double z : z_after) za.push_back(z);
  r["z_after_pulse_au"] = za;
  r["first_shift_au"] = z_after.empty() ? 0.0 : z_after.front() - tr.z.front();
  r["fidelity"] = fidelity(tr.final_state, rr.state);
  r["displaced_fidelity"] = fidelity(tr.final_state, translate_z(rr.state, plan.pulses.displacement(plan.t_end)));
  r["norm_final"] = tr.norm.back();
  r["max_boundary_density"] = tr.max_boundary;
  write_trajectory_outputs(m, tr, *g, plan.snapshot_stride, plan.hash());
  return finish(m);
}

inline Schema helium_schema(const char* spin) {
  Schema s;
  add(s, "grid.extent", Kind::length, "64 au", "box size on each electron axis");
  add(s, "grid.spacing", Kind::length, "0.25 au", "node spacing");
  add(s, "grid.offset", Kind::length, "8 au", "shift of both axes towards the displacement");
  add(s, "model.spin", Kind::text, spin, "singlet | triplet");
  pulse_keys(s, "15.54 au", "9.2 au");
  s["pulse.intensity"].default_value = "7e23 wpcm2";
  plan_keys(s, "2e-4 au", "1e-8");
  s["plan.record_every"].default_value = "200";
  s["plan.density_every"].default_value = "200";
  s["plan.snapshot_count"].default_value = "2";
  return s;
}

inline GridPtr helium_grid(const Config& c) {
  const double L = c.quantity("grid.extent"), d = c.quantity("grid.spacing"), off = c.quantity("grid.offset");
  GridOptions o;
  o.offsets = {off, off};
  return build_grid(GridSystem::cartesian_2e, {L, L}, {d, d}, o);
}

inline Spin spin_of(const Config& c) {
  const auto s = c.text("model.spin");
  if (s == "singlet") return Spin::singlet;
  if (s == "triplet") return Spin::triplet;
  throw ConfigError("model.spin must be singlet or triplet, got '" + s + "'");
}

inline RunResult run_helium(const std::string& name, const Config& c, const RunOptions& o) {
  const GridPtr g = helium_grid(c);
  const Spin spin = spin_of(c);
  const SingleCyclePulse pulse = pulse_of(c, c.quantity("pulse.t_start"));
  PropagationPlan plan;
  plan.pulses = PulseTrain({pulse});
  plan.t_end = pulse.t_end() + c.quantity("plan.t_after");
  read_plan_records(c, plan);
  plan.validate();
  if (o.dry_run) return dry(name, c, cost_estimate(*g, plan.steps()));

  ManifestBuilder m(name, prepare_dir(o));
  m.set_config(c);
  m.set_grid(*g);
  m.set_plan(plan);
  const auto model = helium_model(g);
  const auto v = model.total();
  const auto g1 = axis_grid(*g, 0);
  const auto ion = eigensolve_1d(helium_ion_potential(g1), 2);
  const WaveField psi0 = two_electron_state(ion[0].state, ion[1].state, spin, g);
  const int s = spin == Spin::singlet ? 1 : -1;
  const std::size_t n = g->axis(0).n_points;

  double max_res = 0.0, max_diag = 0.0;
  auto track = [&](const WaveField& psi) {
    max_res = std::max(max_res, exchange_residual(psi, s));
    if (spin == Spin::triplet) {
      const auto a = psi.values();
      double peak = 0.0, diag = 0.0;
      for (const auto& x : a) peak = std::max(peak, std::abs(x));
      for (std::size_t i = 0; i < n; ++i) diag = std::max(diag, std::abs(a[i * n + i]));
      max_diag = std::max(max_diag, diag / peak);
    }
  };
  track(psi0);
  say(o, "propagating " + std::to_string(plan.steps()) + " steps");
  const std::size_t every = std::max<std::size_t>(1, plan.record_every);
  const Trajectory tr = propagate(psi0, plan, v, [&](std::size_t k, double, const WaveField& psi) {
    if (k % every == 0) track(psi);
  });
  track(tr.final_state);

  const auto [z1, z2] = expectation_z_pair(tr.final_state);
  const auto [z1i, z2i] = expectation_z_pair(psi0);
  auto& r = m.results();
  r["ion_energies_au"] = json::array({ion[0].energy, ion[1].energy});
  r["initial_energy_au"] = total_energy(psi0, v);
  r["final_displacement_au"] = pulse.final_displacement();
  r["z_initial_au"] = json::array({z1i, z2i});
  r["z_final_au"] = json::array({z1, z2});
  r["displaced_fidelity"] = fidelity(tr.final_state, translate_z(psi0, pulse.final_displacement()));
  r["max_exchange_residual"] = max_res;
  if (spin == Spin::triplet) r["max_diagonal_ratio"] = max_diag;
  r["norm_final"] = tr.norm.back();
  r["max_boundary_density"] = tr.max_boundary;
  write_trajectory_outputs(m, tr, *g, plan.snapshot_stride, plan.hash());
  return finish(m);
}

inline Schema scan_schema() {
  Schema s;
  cylindrical_grid_keys(s, "64 au", "256 au", "0.5 au", "0.25 au");
  add(s, "model.state_i", Kind::text, "2,1", "lower state as n,l");
  add(s, "model.state_j", Kind::text, "3,2", "upper state as n,l");
  add(s, "scan.theta", Kind::angle, "0, 1/16 pi, 1/8 pi, 3/16 pi, 1/4 pi, 5/16 pi, 3/8 pi, 7/16 pi, 1/2 pi rad",
      "polar angles", true);
  add(s, "scan.phi", Kind::angle, "1/6 pi, 1/4 pi, 1/3 pi, 1/2 pi rad", "relative phases", true);
  add(s, "scan.mode", Kind::text, "pulsed", "pulsed | field-free");
  add(s, "scan.b_ref", Kind::real, "", "reference amplitude for the decay (default: field-free rho_ij)");
  pulse_keys(s, "50 au", "1.5 au");
  add(s, "plan.dt", Kind::time, "0.05 au", "time step");
  add(s, "plan.boundary_limit", Kind::real, "1e-8", "abort when edge density exceeds this (0 disables)");
  return s;
}

inline RunResult run_scan_preset(const Config& c, const RunOptions& o) {
  const GridPtr g = cylindrical_grid(c);
  const auto mode = c.text("scan.mode");
  if (mode != "pulsed" && mode != "field-free") throw ConfigError("scan.mode must be pulsed or field-free");
  const bool pulsed = mode == "pulsed";
  const SingleCyclePulse pulse = pulse_of(c, c.quantity("pulse.t_start"));
  PropagationPlan plan;
  plan.pulses = PulseTrain({pulse});
  plan.t_end = pulse.t_end();
  plan.dt = c.quantity("plan.dt");
  plan.boundary_limit = std::stod(c.text("plan.boundary_limit"));
  plan.validate();
  const auto theta = c.quantities("scan.theta");
  const auto phi = c.quantities("scan.phi");
  if (o.dry_run) {
    auto est = cost_estimate(*g, pulsed ? plan.steps() : 0);
    est["cells"] = theta.size() * phi.size();
    return dry("phase-scan", c, est);
  }

  ManifestBuilder m("phase-scan", prepare_dir(o));
  m.set_config(c);
  m.set_grid(*g);
  if (pulsed) m.set_plan(plan);
  m.set_serial(o.threads <= 1);
  const auto v = coulomb_potential(g);
  const WaveField chi_i = hydrogenic_state(label_of(c, "model.state_i"), g);
  const WaveField chi_j = hydrogenic_state(label_of(c, "model.state_j"), g);
  const double rho_ij = expectation_pz(superposition(std::numbers::pi / 4.0, 0.0, chi_i, chi_j));

  auto cell = [&](double th, double ph) {
    const WaveField psi = superposition(th, ph, chi_i, chi_j);
    if (!pulsed) return expectation_pz(psi);
    return propagate(psi, plan, v).pz.back();
  };
  say(o, "scanning " + std::to_string(theta.size() * phi.size()) + " cells");
  const ScanTable table = run_scan(theta, phi, cell, o.threads);
  write_scan_csv(m.dir() / "scan.csv", table);
  m.add_output(m.dir() / "scan.csv", "csv", "theta_rad,phi_rad,pz_au,run_id");

  auto& r = m.results();
  r["mode"] = mode;
  r["rho_ij_au"] = rho_ij;
  double dev = 0.0;
  for (std::size_t p = 0; p < phi.size(); ++p)
    for (std::size_t k = 0; k < theta.size(); ++k)
      dev = std::max(dev, std::abs(table.pz[p][k] - pz_model(theta[k], phi[p], rho_ij)));
  r["max_model_deviation_au"] = dev;
  if (theta.size() >= 3 && phi.size() >= 3) {
    const double b_ref = c.has_value("scan.b_ref") ? std::stod(c.text("scan.b_ref")) : rho_ij;
    const PhaseFit f = fit_scan(table, b_ref);
    json rows = json::array();
    for (const auto& t : fit_rows(table)) rows.push_back(json{{"a", t.a}, {"B", t.B}, {"rms", t.residual_rms}});
    m.doc()["phase_fit"] = json{{"a", f.a},
                                {"b", f.b},
                                {"phi0_rad", f.phi0},
                                {"gamma", num(f.gamma)},
                                {"b_ref", b_ref},
                                {"residual_rms", f.residual_rms},
                                {"residual_over_b", f.b > 0.0 ? num(f.residual_rms / f.b) : json(nullptr)},
                                {"degenerate", f.degenerate},
                                {"rows", rows}};
  } else if (theta.size() >= 3) {
    // A single phase only fixes the product b cos(phi + phi0).
    const ThetaFit t = fit_theta(theta, table.pz[0]);
    m.doc()["phase_fit"] = json{{"a", t.a}, {"b_cos_phi_plus_phi0", t.B}, {"residual_rms", t.residual_rms}};
  }
  return finish(m);
}

inline Schema relax_schema(const std::string& target) {
  Schema s;
  add(s, "relax.dtau", Kind::time, "0.05 au", "imaginary time step");
  add(s, "relax.tol", Kind::real, "1e-10", "energy convergence");
  add(s, "relax.width", Kind::length, "1 au", "width of the Gaussian guess");
  if (target == "hydrogen") {
    cylindrical_grid_keys(s, "16 au", "32 au", "0.25 au", "0.125 au");
    add(s, "model.Z", Kind::real, "1", "nuclear charge");
  } else if (target == "chain-site") {
    cylindrical_grid_keys(s, "32 au", "128 au", "0.125 au", "0.0625 au");
    add(s, "model.Z", Kind::real, "0.8", "site charge");
    add(s, "model.R", Kind::length, "5 au", "site spacing");
    add(s, "model.sites", Kind::integer, "4", "number of sites");
  } else {
    add(s, "grid.extent", Kind::length, "32 au", "box size per axis");
    add(s, "grid.spacing", Kind::length, "0.25 au", "node spacing");
    add(s, "grid.offset", Kind::length, "0 au", "axis shift");
    s["relax.dtau"].default_value = "0.02 au";
    s["relax.tol"].default_value = "1e-9";
  }
  return s;
}

inline RunResult run_relax(const std::string& target, const Config& c, const RunOptions& o) {
  const std::string name = "relax-" + target;
  const RelaxOptions ro{c.quantity("relax.dtau"), std::stod(c.text("relax.tol"))};
  const double width = c.quantity("relax.width");
  GridPtr g;
  if (target == "helium") {
    const double L = c.quantity("grid.extent"), d = c.quantity("grid.spacing"), off = c.quantity("grid.offset");
    g = build_grid(GridSystem::cartesian_2e, {L, L}, {d, d}, GridOptions{{off, off}, RadialKinetic::conservative});
  } else {
    g = cylindrical_grid(c);
  }
  if (o.dry_run) return dry(name, c, cost_estimate(*g, 0));
  ManifestBuilder m(name, prepare_dir(o));
  m.set_config(c);
  m.set_grid(*g);
  auto& r = m.results();
  RelaxResult rr;
  if (target == "hydrogen") {
    const auto v = coulomb_potential(g, std::stod(c.text("model.Z")));
    rr = relax(v, gaussian_packet(g, 0.0, width), ro);
  } else if (target == "chain-site") {
    const double Z = std::stod(c.text("model.Z")), R = c.quantity("model.R");
    const int n = static_cast<int>(c.integer("model.sites"));
    const double left = chain_sites(R, n).back();
    rr = relax(site_potential(g, Z, left), gaussian_packet(g, left, width), ro);
    const auto chain = chain_potential(g, Z, R, n);
    r["energy_in_chain_au"] = total_energy(rr.state, chain);
    const auto p = density_z(rr.state);
    const auto z = g->axis(1).nodes();
    double lhs = 0.0, tot = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      tot += p[j];
      if (z[j] < 0.0) lhs += p[j];
    }
    r["left_half_probability"] = lhs / tot;
  } else {
    const auto model = helium_model(g);
    rr = relax(model.total(), gaussian_packet(g, 0.0, width, 0.0, 0.0), ro);
    const auto ion = eigensolve_1d(helium_ion_potential(axis_grid(*g, 0)), 2);
    r["ion_energies_au"] = json::array({ion[0].energy, ion[1].energy});
    r["exchange_residual"] = exchange_residual(rr.state, 1);
  }
  r["energy_au"] = rr.energy;
  r["iterations"] = rr.iterations;
  r["last_delta_au"] = rr.last_delta;
  write_checkpoint(m.dir() / "state.kschk", rr.state, 0.0, "");
  m.add_output(m.dir() / "state.kschk", "checkpoint", "relaxed state");
  return finish(m);
}

}  // namespace presets

/// All named pipelines.
inline const std::map<std::string, Preset>& preset_registry() {
  using namespace presets;
  static const std::map<std::string, Preset> reg = [] {
    std::map<std::string, Preset> m;
    auto put = [&](Preset p) { m.emplace(p.name, std::move(p)); };
    put({"design", "pulse algebra for a target displacement", false, design_schema, run_design});
    put({"transport-surrogate", "(2p,3d) superposition displaced by one pulse", false,
         [] { return transport_schema(false); },
         [](const Config& c, const RunOptions& o) { return run_transport("transport-surrogate", c, o); }});
    put({"transport-full", "(9,8)/(10,9) superposition at paper scale (hours to days)", true,
         [] { return transport_schema(true); },
         [](const Config& c, const RunOptions& o) { return run_transport("transport-full", c, o); }});
    put({"chain4-roundtrip", "four-pulse chain transport +5,+5,+5,-15", false,
         [] { return chain_schema("5, 5, 5, -15 au"); },
         [](const Config& c, const RunOptions& o) { return run_chain("chain4-roundtrip", c, o); }});
    put({"chain2-roundtrip", "two-pulse chain round trip +5,-5", false, [] { return chain_schema("5, -5 au"); },
         [](const Config& c, const RunOptions& o) { return run_chain("chain2-roundtrip", c, o); }});
    put({"helium-singlet", "singlet two-electron transport", false, [] { return helium_schema("singlet"); },
         [](const Config& c, const RunOptions& o) { return run_helium("helium-singlet", c, o); }});
    put({"helium-triplet", "triplet two-electron transport", false, [] { return helium_schema("triplet"); },
         [](const Config& c, const RunOptions& o) { return run_helium("helium-triplet", c, o); }});
    put({"phase-scan", "<p_z> over (theta, phi) and the two-stage phase fit", false, scan_schema, run_scan_preset});
    for (const char* t : {"hydrogen", "chain-site", "helium"}) {
      const std::string target = t;
      put({"relax-" + target, "imaginary-time ground state (" + target + ")", false,
           [target] { return relax_schema(target); },
           [target](const Config& c, const RunOptions& o) { return run_relax(target, c, o); }});
    }
    return m;
  }();
  return reg;
}

inline const Preset& find_preset(const std::string& name) {
  const auto& reg = preset_registry();
  const auto it = reg.find(name);
  if (it == reg.end()) {
    std::string known;
    for (const auto& [k, _] : reg) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
  }
  return it->second;
}

/// Resolves a preset config from defaults, an optional file, and key=value overrides.
inline Config resolve_config(const std::string& name, const std::string& config_file,
                             const std::vector<std::string>& overrides) {
  Config c(find_preset(name).schema());
  if (!config_file.empty()) c.parse_file(config_file);
  for (const auto& o : overrides) c.apply_override(o);
  return c;
}

inline RunResult run_preset(const std::string& name, const std::vector<std::string>& overrides,
                            const RunOptions& options, const std::string& config_file = "") {
  const Preset& p = find_preset(name);
  const Config c = resolve_config(name, config_file, overrides);
  return p.run(c, options);
}

}  // namespace kickshift
