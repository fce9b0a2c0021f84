#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kickshift/checksum.hpp"
#include "kickshift/models.hpp"
#include "kickshift/pulse.hpp"
#include "kickshift/wavefield.hpp"

namespace kickshift {

enum class TimeMode { real_time, imaginary_time };

struct PropagationPlan {
  double dt = 0.05;
  double t_start = 0.0;
  double t_end = 0.0;
  PulseTrain pulses;
  /// Observables every k steps (0: first and last step only).
  std::size_t record_every = 0;
  /// P(z) every k steps (0: never).
  std::size_t density_every = 0;
  /// Full-grid |psi|^2 snapshots at these times (nearest step), downsampled by `snapshot_stride`.
  std::vector<double> snapshot_times;
  std::size_t snapshot_stride = 1;
  /// Abort when the normalised density on the outermost nodes exceeds this (<= 0 disables).
  double boundary_limit = 1e-10;
  std::size_t boundary_every = 50;
  TimeMode mode = TimeMode::real_time;

  /// Largest stable step for the fastest pulse in the schedule.
  double max_dt() const {
    const double w = pulses.max_omega();
    return w > 0.0 ? (2.0 * std::numbers::pi / (4.0 * w)) / 20.0 : std::numeric_limits<double>::infinity();
  }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("plan.dt must be positive");
    if (!(t_end > t_start)) throw ConfigError("plan.t_end must exceed plan.t_start");
    if (mode == TimeMode::real_time && dt > max_dt() * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "plan.dt = " << dt << " does not resolve omega = " << pulses.max_omega() << " (need dt <= " << max_dt()
         << ")";
      throw ConfigError(os.str());
    }
    if (snapshot_stride == 0) throw ConfigError("plan.snapshot_stride must be >= 1");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::ceil((t_end - t_start) / dt - 1e-9)); }
  /// Step actually used: the span divided evenly into steps().
  double effective_dt() const { return (t_end - t_start) / static_cast<double>(steps()); }

  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "dt=" << dt << ";t0=" << t_start << ";t1=" << t_end << ";mode=" << (mode == TimeMode::real_time ? "rt" : "it");
    for (const auto& p : pulses.pulses())
      os << ";pulse=" << p.E0 << "," << p.omega << "," << p.t_start << "," << p.sign;
    return os.str();
  }
  std::string hash() const { return sha256_hex(canonical()); }
};

struct Snapshot {
  double t = 0.0;
  std::vector<std::size_t> shape;
  std::vector<double> density;
};

struct Trajectory {
  std::vector<double> times, norm, z, pz, energy;
  DensityTrace density;
  std::vector<Snapshot> snapshots;
  double dt = 0.0;
  std::size_t steps = 0;
  double max_boundary = 0.0;
  WaveField final_state;
};

/// Largest normalised density |psi|^2 / <psi|psi> on the outermost nodes
/// (the rho = 0 side of a cylindrical grid excluded).
inline double boundary_density(const WaveField& psi) {
  const Grid& g = psi.grid();
  const auto v = psi.values();
  double m = 0.0;
  auto at = [&](std::size_t i) { m = std::max(m, std::norm(v[i])); };
  switch (g.system()) {
    case GridSystem::cartesian_1d:
      at(0);
      at(v.size() - 1);
      break;
    case GridSystem::cylindrical_rz: {
      const std::size_t nr = g.axis(0).n_points, nz = g.axis(1).n_points;
      for (std::size_t j = 0; j < nz; ++j) at((nr - 1) * nz + j);
      for (std::size_t i = 0; i < nr; ++i) {
        at(i * nz);
        at(i * nz + nz - 1);
      }
      break;
    }
    case GridSystem::cartesian_2e: {
      const std::size_t n1 = g.axis(0).n_points, n2 = g.axis(1).n_points;
      for (std::size_t j = 0; j < n2; ++j) {
        at(j);
        at((n1 - 1) * n2 + j);
      }
      for (std::size_t i = 0; i < n1; ++i) {
        at(i * n2);
        at(i * n2 + n2 - 1);
      }
      break;
    }
  }
  return m / psi.norm2();
}

/// Strang split-operator stepper for one potential and step size.
/// Owns scratch space: one instance per propagation.
class Propagator {
public:
  Propagator(const PotentialField& v, double dt, TimeMode mode = TimeMode::real_time)
      : grid_(v.grid), dt_(dt), mode_(mode) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    const std::size_t n = grid_->size();
    half_v_.resize(n);
    kin_.resize(n);
    scratch_.resize(n);
    const auto& t = grid_->transform().kinetic();
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = v.total(i);
      if (mode_ == TimeMode::real_time) {
        half_v_[i] = std::polar(1.0, -0.5 * dt * vi);
        kin_[i] = std::polar(1.0, -dt * t[i]);
      } else {
        half_v_[i] = std::exp(-0.5 * dt * vi);
        kin_[i] = std::exp(-dt * t[i]);
      }
    }
  }

  double dt() const { return dt_; }
  TimeMode mode() const { return mode_; }

  /// One step from t to t + dt. The field coupling uses the exact average of
  /// A over the step, so the kinetic phase carries k * (alpha(t+dt) - alpha(t)).
  void step(WaveField& psi, const PulseTrain& pulses, double t) {
    const double dalpha = mode_ == TimeMode::real_time ? pulses.displacement(t + dt_) - pulses.displacement(t) : 0.0;
    step_shift(psi, dalpha, t);
  }

  /// One step with a given displacement increment of the field term.
  void step_shift(WaveField& psi, double dalpha, double t = 0.0) {
    if (!psi.grid().same_layout(*grid_)) throw ShapeError("wavefield does not match the potential grid");
    auto a = psi.values();
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) a[i] *= half_v_[i];
    const auto& tr = grid_->transform();
    tr.forward(a, scratch_);
    if (dalpha == 0.0) {
      for (std::size_t i = 0; i < n; ++i) a[i] *= kin_[i];
    } else {
      apply_kinetic_with_shift(a, dalpha);
    }
    tr.inverse(a, scratch_);
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] *= half_v_[i];
      finite &= std::isfinite(a[i].real()) && std::isfinite(a[i].imag());
    }
    if (!finite) {
      double m = 0.0;
      for (const auto& x : a)
        if (std::isfinite(std::abs(x))) m = std::max(m, std::abs(x));
      std::ostringstream os;
      os << "non-finite amplitude at t = " << t + dt_ << " (max finite |psi| = " << m << ")";
      throw NumericalAbort(os.str());
    }
  }

private:
  void apply_kinetic_with_shift(std::span<cplx> a, double dalpha) {
    const auto& tr = grid_->transform();
    const Grid& g = *grid_;
    switch (g.system()) {
      case GridSystem::cartesian_1d: {
        const auto& k = tr.axis_wavenumbers(0);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] *= kin_[i] * std::polar(1.0, -dalpha * k[i]);
        break;
      }
      case GridSystem::cylindrical_rz: {
        const auto& k = tr.axis_wavenumbers(1);
        const std::size_t nz = k.size(), nr = g.axis(0).n_points;
        phase_a_.resize(nz);
        for (std::size_t j = 0; j < nz; ++j) phase_a_[j] = std::polar(1.0, -dalpha * k[j]);
        for (std::size_t i = 0; i < nr; ++i)
          for (std::size_t j = 0; j < nz; ++j) a[i * nz + j] *= kin_[i * nz + j] * phase_a_[j];
        break;
      }
      case GridSystem::cartesian_2e: {
        const auto& k1 = tr.axis_wavenumbers(0);
        const auto& k2 = tr.axis_wavenumbers(1);
        phase_a_.resize(k1.size());
        phase_b_.resize(k2.size());
        for (std::size_t i = 0; i < k1.size(); ++i) phase_a_[i] = std::polar(1.0, -dalpha * k1[i]);
        for (std::size_t j = 0; j < k2.size(); ++j) phase_b_[j] = std::polar(1.0, -dalpha * k2[j]);
        const std::size_t n2 = k2.size();
        for (std::size_t i = 0; i < k1.size(); ++i)
          for (std::size_t j = 0; j < n2; ++j) a[i * n2 + j] *= kin_[i * n2 + j] * phase_a_[i] * phase_b_[j];
        break;
      }
    }
  }

  GridPtr grid_;
  double dt_;
  TimeMode mode_;
  std::vector<cplx> half_v_, kin_, scratch_, phase_a_, phase_b_;
};

/// |psi|^2 on every stride-th node of each axis (|u|^2 on cylindrical grids).
inline Snapshot take_snapshot(const WaveField& psi, double t, std::size_t stride) {
  Snapshot s;
  s.t = t;
  const Grid& g = psi.grid();
  const auto v = psi.values();
  if (g.system() == GridSystem::cartesian_1d) {
    const std::size_t n = g.axis(0).n_points;
    for (std::size_t i = 0; i < n; i += stride) s.density.push_back(std::norm(v[i]));
    s.shape = {s.density.size()};
  } else {
    const std::size_t n0 = g.axis(0).n_points, n1 = g.axis(1).n_points;
    std::size_t rows = 0, cols = 0;
    for (std::size_t i = 0; i < n0; i += stride, ++rows) {
      cols = 0;
      for (std::size_t j = 0; j < n1; j += stride, ++cols) s.density.push_back(std::norm(v[i * n1 + j]));
    }
    s.shape = {rows, cols};
  }
  return s;
}

/// Runs `plan` from psi0 under the fixed potential `v`; `observer` sees the state after every step.
inline Trajectory propagate(const WaveField& psi0, const PropagationPlan& plan, const PotentialField& v,
                            const std::function<void(std::size_t, double, const WaveField&)>& observer = {}) {
  plan.validate();
  const std::size_t n_steps = plan.steps();
  const double dt = plan.effective_dt();
  Propagator prop(v, dt, plan.mode);
  Trajectory tr;
  tr.dt = dt;
  tr.steps = n_steps;
  WaveField psi = psi0;
  const Grid& g = psi.grid();
  if (g.system() != GridSystem::cartesian_2e) tr.density.z_axis = g.z_axis().nodes();
  else tr.density.z_axis = g.axis(0).nodes();

  std::vector<double> snaps = plan.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;

  auto record = [&](std::size_t k, double t) {
    const bool obs = k == 0 || k == n_steps || (plan.record_every > 0 && k % plan.record_every == 0);
    if (obs) {
      tr.times.push_back(t);
      tr.norm.push_back(psi.norm2());
      tr.z.push_back(expectation_z(psi));
      tr.pz.push_back(expectation_pz(psi));
      const bool field_free = !plan.pulses.active(t);
      tr.energy.push_back(field_free ? total_energy(psi, v) : std::numeric_limits<double>::quiet_NaN());
    }
    const bool dens = plan.density_every > 0 && (k % plan.density_every == 0 || k == n_steps);
    if (dens) tr.density.append(t, density_z(psi), plan.pulses.displacement(t));
    while (next_snap < snaps.size() && snaps[next_snap] <= t + 0.5 * dt) {
      tr.snapshots.push_back(take_snapshot(psi, t, plan.snapshot_stride));
      ++next_snap;
    }
    if (plan.boundary_limit > 0.0 && (k % plan.boundary_every == 0 || k == n_steps)) {
      const double b = boundary_density(psi);
      tr.max_boundary = std::max(tr.max_boundary, b);
      if (b > plan.boundary_limit) {
        std::ostringstream os;
        os << "boundary density " << b << " exceeds " << plan.boundary_limit << " at t = " << t
           << "; enlarge the box";
        throw NumericalAbort(os.str());
      }
    }
  };

  record(0, plan.t_start);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t = plan.t_start + static_cast<double>(k - 1) * dt;
    prop.step(psi, plan.pulses, t);
    if (plan.mode == TimeMode::imaginary_time) psi.normalize();
    record(k, plan.t_start + static_cast<double>(k) * dt);
    if (observer) observer(k, plan.t_start + static_cast<double>(k) * dt, psi);
  }
  tr.final_state = std::move(psi);
  return tr;
}

// ---- eigenstates ----------------------------------------------------------

struct RelaxResult {
  WaveField state;
  double energy = 0.0;
  std::size_t iterations = 0;
  double last_delta = 0.0;
};

struct RelaxOptions {
  double dtau = 0.05;
  double tol = 1e-10;
  std::size_t max_iterations = 200000;
  std::size_t check_every = 10;
};

/// Removes the components along each of `basis` (modified Gram-Schmidt) and normalises.
inline void project_out(WaveField& psi, const std::vector<WaveField>& basis) {
  for (const auto& b : basis) psi.axpy(-inner_product(b, psi) / b.norm2(), b);
  psi.normalize();
}

/// Imaginary-time relaxation towards the lowest state orthogonal to `orthogonal_to`.
/// Convergence: |E_k - E_{k - check_every}| < tol.
inline RelaxResult relax(const PotentialField& v, WaveField guess, const RelaxOptions& opt = {},
                         const std::vector<WaveField>& orthogonal_to = {}) {
  if (!(opt.dtau > 0.0)) throw ConfigError("relax: dtau must be positive");
  if (opt.check_every == 0) throw ConfigError("relax: check_every must be >= 1");
  if (!(guess.norm2() > 0.0)) throw ConfigError("relax: guess is zero");
  Propagator prop(v, opt.dtau, TimeMode::imaginary_time);
  project_out(guess, orthogonal_to);
  double e_prev = total_energy(guess, v);
  double delta = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  while (it < opt.max_iterations) {
    for (std::size_t k = 0; k < opt.check_every; ++k, ++it) {
      prop.step_shift(guess, 0.0);
      project_out(guess, orthogonal_to);
    }
    const double e = total_energy(guess, v);
    delta = e - e_prev;
    e_prev = e;
    if (std::abs(delta) < opt.tol) return {std::move(guess), e, it, delta};
  }
  std::ostringstream os;
  os << "relax did not converge in " << it << " iterations (last dE = " << delta << ")";
  throw NumericalAbort(os.str());
}

enum class Discretization { fourier_grid, finite_difference };

struct Eigenpair {
  WaveField state;
  double energy = 0.0;
};

/// Lowest `count` eigenpairs of -1/2 d^2/dz^2 + V on a 1d grid by dense
/// diagonalisation. Fourier-grid kinetic matrix by default (the propagator's
/// own kinetic operator); second-order finite differences on request.
inline std::vector<Eigenpair> eigensolve_1d(const PotentialField& v, std::size_t count,
                                            Discretization disc = Discretization::fourier_grid) {
  const GridPtr& g = v.grid;
  if (g->system() != GridSystem::cartesian_1d) throw ConfigError("eigensolve_1d needs a 1d grid");
  const std::size_t n = g->size();
  if (count < 1 || count > n) throw ConfigError("eigensolve_1d: count must lie in [1, n]");
  const double dz = g->axis(0).spacing;
  Eigen::VectorXd evals;
  Eigen::MatrixXd evecs;
  const auto N = static_cast<Eigen::Index>(n);
  if (disc == Discretization::finite_difference) {
    Eigen::VectorXd diag(N), off(N - 1);
    for (Eigen::Index i = 0; i < N; ++i) diag[i] = 1.0 / (dz * dz) + v.values[static_cast<std::size_t>(i)];
    off.setConstant(-0.5 / (dz * dz));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    evals = es.eigenvalues();
    evecs = es.eigenvectors();
  } else {
    // Circulant kinetic matrix: first column is the inverse transform of k^2/2.
    std::vector<cplx> col(n);
    const auto& t = g->transform().kinetic();
    for (std::size_t i = 0; i < n; ++i) col[i] = t[i];
    g->transform().periodic_inverse(col);
    Eigen::MatrixXd h(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = 0; j < N; ++j) h(i, j) = col[static_cast<std::size_t>((i - j + N) % N)].real();
    for (Eigen::Index i = 0; i < N; ++i) h(i, i) += v.values[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    evals = es.eigenvalues();
    evecs = es.eigenvectors();
  }
  std::vector<Eigenpair> out;
  const double s = 1.0 / std::sqrt(dz);
  for (std::size_t m = 0; m < count; ++m) {
    const auto col = evecs.col(static_cast<Eigen::Index>(m));
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    const double sign = col[imax] < 0.0 ? -1.0 : 1.0;
    std::vector<cplx> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = sign * s * col[static_cast<Eigen::Index>(i)];
    out.push_back({WaveField(g, std::move(a)), evals[static_cast<Eigen::Index>(m)]});
  }
  return out;
}

}  // namespace kickshift
