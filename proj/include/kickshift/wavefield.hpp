#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "kickshift/grid.hpp"
#include "kickshift/potential.hpp"

namespace kickshift {

enum class Representation { psi, u_scaled };

/// Complex amplitudes on a grid. Cylindrical grids store u = sqrt(2 pi rho) psi.
class WaveField {
public:
  WaveField() = default;

  explicit WaveField(GridPtr grid)
      : grid_(std::move(grid)), amp_(checked(grid_).size(), cplx{0.0, 0.0}) {}

  WaveField(GridPtr grid, std::vector<cplx> amplitudes)
      : grid_(std::move(grid)), amp_(std::move(amplitudes)) {
    if (amp_.size() != checked(grid_).size())
      throw ShapeError("amplitude count " + std::to_string(amp_.size()) + " does not match grid size " +
                       std::to_string(grid_->size()));
  }

  /// Builds a field from plain psi samples, converting to u on cylindrical grids.
  static WaveField from_psi(GridPtr grid, std::span<const cplx> psi) {
    WaveField w(grid, std::vector<cplx>(psi.begin(), psi.end()));
    if (grid->is_cylindrical()) {
      const auto s = radial_scale(*grid);
      const std::size_t nz = grid->z_axis().n_points;
      for (std::size_t i = 0; i < w.amp_.size(); ++i) w.amp_[i] *= s[i / nz];
    }
    return w;
  }

  /// Plain psi samples (divides out sqrt(2 pi rho) on cylindrical grids).
  std::vector<cplx> to_psi() const {
    std::vector<cplx> out = amp_;
    if (grid_->is_cylindrical()) {
      const auto s = radial_scale(*grid_);
      const std::size_t nz = grid_->z_axis().n_points;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] /= s[i / nz];
    }
    return out;
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Representation representation() const {
    return grid_->is_cylindrical() ? Representation::u_scaled : Representation::psi;
  }

  std::size_t size() const { return amp_.size(); }
  std::span<cplx> values() { return amp_; }
  std::span<const cplx> values() const { return amp_; }
  cplx& operator[](std::size_t i) { return amp_[i]; }
  const cplx& operator[](std::size_t i) const { return amp_[i]; }

  double norm2() const {
    double s = 0.0;
    for (const auto& v : amp_) s += std::norm(v);
    return s * grid_->volume_element();
  }

  void normalize() {
    const double n2 = norm2();
    if (!(n2 > 0.0) || !std::isfinite(n2)) throw NumericalAbort("cannot normalize a field with norm^2 = " + std::to_string(n2));
    scale(1.0 / std::sqrt(n2));
  }

  WaveField& scale(cplx s) {
    for (auto& v : amp_) v *= s;
    return *this;
  }

  /// this += s * other
  WaveField& axpy(cplx s, const WaveField& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < amp_.size(); ++i) amp_[i] += s * other.amp_[i];
    return *this;
  }

  static void require_same_grid(const WaveField& a, const WaveField& b) {
    if (a.grid_ != b.grid_ && !a.grid_->same_layout(*b.grid_))
      throw ShapeError("wavefields live on different grids");
  }

  /// sqrt(2 pi rho_j) for each radial node.
  static std::vector<double> radial_scale(const Grid& g) {
    const Axis& r = g.rho_axis();
    std::vector<double> s(r.n_points);
    for (std::size_t j = 0; j < r.n_points; ++j) s[j] = std::sqrt(2.0 * std::numbers::pi * r.node(j));
    return s;
  }

private:
  static const Grid& checked(const GridPtr& g) {
    if (!g) throw ConfigError("wavefield needs a grid");
    return *g;
  }

  GridPtr grid_;
  std::vector<cplx> amp_;
};

inline cplx inner_product(const WaveField& a, const WaveField& b) {
  WaveField::require_same_grid(a, b);
  cplx s{0.0, 0.0};
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) s += std::conj(va[i]) * vb[i];
  return s * a.grid().volume_element();
}

inline double fidelity(const WaveField& a, const WaveField& b) {
  const double f = std::norm(inner_product(a, b)) / (a.norm2() * b.norm2());
  return std::clamp(f, 0.0, 1.0);
}

/// Per-node z coordinate (z1 + z2 on two-electron grids).
inline std::vector<double> z_coordinates(const Grid& g) {
  std::vector<double> out(g.size());
  switch (g.system()) {
    case GridSystem::cartesian_1d:
      out = g.axis(0).nodes();
      break;
    case GridSystem::cylindrical_rz: {
      const auto z = g.axis(1).nodes();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = z[i % z.size()];
      break;
    }
    case GridSystem::cartesian_2e: {
      const auto z1 = g.axis(0).nodes();
      const auto z2 = g.axis(1).nodes();
      for (std::size_t i = 0; i < z1.size(); ++i)
        for (std::size_t j = 0; j < z2.size(); ++j) out[i * z2.size() + j] = z1[i] + z2[j];
      break;
    }
  }
  return out;
}

/// <z>; on two-electron grids <z1 + z2>.
inline double expectation_z(const WaveField& psi) {
  const auto z = z_coordinates(psi.grid());
  double s = 0.0, n = 0.0;
  const auto v = psi.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double p = std::norm(v[i]);
    s += z[i] * p;
    n += p;
  }
  return s / n;
}

/// Canonical <p_z>; on two-electron grids <p1 + p2>.
inline double expectation_pz(const WaveField& psi) {
  const auto& tr = psi.grid().transform();
  std::vector<cplx> c(psi.values().begin(), psi.values().end());
  tr.periodic_forward(c);
  const auto& k = tr.momentum();
  double s = 0.0, n = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double p = std::norm(c[i]);
    s += k[i] * p;
    n += p;
  }
  return s / n;
}

/// Copy of psi translated by dz along z (both electrons on two-electron grids).
/// Spectral shift, exact for band-limited fields; content wraps around the box.
inline WaveField translate_z(const WaveField& psi, double dz) {
  const auto& tr = psi.grid().transform();
  WaveField out = psi;
  auto c = out.values();
  tr.periodic_forward(c);
  const auto& k = tr.momentum();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, -k[i] * dz);
  tr.periodic_inverse(c);
  return out;
}

/// <T> from the spectral representation, normalised by the field norm.
inline double kinetic_energy(const WaveField& psi) {
  const auto& tr = psi.grid().transform();
  std::vector<cplx> c(psi.values().begin(), psi.values().end()), scratch(c.size());
  tr.forward(c, scratch);
  const auto& t = tr.kinetic();
  const auto& w = tr.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += t[i] * std::norm(c[i]) * w[i];
  return s / psi.norm2();
}

/// <V> including the representation correction, normalised by the field norm.
inline double potential_energy(const WaveField& psi, const PotentialField& v) {
  if (!psi.grid().same_layout(*v.grid)) throw ShapeError("potential and wavefield live on different grids");
  const auto a = psi.values();
  double s = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double p = std::norm(a[i]);
    s += v.total(i) * p;
    n += p;
  }
  return s / n;
}

/// <T + V> with T applied spectrally.
inline double total_energy(const WaveField& psi, const PotentialField& v) {
  return kinetic_energy(psi) + potential_energy(psi, v);
}

/// Per-axis means of the marginal densities of a two-electron field.
inline std::pair<double, double> expectation_z_pair(const WaveField& psi) {
  const Grid& g = psi.grid();
  if (!g.is_two_electron()) throw ShapeError("expectation_z_pair needs a two-electron grid");
  const auto z1 = g.axis(0).nodes();
  const auto z2 = g.axis(1).nodes();
  double s1 = 0.0, s2 = 0.0, n = 0.0;
  const auto v = psi.values();
  for (std::size_t i = 0; i < z1.size(); ++i)
    for (std::size_t j = 0; j < z2.size(); ++j) {
      const double p = std::norm(v[i * z2.size() + j]);
      s1 += z1[i] * p;
      s2 += z2[j] * p;
      n += p;
    }
  return {s1 / n, s2 / n};
}

/// P(z): integrated over rho (cylindrical), |psi|^2 (1d), or the marginal of
/// electron `axis` (two-electron).
inline std::vector<double> density_z(const WaveField& psi, std::size_t axis = 0) {
  const Grid& g = psi.grid();
  const auto v = psi.values();
  switch (g.system()) {
    case GridSystem::cartesian_1d: {
      std::vector<double> p(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) p[i] = std::norm(v[i]);
      return p;
    }
    case GridSystem::cylindrical_rz: {
      const std::size_t nr = g.axis(0).n_points, nz = g.axis(1).n_points;
      const double dr = g.axis(0).spacing;
      std::vector<double> p(nz, 0.0);
      for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nz; ++j) p[j] += std::norm(v[i * nz + j]) * dr;
      return p;
    }
    case GridSystem::cartesian_2e: {
      if (axis > 1) throw ShapeError("two-electron grids have axes 0 and 1");
      const std::size_t n1 = g.axis(0).n_points, n2 = g.axis(1).n_points;
      const double d_other = g.axis(1 - axis).spacing;
      std::vector<double> p(axis == 0 ? n1 : n2, 0.0);
      for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) p[axis == 0 ? i : j] += std::norm(v[i * n2 + j]) * d_other;
      return p;
    }
  }
  return {};
}

/// Density P(z, t) sampled along a run, with the displacement alpha(t) alongside.
struct DensityTrace {
  std::vector<double> times;
  std::vector<double> z_axis;
  std::vector<std::vector<double>> density;
  std::vector<double> alpha_overlay;

  void append(double t, std::vector<double> p, double alpha) {
    times.push_back(t);
    density.push_back(std::move(p));
    alpha_overlay.push_back(alpha);
  }
};

/// Exchange residual max |psi(z1,z2) - s psi(z2,z1)| / max |psi|, s = +1 or -1.
inline double exchange_residual(const WaveField& psi, int s) {
  const Grid& g = psi.grid();
  if (!g.is_two_electron()) throw ShapeError("exchange residual needs a two-electron grid");
  const std::size_t n = g.axis(0).n_points;
  if (g.axis(1).n_points != n) throw ShapeError("exchange residual needs a square grid");
  const auto v = psi.values();
  double r = 0.0, m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      r = std::max(r, std::abs(v[i * n + j] - static_cast<double>(s) * v[j * n + i]));
      m = std::max(m, std::abs(v[i * n + j]));
    }
  return m > 0.0 ? r / m : 0.0;
}

}  // namespace kickshift
