#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kickshift/potential.hpp"
#include "kickshift/wavefield.hpp"

namespace kickshift {

// ---- potentials -----------------------------------------------------------

inline PotentialField coulomb_potential(GridPtr g, double Z = 1.0) {
  if (!g->is_cylindrical()) throw ConfigError("coulomb_potential needs a cylindrical grid");
  return sample_potential(
      std::move(g), [Z](double rho, double z) { return Z == 0.0 ? 0.0 : -Z / std::sqrt(rho * rho + z * z); },
      PotentialLabel::coulomb);
}

/// Site positions of an n-site chain centred on z = 0, spacing R, listed right to left.
inline std::vector<double> chain_sites(double R, int n_sites) {
  std::vector<double> s;
  for (int i = 1; i <= n_sites; ++i) s.push_back((n_sites + 1 - 2 * i) * R / 2.0);
  return s;
}

inline PotentialField chain_potential(GridPtr g, double Z = 0.8, double R = 5.0, int n_sites = 4) {
  if (!g->is_cylindrical()) throw ConfigError("chain_potential needs a cylindrical grid");
  if (n_sites < 1) throw ConfigError("chain needs at least one site");
  const auto sites = chain_sites(R, n_sites);
  const Axis& za = g->axis(1);
  const double lo = za.node(0), hi = za.node(za.n_points - 1);
  for (double s : sites)
    if (s <= lo || s >= hi)
      throw ConfigError("chain site at z = " + std::to_string(s) + " lies outside the box");
  return sample_potential(
      std::move(g),
      [&sites, Z](double rho, double z) {
        double v = 0.0;
        for (double s : sites) v -= Z / std::sqrt((z - s) * (z - s) + rho * rho);
        return v;
      },
      PotentialLabel::chain);
}

/// One chain site of charge Z at z0.
inline PotentialField site_potential(GridPtr g, double Z, double z0) {
  if (!g->is_cylindrical()) throw ConfigError("site_potential needs a cylindrical grid");
  return sample_potential(
      std::move(g), [Z, z0](double rho, double z) { return -Z / std::sqrt((z - z0) * (z - z0) + rho * rho); },
      PotentialLabel::chain);
}

struct HeliumParameters {
  double pair_strength = 0.6317;
  double pair_soft = 0.09168;
  double ion_strength = 1.1225;
  double ion_soft = 0.09169;
};

inline double helium_pair_term(double z1, double z2, const HeliumParameters& p = {}) {
  const double d = z1 - z2;
  return p.pair_strength / std::sqrt(d * d + p.pair_soft);
}

inline double helium_one_body(double z, const HeliumParameters& p = {}) {
  return -p.ion_strength / std::sqrt(z * z + p.ion_soft);
}

struct HeliumModel {
  PotentialField pair;
  /// One-body term sampled along each axis of the two-electron grid.
  std::vector<std::vector<double>> one_body;

  /// pair + one_body(z1) + one_body(z2) on the two-electron grid.
  PotentialField total() const {
    PotentialField v = pair;
    const std::size_t n2 = one_body[1].size();
    for (std::size_t i = 0; i < one_body[0].size(); ++i)
      for (std::size_t j = 0; j < n2; ++j) v.values[i * n2 + j] += one_body[0][i] + one_body[1][j];
    v.label = PotentialLabel::helium_pair;
    return v;
  }
};

inline HeliumModel helium_model(GridPtr g, const HeliumParameters& p = {}) {
  if (!g->is_two_electron()) throw ConfigError("helium_model needs a two-electron grid");
  HeliumModel m;
  for (std::size_t a = 0; a < 2; ++a) {
    const auto z = g->axis(a).nodes();
    std::vector<double> v(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) v[i] = helium_one_body(z[i], p);
    m.one_body.push_back(std::move(v));
  }
  m.pair = sample_potential(
      std::move(g), [&p](double z1, double z2) { return helium_pair_term(z1, z2, p); }, PotentialLabel::helium_pair);
  return m;
}

/// He+ model potential on a one-dimensional grid.
inline PotentialField helium_ion_potential(GridPtr g, const HeliumParameters& p = {}) {
  if (g->system() != GridSystem::cartesian_1d) throw ConfigError("helium_ion_potential needs a 1d grid");
  return sample_potential(
      std::move(g), [&p](double z) { return helium_one_body(z, p); }, PotentialLabel::helium_ion_1d);
}

/// One-dimensional grid sharing axis `i` of a two-electron grid.
inline GridPtr axis_grid(const Grid& g, std::size_t i) {
  return std::make_shared<const Grid>(GridSystem::cartesian_1d, std::vector<Axis>{g.axis(i)});
}

// ---- hydrogenic states ----------------------------------------------------

struct HydrogenicLabel {
  int n = 1;
  int l = 0;

  void validate() const {
    if (n < 1 || l < 0 || l > n - 1)
      throw ConfigError("invalid hydrogenic label n=" + std::to_string(n) + " l=" + std::to_string(l));
  }
  double energy() const { return -0.5 / (static_cast<double>(n) * n); }
};

/// R_nl(r) for Z = 1, normalisation evaluated in log space.
inline double hydrogen_radial(int n, int l, double r) {
  const double x = 2.0 * r / n;
  const double log_norm = 0.5 * (3.0 * std::log(2.0 / n) + std::lgamma(n - l) - std::log(2.0 * n) -
                                 std::lgamma(n + l + 1));
  const double lag = std::assoc_laguerre(static_cast<unsigned>(n - l - 1), static_cast<unsigned>(2 * l + 1), x);
  if (x == 0.0) return l == 0 ? std::exp(log_norm) * lag : 0.0;
  return std::exp(log_norm - r / n + l * std::log(x)) * lag;
}

inline double spherical_y_l0(int l, double cos_theta) {
  return std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi)) *
         std::legendre(static_cast<unsigned>(l), std::clamp(cos_theta, -1.0, 1.0));
}

/// i^l R_nl(r) Y_l0(theta).
inline cplx hydrogen_psi(const HydrogenicLabel& s, double rho, double z) {
  const double r = std::sqrt(rho * rho + z * z);
  const double c = r > 0.0 ? z / r : 1.0;
  static constexpr cplx phases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return phases[s.l % 4] * (hydrogen_radial(s.n, s.l, r) * spherical_y_l0(s.l, c));
}

/// Radius beyond which |psi|^2 stays below `tail` times its peak.
inline double hydrogen_required_radius(const HydrogenicLabel& s, double tail = 1e-8) {
  const double ymax2 = (2.0 * s.l + 1.0) / (4.0 * std::numbers::pi);
  double peak = 0.0;
  const double dr = 0.01;
  const double rmax = 20.0 * s.n * s.n + 50.0;
  for (double r = dr; r < rmax; r += dr) peak = std::max(peak, std::pow(hydrogen_radial(s.n, s.l, r), 2));
  // Scan inward from far out; the first r where the envelope exceeds the threshold bounds the box.
  for (double r = rmax; r > 0.0; r -= dr * 10.0)
    if (std::pow(hydrogen_radial(s.n, s.l, r), 2) * ymax2 >= tail * peak * ymax2) return r;
  return 0.0;
}

inline WaveField hydrogenic_state(const HydrogenicLabel& s, GridPtr g, double tail = 1e-8) {
  s.validate();
  if (!g->is_cylindrical()) throw ConfigError("hydrogenic_state needs a cylindrical grid");
  const Axis& ra = g->axis(0);
  const Axis& za = g->axis(1);
  std::vector<cplx> psi(g->size());
  double peak = 0.0, edge = 0.0;
  for (std::size_t i = 0; i < ra.n_points; ++i)
    for (std::size_t j = 0; j < za.n_points; ++j) {
      const cplx v = hydrogen_psi(s, ra.node(i), za.node(j));
      psi[i * za.n_points + j] = v;
      const double p = std::norm(v);
      peak = std::max(peak, p);
      if (i + 1 == ra.n_points || j == 0 || j + 1 == za.n_points) edge = std::max(edge, p);
    }
  if (!(edge < tail * peak)) {
    std::ostringstream os;
    os << "box too small for n=" << s.n << " l=" << s.l << ": needs rho and |z| extents of at least "
       << hydrogen_required_radius(s, tail) << " a.u. (edge/peak density " << edge / peak << ")";
    throw ConfigError(os.str());
  }
  WaveField w = WaveField::from_psi(std::move(g), psi);
  w.normalize();
  return w;
}

struct SuperpositionSpec {
  double theta_R = 0.0;
  double phi = 0.0;
  HydrogenicLabel state_i{2, 1};
  HydrogenicLabel state_j{3, 2};

  double delta_e() const { return state_j.energy() - state_i.energy(); }
  /// Pump-probe delay that accumulates the relative phase phi.
  double delay() const { return phi / delta_e(); }
  void validate() const {
    state_i.validate();
    state_j.validate();
    if (!(delta_e() > 0.0)) throw ConfigError("superposition needs E_j > E_i");
  }
};

/// cos(theta) chi_i + sin(theta) e^{i phi} chi_j from prebuilt states.
inline WaveField superposition(double theta, double phi, const WaveField& chi_i, const WaveField& chi_j) {
  WaveField w = chi_i;
  w.scale(std::cos(theta));
  w.axpy(std::sin(theta) * std::polar(1.0, phi), chi_j);
  w.normalize();
  return w;
}

inline WaveField superposition(const SuperpositionSpec& spec, GridPtr g) {
  spec.validate();
  const WaveField a = hydrogenic_state(spec.state_i, g);
  const WaveField b = hydrogenic_state(spec.state_j, g);
  return superposition(spec.theta_R, spec.phi, a, b);
}

// ---- wavepackets and two-electron states ----------------------------------

/// Gaussian exp(-(r - c)^2 / (4 sigma^2)) e^{i k0 z}; on two-electron grids the
/// product of one-dimensional packets centred at z0 and z0b.
inline WaveField gaussian_packet(GridPtr g, double z0, double sigma, double k0 = 0.0, double z0b = 0.0) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian width must be positive");
  const double s = 1.0 / (4.0 * sigma * sigma);
  std::vector<cplx> psi(g->size());
  switch (g->system()) {
    case GridSystem::cartesian_1d: {
      const Axis& a = g->axis(0);
      for (std::size_t i = 0; i < a.n_points; ++i) {
        const double z = a.node(i);
        psi[i] = std::exp(-s * (z - z0) * (z - z0)) * std::polar(1.0, k0 * z);
      }
      break;
    }
    case GridSystem::cylindrical_rz: {
      const Axis& r = g->axis(0);
      const Axis& a = g->axis(1);
      for (std::size_t i = 0; i < r.n_points; ++i)
        for (std::size_t j = 0; j < a.n_points; ++j) {
          const double rho = r.node(i), z = a.node(j);
          psi[i * a.n_points + j] = std::exp(-s * (rho * rho + (z - z0) * (z - z0))) * std::polar(1.0, k0 * z);
        }
      break;
    }
    case GridSystem::cartesian_2e: {
      const Axis& a = g->axis(0);
      const Axis& b = g->axis(1);
      for (std::size_t i = 0; i < a.n_points; ++i)
        for (std::size_t j = 0; j < b.n_points; ++j) {
          const double z1 = a.node(i), z2 = b.node(j);
          psi[i * b.n_points + j] = std::exp(-s * ((z1 - z0) * (z1 - z0) + (z2 - z0b) * (z2 - z0b))) *
                                    std::polar(1.0, k0 * (z1 + z2));
        }
      break;
    }
  }
  WaveField w = WaveField::from_psi(std::move(g), psi);
  w.normalize();
  return w;
}

enum class Spin { singlet, triplet };

inline std::string_view to_string(Spin s) { return s == Spin::singlet ? "singlet" : "triplet"; }

/// (chi_a(z1) chi_b(z2) +/- chi_b(z1) chi_a(z2)) / sqrt(2); + for the singlet.
inline WaveField two_electron_state(const WaveField& chi_a, const WaveField& chi_b, Spin spin, GridPtr g) {
  if (!g->is_two_electron()) throw ConfigError("two_electron_state needs a two-electron grid");
  const Grid& ga = chi_a.grid();
  if (ga.system() != GridSystem::cartesian_1d || !(ga.axis(0) == g->axis(0)) || !(ga.axis(0) == g->axis(1)))
    throw ShapeError("one-electron states must live on the axes of the two-electron grid");
  WaveField::require_same_grid(chi_a, chi_b);
  const double ov = std::abs(inner_product(chi_a, chi_b)) / std::sqrt(chi_a.norm2() * chi_b.norm2());
  if (ov > 1e-6) throw ConfigError("one-electron states are not orthogonal (overlap " + std::to_string(ov) + ")");

  const double s = spin == Spin::singlet ? 1.0 : -1.0;
  const std::size_t n = ga.axis(0).n_points;
  const auto a = chi_a.values();
  const auto b = chi_b.values();
  std::vector<cplx> psi(n * n);
  const double c = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) psi[i * n + j] = c * (a[i] * b[j] + s * b[i] * a[j]);
  WaveField w(std::move(g), std::move(psi));
  w.normalize();
  return w;
}

}  // namespace kickshift
