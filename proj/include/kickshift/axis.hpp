#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "kickshift/errors.hpp"

namespace kickshift {

enum class Boundary { periodic, odd };

enum class GridSystem { cylindrical_rz, cartesian_2e, cartesian_1d };

/// Radial kinetic operator on the staggered odd axis of a cylindrical grid.
///
/// `conservative` is the zero-flux-at-axis finite-volume operator, exact for
/// m=0 states that do not vanish on the axis; `sine` is the plain odd sine
/// expansion of u with the -1/(8 rho^2) term carried by the potential.
enum class RadialKinetic { conservative, sine };

inline std::string_view to_string(GridSystem s) {
  switch (s) {
    case GridSystem::cylindrical_rz: return "cylindrical_rz";
    case GridSystem::cartesian_2e: return "cartesian_2e";
    case GridSystem::cartesian_1d: return "cartesian_1d";
  }
  return "?";
}

inline GridSystem grid_system_from_string(std::string_view s) {
  if (s == "cylindrical_rz") return GridSystem::cylindrical_rz;
  if (s == "cartesian_2e") return GridSystem::cartesian_2e;
  if (s == "cartesian_1d") return GridSystem::cartesian_1d;
  throw ConfigError("unknown grid system '" + std::string(s) + "'");
}

inline std::string_view to_string(RadialKinetic r) {
  return r == RadialKinetic::sine ? "sine" : "conservative";
}

inline RadialKinetic radial_kinetic_from_string(std::string_view s) {
  if (s == "conservative") return RadialKinetic::conservative;
  if (s == "sine") return RadialKinetic::sine;
  throw ConfigError("unknown radial kinetic operator '" + std::string(s) + "'");
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// One structured axis. Periodic axes cover [-L/2, L/2) + origin_offset;
/// staggered odd axes have node j at origin_offset + (j + 1/2) * spacing.
struct Axis {
  std::size_t n_points = 0;
  double spacing = 0.0;
  double origin_offset = 0.0;
  bool stagger = false;
  Boundary boundary = Boundary::periodic;

  Axis() = default;
  Axis(std::size_t n, double d, double offset, bool staggered, Boundary b)
      : n_points(n), spacing(d), origin_offset(offset), stagger(staggered), boundary(b) {
    if (!(spacing > 0.0) || !std::isfinite(spacing))
      throw ConfigError("axis spacing must be positive, got " + std::to_string(spacing));
    if (!is_power_of_two(n_points))
      throw ConfigError("axis resolution must be a power of two, got " + std::to_string(n_points));
    if (boundary == Boundary::odd && !stagger)
      throw ConfigError("odd axes must be staggered");
  }

  double extent() const { return static_cast<double>(n_points) * spacing; }

  double node(std::size_t j) const {
    const double jd = static_cast<double>(j);
    if (stagger) return origin_offset + (jd + 0.5) * spacing;
    return origin_offset + (jd - static_cast<double>(n_points / 2)) * spacing;
  }

  std::vector<double> nodes() const {
    std::vector<double> x(n_points);
    for (std::size_t j = 0; j < n_points; ++j) x[j] = node(j);
    return x;
  }

  bool operator==(const Axis&) const = default;
};

/// Build an axis from extent and spacing; extent/spacing must be within one
/// node of a power of two. Spacing is authoritative.
inline Axis make_axis(double extent, double spacing, double offset, bool stagger, Boundary b) {
  if (!(extent > 0.0) || !(spacing > 0.0))
    throw ConfigError("extent and spacing must be positive (extent=" + std::to_string(extent) +
                      ", spacing=" + std::to_string(spacing) + ")");
  const double raw = extent / spacing;
  const double p = std::exp2(std::round(std::log2(raw)));
  if (std::abs(raw - p) >= 1.0)
    throw ConfigError("extent/spacing = " + std::to_string(raw) +
                      " is not within one node of a power of two");
  return Axis(static_cast<std::size_t>(p), spacing, offset, stagger, b);
}

}  // namespace kickshift
