#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "kickshift/grid.hpp"

namespace kickshift {

enum class PotentialLabel { coulomb, chain, helium_pair, helium_ion_1d, custom };

inline std::string_view to_string(PotentialLabel l) {
  switch (l) {
    case PotentialLabel::coulomb: return "coulomb";
    case PotentialLabel::chain: return "chain";
    case PotentialLabel::helium_pair: return "helium_pair";
    case PotentialLabel::helium_ion_1d: return "helium_ion_1d";
    case PotentialLabel::custom: return "custom";
  }
  return "custom";
}

/// -1/(8 rho^2) per node when the radial kinetic uses the sine basis; empty otherwise.
inline std::vector<double> radial_correction(const Grid& g) {
  if (!g.is_cylindrical() || g.radial_kinetic() != RadialKinetic::sine) return {};
  const Axis& r = g.axis(0);
  const std::size_t nz = g.axis(1).n_points;
  std::vector<double> c(g.size());
  for (std::size_t i = 0; i < r.n_points; ++i) {
    const double rho = r.node(i);
    for (std::size_t j = 0; j < nz; ++j) c[i * nz + j] = -1.0 / (8.0 * rho * rho);
  }
  return c;
}

/// Real potential sampled on a grid. `correction` holds the representation
/// term that accompanies every potential on the grid (possibly empty).
struct PotentialField {
  GridPtr grid;
  std::vector<double> values;
  std::vector<double> correction;
  PotentialLabel label = PotentialLabel::custom;

  PotentialField() = default;
  PotentialField(GridPtr g, std::vector<double> v, PotentialLabel l = PotentialLabel::custom)
      : grid(std::move(g)), values(std::move(v)), label(l) {
    if (!grid) throw ConfigError("potential needs a grid");
    if (values.size() != grid->size()) throw ShapeError("potential size does not match grid");
    for (double x : values)
      if (!std::isfinite(x)) throw NumericalAbort("potential has a non-finite value");
    correction = radial_correction(*grid);
  }

  /// Potential plus representation correction at node i.
  double total(std::size_t i) const { return correction.empty() ? values[i] : values[i] + correction[i]; }

  PotentialField& operator+=(const PotentialField& o) {
    if (!grid->same_layout(*o.grid)) throw ShapeError("potentials live on different grids");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    if (label != o.label) label = PotentialLabel::custom;
    return *this;
  }
};

/// Samples f(rho, z), f(z1, z2) or f(z) on every node.
template <class F>
PotentialField sample_potential(GridPtr g, F&& f, PotentialLabel label = PotentialLabel::custom) {
  std::vector<double> v(g->size());
  if constexpr (std::is_invocable_r_v<double, F, double>) {
    if (g->system() != GridSystem::cartesian_1d) throw ShapeError("one-argument potential needs a 1d grid");
    const Axis& a = g->axis(0);
    for (std::size_t i = 0; i < a.n_points; ++i) v[i] = f(a.node(i));
  } else {
    if (g->system() == GridSystem::cartesian_1d) throw ShapeError("two-argument potential needs a 2-axis grid");
    const Axis& a = g->axis(0);
    const Axis& b = g->axis(1);
    for (std::size_t i = 0; i < a.n_points; ++i) {
      const double x = a.node(i);
      for (std::size_t j = 0; j < b.n_points; ++j) v[i * b.n_points + j] = f(x, b.node(j));
    }
  }
  return PotentialField(std::move(g), std::move(v), label);
}

inline PotentialField zero_potential(GridPtr g) {
  std::vector<double> v(g->size(), 0.0);
  return PotentialField(std::move(g), std::move(v), PotentialLabel::custom);
}

}  // namespace kickshift
