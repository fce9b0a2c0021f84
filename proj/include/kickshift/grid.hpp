#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kickshift/axis.hpp"
#include "kickshift/spectral.hpp"

namespace kickshift {

/// Immutable structured grid plus its spectral transform, built on first use.
class Grid {
public:
  Grid(GridSystem system, std::vector<Axis> axes, RadialKinetic radial = RadialKinetic::conservative);

  GridSystem system() const { return system_; }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(std::size_t i) const { return axes_.at(i); }
  RadialKinetic radial_kinetic() const { return radial_; }

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes_) n *= a.n_points;
    return n;
  }

  /// Quadrature weight of a node: drho*dz (u-representation), dz, or dz1*dz2.
  double volume_element() const {
    double v = 1.0;
    for (const auto& a : axes_) v *= a.spacing;
    return v;
  }

  bool is_cylindrical() const { return system_ == GridSystem::cylindrical_rz; }
  bool is_two_electron() const { return system_ == GridSystem::cartesian_2e; }

  /// The axis along which z (or z1) runs.
  const Axis& z_axis() const { return is_cylindrical() ? axes_[1] : axes_[0]; }
  const Axis& rho_axis() const {
    if (!is_cylindrical()) throw ShapeError("grid has no radial axis");
    return axes_[0];
  }

  const SpectralTransform& transform() const {
    std::call_once(lazy_->once, [this] { lazy_->t = std::make_unique<const SpectralTransform>(system_, axes_, radial_); });
    return *lazy_->t;
  }

  bool same_layout(const Grid& other) const {
    return system_ == other.system_ && axes_ == other.axes_ && radial_ == other.radial_;
  }

private:
  GridSystem system_;
  std::vector<Axis> axes_;
  RadialKinetic radial_;
  struct Lazy {
    std::once_flag once;
    std::unique_ptr<const SpectralTransform> t;
  };
  std::shared_ptr<Lazy> lazy_ = std::make_shared<Lazy>();
};

using GridPtr = std::shared_ptr<const Grid>;

struct GridOptions {
  /// Per-axis origin offsets in the same order as the extents.
  std::vector<double> offsets;
  RadialKinetic radial = RadialKinetic::conservative;
};

/// Axis order: cylindrical_rz -> (rho, z); cartesian_2e -> (z1, z2); cartesian_1d -> (z).
GridPtr build_grid(GridSystem system, std::span<const double> extents,
                   std::span<const double> spacings, const GridOptions& options = {});

inline GridPtr build_grid(GridSystem system, std::initializer_list<double> extents,
                          std::initializer_list<double> spacings, const GridOptions& options = {}) {
  return build_grid(system, std::span<const double>(extents.begin(), extents.size()),
                    std::span<const double>(spacings.begin(), spacings.size()), options);
}

inline Grid::Grid(GridSystem system, std::vector<Axis> axes, RadialKinetic radial)
    : system_(system), axes_(std::move(axes)), radial_(radial) {
  switch (system_) {
    case GridSystem::cylindrical_rz:
      if (axes_.size() != 2 || axes_[0].boundary != Boundary::odd || !axes_[0].stagger ||
          axes_[1].boundary != Boundary::periodic)
        throw ConfigError("cylindrical_rz needs (rho: staggered odd, z: periodic) axes");
      break;
    case GridSystem::cartesian_2e:
      if (axes_.size() != 2 || axes_[0].boundary != Boundary::periodic ||
          axes_[1].boundary != Boundary::periodic)
        throw ConfigError("cartesian_2e needs two periodic axes");
      break;
    case GridSystem::cartesian_1d:
      if (axes_.size() != 1 || axes_[0].boundary != Boundary::periodic)
        throw ConfigError("cartesian_1d needs one periodic axis");
      break;
  }
}

inline GridPtr build_grid(GridSystem system, std::span<const double> extents,
                          std::span<const double> spacings, const GridOptions& options) {
  const std::size_t n_axes = system == GridSystem::cartesian_1d ? 1 : 2;
  if (extents.size() != n_axes || spacings.size() != n_axes)
    throw ConfigError("grid system " + std::string(to_string(system)) + " needs " +
                      std::to_string(n_axes) + " extents and spacings");
  if (!options.offsets.empty() && options.offsets.size() != n_axes)
    throw ConfigError("offset count does not match axis count");
  auto offset = [&](std::size_t i) { return options.offsets.empty() ? 0.0 : options.offsets[i]; };

  std::vector<Axis> axes;
  for (std::size_t i = 0; i < n_axes; ++i) {
    const bool radial = system == GridSystem::cylindrical_rz && i == 0;
    axes.push_back(make_axis(extents[i], spacings[i], offset(i), radial,
                             radial ? Boundary::odd : Boundary::periodic));
  }
  return std::make_shared<const Grid>(system, std::move(axes), options.radial);
}

}  // namespace kickshift
