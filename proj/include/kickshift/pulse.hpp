#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "kickshift/errors.hpp"

namespace kickshift {

/// Intensity (W/cm^2) of a unit atomic field amplitude.
inline constexpr double au_intensity_wpcm2 = 3.50945e16;
/// One atomic unit of time in attoseconds.
inline constexpr double au_time_as = 24.188843265857;

inline double intensity_to_field(double intensity_wpcm2) {
  if (!(intensity_wpcm2 >= 0.0)) throw ConfigError("intensity must be non-negative");
  return std::sqrt(intensity_wpcm2 / au_intensity_wpcm2);
}

inline double field_to_intensity(double e0) {
  if (!std::isfinite(e0)) throw ConfigError("field amplitude must be finite");
  return e0 * e0 * au_intensity_wpcm2;
}

/// alpha(T) / U_p for the single-cycle window.
inline constexpr double displacement_per_up = 3.0 * std::numbers::pi / 8.0;

/// Single-cycle pulse whose displacement alpha(t) rises monotonically over
/// the window [t_start, t_start + 4 pi / omega].
struct SingleCyclePulse {
  double E0 = 0.0;
  double omega = 1.0;
  double t_start = 0.0;
  int sign = 1;

  double duration() const { return 4.0 * std::numbers::pi / omega; }
  double t_end() const { return t_start + duration(); }
  /// E0 / (4 omega^2), linear in E0.
  double up() const { return E0 / (4.0 * omega * omega); }
  double intensity() const { return field_to_intensity(E0); }

  bool active(double t) const { return t > t_start && t < t_end(); }

  double displacement(double t) const {
    if (t <= t_start) return 0.0;
    if (t >= t_end()) return final_displacement();
    const double wt = omega * (t - t_start);
    return sign * (std::sin(4.0 * wt) / 128.0 - std::sin(2.0 * wt) / 32.0 + 3.0 * wt / 32.0) * E0 /
           (4.0 * omega * omega);
  }

  double vector_potential(double t) const {
    if (t < t_start || t > t_end()) return 0.0;
    const double wt = omega * (t - t_start);
    return sign * E0 / (128.0 * omega) * (std::cos(4.0 * wt) - 2.0 * std::cos(2.0 * wt) + 3.0);
  }

  double final_displacement() const { return sign * displacement_per_up * up(); }
};

inline SingleCyclePulse design_for_displacement(double alpha_target, double omega, double t_start = 0.0) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ConfigError("omega must be positive");
  if (alpha_target == 0.0 || !std::isfinite(alpha_target)) throw ConfigError("target displacement must be nonzero");
  SingleCyclePulse p;
  p.omega = omega;
  p.t_start = t_start;
  p.sign = alpha_target > 0.0 ? 1 : -1;
  p.E0 = std::abs(alpha_target) * 4.0 * omega * omega / displacement_per_up;
  return p;
}

struct DistortionAdvice {
  double ratio = 0.0;
  bool distortion_prone = false;
};

inline constexpr double distortion_threshold = 5.0;

/// omega / deltaE; pulses slower than a few level spacings reshape the state.
inline DistortionAdvice distortion_ratio(const SingleCyclePulse& p, double delta_e) {
  if (!(delta_e > 0.0)) throw ConfigError("energy gap must be positive");
  const double r = p.omega / delta_e;
  return {r, r < distortion_threshold};
}

/// Ordered, non-overlapping pulses.
class PulseTrain {
public:
  PulseTrain() = default;
  explicit PulseTrain(std::vector<SingleCyclePulse> pulses) : pulses_(std::move(pulses)) {
    for (std::size_t i = 0; i < pulses_.size(); ++i) {
      if (!(pulses_[i].omega > 0.0)) throw ConfigError("pulse omega must be positive");
      if (i > 0 && pulses_[i].t_start < pulses_[i - 1].t_end() - 1e-12 * pulses_[i - 1].duration())
        throw ConfigError("pulse windows overlap or are out of order at pulse " + std::to_string(i));
    }
  }

  /// Back-to-back pulses for a list of displacements, separated by `gap`.
  static PulseTrain sequence(const std::vector<double>& alphas, double omega, double t0, double gap) {
    std::vector<SingleCyclePulse> ps;
    double t = t0;
    for (double a : alphas) {
      ps.push_back(design_for_displacement(a, omega, t));
      t = ps.back().t_end() + gap;
    }
    return PulseTrain(std::move(ps));
  }

  const std::vector<SingleCyclePulse>& pulses() const { return pulses_; }
  bool empty() const { return pulses_.empty(); }

  double vector_potential(double t) const {
    double a = 0.0;
    for (const auto& p : pulses_) a += p.vector_potential(t);
    return a;
  }

  double displacement(double t) const {
    double a = 0.0;
    for (const auto& p : pulses_) a += p.displacement(t);
    return a;
  }

  bool active(double t) const {
    return std::any_of(pulses_.begin(), pulses_.end(), [t](const auto& p) { return p.active(t); });
  }

  double end_time() const { return pulses_.empty() ? 0.0 : pulses_.back().t_end(); }

  double max_omega() const {
    double w = 0.0;
    for (const auto& p : pulses_) w = std::max(w, p.omega);
    return w;
  }

private:
  std::vector<SingleCyclePulse> pulses_;
};

}  // namespace kickshift
