#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kickshift/axis.hpp"

namespace kickshift {

using cplx = std::complex<double>;

namespace detail {

// FFTW's planner is not thread-safe; execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    if (p == nullptr) return;
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(std::max<std::size_t>(n, 1))) {}
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

constexpr unsigned plan_flags = FFTW_ESTIMATE | FFTW_UNALIGNED;

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

/// Angular wavenumbers of a periodic axis in FFT order (0, dk, ..., -dk).
inline std::vector<double> fft_wavenumbers(const Axis& a) {
  const std::size_t n = a.n_points;
  const double dk = 2.0 * std::numbers::pi / a.extent();
  std::vector<double> k(n);
  for (std::size_t m = 0; m < n; ++m) {
    const auto s = static_cast<double>(m);
    k[m] = (m < n / 2 ? s : s - static_cast<double>(n)) * dk;
  }
  return k;
}

/// Conservative m=0 radial operator -1/2 (1/rho) d/drho (rho d/drho) on the
/// staggered nodes, written for u = sqrt(2 pi rho) psi. Symmetric tridiagonal;
/// the flux through the axis vanishes and psi is zero one node past the edge.
inline void conservative_radial_operator(const Axis& a, Eigen::VectorXd& diag, Eigen::VectorXd& off) {
  const auto n = static_cast<Eigen::Index>(a.n_points);
  const double d = a.spacing;
  diag.setConstant(n, 1.0 / (d * d));
  off.resize(n - 1);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double rj = (static_cast<double>(j) + 0.5) * d;
    const double rj1 = rj + d;
    const double face = rj + 0.5 * d;
    off[j] = -face / (2.0 * d * d * std::sqrt(rj * rj1));
  }
}

}  // namespace detail

/// Wavenumbers per axis. Periodic axes use FFT ordering; the radial axis
/// lists sqrt(2*lambda_m) of its kinetic eigenvalues (pi*m/L for the sine basis).
struct SpectralSpace {
  std::vector<std::vector<double>> wavenumbers;
};

/// Forward/inverse transforms for one grid. Immutable after construction;
/// all methods are const and safe to call concurrently on distinct buffers.
///
/// Storage is row-major with the last axis fastest: (rho, z), (z1, z2), (z).
/// Forward transforms are unnormalised; inverse(forward(x)) == x.
class SpectralTransform {
public:
  SpectralTransform(GridSystem system, const std::vector<Axis>& axes, RadialKinetic radial)
      : system_(system), axes_(axes), radial_(radial) {
    size_ = 1;
    for (const auto& a : axes_) size_ *= a.n_points;
    build_plans();
    build_spectra();
  }

  std::size_t size() const { return size_; }
  GridSystem system() const { return system_; }
  RadialKinetic radial() const { return radial_; }

  /// Full transform in place (all axes). `scratch` must hold size() values.
  void forward(std::span<cplx> data, std::span<cplx> scratch) const {
    check(data);
    fftw_execute_dft(periodic_fwd_.get(), detail::as_fftw(data.data()), detail::as_fftw(data.data()));
    if (system_ == GridSystem::cylindrical_rz) radial_forward(data, scratch);
  }

  void inverse(std::span<cplx> data, std::span<cplx> scratch) const {
    check(data);
    if (system_ == GridSystem::cylindrical_rz) radial_inverse(data, scratch);
    fftw_execute_dft(periodic_bwd_.get(), detail::as_fftw(data.data()), detail::as_fftw(data.data()));
    const double s = 1.0 / static_cast<double>(periodic_count_);
    for (auto& v : data) v *= s;
  }

  std::vector<cplx> forward(std::span<const cplx> field) const {
    std::vector<cplx> out(field.begin(), field.end()), scratch(size_);
    forward(out, scratch);
    return out;
  }

  std::vector<cplx> inverse(std::span<const cplx> coeffs) const {
    std::vector<cplx> out(coeffs.begin(), coeffs.end()), scratch(size_);
    inverse(out, scratch);
    return out;
  }

  /// Transform along the periodic axes only (z, or z1 and z2).
  void periodic_forward(std::span<cplx> data) const {
    check(data);
    fftw_execute_dft(periodic_fwd_.get(), detail::as_fftw(data.data()), detail::as_fftw(data.data()));
  }

  void periodic_inverse(std::span<cplx> data) const {
    check(data);
    fftw_execute_dft(periodic_bwd_.get(), detail::as_fftw(data.data()), detail::as_fftw(data.data()));
    const double s = 1.0 / static_cast<double>(periodic_count_);
    for (auto& v : data) v *= s;
  }

  /// Kinetic energy (-1/2 Laplacian eigenvalue) per spectral index.
  const std::vector<double>& kinetic() const { return kinetic_; }
  /// Sum of periodic-axis wavenumbers per index (k_z or k1 + k2), with the
  /// unpaired Nyquist wavenumber set to 0 so real fields carry no momentum.
  const std::vector<double>& momentum() const { return momentum_; }
  /// Parseval weights: sum |x|^2 vol == sum |X|^2 weight, per spectral index.
  const std::vector<double>& weights() const { return weights_; }
  /// Parseval weight for data transformed along the periodic axes only.
  double periodic_weight() const { return periodic_weight_; }

  /// Periodic-axis wavenumbers for axis i (FFT order).
  const std::vector<double>& axis_wavenumbers(std::size_t i) const { return axis_k_.at(i); }

  SpectralSpace space() const {
    SpectralSpace s;
    for (std::size_t i = 0; i < axes_.size(); ++i) s.wavenumbers.push_back(axis_k_[i]);
    return s;
  }

  /// Radial kinetic eigenvalues (cylindrical grids only).
  const Eigen::VectorXd& radial_eigenvalues() const { return radial_values_; }

private:
  void check(std::span<const cplx> data) const {
    if (data.size() != size_)
      throw ShapeError("transform expects " + std::to_string(size_) + " values, got " +
                       std::to_string(data.size()));
  }

  void build_plans() {
    detail::FftwBuffer buf(size_);
    std::lock_guard lock(detail::fftw_planner_mutex());
    switch (system_) {
      case GridSystem::cartesian_1d: {
        const int n = static_cast<int>(axes_[0].n_points);
        periodic_count_ = axes_[0].n_points;
        periodic_fwd_.reset(fftw_plan_dft_1d(n, buf.ptr, buf.ptr, FFTW_FORWARD, detail::plan_flags));
        periodic_bwd_.reset(fftw_plan_dft_1d(n, buf.ptr, buf.ptr, FFTW_BACKWARD, detail::plan_flags));
        break;
      }
      case GridSystem::cartesian_2e: {
        const int n0 = static_cast<int>(axes_[0].n_points);
        const int n1 = static_cast<int>(axes_[1].n_points);
        periodic_count_ = size_;
        periodic_fwd_.reset(fftw_plan_dft_2d(n0, n1, buf.ptr, buf.ptr, FFTW_FORWARD, detail::plan_flags));
        periodic_bwd_.reset(fftw_plan_dft_2d(n0, n1, buf.ptr, buf.ptr, FFTW_BACKWARD, detail::plan_flags));
        break;
      }
      case GridSystem::cylindrical_rz: {
        const int nr = static_cast<int>(axes_[0].n_points);
        const int nz = static_cast<int>(axes_[1].n_points);
        periodic_count_ = axes_[1].n_points;
        periodic_fwd_.reset(fftw_plan_many_dft(1, &nz, nr, buf.ptr, nullptr, 1, nz, buf.ptr, nullptr, 1,
                                               nz, FFTW_FORWARD, detail::plan_flags));
        periodic_bwd_.reset(fftw_plan_many_dft(1, &nz, nr, buf.ptr, nullptr, 1, nz, buf.ptr, nullptr, 1,
                                               nz, FFTW_BACKWARD, detail::plan_flags));
        if (radial_ == RadialKinetic::sine) {
          // Real and imaginary parts of each z-column are transformed independently.
          auto* re = reinterpret_cast<double*>(buf.ptr);
          fftw_iodim dim{nr, 2 * nz, 2 * nz};
          fftw_iodim many[2] = {{nz, 2, 2}, {2, 1, 1}};
          fftw_r2r_kind fwd = FFTW_RODFT10, bwd = FFTW_RODFT01;
          sine_fwd_.reset(fftw_plan_guru_r2r(1, &dim, 2, many, re, re, &fwd, detail::plan_flags));
          sine_bwd_.reset(fftw_plan_guru_r2r(1, &dim, 2, many, re, re, &bwd, detail::plan_flags));
        }
        break;
      }
    }
    if (!periodic_fwd_ || !periodic_bwd_) throw ConfigError("FFTW planning failed");
  }

  void build_spectra() {
    for (const auto& a : axes_) {
      if (a.boundary == Boundary::periodic) {
        axis_k_.push_back(detail::fft_wavenumbers(a));
      } else {
        axis_k_.emplace_back(a.n_points);
      }
    }

    double vol = 1.0;
    for (const auto& a : axes_) vol *= a.spacing;
    periodic_weight_ = vol / static_cast<double>(periodic_count_);

    kinetic_.assign(size_, 0.0);
    momentum_.assign(size_, 0.0);
    weights_.assign(size_, periodic_weight_);

    if (system_ == GridSystem::cartesian_1d) {
      const auto& k = axis_k_[0];
      for (std::size_t i = 0; i < size_; ++i) {
        kinetic_[i] = 0.5 * k[i] * k[i];
        momentum_[i] = odd_k(0, i);
      }
      return;
    }
    if (system_ == GridSystem::cartesian_2e) {
      const auto& k1 = axis_k_[0];
      const auto& k2 = axis_k_[1];
      const std::size_t n2 = axes_[1].n_points;
      for (std::size_t i = 0; i < axes_[0].n_points; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
          kinetic_[i * n2 + j] = 0.5 * (k1[i] * k1[i] + k2[j] * k2[j]);
          momentum_[i * n2 + j] = odd_k(0, i) + odd_k(1, j);
        }
      return;
    }

    // Cylindrical: radial spectrum depends on the operator.
    const Axis& ra = axes_[0];
    const std::size_t nr = ra.n_points;
    const std::size_t nz = axes_[1].n_points;
    std::vector<double> radial_weight(nr, 1.0);
    if (radial_ == RadialKinetic::sine) {
      radial_values_.resize(static_cast<Eigen::Index>(nr));
      for (std::size_t m = 0; m < nr; ++m) {
        const double kappa = std::numbers::pi * static_cast<double>(m + 1) / ra.extent();
        axis_k_[0][m] = kappa;
        radial_values_[static_cast<Eigen::Index>(m)] = 0.5 * kappa * kappa;
        // RODFT10 basis norms: N/2 for m < N-1, N for the last mode (times 4 from the factor 2).
        radial_weight[m] = (m + 1 < nr) ? 1.0 / (2.0 * static_cast<double>(nr))
                                        : 1.0 / (4.0 * static_cast<double>(nr));
      }
    } else {
      Eigen::VectorXd diag, off;
      detail::conservative_radial_operator(ra, diag, off);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
      if (es.info() != Eigen::Success) throw NumericalAbort("radial eigendecomposition failed");
      radial_values_ = es.eigenvalues();
      radial_basis_ = es.eigenvectors();
      for (std::size_t m = 0; m < nr; ++m)
        axis_k_[0][m] = std::sqrt(2.0 * std::max(0.0, radial_values_[static_cast<Eigen::Index>(m)]));
    }
    const auto& kz = axis_k_[1];
    for (std::size_t m = 0; m < nr; ++m)
      for (std::size_t j = 0; j < nz; ++j) {
        const std::size_t i = m * nz + j;
        kinetic_[i] = radial_values_[static_cast<Eigen::Index>(m)] + 0.5 * kz[j] * kz[j];
        momentum_[i] = odd_k(1, j);
        weights_[i] = periodic_weight_ * radial_weight[m];
      }
  }

  /// Wavenumber for first-derivative operators: the Nyquist entry of an even-length axis is 0.
  double odd_k(std::size_t axis, std::size_t i) const {
    const std::size_t n = axes_[axis].n_points;
    return (n % 2 == 0 && i == n / 2) ? 0.0 : axis_k_[axis][i];
  }

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  void radial_forward(std::span<cplx> data, std::span<cplx> scratch) const {
    auto* re = reinterpret_cast<double*>(data.data());
    if (radial_ == RadialKinetic::sine) {
      fftw_execute_r2r(sine_fwd_.get(), re, re);
      return;
    }
    apply_radial(data, scratch, true);
  }

  void radial_inverse(std::span<cplx> data, std::span<cplx> scratch) const {
    auto* re = reinterpret_cast<double*>(data.data());
    if (radial_ == RadialKinetic::sine) {
      fftw_execute_r2r(sine_bwd_.get(), re, re);
      const double s = 1.0 / (2.0 * static_cast<double>(axes_[0].n_points));
      for (auto& v : data) v *= s;
      return;
    }
    apply_radial(data, scratch, false);
  }

  // Orthogonal eigenbasis along rho acting on the interleaved real view.
  void apply_radial(std::span<cplx> data, std::span<cplx> scratch, bool to_spectral) const {
    if (scratch.size() < size_) throw ShapeError("radial transform scratch too small");
    const auto nr = static_cast<Eigen::Index>(axes_[0].n_points);
    const auto cols = static_cast<Eigen::Index>(2 * axes_[1].n_points);
    Eigen::Map<RowMajor> x(reinterpret_cast<double*>(data.data()), nr, cols);
    Eigen::Map<RowMajor> y(reinterpret_cast<double*>(scratch.data()), nr, cols);
    if (to_spectral)
      y.noalias() = radial_basis_.transpose() * x;
    else
      y.noalias() = radial_basis_ * x;
    std::memcpy(data.data(), scratch.data(), size_ * sizeof(cplx));
  }

  GridSystem system_;
  std::vector<Axis> axes_;
  RadialKinetic radial_;
  std::size_t size_ = 0;
  std::size_t periodic_count_ = 1;
  double periodic_weight_ = 1.0;

  detail::Plan periodic_fwd_, periodic_bwd_, sine_fwd_, sine_bwd_;
  Eigen::MatrixXd radial_basis_;
  Eigen::VectorXd radial_values_;

  std::vector<std::vector<double>> axis_k_;
  std::vector<double> kinetic_, momentum_, weights_;
};

}  // namespace kickshift
