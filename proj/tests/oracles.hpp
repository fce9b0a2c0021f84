#pragma once
// Independent reference computations used by the tests. Nothing here calls
// the library's transforms or state builders.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline long double factorial(int n) {
  long double f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

inline long double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0L;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

/// Hydrogen R_nl(r) from the explicit Laguerre sum with long-double factorials.
inline double radial(int n, int l, double r) {
  const long double x = 2.0L * r / n;
  long double lag = 0.0L;
  const int p = n - l - 1, a = 2 * l + 1;
  for (int k = 0; k <= p; ++k) lag += ((k % 2) ? -1.0L : 1.0L) * binomial(p + a, p - k) * std::pow(x, k) / factorial(k);
  const long double norm =
      std::sqrt(std::pow(2.0L / n, 3) * factorial(n - l - 1) / (2.0L * n * factorial(n + l)));
  return static_cast<double>(norm * std::exp(-x / 2.0L) * std::pow(x, l) * lag);
}

/// Legendre P_l by the three-term recurrence.
inline double legendre(int l, double x) {
  double p0 = 1.0, p1 = x;
  if (l == 0) return p0;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// i^l R_nl Y_l0 at (rho, z).
inline cplx hydrogen(int n, int l, double rho, double z) {
  const double r = std::hypot(rho, z);
  const double c = r > 0.0 ? z / r : 1.0;
  const double y = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi)) * legendre(l, c);
  static const cplx il[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return il[l % 4] * radial(n, l, r) * y;
}

/// d/dz of hydrogen(n, l, rho, .) by a six-point central stencil on the closed form.
inline cplx hydrogen_dz(int n, int l, double rho, double z, double h = 1e-3) {
  auto f = [&](double zz) { return hydrogen(n, l, rho, zz); };
  return (-f(z + 3 * h) + 9.0 * f(z + 2 * h) - 45.0 * f(z + h) + 45.0 * f(z - h) - 9.0 * f(z - 2 * h) + f(z - 3 * h)) /
         (-60.0 * h);
}

/// <chi_i| -i d/dz |chi_j> on the staggered-rho, cell-centred-z node set with
/// midpoint weights 2 pi rho drho dz: the same quadrature a grid field uses.
inline cplx pz_matrix_element(int ni, int li, int nj, int lj, std::size_t nr, std::size_t nz, double d, double z_off) {
  cplx s = 0.0;
  double ni2 = 0.0, nj2 = 0.0;
  for (std::size_t i = 0; i < nr; ++i) {
    const double rho = (i + 0.5) * d;
    for (std::size_t j = 0; j < nz; ++j) {
      const double z = z_off + (static_cast<double>(j) - static_cast<double>(nz / 2)) * d;
      const cplx a = hydrogen(ni, li, rho, z);
      const cplx b = hydrogen(nj, lj, rho, z);
      const double w = 2.0 * std::numbers::pi * rho * d * d;
      s += std::conj(a) * cplx(0.0, -1.0) * hydrogen_dz(nj, lj, rho, z) * w;
      ni2 += std::norm(a) * w;
      nj2 += std::norm(b) * w;
    }
  }
  return s / std::sqrt(ni2 * nj2);
}

/// Sinc-DVR kinetic matrix -1/2 d^2/dx^2 on n points of spacing d (infinite-grid formula).
inline Eigen::MatrixXd sinc_dvr_kinetic(int n, double d) {
  Eigen::MatrixXd t(n, n);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = i - j;
      t(i, j) = k == 0 ? pi2 / (6.0 * d * d) : ((k % 2) ? -1.0 : 1.0) / (d * d * k * k);
    }
  return t;
}

struct HeliumDvr {
  double ground = 0.0;
  std::vector<double> ion_levels;
};

/// Soft-core two-electron helium on an n x n sinc-DVR grid of spacing d
/// (nodes symmetric about 0). Lowest eigenvalue by Lanczos from an
/// exchange-symmetric start, so it stays in the singlet sector.
inline HeliumDvr helium_dvr(int n, double d, int iters = 300, double pair = 0.6317, double pair_soft = 0.09168,
                            double ion = 1.1225, double ion_soft = 0.09169) {
  const Eigen::MatrixXd t = sinc_dvr_kinetic(n, d);
  Eigen::VectorXd x(n), v1(n);
  for (int i = 0; i < n; ++i) {
    x[i] = (i - (n - 1) / 2.0) * d;
    v1[i] = -ion / std::sqrt(x[i] * x[i] + ion_soft);
  }
  HeliumDvr out;
  {
    Eigen::MatrixXd h1 = t;
    h1.diagonal() += v1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h1, Eigen::EigenvaluesOnly);
    out.ion_levels = {es.eigenvalues()[0], es.eigenvalues()[1]};
  }
  Eigen::MatrixXd v(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      v(i, j) = v1[i] + v1[j] + pair / std::sqrt((x[i] - x[j]) * (x[i] - x[j]) + pair_soft);
  // psi as an n x n matrix: H psi = T psi + psi T + V .* psi.
  auto apply = [&](const Eigen::MatrixXd& p) -> Eigen::MatrixXd { return t * p + p * t + v.cwiseProduct(p); };

  Eigen::MatrixXd q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = std::exp(-0.5 * (x[i] * x[i] + x[j] * x[j]));
  q /= q.norm();
  Eigen::MatrixXd q_prev = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> alpha, beta;
  double b_prev = 0.0;
  for (int k = 0; k < iters; ++k) {
    Eigen::MatrixXd w = apply(q);
    const double a = (q.array() * w.array()).sum();
    w -= a * q + b_prev * q_prev;
    alpha.push_back(a);
    const double b = w.norm();
    if (b < 1e-13) break;
    beta.push_back(b);
    q_prev = q;
    q = w / b;
    b_prev = b;
  }
  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd diag(m), off(std::max<Eigen::Index>(m - 1, 0));
  for (Eigen::Index i = 0; i < m; ++i) diag[i] = alpha[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < m; ++i) off[i] = beta[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  out.ground = es.eigenvalues()[0];
  return out;
}

/// Deterministic generator for property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }
  cplx cnormal() { return {normal(), normal()}; }
  std::vector<cplx> field(std::size_t n) {
    std::vector<cplx> v(n);
    for (auto& x : v) x = cnormal();
    return v;
  }
};

}  // namespace oracle
