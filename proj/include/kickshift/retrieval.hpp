#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "kickshift/errors.hpp"

namespace kickshift {

/// Field-free <p_z> of cos(theta)|i> + sin(theta) e^{i phi}|j>.
inline double pz_model(double theta_R, double phi, double rho_ij) {
  return rho_ij * std::cos(phi) * std::sin(2.0 * theta_R);
}

/// Post-pulse <p_z> over a (phi, theta) lattice; pz[p][t] belongs to phi_values[p], theta_values[t].
struct ScanTable {
  std::vector<double> theta_values;
  std::vector<double> phi_values;
  std::vector<std::vector<double>> pz;
  std::vector<std::vector<std::string>> run_ids;

  std::vector<double> row(std::size_t p) const { return pz.at(p); }

  void validate() const {
    if (pz.size() != phi_values.size()) throw ShapeError("scan table has the wrong number of phi rows");
    for (const auto& r : pz) {
      if (r.size() != theta_values.size()) throw ShapeError("scan table row has the wrong length");
      for (double x : r)
        if (!std::isfinite(x)) throw NumericalAbort("scan table contains a non-finite value");
    }
  }
};

struct ThetaFit {
  double a = 0.0;
  double B = 0.0;
  double residual_rms = 0.0;
};

struct PhaseFit {
  double a = 0.0;
  double b = 0.0;
  double phi0 = 0.0;
  /// -ln(b / b_ref) with b_ref = 1 unless a reference amplitude was given.
  double gamma = 0.0;
  double residual_rms = 0.0;
  bool degenerate = false;
};

namespace detail {

inline Eigen::VectorXd solve_ls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) throw ConfigError(std::string(what) + ": rank-deficient design");
  return qr.solve(y);
}

inline std::size_t distinct_count(std::vector<double> v, double tol = 1e-12) {
  std::sort(v.begin(), v.end());
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (i == 0 || v[i] - v[i - 1] > tol) ++n;
  return n;
}

}  // namespace detail

/// Least squares of pz(theta) on {1, sin 2 theta}.
inline ThetaFit fit_theta(const std::vector<double>& theta, const std::vector<double>& pz) {
  if (theta.size() != pz.size()) throw ShapeError("fit_theta: theta and pz lengths differ");
  if (detail::distinct_count(theta) < 3) throw ConfigError("fit_theta needs at least 3 distinct theta values");
  const auto n = static_cast<Eigen::Index>(theta.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = std::sin(2.0 * theta[static_cast<std::size_t>(i)]);
    y[i] = pz[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = detail::solve_ls(x, y, "fit_theta");
  const double rms = std::sqrt((x * c - y).squaredNorm() / static_cast<double>(n));
  return {c[0], c[1], rms};
}

/// Least squares of B(phi) = P cos(phi) - Q sin(phi); b = hypot(P, Q), phi0 = atan2(Q, P).
inline PhaseFit fit_phase(const std::vector<double>& phi, const std::vector<double>& B, double b_ref = 1.0) {
  if (phi.size() != B.size()) throw ShapeError("fit_phase: phi and B lengths differ");
  if (detail::distinct_count(phi) < 3) throw ConfigError("fit_phase needs at least 3 distinct phi values");
  const auto n = static_cast<Eigen::Index>(phi.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = std::cos(phi[static_cast<std::size_t>(i)]);
    x(i, 1) = -std::sin(phi[static_cast<std::size_t>(i)]);
    y[i] = B[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = detail::solve_ls(x, y, "fit_phase");
  PhaseFit f;
  f.b = std::hypot(c[0], c[1]);
  f.residual_rms = std::sqrt((x * c - y).squaredNorm() / static_cast<double>(n));
  const double scale = y.cwiseAbs().maxCoeff();
  if (f.b <= 1e-14 * std::max(1.0, scale)) {
    f.b = 0.0;
    f.phi0 = 0.0;
    f.degenerate = true;
    f.gamma = std::numeric_limits<double>::infinity();
    return f;
  }
  f.phi0 = std::atan2(c[1], c[0]);
  if (f.phi0 <= -std::numbers::pi) f.phi0 += 2.0 * std::numbers::pi;
  f.gamma = -std::log(f.b / b_ref);
  return f;
}

/// Two-stage fit of a whole table: fit_theta per phi row, then fit_phase on B(phi).
/// `a` is the mean row offset; residual_rms is measured against the table.
inline PhaseFit fit_scan(const ScanTable& t, double b_ref = 1.0) {
  t.validate();
  std::vector<double> bs, as;
  for (std::size_t p = 0; p < t.phi_values.size(); ++p) {
    const ThetaFit f = fit_theta(t.theta_values, t.pz[p]);
    bs.push_back(f.B);
    as.push_back(f.a);
  }
  PhaseFit f = fit_phase(t.phi_values, bs, b_ref);
  double a = 0.0;
  for (double x : as) a += x;
  f.a = a / static_cast<double>(as.size());
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < t.phi_values.size(); ++p)
    for (std::size_t k = 0; k < t.theta_values.size(); ++k) {
      const double m = f.a + f.b * std::cos(t.phi_values[p] + f.phi0) * std::sin(2.0 * t.theta_values[k]);
      ss += (m - t.pz[p][k]) * (m - t.pz[p][k]);
      ++n;
    }
  f.residual_rms = std::sqrt(ss / static_cast<double>(n));
  return f;
}

/// Fitted amplitudes B(phi) per row, in table order.
inline std::vector<ThetaFit> fit_rows(const ScanTable& t) {
  std::vector<ThetaFit> out;
  for (const auto& r : t.pz) out.push_back(fit_theta(t.theta_values, r));
  return out;
}

/// Default lattice: theta in {0, pi/16, ..., pi/2}, phi in {pi/6, pi/4, pi/3, pi/2}.
inline std::vector<double> default_theta_values() {
  std::vector<double> v;
  for (int i = 0; i <= 8; ++i) v.push_back(i * std::numbers::pi / 16.0);
  return v;
}
inline std::vector<double> default_phi_values() {
  const double pi = std::numbers::pi;
  return {pi / 6.0, pi / 4.0, pi / 3.0, pi / 2.0};
}

/// Evaluates cell(theta, phi) over the lattice on `threads` workers. Results
/// land by index, so the table does not depend on scheduling. Failed cells are
/// collected and reported together.
inline ScanTable run_scan(const std::vector<double>& theta, const std::vector<double>& phi,
                          const std::function<double(double, double)>& cell, unsigned threads = 1) {
  if (phi.empty() || theta.empty()) throw ConfigError("scan needs at least one theta and one phi");
  for (double t : theta)
    if (t < 0.0 || t > std::numbers::pi / 2.0 + 1e-12) throw ConfigError("scan theta values must lie in [0, pi/2]");
  ScanTable table;
  table.theta_values = theta;
  table.phi_values = phi;
  table.pz.assign(phi.size(), std::vector<double>(theta.size(), 0.0));
  table.run_ids.assign(phi.size(), std::vector<std::string>(theta.size()));
  const std::size_t total = theta.size() * phi.size();
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::vector<std::string> failures;
  auto worker = [&] {
    for (std::size_t c = next++; c < total; c = next++) {
      const std::size_t p = c / theta.size(), k = c % theta.size();
      std::ostringstream id;
      id << "p" << p << "t" << k;
      table.run_ids[p][k] = id.str();
      try {
        table.pz[p][k] = cell(theta[k], phi[p]);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mutex);
        failures.push_back(id.str() + ": " + e.what());
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    std::string msg = "scan incomplete, " + std::to_string(failures.size()) + " failed cell(s):";
    for (const auto& f : failures) msg += "\n  " + f;
    throw NumericalAbort(msg);
  }
  return table;
}

}  // namespace kickshift
