#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kickshift/models.hpp"
#include "kickshift/solver.hpp"
#include "kickshift/wavefield.hpp"
#include "oracles.hpp"

using namespace kickshift;
using oracle::Gen;

namespace {

WaveField random_field(GridPtr g, Gen& gen) {
  WaveField w(g, gen.field(g->size()));
  w.normalize();
  return w;
}

GridPtr grid_1d() { return build_grid(GridSystem::cartesian_1d, {64.0}, {0.25}); }
GridPtr grid_cyl() { return build_grid(GridSystem::cylindrical_rz, {16.0, 32.0}, {0.25, 0.25}, {{0.0, 0.125}}); }
GridPtr grid_2e() { return build_grid(GridSystem::cartesian_2e, {16.0, 16.0}, {0.25, 0.25}); }

}  // namespace

TEST(WaveField, RepresentationFollowsGrid) {
  EXPECT_EQ(WaveField(grid_cyl()).representation(), Representation::u_scaled);
  EXPECT_EQ(WaveField(grid_1d()).representation(), Representation::psi);
  EXPECT_EQ(WaveField(grid_2e()).representation(), Representation::psi);
}

TEST(WaveField, PsiRoundTrip) {
  const auto g = grid_cyl();
  Gen gen(1);
  const auto psi = gen.field(g->size());
  const auto w = WaveField::from_psi(g, psi);
  const auto back = w.to_psi();
  for (std::size_t i = 0; i < psi.size(); ++i) EXPECT_LT(std::abs(back[i] - psi[i]), 1e-13 * (1 + std::abs(psi[i])));
  // u = sqrt(2 pi rho) psi on the first radial node.
  const double rho0 = g->axis(0).node(0);
  EXPECT_NEAR(std::abs(w[0]), std::sqrt(2.0 * std::numbers::pi * rho0) * std::abs(psi[0]), 1e-14);
}

TEST(WaveField, NormalizeGivesUnitNorm) {
  Gen gen(2);
  for (const auto& g : {grid_1d(), grid_cyl(), grid_2e()}) {
    WaveField w(g, gen.field(g->size()));
    w.scale(37.0);
    w.normalize();
    EXPECT_NEAR(w.norm2(), 1.0, 1e-12);
  }
}

TEST(WaveField, ZeroFieldCannotNormalize) {
  WaveField w(grid_1d());
  EXPECT_THROW(w.normalize(), NumericalAbort);
}

TEST(WaveField, ShapeMismatchThrows) {
  EXPECT_THROW(WaveField(grid_1d(), std::vector<cplx>(7)), ShapeError);
  EXPECT_THROW(inner_product(WaveField(grid_1d()), WaveField(grid_2e())), ShapeError);
}

TEST(WaveField, InnerProductPhaseLinearity) {
  Gen gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = trial % 2 ? grid_cyl() : grid_1d();
    const auto a = random_field(g, gen);
    const double th = gen.uniform(-4.0, 4.0);
    WaveField b = a;
    b.scale(std::polar(1.0, th));
    const cplx ip = inner_product(a, b);
    EXPECT_NEAR(ip.real(), std::cos(th), 1e-12);
    EXPECT_NEAR(ip.imag(), std::sin(th), 1e-12);
    EXPECT_NEAR(std::abs(inner_product(a, a) - 1.0), 0.0, 1e-12);
  }
}

TEST(WaveField, FidelityBoundsProperty) {
  Gen gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = grid_1d();
    const auto a = random_field(g, gen);
    const auto b = random_field(g, gen);
    const double f = fidelity(a, b);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    EXPECT_NEAR(fidelity(a, a), 1.0, 1e-12);
  }
}

TEST(WaveField, IonEigenstatesOrthogonal) {
  const auto g = build_grid(GridSystem::cartesian_1d, {64.0}, {0.25});
  const auto ion = eigensolve_1d(helium_ion_potential(g), 2);
  EXPECT_LT(std::abs(inner_product(ion[0].state, ion[1].state)), 1e-8);
  EXPECT_LT(fidelity(ion[0].state, ion[1].state), 1e-12);
}

TEST(Observables, GlobalPhaseInvariance) {
  Gen gen(5);
  const auto g = grid_cyl();
  const auto v = coulomb_potential(g);
  for (int trial = 0; trial < 10; ++trial) {
    const auto psi = gaussian_packet(g, gen.uniform(-3, 3), gen.uniform(0.7, 2.0), gen.uniform(-1, 1));
    WaveField phased = psi;
    phased.scale(std::polar(1.0, gen.uniform(0, 6.28)));
    EXPECT_NEAR(expectation_z(phased), expectation_z(psi), 1e-12);
    EXPECT_NEAR(expectation_pz(phased), expectation_pz(psi), 1e-12);
    EXPECT_NEAR(total_energy(phased, v), total_energy(psi, v), 1e-12);
    const auto p0 = density_z(psi), p1 = density_z(phased);
    for (std::size_t j = 0; j < p0.size(); ++j) EXPECT_NEAR(p0[j], p1[j], 1e-12);
  }
}

TEST(Observables, SymmetricGaussianAtOrigin) {
  const auto g = grid_1d();
  EXPECT_NEAR(expectation_z(gaussian_packet(g, 0.0, 1.3)), 0.0, 1e-10);
}

TEST(Observables, MomentumOfModulatedGaussian) {
  for (const auto& g : {grid_1d(), grid_cyl()}) {
    for (double k0 : {-1.5, 0.3, 2.0}) EXPECT_NEAR(expectation_pz(gaussian_packet(g, 0.5, 1.5, k0)), k0, 1e-8);
  }
  // Two electrons: <p1 + p2>.
  EXPECT_NEAR(expectation_pz(gaussian_packet(grid_2e(), 0.0, 1.0, 0.7)), 1.4, 1e-8);
}

TEST(Observables, ParityGivesZeroMomentum) {
  // Real even or odd states: <p_z> = 0.
  const auto g = grid_1d();
  const auto ion = eigensolve_1d(helium_ion_potential(g), 3);
  for (const auto& e : ion) EXPECT_NEAR(expectation_pz(e.state), 0.0, 1e-8);
  WaveField phased = ion[1].state;
  phased.scale(std::polar(1.0, 0.9));
  EXPECT_NEAR(expectation_pz(phased), 0.0, 1e-8);
}

TEST(Observables, OscillatorGroundEnergy) {
  const auto g = grid_1d();
  const auto v = sample_potential(g, [](double z) { return 0.5 * z * z; });
  // Exact ground Gaussian exp(-z^2/2): sigma = 1/sqrt(2).
  EXPECT_NEAR(total_energy(gaussian_packet(g, 0.0, std::sqrt(0.5)), v), 0.5, 1e-8);
}

TEST(Observables, DensityIntegratesToOne) {
  Gen gen(6);
  for (const auto& g : {grid_1d(), grid_cyl()}) {
    const auto psi = gaussian_packet(g, gen.uniform(-2, 2), 1.2);
    const auto p = density_z(psi);
    double s = 0.0;
    for (double x : p) s += x;
    EXPECT_NEAR(s * g->z_axis().spacing, 1.0, 1e-6);
  }
  const auto g2 = grid_2e();
  const auto psi2 = random_field(g2, gen);
  for (std::size_t ax : {0u, 1u}) {
    double s = 0.0;
    for (double x : density_z(psi2, ax)) s += x;
    EXPECT_NEAR(s * g2->axis(ax).spacing, 1.0, 1e-12);
  }
}

TEST(Observables, DensityPeakAtCentre) {
  const auto g = grid_cyl();
  for (double c : {-4.0, 0.0, 3.3}) {
    const auto p = density_z(gaussian_packet(g, c, 1.0));
    const auto z = g->z_axis().nodes();
    const auto j = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    EXPECT_LE(std::abs(z[j] - c), g->z_axis().spacing);
  }
}

TEST(Observables, TranslateMovesExpectation) {
  const auto g = grid_2e();
  const auto psi = gaussian_packet(g, -1.0, 0.5, 0.0, 0.5);
  const auto moved = translate_z(psi, 2.5);
  const auto [a, b] = expectation_z_pair(psi);
  const auto [c, d] = expectation_z_pair(moved);
  EXPECT_NEAR(c - a, 2.5, 1e-10);
  EXPECT_NEAR(d - b, 2.5, 1e-10);
  EXPECT_NEAR(moved.norm2(), 1.0, 1e-12);
}

TEST(Observables, ExchangeResidual) {
  const auto g = grid_2e();
  const auto sym = gaussian_packet(g, 0.0, 1.0);
  EXPECT_LT(exchange_residual(sym, 1), 1e-15);
  const auto asym = gaussian_packet(g, 1.0, 1.0, 0.0, -1.0);
  EXPECT_GT(exchange_residual(asym, 1), 0.1);
  EXPECT_THROW(exchange_residual(WaveField(grid_1d(), std::vector<cplx>(256, 1.0)), 1), ShapeError);
}
