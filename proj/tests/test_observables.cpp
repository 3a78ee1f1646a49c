#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qduality/dynamics.hpp"
#include "qduality/observables.hpp"
#include "test_support.hpp"

using namespace qduality;
using qtest::sample;

namespace {

Grid ho_grid() { return Grid(256, -10.0, 10.0, Boundary::Periodic); }

Wavefunction plane_wave(const Grid& g, int cycles) {
  const double k = 2.0 * std::numbers::pi * cycles / g.length();
  return InitialStateSpec(initial::PlaneWave{k}).build(g, PhysicalConstants{});
}

}  // namespace

TEST_CASE("kinetic density: plane wave is uniform in all three forms") {
  const Grid g(128, 0.0, 8.0, Boundary::Periodic);
  for (const PhysicalConstants c : {PhysicalConstants{}, PhysicalConstants{2.0, 3.0}}) {
    const Wavefunction psi = plane_wave(g, 3);
    const double k = 2.0 * std::numbers::pi * 3 / g.length();
    const double expect = c.hbar * c.hbar * k * k / (2.0 * c.mass) / g.length();
    for (KineticForm f : {KineticForm::A, KineticForm::B, KineticForm::C}) {
      const DensityField d = kinetic_density(psi, f, c);
      for (double v : d.values) CHECK(v == doctest::Approx(expect).epsilon(1e-11));
    }
  }
}

TEST_CASE("energies of oscillator states (hbar = m = omega = 1)") {
  const Grid g = ho_grid();
  const PhysicalConstants c;
  const PotentialSpec v = PotentialSpec::harmonic(1.0);
  const Wavefunction ground = InitialStateSpec(initial::HarmonicEigen{0}).build(g, c);
  // virial theorem: <K> = <V> = E0/2
  CHECK(std::abs(kinetic_density(ground, KineticForm::A, c).integral() - 0.25) < 1e-8);
  CHECK(std::abs(potential_density(ground, v, c).integral() - 0.25) < 1e-8);
  CHECK(std::abs(hc_density(ground, v, c).integral() - 0.5) < 1e-8);

  const auto sup = InitialStateSpec::superposition(
      {{1.0, InitialStateSpec(initial::HarmonicEigen{0})}, {1.0, InitialStateSpec(initial::HarmonicEigen{1})}});
  CHECK(std::abs(hc_density(sup.build(g, c), v, c).integral() - 1.0) < 1e-8);
}

TEST_CASE("potential density") {
  const Grid g = ho_grid();
  const PhysicalConstants c;
  std::mt19937 rng(3);
  const Wavefunction psi = qtest::random_smooth_state(g, rng);
  for (double x : potential_density(psi, PotentialSpec::free(), c).values) CHECK(x == 0.0);
  const PotentialSpec constant(potential::Custom{RealField(g.size(), 0.75)});
  CHECK(potential_density(psi, constant, c).integral() == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("hc density of a plane wave with V = 0") {
  const Grid g(64, 0.0, 2.0 * std::numbers::pi, Boundary::Periodic);
  const PhysicalConstants c{1.0, 1.0};
  const Wavefunction psi = plane_wave(g, 4);
  CHECK(hc_density(psi, PotentialSpec::free(), c).integral() == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("property: three kinetic forms integrate to the same value") {
  const Grid g(256, -15.0, 15.0, Boundary::Periodic);
  const PhysicalConstants c;
  std::mt19937 rng(77);
  std::vector<Wavefunction> states;
  states.push_back(plane_wave(g, 5));
  states.push_back(InitialStateSpec(initial::Gaussian{1.0, 1.2, -0.8}).build(g, c));
  for (int n : {0, 1, 3}) states.push_back(InitialStateSpec(initial::HarmonicEigen{n}).build(g, c));
  for (int i = 0; i < 5; ++i) states.push_back(qtest::random_smooth_state(g, rng));
  for (const auto& psi : states) {
    const DensityField a = kinetic_density(psi, KineticForm::A, c);
    const double ia = a.integral();
    const double ib = kinetic_density(psi, KineticForm::B, c).integral();
    const double ic = kinetic_density(psi, KineticForm::C, c).integral();
    CHECK(std::abs(ia - ib) <= 1e-10 * (1.0 + std::abs(ia)));
    CHECK(std::abs(ia - ic) <= 1e-10 * (1.0 + std::abs(ia)));
    // hermiticity
    CHECK(a.imag_integral <= 1e-10 * (1.0 + std::abs(ia)));
    const KineticDecomposition d = kinetic_decomposition(psi, c);
    CHECK(d.flow >= 0.0);
    CHECK(d.quantum >= 0.0);
    CHECK(std::abs(d.total() - ic) <= 1e-12 * (1.0 + std::abs(ic)));
    CHECK(std::abs(d.boundary) < 1e-12);
    // the flow carries the full mean momentum
    CHECK(std::abs(flow_momentum(psi, c, DerivativeScheme::Spectral) - mean_momentum(psi, c, DerivativeScheme::Spectral)) <
          1e-9);
  }
}

TEST_CASE("kinetic forms on a vanishing grid agree within scheme order") {
  const PhysicalConstants c;
  auto gap = [&](std::size_t n) {
    const Grid g(n, -12.0, 12.0, Boundary::Vanishing);
    const Wavefunction psi = InitialStateSpec(initial::Gaussian{0.5, 1.0, 1.0}).build(g, c);
    const double ia = kinetic_density(psi, KineticForm::A, c).integral();
    const double ib = kinetic_density(psi, KineticForm::B, c).integral();
    return std::abs(ia - ib);
  };
  const double e1 = gap(129), e2 = gap(257);
  MESSAGE("FD4 form A/B gap: " << e1 << " " << e2);
  CHECK(e1 < 1e-3);
  CHECK((e2 < e1 / 8.0 || e2 < 1e-12));
}

TEST_CASE("kinetic decomposition closed forms") {
  const PhysicalConstants c;
  SUBCASE("plane wave") {
    const Grid g(64, 0.0, 2.0 * std::numbers::pi, Boundary::Periodic);
    const KineticDecomposition d = kinetic_decomposition(plane_wave(g, 3), c);
    CHECK(std::abs(d.quantum) < 1e-12);
    CHECK(d.flow == doctest::Approx(4.5).epsilon(1e-12));
  }
  SUBCASE("real Gaussian") {
    const Grid g(256, -15.0, 15.0, Boundary::Periodic);
    const Wavefunction psi = InitialStateSpec(initial::Gaussian{0.0, 1.3, 0.0}).build(g, c);
    const KineticDecomposition d = kinetic_decomposition(psi, c);
    CHECK(d.flow == 0.0);
    CHECK(std::abs(d.quantum - kinetic_density(psi, KineticForm::A, c).integral()) < 1e-12);
  }
  SUBCASE("moving Gaussian packet") {
    const Grid g(256, -15.0, 15.0, Boundary::Periodic);
    for (const PhysicalConstants cc : {PhysicalConstants{}, PhysicalConstants{0.5, 2.0}}) {
      const double sigma = 1.1, k0 = 1.7;
      const Wavefunction psi = InitialStateSpec(initial::Gaussian{-1.0, sigma, k0}).build(g, cc);
      const KineticDecomposition d = kinetic_decomposition(psi, cc);
      CHECK(std::abs(d.flow - cc.hbar * cc.hbar * k0 * k0 / (2 * cc.mass)) < 1e-8);
      CHECK(std::abs(d.quantum - cc.hbar * cc.hbar / (8 * cc.mass * sigma * sigma)) < 1e-8);
    }
  }
}

TEST_CASE("local fields and wave-side density") {
  const PhysicalConstants c;
  SUBCASE("de Broglie wave") {
    const Grid g(64, 0.0, 2.0 * std::numbers::pi, Boundary::Periodic);
    const double k = 2.0, omega = c.hbar * k * k / (2 * c.mass), dt = 1e-3;
    std::vector<ComplexField> frames;
    for (int j = 0; j < 3; ++j)
      frames.push_back(sample(g, [&](double x) { return std::polar(1.0 / std::sqrt(g.length()), k * x - omega * j * dt); }));
    const Trajectory traj(g, dt, frames, DerivativeScheme::Spectral);
    const LocalFields lf = local_fields(traj, 1, c);
    const double discrete = c.hbar * std::sin(omega * dt) / dt;
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(lf.momentum[i] - c.hbar * k) < 1e-12);
      CHECK(std::abs(lf.energy[i] - discrete) < 1e-12);
      CHECK(std::abs(lf.energy[i] - c.hbar * omega) <= c.hbar * std::pow(omega, 3) * dt * dt / 6 + 1e-12);
    }
    const DensityField hw = hw_density(traj, 1, c);
    for (double v : hw.values) CHECK(std::abs(v - discrete / g.length()) < 1e-12);
  }
  SUBCASE("oscillator ground state evolved exactly") {
    const Grid g = ho_grid();
    const double dt = 1e-3;
    const Trajectory traj = analytic_reference(reference::HarmonicEigen{0, 1.0}, g, c, {0.0, dt, 3});
    const LocalFields lf = local_fields(traj, 1, c);
    const double discrete = std::sin(0.5 * dt) / dt;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (lf.node_mask[i]) continue;
      CHECK(std::abs(lf.energy[i] - discrete) < 1e-9);
      CHECK(std::abs(lf.energy[i] - 0.5) < std::pow(0.5, 3) * dt * dt / 6 + 1e-9);
      CHECK(std::abs(lf.momentum[i]) < 1e-9);
    }
    const DensityField hw = hw_density(traj, 1, c);
    const PolarForm p = polar_decompose(traj.wavefunction(1));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(hw.values[i] - discrete * p.amplitude_sq[i]) < 1e-12);
    CHECK(std::abs(hw.integral() - 0.5) < 1e-7);
  }
  SUBCASE("frozen real frames") {
    const Grid g = ho_grid();
    const Wavefunction psi = InitialStateSpec(initial::HarmonicEigen{2}).build(g, c);
    const Trajectory traj(g, 0.01, std::vector<ComplexField>(3, psi.values()), DerivativeScheme::Spectral);
    const LocalFields lf = local_fields(traj, 1, c);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(lf.energy[i] == 0.0);
      CHECK(lf.momentum[i] == 0.0);
    }
    for (double v : hw_density(traj, 1, c).values) CHECK(v == 0.0);
  }
}
