#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qduality/dynamics.hpp"
#include "qduality/errors.hpp"
#include "qduality/functionals.hpp"
#include "qduality/mutation.hpp"
#include "qduality/observables.hpp"
#include "test_support.hpp"

using namespace qduality;
using qtest::max_abs;
using qtest::max_abs_diff;

namespace {

double l2(const Grid& g, const ComplexField& f) {
  RealField a(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) a[i] = std::norm(f[i]);
  return std::sqrt(integrate(g, a));
}

Trajectory cn_trajectory(const Grid& g, const Wavefunction& psi0, const PotentialSpec& v, double dt, std::size_t steps,
                         const PhysicalConstants& c = {}) {
  return propagate(psi0, v, {PropagatorMethod::CrankNicolson, dt, steps}, c);
}

}  // namespace

TEST_CASE("actions: bookkeeping identities") {
  const Grid g(128, -10.0, 10.0, Boundary::Periodic);
  const PhysicalConstants c;
  const PotentialSpec v = PotentialSpec::harmonic(1.0);
  const Trajectory traj = cn_trajectory(g, InitialStateSpec(initial::Gaussian{0.5, 0.8, 0.5}).build(g, c), v, 1e-2, 40);
  const ActionReport r = actions(traj, v, c);
  CHECK(r.hamiltonian == doctest::Approx(r.kinetic + r.potential).epsilon(1e-14));
  CHECK(r.corpuscular_action == doctest::Approx(r.kinetic - r.potential).epsilon(1e-14));
  CHECK(r.wave_action == doctest::Approx(2.0 * r.kinetic - r.wave_energy).epsilon(1e-14));
  CHECK(r.time_window.first == 0.0);
  CHECK(r.time_window.second == doctest::Approx(0.4));
  CHECK(functional_value(FunctionalTag::Hc, traj, v, c) == doctest::Approx(r.hamiltonian).epsilon(1e-14));
  CHECK(functional_value(FunctionalTag::Hw, traj, v, c) == doctest::Approx(r.wave_energy).epsilon(1e-14));
}

TEST_CASE("actions: stationary state has H_c = H_w = E T") {
  const Grid g(256, -10.0, 10.0, Boundary::Periodic);
  for (const PhysicalConstants c : {PhysicalConstants{}, PhysicalConstants{1.3, 0.6}}) {
    const double omega = 1.2;
    const double dt = 1e-3;
    const std::size_t n = 201;
    const Trajectory traj = analytic_reference(reference::HarmonicEigen{1, omega}, g, c, {0.0, dt, n});
    const ActionReport r = actions(traj, PotentialSpec::harmonic(omega), c);
    const double e = 1.5 * c.hbar * omega, T = dt * (n - 1);
    CHECK(std::abs(r.hamiltonian - e * T) < 1e-10);
    // central difference of exp(-iEt/hbar) gives hbar sin(E dt/hbar)/dt; one-sided ends are
    // second order as well
    CHECK(std::abs(r.wave_energy - e * T) < e * e * e * dt * dt / (c.hbar * c.hbar) * T);
    CHECK(r.kinetic == doctest::Approx(r.potential).epsilon(1e-9));  // virial
  }
}

TEST_CASE("variation_hc is the Hamiltonian") {
  const PhysicalConstants c{0.8, 1.7};
  SUBCASE("plane wave") {
    const Grid g(64, 0.0, 2.0 * std::numbers::pi, Boundary::Periodic);
    const Wavefunction psi = InitialStateSpec(initial::PlaneWave{-5.0}).build(g, c);
    const ComplexField h = variation_hc(psi, PotentialSpec::free(), c);
    const double e = c.hbar * c.hbar * 25.0 / (2.0 * c.mass);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(h[i] - e * psi[i]) < 1e-13 * e);
  }
  SUBCASE("oscillator eigenstates") {
    const Grid g(256, -12.0, 12.0, Boundary::Periodic);
    for (int n : {0, 1, 4}) {
      const Wavefunction psi = InitialStateSpec(initial::HarmonicEigen{n, 0.9}).build(g, c);
      const ComplexField h = variation_hc(psi, PotentialSpec::harmonic(0.9), c);
      const double e = c.hbar * 0.9 * (n + 0.5);
      double worst = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(h[i] - e * psi[i]));
      CHECK(worst < 1e-10);
    }
  }
  SUBCASE("linearity and hermiticity") {
    const Grid g(128, -10.0, 10.0, Boundary::Periodic);
    std::mt19937 rng(42);
    const PotentialSpec v = PotentialSpec::harmonic(1.0);
    const Wavefunction a = qtest::random_smooth_state(g, rng), b = qtest::random_smooth_state(g, rng);
    const cplx alpha{0.3, -1.1}, beta{2.0, 0.4};
    ComplexField mix(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) mix[i] = alpha * a[i] + beta * b[i];
    const ComplexField ha = variation_hc(a, v, c), hb = variation_hc(b, v, c), hm = variation_hc(Wavefunction(g, mix), v, c);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(hm[i] - alpha * ha[i] - beta * hb[i]));
    CHECK(worst < 1e-11 * max_abs(hm));
    ComplexField ab(g.size()), ba(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      ab[i] = std::conj(a[i]) * hb[i];
      ba[i] = std::conj(ha[i]) * b[i];
    }
    CHECK(std::abs(integrate(g, ab) - integrate(g, ba)) < 1e-12);
  }
}

TEST_CASE("variation_hw matches i hbar psi_t of a closed-form evolution") {
  const Grid g(256, -16.0, 16.0, Boundary::Periodic);
  const PhysicalConstants c{1.0, 1.0};
  const reference::FreeGaussian s{0.0, 1.0, 1.0};
  const double dt = 1e-3;
  const Trajectory traj = analytic_reference(s, g, c, {0.0, dt, 11});
  const ComplexField gw = variation_hw(traj, 5, c);
  const ComplexField exact = analytic_time_derivative(s, g, c, traj.time(5));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(gw[i] - cplx{0.0, c.hbar} * exact[i]));
  CHECK(worst < 1e-5);
}

TEST_CASE("duality residual on propagated trajectories") {
  const Grid g(256, -10.0, 10.0, Boundary::Periodic);
  const PhysicalConstants c;
  const PotentialSpec v = PotentialSpec::harmonic(1.0);
  const Wavefunction psi0 = InitialStateSpec(initial::Gaussian{1.0, 1.0 / std::sqrt(2.0), 0.0}).build(g, c);
  const RealField vx = v.sample(g, c);
  // ||H^3 psi0|| from the same discrete operator
  ComplexField h3 = psi0.values();
  for (int j = 0; j < 3; ++j) h3 = apply_hamiltonian(g, h3, vx, c, DerivativeScheme::Spectral);
  const double dt = 1e-3;
  const Trajectory traj = cn_trajectory(g, psi0, v, dt, 20);
  const double bound = dt * dt / (4.0 * c.hbar * c.hbar) * l2(g, h3);
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const DualityResidual r = duality_residual(traj, k, v, c);
    CHECK(r.norm <= bound + 1e-12 * r.scale);
    CHECK(r.scale > 0.5);
  }

  SUBCASE("a corrupted frame is detected") {
    const double baseline = duality_residual(traj, 10, v, c).norm;
    ComplexField bad = traj.frame(11);
    for (auto& z : bad) z *= 1.01;
    const Trajectory corrupted(g, dt, [&] {
      auto frames = traj.frames();
      frames[11] = bad;
      return frames;
    }(), traj.scheme(), 0.0, Trajectory::AllowUnnormalized{});
    CHECK(duality_residual(corrupted, 10, v, c).norm >= 100.0 * baseline);
  }
  SUBCASE("edge frames are rejected") {
    CHECK_THROWS_AS(duality_residual(traj, 0, v, c), ShapeError);
    CHECK_THROWS_AS(duality_residual(traj, traj.size() - 1, v, c), ShapeError);
  }
}

TEST_CASE("fd_variation: analytic gradients match central differences") {
  const Grid g(64, -8.0, 8.0, Boundary::Periodic);
  const PhysicalConstants c{0.9, 1.3};
  const PotentialSpec v = PotentialSpec::harmonic(1.1);
  std::mt19937 rng(7);
  std::vector<ComplexField> frames;
  for (int k = 0; k < 12; ++k) frames.push_back(qtest::random_smooth_state(g, rng).values());
  // random frames: the identity is algebraic and must hold off-shell too
  const Trajectory traj(g, 0.01, frames, DerivativeScheme::Spectral);

  for (FunctionalTag tag : {FunctionalTag::Kc, FunctionalTag::Vc, FunctionalTag::Hc, FunctionalTag::Hw}) {
    for (Direction d : {Direction::Real, Direction::Imaginary}) {
      for (Site site : {Site{3, 20}, Site{5, 31}, Site{8, 40}}) {
        const FdVariation fd = fd_variation(tag, traj, v, c, site, 1e-4, d);
        CAPTURE(to_string(tag));
        CAPTURE(to_string(d));
        CHECK(fd.boundary_clean);
        CHECK(fd.within_tolerance());
      }
    }
  }
  SUBCASE("potential term is exact to roundoff") {
    const FdVariation fd = fd_variation(FunctionalTag::Vc, traj, v, c, {4, 30}, 1e-5, Direction::Real);
    CHECK(fd.mismatch() <= 1e-8 * std::max(1.0, std::abs(fd.predicted)));
  }
  SUBCASE("mismatch does not grow as eps shrinks") {
    const FdVariation coarse = fd_variation(FunctionalTag::Hc, traj, v, c, {6, 25}, 1e-3, Direction::Imaginary);
    const FdVariation fine = fd_variation(FunctionalTag::Hc, traj, v, c, {6, 25}, 1e-4, Direction::Imaginary);
    // quadratic functional: only roundoff remains, bounded by eps_machine |F| / h
    const double floor = 1e-14 * std::abs(fine.functional) / (1e-4 * max_abs(traj.frame(6)));
    CHECK(fine.mismatch() <= std::max(coarse.mismatch() / 50.0, 10.0 * floor));
  }
  SUBCASE("wave functional next to the time boundary is flagged") {
    const FdVariation edge = fd_variation(FunctionalTag::Hw, traj, v, c, {0, 20}, 1e-4, Direction::Real);
    CHECK_FALSE(edge.boundary_clean);
    const FdVariation near = fd_variation(FunctionalTag::Hw, traj, v, c, {traj.size() - 2, 20}, 1e-4, Direction::Real);
    CHECK_FALSE(near.boundary_clean);
  }
  SUBCASE("plane wave kinetic gradient") {
    const Grid pg(32, 0.0, 2.0 * std::numbers::pi, Boundary::Periodic);
    const Wavefunction pw = InitialStateSpec(initial::PlaneWave{2.0}).build(pg, c);
    const Trajectory pt(pg, 0.1, {pw.values(), pw.values(), pw.values()}, DerivativeScheme::Spectral);
    const FdVariation fd = fd_variation(FunctionalTag::Hc, pt, PotentialSpec::free(), c, {1, 7}, 1e-4, Direction::Real);
    CHECK(fd.within_tolerance());
    CHECK(std::abs(fd.predicted) > 1e-6);
  }
}

TEST_CASE("fd_variation: error paths") {
  const PhysicalConstants c;
  const Grid g(64, -8.0, 8.0, Boundary::Periodic);
  const Wavefunction psi = InitialStateSpec(initial::HarmonicEigen{0}).build(g, c);
  const Trajectory traj(g, 0.01, {psi.values(), psi.values(), psi.values()}, DerivativeScheme::Spectral);
  const PotentialSpec v = PotentialSpec::harmonic(1.0);
  CHECK_THROWS_AS(fd_variation(FunctionalTag::Hc, traj, v, c, {1, 1}, 1e-9, Direction::Real), ToleranceUnreliableError);
  CHECK_THROWS_AS(fd_variation(FunctionalTag::Hc, traj, v, c, {1, 1}, 1e-2, Direction::Real), ToleranceUnreliableError);
  CHECK_THROWS_AS(fd_variation(FunctionalTag::Hc, traj, v, c, {3, 1}, 1e-4, Direction::Real), ShapeError);
  const Grid vg(65, -8.0, 8.0, Boundary::Vanishing);
  const Wavefunction vpsi = InitialStateSpec(initial::HarmonicEigen{0}).build(vg, c);
  const Trajectory vt(vg, 0.01, {vpsi.values(), vpsi.values(), vpsi.values()}, DerivativeScheme::CentralFD4);
  CHECK_THROWS_AS(fd_variation(FunctionalTag::Hc, vt, v, c, {1, 30}, 1e-4, Direction::Real), ConfigError);
}

TEST_CASE("mutations are caught by the gradient checks") {
  const Grid g(64, -8.0, 8.0, Boundary::Periodic);
  const PhysicalConstants c;
  const PotentialSpec v = PotentialSpec::harmonic(1.0);
  std::mt19937 rng(3);
  std::vector<ComplexField> frames;
  for (int k = 0; k < 10; ++k) frames.push_back(qtest::random_smooth_state(g, rng).values());
  const Trajectory traj(g, 0.01, frames, DerivativeScheme::Spectral);
  {
    const ScopedMutation m(Mutation::GradientScale);
    CHECK_FALSE(fd_variation(FunctionalTag::Kc, traj, v, c, {4, 30}, 1e-4, Direction::Real).within_tolerance());
  }
  {
    // a sign flip in the wave functional is self-consistent under finite differences;
    // the duality residual is what exposes it
    const ScopedMutation m(Mutation::HwSign);
    CHECK(fd_variation(FunctionalTag::Hw, traj, v, c, {4, 30}, 1e-4, Direction::Real).within_tolerance());
    const Wavefunction psi0 = InitialStateSpec(initial::Gaussian{0.0, 0.8, 0.0}).build(g, c);
    const Trajectory evolved = cn_trajectory(g, psi0, v, 1e-3, 4);
    const DualityResidual r = duality_residual(evolved, 2, v, c);
    CHECK(r.norm > 0.5 * r.scale);
  }
  CHECK(fd_variation(FunctionalTag::Kc, traj, v, c, {4, 30}, 1e-4, Direction::Real).within_tolerance());
}

TEST_CASE("Euler-Lagrange residual reproduces the duality residual") {
  const Grid g(256, -10.0, 10.0, Boundary::Periodic);
  const PhysicalConstants c{1.2, 0.7};
  const PotentialSpec v = PotentialSpec::harmonic(0.8);
  const Wavefunction psi0 = InitialStateSpec(initial::Gaussian{0.5, 0.9, -0.8}).build(g, c);
  const Trajectory traj = propagate(psi0, v, {PropagatorMethod::SplitStepSpectral, 2e-3, 10}, c);
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const ComplexField el = euler_lagrange_residual(traj, k, v, c);
    const DualityResidual d = duality_residual(traj, k, v, c);
    ComplexField diff(el.size());
    for (std::size_t i = 0; i < el.size(); ++i) diff[i] = el[i] - kEulerLagrangeFactor * d.residual[i];
    CHECK(l2(g, diff) <= 1e-10 * d.scale);
  }
  SUBCASE("frozen frames of an eigenstate leave only the energy term") {
    const Grid wide(256, -16.0, 16.0, Boundary::Periodic);
    const Wavefunction e0 = InitialStateSpec(initial::HarmonicEigen{0, 0.8}).build(wide, c);
    const Trajectory frozen(wide, 0.01, {e0.values(), e0.values(), e0.values()}, DerivativeScheme::Spectral);
    const ComplexField el = euler_lagrange_residual(frozen, 1, v, c);
    const double e = 0.5 * c.hbar * 0.8;
    double worst = 0.0;
    for (std::size_t i = 0; i < wide.size(); ++i) worst = std::max(worst, std::abs(el[i] + e * e0[i]));
    CHECK(worst < 1e-10);
  }
}
