#pragma once

#include <cstddef>
#include <memory>
#include <string_view>
#include <variant>
#include <vector>

#include "qduality/grid.hpp"
#include "qduality/potential.hpp"
#include "qduality/wavefunction.hpp"

namespace qduality {

class InitialStateSpec;

namespace initial {
/// e^{ikx}/sqrt(L); periodic grids only, k commensurate with the box.
struct PlaneWave {
  double k = 0.0;
};
/// (2 pi sigma^2)^{-1/4} exp(-(x-x0)^2/(4 sigma^2) + i k0 x)
struct Gaussian {
  double x0 = 0.0;
  double sigma = 1.0;
  double k0 = 0.0;
};
/// n-th eigenfunction of m w^2 (x - center)^2 / 2.
struct HarmonicEigen {
  int n = 0;
  double omega = 1.0;
  double center = 0.0;
};
struct Term {
  cplx coefficient;
  std::shared_ptr<const InitialStateSpec> state;
};
struct Superposition {
  std::vector<Term> terms;
};
}  // namespace initial

class InitialStateSpec {
 public:
  using Kind = std::variant<initial::PlaneWave, initial::Gaussian, initial::HarmonicEigen, initial::Superposition>;

  InitialStateSpec(Kind kind) : kind_(std::move(kind)) {}  // NOLINT(google-explicit-constructor)

  static InitialStateSpec superposition(std::vector<std::pair<cplx, InitialStateSpec>> terms);

  const Kind& kind() const { return kind_; }

  /// Samples and normalizes the state. Throws ConfigError when the state is
  /// not representable on the grid (unresolved or not decayed at the boundary).
  Wavefunction build(const Grid& grid, const PhysicalConstants& c) const;

 private:
  Kind kind_;
};

/// Normalized harmonic-oscillator eigenfunction values (real).
RealField harmonic_eigenfunction(const Grid& grid, int n, double omega, double center, const PhysicalConstants& c);

enum class PropagatorMethod { CrankNicolson, SplitStepSpectral };

std::string_view to_string(PropagatorMethod m);

struct PropagatorConfig {
  PropagatorMethod method = PropagatorMethod::CrankNicolson;
  double dt = 1e-3;
  std::size_t steps = 100;

  /// dt max|V| / hbar <= 0.5, steps >= 2, split-step only on periodic grids.
  void validate(const Grid& grid, const PotentialSpec& v, const PhysicalConstants& c) const;
};

/// Integrates i hbar psi_t = H psi from psi0, returning steps + 1 frames.
/// Crank-Nicolson uses the same discrete H (scheme) as the residual checks.
Trajectory propagate(const Wavefunction& psi0, const PotentialSpec& v, const PropagatorConfig& cfg,
                     const PhysicalConstants& c, DerivativeScheme scheme);
Trajectory propagate(const Wavefunction& psi0, const PotentialSpec& v, const PropagatorConfig& cfg,
                     const PhysicalConstants& c);

namespace reference {
struct FreeGaussian {
  double x0 = 0.0;
  double sigma = 1.0;
  double k0 = 0.0;
};
struct HarmonicEigen {
  int n = 0;
  double omega = 1.0;
};
/// Displaced ground state of m w^2 x^2 / 2 with initial centre x0 and momentum p0.
struct HarmonicCoherent {
  double x0 = 1.0;
  double omega = 1.0;
  double p0 = 0.0;
};
using Kind = std::variant<FreeGaussian, HarmonicEigen, HarmonicCoherent>;
}  // namespace reference

struct TimeSamples {
  double t0 = 0.0;
  double dt = 1e-3;
  std::size_t count = 3;
};

/// Closed-form solution sampled on the grid at a single time.
ComplexField analytic_state(const reference::Kind& kind, const Grid& grid, const PhysicalConstants& c, double t);
/// Closed-form d psi/dt (free Gaussian only; others throw ConfigError).
ComplexField analytic_time_derivative(const reference::Kind& kind, const Grid& grid, const PhysicalConstants& c,
                                      double t);
/// Frames sampled from the closed form. Throws ConfigError when a frame has
/// not decayed at the grid edges.
Trajectory analytic_reference(const reference::Kind& kind, const Grid& grid, const PhysicalConstants& c,
                              const TimeSamples& times, DerivativeScheme scheme);
Trajectory analytic_reference(const reference::Kind& kind, const Grid& grid, const PhysicalConstants& c,
                              const TimeSamples& times);

/// Position standard deviation of a freely spreading Gaussian.
double free_gaussian_width(double sigma, double t, const PhysicalConstants& c);
/// Classical centre x0 cos(wt) + p0/(m w) sin(wt) of a coherent state.
double coherent_center(const reference::HarmonicCoherent& s, double t, const PhysicalConstants& c);

}  // namespace qduality
