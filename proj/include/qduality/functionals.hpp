#pragma once

#include <cstddef>
#include <string_view>
#include <utility>

#include "qduality/grid.hpp"
#include "qduality/potential.hpp"
#include "qduality/wavefunction.hpp"

namespace qduality {

/// Time-integrated energy functionals over the trajectory window.
struct ActionReport {
  double kinetic = 0.0;          // K_c
  double potential = 0.0;        // V_c
  double hamiltonian = 0.0;      // H_c = K_c + V_c
  double wave_energy = 0.0;      // H_w
  double corpuscular_action = 0.0;  // S_c = K_c - V_c
  double wave_action = 0.0;         // S_w = 2 K_c - H_w
  std::pair<double, double> time_window{0.0, 0.0};
};

ActionReport actions(const Trajectory& traj, const PotentialSpec& v, const PhysicalConstants& c);

/// H psi = -(hbar^2/2m) psi_xx + V psi, the gradient of H_c with respect to psi*.
ComplexField apply_hamiltonian(const Grid& grid, std::span<const cplx> psi, std::span<const double> v,
                               const PhysicalConstants& c, DerivativeScheme scheme);

ComplexField variation_hc(const Wavefunction& psi, const PotentialSpec& v, const PhysicalConstants& c,
                          DerivativeScheme scheme);
ComplexField variation_hc(const Wavefunction& psi, const PotentialSpec& v, const PhysicalConstants& c);

/// Gradient of K_c alone: -(hbar^2/2m) psi_xx.
ComplexField variation_kc(const Wavefunction& psi, const PhysicalConstants& c, DerivativeScheme scheme);

/// i hbar psi_t at a frame, the gradient of H_w with respect to psi* away from
/// the time boundaries.
ComplexField variation_hw(const Trajectory& traj, std::size_t frame_index, const PhysicalConstants& c);

struct DualityResidual {
  ComplexField residual;  // i hbar psi_t - H psi
  double norm = 0.0;      // sqrt(integrate |residual|^2)
  double scale = 0.0;     // ||i hbar psi_t|| + ||H psi||
};

DualityResidual duality_residual(const Trajectory& traj, std::size_t frame_index, const PotentialSpec& v,
                                 const PhysicalConstants& c);

enum class FunctionalTag { Kc, Vc, Hc, Hw };
enum class Direction { Real, Imaginary };

std::string_view to_string(FunctionalTag t);
std::string_view to_string(Direction d);

/// Value of a time-integrated functional on arbitrary (possibly unnormalized) frames.
double functional_value(FunctionalTag tag, const Trajectory& traj, const PotentialSpec& v, const PhysicalConstants& c);

struct Site {
  std::size_t frame = 0;
  std::size_t point = 0;
};

struct FdVariation {
  double finite_difference = 0.0;  // (F[psi + eps d] - F[psi - eps d]) / (2 eps)
  double predicted = 0.0;          // 2 tau_f Re integrate(conj(d) * gradient)
  double epsilon = 0.0;
  double functional = 0.0;         // F[psi], for roundoff estimates
  bool boundary_clean = true;      // false for H_w sites next to the time boundaries

  double mismatch() const;
  /// max(1e-6 relative, 1e-9 absolute)
  bool within_tolerance(double rel = 1e-6, double abs = 1e-9) const;
};

/// Mollified single-site bump (1/4, 1/2, 1/4) centred on point, times i for Imaginary.
ComplexField variation_bump(const Grid& grid, std::size_t point, Direction direction);

/// Central-difference directional derivative of a functional, compared with the
/// analytic gradient. eps is relative to max|psi| at the perturbed frame and must
/// lie in [1e-7, 1e-3]. Periodic grids only.
FdVariation fd_variation(FunctionalTag tag, const Trajectory& traj, const PotentialSpec& v,
                         const PhysicalConstants& c, Site site, double eps, Direction direction);

/// Constant relating the Euler-Lagrange residual to the duality residual.
inline constexpr double kEulerLagrangeFactor = 1.0;

/// dL/dpsi* - d/dx(dL/dpsi_x*) - d/dt(dL/dpsi_t*) for the field Lagrangian
/// L = (i hbar/2)(psi* psi_t - psi psi_t*) - (hbar^2/2m)|psi_x|^2 - V|psi|^2,
/// assembled term by term.
ComplexField euler_lagrange_residual(const Trajectory& traj, std::size_t frame_index, const PotentialSpec& v,
                                     const PhysicalConstants& c);

}  // namespace qduality
