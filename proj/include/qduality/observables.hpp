#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "qduality/grid.hpp"
#include "qduality/potential.hpp"
#include "qduality/wavefunction.hpp"

namespace qduality {

enum class DensityKind { KineticFormA, KineticFormB, KineticFormC, Potential, TotalCorpuscular, TotalWave };

std::string_view to_string(DensityKind k);

/// Real energy density on the grid. For complex-valued expressions the
/// discarded imaginary part is kept for diagnostics.
struct DensityField {
  Grid grid;
  RealField values;
  DensityKind kind;
  double imag_max = 0.0;       // max |Im| discarded pointwise
  double imag_integral = 0.0;  // |integrate(Im)|

  double integral() const { return integrate(grid, values); }
};

enum class KineticForm { A, B, C };

/// Kinetic energy density in one of three equivalent forms:
///   A: -(hbar^2/2m) psi* psi_xx
///   B: (hbar^2/2m) [ |psi_x|^2 - d/dx(psi* psi_x) ]
///   C: (hbar^2/2m) [ R^2 phi_x^2 + R_x^2 - d/dx(R R_x) ]
/// They differ pointwise by total derivatives only.
DensityField kinetic_density(const Wavefunction& psi, KineticForm form, const PhysicalConstants& c,
                             DerivativeScheme scheme);
DensityField kinetic_density(const Wavefunction& psi, KineticForm form, const PhysicalConstants& c);

DensityField potential_density(const Wavefunction& psi, const PotentialSpec& v, const PhysicalConstants& c);

/// Form A kinetic plus potential density; its integral is <psi|H|psi>.
DensityField hc_density(const Wavefunction& psi, const PotentialSpec& v, const PhysicalConstants& c,
                        DerivativeScheme scheme);
DensityField hc_density(const Wavefunction& psi, const PotentialSpec& v, const PhysicalConstants& c);

/// Local energy and momentum fields E = -hbar phi_t, p = hbar phi_x.
struct LocalFields {
  RealField energy;
  RealField momentum;
  std::vector<bool> node_mask;
};

LocalFields local_fields(const Trajectory& traj, std::size_t frame_index, const PhysicalConstants& c,
                         double node_threshold = kDefaultNodeThreshold);

/// Wave-side energy density (i hbar / 2)(psi* psi_t - psi psi_t*) = -hbar Im(psi* psi_t).
DensityField hw_density(const Trajectory& traj, std::size_t frame_index, const PhysicalConstants& c);

struct KineticDecomposition {
  double flow = 0.0;      // (hbar^2/2m) int R^2 phi_x^2
  double quantum = 0.0;   // (hbar^2/2m) int R_x^2
  double boundary = 0.0;  // -(hbar^2/2m) int d/dx(R R_x)

  double total() const { return flow + quantum + boundary; }
};

KineticDecomposition kinetic_decomposition(const Wavefunction& psi, const PhysicalConstants& c,
                                           DerivativeScheme scheme);
KineticDecomposition kinetic_decomposition(const Wavefunction& psi, const PhysicalConstants& c);

/// Re <psi| -i hbar d/dx |psi>
double mean_momentum(const Wavefunction& psi, const PhysicalConstants& c, DerivativeScheme scheme);
/// integrate(hbar phi_x R^2), masked at nodes.
double flow_momentum(const Wavefunction& psi, const PhysicalConstants& c, DerivativeScheme scheme);

}  // namespace qduality
