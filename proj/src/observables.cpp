#include "qduality/observables.hpp"

#include <algorithm>
#include <cmath>

#include "qduality/errors.hpp"
#include "qduality/mutation.hpp"

namespace qduality {

std::string_view to_string(DensityKind k) {
  switch (k) {
    case DensityKind::KineticFormA: return "kinetic_a";
    case DensityKind::KineticFormB: return "kinetic_b";
    case DensityKind::KineticFormC: return "kinetic_c";
    case DensityKind::Potential: return "potential";
    case DensityKind::TotalCorpuscular: return "hc";
    case DensityKind::TotalWave: return "hw";
  }
  return "?";
}

namespace {

DensityField from_complex(const Grid& grid, const ComplexField& z, DensityKind kind) {
  DensityField d{grid, RealField(z.size()), kind};
  RealField imag(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    d.values[i] = z[i].real();
    imag[i] = z[i].imag();
    d.imag_max = std::max(d.imag_max, std::abs(z[i].imag()));
  }
  d.imag_integral = std::abs(integrate(grid, imag));
  return d;
}

DensityField kinetic_form_a(const Wavefunction& psi, const PhysicalConstants& c, DerivativeScheme scheme) {
  const ComplexField d2 = diff2(psi.grid(), psi.span(), scheme);
  const double k = -c.kinetic_prefactor();
  ComplexField z(psi.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = k * std::conj(psi[i]) * d2[i];
  return from_complex(psi.grid(), z, DensityKind::KineticFormA);
}

DensityField kinetic_form_b(const Wavefunction& psi, const PhysicalConstants& c, DerivativeScheme scheme) {
  const Grid& grid = psi.grid();
  const ComplexField d1 = diff1(grid, psi.span(), scheme);
  ComplexField flux(psi.size());
  for (std::size_t i = 0; i < flux.size(); ++i) flux[i] = std::conj(psi[i]) * d1[i];
  const ComplexField dflux = diff1(grid, flux, scheme);
  const double k = c.kinetic_prefactor();
  ComplexField z(psi.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = k * (std::norm(d1[i]) - dflux[i]);
  return from_complex(grid, z, DensityKind::KineticFormB);
}

DensityField kinetic_form_c(const Wavefunction& psi, const PhysicalConstants& c, DerivativeScheme scheme) {
  const Grid& grid = psi.grid();
  const PolarForm polar = polar_decompose(psi, scheme);
  // R R_x = (R^2)_x / 2
  RealField r_rx(psi.size());
  for (std::size_t i = 0; i < r_rx.size(); ++i) r_rx[i] = 0.5 * polar.density_grad_x[i];
  const RealField total_derivative = diff1(grid, r_rx, scheme);
  const double k = c.kinetic_prefactor();
  const double amplitude_weight = active_mutation() == Mutation::KineticFormC ? 0.0 : 1.0;
  DensityField d{grid, RealField(psi.size()), DensityKind::KineticFormC};
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const double phase_term = polar.amplitude_sq[i] * polar.phase_grad_x[i] * polar.phase_grad_x[i];
    d.values[i] = k * (phase_term + amplitude_weight * polar.amplitude_grad_sq[i] - total_derivative[i]);
  }
  return d;
}

}  // namespace

DensityField kinetic_density(const Wavefunction& psi, KineticForm form, const PhysicalConstants& c,
                             DerivativeScheme scheme) {
  check_boundary_decay(psi.grid(), psi.span(), "kinetic_density");
  switch (form) {
    case KineticForm::A: return kinetic_form_a(psi, c, scheme);
    case KineticForm::B: return kinetic_form_b(psi, c, scheme);
    case KineticForm::C: return kinetic_form_c(psi, c, scheme);
  }
  throw ConfigError("kinetic_density: unknown form");
}

DensityField kinetic_density(const Wavefunction& psi, KineticForm form, const PhysicalConstants& c) {
  return kinetic_density(psi, form, c, default_scheme(psi.grid()));
}

DensityField potential_density(const Wavefunction& psi, const PotentialSpec& v, const PhysicalConstants& c) {
  const RealField vx = v.sample(psi.grid(), c);
  DensityField d{psi.grid(), RealField(psi.size()), DensityKind::Potential};
  for (std::size_t i = 0; i < vx.size(); ++i) d.values[i] = vx[i] * std::norm(psi[i]);
  return d;
}

DensityField hc_density(const Wavefunction& psi, const PotentialSpec& v, const PhysicalConstants& c,
                        DerivativeScheme scheme) {
  DensityField d = kinetic_density(psi, KineticForm::A, c, scheme);
  const DensityField pot = potential_density(psi, v, c);
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] += pot.values[i];
  d.kind = DensityKind::TotalCorpuscular;
  return d;
}

DensityField hc_density(const Wavefunction& psi, const PotentialSpec& v, const PhysicalConstants& c) {
  return hc_density(psi, v, c, default_scheme(psi.grid()));
}

LocalFields local_fields(const Trajectory& traj, std::size_t k, const PhysicalConstants& c, double node_threshold) {
  const Wavefunction psi = traj.wavefunction(k);
  const PolarForm polar = polar_decompose(psi, traj.scheme(), node_threshold);
  const ComplexField dt = time_derivative(traj, k);
  LocalFields out;
  out.energy.assign(psi.size(), 0.0);
  out.momentum.resize(psi.size());
  out.node_mask = polar.node_mask;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    out.momentum[i] = c.hbar * polar.phase_grad_x[i];
    if (!polar.node_mask[i]) out.energy[i] = -c.hbar * (std::conj(psi[i]) * dt[i]).imag() / polar.amplitude_sq[i];
  }
  return out;
}

DensityField hw_density(const Trajectory& traj, std::size_t k, const PhysicalConstants& c) {
  const ComplexField& psi = traj.frame(k);
  const ComplexField dt = time_derivative(traj, k);
  const double sign = active_mutation() == Mutation::HwSign ? -1.0 : 1.0;
  DensityField d{traj.grid(), RealField(psi.size()), DensityKind::TotalWave};
  const cplx ihbar_half{0.0, 0.5 * c.hbar};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const cplx z = ihbar_half * (std::conj(psi[i]) * dt[i] - psi[i] * std::conj(dt[i]));
    d.values[i] = sign * z.real();
  }
  return d;
}

KineticDecomposition kinetic_decomposition(const Wavefunction& psi, const PhysicalConstants& c,
                                           DerivativeScheme scheme) {
  const Grid& grid = psi.grid();
  const PolarForm polar = polar_decompose(psi, scheme);
  const std::size_t n = psi.size();
  RealField flow(n), quantum(n), r_rx(n);
  for (std::size_t i = 0; i < n; ++i) {
    flow[i] = polar.amplitude_sq[i] * polar.phase_grad_x[i] * polar.phase_grad_x[i];
    quantum[i] = polar.amplitude_grad_sq[i];
    r_rx[i] = 0.5 * polar.density_grad_x[i];
  }
  const RealField div = diff1(grid, r_rx, scheme);
  const double k = c.kinetic_prefactor();
  KineticDecomposition out;
  out.flow = k * integrate(grid, flow);
  out.quantum = k * integrate(grid, quantum);
  out.boundary = -k * integrate(grid, div);
  return out;
}

KineticDecomposition kinetic_decomposition(const Wavefunction& psi, const PhysicalConstants& c) {
  return kinetic_decomposition(psi, c, default_scheme(psi.grid()));
}

double mean_momentum(const Wavefunction& psi, const PhysicalConstants& c, DerivativeScheme scheme) {
  const ComplexField d1 = diff1(psi.grid(), psi.span(), scheme);
  ComplexField z(psi.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::conj(psi[i]) * cplx{0.0, -c.hbar} * d1[i];
  return integrate(psi.grid(), z).real();
}

double flow_momentum(const Wavefunction& psi, const PhysicalConstants& c, DerivativeScheme scheme) {
  const PolarForm polar = polar_decompose(psi, scheme);
  RealField j(psi.size());
  for (std::size_t i = 0; i < j.size(); ++i) j[i] = c.hbar * polar.phase_grad_x[i] * polar.amplitude_sq[i];
  return integrate(psi.grid(), j);
}

}  // namespace qduality
