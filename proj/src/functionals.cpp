#include "qduality/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "qduality/errors.hpp"
#include "qduality/mutation.hpp"
#include "qduality/observables.hpp"

namespace qduality {

std::string_view to_string(FunctionalTag t) {
  switch (t) {
    case FunctionalTag::Kc: return "Kc";
    case FunctionalTag::Vc: return "Vc";
    case FunctionalTag::Hc: return "Hc";
    case FunctionalTag::Hw: return "Hw";
  }
  return "?";
}

std::string_view to_string(Direction d) { return d == Direction::Real ? "real" : "imaginary"; }

namespace {

double l2_norm(const Grid& grid, std::span<const cplx> f) {
  RealField a(f.size());
  std::transform(f.begin(), f.end(), a.begin(), [](cplx z) { return std::norm(z); });
  return std::sqrt(std::max(0.0, integrate(grid, a)));
}

double kinetic_at(const Trajectory& traj, std::size_t k, const PhysicalConstants& c) {
  return kinetic_density(traj.wavefunction(k), KineticForm::A, c, traj.scheme()).integral();
}

double potential_at(const Trajectory& traj, std::size_t k, const RealField& v) {
  const ComplexField& psi = traj.frame(k);
  RealField d(psi.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = v[i] * std::norm(psi[i]);
  return integrate(traj.grid(), d);
}

}  // namespace

ActionReport actions(const Trajectory& traj, const PotentialSpec& v, const PhysicalConstants& c) {
  const RealField vx = v.sample(traj.grid(), c);
  const RealField tau = traj.time_weights();
  ActionReport r;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    r.kinetic += tau[k] * kinetic_at(traj, k, c);
    r.potential += tau[k] * potential_at(traj, k, vx);
    r.wave_energy += tau[k] * hw_density(traj, k, c).integral();
  }
  r.hamiltonian = r.kinetic + r.potential;
  r.corpuscular_action = r.kinetic - r.potential;
  r.wave_action = 2.0 * r.kinetic - r.wave_energy;
  r.time_window = {traj.time(0), traj.time(traj.size() - 1)};
  return r;
}

ComplexField apply_hamiltonian(const Grid& grid, std::span<const cplx> psi, std::span<const double> v,
                               const PhysicalConstants& c, DerivativeScheme scheme) {
  require_length(grid, v.size(), "apply_hamiltonian potential");
  ComplexField h = diff2(grid, psi, scheme);
  const double k = -c.kinetic_prefactor();
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = k * h[i] + v[i] * psi[i];
  return h;
}

ComplexField variation_hc(const Wavefunction& psi, const PotentialSpec& v, const PhysicalConstants& c,
                          DerivativeScheme scheme) {
  const RealField vx = v.sample(psi.grid(), c);
  return apply_hamiltonian(psi.grid(), psi.span(), vx, c, scheme);
}

ComplexField variation_hc(const Wavefunction& psi, const PotentialSpec& v, const PhysicalConstants& c) {
  return variation_hc(psi, v, c, default_scheme(psi.grid()));
}

ComplexField variation_kc(const Wavefunction& psi, const PhysicalConstants& c, DerivativeScheme scheme) {
  ComplexField g = diff2(psi.grid(), psi.span(), scheme);
  double k = -c.kinetic_prefactor();
  if (active_mutation() == Mutation::GradientScale) k *= 1.001;
  for (cplx& z : g) z *= k;
  return g;
}

ComplexField variation_hw(const Trajectory& traj, std::size_t k, const PhysicalConstants& c) {
  ComplexField g = time_derivative(traj, k);
  const cplx factor{0.0, active_mutation() == Mutation::HwSign ? -c.hbar : c.hbar};
  for (cplx& z : g) z *= factor;
  return g;
}

DualityResidual duality_residual(const Trajectory& traj, std::size_t k, const PotentialSpec& v,
                                 const PhysicalConstants& c) {
  if (!traj.is_interior(k)) throw ShapeError("duality_residual: frame must be interior");
  const ComplexField wave = variation_hw(traj, k, c);
  const ComplexField corp = variation_hc(traj.wavefunction(k), v, c, traj.scheme());
  DualityResidual out;
  out.residual.resize(wave.size());
  for (std::size_t i = 0; i < wave.size(); ++i) out.residual[i] = wave[i] - corp[i];
  out.norm = l2_norm(traj.grid(), out.residual);
  out.scale = l2_norm(traj.grid(), wave) + l2_norm(traj.grid(), corp);
  return out;
}

double functional_value(FunctionalTag tag, const Trajectory& traj, const PotentialSpec& v,
                        const PhysicalConstants& c) {
  const RealField tau = traj.time_weights();
  const RealField vx = v.sample(traj.grid(), c);
  double total = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    double value = 0.0;
    switch (tag) {
      case FunctionalTag::Kc: value = kinetic_at(traj, k, c); break;
      case FunctionalTag::Vc: value = potential_at(traj, k, vx); break;
      case FunctionalTag::Hc: value = kinetic_at(traj, k, c) + potential_at(traj, k, vx); break;
      case FunctionalTag::Hw: value = hw_density(traj, k, c).integral(); break;
    }
    total += tau[k] * value;
  }
  return total;
}

double FdVariation::mismatch() const { return std::abs(finite_difference - predicted); }

bool FdVariation::within_tolerance(double rel, double abs) const {
  return mismatch() <= std::max(rel * std::abs(predicted), abs);
}

ComplexField variation_bump(const Grid& grid, std::size_t point, Direction direction) {
  const std::size_t n = grid.size();
  if (point >= n) throw ShapeError("variation_bump: point out of range");
  const cplx unit = direction == Direction::Real ? cplx{1.0, 0.0} : cplx{0.0, 1.0};
  ComplexField d(n);
  d[point] = 0.5 * unit;
  if (grid.boundary() == Boundary::Periodic) {
    d[(point + n - 1) % n] += 0.25 * unit;
    d[(point + 1) % n] += 0.25 * unit;
  } else {
    if (point > 0) d[point - 1] = 0.25 * unit;
    if (point + 1 < n) d[point + 1] = 0.25 * unit;
  }
  return d;
}

FdVariation fd_variation(FunctionalTag tag, const Trajectory& traj, const PotentialSpec& v,
                         const PhysicalConstants& c, Site site, double eps, Direction direction) {
  const Grid& grid = traj.grid();
  if (grid.boundary() != Boundary::Periodic)
    throw ConfigError("fd_variation: the pointwise gradient is the exact discrete gradient only on periodic grids");
  if (site.frame >= traj.size() || site.point >= grid.size()) throw ShapeError("fd_variation: site out of range");
  if (!(eps >= 1e-7 && eps <= 1e-3))
    throw ToleranceUnreliableError("fd_variation: eps must lie in [1e-7, 1e-3] (relative to field scale)");

  const ComplexField& psi = traj.frame(site.frame);
  double scale = 0.0;
  for (const cplx& z : psi) scale = std::max(scale, std::abs(z));
  if (scale == 0.0) scale = 1.0;
  const double h = eps * scale;
  const ComplexField bump = variation_bump(grid, site.point, direction);

  ComplexField plus(psi), minus(psi);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    plus[i] += h * bump[i];
    minus[i] -= h * bump[i];
  }
  const double f_plus = functional_value(tag, traj.with_frame(site.frame, std::move(plus)), v, c);
  const double f_minus = functional_value(tag, traj.with_frame(site.frame, std::move(minus)), v, c);

  const Wavefunction wf = traj.wavefunction(site.frame);
  ComplexField gradient;
  switch (tag) {
    case FunctionalTag::Kc: gradient = variation_kc(wf, c, traj.scheme()); break;
    case FunctionalTag::Vc: {
      const RealField vx = v.sample(grid, c);
      gradient.resize(psi.size());
      for (std::size_t i = 0; i < psi.size(); ++i) gradient[i] = vx[i] * psi[i];
      break;
    }
    case FunctionalTag::Hc: gradient = variation_hc(wf, v, c, traj.scheme()); break;
    case FunctionalTag::Hw: gradient = variation_hw(traj, site.frame, c); break;
  }
  ComplexField pairing(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) pairing[i] = std::conj(bump[i]) * gradient[i];

  FdVariation out;
  out.finite_difference = (f_plus - f_minus) / (2.0 * h);
  out.predicted = 2.0 * traj.time_weights()[site.frame] * integrate(grid, pairing).real();
  out.epsilon = eps;
  out.functional = functional_value(tag, traj, v, c);
  out.boundary_clean = tag != FunctionalTag::Hw || traj.is_boundary_clean(site.frame);
  return out;
}

ComplexField euler_lagrange_residual(const Trajectory& traj, std::size_t k, const PotentialSpec& v,
                                     const PhysicalConstants& c) {
  if (!traj.is_interior(k)) throw ShapeError("euler_lagrange_residual: frame must be interior");
  const Grid& grid = traj.grid();
  const DerivativeScheme scheme = traj.scheme();
  const RealField vx = v.sample(grid, c);
  const ComplexField& psi = traj.frame(k);
  const std::size_t n = psi.size();
  const cplx ihbar_half{0.0, 0.5 * c.hbar};

  // dL/dpsi* = (i hbar/2) psi_t - V psi
  const ComplexField psi_t = time_derivative(traj, k);
  ComplexField dl_dpsi(n);
  for (std::size_t i = 0; i < n; ++i) dl_dpsi[i] = ihbar_half * psi_t[i] - vx[i] * psi[i];

  // dL/dpsi_x* = -(hbar^2/2m) psi_x
  ComplexField dl_dpsix = diff1(grid, psi, scheme);
  for (cplx& z : dl_dpsix) z *= -c.kinetic_prefactor();
  const ComplexField spatial_flux = diff1(grid, dl_dpsix, scheme);

  // dL/dpsi_t* = -(i hbar/2) psi, differentiated across frames
  std::vector<ComplexField> momenta(traj.size());
  for (std::size_t f = 0; f < traj.size(); ++f) {
    momenta[f].resize(n);
    for (std::size_t i = 0; i < n; ++i) momenta[f][i] = -ihbar_half * traj.frame(f)[i];
  }
  const Trajectory momentum_traj(grid, traj.dt(), std::move(momenta), scheme, traj.t0(),
                                 Trajectory::AllowUnnormalized{});
  const ComplexField temporal_flux = time_derivative(momentum_traj, k);

  ComplexField r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = dl_dpsi[i] - spatial_flux[i] - temporal_flux[i];
  return r;
}

}  // namespace qduality
