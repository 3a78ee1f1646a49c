#include "qduality/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qduality/errors.hpp"
#include "qduality/mutation.hpp"

namespace qduality {

Wavefunction::Wavefunction(Grid grid, ComplexField values) : grid_(std::move(grid)), values_(std::move(values)) {
  require_length(grid_, values_.size(), "wavefunction");
}

double Wavefunction::norm_sq() const {
  RealField density(values_.size());
  std::transform(values_.begin(), values_.end(), density.begin(), [](cplx z) { return std::norm(z); });
  return integrate(grid_, density);
}

Wavefunction normalize(const Wavefunction& psi) {
  const double n2 = psi.norm_sq();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw DegenerateInputError("normalize: field has zero or non-finite norm");
  const double scale = 1.0 / std::sqrt(n2);
  ComplexField out(psi.values());
  for (cplx& z : out) z *= scale;
  return Wavefunction(psi.grid(), std::move(out));
}

std::size_t PolarForm::node_count() const { return static_cast<std::size_t>(std::count(node_mask.begin(), node_mask.end(), true)); }

PolarForm polar_decompose(const Wavefunction& psi, DerivativeScheme scheme, double node_threshold) {
  if (!(node_threshold > 0.0 && node_threshold < 1.0))
    throw ConfigError("polar_decompose: node_threshold must lie in (0, 1)");
  const Grid& grid = psi.grid();
  check_boundary_decay(grid, psi.span(), "polar_decompose");
  const ComplexField dpsi = diff1(grid, psi.span(), scheme);
  const std::size_t n = psi.size();

  PolarForm polar;
  polar.node_threshold = node_threshold;
  polar.amplitude_sq.resize(n);
  polar.phase_grad_x.assign(n, 0.0);
  polar.density_grad_x.resize(n);
  polar.amplitude_grad_sq.resize(n);
  polar.node_mask.assign(n, false);

  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    polar.amplitude_sq[i] = std::norm(psi[i]);
    peak = std::max(peak, polar.amplitude_sq[i]);
  }
  const double cutoff = node_threshold * peak;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx bilinear = std::conj(psi[i]) * dpsi[i];
    const double r2 = polar.amplitude_sq[i];
    polar.density_grad_x[i] = 2.0 * bilinear.real();
    if (r2 < cutoff || r2 == 0.0) {
      polar.node_mask[i] = true;
      polar.amplitude_grad_sq[i] = std::norm(dpsi[i]);
    } else {
      polar.phase_grad_x[i] = bilinear.imag() / r2;
      polar.amplitude_grad_sq[i] = bilinear.real() * bilinear.real() / r2;
    }
  }
  return polar;
}

PolarForm polar_decompose(const Wavefunction& psi, double node_threshold) {
  return polar_decompose(psi, default_scheme(psi.grid()), node_threshold);
}

Trajectory::Trajectory(Grid grid, double dt, std::vector<ComplexField> frames, DerivativeScheme scheme, double t0)
    : Trajectory(std::move(grid), dt, std::move(frames), scheme, t0, AllowUnnormalized{}) {
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const double n2 = wavefunction(i).norm_sq();
    if (std::abs(n2 - 1.0) > kNormTolerance) {
      std::ostringstream os;
      os << "trajectory: frame " << i << " has norm^2 " << n2 << " (tolerance " << kNormTolerance << ")";
      throw DegenerateInputError(os.str());
    }
  }
}

Trajectory::Trajectory(Grid grid, double dt, std::vector<ComplexField> frames, DerivativeScheme scheme, double t0,
                       AllowUnnormalized)
    : grid_(std::move(grid)), dt_(dt), t0_(t0), frames_(std::move(frames)), scheme_(scheme) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ConfigError("trajectory: dt must be positive");
  require_compatible(grid_, scheme_);
  validate_shape();
}

void Trajectory::validate_shape() const {
  if (frames_.size() < 3) throw ShapeError("trajectory: at least 3 frames are required");
  for (const auto& f : frames_) require_length(grid_, f.size(), "trajectory frame");
}

Trajectory Trajectory::with_frame(std::size_t index, ComplexField values) const {
  std::vector<ComplexField> frames = frames_;
  frames.at(index) = std::move(values);
  return Trajectory(grid_, dt_, std::move(frames), scheme_, t0_, AllowUnnormalized{});
}

RealField Trajectory::time_weights() const {
  RealField w(frames_.size(), dt_);
  w.front() = w.back() = 0.5 * dt_;
  return w;
}

ComplexField time_derivative(const Trajectory& traj, std::size_t k) {
  const std::size_t nf = traj.size();
  if (k >= nf) throw ShapeError("time_derivative: frame index out of range");
  const std::size_t n = traj.grid().size();
  const double inv2 = 1.0 / (2.0 * traj.dt());
  const auto& f = traj.frames();
  ComplexField d(n);
  if (k == 0) {
    for (std::size_t i = 0; i < n; ++i) d[i] = inv2 * (-3.0 * f[0][i] + 4.0 * f[1][i] - f[2][i]);
  } else if (k == nf - 1) {
    for (std::size_t i = 0; i < n; ++i) d[i] = inv2 * (3.0 * f[k][i] - 4.0 * f[k - 1][i] + f[k - 2][i]);
  } else if (active_mutation() == Mutation::ForwardTimeDiff) {
    for (std::size_t i = 0; i < n; ++i) d[i] = (f[k + 1][i] - f[k][i]) / traj.dt();
  } else {
    for (std::size_t i = 0; i < n; ++i) d[i] = inv2 * (f[k + 1][i] - f[k - 1][i]);
  }
  return d;
}

}  // namespace qduality
