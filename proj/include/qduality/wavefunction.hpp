#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qduality/grid.hpp"

namespace qduality {

/// Complex wavefunction sampled on a Grid.
class Wavefunction {
 public:
  Wavefunction(Grid grid, ComplexField values);

  const Grid& grid() const { return grid_; }
  const ComplexField& values() const { return values_; }
  std::span<const cplx> span() const { return values_; }
  std::size_t size() const { return values_.size(); }
  cplx operator[](std::size_t i) const { return values_[i]; }

  /// integrate(|psi|^2)
  double norm_sq() const;

 private:
  Grid grid_;
  ComplexField values_;
};

/// Rescales psi to unit norm. Throws DegenerateInputError for a zero field.
Wavefunction normalize(const Wavefunction& psi);

inline constexpr double kDefaultNodeThreshold = 1e-12;

/// Polar quantities of psi = R e^{i phi}, expressed without ever forming phi.
struct PolarForm {
  RealField amplitude_sq;       // R^2
  RealField phase_grad_x;       // phi_x = Im(psi* psi_x) / R^2, 0 under the node mask
  RealField density_grad_x;     // d(R^2)/dx = 2 Re(psi* psi_x)
  RealField amplitude_grad_sq;  // R_x^2 off nodes; |psi_x|^2 (its limit) under the mask
  std::vector<bool> node_mask;  // R^2 < threshold * max R^2
  double node_threshold = kDefaultNodeThreshold;

  std::size_t node_count() const;
};

/// node_threshold is a fraction of max R^2 and must lie in (0, 1).
PolarForm polar_decompose(const Wavefunction& psi, DerivativeScheme scheme,
                          double node_threshold = kDefaultNodeThreshold);
PolarForm polar_decompose(const Wavefunction& psi, double node_threshold = kDefaultNodeThreshold);

/// Time-ordered frames with a uniform step. All frames share one grid.
class Trajectory {
 public:
  struct AllowUnnormalized {};
  static constexpr double kNormTolerance = 1e-6;

  Trajectory(Grid grid, double dt, std::vector<ComplexField> frames, DerivativeScheme scheme, double t0 = 0.0);
  /// Skips the per-frame normalization check (negative tests, perturbed copies).
  Trajectory(Grid grid, double dt, std::vector<ComplexField> frames, DerivativeScheme scheme, double t0,
             AllowUnnormalized);

  const Grid& grid() const { return grid_; }
  double dt() const { return dt_; }
  double t0() const { return t0_; }
  double time(std::size_t frame) const { return t0_ + dt_ * static_cast<double>(frame); }
  std::size_t size() const { return frames_.size(); }
  DerivativeScheme scheme() const { return scheme_; }
  const std::vector<ComplexField>& frames() const { return frames_; }
  const ComplexField& frame(std::size_t i) const { return frames_.at(i); }
  Wavefunction wavefunction(std::size_t i) const { return Wavefunction(grid_, frames_.at(i)); }

  /// Order of the time differencing used for psi_t.
  static constexpr int time_order() { return 2; }
  int spatial_order() const { return Grid::scheme_order(scheme_); }

  bool is_interior(std::size_t frame) const { return frame >= 1 && frame + 1 < frames_.size(); }
  /// Frames whose discrete H_w gradient is free of time-boundary terms.
  bool is_boundary_clean(std::size_t frame) const { return frame >= 3 && frame + 4 <= frames_.size(); }

  /// Returns a copy with one frame replaced (normalization unchecked).
  Trajectory with_frame(std::size_t index, ComplexField values) const;

  /// Composite-trapezoid weights in time.
  RealField time_weights() const;

 private:
  void validate_shape() const;

  Grid grid_;
  double dt_;
  double t0_;
  std::vector<ComplexField> frames_;
  DerivativeScheme scheme_;
};

/// Discrete d psi/dt at a frame: central differences at interior frames,
/// one-sided second-order stencils at the two ends.
ComplexField time_derivative(const Trajectory& traj, std::size_t frame_index);

}  // namespace qduality
