#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace qduality {

using cplx = std::complex<double>;
using ComplexField = std::vector<cplx>;
using RealField = std::vector<double>;

enum class Boundary { Periodic, Vanishing };

enum class DerivativeScheme { Spectral, CentralFD4 };

// Quadrature used by Grid::integrate. Periodic grids use the rectangle rule,
// Vanishing grids use composite Simpson when n is odd and trapezoid otherwise.
enum class QuadratureRule { Rectangle, Simpson, Trapezoid };

std::string_view to_string(Boundary b);
std::string_view to_string(DerivativeScheme s);
std::string_view to_string(QuadratureRule q);

namespace detail {
class FftPlan;
}

/// Uniform 1D lattice. Periodic grids exclude x_max, Vanishing grids include
/// both endpoints. Immutable; copies share the FFT plan.
class Grid {
 public:
  Grid(std::size_t n, double x_min, double x_max, Boundary boundary);

  std::size_t size() const { return n_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double dx() const { return dx_; }
  double length() const { return x_max_ - x_min_; }
  Boundary boundary() const { return boundary_; }
  double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx_; }
  RealField coordinates() const;

  QuadratureRule quadrature_rule() const;
  /// Formal order of the quadrature (0 stands for spectral accuracy).
  int quadrature_order() const;

  /// Order of accuracy of a derivative scheme on this grid (0 = spectral).
  static int scheme_order(DerivativeScheme s) { return s == DerivativeScheme::Spectral ? 0 : 4; }

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

  /// Angular wavenumbers in FFT order.
  RealField wavenumbers() const;

  const detail::FftPlan& fft() const;

 private:
  std::size_t n_;
  double x_min_;
  double x_max_;
  Boundary boundary_;
  double dx_;
  std::shared_ptr<const detail::FftPlan> fft_;
};

/// Checks that a scheme may be used on the grid; throws ConfigError otherwise.
void require_compatible(const Grid& grid, DerivativeScheme scheme);

/// Default scheme for the boundary mode: Spectral on Periodic, FD4 on Vanishing.
DerivativeScheme default_scheme(const Grid& grid);

ComplexField diff1(const Grid& grid, std::span<const cplx> f, DerivativeScheme scheme);
ComplexField diff2(const Grid& grid, std::span<const cplx> f, DerivativeScheme scheme);

RealField diff1(const Grid& grid, std::span<const double> f, DerivativeScheme scheme);

cplx integrate(const Grid& grid, std::span<const cplx> f);
double integrate(const Grid& grid, std::span<const double> f);

/// Quadrature weights w_i such that integrate(f) = sum_i w_i f_i.
RealField quadrature_weights(const Grid& grid);

/// Emits a warning when a field on a Vanishing grid has not decayed at the
/// endpoints (|f| > 1e-10 max|f|). Returns true when the field is decayed.
bool check_boundary_decay(const Grid& grid, std::span<const cplx> f, std::string_view context);

void require_length(const Grid& grid, std::size_t length, std::string_view context);

namespace detail {

/// In-place complex DFT of length n. Thread-safe for concurrent execute calls.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void forward(std::span<cplx> data) const;
  /// Unnormalized inverse.
  void backward(std::span<cplx> data) const;

  /// Real-input transform into the n/2+1 non-negative frequencies.
  void forward_real(std::span<const double> in, std::span<cplx> out) const;
  /// Unnormalized inverse of forward_real; `in` is overwritten.
  void backward_real(std::span<cplx> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_;
  void* backward_;
  void* forward_real_;
  void* backward_real_;
};

}  // namespace detail

}  // namespace qduality
