#include "qduality/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "qduality/diagnostics.hpp"
#include "qduality/errors.hpp"

namespace qduality {

std::string_view to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "vanishing"; }

std::string_view to_string(DerivativeScheme s) {
  return s == DerivativeScheme::Spectral ? "spectral" : "central_fd4";
}

std::string_view to_string(QuadratureRule q) {
  switch (q) {
    case QuadratureRule::Rectangle: return "rectangle";
    case QuadratureRule::Simpson: return "simpson";
    case QuadratureRule::Trapezoid: return "trapezoid";
  }
  return "?";
}

namespace detail {

namespace {
// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  std::lock_guard lock(planner_mutex());
  auto* buf = fftw_alloc_complex(n);
  const int ni = static_cast<int>(n);
  auto* rbuf = fftw_alloc_real(n);
  auto* cbuf = fftw_alloc_complex(n / 2 + 1);
  forward_ = fftw_plan_dft_1d(ni, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  backward_ = fftw_plan_dft_1d(ni, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  forward_real_ = fftw_plan_dft_r2c_1d(ni, rbuf, cbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
  backward_real_ = fftw_plan_dft_c2r_1d(ni, cbuf, rbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  fftw_free(rbuf);
  fftw_free(cbuf);
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
  fftw_destroy_plan(static_cast<fftw_plan>(forward_real_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_real_));
}

void FftPlan::forward(std::span<cplx> data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_), p, p);
}

void FftPlan::backward(std::span<cplx> data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_), p, p);
}

void FftPlan::forward_real(std::span<const double> in, std::span<cplx> out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_real_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void FftPlan::backward_real(std::span<cplx> in, std::span<double> out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_real_), reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
}

}  // namespace detail

Grid::Grid(std::size_t n, double x_min, double x_max, Boundary boundary)
    : n_(n), x_min_(x_min), x_max_(x_max), boundary_(boundary) {
  if (n < 8) throw ConfigError("grid: n must be at least 8");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
    throw ConfigError("grid: x_max must exceed x_min");
  dx_ = (x_max - x_min) / static_cast<double>(boundary == Boundary::Periodic ? n : n - 1);
  if (!(dx_ > 0.0)) throw ConfigError("grid: dx must be positive");
  if (boundary == Boundary::Periodic) fft_ = std::make_shared<const detail::FftPlan>(n);
}

RealField Grid::coordinates() const {
  RealField xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
  return xs;
}

QuadratureRule Grid::quadrature_rule() const {
  if (boundary_ == Boundary::Periodic) return QuadratureRule::Rectangle;
  return n_ % 2 == 1 ? QuadratureRule::Simpson : QuadratureRule::Trapezoid;
}

int Grid::quadrature_order() const {
  switch (quadrature_rule()) {
    case QuadratureRule::Rectangle: return 0;
    case QuadratureRule::Simpson: return 4;
    case QuadratureRule::Trapezoid: return 2;
  }
  return 2;
}

bool Grid::operator==(const Grid& o) const {
  return n_ == o.n_ && x_min_ == o.x_min_ && x_max_ == o.x_max_ && boundary_ == o.boundary_;
}

RealField Grid::wavenumbers() const {
  RealField k(n_);
  const double base = 2.0 * std::numbers::pi / length();
  const auto n = static_cast<long>(n_);
  for (long j = 0; j < n; ++j) k[static_cast<std::size_t>(j)] = base * static_cast<double>(j < (n + 1) / 2 ? j : j - n);
  return k;
}

const detail::FftPlan& Grid::fft() const {
  if (!fft_) throw ConfigError("grid: spectral operations need a periodic grid");
  return *fft_;
}

void require_compatible(const Grid& grid, DerivativeScheme scheme) {
  if (scheme == DerivativeScheme::Spectral && grid.boundary() != Boundary::Periodic)
    throw ConfigError("spectral differentiation requires a periodic grid");
}

DerivativeScheme default_scheme(const Grid& grid) {
  return grid.boundary() == Boundary::Periodic ? DerivativeScheme::Spectral : DerivativeScheme::CentralFD4;
}

void require_length(const Grid& grid, std::size_t length, std::string_view context) {
  if (length != grid.size()) {
    std::ostringstream os;
    os << context << ": field length " << length << " does not match grid size " << grid.size();
    throw ShapeError(os.str());
  }
}

namespace {

// Real and imaginary parts are differentiated separately with real
// transforms, so a real field has an exactly real derivative.
template <int Order>
RealField spectral_diff_real(const Grid& grid, std::span<const double> f) {
  const std::size_t n = grid.size();
  const std::size_t half = n / 2 + 1;
  const double base = 2.0 * std::numbers::pi / grid.length();
  const double inv_n = 1.0 / static_cast<double>(n);
  ComplexField spectrum(half);
  grid.fft().forward_real(f, spectrum);
  for (std::size_t j = 0; j < half; ++j) {
    const double k = base * static_cast<double>(j);
    const bool nyquist = n % 2 == 0 && j == n / 2;
    if constexpr (Order == 1) {
      // Odd derivative of the Nyquist mode is not representable; drop it.
      spectrum[j] *= nyquist ? cplx{} : cplx{0.0, k * inv_n};
    } else {
      spectrum[j] *= -k * k * inv_n;
    }
  }
  RealField out(n);
  grid.fft().backward_real(spectrum, out);
  return out;
}

template <int Order>
ComplexField spectral_diff(const Grid& grid, std::span<const cplx> f) {
  const std::size_t n = grid.size();
  RealField re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = f[i].real();
    im[i] = f[i].imag();
  }
  const RealField dre = spectral_diff_real<Order>(grid, re);
  const RealField dim = spectral_diff_real<Order>(grid, im);
  ComplexField out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {dre[i], dim[i]};
  return out;
}

ComplexField fd4_diff1(const Grid& grid, std::span<const cplx> f) {
  const std::size_t n = grid.size();
  const double c = 1.0 / (12.0 * grid.dx());
  ComplexField d(n);
  if (grid.boundary() == Boundary::Periodic) {
    for (std::size_t i = 0; i < n; ++i) {
      auto at = [&](long off) { return f[static_cast<std::size_t>((static_cast<long>(i + n) + off) % static_cast<long>(n))]; };
      d[i] = c * (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2));
    }
    return d;
  }
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
  // one-sided 4th-order closures
  d[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
  d[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
  const std::size_t m = n - 1;
  d[m] = -c * (-25.0 * f[m] + 48.0 * f[m - 1] - 36.0 * f[m - 2] + 16.0 * f[m - 3] - 3.0 * f[m - 4]);
  d[m - 1] = -c * (-3.0 * f[m] - 10.0 * f[m - 1] + 18.0 * f[m - 2] - 6.0 * f[m - 3] + f[m - 4]);
  return d;
}

ComplexField fd4_diff2(const Grid& grid, std::span<const cplx> f) {
  const std::size_t n = grid.size();
  const double c = 1.0 / (12.0 * grid.dx() * grid.dx());
  ComplexField d(n);
  if (grid.boundary() == Boundary::Periodic) {
    for (std::size_t i = 0; i < n; ++i) {
      auto at = [&](long off) { return f[static_cast<std::size_t>((static_cast<long>(i + n) + off) % static_cast<long>(n))]; };
      d[i] = c * (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2));
    }
    return d;
  }
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = c * (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]);
  d[0] = c * (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]);
  d[1] = c * (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]);
  const std::size_t m = n - 1;
  d[m] = c * (45.0 * f[m] - 154.0 * f[m - 1] + 214.0 * f[m - 2] - 156.0 * f[m - 3] + 61.0 * f[m - 4] - 10.0 * f[m - 5]);
  d[m - 1] = c * (10.0 * f[m] - 15.0 * f[m - 1] - 4.0 * f[m - 2] + 14.0 * f[m - 3] - 6.0 * f[m - 4] + f[m - 5]);
  return d;
}

}  // namespace

ComplexField diff1(const Grid& grid, std::span<const cplx> f, DerivativeScheme scheme) {
  require_compatible(grid, scheme);
  require_length(grid, f.size(), "diff1");
  return scheme == DerivativeScheme::Spectral ? spectral_diff<1>(grid, f) : fd4_diff1(grid, f);
}

ComplexField diff2(const Grid& grid, std::span<const cplx> f, DerivativeScheme scheme) {
  require_compatible(grid, scheme);
  require_length(grid, f.size(), "diff2");
  return scheme == DerivativeScheme::Spectral ? spectral_diff<2>(grid, f) : fd4_diff2(grid, f);
}

RealField diff1(const Grid& grid, std::span<const double> f, DerivativeScheme scheme) {
  const ComplexField fc(f.begin(), f.end());
  const ComplexField d = diff1(grid, fc, scheme);
  RealField out(d.size());
  std::transform(d.begin(), d.end(), out.begin(), [](cplx z) { return z.real(); });
  return out;
}

RealField quadrature_weights(const Grid& grid) {
  const std::size_t n = grid.size();
  const double h = grid.dx();
  RealField w(n, h);
  switch (grid.quadrature_rule()) {
    case QuadratureRule::Rectangle:
      break;
    case QuadratureRule::Trapezoid:
      w.front() = w.back() = 0.5 * h;
      break;
    case QuadratureRule::Simpson:
      for (std::size_t i = 0; i < n; ++i) w[i] = h / 3.0 * (i == 0 || i == n - 1 ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
      break;
  }
  return w;
}

cplx integrate(const Grid& grid, std::span<const cplx> f) {
  require_length(grid, f.size(), "integrate");
  const RealField w = quadrature_weights(grid);
  cplx sum{};
  for (std::size_t i = 0; i < f.size(); ++i) sum += w[i] * f[i];
  return sum;
}

double integrate(const Grid& grid, std::span<const double> f) {
  require_length(grid, f.size(), "integrate");
  const RealField w = quadrature_weights(grid);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += w[i] * f[i];
  return sum;
}

bool check_boundary_decay(const Grid& grid, std::span<const cplx> f, std::string_view context) {
  if (grid.boundary() != Boundary::Vanishing || f.empty()) return true;
  double peak = 0.0;
  for (const cplx& z : f) peak = std::max(peak, std::abs(z));
  const double edge = std::max(std::abs(f.front()), std::abs(f.back()));
  if (peak > 0.0 && edge > 1e-10 * peak) {
    std::ostringstream os;
    os << context << ": field has not decayed at the grid boundary (|f_edge|/max|f| = " << edge / peak
       << "); integration-by-parts identities assume vanishing boundary terms";
    warn(os.str());
    return false;
  }
  return true;
}

}  // namespace qduality
