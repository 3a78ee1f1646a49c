#include "qduality/dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qduality/errors.hpp"
#include "qduality/functionals.hpp"

namespace qduality {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Signed displacement x - x0, wrapped to the nearest periodic image.
double displacement(const Grid& grid, double x, double x0) {
  double d = x - x0;
  if (grid.boundary() == Boundary::Periodic) {
    const double L = grid.length();
    d -= L * std::floor(d / L + 0.5);
  }
  return d;
}

double edge_ratio(std::span<const cplx> f) {
  double peak = 0.0;
  for (const cplx& z : f) peak = std::max(peak, std::abs(z));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(f.front()), std::abs(f.back())) / peak;
}

void require_decayed(const Grid& grid, std::span<const cplx> f, std::string_view what) {
  const double r = edge_ratio(f);
  if (r > 1e-10) {
    std::ostringstream os;
    os << what << ": state is not decayed at the grid edges (|psi_edge|/max|psi| = " << r << ") on ["
       << grid.x_min() << ", " << grid.x_max() << "]";
    throw ConfigError(os.str());
  }
}

}  // namespace

InitialStateSpec InitialStateSpec::superposition(std::vector<std::pair<cplx, InitialStateSpec>> terms) {
  initial::Superposition s;
  for (auto& [coef, spec] : terms)
    s.terms.push_back({coef, std::make_shared<const InitialStateSpec>(std::move(spec))});
  return InitialStateSpec(std::move(s));
}

RealField harmonic_eigenfunction(const Grid& grid, int n, double omega, double center, const PhysicalConstants& c) {
  if (n < 0) throw ConfigError("harmonic eigenstate: n must be non-negative");
  if (!(omega > 0.0)) throw ConfigError("harmonic eigenstate: omega must be positive");
  const double alpha = std::sqrt(c.mass * omega / c.hbar);
  const double norm = std::sqrt(alpha) * std::pow(std::numbers::pi, -0.25);
  RealField out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double xi = alpha * displacement(grid, grid.x(i), center);
    // normalized Hermite-function recurrence
    double prev = 0.0;
    double cur = std::exp(-0.5 * xi * xi);
    for (int k = 0; k < n; ++k) {
      const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
      prev = cur;
      cur = next;
    }
    out[i] = norm * cur;
  }
  return out;
}

Wavefunction InitialStateSpec::build(const Grid& grid, const PhysicalConstants& c) const {
  c.validate();
  ComplexField values = std::visit(
      overloaded{
          [&](const initial::PlaneWave& p) {
            if (grid.boundary() != Boundary::Periodic) throw ConfigError("plane_wave: requires a periodic grid");
            const double cycles = p.k * grid.length() / (2.0 * std::numbers::pi);
            if (std::abs(cycles - std::round(cycles)) > 1e-9)
              throw ConfigError("plane_wave: k must be a multiple of 2 pi / L");
            ComplexField v(grid.size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(1.0, p.k * grid.x(i));
            return v;
          },
          [&](const initial::Gaussian& g) {
            if (!(g.sigma >= 3.0 * grid.dx())) throw ConfigError("gaussian: sigma must be at least 3 dx");
            ComplexField v(grid.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
              const double d = displacement(grid, grid.x(i), g.x0);
              v[i] = std::exp(cplx{-d * d / (4.0 * g.sigma * g.sigma), g.k0 * (d + g.x0)});
            }
            require_decayed(grid, v, "gaussian");
            return v;
          },
          [&](const initial::HarmonicEigen& h) {
            const RealField r = harmonic_eigenfunction(grid, h.n, h.omega, h.center, c);
            ComplexField v(r.begin(), r.end());
            require_decayed(grid, v, "harmonic_eigen");
            return v;
          },
          [&](const initial::Superposition& s) {
            if (s.terms.empty()) throw ConfigError("superposition: needs at least one term");
            ComplexField v(grid.size());
            for (const auto& term : s.terms) {
              const Wavefunction part = term.state->build(grid, c);
              for (std::size_t i = 0; i < v.size(); ++i) v[i] += term.coefficient * part[i];
            }
            return v;
          },
      },
      kind_);
  return normalize(Wavefunction(grid, std::move(values)));
}

std::string_view to_string(PropagatorMethod m) {
  return m == PropagatorMethod::CrankNicolson ? "crank_nicolson" : "split_step_spectral";
}

void PropagatorConfig::validate(const Grid& grid, const PotentialSpec& v, const PhysicalConstants& c) const {
  c.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("propagator: dt must be positive");
  if (steps < 2) throw ConfigError("propagator: at least 2 steps are required");
  const double guard = dt * v.max_abs(grid, c) / c.hbar;
  if (guard > 0.5) {
    std::ostringstream os;
    os << "propagator: dt*max|V|/hbar = " << guard << " exceeds 0.5";
    throw ConfigError(os.str());
  }
  if (method == PropagatorMethod::SplitStepSpectral && grid.boundary() != Boundary::Periodic)
    throw ConfigError("propagator: split-step spectral requires a periodic grid");
}

namespace {

std::vector<ComplexField> crank_nicolson(const Wavefunction& psi0, const RealField& v, const PropagatorConfig& cfg,
                                         const PhysicalConstants& c, DerivativeScheme scheme) {
  const Grid& grid = psi0.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXcd h(n, n);
  ComplexField unit(grid.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    std::fill(unit.begin(), unit.end(), cplx{});
    unit[static_cast<std::size_t>(j)] = 1.0;
    const ComplexField col = apply_hamiltonian(grid, unit, v, c, scheme);
    for (Eigen::Index i = 0; i < n; ++i) h(i, j) = col[static_cast<std::size_t>(i)];
  }
  const cplx half_step{0.0, 0.5 * cfg.dt / c.hbar};
  const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd implicit_part = identity + half_step * h;
  const Eigen::MatrixXcd explicit_part = identity - half_step * h;
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(implicit_part);

  std::vector<ComplexField> frames;
  frames.reserve(cfg.steps + 1);
  frames.push_back(psi0.values());
  Eigen::VectorXcd state = Eigen::Map<const Eigen::VectorXcd>(psi0.values().data(), n);
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    state = lu.solve(explicit_part * state);
    frames.emplace_back(state.data(), state.data() + n);
  }
  return frames;
}

std::vector<ComplexField> split_step(const Wavefunction& psi0, const RealField& v, const PropagatorConfig& cfg,
                                     const PhysicalConstants& c) {
  const Grid& grid = psi0.grid();
  const std::size_t n = grid.size();
  const RealField k = grid.wavenumbers();
  ComplexField half_potential(n), kinetic(n);
  for (std::size_t i = 0; i < n; ++i) {
    half_potential[i] = std::polar(1.0, -0.5 * v[i] * cfg.dt / c.hbar);
    kinetic[i] = std::polar(1.0 / static_cast<double>(n), -c.hbar * k[i] * k[i] * cfg.dt / (2.0 * c.mass));
  }
  std::vector<ComplexField> frames;
  frames.reserve(cfg.steps + 1);
  frames.push_back(psi0.values());
  ComplexField state = psi0.values();
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    for (std::size_t i = 0; i < n; ++i) state[i] *= half_potential[i];
    grid.fft().forward(state);
    for (std::size_t i = 0; i < n; ++i) state[i] *= kinetic[i];
    grid.fft().backward(state);
    for (std::size_t i = 0; i < n; ++i) state[i] *= half_potential[i];
    frames.push_back(state);
  }
  return frames;
}

}  // namespace

Trajectory propagate(const Wavefunction& psi0, const PotentialSpec& v, const PropagatorConfig& cfg,
                     const PhysicalConstants& c, DerivativeScheme scheme) {
  const Grid& grid = psi0.grid();
  cfg.validate(grid, v, c);
  require_compatible(grid, scheme);
  if (std::abs(psi0.norm_sq() - 1.0) > 1e-9) throw DegenerateInputError("propagate: initial state is not normalized");
  check_boundary_decay(grid, psi0.span(), "propagate");
  const RealField vx = v.sample(grid, c);
  std::vector<ComplexField> frames = cfg.method == PropagatorMethod::CrankNicolson
                                         ? crank_nicolson(psi0, vx, cfg, c, scheme)
                                         : split_step(psi0, vx, cfg, c);
  return Trajectory(grid, cfg.dt, std::move(frames), scheme);
}

Trajectory propagate(const Wavefunction& psi0, const PotentialSpec& v, const PropagatorConfig& cfg,
                     const PhysicalConstants& c) {
  return propagate(psi0, v, cfg, c, default_scheme(psi0.grid()));
}

double free_gaussian_width(double sigma, double t, const PhysicalConstants& c) {
  const double tau = c.hbar * t / (2.0 * c.mass * sigma * sigma);
  return sigma * std::sqrt(1.0 + tau * tau);
}

double coherent_center(const reference::HarmonicCoherent& s, double t, const PhysicalConstants& c) {
  return s.x0 * std::cos(s.omega * t) + s.p0 / (c.mass * s.omega) * std::sin(s.omega * t);
}

ComplexField analytic_state(const reference::Kind& kind, const Grid& grid, const PhysicalConstants& c, double t) {
  c.validate();
  const std::size_t n = grid.size();
  ComplexField out(n);
  std::visit(overloaded{
                 [&](const reference::FreeGaussian& g) {
                   if (!(g.sigma > 0.0)) throw ConfigError("free gaussian: sigma must be positive");
                   const cplx s{1.0, c.hbar * t / (2.0 * c.mass * g.sigma * g.sigma)};
                   const double amp = std::pow(2.0 * std::numbers::pi * g.sigma * g.sigma, -0.25);
                   const double drift = c.hbar * g.k0 * t / c.mass;
                   for (std::size_t i = 0; i < n; ++i) {
                     // wrap around the moving centre so the packet stays whole on periodic grids
                     const double y = displacement(grid, grid.x(i), g.x0 + drift) + drift;
                     const cplx q{-y * y / (4.0 * g.sigma * g.sigma), g.k0 * y - g.sigma * g.sigma * g.k0 * g.k0 * s.imag()};
                     out[i] = amp / std::sqrt(s) * std::exp(q / s) * std::polar(1.0, g.k0 * g.x0);
                   }
                 },
                 [&](const reference::HarmonicEigen& h) {
                   const RealField r = harmonic_eigenfunction(grid, h.n, h.omega, 0.0, c);
                   const cplx phase = std::polar(1.0, -(h.n + 0.5) * h.omega * t);
                   for (std::size_t i = 0; i < n; ++i) out[i] = r[i] * phase;
                 },
                 [&](const reference::HarmonicCoherent& s) {
                   if (!(s.omega > 0.0)) throw ConfigError("coherent state: omega must be positive");
                   const double mw = c.mass * s.omega;
                   const double q = coherent_center(s, t, c);
                   const double p = s.p0 * std::cos(s.omega * t) - mw * s.x0 * std::sin(s.omega * t);
                   const double amp = std::pow(mw / (std::numbers::pi * c.hbar), 0.25);
                   for (std::size_t i = 0; i < n; ++i) {
                     const double d = displacement(grid, grid.x(i), q);
                     const double x = q + d;
                     const double phase = (p * x - 0.5 * p * q + 0.5 * s.x0 * s.p0) / c.hbar - 0.5 * s.omega * t;
                     out[i] = amp * std::exp(-0.5 * mw * d * d / c.hbar) * std::polar(1.0, phase);
                   }
                 },
             },
             kind);
  return out;
}

ComplexField analytic_time_derivative(const reference::Kind& kind, const Grid& grid, const PhysicalConstants& c,
                                      double t) {
  const auto* g = std::get_if<reference::FreeGaussian>(&kind);
  if (g == nullptr) {
    if (const auto* h = std::get_if<reference::HarmonicEigen>(&kind)) {
      ComplexField psi = analytic_state(kind, grid, c, t);
      const cplx factor{0.0, -(h->n + 0.5) * h->omega};
      for (cplx& z : psi) z *= factor;
      return psi;
    }
    throw ConfigError("analytic_time_derivative: only free Gaussian and harmonic eigenstates are supported");
  }
  const ComplexField psi = analytic_state(kind, grid, c, t);
  const double gamma = c.hbar / (2.0 * c.mass * g->sigma * g->sigma);
  const cplx s{1.0, gamma * t};
  const cplx ds{0.0, gamma};
  const double drift = c.hbar * g->k0 * t / c.mass;
  ComplexField out(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double y = displacement(grid, grid.x(i), g->x0 + drift) + drift;
    const cplx q{-y * y / (4.0 * g->sigma * g->sigma), g->k0 * y - g->sigma * g->sigma * g->k0 * g->k0 * s.imag()};
    const cplx dq{0.0, -g->sigma * g->sigma * g->k0 * g->k0 * gamma};
    out[i] = psi[i] * (-0.5 * ds / s + (dq * s - q * ds) / (s * s));
  }
  return out;
}

Trajectory analytic_reference(const reference::Kind& kind, const Grid& grid, const PhysicalConstants& c,
                              const TimeSamples& times, DerivativeScheme scheme) {
  if (times.count < 3) throw ShapeError("analytic_reference: at least 3 samples are required");
  std::vector<ComplexField> frames;
  frames.reserve(times.count);
  for (std::size_t j = 0; j < times.count; ++j) {
    frames.push_back(analytic_state(kind, grid, c, times.t0 + times.dt * static_cast<double>(j)));
    require_decayed(grid, frames.back(), "analytic_reference");
  }
  return Trajectory(grid, times.dt, std::move(frames), scheme, times.t0, Trajectory::AllowUnnormalized{});
}

Trajectory analytic_reference(const reference::Kind& kind, const Grid& grid, const PhysicalConstants& c,
                              const TimeSamples& times) {
  return analytic_reference(kind, grid, c, times, default_scheme(grid));
}

}  // namespace qduality
