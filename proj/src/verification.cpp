#include "qduality/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qduality/dynamics.hpp"
#include "qduality/errors.hpp"
#include "qduality/functionals.hpp"
#include "qduality/mutation.hpp"
#include "qduality/observables.hpp"

namespace qduality {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMachEps = std::numeric_limits<double>::epsilon();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

double l2(const Grid& g, std::span<const cplx> f) {
  RealField a(f.size());
  std::transform(f.begin(), f.end(), a.begin(), [](cplx z) { return std::norm(z); });
  return std::sqrt(integrate(g, a));
}

double sup(std::span<const cplx> f) {
  double m = 0.0;
  for (cplx z : f) m = std::max(m, std::abs(z));
  return m;
}

// Sum of a few Gaussian bumps with random centres, widths, momenta and phases.
Wavefunction random_state(const Grid& g, std::mt19937_64& rng) {
  // decay to < 1e-10 of the peak at the box edge for L >= 20
  std::uniform_real_distribution<double> centre(-0.1 * g.length(), 0.1 * g.length());
  std::uniform_real_distribution<double> width(0.5, 0.8);
  std::uniform_real_distribution<double> momentum(-2.0, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> weight(0.3, 1.0);
  ComplexField v(g.size());
  const double mid = 0.5 * (g.x_min() + g.x_max());
  for (int j = 0; j < 3; ++j) {
    const double x0 = mid + centre(rng), s = width(rng), k = momentum(rng), p = phase(rng), a = weight(rng);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = g.x(i) - x0;
      v[i] += a * std::exp(-y * y / (4.0 * s * s)) * std::polar(1.0, k * y + p);
    }
  }
  return normalize(Wavefunction(g, std::move(v)));
}

Trajectory crank_nicolson(const Wavefunction& psi0, const PotentialSpec& v, double dt, std::size_t steps,
                          const PhysicalConstants& c) {
  return propagate(psi0, v, {PropagatorMethod::CrankNicolson, dt, steps}, c, DerivativeScheme::Spectral);
}

Trajectory corrupt(const Trajectory& traj, std::size_t frame, double factor) {
  std::vector<ComplexField> frames = traj.frames();
  for (cplx& z : frames[frame]) z *= factor;
  return Trajectory(traj.grid(), traj.dt(), std::move(frames), traj.scheme(), traj.t0(),
                    Trajectory::AllowUnnormalized{});
}

// States shared by A3-A5: periodic spectral grids, static potentials.
struct SolutionCase {
  std::string name;
  Grid grid;
  PotentialSpec potential;
  Wavefunction psi0;
};

std::vector<SolutionCase> solution_cases(const VerifyOptions& opt, const PhysicalConstants& c) {
  const Grid trap(opt.n, -10.0, 10.0, Boundary::Periodic);
  const Grid open(opt.n, -20.0, 20.0, Boundary::Periodic);
  std::vector<SolutionCase> out;
  out.push_back({"harmonic ground", trap, PotentialSpec::harmonic(1.0),
                 InitialStateSpec(initial::HarmonicEigen{0, 1.0}).build(trap, c)});
  out.push_back({"coherent state", trap, PotentialSpec::harmonic(1.0),
                 Wavefunction(trap, analytic_state(reference::HarmonicCoherent{1.0, 1.0, 0.0}, trap, c, 0.0))});
  out.push_back({"free gaussian", open, PotentialSpec::free(),
                 InitialStateSpec(initial::Gaussian{0.0, 1.0, 1.0}).build(open, c)});
  return out;
}

CriterionResult guarded(std::string id, std::string title, const std::function<void(CriterionResult&)>& body) {
  CriterionResult r;
  r.id = std::move(id);
  r.title = std::move(title);
  const auto start = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

double observed_order(double e_prev, double e, double step_prev, double step) {
  if (!(e_prev > 0.0) || !(e > 0.0)) return kNaN;
  return std::log(e_prev / e) / std::log(step_prev / step);
}

}  // namespace

Check Check::at_most(std::string name, double measured, double tolerance, std::string provenance) {
  Check c{std::move(name), measured, tolerance, Comparison::AtMost, 0.0, false, std::move(provenance)};
  c.pass = measured <= tolerance;  // NaN fails
  return c;
}

Check Check::at_least(std::string name, double measured, double bound, std::string provenance) {
  Check c{std::move(name), measured, bound, Comparison::AtLeast, 0.0, false, std::move(provenance)};
  c.pass = measured >= bound;
  return c;
}

Check Check::near(std::string name, double measured, double target, double tolerance, std::string provenance) {
  Check c{std::move(name), measured, tolerance, Comparison::Near, target, false, std::move(provenance)};
  c.pass = std::abs(measured - target) <= tolerance;
  return c;
}

bool CriterionResult::pass() const {
  if (!error.empty() || checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::optional<Suite> parse_suite(std::string_view s) {
  if (s == "quick") return Suite::Quick;
  if (s == "full") return Suite::Full;
  return std::nullopt;
}

std::string_view to_string(Suite s) { return s == Suite::Quick ? "quick" : "full"; }

// ---------------------------------------------------------------------------
// A1

CriterionResult criterion_a1(const VerifyOptions& opt) {
  return guarded("A1", "variation oracle: analytic gradients vs central differences", [&](CriterionResult& r) {
    const PhysicalConstants c;
    const Grid g(opt.n, -10.0, 10.0, Boundary::Periodic);
    const PotentialSpec v = PotentialSpec::harmonic(1.0);
    std::mt19937_64 rng(opt.seed);
    const std::size_t frames = 12;

    std::vector<std::pair<std::string, Trajectory>> states;
    states.emplace_back("coherent state",
                        crank_nicolson(Wavefunction(g, analytic_state(reference::HarmonicCoherent{1.0, 1.0, 0.5}, g, c, 0.0)),
                                       v, opt.dt, frames - 1, c));
    states.emplace_back("moving gaussian",
                        crank_nicolson(InitialStateSpec(initial::Gaussian{-1.0, 0.9, 1.2}).build(g, c), v, opt.dt,
                                       frames - 1, c));
    std::vector<ComplexField> random_frames;
    for (std::size_t k = 0; k < frames; ++k) random_frames.push_back(random_state(g, rng).values());
    states.emplace_back("random frames",
                        Trajectory(g, opt.dt, std::move(random_frames), DerivativeScheme::Spectral));

    const std::size_t sites_per_state = 20;
    const double eps_coarse = 1e-4, eps_fine = 1e-5;
    const FunctionalTag tags[] = {FunctionalTag::Kc, FunctionalTag::Vc, FunctionalTag::Hc, FunctionalTag::Hw};
    struct Tally {
      double worst = 0.0;  // mismatch / allowed
      std::size_t richardson_failures = 0;
      std::size_t at_floor = 0;
      std::size_t evaluated = 0;
    };
    Tally tally[4];
    std::size_t sites = 0;

    for (const auto& [name, traj] : states) {
      std::uniform_int_distribution<std::size_t> frame(3, traj.size() - 4);
      std::uniform_int_distribution<std::size_t> point(g.size() / 4, 3 * g.size() / 4 - 1);
      std::bernoulli_distribution imaginary(0.5);
      for (std::size_t s = 0; s < sites_per_state; ++s, ++sites) {
        const Site site{frame(rng), point(rng)};
        const Direction dir = imaginary(rng) ? Direction::Imaginary : Direction::Real;
        const double scale = sup(traj.frame(site.frame));
        for (int t = 0; t < 4; ++t) {
          const FdVariation a = fd_variation(tags[t], traj, v, c, site, eps_coarse, dir);
          const FdVariation b = fd_variation(tags[t], traj, v, c, site, eps_fine, dir);
          const double allowed = std::max(1e-6 * std::abs(a.predicted), 1e-9);
          tally[t].worst = std::max(tally[t].worst, a.mismatch() / allowed);
          // central differences are exact for quadratic forms: either the error drops by
          // >= 50x for a 10x smaller step, or it sits at the cancellation floor
          const double floor_fine = 64.0 * kMachEps * (std::abs(b.functional) + 1.0) / (eps_fine * scale);
          const bool richardson = b.mismatch() <= std::max(0.02 * a.mismatch(), floor_fine);
          if (!richardson) ++tally[t].richardson_failures;
          if (b.mismatch() <= floor_fine) ++tally[t].at_floor;
          ++tally[t].evaluated;
        }
      }
    }
    r.checks.push_back(Check::at_least("random interior sites", static_cast<double>(sites), 20.0,
                                       "20 sites on each of " + std::to_string(states.size()) + " states, seed " +
                                           std::to_string(opt.seed)));
    for (int t = 0; t < 4; ++t) {
      const std::string tag(to_string(tags[t]));
      r.checks.push_back(Check::at_most(tag + ": worst mismatch / max(1e-6 rel, 1e-9 abs)", tally[t].worst, 1.0,
                                        "central difference, eps = 1e-4 x max|psi|"));
      r.checks.push_back(Check::at_most(
          tag + ": sites violating Richardson behaviour", static_cast<double>(tally[t].richardson_failures), 0.0,
          "eps 1e-4 -> 1e-5; quadratic functional, so no truncation term; " + std::to_string(tally[t].at_floor) +
              "/" + std::to_string(tally[t].evaluated) + " at roundoff floor 64 u (|F|+1)/h"));
    }
  });
}

// ---------------------------------------------------------------------------
// A2

CriterionResult criterion_a2(const VerifyOptions& opt) {
  return guarded("A2", "kinetic-density forms A, B, C integrate equally", [&](CriterionResult& r) {
    const PhysicalConstants c;
    const Grid g(opt.n, -16.0, 16.0, Boundary::Periodic);
    std::mt19937_64 rng(opt.seed + 1);
    std::vector<std::pair<std::string, Wavefunction>> states;
    states.emplace_back("plane wave", InitialStateSpec(initial::PlaneWave{2.0 * std::numbers::pi * 5.0 / g.length()}).build(g, c));
    states.emplace_back("gaussian 1", InitialStateSpec(initial::Gaussian{0.5, 1.0, 1.3}).build(g, c));
    states.emplace_back("gaussian 2", InitialStateSpec(initial::Gaussian{-2.0, 0.7, -0.4}).build(g, c));
    for (int n : {0, 1, 3})
      states.emplace_back("eigenstate " + std::to_string(n), InitialStateSpec(initial::HarmonicEigen{n, 1.0}).build(g, c));
    for (int j = 0; j < 5; ++j) states.emplace_back("random " + std::to_string(j), random_state(g, rng));

    double gap_ab = 0.0, gap_ac = 0.0, field_gap = 0.0, imag = 0.0;
    std::string worst_state;
    for (const auto& [name, psi] : states) {
      const DensityField a = kinetic_density(psi, KineticForm::A, c, DerivativeScheme::Spectral);
      const DensityField b = kinetic_density(psi, KineticForm::B, c, DerivativeScheme::Spectral);
      const DensityField cc = kinetic_density(psi, KineticForm::C, c, DerivativeScheme::Spectral);
      const double ab = std::abs(a.integral() - b.integral()), ac = std::abs(a.integral() - cc.integral());
      if (std::max(ab, ac) > std::max(gap_ab, gap_ac)) worst_state = name;
      gap_ab = std::max(gap_ab, ab);
      gap_ac = std::max(gap_ac, ac);
      RealField d1(g.size()), d2(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        d1[i] = a.values[i] - b.values[i];
        d2[i] = b.values[i] - cc.values[i];
      }
      field_gap = std::max({field_gap, std::abs(integrate(g, d1)), std::abs(integrate(g, d2))});
      imag = std::max({imag, a.imag_integral, b.imag_integral, cc.imag_integral});
    }
    const std::string prov = "periodic spectral: discrete integration by parts exact up to roundoff; " +
                             std::to_string(states.size()) + " states";
    r.checks.push_back(Check::at_most("max |int K_A - int K_B|", gap_ab, 1e-10, prov));
    r.checks.push_back(Check::at_most("max |int K_A - int K_C|", gap_ac, 1e-10, prov + "; worst: " + worst_state));
    r.checks.push_back(Check::at_most("max |int of pointwise difference field|", field_gap, 1e-10, prov));
    r.checks.push_back(Check::at_most("max |int Im K|", imag, 1e-10, "imaginary parts are total derivatives"));
  });
}

// ---------------------------------------------------------------------------
// A3

CriterionResult criterion_a3(const VerifyOptions& opt) {
  return guarded("A3", "duality residual on Crank-Nicolson solutions is O(dt^2)", [&](CriterionResult& r) {
    const PhysicalConstants c;
    const std::size_t steps = 20, probe = steps / 2;
    for (const SolutionCase& s : solution_cases(opt, c)) {
      const Trajectory coarse = crank_nicolson(s.psi0, s.potential, opt.dt, steps, c);
      const Trajectory fine = crank_nicolson(s.psi0, s.potential, 0.5 * opt.dt, 2 * steps, c);
      const DualityResidual rc = duality_residual(coarse, probe, s.potential, c);
      const DualityResidual rf = duality_residual(fine, 2 * probe, s.potential, c);

      const RealField vx = s.potential.sample(s.grid, c);
      ComplexField h3 = s.psi0.values();
      for (int j = 0; j < 3; ++j) h3 = apply_hamiltonian(s.grid, h3, vx, c, DerivativeScheme::Spectral);
      const double bound = opt.dt * opt.dt / (4.0 * c.hbar * c.hbar) * l2(s.grid, h3) + 1e-12 * rc.scale;

      r.checks.push_back(Check::near(s.name + ": dt-halving ratio of ||i hbar psi_t - H psi||", rc.norm / rf.norm, 4.0,
                                     0.4, "second-order integrator and central time difference"));
      r.checks.push_back(Check::at_most(s.name + ": residual norm at t = " + fmt(coarse.time(probe)), rc.norm, bound,
                                        "C dt^2 with C = ||H^3 psi0|| / 4 hbar^2 (eigen-analysis of the CN step)"));
      const Trajectory bad = corrupt(coarse, probe + 1, 1.01);
      const double ratio = duality_residual(bad, probe, s.potential, c).norm / rc.norm;
      r.checks.push_back(Check::at_least(s.name + ": corrupted-frame residual / baseline", ratio, 100.0,
                                         "one frame scaled by 1.01"));
    }
  });
}

// ---------------------------------------------------------------------------
// A4

CriterionResult criterion_a4(const VerifyOptions& opt) {
  return guarded("A4", "wave-side energy identity int H_w = <H>", [&](CriterionResult& r) {
    const PhysicalConstants c;
    const std::size_t steps = static_cast<std::size_t>(std::llround(1.0 / opt.dt));
    for (const SolutionCase& s : solution_cases(opt, c)) {
      const Trajectory traj = crank_nicolson(s.psi0, s.potential, opt.dt, steps, c);
      double gap = 0.0;
      double hw_min = std::numeric_limits<double>::infinity(), hw_max = -hw_min;
      double h_min = hw_min, h_max = -hw_min;
      for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const double hw = hw_density(traj, k, c).integral();
        const double h = hc_density(traj.wavefunction(k), s.potential, c, traj.scheme()).integral();
        gap = std::max(gap, std::abs(hw - h));
        hw_min = std::min(hw_min, hw);
        hw_max = std::max(hw_max, hw);
        h_min = std::min(h_min, h);
        h_max = std::max(h_max, h);
      }
      const std::string window = " over " + std::to_string(traj.size() - 2) + " interior frames";
      r.checks.push_back(Check::at_most(s.name + ": max |int H_w dx - <H>|", gap, 1e-6,
                                        "O(dt^2): CN + central difference give dt^2 <H^3>/4 hbar^2" + window));
      r.checks.push_back(Check::at_most(s.name + ": relative spread of int H_w dx", (hw_max - hw_min) / std::abs(h_max),
                                        1e-8, "static V; CN conserves every eigen-component" + window));
      r.checks.push_back(Check::at_most(s.name + ": relative spread of <H>", (h_max - h_min) / std::abs(h_max), 1e-8,
                                        "static V; CN is exactly energy conserving" + window));
    }
  });
}

// ---------------------------------------------------------------------------
// A5

CriterionResult criterion_a5(const VerifyOptions& opt) {
  return guarded("A5", "Euler-Lagrange residual equals duality residual", [&](CriterionResult& r) {
    const PhysicalConstants c;
    std::vector<std::tuple<std::string, Trajectory, PotentialSpec>> inputs;
    for (const SolutionCase& s : solution_cases(opt, c))
      inputs.emplace_back(s.name + " (solution)", crank_nicolson(s.psi0, s.potential, opt.dt, 10, c), s.potential);
    const auto& [first_name, first_traj, first_v] = inputs.front();
    inputs.emplace_back("corrupted trajectory", corrupt(first_traj, 5, 1.01), first_v);
    const Grid g(opt.n, -10.0, 10.0, Boundary::Periodic);
    std::mt19937_64 rng(opt.seed + 2);
    std::vector<ComplexField> frames;
    for (int k = 0; k < 8; ++k) frames.push_back(random_state(g, rng).values());
    inputs.emplace_back("random frames (non-solution)", Trajectory(g, opt.dt, std::move(frames), DerivativeScheme::Spectral),
                        PotentialSpec::harmonic(1.0));

    for (const auto& [name, traj, v] : inputs) {
      double worst = 0.0;
      for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const ComplexField el = euler_lagrange_residual(traj, k, v, c);
        const DualityResidual d = duality_residual(traj, k, v, c);
        const double scale = sup(variation_hw(traj, k, c)) + sup(variation_hc(traj.wavefunction(k), v, c, traj.scheme()));
        double diff = 0.0;
        for (std::size_t i = 0; i < el.size(); ++i)
          diff = std::max(diff, std::abs(el[i] - kEulerLagrangeFactor * d.residual[i]));
        worst = std::max(worst, diff / scale);
      }
      r.checks.push_back(Check::at_most(name + ": max pointwise |EL - " + fmt(kEulerLagrangeFactor) +
                                            " x duality| / (max|i hbar psi_t| + max|H psi|)",
                                        worst, 1e-10, "factor 1 (derivatives w.r.t. psi*); same spatial scheme"));
    }
  });
}

// ---------------------------------------------------------------------------
// A6

CriterionResult criterion_a6(const VerifyOptions& opt) {
  return guarded("A6", "de Broglie limit and kinetic decomposition", [&](CriterionResult& r) {
    const PhysicalConstants c;
    {
      const Grid g(opt.n, 0.0, 2.0 * std::numbers::pi, Boundary::Periodic);
      const double k = 3.0, omega = c.hbar * k * k / (2.0 * c.mass);
      std::vector<ComplexField> frames;
      for (int j = 0; j < 5; ++j) {
        ComplexField f(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
          f[i] = std::polar(1.0 / std::sqrt(g.length()), k * g.x(i) - omega * j * opt.dt);
        frames.push_back(std::move(f));
      }
      const Trajectory traj(g, opt.dt, std::move(frames), DerivativeScheme::Spectral);
      const LocalFields lf = local_fields(traj, 2, c);
      const double e_discrete = c.hbar * std::sin(omega * opt.dt) / opt.dt;
      double e_dev = 0.0, e_exact = 0.0, p_dev = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        e_dev = std::max(e_dev, std::abs(lf.energy[i] - e_discrete) / (c.hbar * omega));
        e_exact = std::max(e_exact, std::abs(lf.energy[i] - c.hbar * omega));
        p_dev = std::max(p_dev, std::abs(lf.momentum[i] - c.hbar * k) / (c.hbar * k));
      }
      r.checks.push_back(Check::at_most("plane wave: max |p_field - hbar k| / hbar k", p_dev, 1e-12,
                                        "spectral derivative of e^{ikx}: FFT roundoff only (machine precision)"));
      r.checks.push_back(Check::at_most("plane wave: max |E_field - hbar sin(w dt)/dt| / hbar w", e_dev, 1e-12,
                                        "central time difference of e^{-iwt} is exactly sin(w dt)/dt; roundoff only"));
      r.checks.push_back(Check::at_most("plane wave: max |E_field - hbar w|", e_exact,
                                        c.hbar * omega * omega * omega * opt.dt * opt.dt / 6.0 + 1e-12,
                                        "hbar w^3 dt^2 / 6 from the time difference"));
    }
    const Grid g(opt.n, -16.0, 16.0, Boundary::Periodic);
    for (const auto& [sigma, k0] : {std::pair{1.0, 1.5}, std::pair{0.7, -2.0}}) {
      const Wavefunction psi = InitialStateSpec(initial::Gaussian{0.3, sigma, k0}).build(g, c);
      const KineticDecomposition d = kinetic_decomposition(psi, c, DerivativeScheme::Spectral);
      const std::string tag = "gaussian sigma=" + fmt(sigma) + " k0=" + fmt(k0);
      r.checks.push_back(Check::near(tag + ": flow term", d.flow, c.hbar * c.hbar * k0 * k0 / (2.0 * c.mass), 1e-8,
                                     "closed form hbar^2 k0^2 / 2m"));
      r.checks.push_back(Check::near(tag + ": quantum term", d.quantum, c.hbar * c.hbar / (8.0 * c.mass * sigma * sigma),
                                     1e-8, "closed form hbar^2 / 8 m sigma^2"));
    }
    std::mt19937_64 rng(opt.seed + 3);
    std::vector<Wavefunction> states;
    states.push_back(InitialStateSpec(initial::PlaneWave{2.0 * std::numbers::pi * 4.0 / g.length()}).build(g, c));
    states.push_back(InitialStateSpec(initial::Gaussian{0.3, 1.0, 1.5}).build(g, c));
    for (int n : {0, 1, 3}) states.push_back(InitialStateSpec(initial::HarmonicEigen{n, 1.0}).build(g, c));
    states.push_back(InitialStateSpec::superposition({{cplx{1.0, 0.0}, InitialStateSpec(initial::HarmonicEigen{0, 1.0})},
                                                      {cplx{0.0, 1.0}, InitialStateSpec(initial::HarmonicEigen{1, 1.0})}})
                         .build(g, c));
    states.emplace_back(g, analytic_state(reference::HarmonicCoherent{1.0, 1.0, 0.8}, g, c, 0.0));
    for (int j = 0; j < 5; ++j) states.push_back(random_state(g, rng));
    double worst = 0.0;
    for (const Wavefunction& psi : states)
      worst = std::max(worst, std::abs(flow_momentum(psi, c, DerivativeScheme::Spectral) -
                                       mean_momentum(psi, c, DerivativeScheme::Spectral)));
    r.checks.push_back(Check::at_most("max |int p R^2 dx - Re<p>| over " + std::to_string(states.size()) + " states",
                                      worst, 1e-9, "identity hbar Im(psi* psi_x); node-masked points carry R^2 < 1e-12"));
  });
}

// ---------------------------------------------------------------------------
// convergence tables

std::vector<ConvergenceTable> convergence_studies(const VerifyOptions& opt) {
  const PhysicalConstants c;
  std::vector<ConvergenceTable> out;

  const auto finish = [](ConvergenceTable& t, double lo, double hi) {
    t.pass = t.rows.size() >= 3;
    for (std::size_t j = 1; j < t.rows.size(); ++j) t.pass = t.pass && t.rows[j].order >= lo && t.rows[j].order <= hi;
  };

  {
    const Grid g(opt.n, -10.0, 10.0, Boundary::Periodic);
    const PotentialSpec v = PotentialSpec::harmonic(1.0);
    const reference::HarmonicCoherent coherent{1.5, 1.0, 0.0};
    const Wavefunction psi0(g, analytic_state(coherent, g, c, 0.0));
    const double T = 0.5;
    const ComplexField exact = analytic_state(coherent, g, c, T);
    for (PropagatorMethod m : {PropagatorMethod::CrankNicolson, PropagatorMethod::SplitStepSpectral}) {
      ConvergenceTable t;
      t.name = std::string(to_string(m)) + ": L2 error at T = 0.5, coherent state";
      t.variable = "dt";
      t.expected = "2";
      t.provenance = "second-order time integrator; spectral space error below 1e-12";
      for (std::size_t steps : {50u, 100u, 200u, 400u}) {
        const Trajectory traj = propagate(psi0, v, {m, T / steps, steps}, c, DerivativeScheme::Spectral);
        ComplexField diff(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) diff[i] = traj.frames().back()[i] - exact[i];
        ConvergenceRow row{T / steps, l2(g, diff), kNaN};
        if (!t.rows.empty()) row.order = observed_order(t.rows.back().error, row.error, t.rows.back().step, row.step);
        t.rows.push_back(row);
      }
      finish(t, 1.8, 2.2);
      out.push_back(std::move(t));
    }
  }

  const auto eigen_defect = [&](const Grid& g, DerivativeScheme scheme) {
    const Wavefunction psi = InitialStateSpec(initial::HarmonicEigen{0, 1.0}).build(g, c);
    const ComplexField h = variation_hc(psi, PotentialSpec::harmonic(1.0), c, scheme);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(h[i] - 0.5 * c.hbar * psi[i]));
    return e;
  };
  {
    ConvergenceTable t;
    t.name = "FD4, vanishing grid: max |H psi0 - E0 psi0|, harmonic ground state";
    t.variable = "dx";
    t.expected = "4";
    t.provenance = "fourth-order central stencil with fourth-order closures";
    for (std::size_t n : {81u, 161u, 321u, 641u}) {
      const Grid g(n, -10.0, 10.0, Boundary::Vanishing);
      ConvergenceRow row{g.dx(), eigen_defect(g, DerivativeScheme::CentralFD4), kNaN};
      if (!t.rows.empty()) row.order = observed_order(t.rows.back().error, row.error, t.rows.back().step, row.step);
      t.rows.push_back(row);
    }
    finish(t, 3.6, 4.4);
    out.push_back(std::move(t));
  }
  {
    ConvergenceTable t;
    t.name = "spectral, periodic grid: max |H psi0 - E0 psi0|, harmonic ground state";
    t.variable = "dx";
    t.expected = "spectral";
    t.provenance = "exponential convergence down to the roundoff floor (last error < 1e-10)";
    for (std::size_t n : {32u, 48u, 64u, 96u, 128u}) {
      const Grid g(n, -10.0, 10.0, Boundary::Periodic);
      ConvergenceRow row{g.dx(), eigen_defect(g, DerivativeScheme::Spectral), kNaN};
      if (!t.rows.empty()) row.order = observed_order(t.rows.back().error, row.error, t.rows.back().step, row.step);
      t.rows.push_back(row);
    }
    t.pass = t.rows.back().error < 1e-10 && t.rows[1].order > 6.0;
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------

VerificationReport verify(Suite suite, const VerifyOptions& opt) {
  VerificationReport rep;
  rep.suite = std::string(to_string(suite));
  rep.seed = opt.seed;
  rep.mutation = std::string(to_string(active_mutation()));
  rep.options = opt;
  rep.criteria.push_back(criterion_a1(opt));
  rep.criteria.push_back(criterion_a2(opt));
  rep.criteria.push_back(criterion_a3(opt));
  rep.criteria.push_back(criterion_a4(opt));
  if (suite == Suite::Full) {
    rep.criteria.push_back(criterion_a5(opt));
    rep.criteria.push_back(criterion_a6(opt));
    rep.convergence = convergence_studies(opt);
  }
  return rep;
}

bool VerificationReport::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass(); }) &&
         std::all_of(convergence.begin(), convergence.end(), [](const ConvergenceTable& t) { return t.pass; });
}

std::string VerificationReport::to_json() const {
  using nlohmann::json;
  const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["suite"] = suite;
  j["seed"] = seed;
  j["mutation"] = mutation;
  j["options"] = {{"n", options.n}, {"dt", options.dt}};
  j["pass"] = pass();
  json crit = json::array();
  for (const CriterionResult& r : criteria) {
    json checks = json::array();
    for (const Check& c : r.checks) {
      json e{{"name", c.name}, {"measured", num(c.measured)}, {"tolerance", c.tolerance}, {"pass", c.pass},
             {"provenance", c.provenance}};
      switch (c.comparison) {
        case Comparison::AtMost: e["comparison"] = "<="; break;
        case Comparison::AtLeast: e["comparison"] = ">="; break;
        case Comparison::Near:
          e["comparison"] = "|measured - target| <=";
          e["target"] = c.target;
          break;
      }
      checks.push_back(std::move(e));
    }
    json entry{{"id", r.id}, {"title", r.title}, {"pass", r.pass()}, {"seconds", r.seconds}, {"checks", checks}};
    if (!r.error.empty()) entry["error"] = r.error;
    crit.push_back(std::move(entry));
  }
  j["criteria"] = std::move(crit);
  if (!convergence.empty()) {
    json tables = json::array();
    for (const ConvergenceTable& t : convergence) {
      json rows = json::array();
      for (const ConvergenceRow& row : t.rows)
        rows.push_back({{t.variable, row.step}, {"error", num(row.error)}, {"order", num(row.order)}});
      tables.push_back({{"name", t.name},
                        {"variable", t.variable},
                        {"expected_order", t.expected},
                        {"pass", t.pass},
                        {"provenance", t.provenance},
                        {"rows", rows}});
    }
    j["convergence"] = std::move(tables);
  }
  return j.dump(2);
}

std::string summary_line(const CriterionResult& r) {
  std::ostringstream os;
  const std::size_t passed =
      static_cast<std::size_t>(std::count_if(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.pass; }));
  os << r.id << (r.pass() ? " PASS  " : " FAIL  ") << r.title << "  [" << passed << "/" << r.checks.size()
     << " checks, " << fmt(r.seconds) << " s]";
  if (!r.error.empty()) os << "  error: " << r.error;
  for (const Check& c : r.checks)
    if (!c.pass) {
      os << "  first failure: " << c.name << " = " << c.measured;
      break;
    }
  return os.str();
}

}  // namespace qduality
