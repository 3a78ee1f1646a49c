#include "qduality/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "qduality/errors.hpp"
#include "qduality/functionals.hpp"
#include "qduality/mutation.hpp"
#include "qduality/observables.hpp"

namespace qduality {

namespace fs = std::filesystem;

DerivativeScheme GridSpec::resolved_scheme() const {
  if (scheme) return *scheme;
  return boundary == Boundary::Periodic ? DerivativeScheme::Spectral : DerivativeScheme::CentralFD4;
}

const std::vector<std::string>& known_fields() {
  static const std::vector<std::string> names{"psi",       "density",   "kinetic_a", "kinetic_b",    "kinetic_c",
                                              "potential", "hc",        "hw",        "energy_field", "momentum_field"};
  return names;
}

bool RunResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

// ---------------------------------------------------------------------------
// parsing

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  static int line(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 1; }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const { fail(line(n), msg); }

  void require_map(const YAML::Node& n, const std::string& section) const {
    if (!n.IsMap()) fail(n, "'" + section + "' must be a mapping");
  }

  // Unknown keys are hard errors; missing required keys are listed together.
  void keys(const YAML::Node& n, const std::string& section, std::initializer_list<std::string_view> allowed,
            std::initializer_list<std::string_view> required = {}) const {
    require_map(n, section);
    for (const auto& kv : n) {
      const std::string key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        std::string list;
        for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        fail(kv.first, "unknown key '" + key + "' in '" + section + "' (allowed: " + list + ")");
      }
    }
    std::string missing;
    for (auto r : required)
      if (!n[std::string(r)]) missing += (missing.empty() ? "" : ", ") + std::string(r);
    if (!missing.empty()) fail(n, "'" + section + "' is missing required field(s): " + missing);
  }

  double number(const YAML::Node& n, const std::string& what) const {
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) fail(n, what + " must be finite");
      return v;
    } catch (const YAML::BadConversion&) {
      fail(n, what + ": expected a number");
    }
  }
  double number(const YAML::Node& parent, const std::string& key, const std::string& section, double fallback) const {
    const YAML::Node n = parent[key];
    return n ? number(n, section + "." + key) : fallback;
  }

  long long integer(const YAML::Node& n, const std::string& what, long long min_value) const {
    long long v = 0;
    try {
      v = n.as<long long>();
    } catch (const YAML::BadConversion&) {
      fail(n, what + ": expected an integer");
    }
    if (v < min_value) fail(n, what + " must be >= " + std::to_string(min_value));
    return v;
  }

  bool boolean(const YAML::Node& n, const std::string& what) const {
    try {
      return n.as<bool>();
    } catch (const YAML::BadConversion&) {
      fail(n, what + ": expected true or false");
    }
  }

  std::string text(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + ": expected a string");
    return n.as<std::string>();
  }

  GridSpec grid(const YAML::Node& n) const {
    keys(n, "grid", {"n", "x_min", "x_max", "boundary", "scheme"}, {"n", "x_min", "x_max"});
    GridSpec g;
    g.n = static_cast<std::size_t>(integer(n["n"], "grid.n", 8));
    g.x_min = number(n["x_min"], "grid.x_min");
    g.x_max = number(n["x_max"], "grid.x_max");
    if (!(g.x_max > g.x_min)) fail(n["x_max"], "grid.x_max must exceed grid.x_min");
    if (n["boundary"]) {
      const std::string b = text(n["boundary"], "grid.boundary");
      if (b == "periodic") g.boundary = Boundary::Periodic;
      else if (b == "vanishing") g.boundary = Boundary::Vanishing;
      else fail(n["boundary"], "grid.boundary must be 'periodic' or 'vanishing', got '" + b + "'");
    }
    if (n["scheme"]) {
      const std::string s = text(n["scheme"], "grid.scheme");
      if (s == "spectral") g.scheme = DerivativeScheme::Spectral;
      else if (s == "fd4") g.scheme = DerivativeScheme::CentralFD4;
      else fail(n["scheme"], "grid.scheme must be 'spectral' or 'fd4', got '" + s + "'");
      if (*g.scheme == DerivativeScheme::Spectral && g.boundary == Boundary::Vanishing)
        fail(n["scheme"], "spectral derivatives require a periodic grid");
    }
    return g;
  }

  PhysicalConstants constants(const YAML::Node& n) const {
    keys(n, "constants", {"hbar", "mass"});
    PhysicalConstants c;
    c.hbar = number(n, "hbar", "constants", 1.0);
    c.mass = number(n, "mass", "constants", 1.0);
    if (!(c.hbar > 0.0)) fail(n["hbar"], "constants.hbar must be positive");
    if (!(c.mass > 0.0)) fail(n["mass"], "constants.mass must be positive");
    return c;
  }

  PotentialSpec potential(const YAML::Node& n) const {
    require_map(n, "potential");
    if (!n["type"]) fail(n, "'potential' is missing required field(s): type");
    const std::string type = text(n["type"], "potential.type");
    if (type == "free") {
      keys(n, "potential", {"type"});
      return PotentialSpec::free();
    }
    if (type == "harmonic") {
      keys(n, "potential", {"type", "omega", "center"}, {"omega"});
      return PotentialSpec(potential::Harmonic{number(n["omega"], "potential.omega"), number(n, "center", "potential", 0.0)});
    }
    if (type == "square_well") {
      keys(n, "potential", {"type", "depth", "width"}, {"depth", "width"});
      return PotentialSpec(potential::SquareWell{number(n["depth"], "potential.depth"), number(n["width"], "potential.width")});
    }
    if (type == "barrier") {
      keys(n, "potential", {"type", "height", "width", "center"}, {"height", "width"});
      return PotentialSpec(potential::Barrier{number(n["height"], "potential.height"), number(n["width"], "potential.width"),
                                number(n, "center", "potential", 0.0)});
    }
    if (type == "custom") {
      keys(n, "potential", {"type", "samples"}, {"samples"});
      if (!n["samples"].IsSequence()) fail(n["samples"], "potential.samples must be a list of numbers");
      RealField s;
      for (const auto& v : n["samples"]) s.push_back(number(v, "potential.samples"));
      return PotentialSpec(potential::Custom{std::move(s)});
    }
    fail(n["type"], "unknown potential type '" + type + "' (free, harmonic, square_well, barrier, custom)");
  }

  InitialStateSpec state(const YAML::Node& n, const std::string& section) const {
    require_map(n, section);
    if (!n["type"]) fail(n, "'" + section + "' is missing required field(s): type");
    const std::string type = text(n["type"], section + ".type");
    if (type == "plane_wave") {
      keys(n, section, {"type", "k"}, {"k"});
      return InitialStateSpec(initial::PlaneWave{number(n["k"], section + ".k")});
    }
    if (type == "gaussian") {
      keys(n, section, {"type", "x0", "sigma", "k0"}, {"sigma"});
      return InitialStateSpec(initial::Gaussian{number(n, "x0", section, 0.0), number(n["sigma"], section + ".sigma"),
                               number(n, "k0", section, 0.0)});
    }
    if (type == "harmonic_eigen") {
      keys(n, section, {"type", "n", "omega", "center"}, {"n"});
      return InitialStateSpec(initial::HarmonicEigen{static_cast<int>(integer(n["n"], section + ".n", 0)),
                                    number(n, "omega", section, 1.0), number(n, "center", section, 0.0)});
    }
    if (type == "superposition") {
      keys(n, section, {"type", "terms"}, {"terms"});
      const YAML::Node terms = n["terms"];
      if (!terms.IsSequence() || terms.size() == 0) fail(terms, section + ".terms must be a non-empty list");
      std::vector<std::pair<cplx, InitialStateSpec>> out;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        const std::string sub = section + ".terms[" + std::to_string(j) + "]";
        keys(terms[j], sub, {"coefficient", "state"}, {"state"});
        cplx coef{1.0, 0.0};
        if (const YAML::Node cn = terms[j]["coefficient"]) {
          if (cn.IsSequence()) {
            if (cn.size() != 2) fail(cn, sub + ".coefficient must be a number or [re, im]");
            coef = {number(cn[0], sub + ".coefficient"), number(cn[1], sub + ".coefficient")};
          } else {
            coef = number(cn, sub + ".coefficient");
          }
        }
        out.emplace_back(coef, state(terms[j]["state"], sub + ".state"));
      }
      return InitialStateSpec::superposition(std::move(out));
    }
    fail(n["type"], "unknown state type '" + type + "' (plane_wave, gaussian, harmonic_eigen, superposition)");
  }

  PropagatorConfig propagator(const YAML::Node& n) const {
    keys(n, "propagator", {"method", "dt", "steps"}, {"dt", "steps"});
    PropagatorConfig p;
    if (n["method"]) {
      const std::string m = text(n["method"], "propagator.method");
      if (m == "crank_nicolson") p.method = PropagatorMethod::CrankNicolson;
      else if (m == "split_step" || m == "split_step_spectral") p.method = PropagatorMethod::SplitStepSpectral;
      else fail(n["method"], "propagator.method must be 'crank_nicolson' or 'split_step', got '" + m + "'");
    }
    p.dt = number(n["dt"], "propagator.dt");
    if (!(p.dt > 0.0)) fail(n["dt"], "propagator.dt must be positive");
    p.steps = static_cast<std::size_t>(integer(n["steps"], "propagator.steps", 2));
    return p;
  }

  OutputSpec outputs(const YAML::Node& n) const {
    keys(n, "outputs", {"fields", "frames", "action_report", "residual_norms", "fd_samples"});
    OutputSpec o;
    if (const YAML::Node f = n["fields"]) {
      if (!f.IsSequence()) fail(f, "outputs.fields must be a list");
      for (const auto& e : f) {
        const std::string name = text(e, "outputs.fields");
        const auto& known = known_fields();
        if (std::find(known.begin(), known.end(), name) == known.end()) {
          std::string list;
          for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
          fail(e, "unknown field '" + name + "' (" + list + ")");
        }
        o.fields.push_back(name);
      }
    }
    if (const YAML::Node f = n["frames"]) {
      if (!f.IsSequence()) fail(f, "outputs.frames must be a list of frame indices");
      for (const auto& e : f) o.frames.push_back(static_cast<std::size_t>(integer(e, "outputs.frames", 0)));
    }
    if (n["action_report"]) o.action_report = boolean(n["action_report"], "outputs.action_report");
    if (n["residual_norms"]) o.residual_norms = boolean(n["residual_norms"], "outputs.residual_norms");
    if (n["fd_samples"]) o.fd_samples = static_cast<std::size_t>(integer(n["fd_samples"], "outputs.fd_samples", 0));
    return o;
  }

  Perturbation perturbation(const YAML::Node& n) const {
    keys(n, "perturbation", {"frame", "scale"}, {"frame", "scale"});
    return {static_cast<std::size_t>(integer(n["frame"], "perturbation.frame", 0)),
            number(n["scale"], "perturbation.scale")};
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    rd.fail(e.mark.line + 1, "YAML syntax error: " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) rd.fail(root, "scenario must be a mapping of sections");

  rd.keys(root, "scenario",
          {"name", "seed", "grid", "constants", "potential", "initial_state", "propagator", "outputs", "perturbation"});

  ScenarioConfig cfg;
  for (const auto& kv : root) cfg.lines[kv.first.as<std::string>()] = Reader::line(kv.first);
  cfg.name = root["name"] ? rd.text(root["name"], "name") : fs::path(source).stem().string();
  if (root["seed"]) cfg.seed = static_cast<std::uint64_t>(rd.integer(root["seed"], "seed", 0));
  // sections that are present are parsed first: a typo inside one is a better diagnostic
  // than the list of absent sections
  if (root["grid"]) cfg.grid = rd.grid(root["grid"]);
  if (root["constants"]) cfg.constants = rd.constants(root["constants"]);
  if (root["potential"]) cfg.potential = rd.potential(root["potential"]);
  if (root["initial_state"]) cfg.initial = rd.state(root["initial_state"], "initial_state");
  if (root["propagator"]) cfg.propagator = rd.propagator(root["propagator"]);
  if (root["outputs"]) cfg.outputs = rd.outputs(root["outputs"]);
  if (root["perturbation"]) cfg.perturbation = rd.perturbation(root["perturbation"]);

  std::string missing;
  for (const char* r : {"grid", "potential", "initial_state", "propagator"})
    if (!root[r]) missing += (missing.empty() ? "" : ", ") + std::string(r);
  if (!missing.empty()) rd.fail(root, "missing required field(s): " + missing);

  try {
    validate(cfg);
  } catch (const Error& e) {
    throw ConfigError(source + ":" + std::to_string(cfg.lines.count("grid") ? cfg.lines.at("grid") : 1) +
                      ": invalid scenario: " + e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

void validate(const ScenarioConfig& cfg) {
  const auto at = [&](const std::string& section, const std::string& msg) {
    const auto it = cfg.lines.find(section);
    return ConfigError((it != cfg.lines.end() ? "line " + std::to_string(it->second) + " (" + section + "): " : "") + msg);
  };
  cfg.constants.validate();
  const Grid grid = cfg.grid.build();
  require_compatible(grid, cfg.grid.resolved_scheme());
  try {
    (void)cfg.potential.sample(grid, cfg.constants);
  } catch (const Error& e) {
    throw at("potential", e.what());
  }
  try {
    (void)cfg.initial.build(grid, cfg.constants);
  } catch (const Error& e) {
    throw at("initial_state", e.what());
  }
  try {
    cfg.propagator.validate(grid, cfg.potential, cfg.constants);
  } catch (const Error& e) {
    throw at("propagator", e.what());
  }
  const std::size_t frames = cfg.propagator.steps + 1;
  for (std::size_t f : cfg.outputs.frames)
    if (f >= frames)
      throw at("outputs", "frame " + std::to_string(f) + " out of range (trajectory has " + std::to_string(frames) +
                              " frames)");
  if (cfg.outputs.fd_samples > 0 && frames < 7)
    throw at("outputs", "fd_samples needs at least 7 frames (6 steps) for boundary-clean sites");
  if (cfg.perturbation) {
    if (cfg.perturbation->frame >= frames)
      throw at("perturbation", "frame " + std::to_string(cfg.perturbation->frame) + " out of range");
    if (!(cfg.perturbation->scale > 0.0)) throw at("perturbation", "scale must be positive");
  }
}

// ---------------------------------------------------------------------------
// running

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

double l2(const Grid& g, std::span<const cplx> f) {
  RealField a(f.size());
  std::transform(f.begin(), f.end(), a.begin(), [](cplx z) { return std::norm(z); });
  return std::sqrt(integrate(g, a));
}

ComplexField kinetic_apply(const Grid& g, std::span<const cplx> psi, const PhysicalConstants& c, DerivativeScheme s) {
  ComplexField t = diff2(g, psi, s);
  for (cplx& z : t) z *= -c.kinetic_prefactor();
  return t;
}

ComplexField times(const RealField& v, std::span<const cplx> psi) {
  ComplexField out(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) out[i] = v[i] * psi[i];
  return out;
}

ComplexField minus(const ComplexField& a, const ComplexField& b) {
  ComplexField out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// Leading-order a-priori bound on ||i hbar psi_t - H psi|| for a trajectory frame.
// Crank-Nicolson: each eigen-component with energy E picks up E^3 dt^2 / (4 hbar^2 (1 + a)), a = (E dt/2hbar)^2.
// Strang split-step: central-difference error dt^2 ||H^3 psi|| / 6 hbar^2 plus the modified-Hamiltonian part
// ||(H~ - H) psi|| ~ dt^2 (||[T,[T,V]] psi|| / 12 + ||[V,[V,T]] psi|| / 24) / hbar^2, both doubled as margin.
struct ResidualBound {
  double time_difference = 0.0;
  double splitting = 0.0;  // split-step only; also bounds the O(dt^2) wobble of <H>
  double total() const { return time_difference + splitting; }
};

ResidualBound residual_bound(const Trajectory& traj, std::size_t k, const RealField& v, const PhysicalConstants& c,
                             PropagatorMethod method) {
  const Grid& g = traj.grid();
  const DerivativeScheme s = traj.scheme();
  const ComplexField& psi = traj.frame(k);
  ComplexField h3 = psi;
  for (int j = 0; j < 3; ++j) h3 = apply_hamiltonian(g, h3, v, c, s);
  const double dt2 = traj.dt() * traj.dt() / (c.hbar * c.hbar);
  if (method == PropagatorMethod::CrankNicolson) return {0.25 * dt2 * l2(g, h3), 0.0};

  const auto T = [&](const ComplexField& f) { return kinetic_apply(g, f, c, s); };
  const auto V = [&](const ComplexField& f) { return times(v, f); };
  const auto TV = [&](const ComplexField& f) { return minus(T(V(f)), V(T(f))); };  // [T,V]
  const ComplexField ttv = minus(T(TV(psi)), TV(T(psi)));                          // [T,[T,V]]
  const ComplexField vvt = minus(TV(V(psi)), V(TV(psi)));                          // [V,[V,T]] = [[T,V],V]
  return {2.0 * dt2 * l2(g, h3) / 6.0, 2.0 * dt2 * (l2(g, ttv) / 12.0 + l2(g, vvt) / 24.0)};
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const fs::path& out_dir) {
  validate(cfg);
  const PhysicalConstants& c = cfg.constants;
  const Grid grid = cfg.grid.build();
  const DerivativeScheme scheme = cfg.grid.resolved_scheme();
  const RealField vx = cfg.potential.sample(grid, c);
  const Wavefunction psi0 = cfg.initial.build(grid, c);
  Trajectory traj = propagate(psi0, cfg.potential, cfg.propagator, c, scheme);
  if (cfg.perturbation) {
    ComplexField f = traj.frame(cfg.perturbation->frame);
    for (cplx& z : f) z *= cfg.perturbation->scale;
    traj = traj.with_frame(cfg.perturbation->frame, std::move(f));
  }
  const std::size_t nf = traj.size();

  RunResult result;
  fs::create_directories(out_dir);

  std::ostringstream meta;
  meta << "# scenario: " << cfg.name << "\n"
       << "# seed: " << cfg.seed << "\n"
       << "# grid: n=" << grid.size() << " x_min=" << num(grid.x_min()) << " x_max=" << num(grid.x_max())
       << " dx=" << num(grid.dx()) << " boundary=" << to_string(grid.boundary()) << " scheme=" << to_string(scheme)
       << "\n"
       << "# constants: hbar=" << num(c.hbar) << " mass=" << num(c.mass) << "\n"
       << "# potential: " << cfg.potential.describe() << "\n"
       << "# propagator: " << to_string(cfg.propagator.method) << " dt=" << num(cfg.propagator.dt)
       << " steps=" << cfg.propagator.steps << "\n";
  if (cfg.perturbation)
    meta << "# perturbation: frame " << cfg.perturbation->frame << " scaled by " << num(cfg.perturbation->scale) << "\n";
  if (active_mutation() != Mutation::None) meta << "# mutation: " << to_string(active_mutation()) << "\n";

  // time series
  std::vector<double> kin(nf), pot(nf), ham(nf), wave(nf), res(nf, std::nan("")), drift(nf);
  std::vector<double> bound(nf, std::nan("")), scale(nf, 0.0);
  double splitting = 0.0;
  for (std::size_t k = 0; k < nf; ++k) {
    const Wavefunction wf = traj.wavefunction(k);
    kin[k] = kinetic_density(wf, KineticForm::A, c, scheme).integral();
    pot[k] = potential_density(wf, cfg.potential, c).integral();
    ham[k] = kin[k] + pot[k];
    wave[k] = hw_density(traj, k, c).integral();
    drift[k] = wf.norm_sq() - 1.0;
    if (traj.is_interior(k)) {
      const DualityResidual r = duality_residual(traj, k, cfg.potential, c);
      res[k] = r.norm;
      scale[k] = r.scale;
      const ResidualBound b = residual_bound(traj, k, vx, c, cfg.propagator.method);
      bound[k] = b.total();
      splitting = std::max(splitting, b.splitting);
    }
  }
  {
    std::ostringstream ts;
    ts << meta.str() << "# columns: t K V H int_Hw residual_norm norm_drift\n"
       << "# residual_norm is nan at the two end frames (one-sided time derivative)\n";
    for (std::size_t k = 0; k < nf; ++k)
      ts << num(traj.time(k)) << ' ' << num(kin[k]) << ' ' << num(pot[k]) << ' ' << num(ham[k]) << ' '
         << num(wave[k]) << ' ' << (cfg.outputs.residual_norms ? num(res[k]) : std::string("nan")) << ' '
         << num(drift[k]) << '\n';
    write_file(out_dir / "timeseries.dat", ts.str());
    result.files.push_back(out_dir / "timeseries.dat");
  }

  // field dumps
  std::vector<std::size_t> frames = cfg.outputs.frames;
  if (frames.empty()) frames = {0, nf / 2, nf - 1};
  std::vector<std::pair<std::size_t, std::size_t>> node_counts;
  if (!cfg.outputs.fields.empty()) fs::create_directories(out_dir / "fields");
  for (std::size_t k : frames) {
    const Wavefunction wf = traj.wavefunction(k);
    node_counts.emplace_back(k, polar_decompose(wf, scheme).node_count());
    for (const std::string& field : cfg.outputs.fields) {
      std::ostringstream os;
      os << "# field: " << field << "\n# frame: " << k << " t=" << num(traj.time(k)) << "\n" << meta.str();
      const auto column = [&](const std::string& name, const RealField& values) {
        os << "# columns: x " << name << "\n";
        for (std::size_t i = 0; i < grid.size(); ++i) os << num(grid.x(i)) << ' ' << num(values[i]) << '\n';
      };
      if (field == "psi") {
        os << "# columns: x re im\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
          os << num(grid.x(i)) << ' ' << num(wf[i].real()) << ' ' << num(wf[i].imag()) << '\n';
      } else if (field == "density") {
        RealField d(grid.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(wf[i]);
        column("density", d);
      } else if (field == "kinetic_a" || field == "kinetic_b" || field == "kinetic_c") {
        const KineticForm form = field == "kinetic_a" ? KineticForm::A : field == "kinetic_b" ? KineticForm::B : KineticForm::C;
        column(field, kinetic_density(wf, form, c, scheme).values);
      } else if (field == "potential") {
        column(field, potential_density(wf, cfg.potential, c).values);
      } else if (field == "hc") {
        column(field, hc_density(wf, cfg.potential, c, scheme).values);
      } else if (field == "hw") {
        column(field, hw_density(traj, k, c).values);
      } else {
        const LocalFields lf = local_fields(traj, k, c);
        const RealField& values = field == "energy_field" ? lf.energy : lf.momentum;
        os << "# columns: x " << field << " node_mask (fields are 0 where node_mask = 1)\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
          os << num(grid.x(i)) << ' ' << num(values[i]) << ' ' << (lf.node_mask[i] ? 1 : 0) << '\n';
      }
      char name[64];
      std::snprintf(name, sizeof name, "%s_f%06zu.dat", field.c_str(), k);
      write_file(out_dir / "fields" / name, os.str());
      result.files.push_back(out_dir / "fields" / name);
    }
  }

  // checks
  std::vector<Check>& checks = result.checks;
  {
    double worst = 0.0;
    for (double d : drift) worst = std::max(worst, std::abs(d));
    checks.push_back(Check::at_most("norm drift max | ||psi||^2 - 1 |", worst, 1e-9,
                                    "unitary integrator; 1e-9 covers accumulated roundoff over the run"));
  }
  {
    const auto [lo, hi] = std::minmax_element(ham.begin(), ham.end());
    const double ref = std::max(std::abs(ham[0]), 1e-12);
    if (cfg.propagator.method == PropagatorMethod::CrankNicolson)
      checks.push_back(Check::at_most("energy conservation (max <H> - min <H>) / |<H>(0)|", (*hi - *lo) / ref, 1e-8,
                                      "static potential; Crank-Nicolson conserves <H> of the discrete H exactly"));
    else
      checks.push_back(Check::at_most("energy conservation (max <H> - min <H>) / |<H>(0)|", (*hi - *lo) / ref,
                                      1e-8 + 2.0 * splitting / ref,
                                      "static potential; split-step conserves the modified H~, so <H> wobbles by "
                                      "<= 2 max ||(H~ - H) psi||"));
  }
  {
    double worst = 0.0, worst_norm = 0.0, worst_gap = 0.0, gap_ratio = 0.0;
    for (std::size_t k = 1; k + 1 < nf; ++k) {
      const double allowed = bound[k] + 1e-12 * scale[k];
      worst = std::max(worst, res[k] / allowed);
      worst_norm = std::max(worst_norm, res[k]);
      // |int H_w - <H>| = |Re <psi, residual>| <= ||psi|| ||residual||
      const double gap = std::abs(wave[k] - ham[k]);
      worst_gap = std::max(worst_gap, gap);
      gap_ratio = std::max(gap_ratio, gap / (std::sqrt(1.0 + drift[k]) * allowed));
    }
    checks.push_back(Check::at_most("duality residual max_k ||i hbar psi_t - H psi|| / bound_k", worst, 1.0,
                                    std::string("a-priori ") + std::string(to_string(cfg.propagator.method)) +
                                        " bound (dt^2 eigen/commutator analysis); worst norm " + num(worst_norm)));
    checks.push_back(Check::at_most("wave-energy identity max_k |int H_w - <H>| / (||psi|| bound_k)", gap_ratio, 1.0,
                                    "Cauchy-Schwarz on Re<psi, residual>; worst gap " + num(worst_gap)));
  }
  if (scheme == DerivativeScheme::Spectral) {
    double gap = 0.0;
    for (std::size_t k : frames) {
      const Wavefunction wf = traj.wavefunction(k);
      const double a = kinetic_density(wf, KineticForm::A, c, scheme).integral();
      gap = std::max({gap, std::abs(a - kinetic_density(wf, KineticForm::B, c, scheme).integral()),
                      std::abs(a - kinetic_density(wf, KineticForm::C, c, scheme).integral())});
    }
    checks.push_back(Check::at_most("kinetic forms max |int K_A - int K_{B,C}| at sampled frames", gap, 1e-10,
                                    "periodic spectral: integration by parts exact to roundoff"));
  }
  std::string fd_note;
  if (cfg.outputs.fd_samples > 0) {
    if (grid.boundary() != Boundary::Periodic) {
      fd_note = "skipped: gradient oracle needs a periodic grid";
    } else {
      std::mt19937_64 rng(cfg.seed);
      std::uniform_int_distribution<std::size_t> frame(3, nf - 4), point(0, grid.size() - 1);
      std::bernoulli_distribution imaginary(0.5);
      double worst = 0.0;
      for (std::size_t s = 0; s < cfg.outputs.fd_samples; ++s) {
        const Site site{frame(rng), point(rng)};
        const Direction d = imaginary(rng) ? Direction::Imaginary : Direction::Real;
        for (FunctionalTag tag : {FunctionalTag::Kc, FunctionalTag::Vc, FunctionalTag::Hc, FunctionalTag::Hw}) {
          const FdVariation fd = fd_variation(tag, traj, cfg.potential, c, site, 1e-4, d);
          worst = std::max(worst, fd.mismatch() / std::max(1e-6 * std::abs(fd.predicted), 1e-9));
        }
      }
      checks.push_back(Check::at_most("gradient oracle worst mismatch / max(1e-6 rel, 1e-9 abs)", worst, 1.0,
                                      std::to_string(cfg.outputs.fd_samples) + " random sites x 4 functionals, seed " +
                                          std::to_string(cfg.seed)));
    }
  }

  // action report
  if (cfg.outputs.action_report) {
    const ActionReport a = actions(traj, cfg.potential, c);
    nlohmann::json j{{"scenario", cfg.name},
                     {"seed", cfg.seed},
                     {"time_window", {a.time_window.first, a.time_window.second}},
                     {"K_c", a.kinetic},
                     {"V_c", a.potential},
                     {"H_c", a.hamiltonian},
                     {"H_w", a.wave_energy},
                     {"S_c", a.corpuscular_action},
                     {"S_w", a.wave_action},
                     {"H_c_minus_H_w", a.hamiltonian - a.wave_energy}};
    write_file(out_dir / "actions.json", j.dump(2) + "\n");
    result.files.push_back(out_dir / "actions.json");
  }

  // verification report
  {
    using nlohmann::json;
    json checks_json = json::array();
    for (const Check& ch : checks)
      checks_json.push_back({{"name", ch.name},
                             {"measured", std::isfinite(ch.measured) ? json(ch.measured) : json(nullptr)},
                             {"tolerance", ch.tolerance},
                             {"pass", ch.pass},
                             {"provenance", ch.provenance}});
    json nodes = json::array();
    for (const auto& [k, count] : node_counts) nodes.push_back({{"frame", k}, {"nodes", count}});
    json j{{"scenario", cfg.name},
           {"seed", cfg.seed},
           {"mutation", std::string(to_string(active_mutation()))},
           {"grid",
            {{"n", grid.size()},
             {"x_min", grid.x_min()},
             {"x_max", grid.x_max()},
             {"boundary", std::string(to_string(grid.boundary()))},
             {"scheme", std::string(to_string(scheme))},
             {"quadrature", std::string(to_string(grid.quadrature_rule()))}}},
           {"constants", {{"hbar", c.hbar}, {"mass", c.mass}}},
           {"potential", cfg.potential.describe()},
           {"propagator",
            {{"method", std::string(to_string(cfg.propagator.method))},
             {"dt", cfg.propagator.dt},
             {"steps", cfg.propagator.steps}}},
           {"node_policy", "R^2 < 1e-12 max R^2 masked; phase-derived fields set to 0 there"},
           {"node_counts", nodes},
           {"checks", checks_json},
           {"pass", result.pass()}};
    if (cfg.perturbation) j["perturbation"] = {{"frame", cfg.perturbation->frame}, {"scale", cfg.perturbation->scale}};
    if (!fd_note.empty()) j["gradient_oracle"] = fd_note;
    std::vector<std::string> files;
    for (const auto& f : result.files) files.push_back(fs::relative(f, out_dir).string());
    j["files"] = files;
    write_file(out_dir / "report.json", j.dump(2) + "\n");
    result.files.push_back(out_dir / "report.json");
  }
  return result;
}

}  // namespace qduality
