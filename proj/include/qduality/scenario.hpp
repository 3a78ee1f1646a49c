#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qduality/dynamics.hpp"
#include "qduality/grid.hpp"
#include "qduality/potential.hpp"
#include "qduality/verification.hpp"

namespace qduality {

struct GridSpec {
  std::size_t n = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  Boundary boundary = Boundary::Periodic;
  std::optional<DerivativeScheme> scheme;  // defaults by boundary

  Grid build() const { return Grid(n, x_min, x_max, boundary); }
  DerivativeScheme resolved_scheme() const;
};

/// Which outputs a run writes besides the time series and reports.
struct OutputSpec {
  std::vector<std::string> fields;  // see known_fields()
  std::vector<std::size_t> frames;  // sampled frames for field dumps; empty -> first, middle, last
  bool action_report = true;
  bool residual_norms = true;
  std::size_t fd_samples = 0;  // random gradient-oracle sites (periodic grids only)
};

/// Deliberate corruption of one stored frame (negative tests).
struct Perturbation {
  std::size_t frame = 0;
  double scale = 1.0;
};

struct ScenarioConfig {
  std::string name;
  GridSpec grid;
  PhysicalConstants constants;
  PotentialSpec potential;
  InitialStateSpec initial{initial::Gaussian{}};
  PropagatorConfig propagator;
  OutputSpec outputs;
  std::optional<Perturbation> perturbation;
  std::uint64_t seed = kDefaultSeed;
  std::map<std::string, int> lines;  // section -> 1-based line, for diagnostics
};

const std::vector<std::string>& known_fields();

/// Parses and validates a YAML scenario. Every problem is a ConfigError whose
/// message starts with "<source>:<line>:". Unknown keys are errors.
ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Referential checks against the grid (state representable, dt stable, frames in range, ...).
void validate(const ScenarioConfig& cfg);

struct RunResult {
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;
  bool pass() const;
};

/// Propagates, evaluates densities/functionals/residuals, writes every output
/// under out_dir and returns the checks. The report is written even when checks fail.
RunResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace qduality
