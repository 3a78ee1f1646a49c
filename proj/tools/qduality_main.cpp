// qduality: scenario runner and verification harness.
//
//   qduality run <config.yaml> [--out DIR] [--seed N] [--mutate ID]
//   qduality verify <quick|full> [--out DIR] [--seed N] [--mutate ID]
//
// Exit status: 0 all checks pass, 1 a check failed, 2 configuration error.
// QDUALITY_OUT sets the output directory when --out is not given.
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qduality/errors.hpp"
#include "qduality/mutation.hpp"
#include "qduality/scenario.hpp"
#include "qduality/verification.hpp"

namespace fs = std::filesystem;
using namespace qduality;

namespace {

constexpr int kOk = 0, kCheckFailed = 1, kConfigError = 2;

fs::path output_dir(const std::optional<std::string>& flag, const std::string& fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QDUALITY_OUT"); env && *env) return env;
  return fs::path("qduality_out") / fallback;
}

void print_check(const Check& c) {
  std::cout << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << ": " << c.measured << " (tol " << c.tolerance << ")\n";
}

int do_run(const std::string& config, const std::optional<std::string>& out, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = load_scenario(config);
  if (seed) cfg.seed = *seed;
  const fs::path dir = output_dir(out, cfg.name);
  const RunResult r = run_scenario(cfg, dir);
  std::cout << "scenario " << cfg.name << " (seed " << cfg.seed << ") -> " << dir.string() << "\n";
  for (const Check& c : r.checks) print_check(c);
  std::cout << (r.pass() ? "all checks passed" : "CHECK FAILURE") << std::endl;
  return r.pass() ? kOk : kCheckFailed;
}

int do_verify(const std::string& suite_name, const std::optional<std::string>& out, std::optional<std::uint64_t> seed) {
  const auto suite = parse_suite(suite_name);
  if (!suite) throw ConfigError("unknown suite '" + suite_name + "' (quick, full)");
  VerifyOptions opt;
  if (seed) opt.seed = *seed;
  const VerificationReport rep = verify(*suite, opt);
  for (const CriterionResult& c : rep.criteria) {
    std::cout << summary_line(c) << "\n";
    if (!c.pass())
      for (const Check& ch : c.checks)
        if (!ch.pass) print_check(ch);
  }
  for (const ConvergenceTable& t : rep.convergence) {
    std::cout << (t.pass ? "conv PASS  " : "conv FAIL  ") << t.name << " (expected order " << t.expected << ")\n";
    for (const ConvergenceRow& row : t.rows)
      std::cout << "    " << t.variable << " = " << std::setw(10) << row.step << "   error = " << std::setw(12)
                << row.error << "   order = " << row.order << "\n";
  }
  const fs::path dir = output_dir(out, "verify_" + suite_name);
  fs::create_directories(dir);
  std::ofstream(dir / "verification_report.json") << rep.to_json() << "\n";
  std::cout << (rep.pass() ? "verify " + suite_name + ": all passed" : "verify " + suite_name + ": FAILED")
            << "  (report: " << (dir / "verification_report.json").string() << ")" << std::endl;
  return rep.pass() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpuscular/wave duality checks for the 1D Schroedinger equation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::string mutate;
  app.add_option("--out", out, "output directory (overrides $QDUALITY_OUT)");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--mutate", mutate, "inject a known defect: hw_sign, gradient_scale, kinetic_form_c, forward_time_diff");

  std::string config, suite;
  CLI::App* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config, "scenario YAML file")->required();
  CLI::App* ver = app.add_subcommand("verify", "run the acceptance suite");
  ver->add_option("suite", suite, "quick | full")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (!mutate.empty()) {
      const auto m = parse_mutation(mutate);
      if (!m) throw ConfigError("unknown mutation '" + mutate + "'");
      set_active_mutation(*m);
      std::cerr << "mutation mode: " << to_string(*m) << "\n";
    }
    if (*run) return do_run(config, out, seed);
    return do_verify(suite, out, seed);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << std::endl;
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kCheckFailed;
  }
}
