#include <Eigen/Core>
#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "qhdyn/checks.hpp"
#include "qhdyn/scenario.hpp"

namespace {

constexpr int kExitFailedChecks = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void apply_thread_env() {
  if (const char* v = std::getenv("QHDYN_THREADS")) {
    int n = std::atoi(v);
    if (n > 0) Eigen::setNbThreads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();
  CLI::App app{"Quadratic Hamiltonian dynamics: flows, Gaussian states, metaplectic symbols"};
  app.require_subcommand(0, 1);
  bool schema = false;
  app.add_flag("--schema", schema, "Print the CSV column documentation and exit");

  std::string config, outdir;
  auto* run = app.add_subcommand("run", "Run a scenario and write artifacts");
  run->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", outdir, "Output directory")->required();
  qhdyn::Tolerances tol;
  run->add_option("--symplectic-tol", tol.symplectic, "Per-node symplecticity tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--symmetry-tol", tol.symmetry, "Symmetry tolerance for G and K")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  bool full = false, json_out = false, mutate = false;
  std::uint64_t seed = qhdyn::kDefaultSeed;
  std::vector<int> only;
  auto* verify = app.add_subcommand("verify", "Run the acceptance criteria");
  verify->add_flag("--full", full, "Full-size criteria instead of the quick level");
  verify->add_option("--seed", seed, "Seed for randomized criteria");
  verify->add_option("--only", only, "Criterion ids to run")->delimiter(',');
  verify->add_flag("--json", json_out, "Emit a JSON report on stdout");
  verify->add_flag("--mutate-principal-branch", mutate,
                   "Use principal square roots in state propagation (mutation check)")
      ->group("");

  auto* index = app.add_subcommand("index", "Winding index of the scenario flow");
  index->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  auto* symbol = app.add_subcommand("symbol", "Weyl symbols of the scenario flow endpoint");
  symbol->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  if (schema) {
    std::cout << qhdyn::csv_schema();
    return 0;
  }
  try {
    if (*run) {
      qhdyn::RunReport rep = qhdyn::run_scenario(qhdyn::load_scenario(config, tol), outdir, tol);
      std::cout << rep.manifest.dump(2) << "\n";
      return rep.pass ? 0 : kExitFailedChecks;
    }
    if (*index) {
      std::cout << qhdyn::index_report(qhdyn::load_scenario(config)).dump(2) << "\n";
      return 0;
    }
    if (*symbol) {
      std::cout << qhdyn::symbol_report(qhdyn::load_scenario(config)).dump(2) << "\n";
      return 0;
    }
    if (*verify) {
      qhdyn::CheckOptions opt;
      opt.full = full;
      opt.seed = seed;
      opt.only = only;
      opt.principal_branch = mutate;
      auto print = [&](const qhdyn::CheckResult& r) {
        if (json_out) return;
        std::printf("%s %2d %-18s %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str(), r.seconds);
        std::fflush(stdout);
      };
      std::vector<qhdyn::CheckResult> results = qhdyn::run_checks(opt, print);
      std::string failed;
      qhdyn::json arr = qhdyn::json::array();
      for (const auto& r : results) {
        arr.push_back(qhdyn::to_json(r));
        if (!r.pass) failed += (failed.empty() ? "" : ", ") + r.name;
      }
      if (json_out)
        std::cout << qhdyn::json{{"level", full ? "full" : "quick"}, {"seed", seed}, {"checks", arr}}
                         .dump(2)
                  << "\n";
      if (!failed.empty()) {
        std::cerr << "failed: " << failed << "\n";
        return kExitFailedChecks;
      }
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const qhdyn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qhdyn::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
