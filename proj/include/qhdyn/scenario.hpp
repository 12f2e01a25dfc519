#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhdyn/io.hpp"
#include "qhdyn/symcore.hpp"

namespace qhdyn {

// Configuration problem; message carries the field path and, when it can be
// located, the line in the source text.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WignerRequest {
  double extent = 4.0;  // half-width of the square slice around the centre
  int points = 41;
};

struct MatrixElementRequest {
  Vec z, X;
};

struct OutputRequest {
  bool flow = false;
  bool state_path = false;
  std::optional<WignerRequest> wigner;
  bool symbol = false;
  bool index = false;
  std::vector<MatrixElementRequest> matrix_elements;
  std::string verify;  // "", "quick" or "full"
};

struct Scenario {
  int version = 1;
  int n = 1;
  double hbar = 1.0;
  std::string kind = "harmonic";  // harmonic | free | inverted | constant | piecewise
  HamiltonianBlocks blocks;       // kind == constant
  std::vector<double> starts;     // kind == piecewise
  std::vector<HamiltonianBlocks> pieces;
  double t0 = 0.0, t1 = 1.0;
  int nodes = 65;
  Vec z;                        // initial centre
  std::optional<CMat> gamma;    // initial Siegel matrix; coherent when absent
  OutputRequest outputs;

  QuadraticHamiltonian hamiltonian() const;
  GaussianState initial_state() const;
};

inline constexpr int kScenarioVersion = 1;

struct Tolerances {
  double symplectic = 1e-9;  // per-node ‖FᵀJF − J‖∞ / max(1, ‖F‖∞²)
  double symmetry = 1e-12;   // asymmetry allowed in G and K; accepted blocks are symmetrized
};

// Validates the whole document before returning; unknown keys are errors.
Scenario parse_scenario(const std::string& text, const Tolerances& tol = {});
Scenario load_scenario(const std::filesystem::path& file, const Tolerances& tol = {});
json serialize(const Scenario& s);

struct RunReport {
  json manifest;
  bool pass = true;
};

// Writes the requested artifacts and manifest.json into outdir.
RunReport run_scenario(const Scenario& s, const std::filesystem::path& outdir,
                       const Tolerances& tol = {});

// Metaplectic data at the end of the scenario's flow (ħ-independent).
json index_report(const Scenario& s);
json symbol_report(const Scenario& s);

}  // namespace qhdyn
