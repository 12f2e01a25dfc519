#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qhdyn/coherent.hpp"
#include "qhdyn/metaplectic.hpp"
#include "qhdyn/weylq.hpp"

namespace qhdyn {

using json = nlohmann::ordered_json;

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

// Row-major nested arrays.
json matrix_to_json(const Mat& A);
Mat matrix_from_json(const json& j, const std::string& field);
json vector_to_json(const Vec& v);
Vec vector_from_json(const json& j, const std::string& field);

json to_json(const IndexResult& r);
json to_json(const GaussianSymbol& s);
json to_json(const GaussianState& s);
GaussianState state_from_json(const json& j);

// t, F entries row-major, arg det(A + iB)
void write_path_csv(std::ostream& os, const SymplecticPath& path);
// t, Re δ, Im δ, accumulated arg
void write_winding_csv(std::ostream& os, const IndexResult& r);
// t, q…, p…, Re a, Im a, then the plain amplitude ratio b_t/b_0
void write_state_path_csv(std::ostream& os, const std::vector<double>& t,
                          const std::vector<GaussianState>& states);
// Leading "# N=… L=… dx=… hbar=…" line, then x, Re, Im (n = 1).
void write_wavefunction_csv(std::ostream& os, const GridWavefunction& psi);
GridWavefunction read_wavefunction_csv(std::istream& is);
// q, p, W on a square (q₁, p₁) slice through the state centre.
void write_wigner_csv(std::ostream& os, const GaussianState& s, double extent, int points);

// Column documentation for every CSV artifact.
std::string csv_schema();

}  // namespace qhdyn
