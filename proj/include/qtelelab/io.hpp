#pragma once

#include "qtelelab/qcore.hpp"

#include <json.hpp>

#include <string>

namespace qtl {

/// {"n": n, "re": [row-major], "im": [row-major]}
nlohmann::json matrix_to_json(const Mat& m);
Mat matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DensityOperator& rho);
/// Validates Hermiticity and trace.
DensityOperator density_from_json(const nlohmann::json& j);

/// Data files compiled into the library: "reference_values.json", "fixtures/<name>.json".
const std::string& embedded_file(const std::string& path);
bool has_embedded_file(const std::string& path);
const nlohmann::json& reference_values();
/// Printed matrix by fixture name (e.g. "psi_plus_0"); rounded, so returned as a raw matrix.
Mat fixture_matrix(const std::string& name);

}  // namespace qtl
