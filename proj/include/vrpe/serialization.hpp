#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "vrpe/bounds.hpp"
#include "vrpe/mrp.hpp"

namespace vrpe {

using Json = nlohmann::json;

/// {D, gamma, P, R} with row-major matrices; doubles round-trip exactly.
Json instance_to_json(const MrpInstance& instance);
MrpInstance instance_from_json(const Json& j);

/// {d, D, Psi} with Psi row-major.
Json features_to_json(const Matrix& Psi);
Matrix features_from_json(const Json& j);

/// {kind, omega, sigma, M_tilde, trace, truncation_lag, truncation_error_bound}.
Json bundle_to_json(const CovarianceBundle& bundle);
CovarianceBundle bundle_from_json(const Json& j);

Json matrix_to_json(const Matrix& A);
Matrix matrix_from_json(const Json& j, Index rows, Index cols);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Shortest decimal string that parses back to exactly x.
std::string format_double(double x);

}  // namespace vrpe
