#pragma once

#include "hodge/decompose.hpp"

#include <json.hpp>

#include <string>

namespace hodge {

inline constexpr const char* diagnostics_schema = "hodge-diagnostics/1";

/// Deterministic JSON text: keys in sorted order, two-space indent, every floating-point
/// number with 17 significant digits, non-finite numbers as null.
std::string json_text(const nlohmann::json& value);

/// Gram matrix, norms, Betti numbers, gauge and augmentation choices and solver reports of
/// a decomposition. Wall-clock data is collected under the single "timing" key.
nlohmann::json decomposition_json(const Decomposition& d, const OperatorSet& ops);

} // namespace hodge
