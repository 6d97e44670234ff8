#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "dosskit/doss.hpp"

namespace dosskit {

using AnyPlan = std::variant<SelectPlan, WeightPlan>;

/// Plan payload as JSON text:
///   {"kind": "select"|"weight", "params": {...}, "counts"|"weights": {...},
///    "warnings": [...]}
/// Domains appear in key order ("fake/..." before "real/...").
std::string plan_to_json(const SelectPlan& plan, int indent = 2);
std::string plan_to_json(const WeightPlan& plan, int indent = 2);

/// Accepts a bare payload or a document holding it under "plan".
AnyPlan plan_from_json(std::string_view text);

}  // namespace dosskit
