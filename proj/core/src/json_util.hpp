#pragma once

#include <cmath>

#include <json.hpp>

#include "shiftdiv/divergence.hpp"

namespace shiftdiv::detail {

using json = nlohmann::json;

// JSON has no inf/nan; such values are written as null.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const DivergenceReport& r) {
  return json{{"acc_self", r.acc_self},
              {"acc_cross", r.acc_cross},
              {"divergence", r.divergence},
              {"direction", to_string(r.direction)},
              {"clamped", r.clamped}};
}

}  // namespace shiftdiv::detail
