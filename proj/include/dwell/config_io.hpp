#pragma once

#include <string>

#include "dwell/potential.hpp"

namespace dwell {

// JSON model config, the schema the CLI consumes:
//   {"v": [v1, v2, v3, v4], "x1": ..., "D": ..., "w_outer": ..., "w_barrier": ...}
// Parse errors and invalid parameters throw std::invalid_argument.
DoubleWellParams params_from_json_text(const std::string& text);
DoubleWellParams params_from_json_file(const std::string& path);
std::string params_to_json_text(const DoubleWellParams& params);

}  // namespace dwell
