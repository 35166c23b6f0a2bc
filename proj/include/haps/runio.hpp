#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace haps {

/// Write text to path atomically (temp file + rename); partial runs never
/// leave a complete-looking artifact behind.
void atomic_write(const std::string& path, const std::string& text);

std::string csv_row(const std::vector<std::string>& cells);

nlohmann::json complex_matrix_json(const Eigen::MatrixXcd& m);  // [re, im] pairs
Eigen::MatrixXcd complex_matrix_from_json(const nlohmann::json& j);

/// Stable run id from the inputs that determine the outputs.
std::string run_id(const std::string& scenario_text, const std::string& command);

/// Deterministic parallel map: f(i) for i in [0, n), merged by index.
void parallel_for_indexed(int n, int jobs, const std::function<void(int)>& f);

}  // namespace haps
