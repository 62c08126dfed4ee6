#pragma once

#include <string>

#include <json.hpp>

namespace msnlab::report {

// Reports carry floats rounded to six significant digits so a rerun with
// the same seed and inputs emits identical bytes.
double round6(double v);
nlohmann::json num(double v);

// Two-space indent, trailing newline; nlohmann/json keeps keys sorted.
std::string dump(const nlohmann::json& j);

}  // namespace msnlab::report
