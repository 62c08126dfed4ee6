#include "msnlab/report.hpp"

#include <cstdio>
#include <cstdlib>

namespace msnlab::report {

double round6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::strtod(buf, nullptr);
}

nlohmann::json num(double v) { return round6(v); }

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace msnlab::report
