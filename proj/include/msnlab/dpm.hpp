#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace msnlab::geo {

struct DpmConfig {
  double alpha = 1.0;     // concentration
  int truncation = 50;    // component cap
  int iterations = 200;   // Gibbs sweeps
  std::uint64_t seed = 20160114;
  double base_beta = 0.5;  // symmetric Dirichlet base measure
};

struct DpmResult {
  // Component label per observation, relabeled by first occurrence so the
  // output is stable across internal bookkeeping.
  std::vector<int> assignments;
  // Posterior mean multinomial profile per component.
  std::vector<std::vector<double>> profiles;
  std::vector<std::int64_t> component_sizes;
};

// Dirichlet process mixture of multinomials over region-count vectors,
// fitted by collapsed Gibbs sampling with the component parameters
// marginalized out. New components stop opening at `truncation`.
DpmResult dpm_fit(std::span<const std::vector<std::int64_t>> observations,
                  const DpmConfig& config);

}  // namespace msnlab::geo
