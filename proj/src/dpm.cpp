#include "msnlab/dpm.hpp"

#include <algorithm>
#include <cmath>

#include "msnlab/errors.hpp"
#include "msnlab/rng.hpp"

namespace msnlab::geo {

namespace {

struct Component {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
  std::int64_t members = 0;
};

// Log Dirichlet-multinomial predictive of observation x under a component
// with accumulated counts. The multinomial coefficient of x is constant
// across components and omitted.
double log_predictive(const std::vector<std::pair<int, std::int64_t>>& x,
                      std::int64_t x_total, const Component& comp, double beta,
                      int dims) {
  const double a_total = static_cast<double>(comp.total) + beta * dims;
  double lp = std::lgamma(a_total) -
              std::lgamma(a_total + static_cast<double>(x_total));
  for (const auto& [r, c] : x) {
    const double base = static_cast<double>(comp.counts[r]) + beta;
    lp += std::lgamma(base + static_cast<double>(c)) - std::lgamma(base);
  }
  return lp;
}

}  // namespace

DpmResult dpm_fit(std::span<const std::vector<std::int64_t>> observations,
                  const DpmConfig& config) {
  if (observations.empty()) throw EmptyInputError("no observations");
  if (config.alpha <= 0.0) throw InvalidConfigError("alpha must be > 0");
  if (config.truncation < 1)
    throw InvalidConfigError("truncation must be >= 1");
  if (config.iterations < 1)
    throw InvalidConfigError("iterations must be >= 1");

  const int n = static_cast<int>(observations.size());
  const int dims = static_cast<int>(observations[0].size());
  if (dims == 0) throw EmptyInputError("observations have no dimensions");
  for (const auto& obs : observations) {
    if (static_cast<int>(obs.size()) != dims) {
      throw InputError("observation vectors have mixed lengths");
    }
  }

  std::vector<std::vector<std::pair<int, std::int64_t>>> sparse(n);
  std::vector<std::int64_t> obs_total(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < dims; ++r) {
      if (observations[i][r] > 0) {
        sparse[i].emplace_back(r, observations[i][r]);
        obs_total[i] += observations[i][r];
      }
    }
  }

  std::vector<Component> comps;
  std::vector<int> assign(n, -1);
  const Component empty{std::vector<std::int64_t>(dims, 0), 0, 0};

  auto add_to = [&](int i, int k) {
    auto& comp = comps[k];
    for (const auto& [r, c] : sparse[i]) comp.counts[r] += c;
    comp.total += obs_total[i];
    ++comp.members;
    assign[i] = k;
  };
  auto remove_from = [&](int i) {
    const int k = assign[i];
    auto& comp = comps[k];
    for (const auto& [r, c] : sparse[i]) comp.counts[r] -= c;
    comp.total -= obs_total[i];
    --comp.members;
    assign[i] = -1;
    if (comp.members == 0) {
      comps.erase(comps.begin() + k);
      for (auto& a : assign) {
        if (a > k) --a;
      }
    }
  };

  auto rng = make_rng(config.seed);
  std::vector<double> logp;
  std::vector<double> prob;
  logp.reserve(config.truncation + 1);
  prob.reserve(config.truncation + 1);

  // The first sweep doubles as sequential initialization: observations are
  // placed one by one from their CRP conditionals.
  for (int sweep = 0; sweep < config.iterations; ++sweep) {
    for (int i = 0; i < n; ++i) {
      if (assign[i] >= 0) remove_from(i);

      logp.clear();
      for (const auto& comp : comps) {
        logp.push_back(std::log(static_cast<double>(comp.members)) +
                       log_predictive(sparse[i], obs_total[i], comp,
                                      config.base_beta, dims));
      }
      const bool can_open =
          static_cast<int>(comps.size()) < config.truncation;
      if (can_open) {
        logp.push_back(std::log(config.alpha) +
                       log_predictive(sparse[i], obs_total[i], empty,
                                      config.base_beta, dims));
      }

      const double mx = *std::max_element(logp.begin(), logp.end());
      prob.clear();
      double total = 0.0;
      for (double lp : logp) {
        total += std::exp(lp - mx);
        prob.push_back(total);
      }
      const double draw = uniform01(rng) * total;
      int k = 0;
      while (k + 1 < static_cast<int>(prob.size()) && draw >= prob[k]) ++k;

      if (can_open && k == static_cast<int>(comps.size())) {
        comps.push_back(empty);
      }
      add_to(i, k);
    }
  }

  // Relabel by first occurrence so the labels are independent of the
  // erase/compact history above.
  std::vector<int> relabel(comps.size(), -1);
  int next = 0;
  DpmResult result;
  result.assignments.resize(n);
  for (int i = 0; i < n; ++i) {
    int& label = relabel[assign[i]];
    if (label < 0) label = next++;
    result.assignments[i] = label;
  }
  result.profiles.assign(next, {});
  result.component_sizes.assign(next, 0);
  for (std::size_t k = 0; k < comps.size(); ++k) {
    if (relabel[k] < 0) continue;
    const auto& comp = comps[k];
    std::vector<double> profile(dims, 0.0);
    const double denom =
        static_cast<double>(comp.total) + config.base_beta * dims;
    for (int r = 0; r < dims; ++r) {
      profile[r] = (static_cast<double>(comp.counts[r]) + config.base_beta) /
                   denom;
    }
    result.profiles[relabel[k]] = std::move(profile);
    result.component_sizes[relabel[k]] = comp.members;
  }
  return result;
}

}  // namespace msnlab::geo
