#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "msnlab/cascade.hpp"
#include "msnlab/diffusion.hpp"

namespace msnlab::influence {

using cascade::IcGraph;

struct VotingParams {
  int k = 100;
  int r1 = 500;
  std::int64_t r2 = 100000;
  std::uint64_t seed = 20160114;
  bool uniform_root = false;  // ablation: drop the major-tree bias
  int threads = 1;
};

struct VoteTally {
  std::map<std::string, std::int64_t> votes;  // zero-vote users omitted
  int trees_sampled = 0;
};

// A live-edge realization of the graph: every edge kept independently with
// its activation probability.
struct LiveEdgeRealization {
  std::vector<std::vector<int>> adj;
};

LiveEdgeRealization sample_live_edges(const IcGraph& g, std::uint64_t seed);

// Reachable-set size of every node within a realization.
std::vector<std::int64_t> reach_sizes(const LiveEdgeRealization& real);

// Internal integer form of a sampled tree.
struct SampledTree {
  int root = -1;
  std::vector<int> parent;  // graph-indexed, -1 when absent or root
  std::vector<int> nodes;   // members, ascending
};

// Draws a realization, picks the root with probability proportional to its
// reachable-set size (uniformly when uniform_root), and returns the
// breadth-first tree from that root.
SampledTree sample_tree_indices(const IcGraph& g, std::uint64_t seed,
                                bool uniform_root = false);
diffusion::DiffusionForest sample_diffusion_tree(const IcGraph& g,
                                                 std::uint64_t seed,
                                                 bool uniform_root = false);

// r2 rounds of: draw a tree node uniformly, give one vote to each of its
// proper ancestors.
VoteTally vote_on_tree(const diffusion::DiffusionForest& tree, std::int64_t r2,
                       std::uint64_t seed);

// Sums tree tallies over r1 sampled trees and returns the k top-voted
// users, ties broken by ascending user id.
std::pair<std::set<std::string>, VoteTally> voting_select(
    const IcGraph& g, const VotingParams& params);

// Spread evaluator over a sorted, duplicate-free index set.
using SigmaEvaluator = std::function<double(const std::vector<int>&)>;

SigmaEvaluator exact_evaluator(const IcGraph& g);
SigmaEvaluator mc_evaluator(const IcGraph& g, std::int64_t n_sims,
                            std::uint64_t seed, int threads = 1);

// CELF lazy greedy. With an exact evaluator this matches naive greedy,
// including the ascending-id tie rule.
std::set<std::string> greedy_select(const IcGraph& g, int k,
                                    const SigmaEvaluator& evaluator);

struct SweepPoint {
  std::int64_t grid_value = 0;
  double sigma_mean = 0.0;
  double sigma_var = 0.0;
};

struct SweepConfig {
  enum class Param { R1, R2 };
  Param param = Param::R1;
  std::vector<std::int64_t> grid;
  VotingParams base;
  int repetitions = 10;
  std::int64_t eval_sims = 1000;
  std::uint64_t eval_seed = 99;  // one fixed evaluation stream for every S
};

// For each grid value: repeat voting_select with independent seeds,
// evaluate sigma of each selected set, report mean and sample variance.
std::vector<SweepPoint> stability_sweep(const IcGraph& g,
                                        const SweepConfig& cfg);

}  // namespace msnlab::influence
