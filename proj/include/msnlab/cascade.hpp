#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "msnlab/records.hpp"

namespace msnlab::cascade {

using records::PostViewRecord;

// Directed influence graph with per-edge activation probabilities.
// Nodes are kept sorted ascending; all iteration orders derive from that,
// which is what makes every consumer deterministic.
class IcGraph {
 public:
  struct Edge {
    int to = 0;
    double p = 0.0;
  };

  IcGraph() = default;

  // Edges as (u, v, p). Extra isolated nodes may be supplied separately.
  static IcGraph from_edges(
      std::span<const std::tuple<std::string, std::string, double>> edges,
      std::span<const std::string> extra_nodes = {});

  int node_count() const { return static_cast<int>(ids_.size()); }
  int edge_count() const { return edge_count_; }
  const std::vector<std::string>& node_ids() const { return ids_; }
  const std::string& id_of(int index) const { return ids_[index]; }
  // -1 when the id is unknown.
  int index_of(const std::string& id) const;
  const std::vector<Edge>& out_edges(int node) const { return out_[node]; }

  std::set<int> to_indices(const std::set<std::string>& ids) const;

 private:
  std::vector<std::string> ids_;       // ascending
  std::vector<std::vector<Edge>> out_; // per node, sorted by target
  int edge_count_ = 0;
};

// p(u,v) = reposted-after-viewing pages / pages viewed from u, counted over
// distinct pids. With laplace_alpha > 0 the ratio becomes
// (reposts + a) / (views + 2a).
IcGraph estimate_edge_probabilities(std::span<const PostViewRecord> recs,
                                    double laplace_alpha = 0.0);

// TSV "u\tv\tp" import/export.
IcGraph read_ic_graph(std::istream& in);
IcGraph read_ic_graph_file(const std::string& path);
void write_ic_graph(std::ostream& out, const IcGraph& g);

// One independent-cascade run: breadth-ordered, each new activation gets a
// single chance per currently-inactive out-neighbor. Deterministic for a
// fixed seed: frontier and neighbors are processed in ascending id order.
std::set<std::string> simulate_cascade(const IcGraph& g,
                                       const std::set<std::string>& seeds,
                                       std::uint64_t seed);
std::vector<int> simulate_cascade_indices(const IcGraph& g,
                                          std::span<const int> seeds,
                                          std::uint64_t seed);

struct SpreadEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::int64_t n_sims = 0;
};

// Monte Carlo spread: run seeds are derived from (seed, run index), so the
// estimate is identical for any worker count.
SpreadEstimate sigma(const IcGraph& g, const std::set<std::string>& seeds,
                     std::int64_t n_sims, std::uint64_t seed, int threads = 1);
SpreadEstimate sigma_indices(const IcGraph& g, std::span<const int> seeds,
                             std::int64_t n_sims, std::uint64_t seed,
                             int threads = 1);

// Exact expected spread by enumerating every live-edge realization.
// Guarded at 20 edges.
double sigma_exact(const IcGraph& g, const std::set<std::string>& seeds);
double sigma_exact_indices(const IcGraph& g, std::span<const int> seeds);

// Shares one realization sweep across many seed sets; used by sweeps that
// need exact spreads of every candidate set on the same graph.
std::vector<double> sigma_exact_batch(const IcGraph& g,
                                      std::span<const std::vector<int>> sets);

}  // namespace msnlab::cascade
