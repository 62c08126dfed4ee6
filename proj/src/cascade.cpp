#include "msnlab/cascade.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "msnlab/parallel.hpp"
#include "msnlab/rng.hpp"

namespace msnlab::cascade {

IcGraph IcGraph::from_edges(
    std::span<const std::tuple<std::string, std::string, double>> edges,
    std::span<const std::string> extra_nodes) {
  IcGraph g;
  std::set<std::string> ids;
  for (const auto& [u, v, p] : edges) {
    if (u == v) throw InputError("self-loop edge: " + u);
    if (p < 0.0 || p > 1.0)
      throw InputError("edge probability out of [0,1]: " + u + " -> " + v);
    ids.insert(u);
    ids.insert(v);
  }
  for (const auto& n : extra_nodes) ids.insert(n);
  g.ids_.assign(ids.begin(), ids.end());
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(g.ids_.size()); ++i)
    index[g.ids_[i]] = i;
  g.out_.resize(g.ids_.size());
  std::map<std::pair<int, int>, double> dedup;
  for (const auto& [u, v, p] : edges) dedup[{index[u], index[v]}] = p;
  for (const auto& [key, p] : dedup) {
    g.out_[key.first].push_back(Edge{key.second, p});
    ++g.edge_count_;
  }
  return g;
}

int IcGraph::index_of(const std::string& id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return -1;
  return static_cast<int>(it - ids_.begin());
}

std::set<int> IcGraph::to_indices(const std::set<std::string>& ids) const {
  std::set<int> out;
  for (const auto& id : ids) {
    const int i = index_of(id);
    if (i < 0) throw UnknownSeedNodeError("unknown node: " + id);
    out.insert(i);
  }
  return out;
}

IcGraph estimate_edge_probabilities(std::span<const PostViewRecord> recs,
                                    double laplace_alpha) {
  // Earliest view of v from u per page, and the last time v owned a view
  // of the page (evidence that v had reposted it).
  std::map<std::tuple<std::string, std::string, std::string>, std::int64_t>
      first_view;  // (u, v, pid) -> min t
  std::unordered_map<std::string, std::int64_t> last_owned;  // v \x1f pid
  std::set<std::string> users;
  for (const auto& r : recs) {
    users.insert(r.u1);
    users.insert(r.u2);
    const std::string owned = r.u1 + '\x1f' + r.pid;
    auto [it, fresh] = last_owned.emplace(owned, r.t);
    if (!fresh && r.t > it->second) it->second = r.t;
    if (r.u1 == r.u2) continue;
    auto key = std::make_tuple(r.u1, r.u2, r.pid);
    auto [vit, vfresh] = first_view.emplace(key, r.t);
    if (!vfresh && r.t < vit->second) vit->second = r.t;
  }

  std::map<std::pair<std::string, std::string>, std::pair<int, int>>
      tally;  // (u, v) -> (views, reposts)
  for (const auto& [key, t0] : first_view) {
    const auto& [u, v, pid] = key;
    auto& [views, reposts] = tally[{u, v}];
    ++views;
    auto it = last_owned.find(v + '\x1f' + pid);
    if (it != last_owned.end() && it->second > t0) ++reposts;
  }

  std::vector<std::tuple<std::string, std::string, double>> edges;
  edges.reserve(tally.size());
  for (const auto& [uv, counts] : tally) {
    const double p =
        (counts.second + laplace_alpha) / (counts.first + 2.0 * laplace_alpha);
    edges.emplace_back(uv.first, uv.second, p);
  }
  std::vector<std::string> extra(users.begin(), users.end());
  return IcGraph::from_edges(edges, extra);
}

IcGraph read_ic_graph(std::istream& in) {
  std::vector<std::tuple<std::string, std::string, double>> edges;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string u, v;
    double p;
    if (!(ss >> u >> v >> p)) {
      throw InputError("graph line " + std::to_string(lineno) +
                       ": expected 'u v p'");
    }
    edges.emplace_back(u, v, p);
  }
  return IcGraph::from_edges(edges);
}

IcGraph read_ic_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file: " + path);
  return read_ic_graph(in);
}

void write_ic_graph(std::ostream& out, const IcGraph& g) {
  char buf[32];
  for (int u = 0; u < g.node_count(); ++u) {
    for (const auto& e : g.out_edges(u)) {
      std::snprintf(buf, sizeof(buf), "%.17g", e.p);
      out << g.id_of(u) << '\t' << g.id_of(e.to) << '\t' << buf << '\n';
    }
  }
}

std::vector<int> simulate_cascade_indices(const IcGraph& g,
                                          std::span<const int> seeds,
                                          std::uint64_t seed) {
  std::vector<char> active(g.node_count(), 0);
  std::vector<int> frontier(seeds.begin(), seeds.end());
  std::sort(frontier.begin(), frontier.end());
  frontier.erase(std::unique(frontier.begin(), frontier.end()),
                 frontier.end());
  std::vector<int> result = frontier;
  for (int s : frontier) active[s] = 1;

  auto rng = make_rng(seed);
  std::vector<int> next;
  while (!frontier.empty()) {
    next.clear();
    for (int u : frontier) {
      for (const auto& e : g.out_edges(u)) {
        if (active[e.to]) continue;
        if (uniform01(rng) < e.p) {
          active[e.to] = 1;
          next.push_back(e.to);
        }
      }
    }
    std::sort(next.begin(), next.end());
    frontier = next;
    result.insert(result.end(), next.begin(), next.end());
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::set<std::string> simulate_cascade(const IcGraph& g,
                                       const std::set<std::string>& seeds,
                                       std::uint64_t seed) {
  const auto idx = g.to_indices(seeds);
  std::vector<int> v(idx.begin(), idx.end());
  std::set<std::string> out;
  for (int i : simulate_cascade_indices(g, v, seed)) out.insert(g.id_of(i));
  return out;
}

SpreadEstimate sigma_indices(const IcGraph& g, std::span<const int> seeds,
                             std::int64_t n_sims, std::uint64_t seed,
                             int threads) {
  if (n_sims < 1) throw InputError("n_sims must be >= 1");
  std::vector<std::int32_t> sizes(n_sims);
  parallel_for(n_sims, threads, [&](std::int64_t i) {
    sizes[i] = static_cast<std::int32_t>(
        simulate_cascade_indices(g, seeds, derive_seed(seed, i)).size());
  });
  std::int64_t sum = 0, sumsq = 0;
  for (auto s : sizes) {
    sum += s;
    sumsq += static_cast<std::int64_t>(s) * s;
  }
  SpreadEstimate est;
  est.n_sims = n_sims;
  est.mean = static_cast<double>(sum) / static_cast<double>(n_sims);
  if (n_sims > 1) {
    const double var =
        (static_cast<double>(sumsq) -
         static_cast<double>(n_sims) * est.mean * est.mean) /
        static_cast<double>(n_sims - 1);
    est.std_err = std::sqrt(std::max(0.0, var) / static_cast<double>(n_sims));
  }
  return est;
}

SpreadEstimate sigma(const IcGraph& g, const std::set<std::string>& seeds,
                     std::int64_t n_sims, std::uint64_t seed, int threads) {
  const auto idx = g.to_indices(seeds);
  std::vector<int> v(idx.begin(), idx.end());
  return sigma_indices(g, v, n_sims, seed, threads);
}

namespace {

// Enumeration core. Nodes touched by any edge form the enumeration
// universe (at most 40 for 20 edges); everything else is inert and seeds
// outside the universe just add themselves.
struct ExactEnumerator {
  const IcGraph& g;
  std::vector<int> universe;               // graph node -> dense slot, or -1
  std::vector<int> slot_of;                // dense slot -> graph node
  struct DenseEdge {
    int from, to;
    double p;
  };
  std::vector<DenseEdge> uncertain;        // 0 < p < 1
  std::vector<std::uint64_t> base_adj;     // p == 1 edges, always live

  explicit ExactEnumerator(const IcGraph& graph) : g(graph) {
    if (g.edge_count() > 20)
      throw TooManyEdgesError("exact spread is guarded at 20 edges, got " +
                              std::to_string(g.edge_count()));
    universe.assign(g.node_count(), -1);
    for (int u = 0; u < g.node_count(); ++u) {
      for (const auto& e : g.out_edges(u)) {
        if (universe[u] < 0) {
          universe[u] = static_cast<int>(slot_of.size());
          slot_of.push_back(u);
        }
        if (universe[e.to] < 0) {
          universe[e.to] = static_cast<int>(slot_of.size());
          slot_of.push_back(e.to);
        }
      }
    }
    base_adj.assign(slot_of.size(), 0);
    for (int u = 0; u < g.node_count(); ++u) {
      for (const auto& e : g.out_edges(u)) {
        if (e.p >= 1.0) {
          base_adj[universe[u]] |= 1ull << universe[e.to];
        } else if (e.p > 0.0) {
          uncertain.push_back(DenseEdge{universe[u], universe[e.to], e.p});
        }
        // p == 0 edges can never fire and are dropped.
      }
    }
  }

  static std::uint64_t closure(std::uint64_t seeds,
                               const std::vector<std::uint64_t>& adj) {
    std::uint64_t reached = seeds, frontier = seeds;
    while (frontier) {
      const int v = std::countr_zero(frontier);
      frontier &= frontier - 1;
      const std::uint64_t fresh = adj[v] & ~reached;
      reached |= fresh;
      frontier |= fresh;
    }
    return reached;
  }

  // Expected reached-count inside the universe for each seed mask.
  std::vector<double> run(std::span<const std::uint64_t> seed_masks) const {
    std::vector<double> acc(seed_masks.size(), 0.0);
    const int m = static_cast<int>(uncertain.size());
    std::vector<std::uint64_t> adj(base_adj.size());
    for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
      adj = base_adj;
      double prob = 1.0;
      for (int i = 0; i < m; ++i) {
        if (mask & (1ull << i)) {
          adj[uncertain[i].from] |= 1ull << uncertain[i].to;
          prob *= uncertain[i].p;
        } else {
          prob *= 1.0 - uncertain[i].p;
        }
      }
      if (prob == 0.0) continue;
      for (std::size_t s = 0; s < seed_masks.size(); ++s) {
        acc[s] += prob *
                  static_cast<double>(std::popcount(closure(seed_masks[s], adj)));
      }
    }
    return acc;
  }

  std::uint64_t seed_mask(std::span<const int> seeds, int& outside) const {
    std::uint64_t mask = 0;
    outside = 0;
    for (int s : seeds) {
      if (universe[s] >= 0) {
        mask |= 1ull << universe[s];
      } else {
        ++outside;
      }
    }
    return mask;
  }
};

}  // namespace

double sigma_exact_indices(const IcGraph& g, std::span<const int> seeds) {
  std::vector<int> unique(seeds.begin(), seeds.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  const ExactEnumerator en(g);
  int outside = 0;
  const std::uint64_t mask = en.seed_mask(unique, outside);
  const std::uint64_t masks[1] = {mask};
  return en.run(masks)[0] + static_cast<double>(outside);
}

double sigma_exact(const IcGraph& g, const std::set<std::string>& seeds) {
  const auto idx = g.to_indices(seeds);
  std::vector<int> v(idx.begin(), idx.end());
  return sigma_exact_indices(g, v);
}

std::vector<double> sigma_exact_batch(const IcGraph& g,
                                      std::span<const std::vector<int>> sets) {
  const ExactEnumerator en(g);
  std::vector<std::uint64_t> masks(sets.size());
  std::vector<int> outside(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    masks[i] = en.seed_mask(sets[i], outside[i]);
  }
  auto acc = en.run(masks);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    acc[i] += static_cast<double>(outside[i]);
  }
  return acc;
}

}  // namespace msnlab::cascade
