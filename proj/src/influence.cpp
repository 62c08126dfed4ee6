#include "msnlab/influence.hpp"

#include <algorithm>
#include <mutex>
#include <queue>

#include "msnlab/parallel.hpp"
#include "msnlab/rng.hpp"

namespace msnlab::influence {

LiveEdgeRealization sample_live_edges(const IcGraph& g, std::uint64_t seed) {
  auto rng = make_rng(seed);
  LiveEdgeRealization real;
  real.adj.resize(g.node_count());
  for (int u = 0; u < g.node_count(); ++u) {
    for (const auto& e : g.out_edges(u)) {
      if (uniform01(rng) < e.p) real.adj[u].push_back(e.to);
    }
  }
  return real;
}

std::vector<std::int64_t> reach_sizes(const LiveEdgeRealization& real) {
  const int n = static_cast<int>(real.adj.size());
  std::vector<std::int64_t> sizes(n, 0);
  std::vector<char> seen(n, 0);
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(1, s);
    seen[s] = 1;
    std::int64_t count = 0;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      ++count;
      for (int v : real.adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    sizes[s] = count;
  }
  return sizes;
}

SampledTree sample_tree_indices(const IcGraph& g, std::uint64_t seed,
                                bool uniform_root) {
  if (g.node_count() == 0) throw InputError("graph is empty");
  auto rng = make_rng(seed);
  const auto real = sample_live_edges(g, derive_seed(seed, 0));

  int root;
  if (uniform_root) {
    root = static_cast<int>(uniform_below(rng, g.node_count()));
  } else {
    const auto sizes = reach_sizes(real);
    std::int64_t total = 0;
    for (auto s : sizes) total += s;
    std::int64_t pick =
        static_cast<std::int64_t>(uniform_below(rng, total));
    root = 0;
    for (int v = 0; v < g.node_count(); ++v) {
      pick -= sizes[v];
      if (pick < 0) {
        root = v;
        break;
      }
    }
  }

  SampledTree tree;
  tree.root = root;
  tree.parent.assign(g.node_count(), -1);
  std::vector<char> seen(g.node_count(), 0);
  std::vector<int> frontier{root};
  seen[root] = 1;
  tree.nodes.push_back(root);
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int u : frontier) {
      for (int v : real.adj[u]) {
        if (seen[v]) continue;
        seen[v] = 1;
        tree.parent[v] = u;
        next.push_back(v);
        tree.nodes.push_back(v);
      }
    }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(tree.nodes.begin(), tree.nodes.end());
  return tree;
}

diffusion::DiffusionForest sample_diffusion_tree(const IcGraph& g,
                                                 std::uint64_t seed,
                                                 bool uniform_root) {
  const auto tree = sample_tree_indices(g, seed, uniform_root);

  // Depth doubles as the view time of a sampled node.
  std::vector<std::int64_t> depth(g.node_count(), 0);
  diffusion::DiffusionForest f;
  f.pid = "sampled";
  f.roots.insert(g.id_of(tree.root));
  for (int v : tree.nodes) {
    if (tree.parent[v] >= 0) {
      depth[v] = depth[tree.parent[v]] + 1;
      f.parent.emplace(g.id_of(v), g.id_of(tree.parent[v]));
    }
    f.view_time.emplace(g.id_of(v), depth[v]);
  }
  return f;
}

namespace {

// Votes one tree expressed as (member list, parent array) into counts.
void vote_indices(const std::vector<int>& members,
                  const std::vector<int>& parent, std::int64_t r2,
                  std::uint64_t seed, std::vector<std::int64_t>& counts) {
  auto rng = make_rng(seed);
  const std::size_t limit = parent.size();  // cycle guard for foreign trees
  for (std::int64_t i = 0; i < r2; ++i) {
    int x = members[uniform_below(rng, members.size())];
    std::size_t steps = 0;
    while (parent[x] >= 0 && steps++ < limit) {
      x = parent[x];
      ++counts[x];
    }
  }
}

}  // namespace

VoteTally vote_on_tree(const diffusion::DiffusionForest& tree, std::int64_t r2,
                       std::uint64_t seed) {
  if (r2 < 1) throw InputError("r2 must be >= 1");
  std::vector<std::string> ids;
  ids.reserve(tree.size());
  for (const auto& r : tree.roots) ids.push_back(r);
  for (const auto& [child, unused] : tree.parent) ids.push_back(child);
  std::sort(ids.begin(), ids.end());

  std::vector<int> parent(ids.size(), -1);
  auto index_of = [&](const std::string& id) {
    return static_cast<int>(
        std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  for (const auto& [child, par] : tree.parent) {
    parent[index_of(child)] = index_of(par);
  }
  std::vector<int> members(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) members[i] = static_cast<int>(i);

  std::vector<std::int64_t> counts(ids.size(), 0);
  vote_indices(members, parent, r2, seed, counts);

  VoteTally tally;
  tally.trees_sampled = 1;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (counts[i] > 0) tally.votes.emplace(ids[i], counts[i]);
  }
  return tally;
}

std::pair<std::set<std::string>, VoteTally> voting_select(
    const IcGraph& g, const VotingParams& params) {
  if (params.k < 1) throw InputError("k must be >= 1");
  if (params.r1 < 1) throw InputError("r1 must be >= 1");
  if (params.r2 < 1) throw InputError("r2 must be >= 1");
  if (params.k > g.node_count()) {
    throw KTooLargeError("k=" + std::to_string(params.k) + " exceeds " +
                         std::to_string(g.node_count()) + " nodes");
  }

  std::vector<std::int64_t> counts(g.node_count(), 0);
  std::mutex merge_mu;
  parallel_for(params.r1, params.threads, [&](std::int64_t i) {
    const auto tree =
        sample_tree_indices(g, derive_seed(params.seed, 2 * i),
                            params.uniform_root);
    std::vector<std::int64_t> local(g.node_count(), 0);
    vote_indices(tree.nodes, tree.parent, params.r2,
                 derive_seed(params.seed, 2 * i + 1), local);
    std::lock_guard<std::mutex> lock(merge_mu);
    for (int v = 0; v < g.node_count(); ++v) counts[v] += local[v];
  });

  std::vector<int> order(g.node_count());
  for (int v = 0; v < g.node_count(); ++v) order[v] = v;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return a < b;
  });

  VoteTally tally;
  tally.trees_sampled = params.r1;
  for (int v = 0; v < g.node_count(); ++v) {
    if (counts[v] > 0) tally.votes.emplace(g.id_of(v), counts[v]);
  }
  std::set<std::string> selected;
  for (int i = 0; i < params.k; ++i) selected.insert(g.id_of(order[i]));
  return {std::move(selected), std::move(tally)};
}

SigmaEvaluator exact_evaluator(const IcGraph& g) {
  return [&g](const std::vector<int>& s) {
    return cascade::sigma_exact_indices(g, s);
  };
}

SigmaEvaluator mc_evaluator(const IcGraph& g, std::int64_t n_sims,
                            std::uint64_t seed, int threads) {
  return [&g, n_sims, seed, threads](const std::vector<int>& s) {
    return cascade::sigma_indices(g, s, n_sims, seed, threads).mean;
  };
}

std::set<std::string> greedy_select(const IcGraph& g, int k,
                                    const SigmaEvaluator& evaluator) {
  if (k < 1) throw InputError("k must be >= 1");
  if (k > g.node_count()) {
    throw KTooLargeError("k=" + std::to_string(k) + " exceeds " +
                         std::to_string(g.node_count()) + " nodes");
  }

  struct Entry {
    double gain;
    int node;
    int round;
  };
  // Max gain first; equal gains surface the smaller node id.
  auto less = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.node > b.node;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(less)> queue(less);

  std::vector<int> chosen;
  double base = 0.0;
  for (int v = 0; v < g.node_count(); ++v) {
    queue.push(Entry{evaluator({v}), v, 0});
  }
  auto with = [&](int v) {
    std::vector<int> s = chosen;
    s.insert(std::lower_bound(s.begin(), s.end(), v), v);
    return s;
  };
  for (int round = 1; static_cast<int>(chosen.size()) < k; ++round) {
    Entry top = queue.top();
    queue.pop();
    while (top.round != round) {
      top.gain = evaluator(with(top.node)) - base;
      top.round = round;
      queue.push(top);
      top = queue.top();
      queue.pop();
    }
    chosen.insert(std::lower_bound(chosen.begin(), chosen.end(), top.node),
                  top.node);
    base += top.gain;
  }

  std::set<std::string> out;
  for (int v : chosen) out.insert(g.id_of(v));
  return out;
}

std::vector<SweepPoint> stability_sweep(const IcGraph& g,
                                        const SweepConfig& cfg) {
  if (cfg.grid.empty()) throw InputError("sweep grid is empty");
  if (cfg.repetitions < 1) throw InputError("repetitions must be >= 1");

  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    std::vector<double> values;
    values.reserve(cfg.repetitions);
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      VotingParams params = cfg.base;
      if (cfg.param == SweepConfig::Param::R1) {
        params.r1 = static_cast<int>(cfg.grid[i]);
      } else {
        params.r2 = cfg.grid[i];
      }
      params.seed = derive_seed(derive_seed(cfg.base.seed, i), rep);
      auto [selected, tally] = voting_select(g, params);
      const auto idx = g.to_indices(selected);
      std::vector<int> s(idx.begin(), idx.end());
      values.push_back(
          cascade::sigma_indices(g, s, cfg.eval_sims, cfg.eval_seed,
                                 cfg.base.threads)
              .mean);
    }
    SweepPoint point;
    point.grid_value = cfg.grid[i];
    double sum = 0.0;
    for (double v : values) sum += v;
    point.sigma_mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) {
        ss += (v - point.sigma_mean) * (v - point.sigma_mean);
      }
      point.sigma_var = ss / static_cast<double>(values.size() - 1);
    }
    out.push_back(point);
  }
  return out;
}

}  // namespace msnlab::influence
