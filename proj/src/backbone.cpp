#include "msnlab/backbone.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "msnlab/parallel.hpp"

namespace msnlab::backbone {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BackboneGraph BackboneGraph::build(
    std::span<const std::pair<std::string, std::string>> nodes,
    std::span<const std::tuple<std::string, std::string, double>> edges) {
  BackboneGraph g;
  if (nodes.empty()) throw InputError("backbone graph has no nodes");
  for (const auto& [id, region] : nodes) {
    if (id.empty() || region.empty()) {
      throw InputError("backbone node needs an id and a region code");
    }
    if (!g.index_.emplace(id, static_cast<int>(g.ids_.size())).second) {
      throw InputError("duplicate backbone node: " + id);
    }
    g.ids_.push_back(id);
    g.regions_.push_back(region);
    g.rep_.emplace(region, static_cast<int>(g.ids_.size()) - 1);
  }

  const int n = g.node_count();
  g.dist_.assign(static_cast<std::size_t>(n) * n, kInf);
  for (int i = 0; i < n; ++i) g.dist_[static_cast<std::size_t>(i) * n + i] = 0;
  for (const auto& [a, b, w] : edges) {
    const int ia = g.index_of(a);
    const int ib = g.index_of(b);
    if (ia < 0 || ib < 0) {
      throw InputError("backbone edge names unknown node: " + a + "-" + b);
    }
    if (ia == ib) throw InputError("backbone self-edge: " + a);
    if (!(w > 0.0)) {
      throw InputError("backbone edge weight must be > 0: " + a + "-" + b);
    }
    auto& d1 = g.dist_[static_cast<std::size_t>(ia) * n + ib];
    auto& d2 = g.dist_[static_cast<std::size_t>(ib) * n + ia];
    d1 = std::min(d1, w);
    d2 = std::min(d2, w);
    g.edge_set_.emplace(std::min(ia, ib), std::max(ia, ib));
  }

  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const double dik = g.dist_[static_cast<std::size_t>(i) * n + k];
      if (dik == kInf) continue;
      for (int j = 0; j < n; ++j) {
        const double alt = dik + g.dist_[static_cast<std::size_t>(k) * n + j];
        auto& dij = g.dist_[static_cast<std::size_t>(i) * n + j];
        if (alt < dij) dij = alt;
      }
    }
  }
  for (double d : g.dist_) {
    if (d == kInf) throw InputError("backbone graph is not connected");
  }

  g.candidates_.resize(n);
  for (int i = 0; i < n; ++i) g.candidates_[i] = i;
  std::sort(g.candidates_.begin(), g.candidates_.end(),
            [&](int a, int b) { return g.ids_[a] < g.ids_[b]; });
  return g;
}

BackboneGraph BackboneGraph::from_stream(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> nodes;
  std::vector<std::tuple<std::string, std::string, double>> edges;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string kind;
    std::getline(ss, kind, ',');
    if (kind == "N") {
      std::string id, region;
      if (!std::getline(ss, id, ',') || !std::getline(ss, region)) {
        throw InputError("graph line " + std::to_string(lineno) +
                         ": expected N,node_id,region_code");
      }
      nodes.emplace_back(id, region);
    } else if (kind == "E") {
      std::string a, b, w;
      if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
          !std::getline(ss, w)) {
        throw InputError("graph line " + std::to_string(lineno) +
                         ": expected E,node_a,node_b,distance");
      }
      try {
        edges.emplace_back(a, b, std::stod(w));
      } catch (const std::exception&) {
        throw InputError("graph line " + std::to_string(lineno) +
                         ": bad distance: " + w);
      }
    } else {
      throw InputError("graph line " + std::to_string(lineno) +
                       ": unknown line kind: " + kind);
    }
  }
  return build(nodes, edges);
}

BackboneGraph BackboneGraph::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open backbone graph: " + path);
  return from_stream(in);
}

int BackboneGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

int BackboneGraph::representative(const std::string& region) const {
  auto it = rep_.find(region);
  return it == rep_.end() ? -1 : it->second;
}

bool BackboneGraph::regions_adjacent(const std::string& a,
                                     const std::string& b) const {
  const int ra = representative(a);
  const int rb = representative(b);
  if (ra < 0 || rb < 0 || ra == rb) return false;
  return edge_set_.count({std::min(ra, rb), std::max(ra, rb)}) > 0;
}

DayWindow DemandMatrix::observed_days() const {
  DayWindow w;
  bool first = true;
  for (const auto& [key, unused] : f) {
    const int day = std::get<2>(key);
    if (first) {
      w.first = w.last = day;
      first = false;
    } else {
      w.first = std::min(w.first, day);
      w.last = std::max(w.last, day);
    }
  }
  return w;
}

DemandMatrix derive_demand(std::span<const PostViewRecord> recs,
                           const geo::RegionMap& map, DayWindow window) {
  DemandMatrix demand;
  demand.period = window;
  const auto homes = geo::assign_home_regions(recs, map);
  for (const auto& r : recs) {
    const int day = epoch_day(r.t);
    if (!window.contains(day)) continue;
    const auto home = homes.find(r.u1);
    const auto view = map.resolve(r.ip);
    if (home == homes.end() || !view) {
      ++demand.unresolved;
      continue;
    }
    demand.f[{home->second, *view, day}] += 1;
  }
  return demand;
}

DemandMatrix read_demand(std::istream& in) {
  DemandMatrix demand;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string day, a, b, count;
    if (!std::getline(ss, day, '\t') || !std::getline(ss, a, '\t') ||
        !std::getline(ss, b, '\t') || !std::getline(ss, count)) {
      throw InputError("demand line " + std::to_string(lineno) +
                       ": expected day\ta\tb\tcount");
    }
    demand.f[{a, b, parse_iso_date(day)}] += std::stoll(count);
  }
  demand.period = demand.observed_days();
  return demand;
}

DemandMatrix read_demand_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open demand file: " + path);
  return read_demand(in);
}

void write_demand(std::ostream& out, const DemandMatrix& demand) {
  std::map<std::tuple<int, std::string, std::string>, std::int64_t> rows;
  for (const auto& [key, count] : demand.f) {
    rows[{std::get<2>(key), std::get<0>(key), std::get<1>(key)}] = count;
  }
  for (const auto& [key, count] : rows) {
    out << iso_date(std::get<0>(key)) << '\t' << std::get<1>(key) << '\t'
        << std::get<2>(key) << '\t' << count << '\n';
  }
}

std::map<std::pair<std::string, std::string>, std::int64_t> aggregate_pairs(
    const DemandMatrix& demand, DayWindow window, bool symmetric) {
  std::map<std::pair<std::string, std::string>, std::int64_t> out;
  for (const auto& [key, count] : demand.f) {
    if (!window.contains(std::get<2>(key))) continue;
    std::string a = std::get<0>(key);
    std::string b = std::get<1>(key);
    if (symmetric && b < a) std::swap(a, b);
    out[{a, b}] += count;
  }
  return out;
}

namespace {

// Demand folded onto representative nodes for one evaluation window.
struct LoadEvaluator {
  const BackboneGraph& g;
  struct PairWeight {
    int a, b;
    double w;
  };
  std::vector<PairWeight> pairs;

  LoadEvaluator(const BackboneGraph& graph, const DemandMatrix& demand,
                DayWindow window)
      : g(graph) {
    for (const auto& [key, count] : aggregate_pairs(demand, window)) {
      const int a = g.representative(key.first);
      const int b = g.representative(key.second);
      if (a < 0 || b < 0) {
        throw UnmappedRegionError(
            "demand region has no backbone representative: " +
            (a < 0 ? key.first : key.second));
      }
      pairs.push_back({a, b, static_cast<double>(count)});
    }
  }

  double load(std::span<const int> sites) const {
    double total = 0.0;
    for (const auto& p : pairs) {
      double best = kInf;
      for (int s : sites) {
        const double d = g.dist(p.a, s) + g.dist(s, p.b);
        if (d < best) best = d;
      }
      total += p.w * best;
    }
    return total;
  }
};

void check_k(const BackboneGraph& g, int k) {
  if (k < 1) throw InputError("k must be >= 1");
  if (k > static_cast<int>(g.candidates().size())) {
    throw KTooLargeError("k=" + std::to_string(k) + " exceeds " +
                         std::to_string(g.candidates().size()) +
                         " candidate sites");
  }
}

std::set<std::string> to_ids(const BackboneGraph& g,
                             std::span<const int> sites) {
  std::set<std::string> out;
  for (int s : sites) out.insert(g.id_of(s));
  return out;
}

double binomial_guarded(int n, int k, double cap) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) {
    c = c * (n - i) / (i + 1);
    if (c > cap) return c;
  }
  return c;
}

}  // namespace

double comm_distance(const BackboneGraph& g, const std::string& a,
                     const std::string& b,
                     const std::set<std::string>& servers) {
  if (servers.empty()) throw EmptyPlacementError("placement is empty");
  const int ia = g.index_of(a);
  const int ib = g.index_of(b);
  if (ia < 0 || ib < 0) {
    throw DisconnectedNodeError("unknown node: " + (ia < 0 ? a : b));
  }
  double best = kInf;
  for (const auto& s : servers) {
    const int is = g.index_of(s);
    if (is < 0) throw DisconnectedNodeError("unknown server node: " + s);
    best = std::min(best, g.dist(ia, is) + g.dist(is, ib));
  }
  return best;
}

double total_load(const BackboneGraph& g, const DemandMatrix& demand,
                  const std::set<std::string>& servers, DayWindow window) {
  if (servers.empty()) throw EmptyPlacementError("placement is empty");
  const LoadEvaluator eval(g, demand, window);
  std::vector<int> sites;
  for (const auto& s : servers) {
    const int i = g.index_of(s);
    if (i < 0) throw DisconnectedNodeError("unknown server node: " + s);
    sites.push_back(i);
  }
  return eval.load(sites);
}

PlacementResult reverse_greedy(const BackboneGraph& g,
                               const DemandMatrix& demand, int k,
                               DayWindow window, int threads) {
  check_k(g, k);
  const LoadEvaluator eval(g, demand, window);
  std::vector<int> current = g.candidates();  // ascending by id
  while (static_cast<int>(current.size()) > k) {
    std::vector<double> loads(current.size());
    parallel_for(static_cast<std::int64_t>(current.size()), threads,
                 [&](std::int64_t i) {
                   std::vector<int> trial;
                   trial.reserve(current.size() - 1);
                   for (std::size_t j = 0; j < current.size(); ++j) {
                     if (j != static_cast<std::size_t>(i)) {
                       trial.push_back(current[j]);
                     }
                   }
                   loads[i] = eval.load(trial);
                 });
    // Least-harm removal; ties drop the lexicographically largest id.
    // `current` is id-ascending, so scanning from the back with strict
    // comparison lands on the largest tied id.
    std::size_t pick = current.size() - 1;
    for (std::size_t i = current.size() - 1; i-- > 0;) {
      if (loads[i] < loads[pick]) pick = i;
    }
    current.erase(current.begin() + pick);
  }
  return {to_ids(g, current), eval.load(current)};
}

PlacementResult naive_greedy(const BackboneGraph& g,
                             const DemandMatrix& demand, int k,
                             DayWindow window, int threads) {
  check_k(g, k);
  const LoadEvaluator eval(g, demand, window);
  std::vector<int> chosen;
  std::vector<int> remaining = g.candidates();
  for (int round = 0; round < k; ++round) {
    std::vector<double> loads(remaining.size());
    parallel_for(static_cast<std::int64_t>(remaining.size()), threads,
                 [&](std::int64_t i) {
                   std::vector<int> trial = chosen;
                   trial.push_back(remaining[i]);
                   loads[i] = eval.load(trial);
                 });
    // Greatest reduction; ties take the lexicographically smallest id.
    std::size_t pick = 0;
    for (std::size_t i = 1; i < remaining.size(); ++i) {
      if (loads[i] < loads[pick]) pick = i;
    }
    chosen.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + pick);
  }
  return {to_ids(g, chosen), eval.load(chosen)};
}

PlacementResult optimal_exhaustive(const BackboneGraph& g,
                                   const DemandMatrix& demand, int k,
                                   DayWindow window, int threads) {
  (void)threads;
  check_k(g, k);
  const auto& cand = g.candidates();
  const int n = static_cast<int>(cand.size());
  if (binomial_guarded(n, k, 1e7) > 1e7) {
    throw EnumerationTooLargeError(
        "C(" + std::to_string(n) + "," + std::to_string(k) +
        ") exceeds the 10^7 enumeration guard");
  }
  const LoadEvaluator eval(g, demand, window);

  std::vector<int> pick(k);
  for (int i = 0; i < k; ++i) pick[i] = i;
  std::vector<int> best_sites;
  double best_load = kInf;
  std::vector<int> sites(k);
  while (true) {
    for (int i = 0; i < k; ++i) sites[i] = cand[pick[i]];
    const double load = eval.load(sites);
    // Strict improvement keeps the lexicographically first subset on ties.
    if (load < best_load) {
      best_load = load;
      best_sites = sites;
    }
    int i = k - 1;
    while (i >= 0 && pick[i] == n - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return {to_ids(g, best_sites), best_load};
}

PlacementResult place(const BackboneGraph& g, const DemandMatrix& demand,
                      int k, DayWindow window, Strategy strategy,
                      int threads) {
  switch (strategy) {
    case Strategy::kReverseGreedy:
      return reverse_greedy(g, demand, k, window, threads);
    case Strategy::kNaiveGreedy:
      return naive_greedy(g, demand, k, window, threads);
    case Strategy::kOptimal:
      return optimal_exhaustive(g, demand, k, window, threads);
  }
  throw InputError("unknown placement strategy");
}

std::vector<std::pair<int, double>> cost_curve(const BackboneGraph& g,
                                               const DemandMatrix& demand,
                                               std::span<const int> ks,
                                               DayWindow window,
                                               Strategy strategy,
                                               int threads) {
  if (ks.empty()) throw InputError("k range is empty");
  std::vector<std::pair<int, double>> out;
  for (int k : ks) {
    out.emplace_back(k, place(g, demand, k, window, strategy, threads).load);
  }
  return out;
}

std::set<int> default_holidays() {
  std::set<int> days;
  const int first = day_from_civil(2016, 2, 7);
  for (int d = 0; d < 7; ++d) days.insert(first + d);
  return days;
}

DayType day_type(int day, const std::set<int>& holidays) {
  if (holidays.count(day)) return DayType::kHoliday;
  return is_weekend(day) ? DayType::kWeekend : DayType::kWeekday;
}

double TrafficModel::predict(const std::string& a, const std::string& b,
                             int day) const {
  auto it = rates.find({a, b});
  if (it == rates.end()) return 0.0;
  return it->second[static_cast<int>(day_type(day, holidays))];
}

TrafficModel fit_traffic_model(const DemandMatrix& demand,
                               const BackboneGraph& g, DayWindow train_window,
                               double lambda, const std::set<int>& holidays) {
  if (train_window.empty()) {
    throw EmptyTrainWindowError("training window is empty");
  }
  if (lambda < 0.0 || lambda > 1.0) {
    throw InputError("lambda must be in [0,1]");
  }

  TrafficModel model;
  model.lambda = lambda;
  model.train_window = train_window;
  model.holidays = holidays;

  std::array<int, 3> type_days{0, 0, 0};
  for (int day = train_window.first; day <= train_window.last; ++day) {
    ++type_days[static_cast<int>(day_type(day, holidays))];
  }

  std::map<std::pair<std::string, std::string>, std::array<double, 3>> sums;
  std::map<std::pair<std::string, std::string>, double> totals;
  for (const auto& [key, count] : demand.f) {
    const int day = std::get<2>(key);
    if (!train_window.contains(day)) continue;
    const std::pair<std::string, std::string> pair{std::get<0>(key),
                                                   std::get<1>(key)};
    auto [it, fresh] = sums.try_emplace(pair, std::array<double, 3>{0, 0, 0});
    it->second[static_cast<int>(day_type(day, holidays))] +=
        static_cast<double>(count);
    totals[pair] += static_cast<double>(count);
  }

  for (const auto& [pair, sum] : sums) {
    std::array<double, 3> rate{0, 0, 0};
    const double overall =
        totals[pair] / static_cast<double>(train_window.length());
    for (int t = 0; t < 3; ++t) {
      // Day types absent from the window keep the all-days mean.
      rate[t] = type_days[t] > 0 ? sum[t] / type_days[t] : overall;
    }
    model.rates.emplace(pair, rate);
  }

  if (lambda > 0.0) {
    std::map<std::pair<std::string, std::string>, std::array<double, 3>>
        smoothed;
    for (const auto& [pair, rate] : model.rates) {
      std::array<double, 3> acc{0, 0, 0};
      int neighbors = 0;
      for (const auto& [other, other_rate] : model.rates) {
        if (other == pair) continue;
        const bool shares_a = other.first == pair.first &&
                              g.regions_adjacent(other.second, pair.second);
        const bool shares_b = other.second == pair.second &&
                              g.regions_adjacent(other.first, pair.first);
        if (shares_a || shares_b) {
          for (int t = 0; t < 3; ++t) acc[t] += other_rate[t];
          ++neighbors;
        }
      }
      std::array<double, 3> next = rate;
      if (neighbors > 0) {
        for (int t = 0; t < 3; ++t) {
          next[t] = (1.0 - lambda) * rate[t] +
                    lambda * acc[t] / static_cast<double>(neighbors);
        }
      }
      smoothed.emplace(pair, next);
    }
    model.rates = std::move(smoothed);
  }
  return model;
}

PredictionError evaluate_prediction(const TrafficModel& model,
                                    const DemandMatrix& demand,
                                    DayWindow test_window) {
  if (test_window.empty()) {
    throw EmptyTestWindowError("test window is empty");
  }
  if (!model.train_window.empty() &&
      test_window.first <= model.train_window.last &&
      model.train_window.first <= test_window.last) {
    throw InputError("test window overlaps the training window");
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& [pair, unused] : model.rates) pairs.insert(pair);
  std::map<std::tuple<std::string, std::string, int>, std::int64_t> actual;
  for (const auto& [key, count] : demand.f) {
    if (!test_window.contains(std::get<2>(key))) continue;
    pairs.insert({std::get<0>(key), std::get<1>(key)});
    actual[key] += count;
  }

  PredictionError err;
  double rel_sum = 0.0;
  for (const auto& pair : pairs) {
    for (int day = test_window.first; day <= test_window.last; ++day) {
      const double pred = model.predict(pair.first, pair.second, day);
      auto it = actual.find({pair.first, pair.second, day});
      const double act =
          it == actual.end() ? 0.0 : static_cast<double>(it->second);
      if (act > 0.0) {
        rel_sum += std::abs(pred - act) / act;
        ++err.cells;
      } else {
        err.zero_cell_mass += pred;
        ++err.zero_cells;
      }
    }
  }
  if (err.cells > 0) {
    err.error_rate = rel_sum / static_cast<double>(err.cells);
  }
  return err;
}

}  // namespace msnlab::backbone
