#include "msnlab/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "msnlab/backbone.hpp"
#include "msnlab/cascade.hpp"
#include "msnlab/dates.hpp"
#include "msnlab/diffusion.hpp"
#include "msnlab/geo.hpp"
#include "msnlab/influence.hpp"
#include "msnlab/records.hpp"
#include "msnlab/report.hpp"
#include "msnlab/rng.hpp"
#include "msnlab/synth.hpp"

namespace msnlab::cli {

namespace {

using nlohmann::json;
using report::num;

constexpr std::uint64_t kDefaultSeed = 20160114;

struct Common {
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;  // 0 = take MSNLAB_THREADS, else 1
  std::string format = "json";
  std::string out_path;
  bool timing = false;
};

int effective_threads(const Common& c) {
  if (c.threads > 0) return c.threads;
  if (const char* env = std::getenv("MSNLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

void emit(const Common& c, std::ostream& out, const std::string& text) {
  if (c.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out_path);
  if (!f) throw InputError("cannot open output file: " + c.out_path);
  f << text;
}

// Execution details (thread count, timing) stay out of the echo so reruns
// of the same analysis are byte-identical regardless of worker count.
json config_base(const Common& c, const std::string& subcommand) {
  json cfg;
  cfg["subcommand"] = subcommand;
  cfg["seed"] = c.seed;
  cfg["format"] = c.format;
  return cfg;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

DayWindow window_from_flags(const std::string& from, const std::string& to,
                            DayWindow fallback) {
  DayWindow w = fallback;
  if (!from.empty()) w.first = parse_iso_date(from);
  if (!to.empty()) w.last = parse_iso_date(to);
  return w;
}

DayWindow observed_window(std::span<const records::PostViewRecord> recs) {
  DayWindow w;
  bool first = true;
  for (const auto& r : recs) {
    const int day = epoch_day(r.t);
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

class Stopwatch {
 public:
  std::int64_t elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

backbone::Strategy parse_strategy(const std::string& name) {
  if (name == "reverse-greedy") return backbone::Strategy::kReverseGreedy;
  if (name == "greedy") return backbone::Strategy::kNaiveGreedy;
  if (name == "optimal") return backbone::Strategy::kOptimal;
  throw InputError("unknown placement strategy: " + name);
}

std::set<int> parse_holidays(const std::string& text) {
  if (text == "none") return {};
  if (text == "spring-festival" || text.empty()) {
    return backbone::default_holidays();
  }
  std::set<int> days;
  for (const auto& d : split_csv(text)) days.insert(parse_iso_date(d));
  return days;
}

// ---- subcommand payloads ----------------------------------------------

struct GenerateArgs {
  records::SynthConfig synth;
  std::string scenario = "diffusion";
  records::TrafficConfig traffic;
  std::vector<std::string> migrate;  // from:to:fraction
};

std::string run_generate(const Common& c, GenerateArgs& a) {
  std::ostringstream body;
  if (a.scenario == "diffusion") {
    a.synth.seed = c.seed;
    for (const auto& flow_arg : a.migrate) {
      std::string from, to, frac;
      std::istringstream ss(flow_arg);
      if (!std::getline(ss, from, ':') || !std::getline(ss, to, ':') ||
          !std::getline(ss, frac)) {
        throw InputError("--migrate expects from:to:fraction, got " + flow_arg);
      }
      records::MigrationFlow flow;
      flow.from = from;
      flow.to = to;
      flow.fraction = std::stod(frac);
      a.synth.migrations.push_back(flow);
    }
    const auto corpus = records::generate_corpus(a.synth);
    body << "# msnlab generate scenario=diffusion"
         << " users=" << a.synth.n_users << " pages=" << a.synth.n_pages
         << " regions=" << a.synth.n_regions << " p_in=" << a.synth.p_in
         << " exponent=" << a.synth.cascade_size_exponent
         << " days=" << a.synth.day_count << " seed=" << a.synth.seed << "\n";
    records::write_records(body, corpus.records);
  } else if (a.scenario == "traffic") {
    a.traffic.seed = c.seed;
    const auto corpus = records::generate_traffic_corpus(a.traffic);
    body << "# msnlab generate scenario=traffic"
         << " regions=" << a.traffic.n_regions
         << " users_per_region=" << a.traffic.users_per_region
         << " days=" << a.traffic.day_count
         << " weekday_rate=" << a.traffic.weekday_rate
         << " weekend_rate=" << a.traffic.weekend_rate
         << " noise=" << a.traffic.noise << " seed=" << a.traffic.seed << "\n";
    records::write_records(body, corpus.records);
  } else {
    throw InputError("unknown scenario: " + a.scenario);
  }
  return body.str();
}

struct StatsArgs {
  std::string records_path;
};

std::string run_stats(const Common& c, const StatsArgs& a) {
  const auto recs = records::read_records_file(a.records_path);
  const auto stats = records::compute_stats(recs);
  json j;
  j["config"] = config_base(c, "stats");
  j["config"]["records"] = a.records_path;
  j["record_count"] = stats.record_count;
  j["user_count"] = stats.user_count;
  j["page_count"] = stats.page_count;
  j["self_view_count"] = stats.self_view_count;
  if (stats.has_time_span) {
    j["t_min"] = stats.t_min;
    j["t_max"] = stats.t_max;
  } else {
    j["t_min"] = nullptr;
    j["t_max"] = nullptr;
  }
  if (c.format == "tsv") {
    std::ostringstream body;
    body << "record_count\t" << stats.record_count << "\n"
         << "user_count\t" << stats.user_count << "\n"
         << "page_count\t" << stats.page_count << "\n"
         << "self_view_count\t" << stats.self_view_count << "\n";
    return body.str();
  }
  return report::dump(j);
}

struct GraphSource {
  std::string records_path;
  std::string graph_path;
  double laplace_alpha = 0.0;
};

cascade::IcGraph load_graph(const GraphSource& src) {
  if (!src.graph_path.empty()) {
    return cascade::read_ic_graph_file(src.graph_path);
  }
  if (src.records_path.empty()) {
    throw InputError("need --records or --graph");
  }
  const auto recs = records::read_records_file(src.records_path);
  return cascade::estimate_edge_probabilities(recs, src.laplace_alpha);
}

struct KolArgs {
  GraphSource source;
  std::string strategy = "voting";
  std::string evaluator = "mc";
  int k = 100;
  int r1 = 500;
  std::int64_t r2 = 100000;
  std::int64_t sims = 1000;
  bool uniform_root = false;
};

std::string run_kol(const Common& c, const KolArgs& a) {
  Stopwatch watch;
  const auto graph = load_graph(a.source);
  const int threads = effective_threads(c);

  std::set<std::string> selected;
  if (a.strategy == "voting") {
    influence::VotingParams params;
    params.k = a.k;
    params.r1 = a.r1;
    params.r2 = a.r2;
    params.seed = c.seed;
    params.uniform_root = a.uniform_root;
    params.threads = threads;
    selected = influence::voting_select(graph, params).first;
  } else if (a.strategy == "greedy") {
    influence::SigmaEvaluator eval;
    if (a.evaluator == "exact") {
      eval = influence::exact_evaluator(graph);
    } else if (a.evaluator == "mc") {
      eval = influence::mc_evaluator(graph, a.sims, derive_seed(c.seed, 101),
                                     threads);
    } else {
      throw InputError("unknown evaluator: " + a.evaluator);
    }
    selected = influence::greedy_select(graph, a.k, eval);
  } else {
    throw InputError("unknown strategy: " + a.strategy);
  }

  const auto est = cascade::sigma(graph, selected, a.sims,
                                  derive_seed(c.seed, 202), threads);

  json j;
  j["config"] = config_base(c, "kol");
  j["config"]["strategy"] = a.strategy;
  j["config"]["evaluator"] = a.evaluator;
  j["config"]["k"] = a.k;
  j["config"]["r1"] = a.r1;
  j["config"]["r2"] = a.r2;
  j["config"]["sims"] = a.sims;
  j["config"]["uniform_root"] = a.uniform_root;
  j["config"]["records"] = a.source.records_path;
  j["config"]["graph"] = a.source.graph_path;
  j["strategy"] = a.strategy;
  j["k"] = a.k;
  if (a.strategy == "voting") {
    j["r1"] = a.r1;
    j["r2"] = a.r2;
  }
  j["seed"] = c.seed;
  j["selected_users"] = json::array();
  for (const auto& u : selected) j["selected_users"].push_back(u);
  j["sigma_mean"] = num(est.mean);
  j["sigma_stderr"] = num(est.std_err);
  if (c.timing) j["runtime_ms"] = watch.elapsed_ms();

  if (c.format == "tsv") {
    std::ostringstream body;
    for (const auto& u : selected) body << u << "\n";
    return body.str();
  }
  return report::dump(j);
}

struct SweepArgs {
  GraphSource source;
  std::string param = "r1";
  std::string grid_csv;
  int reps = 10;
  int k = 2;
  int r1 = 200;
  std::int64_t r2 = 10000;
  std::int64_t eval_sims = 1000;
};

std::string run_sweep(const Common& c, const SweepArgs& a) {
  const auto graph = load_graph(a.source);
  influence::SweepConfig cfg;
  if (a.param == "r1") {
    cfg.param = influence::SweepConfig::Param::R1;
  } else if (a.param == "r2") {
    cfg.param = influence::SweepConfig::Param::R2;
  } else {
    throw InputError("--param must be r1 or r2");
  }
  for (const auto& g : split_csv(a.grid_csv)) {
    cfg.grid.push_back(std::stoll(g));
  }
  cfg.base.k = a.k;
  cfg.base.r1 = a.r1;
  cfg.base.r2 = a.r2;
  cfg.base.seed = c.seed;
  cfg.base.threads = effective_threads(c);
  cfg.repetitions = a.reps;
  cfg.eval_sims = a.eval_sims;
  cfg.eval_seed = derive_seed(c.seed, 303);
  const auto points = influence::stability_sweep(graph, cfg);

  if (c.format == "tsv") {
    std::ostringstream body;
    char buf[64];
    for (const auto& p : points) {
      std::snprintf(buf, sizeof(buf), "%lld\t%.6g\t%.6g",
                    static_cast<long long>(p.grid_value), p.sigma_mean,
                    p.sigma_var);
      body << buf << "\n";
    }
    return body.str();
  }
  json j;
  j["config"] = config_base(c, "sweep");
  j["config"]["param"] = a.param;
  j["config"]["grid"] = a.grid_csv;
  j["config"]["reps"] = a.reps;
  j["config"]["k"] = a.k;
  j["config"]["r1"] = a.r1;
  j["config"]["r2"] = a.r2;
  j["config"]["eval_sims"] = a.eval_sims;
  j["rows"] = json::array();
  for (const auto& p : points) {
    json row;
    row["grid_value"] = p.grid_value;
    row["sigma_mean"] = num(p.sigma_mean);
    row["sigma_var"] = num(p.sigma_var);
    j["rows"].push_back(row);
  }
  return report::dump(j);
}

struct SigmaArgs {
  GraphSource source;
  std::string seeds_csv;
  std::int64_t sims = 10000;
  bool exact = false;
};

std::string run_sigma(const Common& c, const SigmaArgs& a) {
  const auto graph = load_graph(a.source);
  std::set<std::string> seeds;
  for (const auto& s : split_csv(a.seeds_csv)) seeds.insert(s);
  if (seeds.empty()) throw InputError("--seeds is empty");

  json j;
  j["config"] = config_base(c, "sigma");
  j["config"]["seeds"] = a.seeds_csv;
  j["config"]["sims"] = a.sims;
  j["config"]["exact"] = a.exact;
  j["config"]["records"] = a.source.records_path;
  j["config"]["graph"] = a.source.graph_path;
  if (a.exact) {
    j["sigma_exact"] = num(cascade::sigma_exact(graph, seeds));
  } else {
    const auto est = cascade::sigma(graph, seeds, a.sims,
                                    derive_seed(c.seed, 404),
                                    effective_threads(c));
    j["sigma_mean"] = num(est.mean);
    j["sigma_stderr"] = num(est.std_err);
    j["n_sims"] = est.n_sims;
  }
  return report::dump(j);
}

struct DemandArgs {
  std::string records_path;
  std::string region_map_path;
  std::string from, to;
};

std::string run_demand(const Common& c, const DemandArgs& a) {
  const auto recs = records::read_records_file(a.records_path);
  const auto map = geo::RegionMap::from_file(a.region_map_path);
  const auto window = window_from_flags(a.from, a.to, observed_window(recs));
  const auto demand = backbone::derive_demand(recs, map, window);

  std::ostringstream body;
  backbone::write_demand(body, demand);
  if (c.format == "tsv") return body.str();

  json j;
  j["config"] = config_base(c, "demand");
  j["config"]["records"] = a.records_path;
  j["config"]["region_map"] = a.region_map_path;
  j["config"]["from"] = iso_date(window.first);
  j["config"]["to"] = iso_date(window.last);
  j["unresolved"] = demand.unresolved;
  j["rows"] = json::array();
  for (const auto& [key, count] : demand.f) {
    json row;
    row["day"] = iso_date(std::get<2>(key));
    row["region_a"] = std::get<0>(key);
    row["region_b"] = std::get<1>(key);
    row["count"] = count;
    j["rows"].push_back(row);
  }
  return report::dump(j);
}

struct TrafficArgs {
  std::string records_path;
  std::string region_map_path;
  std::string graph_path;
  std::string from;
  int train_days = 19;
  int test_days = 5;
  double lambda = 0.2;
  std::string holidays = "spring-festival";
};

std::string run_traffic(const Common& c, const TrafficArgs& a, bool eval) {
  const auto recs = records::read_records_file(a.records_path);
  const auto map = geo::RegionMap::from_file(a.region_map_path);
  const auto graph = backbone::BackboneGraph::from_file(a.graph_path);
  const auto observed = observed_window(recs);
  const int start = a.from.empty() ? observed.first : parse_iso_date(a.from);
  const DayWindow train{start, start + a.train_days - 1};
  const DayWindow test{train.last + 1, train.last + a.test_days};
  const auto demand = backbone::derive_demand(
      recs, map, DayWindow{std::min(start, observed.first), observed.last});
  const auto holidays = parse_holidays(a.holidays);
  const auto model =
      backbone::fit_traffic_model(demand, graph, train, a.lambda, holidays);

  json j;
  j["config"] = config_base(c, eval ? "traffic-eval" : "traffic-fit");
  j["config"]["records"] = a.records_path;
  j["config"]["region_map"] = a.region_map_path;
  j["config"]["graph"] = a.graph_path;
  j["config"]["train_from"] = iso_date(train.first);
  j["config"]["train_to"] = iso_date(train.last);
  j["config"]["lambda"] = num(a.lambda);
  j["config"]["holidays"] = a.holidays;

  if (eval) {
    j["config"]["test_from"] = iso_date(test.first);
    j["config"]["test_to"] = iso_date(test.last);
    const auto err = backbone::evaluate_prediction(model, demand, test);
    j["error_rate"] = num(err.error_rate);
    j["zero_cell_mass"] = num(err.zero_cell_mass);
    j["cells"] = err.cells;
    j["zero_cells"] = err.zero_cells;
    if (c.format == "tsv") {
      std::ostringstream body;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "error_rate\t%.6g\n", err.error_rate);
      body << buf;
      return body.str();
    }
    return report::dump(j);
  }

  j["rates"] = json::array();
  for (const auto& [pair, rate] : model.rates) {
    json row;
    row["region_a"] = pair.first;
    row["region_b"] = pair.second;
    row["weekday"] = num(rate[0]);
    row["weekend"] = num(rate[1]);
    row["holiday"] = num(rate[2]);
    j["rates"].push_back(row);
  }
  if (c.format == "tsv") {
    std::ostringstream body;
    char buf[128];
    for (const auto& [pair, rate] : model.rates) {
      std::snprintf(buf, sizeof(buf), "%s\t%s\t%.6g\t%.6g\t%.6g",
                    pair.first.c_str(), pair.second.c_str(), rate[0], rate[1],
                    rate[2]);
      body << buf << "\n";
    }
    return body.str();
  }
  return report::dump(j);
}

struct PlaceArgs {
  std::string graph_path;
  std::string demand_path;
  std::string records_path;
  std::string region_map_path;
  std::string strategy = "reverse-greedy";
  int k = 5;
  std::string from, to;
  int k_min = 1, k_max = 0;  // cost-curve range
};

backbone::DemandMatrix load_demand(const PlaceArgs& a, DayWindow& window) {
  if (!a.demand_path.empty()) {
    auto demand = backbone::read_demand_file(a.demand_path);
    window = window_from_flags(a.from, a.to, demand.observed_days());
    return demand;
  }
  if (a.records_path.empty() || a.region_map_path.empty()) {
    throw InputError("need --demand or --records with --region-map");
  }
  const auto recs = records::read_records_file(a.records_path);
  const auto map = geo::RegionMap::from_file(a.region_map_path);
  window = window_from_flags(a.from, a.to, observed_window(recs));
  return backbone::derive_demand(recs, map, window);
}

std::string run_place(const Common& c, const PlaceArgs& a) {
  Stopwatch watch;
  const auto graph = backbone::BackboneGraph::from_file(a.graph_path);
  DayWindow window;
  const auto demand = load_demand(a, window);
  const auto result = backbone::place(graph, demand, a.k, window,
                                      parse_strategy(a.strategy),
                                      effective_threads(c));
  json j;
  j["config"] = config_base(c, "place");
  j["config"]["graph"] = a.graph_path;
  j["config"]["demand"] = a.demand_path;
  j["config"]["records"] = a.records_path;
  j["config"]["region_map"] = a.region_map_path;
  j["config"]["strategy"] = a.strategy;
  j["config"]["k"] = a.k;
  j["strategy"] = a.strategy;
  j["k"] = a.k;
  j["servers"] = json::array();
  for (const auto& s : result.servers) j["servers"].push_back(s);
  j["load"] = num(result.load);
  if (c.timing) j["runtime_ms"] = watch.elapsed_ms();
  if (c.format == "tsv") {
    std::ostringstream body;
    for (const auto& s : result.servers) body << s << "\n";
    return body.str();
  }
  return report::dump(j);
}

std::string run_cost_curve(const Common& c, const PlaceArgs& a) {
  const auto graph = backbone::BackboneGraph::from_file(a.graph_path);
  DayWindow window;
  const auto demand = load_demand(a, window);
  const int hi = a.k_max > 0 ? a.k_max
                             : static_cast<int>(graph.candidates().size());
  std::vector<int> ks;
  for (int k = a.k_min; k <= hi; ++k) ks.push_back(k);
  const auto rows = backbone::cost_curve(graph, demand, ks, window,
                                         parse_strategy(a.strategy),
                                         effective_threads(c));
  if (c.format == "tsv") {
    std::ostringstream body;
    char buf[64];
    for (const auto& [k, load] : rows) {
      std::snprintf(buf, sizeof(buf), "%d\t%.6g", k, load);
      body << buf << "\n";
    }
    return body.str();
  }
  json j;
  j["config"] = config_base(c, "cost-curve");
  j["config"]["graph"] = a.graph_path;
  j["config"]["demand"] = a.demand_path;
  j["config"]["strategy"] = a.strategy;
  j["config"]["k_min"] = a.k_min;
  j["config"]["k_max"] = hi;
  j["rows"] = json::array();
  for (const auto& [k, load] : rows) {
    json row;
    row["k"] = k;
    row["load"] = num(load);
    j["rows"].push_back(row);
  }
  return report::dump(j);
}

struct GeoArgs {
  std::string records_path;
  std::string region_map_path;
  std::string from, to;
  std::string pid;
  bool baseline = false;
  // fp windows and DPM knobs
  std::string home_from = "2016-01-14", home_to = "2016-01-31";
  std::string holiday_from = "2016-02-07", holiday_to = "2016-02-13";
  double alpha = 1.0;
  int truncation = 50;
  int iterations = 200;
  std::string census_path;
};

std::string run_geo_matrix(const Common& c, const GeoArgs& a) {
  const auto recs = records::read_records_file(a.records_path);
  const auto map = geo::RegionMap::from_file(a.region_map_path);
  const auto window = window_from_flags(a.from, a.to, observed_window(recs));
  const auto matrix = geo::build_region_matrix(recs, map, window);
  std::ostringstream body;
  geo::write_matrix(body, matrix);
  if (c.format == "tsv") return body.str();
  json j;
  j["config"] = config_base(c, "geo-matrix");
  j["config"]["records"] = a.records_path;
  j["config"]["region_map"] = a.region_map_path;
  j["config"]["from"] = iso_date(window.first);
  j["config"]["to"] = iso_date(window.last);
  j["spill"] = matrix.spill;
  j["matrix_tsv"] = body.str();
  return report::dump(j);
}

std::string run_geo_homophily(const Common& c, const GeoArgs& a) {
  const auto recs = records::read_records_file(a.records_path);
  const auto map = geo::RegionMap::from_file(a.region_map_path);
  const auto window = window_from_flags(a.from, a.to, observed_window(recs));
  const auto matrix = geo::build_region_matrix(recs, map, window);
  const double index = geo::homophily_index(matrix);
  const auto per_region = geo::per_region_homophily(matrix);

  json j;
  j["config"] = config_base(c, "geo-homophily");
  j["config"]["records"] = a.records_path;
  j["config"]["region_map"] = a.region_map_path;
  j["config"]["from"] = iso_date(window.first);
  j["config"]["to"] = iso_date(window.last);
  j["config"]["baseline"] = a.baseline;
  j["index"] = num(index);
  j["spill"] = matrix.spill;
  j["per_region"] = json::object();
  for (std::size_t r = 0; r < matrix.codes.size(); ++r) {
    j["per_region"][matrix.codes[r]] = num(per_region[r]);
  }
  if (a.baseline) {
    std::vector<records::PostViewRecord> in_window;
    for (const auto& r : recs) {
      if (window.contains(epoch_day(r.t))) in_window.push_back(r);
    }
    const auto base =
        geo::baseline_matrix(in_window, map, derive_seed(c.seed, 505));
    j["baseline_index"] = num(geo::homophily_index(base));
  }
  if (c.format == "tsv") {
    std::ostringstream body;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "index\t%.6g\n", index);
    body << buf;
    return body.str();
  }
  return report::dump(j);
}

std::string run_geo_page(const Common& c, const GeoArgs& a) {
  const auto recs = records::read_records_file(a.records_path);
  const auto map = geo::RegionMap::from_file(a.region_map_path);
  const auto dist = geo::page_view_distribution(recs, a.pid, map);
  json j;
  j["config"] = config_base(c, "geo-page");
  j["config"]["records"] = a.records_path;
  j["config"]["region_map"] = a.region_map_path;
  j["config"]["pid"] = a.pid;
  j["pid"] = dist.pid;
  j["origin_region"] =
      dist.origin_region ? json(*dist.origin_region) : json(nullptr);
  j["unresolved"] = dist.unresolved;
  j["viewer_counts"] = json::object();
  for (const auto& [region, count] : dist.viewer_counts) {
    j["viewer_counts"][region] = count;
  }
  if (c.format == "tsv") {
    std::ostringstream body;
    for (const auto& [region, count] : dist.viewer_counts) {
      body << region << '\t' << count << "\n";
    }
    return body.str();
  }
  return report::dump(j);
}

std::string run_geo_fp(const Common& c, const GeoArgs& a) {
  const auto recs = records::read_records_file(a.records_path);
  const auto map = geo::RegionMap::from_file(a.region_map_path);
  const DayWindow home{parse_iso_date(a.home_from), parse_iso_date(a.home_to)};
  const DayWindow holiday{parse_iso_date(a.holiday_from),
                          parse_iso_date(a.holiday_to)};
  geo::DpmConfig dpm;
  dpm.alpha = a.alpha;
  dpm.truncation = a.truncation;
  dpm.iterations = a.iterations;
  dpm.seed = c.seed;
  const auto est = geo::estimate_fp(recs, map, home, holiday, dpm);

  json j;
  j["config"] = config_base(c, "geo-fp");
  j["config"]["records"] = a.records_path;
  j["config"]["region_map"] = a.region_map_path;
  j["config"]["alpha"] = num(a.alpha);
  j["config"]["truncation"] = a.truncation;
  j["config"]["iterations"] = a.iterations;
  j["config"]["census"] = a.census_path;
  j["period_home"] = a.home_from + ".." + a.home_to;
  j["period_holiday"] = a.holiday_from + ".." + a.holiday_to;
  j["cells"] = json::array();
  for (const auto& [cell, count] : est.fp) {
    json row;
    row["home"] = cell.first;
    row["remote"] = cell.second;
    row["count"] = count;
    j["cells"].push_back(row);
  }
  if (!a.census_path.empty()) {
    const auto census = geo::read_fp_file(a.census_path);
    j["pearson_r"] = num(geo::correlate_census(est, census));
  }
  if (c.format == "tsv") {
    std::ostringstream body;
    for (const auto& [cell, count] : est.fp) {
      body << cell.first << '\t' << cell.second << '\t' << count << "\n";
    }
    return body.str();
  }
  return report::dump(j);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"msnlab: diffusion analytics over post-view records"};
  app.require_subcommand(1);

  Common common;
  app.add_option("--seed", common.seed, "Master seed (default 20160114)");
  app.add_option("--threads", common.threads,
                 "Worker threads (default: MSNLAB_THREADS or 1)");
  app.add_option("--format", common.format, "json or tsv")
      ->check(CLI::IsMember({"json", "tsv"}));
  app.add_option("--out", common.out_path, "Write the report to this file");
  app.add_flag("--timing", common.timing, "Include runtime_ms in reports");

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Generate a synthetic corpus");
  c_gen->add_option("--scenario", gen.scenario, "diffusion or traffic");
  c_gen->add_option("--users", gen.synth.n_users, "User count");
  c_gen->add_option("--pages", gen.synth.n_pages, "Page count");
  c_gen->add_option("--regions", gen.synth.n_regions, "Region count");
  c_gen->add_option("--p-in", gen.synth.p_in, "Within-region edge share");
  c_gen->add_option("--exponent", gen.synth.cascade_size_exponent,
                    "Cascade size power-law exponent");
  c_gen->add_option("--days", gen.synth.day_count, "Corpus day span");
  c_gen->add_option("--friends", gen.synth.friends_per_user,
                    "Friend draws per user");
  c_gen->add_option("--holiday-first", gen.synth.holiday_first_day,
                    "Holiday mode first day offset (-1 disables)");
  c_gen->add_option("--holiday-last", gen.synth.holiday_last_day,
                    "Holiday mode last day offset");
  c_gen->add_option("--holiday-p-in", gen.synth.holiday_p_in,
                    "Holiday within-region share");
  c_gen->add_option("--migrate", gen.migrate,
                    "Migration flow from:to:fraction (repeatable)");
  c_gen->add_option("--users-per-region", gen.traffic.users_per_region,
                    "Traffic scenario users per region");
  c_gen->add_option("--traffic-regions", gen.traffic.n_regions,
                    "Traffic scenario region count");
  c_gen->add_option("--traffic-days", gen.traffic.day_count,
                    "Traffic scenario day span");
  c_gen->add_option("--weekday-rate", gen.traffic.weekday_rate,
                    "Traffic weekday rate per pair");
  c_gen->add_option("--weekend-rate", gen.traffic.weekend_rate,
                    "Traffic weekend rate per pair");
  c_gen->add_option("--noise", gen.traffic.noise,
                    "Traffic multiplicative noise half-width");

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Dataset statistics");
  c_stats->add_option("--records", stats.records_path, "Records file")
      ->required();

  KolArgs kol;
  auto* c_kol = app.add_subcommand("kol", "Select the most influential users");
  c_kol->add_option("--records", kol.source.records_path, "Records file");
  c_kol->add_option("--graph", kol.source.graph_path, "IC graph TSV");
  c_kol->add_option("--laplace-alpha", kol.source.laplace_alpha,
                    "Laplace smoothing for edge estimation");
  c_kol->add_option("--strategy", kol.strategy, "voting or greedy");
  c_kol->add_option("--evaluator", kol.evaluator, "mc or exact (greedy)");
  c_kol->add_option("--k", kol.k, "Seed set size");
  c_kol->add_option("--r1", kol.r1, "Sampled diffusion trees");
  c_kol->add_option("--r2", kol.r2, "Voting operations per tree");
  c_kol->add_option("--sims", kol.sims, "Monte Carlo simulations");
  c_kol->add_flag("--uniform-root", kol.uniform_root,
                  "Sample tree roots uniformly");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "R1/R2 stability sweep");
  c_sweep->add_option("--records", sweep.source.records_path, "Records file");
  c_sweep->add_option("--graph", sweep.source.graph_path, "IC graph TSV");
  c_sweep->add_option("--param", sweep.param, "r1 or r2");
  c_sweep->add_option("--grid", sweep.grid_csv, "Comma-separated grid")
      ->required();
  c_sweep->add_option("--reps", sweep.reps, "Repetitions per grid value");
  c_sweep->add_option("--k", sweep.k, "Seed set size");
  c_sweep->add_option("--r1", sweep.r1, "Fixed R1 when sweeping r2");
  c_sweep->add_option("--r2", sweep.r2, "Fixed R2 when sweeping r1");
  c_sweep->add_option("--eval-sims", sweep.eval_sims,
                      "Simulations per sigma evaluation");

  SigmaArgs sigma;
  auto* c_sigma = app.add_subcommand("sigma", "Influence spread of a set");
  c_sigma->add_option("--records", sigma.source.records_path, "Records file");
  c_sigma->add_option("--graph", sigma.source.graph_path, "IC graph TSV");
  c_sigma->add_option("--seeds", sigma.seeds_csv, "Comma-separated seed users")
      ->required();
  c_sigma->add_option("--sims", sigma.sims, "Monte Carlo simulations");
  c_sigma->add_flag("--exact", sigma.exact, "Exact enumeration (<= 20 edges)");

  DemandArgs demand;
  auto* c_demand = app.add_subcommand("demand", "Region-pair demand matrix");
  c_demand->add_option("--records", demand.records_path, "Records file")
      ->required();
  c_demand->add_option("--region-map", demand.region_map_path, "Region map")
      ->required();
  c_demand->add_option("--from", demand.from, "First day (ISO date)");
  c_demand->add_option("--to", demand.to, "Last day (ISO date)");

  TrafficArgs traffic;
  auto* c_tfit = app.add_subcommand("traffic-fit", "Fit the traffic model");
  auto* c_teval =
      app.add_subcommand("traffic-eval", "Evaluate traffic prediction");
  for (auto* cmd : {c_tfit, c_teval}) {
    cmd->add_option("--records", traffic.records_path, "Records file")
        ->required();
    cmd->add_option("--region-map", traffic.region_map_path, "Region map")
        ->required();
    cmd->add_option("--graph", traffic.graph_path, "Backbone graph file")
        ->required();
    cmd->add_option("--from", traffic.from, "Training start day (ISO)");
    cmd->add_option("--train-days", traffic.train_days, "Training days");
    cmd->add_option("--test-days", traffic.test_days, "Test days");
    cmd->add_option("--lambda", traffic.lambda, "Spatial smoothing weight");
    cmd->add_option("--holidays", traffic.holidays,
                    "spring-festival, none, or ISO dates");
  }

  PlaceArgs place;
  auto* c_place = app.add_subcommand("place", "Server placement");
  auto* c_curve = app.add_subcommand("cost-curve", "Load as a function of k");
  for (auto* cmd : {c_place, c_curve}) {
    cmd->add_option("--graph", place.graph_path, "Backbone graph file")
        ->required();
    cmd->add_option("--demand", place.demand_path, "Demand TSV");
    cmd->add_option("--records", place.records_path, "Records file");
    cmd->add_option("--region-map", place.region_map_path, "Region map");
    cmd->add_option("--strategy", place.strategy,
                    "reverse-greedy, greedy, or optimal");
    cmd->add_option("--from", place.from, "First day (ISO date)");
    cmd->add_option("--to", place.to, "Last day (ISO date)");
  }
  c_place->add_option("--k", place.k, "Server count");
  c_curve->add_option("--k-min", place.k_min, "Smallest k");
  c_curve->add_option("--k-max", place.k_max, "Largest k (default all)");

  GeoArgs geo_args;
  auto* c_gmatrix = app.add_subcommand("geo-matrix", "Region diffusion matrix");
  auto* c_ghomo = app.add_subcommand("geo-homophily", "Geo-homophily index");
  auto* c_gpage = app.add_subcommand("geo-page", "Per-page view distribution");
  auto* c_gfp = app.add_subcommand("geo-fp", "Floating population estimate");
  for (auto* cmd : {c_gmatrix, c_ghomo, c_gpage, c_gfp}) {
    cmd->add_option("--records", geo_args.records_path, "Records file")
        ->required();
    cmd->add_option("--region-map", geo_args.region_map_path, "Region map")
        ->required();
  }
  for (auto* cmd : {c_gmatrix, c_ghomo}) {
    cmd->add_option("--from", geo_args.from, "First day (ISO date)");
    cmd->add_option("--to", geo_args.to, "Last day (ISO date)");
  }
  c_ghomo->add_flag("--baseline", geo_args.baseline,
                    "Also report the random-region null index");
  c_gpage->add_option("--pid", geo_args.pid, "Page id")->required();
  c_gfp->add_option("--home-from", geo_args.home_from, "Home window start");
  c_gfp->add_option("--home-to", geo_args.home_to, "Home window end");
  c_gfp->add_option("--holiday-from", geo_args.holiday_from,
                    "Holiday window start");
  c_gfp->add_option("--holiday-to", geo_args.holiday_to, "Holiday window end");
  c_gfp->add_option("--alpha", geo_args.alpha, "DPM concentration");
  c_gfp->add_option("--truncation", geo_args.truncation, "DPM component cap");
  c_gfp->add_option("--iterations", geo_args.iterations, "DPM Gibbs sweeps");
  c_gfp->add_option("--census", geo_args.census_path, "Census FP file");

  // Global flags may appear before or after the subcommand name.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    std::string text;
    if (*c_gen) text = run_generate(common, gen);
    else if (*c_stats) text = run_stats(common, stats);
    else if (*c_kol) text = run_kol(common, kol);
    else if (*c_sweep) text = run_sweep(common, sweep);
    else if (*c_sigma) text = run_sigma(common, sigma);
    else if (*c_demand) text = run_demand(common, demand);
    else if (*c_tfit) text = run_traffic(common, traffic, false);
    else if (*c_teval) text = run_traffic(common, traffic, true);
    else if (*c_place) text = run_place(common, place);
    else if (*c_curve) text = run_cost_curve(common, place);
    else if (*c_gmatrix) text = run_geo_matrix(common, geo_args);
    else if (*c_ghomo) text = run_geo_homophily(common, geo_args);
    else if (*c_gpage) text = run_geo_page(common, geo_args);
    else if (*c_gfp) text = run_geo_fp(common, geo_args);
    emit(common, out, text);
    return 0;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace msnlab::cli
