// Acceptance suite: runs every criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code = number of failures.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "msnlab/backbone.hpp"
#include "msnlab/cascade.hpp"
#include "msnlab/cli.hpp"
#include "msnlab/dpm.hpp"
#include "msnlab/geo.hpp"
#include "msnlab/influence.hpp"
#include "msnlab/records.hpp"
#include "msnlab/rng.hpp"
#include "msnlab/synth.hpp"
#include "support/oracles.hpp"

using namespace msnlab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string data_path(const std::string& rel) {
  return std::string(MSNLAB_DATA_DIR) + "/" + rel;
}

// ---- criterion 1: sigma oracle equivalence ------------------------------

void criterion1() {
  Timer timer;
  const double limit_s = 60.0;
  int agree = 0;
  const int battery = 50;
  for (int i = 0; i < battery; ++i) {
    const int n_nodes = 4 + i % 9;    // 4..12
    const int n_edges = 8 + i % 13;   // 8..20
    const auto g = oracles::random_graph(derive_seed(8801, i), n_nodes,
                                         n_edges);
    std::set<std::string> seeds{g.id_of(0)};
    if (n_nodes > 6) seeds.insert(g.id_of(5));
    const double exact = cascade::sigma_exact(g, seeds);
    const auto est = cascade::sigma(g, seeds, 100000, derive_seed(8809, i), 2);
    if (std::abs(est.mean - exact) <= 4.0 * est.std_err + 1e-12) ++agree;
  }
  const double secs = timer.seconds();
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "%d/50 within 4 stderr, need >= 49; %.1f s < %.0f s", agree,
                secs, limit_s);
  report(1, "sigma Monte Carlo vs exact enumeration",
         agree >= 49 && secs < limit_s, detail);
}

// ---- criterion 2: greedy correctness ------------------------------------

void criterion2() {
  Timer timer;
  const double bound = 1.0 - 1.0 / std::exp(1.0);
  int instances = 0, matches = 0, bound_ok = 0;
  for (int i = 0; i < 50; ++i) {
    const int n_nodes = 4 + i % 9;
    if (n_nodes > 6) continue;
    const int n_edges = 8 + i % 13;
    const auto g = oracles::random_graph(derive_seed(8801, i), n_nodes,
                                         n_edges);
    const auto eval = influence::exact_evaluator(g);
    for (int k : {2, 3}) {
      ++instances;
      const auto celf = influence::greedy_select(g, k, eval);
      const auto naive = oracles::naive_greedy(g, k, eval);
      if (celf == naive) ++matches;
      const double val = cascade::sigma_exact(g, celf);
      const double opt = oracles::best_subset_value(g, k);
      if (val >= bound * opt - 1e-9) ++bound_ok;
    }
  }
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "CELF==naive on %d/%d, (1-1/e) bound on %d/%d; %.1f s",
                matches, instances, bound_ok, instances, timer.seconds());
  report(2, "CELF greedy equals naive greedy with the exact evaluator",
         matches == instances && bound_ok == instances, detail);
}

// ---- criterion 3: voting quality and R1 stability ------------------------

void criterion3() {
  Timer timer;
  const double limit_s = 300.0;
  int good = 0;
  for (int t = 0; t < 100; ++t) {
    const auto g = oracles::random_graph_range(1000 + t, 10, 16, 0.01, 0.12);
    influence::VotingParams params;
    params.k = 2;
    params.r1 = 300;
    params.r2 = 20000;
    params.seed = derive_seed(31007, t);
    params.threads = 2;
    const auto selected = influence::voting_select(g, params).first;
    const double vote_value = cascade::sigma_exact(g, selected);
    const double best = oracles::best_subset_value(g, 2);
    if (vote_value >= 0.9 * best) ++good;
  }

  const auto sweep_graph =
      oracles::random_graph_range(12, 50, 120, 0.01, 0.25);
  influence::SweepConfig cfg;
  cfg.param = influence::SweepConfig::Param::R1;
  cfg.grid = {50, 500};
  cfg.base.k = 3;
  cfg.base.r2 = 5000;
  cfg.base.seed = 606;
  cfg.base.threads = 2;
  cfg.repetitions = 10;
  cfg.eval_sims = 400;
  cfg.eval_seed = 999;
  const auto points = influence::stability_sweep(sweep_graph, cfg);
  const bool variance_drops = points[1].sigma_var < points[0].sigma_var;

  const double secs = timer.seconds();
  char detail[220];
  std::snprintf(detail, sizeof(detail),
                "%d/100 within 0.9 of optimum, need >= 90; "
                "var(R1=500)=%.4f < var(R1=50)=%.4f: %s; %.1f s < %.0f s",
                good, points[1].sigma_var, points[0].sigma_var,
                variance_drops ? "yes" : "NO", secs, limit_s);
  report(3, "voting quality and R1 stability",
         good >= 90 && variance_drops && secs < limit_s, detail);
}

// ---- criterion 4: traffic prediction under ten percent -------------------

void criterion4() {
  Timer timer;
  const double limit_s = 30.0;
  records::TrafficConfig cfg;
  cfg.n_regions = 4;
  cfg.users_per_region = 15;
  cfg.day_count = 24;
  cfg.weekday_rate = 100;
  cfg.weekend_rate = 40;
  cfg.noise = 0.05;
  cfg.seed = 20160114;
  const auto corpus = records::generate_traffic_corpus(cfg);
  const auto map = geo::RegionMap::synthetic(cfg.n_regions);
  const auto demand = backbone::derive_demand(
      corpus.records, map,
      DayWindow{kCorpusStartDay, kCorpusStartDay + cfg.day_count - 1});

  std::vector<std::pair<std::string, std::string>> nodes;
  std::vector<std::tuple<std::string, std::string, double>> edges;
  for (int i = 0; i < cfg.n_regions; ++i) {
    nodes.emplace_back("n" + std::to_string(i),
                       records::region_code(i, cfg.n_regions));
    if (i > 0) {
      edges.emplace_back("n" + std::to_string(i), "n" + std::to_string(i - 1),
                         1.0);
    }
  }
  const auto g = backbone::BackboneGraph::build(nodes, edges);
  // 19 train days, the following 5 test days, no holidays in the window.
  const auto model = backbone::fit_traffic_model(
      demand, g, DayWindow{kCorpusStartDay, kCorpusStartDay + 18}, 0.2, {});
  const auto err = backbone::evaluate_prediction(
      model, demand, DayWindow{kCorpusStartDay + 19, kCorpusStartDay + 23});
  const double secs = timer.seconds();
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "error rate %.4f < 0.10 over %lld cells; %.1f s < %.0f s",
                err.error_rate, static_cast<long long>(err.cells), secs,
                limit_s);
  report(4, "traffic prediction error", err.error_rate < 0.10 && secs < limit_s,
         detail);
}

// ---- criterion 5: placement optimality -----------------------------------

void make_placement_instance(std::uint64_t seed, backbone::BackboneGraph& g,
                             backbone::DemandMatrix& d) {
  auto rng = make_rng(seed);
  std::vector<std::pair<std::string, std::string>> nodes;
  for (int i = 0; i < 12; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "s%02d", i);
    nodes.emplace_back(buf, buf);
  }
  std::vector<std::tuple<std::string, std::string, double>> edges;
  for (int i = 1; i < 12; ++i) {
    const int j = static_cast<int>(uniform_below(rng, i));
    edges.emplace_back(nodes[i].first, nodes[j].first,
                       1.0 + static_cast<double>(uniform_below(rng, 15)));
  }
  for (int e = 0; e < 6; ++e) {
    const int a = static_cast<int>(uniform_below(rng, 12));
    const int b = static_cast<int>(uniform_below(rng, 12));
    if (a == b) continue;
    edges.emplace_back(nodes[a].first, nodes[b].first,
                       1.0 + static_cast<double>(uniform_below(rng, 15)));
  }
  g = backbone::BackboneGraph::build(nodes, edges);
  for (int c = 0; c < 14; ++c) {
    const int a = static_cast<int>(uniform_below(rng, 12));
    const int b = static_cast<int>(uniform_below(rng, 12));
    d.f[{nodes[a].first, nodes[b].first, kCorpusStartDay}] +=
        1 + static_cast<std::int64_t>(uniform_below(rng, 100));
  }
  d.period = {kCorpusStartDay, kCorpusStartDay};
}

void criterion5() {
  Timer timer;
  const double limit_s = 300.0;
  const DayWindow w{kCorpusStartDay, kCorpusStartDay};
  int within5 = 0, rev_le_naive = 0;
  for (int t = 0; t < 100; ++t) {
    backbone::BackboneGraph g;
    backbone::DemandMatrix d;
    make_placement_instance(4000 + t, g, d);
    const auto rev = backbone::reverse_greedy(g, d, 5, w);
    const auto nai = backbone::naive_greedy(g, d, 5, w);
    const auto opt = backbone::optimal_exhaustive(g, d, 5, w);
    if (rev.load <= 1.05 * opt.load + 1e-9) ++within5;
    if (rev.load <= nai.load + 1e-9) ++rev_le_naive;
  }

  const auto trap_g =
      backbone::BackboneGraph::from_file(data_path("topologies/trap.graph"));
  const auto trap_d =
      backbone::read_demand_file(data_path("topologies/trap.demand"));
  const auto trap_rev = backbone::reverse_greedy(trap_g, trap_d, 2, w);
  const auto trap_nai = backbone::naive_greedy(trap_g, trap_d, 2, w);
  const bool trap_strict = trap_rev.load < trap_nai.load;

  const double secs = timer.seconds();
  char detail[240];
  std::snprintf(detail, sizeof(detail),
                "reverse<=1.05*opt on %d/100 (>=90), reverse<=naive on "
                "%d/100 (>=80), trap %.0f < %.0f strict: %s; %.1f s < %.0f s",
                within5, rev_le_naive, trap_rev.load, trap_nai.load,
                trap_strict ? "yes" : "NO", secs, limit_s);
  report(5, "reverse greedy placement optimality",
         within5 >= 90 && rev_le_naive >= 80 && trap_strict && secs < limit_s,
         detail);
}

// ---- criterion 6: five-server flattening ----------------------------------

void criterion6() {
  Timer timer;
  const auto g = backbone::BackboneGraph::from_file(
      data_path("topologies/clusters5.graph"));
  const auto d =
      backbone::read_demand_file(data_path("topologies/clusters5.demand"));
  const DayWindow w = d.observed_days();
  const std::vector<int> ks{1, 5, 6};
  bool pass = true;
  std::string parts;
  for (auto strategy : {backbone::Strategy::kReverseGreedy,
                        backbone::Strategy::kOptimal}) {
    const auto rows = backbone::cost_curve(g, d, ks, w, strategy, 2);
    const double k1 = rows[0].second;
    const double marginal = rows[1].second - rows[2].second;
    const bool ok = marginal < 0.05 * k1;
    pass = pass && ok;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%s: k1=%.0f marginal(5->6)=%.0f%s ",
                  strategy == backbone::Strategy::kOptimal ? "optimal"
                                                           : "reverse",
                  k1, marginal, ok ? "" : " TOO BIG");
    parts += buf;
  }
  char detail[220];
  std::snprintf(detail, sizeof(detail), "%s; %.1f s", parts.c_str(),
                timer.seconds());
  report(6, "five-server flattening on the 5-cluster topology", pass, detail);
}

// ---- criterion 7: geo-homophily -------------------------------------------

void criterion7() {
  Timer timer;
  int pass_seeds = 0;
  for (int s = 0; s < 20; ++s) {
    records::SynthConfig cfg;
    cfg.n_users = 600;
    cfg.n_pages = 600;
    cfg.n_regions = 10;
    cfg.p_in = 0.9;
    cfg.day_count = 45;
    cfg.holiday_first_day = 24;
    cfg.holiday_last_day = 30;
    cfg.seed = derive_seed(70000, s);
    const auto corpus = records::generate_corpus(cfg);
    const auto map = geo::RegionMap::synthetic(cfg.n_regions);
    const auto full = geo::build_region_matrix(
        corpus.records, map, DayWindow{kCorpusStartDay, kCorpusStartDay + 44});
    const auto pre = geo::build_region_matrix(
        corpus.records, map, DayWindow{kCorpusStartDay, kCorpusStartDay + 17});
    const auto holiday = geo::build_region_matrix(
        corpus.records, map,
        DayWindow{kCorpusStartDay + 24, kCorpusStartDay + 30});
    const auto baseline =
        geo::baseline_matrix(corpus.records, map, derive_seed(cfg.seed, 1));
    const double fi = geo::homophily_index(full);
    const double pi = geo::homophily_index(pre);
    const double hi = geo::homophily_index(holiday);
    const double bi = geo::homophily_index(baseline);
    if (fi >= 0.85 && fi <= 0.95 && hi > pi && bi < fi) ++pass_seeds;
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "%d/20 seeds pass all three conditions, need >= 19; %.1f s",
                pass_seeds, timer.seconds());
  report(7, "geo-homophily window, holiday shift, and null model",
         pass_seeds >= 19, detail);
}

// ---- criterion 8: DPM recovery and FP correlation -------------------------

void criterion8() {
  Timer timer;
  const double limit_s = 120.0;

  // Planted three-cluster recovery.
  auto rng = make_rng(41);
  const std::vector<std::vector<int>> supports{{0, 1, 2}, {3, 4, 5}, {6, 7, 8}};
  std::vector<std::vector<std::int64_t>> obs;
  std::vector<int> truth;
  for (int i = 0; i < 300; ++i) {
    const int label = i % 3;
    truth.push_back(label);
    std::vector<std::int64_t> v(9, 0);
    for (int k = 0; k < 8; ++k) {
      v[supports[label][uniform_below(rng, 3)]] += 1;
    }
    obs.push_back(std::move(v));
  }
  geo::DpmConfig dpm;
  dpm.iterations = 100;
  dpm.seed = 13;
  const auto fit = geo::dpm_fit(obs, dpm);
  std::map<int, std::map<int, int>> votes;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    votes[fit.assignments[i]][truth[i]] += 1;
  }
  int correct = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& tally = votes[fit.assignments[i]];
    int best = -1, arg = -1;
    for (const auto& [label, count] : tally) {
      if (count > best) {
        best = count;
        arg = label;
      }
    }
    if (arg == truth[i]) ++correct;
  }
  const double accuracy =
      static_cast<double>(correct) / static_cast<double>(obs.size());

  // Migration scenario at 2,000 users.
  records::SynthConfig cfg;
  cfg.n_users = 2000;
  cfg.n_pages = 5000;
  cfg.n_regions = 6;
  cfg.p_in = 0.9;
  cfg.day_count = 45;
  cfg.seed = 424242;
  cfg.migrations = {{"R0", "R2", 0.10}, {"R1", "R3", 0.06},
                    {"R2", "R5", 0.08}, {"R3", "R0", 0.12},
                    {"R4", "R1", 0.05}, {"R5", "R4", 0.09}};
  const auto corpus = records::generate_corpus(cfg);
  const auto map = geo::RegionMap::synthetic(cfg.n_regions);
  geo::DpmConfig fp_dpm;
  fp_dpm.iterations = 60;
  fp_dpm.seed = 5;
  const auto est = geo::estimate_fp(
      corpus.records, map, DayWindow{kCorpusStartDay, kCorpusStartDay + 17},
      DayWindow{kCorpusStartDay + 24, kCorpusStartDay + 30}, fp_dpm);
  geo::FpEstimate planted;
  for (const auto& [cell, count] : corpus.planted_movers) {
    planted.fp[cell] = count;
  }
  const double r = geo::correlate_census(est, planted);

  const double secs = timer.seconds();
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "cluster accuracy %.3f >= 0.95; FP pearson %.3f >= 0.9; "
                "%.1f s < %.0f s",
                accuracy, r, secs, limit_s);
  report(8, "DPM recovery and floating-population correlation",
         accuracy >= 0.95 && r >= 0.9 && secs < limit_s, detail);
}

// ---- criterion 9: CLI determinism ------------------------------------------

struct CliRun {
  int code = 0;
  std::string out;
};

CliRun run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun result;
  result.code = cli::run(args, out, err);
  result.out = out.str();
  return result;
}

void criterion9() {
  Timer timer;
  const auto dir = fs::temp_directory_path() /
                   ("msnlab_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto file = [&](const std::string& name, const std::string& content) {
    const auto p = dir / name;
    std::ofstream f(p);
    f << content;
    return p.string();
  };

  // Shared inputs.
  std::string map6 = "# six regions\n";
  for (int i = 0; i < 6; ++i) {
    map6 += "10." + std::to_string(i) + ".0.0/16,R" + std::to_string(i) + "\n";
  }
  const auto map_path = file("regions6.map", map6);
  std::string topo6;
  for (int i = 0; i < 6; ++i) {
    topo6 += "N,n" + std::to_string(i) + ",R" + std::to_string(i) + "\n";
  }
  for (int i = 1; i < 6; ++i) {
    topo6 += "E,n" + std::to_string(i) + ",n" + std::to_string(i - 1) + ",2\n";
  }
  const auto topo_path = file("topo6.graph", topo6);
  const auto diamond_path =
      file("diamond.tsv", "a\tb\t0.5\na\tc\t0.5\nb\td\t0.5\nc\td\t0.5\n");

  const auto gen = run_cli({"--seed", "99", "generate", "--users", "90",
                            "--pages", "12", "--regions", "6"});
  const auto corpus_path = file("corpus.rec", gen.out);
  const auto traffic = run_cli({"--seed", "99", "generate", "--scenario",
                                "traffic", "--traffic-regions", "6",
                                "--users-per-region", "8", "--traffic-days",
                                "10", "--weekday-rate", "9", "--weekend-rate",
                                "4", "--noise", "0.05"});
  const auto traffic_path = file("traffic.rec", traffic.out);

  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"generate",
       {"--seed", "99", "generate", "--users", "90", "--pages", "12",
        "--regions", "6"}},
      {"generate traffic",
       {"--seed", "99", "generate", "--scenario", "traffic",
        "--traffic-regions", "6", "--users-per-region", "8", "--traffic-days",
        "10", "--weekday-rate", "9", "--weekend-rate", "4", "--noise",
        "0.05"}},
      {"stats", {"--seed", "99", "stats", "--records", corpus_path}},
      {"kol voting",
       {"--seed", "99", "kol", "--records", corpus_path, "--strategy",
        "voting", "--k", "5", "--r1", "30", "--r2", "400", "--sims", "200"}},
      {"kol greedy",
       {"--seed", "99", "kol", "--graph", diamond_path, "--strategy",
        "greedy", "--evaluator", "mc", "--k", "2", "--sims", "300"}},
      {"sweep",
       {"--seed", "99", "sweep", "--graph", diamond_path, "--param", "r1",
        "--grid", "5,20", "--reps", "3", "--k", "2", "--r2", "300",
        "--eval-sims", "100", "--format", "tsv"}},
      {"sigma",
       {"--seed", "99", "sigma", "--graph", diamond_path, "--seeds", "a",
        "--sims", "5000"}},
      {"sigma exact",
       {"--seed", "99", "sigma", "--graph", diamond_path, "--seeds", "a",
        "--exact"}},
      {"demand",
       {"--seed", "99", "demand", "--records", corpus_path, "--region-map",
        map_path, "--format", "tsv"}},
      {"traffic-fit",
       {"--seed", "99", "traffic-fit", "--records", traffic_path,
        "--region-map", map_path, "--graph", topo_path, "--train-days", "7",
        "--holidays", "none"}},
      {"traffic-eval",
       {"--seed", "99", "traffic-eval", "--records", traffic_path,
        "--region-map", map_path, "--graph", topo_path, "--train-days", "7",
        "--test-days", "3", "--holidays", "none"}},
      {"place",
       {"--seed", "99", "place", "--graph",
        data_path("topologies/trap.graph"), "--demand",
        data_path("topologies/trap.demand"), "--strategy", "reverse-greedy",
        "--k", "2"}},
      {"place optimal",
       {"--seed", "99", "place", "--graph",
        data_path("topologies/trap.graph"), "--demand",
        data_path("topologies/trap.demand"), "--strategy", "optimal", "--k",
        "2"}},
      {"cost-curve",
       {"--seed", "99", "cost-curve", "--graph",
        data_path("topologies/trap.graph"), "--demand",
        data_path("topologies/trap.demand"), "--strategy", "greedy",
        "--k-min", "1", "--k-max", "3", "--format", "tsv"}},
      {"geo-matrix",
       {"--seed", "99", "geo-matrix", "--records", corpus_path,
        "--region-map", map_path, "--format", "tsv"}},
      {"geo-homophily",
       {"--seed", "99", "geo-homophily", "--records", corpus_path,
        "--region-map", map_path, "--baseline"}},
      {"geo-page",
       {"--seed", "99", "geo-page", "--records", corpus_path, "--region-map",
        map_path, "--pid", "p000"}},
      {"geo-fp",
       {"--seed", "99", "geo-fp", "--records", corpus_path, "--region-map",
        map_path, "--iterations", "40", "--truncation", "20"}},
  };

  int deterministic = 0;
  std::string first_bad;
  for (const auto& [name, args] : cases) {
    std::vector<CliRun> runs;
    for (const auto* threads : {"1", "1", "8", "8"}) {
      auto with_threads = args;
      with_threads.insert(with_threads.begin(), {"--threads", threads});
      runs.push_back(run_cli(with_threads));
    }
    bool same = runs[0].code == 0;
    for (int i = 1; i < 4; ++i) {
      same = same && runs[i].code == runs[0].code &&
             runs[i].out == runs[0].out;
    }
    if (same) {
      ++deterministic;
    } else if (first_bad.empty()) {
      first_bad = name;
    }
  }
  fs::remove_all(dir);

  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "%d/%zu subcommand invocations byte-identical across reruns "
                "and 1 vs 8 threads%s%s; %.1f s",
                deterministic, cases.size(), first_bad.empty() ? "" : "; first mismatch: ",
                first_bad.c_str(), timer.seconds());
  report(9, "CLI determinism", deterministic == static_cast<int>(cases.size()),
         detail);
}

}  // namespace

int main() {
  const Timer total;
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::printf("%s: %d/9 criteria passed (%.1f s total)\n",
              g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
              9 - g_failures, total.seconds());
  return g_failures == 0 ? 0 : 1;
}
