#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "msnlab/records.hpp"

namespace msnlab::records {

// Region code for region index i: "R00", "R01", ... Region i owns the
// 10.i.0.0/16 block in generated corpora.
std::string region_code(int index, int n_regions = 34);

struct MigrationFlow {
  std::string from;
  std::string to;
  double fraction = 0.0;  // of the from-region users
};

struct SynthConfig {
  int n_users = 200;
  int n_pages = 50;
  int n_regions = 34;
  double p_in = 0.9;  // within-region share of diffusion edges
  double cascade_size_exponent = 2.5;
  int day_count = 45;
  std::uint64_t seed = 20160114;

  // Day range (0-based offsets from the corpus start) with boosted
  // within-region diffusion. holiday_first_day < 0 disables the mode.
  int holiday_first_day = 24;  // 2016-02-07
  int holiday_last_day = 30;   // 2016-02-13
  double holiday_p_in = -1.0;  // default: p_in + 0.7 * (1 - p_in)

  int friends_per_user = 12;
  double repeat_view_prob = 0.15;
  std::vector<MigrationFlow> migrations;
};

struct SyntheticCorpus {
  std::vector<PostViewRecord> records;  // sorted by (t, pid, u2, u1)
  std::vector<std::string> region_codes;

  // Planted ground truth, keyed for direct comparison against the
  // analytics pipeline.
  std::map<std::string, std::string> home_region;         // user -> region
  std::map<std::string, std::string> page_origin_region;  // pid -> region
  // (owner home region, view region, epoch day) -> emitted record count
  std::map<std::tuple<std::string, std::string, int>, std::int64_t>
      planted_demand;
  // (from region, to region) -> planted mover count
  std::map<std::pair<std::string, std::string>, std::int64_t> planted_movers;
};

SyntheticCorpus generate_corpus(const SynthConfig& cfg);
std::vector<PostViewRecord> generate_synthetic(const SynthConfig& cfg);

// Controlled scenario for traffic experiments: every ordered region pair
// receives round(rate * noise factor) view records per day, where the rate
// depends only on weekday vs weekend. Viewers are picked round-robin so
// every user resolves to their home region from day one.
struct TrafficConfig {
  int n_regions = 4;
  int users_per_region = 25;
  int day_count = 24;  // days 0 .. day_count-1 from the corpus start
  double weekday_rate = 100.0;
  double weekend_rate = 40.0;
  double noise = 0.0;  // multiplicative half-width, count = round(rate*(1+-U))
  std::uint64_t seed = 1;
};

struct TrafficCorpus {
  std::vector<PostViewRecord> records;
  std::vector<std::string> region_codes;
  // exact emitted counts per (owner home region, view region, epoch day)
  std::map<std::tuple<std::string, std::string, int>, std::int64_t>
      planted_demand;
};

TrafficCorpus generate_traffic_corpus(const TrafficConfig& cfg);

}  // namespace msnlab::records
