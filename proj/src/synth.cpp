#include "msnlab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "msnlab/dates.hpp"
#include "msnlab/rng.hpp"

namespace msnlab::records {

namespace {

int digits(int n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

std::string padded_id(char prefix, int index, int width) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%c%0*d", prefix, std::min(width, 12), index);
  return buf;
}

std::uint32_t region_ip(int region, std::mt19937_64& rng) {
  const std::uint32_t a = static_cast<std::uint32_t>(uniform_below(rng, 256));
  const std::uint32_t b = static_cast<std::uint32_t>(uniform_below(rng, 256));
  return (10u << 24) | (static_cast<std::uint32_t>(region) << 16) | (a << 8) |
         b;
}

void validate(const SynthConfig& cfg) {
  if (cfg.p_in < 0.0 || cfg.p_in > 1.0)
    throw InvalidConfigError("p_in must be in [0,1]");
  if (cfg.n_regions < 1) throw InvalidConfigError("n_regions must be >= 1");
  if (cfg.n_regions > 200)
    throw InvalidConfigError("n_regions exceeds the 10.x.0.0/16 block space");
  if (cfg.day_count < 1) throw InvalidConfigError("day_count must be >= 1");
  if (cfg.n_users < 1) throw InvalidConfigError("n_users must be >= 1");
  if (cfg.n_pages < 0) throw InvalidConfigError("n_pages must be >= 0");
  if (cfg.cascade_size_exponent <= 1.0)
    throw InvalidConfigError("cascade_size_exponent must be > 1");
  if (cfg.friends_per_user < 0)
    throw InvalidConfigError("friends_per_user must be >= 0");
  if (cfg.repeat_view_prob < 0.0 || cfg.repeat_view_prob > 1.0)
    throw InvalidConfigError("repeat_view_prob must be in [0,1]");
  if (cfg.holiday_first_day >= 0 &&
      cfg.holiday_last_day < cfg.holiday_first_day)
    throw InvalidConfigError("holiday day range is inverted");
  for (const auto& m : cfg.migrations) {
    if (m.fraction < 0.0 || m.fraction > 1.0)
      throw InvalidConfigError("migration fraction must be in [0,1]");
    if (m.from == m.to)
      throw InvalidConfigError("migration must cross regions");
  }
}

}  // namespace

std::string region_code(int index, int n_regions) {
  return padded_id('R', index, digits(std::max(1, n_regions - 1)));
}

SyntheticCorpus generate_corpus(const SynthConfig& cfg) {
  validate(cfg);

  SyntheticCorpus out;
  const int user_width = std::max(4, digits(cfg.n_users - 1));
  const int page_width = std::max(3, digits(std::max(1, cfg.n_pages - 1)));

  std::vector<std::string> user_ids(cfg.n_users);
  std::vector<int> user_region(cfg.n_users);
  std::vector<std::vector<int>> region_users(cfg.n_regions);
  for (int i = 0; i < cfg.n_regions; ++i) {
    out.region_codes.push_back(region_code(i, cfg.n_regions));
  }
  for (int i = 0; i < cfg.n_users; ++i) {
    user_ids[i] = padded_id('u', i, user_width);
    user_region[i] = i % cfg.n_regions;
    region_users[user_region[i]].push_back(i);
    out.home_region[user_ids[i]] = out.region_codes[user_region[i]];
  }

  std::unordered_map<std::string, int> region_index;
  for (int i = 0; i < cfg.n_regions; ++i) region_index[out.region_codes[i]] = i;

  // Friendship lists. Each user draws friends_per_user contacts, within
  // their own region with probability p_in; edges are symmetric. Two extra
  // draws per class keep both classes available during cascade expansion,
  // so the within/cross coin is rarely forced.
  std::vector<std::set<int>> friends(cfg.n_users);
  {
    auto rng = make_rng(derive_seed(cfg.seed, 1));
    auto draw_friend = [&](int u, bool within) {
      const auto& same = region_users[user_region[u]];
      int v = -1;
      if (within && same.size() > 1) {
        do {
          v = same[uniform_below(rng, same.size())];
        } while (v == u);
      } else if (cfg.n_users > 1) {
        do {
          v = static_cast<int>(uniform_below(rng, cfg.n_users));
        } while (v == u ||
                 (!within && cfg.n_regions > 1 &&
                  user_region[v] == user_region[u]));
      }
      if (v >= 0) {
        friends[u].insert(v);
        friends[v].insert(u);
      }
    };
    for (int u = 0; u < cfg.n_users; ++u) {
      for (int k = 0; k < cfg.friends_per_user; ++k) {
        draw_friend(u, uniform01(rng) < cfg.p_in);
      }
      if (cfg.friends_per_user > 0) {
        draw_friend(u, true);
        draw_friend(u, true);
        if (cfg.n_regions > 1) {
          draw_friend(u, false);
          draw_friend(u, false);
        }
      }
    }
  }

  // Movers: the first round(fraction * |region|) users of a seeded shuffle
  // of the from-region view from the to-region block during holiday days.
  std::vector<int> mover_target(cfg.n_users, -1);
  {
    auto rng = make_rng(derive_seed(cfg.seed, 2));
    for (const auto& flow : cfg.migrations) {
      auto from_it = region_index.find(flow.from);
      auto to_it = region_index.find(flow.to);
      if (from_it == region_index.end() || to_it == region_index.end())
        throw InvalidConfigError("migration names an unknown region code");
      std::vector<int> pool = region_users[from_it->second];
      for (std::size_t i = pool.size(); i > 1; --i) {
        std::swap(pool[i - 1], pool[uniform_below(rng, i)]);
      }
      const auto n_move = static_cast<std::size_t>(
          std::llround(flow.fraction * static_cast<double>(pool.size())));
      std::int64_t placed = 0;
      for (std::size_t i = 0; i < n_move && i < pool.size(); ++i) {
        if (mover_target[pool[i]] >= 0) continue;  // already claimed by a flow
        mover_target[pool[i]] = to_it->second;
        ++placed;
      }
      if (placed > 0) out.planted_movers[{flow.from, flow.to}] += placed;
    }
  }

  const double holiday_p_in = cfg.holiday_p_in >= 0.0
                                  ? cfg.holiday_p_in
                                  : cfg.p_in + 0.7 * (1.0 - cfg.p_in);
  const std::int64_t corpus_end =
      kCorpusStartTs + static_cast<std::int64_t>(cfg.day_count) * kSecondsPerDay;

  auto day_offset = [&](std::int64_t ts) {
    return epoch_day(ts) - kCorpusStartDay;
  };
  auto in_holiday = [&](std::int64_t ts) {
    if (cfg.holiday_first_day < 0) return false;
    const int d = day_offset(ts);
    return d >= cfg.holiday_first_day && d <= cfg.holiday_last_day;
  };
  auto view_region_of = [&](int user, std::int64_t ts) {
    if (mover_target[user] >= 0 && in_holiday(ts)) return mover_target[user];
    return user_region[user];
  };

  auto emit = [&](int owner, int viewer, const std::string& pid,
                  std::int64_t ts, std::mt19937_64& rng) {
    const int vr = view_region_of(viewer, ts);
    PostViewRecord r;
    r.u1 = user_ids[owner];
    r.u2 = user_ids[viewer];
    r.pid = pid;
    r.ip = region_ip(vr, rng);
    r.t = ts;
    out.records.push_back(std::move(r));
    out.planted_demand[{out.region_codes[user_region[owner]],
                        out.region_codes[vr], epoch_day(ts)}] += 1;
  };

  for (int p = 0; p < cfg.n_pages; ++p) {
    auto rng = make_rng(derive_seed(cfg.seed, 1000 + p));
    const std::string pid = padded_id('p', p, page_width);
    const int root = static_cast<int>(uniform_below(rng, cfg.n_users));
    out.page_origin_region[pid] = out.region_codes[user_region[root]];

    const std::int64_t start_ts =
        kCorpusStartTs +
        static_cast<std::int64_t>(uniform_below(
            rng, static_cast<std::uint64_t>(cfg.day_count) * kSecondsPerDay));

    // Cascade size target from a truncated power law (x_min = 3). The cap
    // keeps a cascade from saturating its home region, which would force
    // cross-region hops and wash out the planted homophily level.
    const double gamma = cfg.cascade_size_exponent;
    const double draw = 3.0 * std::pow(1.0 - uniform01(rng), -1.0 / (gamma - 1.0));
    const int region_size =
        static_cast<int>(region_users[user_region[root]].size());
    const int cap =
        std::max(3, std::min({cfg.n_users, 200, region_size / 2 + 2}));
    const int target =
        std::max(1, std::min(cap, static_cast<int>(draw)));

    // The poster's own view seeds the page.
    emit(root, root, pid, start_ts, rng);

    std::unordered_set<int> seen{root};
    std::vector<std::pair<int, std::int64_t>> active{{root, start_ts}};
    while (static_cast<int>(seen.size()) < target && !active.empty()) {
      const std::size_t slot = uniform_below(rng, active.size());
      const auto [parent, parent_ts] = active[slot];

      const std::int64_t delay =
          1 + static_cast<std::int64_t>(-std::log1p(-uniform01(rng)) * 21600.0);
      const std::int64_t ts = std::min(parent_ts + delay, corpus_end - 1);

      std::vector<int> within, cross;
      for (int f : friends[parent]) {
        if (seen.count(f)) continue;
        (user_region[f] == user_region[parent] ? within : cross).push_back(f);
      }
      if (within.empty() && cross.empty()) {
        active[slot] = active.back();
        active.pop_back();
        continue;
      }
      const double p_eff = in_holiday(ts) ? holiday_p_in : cfg.p_in;
      const bool pick_within =
          cross.empty() || (!within.empty() && uniform01(rng) < p_eff);
      const auto& pool = pick_within ? within : cross;
      const int child = pool[uniform_below(rng, pool.size())];

      emit(parent, child, pid, ts, rng);
      seen.insert(child);
      active.emplace_back(child, ts);

      // Occasionally the child sees the page again on another friend's
      // page, producing a repeat-view record attributed to that friend.
      if (uniform01(rng) < cfg.repeat_view_prob) {
        std::vector<int> other;
        for (int f : friends[child]) {
          if (f != parent && seen.count(f)) other.push_back(f);
        }
        if (!other.empty()) {
          const int alt = other[uniform_below(rng, other.size())];
          const std::int64_t delay2 =
              1 +
              static_cast<std::int64_t>(-std::log1p(-uniform01(rng)) * 21600.0);
          emit(alt, child, pid, std::min(ts + delay2, corpus_end - 1), rng);
        }
      }
    }
  }

  std::sort(out.records.begin(), out.records.end(),
            [](const PostViewRecord& a, const PostViewRecord& b) {
              return std::tie(a.t, a.pid, a.u2, a.u1) <
                     std::tie(b.t, b.pid, b.u2, b.u1);
            });
  return out;
}

std::vector<PostViewRecord> generate_synthetic(const SynthConfig& cfg) {
  return generate_corpus(cfg).records;
}

TrafficCorpus generate_traffic_corpus(const TrafficConfig& cfg) {
  if (cfg.n_regions < 1 || cfg.n_regions > 200)
    throw InvalidConfigError("n_regions must be in [1,200]");
  if (cfg.users_per_region < 2)
    throw InvalidConfigError("users_per_region must be >= 2");
  if (cfg.day_count < 1) throw InvalidConfigError("day_count must be >= 1");
  if (cfg.weekday_rate < 0.0 || cfg.weekend_rate < 0.0)
    throw InvalidConfigError("rates must be >= 0");
  if (cfg.noise < 0.0 || cfg.noise >= 1.0)
    throw InvalidConfigError("noise must be in [0,1)");

  TrafficCorpus out;
  const int user_width =
      std::max(4, digits(cfg.n_regions * cfg.users_per_region - 1));
  std::vector<std::vector<std::string>> region_user_ids(cfg.n_regions);
  for (int r = 0; r < cfg.n_regions; ++r) {
    out.region_codes.push_back(region_code(r, cfg.n_regions));
    for (int i = 0; i < cfg.users_per_region; ++i) {
      region_user_ids[r].push_back(
          padded_id('u', r * cfg.users_per_region + i, user_width));
    }
  }

  auto rng = make_rng(derive_seed(cfg.seed, 7));
  std::vector<std::size_t> viewer_rr(cfg.n_regions, 0);

  for (int d = 0; d < cfg.day_count; ++d) {
    const int day = kCorpusStartDay + d;
    const double rate = is_weekend(day) ? cfg.weekend_rate : cfg.weekday_rate;
    for (int a = 0; a < cfg.n_regions; ++a) {
      for (int b = 0; b < cfg.n_regions; ++b) {
        const double factor =
            cfg.noise > 0.0 ? 1.0 + cfg.noise * (2.0 * uniform01(rng) - 1.0)
                            : 1.0;
        const auto count = std::llround(rate * factor);
        if (count <= 0) continue;
        char pid[48];
        std::snprintf(pid, sizeof(pid), "tp%03d_%s_%s", d,
                      out.region_codes[a].c_str(), out.region_codes[b].c_str());
        for (std::int64_t k = 0; k < count; ++k) {
          const auto& viewers = region_user_ids[b];
          const std::string& viewer = viewers[viewer_rr[b]++ % viewers.size()];
          std::string owner;
          do {
            owner = region_user_ids[a][uniform_below(
                rng, region_user_ids[a].size())];
          } while (owner == viewer);
          PostViewRecord r;
          r.u1 = owner;
          r.u2 = viewer;
          r.pid = pid;
          r.ip = region_ip(b, rng);
          r.t = static_cast<std::int64_t>(day) * kSecondsPerDay +
                static_cast<std::int64_t>(uniform_below(rng, kSecondsPerDay));
          out.records.push_back(std::move(r));
          out.planted_demand[{out.region_codes[a], out.region_codes[b], day}] +=
              1;
        }
      }
    }
  }

  std::sort(out.records.begin(), out.records.end(),
            [](const PostViewRecord& a, const PostViewRecord& b) {
              return std::tie(a.t, a.pid, a.u2, a.u1) <
                     std::tie(b.t, b.pid, b.u2, b.u1);
            });
  return out;
}

}  // namespace msnlab::records
