#include "msnlab/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "msnlab/diffusion.hpp"
#include "msnlab/rng.hpp"
#include "msnlab/synth.hpp"

namespace msnlab::geo {

void RegionMap::add(const std::string& cidr, const std::string& region) {
  const auto slash = cidr.find('/');
  if (slash == std::string::npos) {
    throw InputError("region map entry is not CIDR: " + cidr);
  }
  Entry e;
  e.prefix = records::parse_ipv4(cidr.substr(0, slash));
  try {
    e.bits = std::stoi(cidr.substr(slash + 1));
  } catch (const std::exception&) {
    throw InputError("bad prefix length: " + cidr);
  }
  if (e.bits < 0 || e.bits > 32) {
    throw InputError("bad prefix length: " + cidr);
  }
  if (region.empty()) throw InputError("empty region code for " + cidr);
  const std::uint32_t mask =
      e.bits == 0 ? 0u : ~0u << (32 - e.bits);
  e.prefix &= mask;
  e.region = region;
  // Later entries override an identical prefix.
  for (auto& old : entries_) {
    if (old.prefix == e.prefix && old.bits == e.bits) {
      old.region = region;
      rebuild_codes();
      return;
    }
  }
  entries_.push_back(std::move(e));
  rebuild_codes();
}

void RegionMap::rebuild_codes() {
  std::set<std::string> codes;
  for (const auto& e : entries_) codes.insert(e.region);
  codes_.assign(codes.begin(), codes.end());
}

RegionMap RegionMap::from_stream(std::istream& in) {
  RegionMap map;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw InputError("region map line needs 'cidr,region': " + line);
    }
    map.add(line.substr(0, comma), line.substr(comma + 1));
  }
  return map;
}

RegionMap RegionMap::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open region map: " + path);
  return from_stream(in);
}

RegionMap RegionMap::synthetic(int n_regions) {
  RegionMap map;
  for (int r = 0; r < n_regions; ++r) {
    map.add("10." + std::to_string(r) + ".0.0/16",
            records::region_code(r, n_regions));
  }
  return map;
}

std::optional<std::string> RegionMap::resolve(std::uint32_t ip) const {
  const Entry* best = nullptr;
  for (const auto& e : entries_) {
    const std::uint32_t mask = e.bits == 0 ? 0u : ~0u << (32 - e.bits);
    if ((ip & mask) != e.prefix) continue;
    if (!best || e.bits > best->bits) best = &e;
  }
  if (!best) return std::nullopt;
  return best->region;
}

int RegionMap::region_index(const std::string& code) const {
  auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
  if (it == codes_.end() || *it != code) return -1;
  return static_cast<int>(it - codes_.begin());
}

std::optional<std::string> resolve_region(std::uint32_t ip,
                                          const RegionMap& map) {
  return map.resolve(ip);
}

std::optional<std::string> assign_home_region(
    std::span<const PostViewRecord> user_records, const RegionMap& map) {
  std::map<std::string, std::int64_t> tally;
  for (const auto& r : user_records) {
    if (auto region = map.resolve(r.ip)) tally[*region] += 1;
  }
  if (tally.empty()) return std::nullopt;
  // Plurality; the map is code-ordered so the first maximum is the
  // lexicographically smallest.
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

std::map<std::string, std::string> assign_home_regions(
    std::span<const PostViewRecord> recs, const RegionMap& map) {
  std::map<std::string, std::map<std::string, std::int64_t>> tallies;
  for (const auto& r : recs) {
    if (auto region = map.resolve(r.ip)) tallies[r.u2][*region] += 1;
  }
  std::map<std::string, std::string> homes;
  for (const auto& [user, tally] : tallies) {
    auto best = tally.begin();
    for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    homes.emplace(user, best->first);
  }
  return homes;
}

std::int64_t RegionDiffusionMatrix::total() const {
  std::int64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

std::int64_t RegionDiffusionMatrix::trace() const {
  std::int64_t sum = 0;
  for (std::size_t r = 0; r < codes.size(); ++r) {
    sum += counts[r * codes.size() + r];
  }
  return sum;
}

RegionDiffusionMatrix build_region_matrix(std::span<const PostViewRecord> recs,
                                          const RegionMap& map,
                                          DayWindow period) {
  RegionDiffusionMatrix m;
  m.codes = map.region_codes();
  m.counts.assign(m.codes.size() * m.codes.size(), 0);
  m.period = period;
  const auto homes = assign_home_regions(recs, map);
  for (const auto& r : recs) {
    if (!period.contains(epoch_day(r.t))) continue;
    const auto home = homes.find(r.u1);
    const auto view = map.resolve(r.ip);
    if (home == homes.end() || !view) {
      ++m.spill;
      continue;
    }
    m.at(map.region_index(home->second), map.region_index(*view)) += 1;
  }
  return m;
}

double homophily_index(const RegionDiffusionMatrix& m) {
  const std::int64_t total = m.total();
  if (total == 0) throw EmptyMatrixError("region matrix has no mass");
  return static_cast<double>(m.trace()) / static_cast<double>(total);
}

std::vector<double> per_region_homophily(const RegionDiffusionMatrix& m) {
  std::vector<double> out(m.codes.size(), 0.0);
  for (std::size_t r = 0; r < m.codes.size(); ++r) {
    std::int64_t row = 0;
    for (std::size_t c = 0; c < m.codes.size(); ++c) row += m.at(r, c);
    if (row > 0) {
      out[r] = static_cast<double>(m.at(r, r)) / static_cast<double>(row);
    }
  }
  return out;
}

RegionDiffusionMatrix baseline_matrix(std::span<const PostViewRecord> recs,
                                      const RegionMap& map,
                                      std::uint64_t seed) {
  RegionDiffusionMatrix m;
  m.codes = map.region_codes();
  m.counts.assign(m.codes.size() * m.codes.size(), 0);
  if (m.codes.empty()) return m;

  std::set<std::string> users;
  for (const auto& r : recs) {
    users.insert(r.u1);
    users.insert(r.u2);
  }
  // Users are shuffled to regions in id order so the draw is reproducible.
  std::unordered_map<std::string, int> region_of;
  auto rng = make_rng(seed);
  for (const auto& u : users) {
    region_of.emplace(u, static_cast<int>(uniform_below(rng, m.codes.size())));
  }
  for (const auto& r : recs) {
    m.at(region_of[r.u1], region_of[r.u2]) += 1;
  }
  return m;
}

void write_matrix(std::ostream& out, const RegionDiffusionMatrix& m) {
  out << "region";
  for (const auto& c : m.codes) out << '\t' << c;
  out << '\n';
  for (std::size_t r = 0; r < m.codes.size(); ++r) {
    out << m.codes[r];
    for (std::size_t c = 0; c < m.codes.size(); ++c) {
      out << '\t' << m.at(static_cast<int>(r), static_cast<int>(c));
    }
    out << '\n';
  }
}

PageDistribution page_view_distribution(std::span<const PostViewRecord> recs,
                                        const std::string& pid,
                                        const RegionMap& map) {
  bool known = false;
  PageDistribution dist;
  dist.pid = pid;
  std::vector<PostViewRecord> page_recs;
  for (const auto& r : recs) {
    if (r.pid != pid) continue;
    known = true;
    page_recs.push_back(r);
    if (auto region = map.resolve(r.ip)) {
      dist.viewer_counts[*region] += 1;
    } else {
      ++dist.unresolved;
    }
  }
  if (!known) throw UnknownPageError("no records for page: " + pid);

  const auto forest = diffusion::build_forest(page_recs, pid);
  // Origin = home of the earliest-active root (ties to the smaller id).
  const std::string* origin_root = nullptr;
  std::int64_t origin_t = 0;
  for (const auto& root : forest.roots) {
    const auto vt = forest.view_time.find(root);
    const std::int64_t t =
        vt == forest.view_time.end() ? std::int64_t{0} : vt->second;
    if (!origin_root || t < origin_t) {
      origin_root = &root;
      origin_t = t;
    }
  }
  if (origin_root) {
    const auto homes = assign_home_regions(recs, map);
    auto it = homes.find(*origin_root);
    if (it != homes.end()) dist.origin_region = it->second;
  }
  return dist;
}

FpEstimate estimate_fp(std::span<const PostViewRecord> recs,
                       const RegionMap& map, DayWindow home_window,
                       DayWindow holiday_window, const DpmConfig& config) {
  if (home_window.empty() || holiday_window.empty()) {
    throw InputError("home and holiday windows must be non-empty");
  }

  std::map<std::string, std::map<std::string, std::int64_t>> home_tally;
  std::map<std::string, std::vector<std::int64_t>> holiday_counts;
  for (const auto& r : recs) {
    const auto region = map.resolve(r.ip);
    if (!region) continue;
    const int day = epoch_day(r.t);
    if (home_window.contains(day)) {
      home_tally[r.u2][*region] += 1;
    }
    if (holiday_window.contains(day)) {
      auto [it, fresh] = holiday_counts.try_emplace(
          r.u2, std::vector<std::int64_t>(map.region_count(), 0));
      it->second[map.region_index(*region)] += 1;
    }
  }

  // Users with both a home and holiday observations, in id order.
  std::vector<const std::string*> users;
  std::vector<std::vector<std::int64_t>> observations;
  for (const auto& [user, counts] : holiday_counts) {
    if (home_tally.count(user)) {
      users.push_back(&user);
      observations.push_back(counts);
    }
  }
  FpEstimate est;
  if (observations.empty()) return est;

  const auto fit = dpm_fit(observations, config);
  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto& tally = home_tally[*users[i]];
    auto best = tally.begin();
    for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const std::string& home = best->first;

    const auto& profile = fit.profiles[fit.assignments[i]];
    int arg = 0;
    for (int r = 1; r < static_cast<int>(profile.size()); ++r) {
      if (profile[r] > profile[arg]) arg = r;
    }
    const std::string& remote = map.region_codes()[arg];
    if (remote != home) est.fp[{home, remote}] += 1;
  }
  return est;
}

FpEstimate read_fp(std::istream& in) {
  FpEstimate est;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string home, remote, count;
    if (!std::getline(ss, home, ',') || !std::getline(ss, remote, ',') ||
        !std::getline(ss, count)) {
      throw InputError("fp line " + std::to_string(lineno) +
                       ": expected 'home,remote,count'");
    }
    if (home == remote) {
      throw InputError("fp line " + std::to_string(lineno) +
                       ": home and remote regions are equal");
    }
    est.fp[{home, remote}] += std::stoll(count);
  }
  return est;
}

FpEstimate read_fp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open fp file: " + path);
  return read_fp(in);
}

double correlate_census(const FpEstimate& est, const FpEstimate& census) {
  std::vector<double> x, y;
  for (const auto& [cell, count] : est.fp) {
    auto it = census.fp.find(cell);
    if (it == census.fp.end()) continue;
    x.push_back(static_cast<double>(count));
    y.push_back(static_cast<double>(it->second));
  }
  if (x.size() < 3) {
    throw InsufficientCellsError("need >= 3 shared cells, got " +
                                 std::to_string(x.size()));
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw InsufficientCellsError("degenerate cells: zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace msnlab::geo
