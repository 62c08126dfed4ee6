#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msnlab/dates.hpp"
#include "msnlab/dpm.hpp"
#include "msnlab/records.hpp"

namespace msnlab::geo {

using records::PostViewRecord;

// CIDR prefix table with longest-prefix-match lookup.
class RegionMap {
 public:
  void add(const std::string& cidr, const std::string& region);
  // Lines "cidr,region_code", '#' comments.
  static RegionMap from_stream(std::istream& in);
  static RegionMap from_file(const std::string& path);
  // 10.r.0.0/16 -> region_code(r), matching the synthetic generators.
  static RegionMap synthetic(int n_regions = 34);

  std::optional<std::string> resolve(std::uint32_t ip) const;
  // Distinct region codes, sorted; the closed set for matrices.
  const std::vector<std::string>& region_codes() const { return codes_; }
  int region_index(const std::string& code) const;  // -1 when unknown
  int region_count() const { return static_cast<int>(codes_.size()); }

 private:
  struct Entry {
    std::uint32_t prefix = 0;
    int bits = 0;
    std::string region;
  };
  std::vector<Entry> entries_;
  std::vector<std::string> codes_;
  void rebuild_codes();
};

std::optional<std::string> resolve_region(std::uint32_t ip,
                                          const RegionMap& map);

// Plurality region over one user's resolved view records; ties take the
// lexicographically smallest code. nullopt when nothing resolves.
std::optional<std::string> assign_home_region(
    std::span<const PostViewRecord> user_records, const RegionMap& map);

// Home region for every viewer with at least one resolvable record.
std::map<std::string, std::string> assign_home_regions(
    std::span<const PostViewRecord> recs, const RegionMap& map);

struct RegionDiffusionMatrix {
  std::vector<std::string> codes;     // sorted region codes
  std::vector<std::int64_t> counts;   // row-major, row = owner home region
  std::int64_t spill = 0;             // records with an unresolved endpoint
  DayWindow period;

  std::int64_t at(int row, int col) const {
    return counts[static_cast<std::size_t>(row) * codes.size() + col];
  }
  std::int64_t& at(int row, int col) {
    return counts[static_cast<std::size_t>(row) * codes.size() + col];
  }
  std::int64_t total() const;
  std::int64_t trace() const;
};

// D[home(u1)][region(view ip)] over records in the period.
RegionDiffusionMatrix build_region_matrix(std::span<const PostViewRecord> recs,
                                          const RegionMap& map,
                                          DayWindow period);

// trace / total. Throws EmptyMatrixError on an all-zero matrix.
double homophily_index(const RegionDiffusionMatrix& m);
// Diagonal share per row; rows without mass report 0.
std::vector<double> per_region_homophily(const RegionDiffusionMatrix& m);

// Null model: every user redrawn to a uniformly random region.
RegionDiffusionMatrix baseline_matrix(std::span<const PostViewRecord> recs,
                                      const RegionMap& map,
                                      std::uint64_t seed);

// TSV with a region-code header row and column.
void write_matrix(std::ostream& out, const RegionDiffusionMatrix& m);

struct PageDistribution {
  std::string pid;
  std::optional<std::string> origin_region;  // home of the earliest root
  std::map<std::string, std::int64_t> viewer_counts;
  std::int64_t unresolved = 0;
};

PageDistribution page_view_distribution(std::span<const PostViewRecord> recs,
                                        const std::string& pid,
                                        const RegionMap& map);

// Floating population: keyed by (home region, remote region), home != remote.
struct FpEstimate {
  std::map<std::pair<std::string, std::string>, std::int64_t> fp;
};

// Home from the home window, remote as the dominant region of the user's
// mixture component fitted on holiday-window region counts. Users whose
// home and remote regions agree are excluded.
FpEstimate estimate_fp(std::span<const PostViewRecord> recs,
                       const RegionMap& map, DayWindow home_window,
                       DayWindow holiday_window, const DpmConfig& config);

// Lines "home_region,remote_region,count".
FpEstimate read_fp(std::istream& in);
FpEstimate read_fp_file(const std::string& path);

// Pearson correlation over the cells present in both estimates.
double correlate_census(const FpEstimate& est, const FpEstimate& census);

}  // namespace msnlab::geo
