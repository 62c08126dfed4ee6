#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "msnlab/dates.hpp"
#include "msnlab/geo.hpp"
#include "msnlab/records.hpp"

namespace msnlab::backbone {

using records::PostViewRecord;

// Location graph with positive edge weights. Distances are all-pairs
// shortest paths, computed once at construction. Every node is a candidate
// server site; each region's representative is the first node declared
// with that region code.
class BackboneGraph {
 public:
  static BackboneGraph build(
      std::span<const std::pair<std::string, std::string>> nodes,
      std::span<const std::tuple<std::string, std::string, double>> edges);
  // Text format: "N,node_id,region_code" and "E,node_a,node_b,distance",
  // '#' lines are comments.
  static BackboneGraph from_stream(std::istream& in);
  static BackboneGraph from_file(const std::string& path);

  int node_count() const { return static_cast<int>(ids_.size()); }
  const std::string& id_of(int i) const { return ids_[i]; }
  int index_of(const std::string& id) const;  // -1 when unknown
  const std::string& region_of(int i) const { return regions_[i]; }
  // Candidate sites in ascending id order.
  const std::vector<int>& candidates() const { return candidates_; }
  // Representative node of a region, -1 when the region is not declared.
  int representative(const std::string& region) const;
  double dist(int a, int b) const {
    return dist_[static_cast<std::size_t>(a) * ids_.size() + b];
  }
  // True when the representatives of the two regions share an edge.
  bool regions_adjacent(const std::string& a, const std::string& b) const;

 private:
  std::vector<std::string> ids_;      // declaration order
  std::vector<std::string> regions_;  // per node
  std::map<std::string, int> index_;
  std::map<std::string, int> rep_;    // region -> first declared node
  std::vector<int> candidates_;
  std::vector<double> dist_;
  std::set<std::pair<int, int>> edge_set_;
};

// Region-pair message counts per day.
struct DemandMatrix {
  std::map<std::tuple<std::string, std::string, int>, std::int64_t> f;
  std::int64_t unresolved = 0;  // records with an unmappable endpoint
  DayWindow period;

  DayWindow observed_days() const;
};

// f(a,b,day) counts records whose owner's home region is a and whose view
// happened from region b. Owner homes come from the full record span.
DemandMatrix derive_demand(std::span<const PostViewRecord> recs,
                           const geo::RegionMap& map, DayWindow window);

// TSV "day\tregion_a\tregion_b\tcount" with ISO dates.
DemandMatrix read_demand(std::istream& in);
DemandMatrix read_demand_file(const std::string& path);
void write_demand(std::ostream& out, const DemandMatrix& demand);

// Window-aggregated ordered pair counts; optional symmetric folding.
std::map<std::pair<std::string, std::string>, std::int64_t> aggregate_pairs(
    const DemandMatrix& demand, DayWindow window, bool symmetric = false);

// min over servers s of d(a,s) + d(s,b).
double comm_distance(const BackboneGraph& g, const std::string& a,
                     const std::string& b,
                     const std::set<std::string>& servers);

double total_load(const BackboneGraph& g, const DemandMatrix& demand,
                  const std::set<std::string>& servers, DayWindow window);

enum class Strategy { kReverseGreedy, kNaiveGreedy, kOptimal };

struct PlacementResult {
  std::set<std::string> servers;
  double load = 0.0;
};

// Starts from every candidate site and repeatedly drops the site whose
// removal hurts least (ties: drop the lexicographically largest id).
PlacementResult reverse_greedy(const BackboneGraph& g,
                               const DemandMatrix& demand, int k,
                               DayWindow window, int threads = 1);
// Forward greedy; first pick minimizes the single-site load, ties take the
// lexicographically smallest id.
PlacementResult naive_greedy(const BackboneGraph& g,
                             const DemandMatrix& demand, int k,
                             DayWindow window, int threads = 1);
// Full enumeration, guarded at 10^7 subsets; ties resolve to the
// lexicographically first subset.
PlacementResult optimal_exhaustive(const BackboneGraph& g,
                                   const DemandMatrix& demand, int k,
                                   DayWindow window, int threads = 1);
PlacementResult place(const BackboneGraph& g, const DemandMatrix& demand,
                      int k, DayWindow window, Strategy strategy,
                      int threads = 1);

std::vector<std::pair<int, double>> cost_curve(const BackboneGraph& g,
                                               const DemandMatrix& demand,
                                               std::span<const int> ks,
                                               DayWindow window,
                                               Strategy strategy,
                                               int threads = 1);

enum class DayType { kWeekday = 0, kWeekend = 1, kHoliday = 2 };

// Spring Festival week of the collection period.
std::set<int> default_holidays();
DayType day_type(int day, const std::set<int>& holidays);

// Per-pair day-type means with one smoothing step over pairs whose other
// endpoint is region-adjacent in the backbone graph.
struct TrafficModel {
  std::map<std::pair<std::string, std::string>, std::array<double, 3>> rates;
  double lambda = 0.2;
  DayWindow train_window;
  std::set<int> holidays;

  double predict(const std::string& a, const std::string& b, int day) const;
};

TrafficModel fit_traffic_model(const DemandMatrix& demand,
                               const BackboneGraph& g, DayWindow train_window,
                               double lambda = 0.2,
                               const std::set<int>& holidays = {});

struct PredictionError {
  double error_rate = 0.0;      // mean relative error over actual>0 cells
  double zero_cell_mass = 0.0;  // predicted mass on actual==0 cells
  std::int64_t cells = 0;
  std::int64_t zero_cells = 0;
};

PredictionError evaluate_prediction(const TrafficModel& model,
                                    const DemandMatrix& demand,
                                    DayWindow test_window);

}  // namespace msnlab::backbone
