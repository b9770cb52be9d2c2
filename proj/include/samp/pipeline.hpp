#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "samp/assignment.hpp"
#include "samp/common.hpp"
#include "samp/network.hpp"

namespace samp {

// 4 ft/sec walking, expressed as minutes per mile of L1 distance.
inline constexpr double kWalkMinutesPerMile = 22.0;

struct IpfResult {
  Matrix<double> matrix;
  int iterations = 0;     // row+column scaling passes performed
  double max_error = 0;   // worst absolute marginal deviation at return
  bool converged = false;
};

// Alternating row/column scaling toward the target marginals. Rows or
// columns whose seed sums to zero stay zero; if their target is positive the
// result cannot converge and max_error reports the shortfall.
IpfResult ipf_balance(Matrix<double> seed, const std::vector<double>& row_targets,
                      const std::vector<double>& col_targets, double tolerance,
                      int max_iterations);

struct IPFConfig {
  int max_iterations = 50;
  double tolerance = 0.001;    // absolute marginal error
  double gamma_mean = 43.8;    // trip-length distribution, minutes
  double gamma_std = 20.0;
};

// Gamma density parameterized by mean and standard deviation
// (shape = (mean/std)^2, scale = std^2/mean). Zero for x <= 0.
double gamma_density(double x, double mean, double std_dev);

// Seeds entries with the gamma density of the zero-wait shortest travel time
// between stops, balances to the boarding totals (alightings mirror
// boardings), and rounds to whole trips. Unreachable pairs and the diagonal
// stay structurally zero. details (optional) receives the pre-rounding IPF
// outcome.
ODMatrix build_od_ipf(const TransitNetwork& net,
                      const std::vector<std::pair<NodeId, double>>& boardings,
                      const IPFConfig& cfg, IpfResult* details = nullptr);

struct ClusterStats {
  double mean = 0;
  double stddev = 0;
  double median = 0;
  double max = 0;
};

struct ClusterResult {
  std::vector<double> cx, cy;       // centroid coordinates
  std::vector<int> assignment;      // point -> centroid index
  ClusterStats stats;               // point-to-centroid distances (Euclidean)
  int iterations = 0;
};

// Lloyd's k-means from a seeded random sample of the points. A cluster that
// empties is reseeded at the point currently farthest from its centroid.
ClusterResult cluster_stops(const std::vector<double>& xs,
                            const std::vector<double>& ys, int k,
                            std::uint64_t seed);

struct ArtificialNetConfig {
  int grid_rows = 7;            // east/west roads, one line each
  int grid_cols = 11;           // north/south roads, one line each
  double extent_x = 1.5;        // miles spanned by a row
  double extent_y = 0.9;        // miles spanned by a column
  double speed_min = 0.3, speed_max = 0.6;    // bus speed, miles/minute
  double dwell_min = 0.5, dwell_max = 0.75;   // stopping time per arc, minutes
  double layover_min = 20, layover_max = 30;  // per circuit, minutes
  int extra_stops_max = 2;      // per road segment, uniform {0..max}
  double walk_cutoff = 0.12;    // stop-to-stop L1 miles
  int walk_max_degree = 5;      // nearest qualifying stops per stop
  int community_count = 30;
  double community_min_spacing = 0.15;  // miles
  double population_min = 1000, population_max = 3000;
  int facility_count = 12;
  double poi_walk_cutoff = 0.25;  // community/facility to stop, L1 miles
  int total_fleet = 200;
  int line_fleet_min = 1;
  int line_fleet_max = 20;
  double seats = 39;            // one bus type
  double horizon = 60;          // minutes
  double od_gamma_mean = 2.75, od_gamma_std = 1.25;  // trip length, minutes
  double boarding_share = 0.30;  // of each community's population
  double perturb_min = -2, perturb_max = 2;  // additive seed-matrix noise
  int ipf_max_iterations = 50;
  double ipf_tolerance = 0.001;
  int placement_retry_budget = 20000;  // community rejection-sampling draws

  // Follow the proportional fleet split with first-improvement reassignment
  // transfers that minimize user cost (uncongested assignment, unit
  // weights). Off by default: it multiplies generation cost a few
  // hundredfold, and only runs that rely on a user-cost locally optimal
  // seed fleet need it.
  bool optimize_seed_fleet = false;

  std::uint64_t seed = 1;
};

struct GeneratedInstance {
  TransitNetwork network;
  ODMatrix od;
};

// Lattice city with one out-and-back line per road, randomly interspersed
// extra stops, uniformly placed communities (rejection-sampled for spacing)
// and facilities, and an IPF-balanced stop-level OD matrix. The initial
// fleet splits cfg.total_fleet across lines by shortest-path demand share.
GeneratedInstance generate_artificial(const ArtificialNetConfig& cfg);

// Parses config overrides from JSON text (keys named as the struct fields);
// unknown keys are schema errors so typos fail loudly.
ArtificialNetConfig artificial_config_from_json(const std::string& text,
                                                const std::string& origin);

// User cost of y under a single uncongested strategy assignment; the descent
// objective for the seed fleet. Exposed so tests can confirm the generator's
// local-optimality claim independently.
double uncongested_user_cost(const TransitNetwork& net, const ODMatrix& od,
                             const FleetVector& y);

// First-improvement single-vehicle transfers between same-type lines until
// no transfer lowers uncongested_user_cost. Returns the final cost.
double seed_fleet_descent(const TransitNetwork& net, const ODMatrix& od,
                          FleetVector& y);

struct GtfsIngestConfig {
  int clusters = 100;
  double walk_cutoff = 0.75;      // miles, L1
  std::string service_id;         // empty: keep every trip
  double horizon = 1440;          // minutes
  double bus_seats = 39;
  double train_seats = 228;
  double min_headway = 30;        // minutes; sets each line's fleet floor
  std::uint64_t seed = 1;         // stop-clustering initialization
};

struct IngestLineStat {
  LineId line = -1;
  std::string route_id;
  double visits_per_stop = 0;   // arrivals per unique stop over the service day
  double span_minutes = 0;      // first to last arrival
  double frequency = 0;         // visits_per_stop / active minutes
  int initial_fleet = 0;
};

struct IngestResult {
  TransitNetwork network;
  ClusterStats cluster_stats;
  std::vector<IngestLineStat> line_stats;
  int stop_count = 0;           // raw stops before clustering
};

// Reads stops/routes/trips/stop_times tables from dir, clusters stops to
// cfg.clusters centroids, and builds the transit graph: one line per route
// (from its longest trip, mirrored for the return direction), consecutive
// same-centroid stops collapsed with their time spread over the incident
// arcs, walking arcs between nearby centroids. Coordinates become planar
// miles via an equirectangular projection about the mean stop position.
IngestResult ingest_gtfs_lite(const std::string& dir,
                              const GtfsIngestConfig& cfg);

struct ExpressParams {
  int min_stops = 18;           // eligibility threshold for a parent line
  double keep_frac = 0.1;       // of stops kept at each extreme
  double skip_saving_sec = 40;  // time saved per skipped stop
  double beta = 1.0;            // decay for the stop-scoring metric
  double min_arc_minutes = 0.01;
};

struct ExpressInfo {
  LineId express_line = -1;
  LineId parent_line = -1;
  std::vector<NodeId> kept_stops;  // stop nodes, parent order
};

// Adds an express variant of every line with at least min_stops stops: only
// the highest- and lowest-access stops survive (keep_frac of each, scored by
// the gravity metric under the initial fleet with every stop acting as a
// unit-population community), and each spanned arc sheds skip_saving_sec per
// stop passed. Express lines start with zero vehicles. The network is
// re-finalized; returns one record per line added.
std::vector<ExpressInfo> generate_express(TransitNetwork& net,
                                          const ExpressParams& params);

}  // namespace samp
