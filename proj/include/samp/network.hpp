#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "samp/common.hpp"

namespace samp {

enum class NodeKind { Stop, Boarding, Origin, Destination, Community, Facility };
enum class ArcKind { Line, Board, Alight, Walk };

const char* to_string(NodeKind k);
const char* to_string(ArcKind k);
NodeKind node_kind_from_string(const std::string& s);
ArcKind arc_kind_from_string(const std::string& s);

struct Node {
  NodeId id = -1;
  NodeKind kind = NodeKind::Stop;
  double x = 0;
  double y = 0;
  LineId line = -1;        // set iff kind == Boarding
  double population = 0;   // set iff kind == Community
  double quality = 0;      // set iff kind == Facility
  bool operator==(const Node&) const = default;
};

struct Arc {
  ArcId id = -1;
  NodeId tail = -1;
  NodeId head = -1;
  ArcKind kind = ArcKind::Walk;
  double base_time = 0;    // minutes; waiting on Board arcs is frequency-derived
  LineId line = -1;        // set iff kind in {Line, Board, Alight}
  bool operator==(const Arc&) const = default;
};

// fleet_max uses kUnboundedFleet for "no upper bound".
inline constexpr int kUnboundedFleet = std::numeric_limits<std::int32_t>::max();

struct Line {
  LineId id = -1;
  std::string vehicle_type;
  double circuit_time = 0;      // round-trip minutes including layover
  double seats = 0;             // passengers per vehicle
  double active_fraction = 1;   // share of the horizon the line operates
  int initial_fleet = 0;
  int fleet_min = 0;
  int fleet_max = kUnboundedFleet;
  std::vector<NodeId> boarding_sequence;  // unique boarding nodes in travel order
  bool operator==(const Line&) const = default;
};

// One integer vehicle count per line, indexed by LineId.
using FleetVector = std::vector<int>;

class TransitNetwork {
 public:
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
  std::vector<Line> lines;
  double horizon = 1440;  // minutes
  std::string distance_convention = "planar-miles";

  // Builds adjacency and validates every structural invariant. Must be called
  // after the vectors are filled; ValidationError on any breach.
  void finalize();

  std::span<const ArcId> out_arcs(NodeId n) const {
    return {out_flat_.data() + out_start_[n],
            out_flat_.data() + out_start_[n + 1]};
  }
  std::span<const ArcId> in_arcs(NodeId n) const {
    return {in_flat_.data() + in_start_[n], in_flat_.data() + in_start_[n + 1]};
  }
  const std::vector<ArcId>& line_arcs(LineId l) const { return line_arcs_[l]; }

  const std::vector<NodeId>& community_nodes() const { return communities_; }
  const std::vector<NodeId>& facility_nodes() const { return facilities_; }
  const std::vector<NodeId>& stop_nodes() const { return stops_; }

  FleetVector initial_fleet() const;

  bool operator==(const TransitNetwork& other) const {
    return nodes == other.nodes && arcs == other.arcs && lines == other.lines &&
           horizon == other.horizon &&
           distance_convention == other.distance_convention;
  }

 private:
  std::vector<int> out_start_, in_start_;
  std::vector<ArcId> out_flat_, in_flat_;
  std::vector<std::vector<ArcId>> line_arcs_;
  std::vector<NodeId> communities_, facilities_, stops_;
};

// Per-line bound check (min/max only; the budget is a solver constraint).
// Throws ValidationError when y is the wrong size or outside a line's bounds.
void validate_fleet_bounds(const TransitNetwork& net, const FleetVector& y);

// Full decision-vector feasibility: bounds plus the per-vehicle-type budget
// sum_{l in L^z} y_l <= sum_{l in L^z} y*_l. Returns false (no throw) on
// budget breach so the solver can use it as a predicate; bound breaches throw.
bool fleet_within_budget(const TransitNetwork& net, const FleetVector& y);

double line_frequency(const TransitNetwork& net, const FleetVector& y, LineId l);
double line_capacity(const TransitNetwork& net, const FleetVector& y, LineId l);

// Shortest expected travel time from each source to each target where a Board
// arc of line l costs 1/f_l (unusable when y_l = 0) and every other arc costs
// its base_time. Finite entries are floored at kAccessTimeFloor; unreachable
// pairs are +inf. Used for the access metric, so capacities are ignored.
inline constexpr double kAccessTimeFloor = 0.1;  // minutes
Matrix<double> access_travel_times(const TransitNetwork& net,
                                   const FleetVector& y,
                                   const std::vector<NodeId>& sources,
                                   const std::vector<NodeId>& targets);

// Same search without the frequency wait (Board arcs cost 0). The pipeline
// seeds OD demand with these fleet-independent times.
Matrix<double> zero_wait_travel_times(const TransitNetwork& net,
                                      const std::vector<NodeId>& sources,
                                      const std::vector<NodeId>& targets);

// Single-source shortest path with explicit board-arc waits; fills dist (and
// optionally the incoming arc per node) for reuse by the pipeline. A negative
// wait_or_zero_policy line frequency is never produced; y may be null for the
// zero-wait policy.
void shortest_path_tree(const TransitNetwork& net, const FleetVector* y,
                        NodeId source, std::vector<double>& dist,
                        std::vector<ArcId>* parent_arc);

}  // namespace samp
