#pragma once

// Hand-sized instances shared by the test binaries. Each builder returns a
// finalized network together with the node ids a test needs to reference.

#include <string>
#include <vector>

#include "samp/access.hpp"
#include "samp/assignment.hpp"
#include "samp/network.hpp"

namespace samp::test {

inline NodeId add_node(TransitNetwork& net, NodeKind kind, double x = 0,
                       double y = 0) {
  Node n;
  n.id = static_cast<NodeId>(net.nodes.size());
  n.kind = kind;
  n.x = x;
  n.y = y;
  net.nodes.push_back(n);
  return n.id;
}

inline NodeId add_stop(TransitNetwork& net, double x = 0, double y = 0) {
  return add_node(net, NodeKind::Stop, x, y);
}

inline NodeId add_community(TransitNetwork& net, double population,
                            double x = 0, double y = 0) {
  const NodeId id = add_node(net, NodeKind::Community, x, y);
  net.nodes[id].population = population;
  return id;
}

inline NodeId add_facility(TransitNetwork& net, double quality, double x = 0,
                           double y = 0) {
  const NodeId id = add_node(net, NodeKind::Facility, x, y);
  net.nodes[id].quality = quality;
  return id;
}

inline ArcId add_arc(TransitNetwork& net, NodeId tail, NodeId head,
                     ArcKind kind, double time, LineId line = -1) {
  Arc a;
  a.id = static_cast<ArcId>(net.arcs.size());
  a.tail = tail;
  a.head = head;
  a.kind = kind;
  a.base_time = time;
  a.line = line;
  net.arcs.push_back(a);
  return a.id;
}

inline ArcId add_walk(TransitNetwork& net, NodeId a, NodeId b, double time,
                      bool both_ways = true) {
  const ArcId id = add_arc(net, a, b, ArcKind::Walk, time);
  if (both_ways) add_arc(net, b, a, ArcKind::Walk, time);
  return id;
}

struct LineSpec {
  std::vector<NodeId> stops;       // existing Stop nodes, travel order
  std::vector<double> seg_times;   // per forward segment, minutes
  double circuit_time = 60;
  double seats = 100;
  double active_fraction = 1;
  int initial_fleet = 1;
  int fleet_min = 0;
  int fleet_max = kUnboundedFleet;
  std::string vehicle_type = "bus";
  bool both_directions = false;
};

// Builds the boarding layer for one line: a boarding node per stop, forward
// (and optionally reverse) line arcs, and zero-time board/alight arcs.
inline LineId add_line(TransitNetwork& net, const LineSpec& spec) {
  Line line;
  line.id = static_cast<LineId>(net.lines.size());
  line.vehicle_type = spec.vehicle_type;
  line.circuit_time = spec.circuit_time;
  line.seats = spec.seats;
  line.active_fraction = spec.active_fraction;
  line.initial_fleet = spec.initial_fleet;
  line.fleet_min = spec.fleet_min;
  line.fleet_max = spec.fleet_max;

  for (NodeId s : spec.stops) {
    const NodeId b = add_node(net, NodeKind::Boarding, net.nodes[s].x,
                              net.nodes[s].y);
    net.nodes[b].line = line.id;
    line.boarding_sequence.push_back(b);
  }
  const auto& seq = line.boarding_sequence;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i)
    add_arc(net, seq[i], seq[i + 1], ArcKind::Line, spec.seg_times[i], line.id);
  if (spec.both_directions) {
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
      add_arc(net, seq[i + 1], seq[i], ArcKind::Line, spec.seg_times[i],
              line.id);
  }
  for (std::size_t i = 0; i < seq.size(); ++i) {
    add_arc(net, spec.stops[i], seq[i], ArcKind::Board, 0, line.id);
    add_arc(net, seq[i], spec.stops[i], ArcKind::Alight, 0, line.id);
  }
  net.lines.push_back(std::move(line));
  return static_cast<LineId>(net.lines.size() - 1);
}

// Two stops joined by two identical lines, each at frequency y/60 per minute.
// With six vehicles each, f1 = f2 = 0.1 and a rider's expected wait under the
// combined-frequency rule is 1/(f1+f2) = 5 minutes.
struct ParallelLinesToy {
  TransitNetwork net;
  NodeId from, to;
};

inline ParallelLinesToy two_parallel_lines(double seg_time = 7,
                                           int fleet_each = 6) {
  ParallelLinesToy t;
  t.from = add_stop(t.net, 0, 0);
  t.to = add_stop(t.net, 1, 0);
  for (int i = 0; i < 2; ++i) {
    LineSpec spec;
    spec.stops = {t.from, t.to};
    spec.seg_times = {seg_time};
    spec.circuit_time = 60;
    spec.initial_fleet = fleet_each;
    add_line(t.net, spec);
  }
  t.net.horizon = 60;
  t.net.finalize();
  return t;
}

// One line at frequency 0.5/min (tau = 60, y = 30), in-vehicle time 5.
struct SingleLineToy {
  TransitNetwork net;
  NodeId from, to;
};

inline SingleLineToy single_line(double seg_time = 5, int fleet = 30) {
  SingleLineToy t;
  t.from = add_stop(t.net, 0, 0);
  t.to = add_stop(t.net, 1, 0);
  LineSpec spec;
  spec.stops = {t.from, t.to};
  spec.seg_times = {seg_time};
  spec.circuit_time = 60;
  spec.initial_fleet = fleet;
  add_line(t.net, spec);
  t.net.horizon = 60;
  t.net.finalize();
  return t;
}

// Community -> 3 min walk -> stop -> line (wait 10 at f = 0.1, ride 5) ->
// stop -> 2 min walk -> facility. Door-to-door expected time 20 minutes.
struct AccessChainToy {
  TransitNetwork net;
  NodeId community, facility, stop_a, stop_b;
  LineId line;
};

inline AccessChainToy access_chain(double population = 1000,
                                   double quality = 50) {
  AccessChainToy t;
  t.stop_a = add_stop(t.net, 0, 0);
  t.stop_b = add_stop(t.net, 1, 0);
  t.community = add_community(t.net, population, -0.1, 0);
  t.facility = add_facility(t.net, quality, 1.1, 0);
  LineSpec spec;
  spec.stops = {t.stop_a, t.stop_b};
  spec.seg_times = {5};
  spec.circuit_time = 60;
  spec.initial_fleet = 6;  // f = 0.1, wait 10
  t.line = add_line(t.net, spec);
  add_arc(t.net, t.community, t.stop_a, ArcKind::Walk, 3);
  add_arc(t.net, t.stop_b, t.facility, ArcKind::Walk, 2);
  t.net.horizon = 60;
  t.net.finalize();
  return t;
}

// Forced single chain: walk 1 min, board at f = 0.5 (wait 2), ride 5. With
// demand 10 the cost split is 50 in-vehicle, 10 walking, 20 waiting.
struct UserCostToy {
  TransitNetwork net;
  ODMatrix od;
  NodeId origin, destination;
};

inline UserCostToy user_cost_chain() {
  UserCostToy t;
  t.origin = add_stop(t.net, 0, 0);
  const NodeId mid = add_stop(t.net, 0.5, 0);
  t.destination = add_stop(t.net, 1, 0);
  add_arc(t.net, t.origin, mid, ArcKind::Walk, 1);
  LineSpec spec;
  spec.stops = {mid, t.destination};
  spec.seg_times = {5};
  spec.circuit_time = 10;
  spec.initial_fleet = 5;  // f = 0.5, wait 2
  add_line(t.net, spec);
  t.net.horizon = 60;
  t.net.finalize();
  t.od.entries.push_back({t.origin, t.destination, 10});
  return t;
}

// A community that reaches the only facility through a chain of three lines,
// next to a huge community with fixed walking access to it. The big
// community dominates the crowding term, so the chain community's metric
// (the k = 1 objective) is strictly increasing in every line's fleet, and
// from the budget-tight seed every first move is a strictly worsening drop.
// Distinct circuit times keep the three drop objectives distinct: dropping
// line 0 (shortest circuit) hurts least.
struct MonotoneChainToy {
  TransitNetwork net;
  ODMatrix od;  // empty: these instances run with the cost bound disabled
  NodeId chain_community, anchor_community, facility;
};

inline MonotoneChainToy monotone_chain() {
  MonotoneChainToy t;
  std::vector<NodeId> s;
  for (int i = 0; i < 4; ++i) s.push_back(add_stop(t.net, i, 0));
  t.chain_community = add_community(t.net, 1000, -0.5, 0);
  t.facility = add_facility(t.net, 10, 3.5, 0);
  t.anchor_community = add_community(t.net, 1e6, 3.5, 0.1);
  add_arc(t.net, t.chain_community, s[0], ArcKind::Walk, 10);
  add_arc(t.net, s[3], t.facility, ArcKind::Walk, 5);
  add_arc(t.net, t.anchor_community, t.facility, ArcKind::Walk, 1);
  const double circuits[3] = {40, 60, 80};
  for (int i = 0; i < 3; ++i) {
    LineSpec spec;
    spec.stops = {s[i], s[i + 1]};
    spec.seg_times = {5};
    spec.circuit_time = circuits[i];
    spec.initial_fleet = 2;
    spec.fleet_min = 1;
    spec.fleet_max = 6;
    add_line(t.net, spec);
  }
  t.net.horizon = 60;
  t.net.finalize();
  return t;
}

// Three one-segment lines of one vehicle type serving separate communities,
// each community reaching the shared facility only through its line. Small
// bounds keep the fleet box enumerable for brute-force comparisons.
struct ThreeLineToy {
  TransitNetwork net;
  ODMatrix od;
  std::vector<NodeId> communities;
  NodeId facility;
};

inline ThreeLineToy three_line_instance(int fleet0 = 2, int fleet1 = 2,
                                        int fleet2 = 2, int fleet_max = 6) {
  ThreeLineToy t;
  const NodeId hub = add_stop(t.net, 0, 0);
  t.facility = add_facility(t.net, 10, 0, 0.1);
  add_arc(t.net, hub, t.facility, ArcKind::Walk, 1);
  const int fleets[3] = {fleet0, fleet1, fleet2};
  for (int i = 0; i < 3; ++i) {
    const double x = 1.0 + i;
    const NodeId s = add_stop(t.net, x, 0);
    const NodeId c = add_community(t.net, 1000 + 500 * i, x, 0.1);
    add_arc(t.net, c, s, ArcKind::Walk, 2);
    t.communities.push_back(c);
    LineSpec spec;
    spec.stops = {s, hub};
    spec.seg_times = {4.0 + i};
    spec.circuit_time = 30;
    spec.seats = 40;
    spec.initial_fleet = fleets[i];
    spec.fleet_min = 1;
    spec.fleet_max = fleet_max;
    spec.both_directions = true;
    add_line(t.net, spec);
    t.od.entries.push_back({s, hub, 20.0 + 10 * i});
  }
  t.net.horizon = 60;
  t.net.finalize();
  return t;
}

}  // namespace samp::test
