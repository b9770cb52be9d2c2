#include "samp/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

namespace samp {

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Stop: return "stop";
    case NodeKind::Boarding: return "boarding";
    case NodeKind::Origin: return "origin";
    case NodeKind::Destination: return "destination";
    case NodeKind::Community: return "community";
    case NodeKind::Facility: return "facility";
  }
  return "?";
}

const char* to_string(ArcKind k) {
  switch (k) {
    case ArcKind::Line: return "line";
    case ArcKind::Board: return "board";
    case ArcKind::Alight: return "alight";
    case ArcKind::Walk: return "walk";
  }
  return "?";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "stop") return NodeKind::Stop;
  if (s == "boarding") return NodeKind::Boarding;
  if (s == "origin") return NodeKind::Origin;
  if (s == "destination") return NodeKind::Destination;
  if (s == "community") return NodeKind::Community;
  if (s == "facility") return NodeKind::Facility;
  throw SchemaError("unknown node kind '" + s + "'");
}

ArcKind arc_kind_from_string(const std::string& s) {
  if (s == "line") return ArcKind::Line;
  if (s == "board") return ArcKind::Board;
  if (s == "alight") return ArcKind::Alight;
  if (s == "walk") return ArcKind::Walk;
  throw SchemaError("unknown arc kind '" + s + "'");
}

void TransitNetwork::finalize() {
  const int n = static_cast<int>(nodes.size());
  const int m = static_cast<int>(arcs.size());
  const int nl = static_cast<int>(lines.size());

  auto fail = [](const std::string& msg) { throw ValidationError(msg); };

  for (int i = 0; i < n; ++i) {
    const Node& v = nodes[i];
    if (v.id != i) fail("node ids must be dense and ordered; got " + std::to_string(v.id) + " at index " + std::to_string(i));
    if (v.kind == NodeKind::Boarding) {
      if (v.line < 0 || v.line >= nl) fail("boarding node " + std::to_string(i) + " references invalid line");
    } else if (v.line != -1) {
      fail("non-boarding node " + std::to_string(i) + " must not reference a line");
    }
    if (v.kind == NodeKind::Community && v.population <= 0)
      fail("community node " + std::to_string(i) + " needs population > 0");
    if (v.kind == NodeKind::Facility && v.quality <= 0)
      fail("facility node " + std::to_string(i) + " needs quality > 0");
  }

  for (int a = 0; a < m; ++a) {
    const Arc& e = arcs[a];
    if (e.id != a) fail("arc ids must be dense and ordered");
    if (e.tail < 0 || e.tail >= n || e.head < 0 || e.head >= n)
      fail("arc " + std::to_string(a) + " has dangling endpoint");
    if (e.base_time < 0) fail("arc " + std::to_string(a) + " has negative time");
    const NodeKind tk = nodes[e.tail].kind;
    const NodeKind hk = nodes[e.head].kind;
    switch (e.kind) {
      case ArcKind::Line:
        if (e.line < 0 || e.line >= nl) fail("line arc " + std::to_string(a) + " missing line");
        if (tk != NodeKind::Boarding || hk != NodeKind::Boarding ||
            nodes[e.tail].line != e.line || nodes[e.head].line != e.line)
          fail("line arc " + std::to_string(a) + " must join boarding nodes of its line");
        break;
      case ArcKind::Board:
        if (e.line < 0 || e.line >= nl) fail("board arc " + std::to_string(a) + " missing line");
        if (hk != NodeKind::Boarding || nodes[e.head].line != e.line || tk == NodeKind::Boarding)
          fail("board arc " + std::to_string(a) + " must go stop-side node -> boarding node of its line");
        if (e.base_time != 0) fail("board arc " + std::to_string(a) + " must have zero stored time");
        break;
      case ArcKind::Alight:
        if (e.line < 0 || e.line >= nl) fail("alight arc " + std::to_string(a) + " missing line");
        if (tk != NodeKind::Boarding || nodes[e.tail].line != e.line || hk == NodeKind::Boarding)
          fail("alight arc " + std::to_string(a) + " must go boarding node -> stop-side node");
        break;
      case ArcKind::Walk:
        if (e.line != -1) fail("walk arc " + std::to_string(a) + " must not reference a line");
        if (tk == NodeKind::Boarding || hk == NodeKind::Boarding)
          fail("walk arc " + std::to_string(a) + " must not touch boarding nodes");
        break;
    }
  }

  // Boarding-sequence consistency: each boarding node lives in exactly one
  // line's sequence, sequence entries are unique, and the line's Line arcs
  // connect exactly sequence-adjacent nodes (either direction).
  std::vector<int> seq_owner(n, -1), seq_pos(n, -1);
  line_arcs_.assign(nl, {});
  for (int l = 0; l < nl; ++l) {
    const Line& ln = lines[l];
    if (ln.id != l) fail("line ids must be dense and ordered");
    if (ln.circuit_time <= 0) fail("line " + std::to_string(l) + " needs circuit_time > 0");
    if (ln.seats <= 0) fail("line " + std::to_string(l) + " needs seats > 0");
    if (ln.active_fraction <= 0 || ln.active_fraction > 1)
      fail("line " + std::to_string(l) + " active_fraction must lie in (0, 1]");
    if (ln.fleet_min < 0 || ln.fleet_min > ln.initial_fleet || ln.initial_fleet > ln.fleet_max)
      fail("line " + std::to_string(l) + " violates 0 <= fleet_min <= initial_fleet <= fleet_max");
    if (ln.boarding_sequence.size() < 2)
      fail("line " + std::to_string(l) + " needs at least two boarding nodes");
    for (std::size_t p = 0; p < ln.boarding_sequence.size(); ++p) {
      NodeId b = ln.boarding_sequence[p];
      if (b < 0 || b >= n || nodes[b].kind != NodeKind::Boarding || nodes[b].line != l)
        fail("line " + std::to_string(l) + " sequence entry is not one of its boarding nodes");
      if (seq_owner[b] != -1) fail("boarding node " + std::to_string(b) + " appears in two sequences");
      seq_owner[b] = l;
      seq_pos[b] = static_cast<int>(p);
    }
  }
  for (const Arc& e : arcs) {
    if (e.kind != ArcKind::Line) continue;
    line_arcs_[e.line].push_back(e.id);
    int pt = seq_pos[e.tail], ph = seq_pos[e.head];
    if (pt < 0 || ph < 0 || std::abs(pt - ph) != 1)
      fail("line arc " + std::to_string(e.id) + " does not join adjacent sequence stops");
  }
  for (const Node& v : nodes) {
    if (v.kind == NodeKind::Boarding && seq_owner[v.id] == -1)
      fail("boarding node " + std::to_string(v.id) + " missing from its line's sequence");
  }

  // CSR adjacency, arcs in id order within each bucket.
  out_start_.assign(n + 1, 0);
  in_start_.assign(n + 1, 0);
  for (const Arc& e : arcs) {
    ++out_start_[e.tail + 1];
    ++in_start_[e.head + 1];
  }
  for (int i = 0; i < n; ++i) {
    out_start_[i + 1] += out_start_[i];
    in_start_[i + 1] += in_start_[i];
  }
  out_flat_.assign(m, -1);
  in_flat_.assign(m, -1);
  std::vector<int> oc(out_start_.begin(), out_start_.end() - 1);
  std::vector<int> ic(in_start_.begin(), in_start_.end() - 1);
  for (const Arc& e : arcs) {
    out_flat_[oc[e.tail]++] = e.id;
    in_flat_[ic[e.head]++] = e.id;
  }

  communities_.clear();
  facilities_.clear();
  stops_.clear();
  for (const Node& v : nodes) {
    if (v.kind == NodeKind::Community) communities_.push_back(v.id);
    if (v.kind == NodeKind::Facility) facilities_.push_back(v.id);
    if (v.kind == NodeKind::Stop) stops_.push_back(v.id);
  }
}

FleetVector TransitNetwork::initial_fleet() const {
  FleetVector y(lines.size());
  for (const Line& l : lines) y[l.id] = l.initial_fleet;
  return y;
}

void validate_fleet_bounds(const TransitNetwork& net, const FleetVector& y) {
  if (y.size() != net.lines.size())
    throw ValidationError("fleet vector has wrong length");
  for (const Line& l : net.lines) {
    if (y[l.id] < l.fleet_min || y[l.id] > l.fleet_max)
      throw ValidationError("fleet for line " + std::to_string(l.id) +
                            " outside [" + std::to_string(l.fleet_min) + ", " +
                            (l.fleet_max == kUnboundedFleet ? std::string("inf")
                                                            : std::to_string(l.fleet_max)) +
                            "]: " + std::to_string(y[l.id]));
  }
}

bool fleet_within_budget(const TransitNetwork& net, const FleetVector& y) {
  validate_fleet_bounds(net, y);
  std::unordered_map<std::string, long long> budget, used;
  for (const Line& l : net.lines) {
    budget[l.vehicle_type] += l.initial_fleet;
    used[l.vehicle_type] += y[l.id];
  }
  for (const auto& [type, total] : used)
    if (total > budget[type]) return false;
  return true;
}

double line_frequency(const TransitNetwork& net, const FleetVector& y, LineId l) {
  if (y[l] == 0) return 0;
  return static_cast<double>(y[l]) / net.lines[l].circuit_time;
}

double line_capacity(const TransitNetwork& net, const FleetVector& y, LineId l) {
  const Line& ln = net.lines[l];
  return ln.active_fraction * net.horizon * ln.seats * line_frequency(net, y, l);
}

namespace {

// Arc costs for a plain shortest-path search: base times everywhere, plus the
// expected wait 1/f on Board arcs (or zero under the zero-wait policy).
// Zero-fleet lines are unusable.
struct ArcCostView {
  const TransitNetwork& net;
  const FleetVector* y;  // null = zero-wait policy, all lines usable

  // Riding needs service; boarding a dead line prices itself out through an
  // infinite wait; alighting is free regardless, you can always step off.
  bool usable(const Arc& a) const {
    if (!y || a.kind != ArcKind::Line) return true;
    return (*y)[a.line] > 0;
  }
  double cost(const Arc& a) const {
    if (a.kind == ArcKind::Board && y)
      return 1.0 / line_frequency(net, *y, a.line);
    return a.base_time;
  }
};

void dijkstra(const TransitNetwork& net, const ArcCostView& view, NodeId source,
              std::vector<double>& dist, std::vector<ArcId>* parent,
              const std::vector<NodeId>* stop_targets) {
  const std::size_t n = net.nodes.size();
  dist.assign(n, kInf);
  if (parent) parent->assign(n, -1);
  dist[source] = 0;

  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  heap.push({0.0, source});

  std::size_t remaining = 0;
  std::vector<char> is_target;
  if (stop_targets) {
    is_target.assign(n, 0);
    for (NodeId t : *stop_targets) {
      if (!is_target[t]) {
        is_target[t] = 1;
        ++remaining;
      }
    }
    if (remaining == 0) return;
  }

  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;  // stale entry
    if (stop_targets && is_target[u]) {
      is_target[u] = 0;
      if (--remaining == 0) return;
    }
    for (ArcId aid : net.out_arcs(u)) {
      const Arc& a = net.arcs[aid];
      if (!view.usable(a)) continue;
      double nd = d + view.cost(a);
      if (nd < dist[a.head]) {
        dist[a.head] = nd;
        if (parent) (*parent)[a.head] = aid;
        heap.push({nd, a.head});
      }
    }
  }
}

Matrix<double> times_matrix(const TransitNetwork& net, const ArcCostView& view,
                            const std::vector<NodeId>& sources,
                            const std::vector<NodeId>& targets, bool floor) {
  Matrix<double> d(sources.size(), targets.size(), kInf);
  std::vector<double> dist;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    dijkstra(net, view, sources[i], dist, nullptr, &targets);
    for (std::size_t j = 0; j < targets.size(); ++j) {
      double v = dist[targets[j]];
      if (floor && std::isfinite(v) && v < kAccessTimeFloor) v = kAccessTimeFloor;
      d(i, j) = v;
    }
  }
  return d;
}

}  // namespace

Matrix<double> access_travel_times(const TransitNetwork& net, const FleetVector& y,
                                   const std::vector<NodeId>& sources,
                                   const std::vector<NodeId>& targets) {
  validate_fleet_bounds(net, y);
  return times_matrix(net, ArcCostView{net, &y}, sources, targets, true);
}

Matrix<double> zero_wait_travel_times(const TransitNetwork& net,
                                      const std::vector<NodeId>& sources,
                                      const std::vector<NodeId>& targets) {
  return times_matrix(net, ArcCostView{net, nullptr}, sources, targets, false);
}

void shortest_path_tree(const TransitNetwork& net, const FleetVector* y,
                        NodeId source, std::vector<double>& dist,
                        std::vector<ArcId>* parent_arc) {
  dijkstra(net, ArcCostView{net, y}, source, dist, parent_arc, nullptr);
}

}  // namespace samp
