#include "samp/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

// The equilibrium model: per destination, riders follow optimal strategies
// (board the first arriving vehicle among an attractive set of lines), per
// Spiess-style frequency-based assignment. The label phase is a label-setting
// sweep over arcs in nondecreasing expected-cost order:
//
//   - a Board arc of line l is a frequency option; accepting it at node i
//     merges it into the attractive set, u_i = (1 + sum f_a v_a) / sum f_a,
//     which for the first option reduces to v + 1/f;
//   - Walk/Line/Alight arcs are deterministic (infinite frequency); accepting
//     one replaces the node's attractive set outright, u_i = v.
//
// Acceptance uses strict inequality (v < u_i), which with nonnegative costs
// guarantees each arc needs examining at most once and keeps zero-cost
// board/alight cycles out of every strategy. Loading replays the acceptance
// events in reverse: by the time a node distributes its volume, every arc
// feeding it has already been processed, because an arc into node i can only
// be accepted after u_i is final.
//
// Congestion couples through the conical factor on Line-arc costs; the outer
// loop is the method of successive averages with step 1/k, and the reported
// relative gap is recomputable from the returned flows alone (relative_gap).

namespace samp {

double conical_congestion_factor(double volume, double capacity, double alpha) {
  if (alpha <= 1) throw ValidationError("conical alpha must exceed 1");
  if (volume < 0 || capacity < 0)
    throw ValidationError("conical factor needs nonnegative volume and capacity");
  // Exact zero-flow anchor. The closed form below lands within 1 ulp of 1 but
  // not always on it (alpha = 4 misses), and zero flow must cost exactly base.
  if (volume == 0) return 1.0;
  if (capacity == 0)
    throw ValidationError("conical factor undefined for positive volume on zero capacity");
  const double r = volume / capacity;
  const double beta = (2 * alpha - 1) / (2 * alpha - 2);
  const double s = alpha * (1 - r);
  return 2 + std::sqrt(s * s + beta * beta) - s - beta;
}

bool check_user_cost_bound(double current, double baseline, double epsilon) {
  if (std::isinf(epsilon)) return true;
  if (baseline <= 0) throw ValidationError("user-cost bound needs a positive baseline");
  const double bound = (1 + epsilon) * baseline;
  return current <= bound * (1 + kUserCostSlack);
}

UserCostBreakdown user_cost_breakdown(const TransitNetwork& net,
                                      const AssignmentResult& result,
                                      const UserCostWeights& w) {
  if (result.flows.size() != net.arcs.size())
    throw ValidationError("assignment result does not match network");
  UserCostBreakdown b;
  for (const Arc& a : net.arcs) {
    if (a.kind == ArcKind::Line) b.in_vehicle += a.base_time * result.flows[a.id];
    else if (a.kind == ArcKind::Walk) b.walking += a.base_time * result.flows[a.id];
  }
  b.waiting = result.waiting_total;
  b.total = w.theta1 * b.in_vehicle + w.theta2 * b.walking + w.theta3 * b.waiting;
  return b;
}

namespace {

struct HeapItem {
  double value;
  ArcId arc;
};
struct HeapGreater {
  bool operator()(const HeapItem& a, const HeapItem& b) const {
    if (a.value != b.value) return a.value > b.value;
    return a.arc > b.arc;  // deterministic tie order
  }
};

// Demand grouped by destination for the per-destination sweeps.
struct DestGroup {
  NodeId destination;
  std::vector<std::pair<NodeId, double>> demands;  // origin -> trips
};

std::vector<DestGroup> group_by_destination(const TransitNetwork& net,
                                            const ODMatrix& od) {
  std::vector<ODEntry> entries;
  entries.reserve(od.entries.size());
  for (const ODEntry& e : od.entries) {
    if (e.demand < 0) throw ValidationError("negative OD demand");
    if (e.origin < 0 || e.origin >= static_cast<NodeId>(net.nodes.size()) ||
        e.destination < 0 || e.destination >= static_cast<NodeId>(net.nodes.size()))
      throw ValidationError("OD entry references unknown node");
    if (net.nodes[e.origin].kind == NodeKind::Boarding ||
        net.nodes[e.destination].kind == NodeKind::Boarding)
      throw ValidationError("OD entry references a boarding node");
    if (e.demand == 0 || e.origin == e.destination) continue;
    entries.push_back(e);
  }
  std::sort(entries.begin(), entries.end(), [](const ODEntry& a, const ODEntry& b) {
    if (a.destination != b.destination) return a.destination < b.destination;
    return a.origin < b.origin;
  });
  std::vector<DestGroup> groups;
  for (const ODEntry& e : entries) {
    if (groups.empty() || groups.back().destination != e.destination)
      groups.push_back({e.destination, {}});
    auto& ds = groups.back().demands;
    if (!ds.empty() && ds.back().first == e.origin)
      ds.back().second += e.demand;  // merge duplicate pairs
    else
      ds.emplace_back(e.origin, e.demand);
  }
  return groups;
}

class StrategySweeper {
 public:
  StrategySweeper(const TransitNetwork& net, const FleetVector& y)
      : net_(net), n_(net.nodes.size()), m_(net.arcs.size()) {
    freq_.resize(net.lines.size());
    for (const Line& l : net.lines) freq_[l.id] = line_frequency(net, y, l.id);
    usable_.resize(m_);
    for (const Arc& a : net.arcs)
      usable_[a.id] = a.line < 0 || freq_[a.line] > 0;
    cost_.assign(m_, 0.0);
    u_.assign(n_, 0);
    w_.assign(n_, 0);
    f_.assign(n_, 0);
    vol_.assign(n_, 0);
    mode_.assign(n_, 0);
    det_arc_.assign(n_, -1);
    node_ver_.assign(n_, 0);
    arc_ver_.assign(m_, 0);
  }

  // Line-arc costs from current flows; other kinds keep base time (Board arcs
  // store zero, their wait lives in the labels).
  void set_costs(const std::vector<double>* flows, const FleetVector& y,
                 const AssignmentConfig& cfg) {
    for (const Arc& a : net_.arcs) {
      double c = a.base_time;
      if (a.kind == ArcKind::Line && usable_[a.id] && cfg.congestion && flows) {
        c *= conical_congestion_factor((*flows)[a.id],
                                       line_capacity(net_, y, a.line), cfg.alpha);
      }
      cost_[a.id] = c;
    }
  }

  const std::vector<double>& costs() const { return cost_; }

  // One full strategy assignment of every destination group under the current
  // costs. Returns flows and total expected waiting time.
  void sweep(const std::vector<DestGroup>& groups, std::vector<double>& flows,
             double& waiting) {
    flows.assign(m_, 0.0);
    waiting = 0;
    for (const DestGroup& g : groups) assign_destination(g, flows, waiting);
  }

 private:
  static constexpr char kUnreached = 0, kFrequency = 1, kDeterministic = 2;

  void touch(NodeId i) {
    if (node_ver_[i] == ver_) return;
    node_ver_[i] = ver_;
    u_[i] = kInf;
    w_[i] = 1.0;  // numerator of the combined-frequency label
    f_[i] = 0.0;
    vol_[i] = 0.0;
    mode_[i] = kUnreached;
    det_arc_[i] = -1;
    touched_.push_back(i);
  }

  void push_in_arcs(NodeId i, double base) {
    for (ArcId aid : net_.in_arcs(i)) {
      if (!usable_[aid] || arc_ver_[aid] == ver_) continue;
      heap_.push_back({base + cost_[aid], aid});
      std::push_heap(heap_.begin(), heap_.end(), HeapGreater{});
    }
  }

  void assign_destination(const DestGroup& g, std::vector<double>& flows,
                          double& waiting) {
    ++ver_;
    heap_.clear();
    events_.clear();
    touched_.clear();

    const NodeId t = g.destination;
    touch(t);
    u_[t] = 0;
    mode_[t] = kDeterministic;  // terminal: never distributes volume
    push_in_arcs(t, 0.0);

    // Early termination: stop once every demand origin's label is final,
    // which holds as soon as the pop value reaches it (strict acceptance
    // prevents later changes at or above the current pop level).
    pending_.assign(g.demands.size(), 0);
    for (std::size_t k = 0; k < g.demands.size(); ++k)
      pending_[k] = static_cast<NodeId>(k);
    std::size_t remaining = pending_.size();

    while (!heap_.empty() && remaining > 0) {
      std::pop_heap(heap_.begin(), heap_.end(), HeapGreater{});
      HeapItem item = heap_.back();
      heap_.pop_back();
      const ArcId aid = item.arc;
      if (arc_ver_[aid] == ver_) continue;  // already examined
      const Arc& a = net_.arcs[aid];
      // Stale if the head label improved after this entry was pushed; the
      // fresher entry is still in the heap.
      if (item.value != u_[a.head] + cost_[aid]) continue;
      arc_ver_[aid] = ver_;

      const NodeId i = a.tail;
      touch(i);
      if (item.value < u_[i]) {
        if (a.kind == ArcKind::Board) {
          const double fa = freq_[a.line];
          w_[i] += fa * item.value;
          f_[i] += fa;
          u_[i] = w_[i] / f_[i];
          mode_[i] = kFrequency;
        } else {
          u_[i] = item.value;
          mode_[i] = kDeterministic;
          det_arc_[i] = aid;
        }
        events_.push_back(aid);
        push_in_arcs(i, u_[i]);
      }

      // Retire finalized demand origins.
      for (std::size_t k = 0; k < remaining;) {
        const NodeId s = g.demands[pending_[k]].first;
        if (node_ver_[s] == ver_ && u_[s] <= item.value) {
          pending_[k] = pending_[--remaining];
        } else {
          ++k;
        }
      }
    }

    for (std::size_t k = 0; k < remaining; ++k) {
      const NodeId s = g.demands[pending_[k]].first;
      if (node_ver_[s] != ver_ || !std::isfinite(u_[s]))
        throw UnreachableDemandError(s, t);
    }

    // Load demand through the final attractive sets, replaying acceptance
    // events newest-first. A frequency node splits its volume f_a / F_i per
    // attractive Board arc; a deterministic node sends everything down its
    // single surviving arc. Events superseded by a later deterministic
    // acceptance at the same node are skipped.
    for (const auto& [s, demand] : g.demands) vol_[s] += demand;
    for (auto it = events_.rbegin(); it != events_.rend(); ++it) {
      const ArcId aid = *it;
      const Arc& a = net_.arcs[aid];
      const NodeId i = a.tail;
      if (mode_[i] == kDeterministic && det_arc_[i] != aid) continue;
      const double vi = vol_[i];
      if (vi == 0) continue;
      const double share =
          mode_[i] == kDeterministic ? vi : vi * freq_[a.line] / f_[i];
      flows[aid] += share;
      vol_[a.head] += share;
    }
    for (NodeId i : touched_)
      if (mode_[i] == kFrequency && vol_[i] > 0) waiting += vol_[i] / f_[i];
  }

  const TransitNetwork& net_;
  std::size_t n_, m_;
  std::vector<double> freq_, cost_;
  std::vector<char> usable_;
  std::vector<double> u_, w_, f_, vol_;
  std::vector<char> mode_;
  std::vector<ArcId> det_arc_;
  std::vector<std::uint32_t> node_ver_, arc_ver_;
  std::uint32_t ver_ = 0;
  std::vector<HeapItem> heap_;
  std::vector<ArcId> events_;
  std::vector<NodeId> touched_, pending_;
};

double cost_of_flows(const std::vector<double>& cost,
                     const std::vector<double>& flows, double waiting) {
  double total = waiting;
  for (std::size_t a = 0; a < flows.size(); ++a) total += cost[a] * flows[a];
  return total;
}

}  // namespace

AssignmentResult transit_assignment(const TransitNetwork& net,
                                    const FleetVector& y, const ODMatrix& od,
                                    const AssignmentConfig& cfg) {
  validate_fleet_bounds(net, y);
  if (cfg.msa_tolerance <= 0 || cfg.msa_max_iterations < 1)
    throw ValidationError("assignment config needs positive tolerance and iterations");

  const auto groups = group_by_destination(net, od);
  StrategySweeper sweeper(net, y);

  AssignmentResult result;
  result.flows.assign(net.arcs.size(), 0.0);

  if (groups.empty()) {
    result.iterations = 0;
    result.gap = 0;
    return result;
  }

  if (!cfg.congestion) {
    // Costs never depend on flows: a single sweep is the exact equilibrium.
    sweeper.set_costs(nullptr, y, cfg);
    sweeper.sweep(groups, result.flows, result.waiting_total);
    result.iterations = 1;
    result.gap = 0;
    return result;
  }

  std::vector<double> aux(net.arcs.size(), 0.0);
  double aux_wait = 0;
  int updates = 0;
  while (true) {
    sweeper.set_costs(&result.flows, y, cfg);
    sweeper.sweep(groups, aux, aux_wait);
    if (updates > 0) {
      const double best_response = cost_of_flows(sweeper.costs(), aux, aux_wait);
      const double current =
          cost_of_flows(sweeper.costs(), result.flows, result.waiting_total);
      result.gap = best_response > 0 ? (current - best_response) / best_response : 0;
      result.iterations = updates;
      if (result.gap <= cfg.msa_tolerance || updates >= cfg.msa_max_iterations)
        return result;
    }
    ++updates;
    const double step = 1.0 / updates;
    for (std::size_t a = 0; a < aux.size(); ++a)
      result.flows[a] += step * (aux[a] - result.flows[a]);
    result.waiting_total += step * (aux_wait - result.waiting_total);
  }
}

double relative_gap(const TransitNetwork& net, const FleetVector& y,
                    const ODMatrix& od, const AssignmentConfig& cfg,
                    const AssignmentResult& result) {
  const auto groups = group_by_destination(net, od);
  if (groups.empty()) return 0;
  StrategySweeper sweeper(net, y);
  sweeper.set_costs(cfg.congestion ? &result.flows : nullptr, y, cfg);
  std::vector<double> aux;
  double aux_wait = 0;
  sweeper.sweep(groups, aux, aux_wait);
  const double best_response = cost_of_flows(sweeper.costs(), aux, aux_wait);
  const double current =
      cost_of_flows(sweeper.costs(), result.flows, result.waiting_total);
  return best_response > 0 ? (current - best_response) / best_response : 0;
}

}  // namespace samp
