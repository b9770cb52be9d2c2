#include "samp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "samp/access.hpp"
#include "samp/rng.hpp"

namespace samp {

IpfResult ipf_balance(Matrix<double> seed, const std::vector<double>& row_targets,
                      const std::vector<double>& col_targets, double tolerance,
                      int max_iterations) {
  const std::size_t nr = seed.rows(), nc = seed.cols();
  if (row_targets.size() != nr || col_targets.size() != nc) {
    throw ValidationError("ipf target lengths do not match the seed matrix");
  }
  if (tolerance <= 0) throw ValidationError("ipf tolerance must be positive");
  for (double t : row_targets)
    if (t < 0) throw ValidationError("ipf row target is negative");
  for (double t : col_targets)
    if (t < 0) throw ValidationError("ipf column target is negative");

  IpfResult out;
  out.max_error = kInf;
  for (int it = 1; it <= max_iterations; ++it) {
    for (std::size_t r = 0; r < nr; ++r) {
      double s = 0;
      for (std::size_t c = 0; c < nc; ++c) s += seed(r, c);
      if (s > 0) {
        const double f = row_targets[r] / s;
        for (std::size_t c = 0; c < nc; ++c) seed(r, c) *= f;
      }
    }
    for (std::size_t c = 0; c < nc; ++c) {
      double s = 0;
      for (std::size_t r = 0; r < nr; ++r) s += seed(r, c);
      if (s > 0) {
        const double f = col_targets[c] / s;
        for (std::size_t r = 0; r < nr; ++r) seed(r, c) *= f;
      }
    }

    double err = 0;
    for (std::size_t r = 0; r < nr; ++r) {
      double s = 0;
      for (std::size_t c = 0; c < nc; ++c) s += seed(r, c);
      err = std::max(err, std::abs(s - row_targets[r]));
    }
    for (std::size_t c = 0; c < nc; ++c) {
      double s = 0;
      for (std::size_t r = 0; r < nr; ++r) s += seed(r, c);
      err = std::max(err, std::abs(s - col_targets[c]));
    }
    out.iterations = it;
    out.max_error = err;
    if (err <= tolerance) {
      out.converged = true;
      break;
    }
  }
  out.matrix = std::move(seed);
  return out;
}

double gamma_density(double x, double mean, double std_dev) {
  if (mean <= 0 || std_dev <= 0) {
    throw ValidationError("gamma density needs positive mean and std");
  }
  if (!(x > 0) || !std::isfinite(x)) return 0;
  const double shape = (mean / std_dev) * (mean / std_dev);
  const double scale = std_dev * std_dev / mean;
  const double log_pdf = (shape - 1) * std::log(x) - x / scale -
                         std::lgamma(shape) - shape * std::log(scale);
  return std::exp(log_pdf);
}

ODMatrix build_od_ipf(const TransitNetwork& net,
                      const std::vector<std::pair<NodeId, double>>& boardings,
                      const IPFConfig& cfg, IpfResult* details) {
  std::vector<std::pair<NodeId, double>> totals(boardings);
  std::sort(totals.begin(), totals.end());
  std::vector<NodeId> stops;
  std::vector<double> targets;
  for (const auto& [node, total] : totals) {
    if (node < 0 || node >= static_cast<NodeId>(net.nodes.size()) ||
        net.nodes[node].kind != NodeKind::Stop) {
      throw ValidationError("boardings reference non-stop node " +
                            std::to_string(node));
    }
    if (total < 0) {
      throw ValidationError("negative boardings at stop " + std::to_string(node));
    }
    if (!stops.empty() && stops.back() == node) {
      throw ValidationError("stop " + std::to_string(node) +
                            " appears twice in boardings");
    }
    if (total > 0) {
      stops.push_back(node);
      targets.push_back(total);
    }
  }
  if (stops.empty()) return {};

  const Matrix<double> t = zero_wait_travel_times(net, stops, stops);
  Matrix<double> seed(stops.size(), stops.size(), 0.0);
  for (std::size_t i = 0; i < stops.size(); ++i) {
    for (std::size_t j = 0; j < stops.size(); ++j) {
      if (i == j) continue;
      seed(i, j) = gamma_density(t(i, j), cfg.gamma_mean, cfg.gamma_std);
    }
  }

  IpfResult balanced = ipf_balance(std::move(seed), targets, targets,
                                   cfg.tolerance, cfg.max_iterations);

  ODMatrix od;
  for (std::size_t i = 0; i < stops.size(); ++i) {
    for (std::size_t j = 0; j < stops.size(); ++j) {
      const long long trips = std::llround(balanced.matrix(i, j));
      if (trips > 0) {
        od.entries.push_back({stops[i], stops[j], static_cast<double>(trips)});
      }
    }
  }
  if (details) *details = std::move(balanced);
  return od;
}

namespace {

double sq(double v) { return v * v; }

}  // namespace

ClusterResult cluster_stops(const std::vector<double>& xs,
                            const std::vector<double>& ys, int k,
                            std::uint64_t seed) {
  const std::size_t n = xs.size();
  if (ys.size() != n) throw ValidationError("cluster input lengths differ");
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw ValidationError("cluster count must lie in [1, point count]");
  }

  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.index(n - i));
    std::swap(idx[i], idx[j]);
  }

  ClusterResult out;
  out.cx.resize(k);
  out.cy.resize(k);
  for (int c = 0; c < k; ++c) {
    out.cx[c] = xs[idx[c]];
    out.cy[c] = ys[idx[c]];
  }
  out.assignment.assign(n, -1);

  constexpr int kMaxRounds = 100;
  for (int round = 1; round <= kMaxRounds; ++round) {
    out.iterations = round;
    bool changed = false;
    for (std::size_t p = 0; p < n; ++p) {
      int best = 0;
      double best_d = kInf;
      for (int c = 0; c < k; ++c) {
        const double d = sq(xs[p] - out.cx[c]) + sq(ys[p] - out.cy[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (out.assignment[p] != best) {
        out.assignment[p] = best;
        changed = true;
      }
    }

    std::vector<int> count(k, 0);
    for (int a : out.assignment) ++count[a];
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      // Reseed a starved cluster at the point worst served right now.
      std::size_t far = 0;
      double far_d = -1;
      for (std::size_t p = 0; p < n; ++p) {
        const int a = out.assignment[p];
        const double d = sq(xs[p] - out.cx[a]) + sq(ys[p] - out.cy[a]);
        if (d > far_d) {
          far_d = d;
          far = p;
        }
      }
      --count[out.assignment[far]];
      out.assignment[far] = c;
      count[c] = 1;
      out.cx[c] = xs[far];
      out.cy[c] = ys[far];
      changed = true;
    }

    std::vector<double> sx(k, 0), sy(k, 0);
    for (std::size_t p = 0; p < n; ++p) {
      sx[out.assignment[p]] += xs[p];
      sy[out.assignment[p]] += ys[p];
    }
    for (int c = 0; c < k; ++c) {
      out.cx[c] = sx[c] / count[c];
      out.cy[c] = sy[c] / count[c];
    }
    if (!changed) break;
  }

  std::vector<double> dist(n);
  for (std::size_t p = 0; p < n; ++p) {
    const int a = out.assignment[p];
    dist[p] = std::sqrt(sq(xs[p] - out.cx[a]) + sq(ys[p] - out.cy[a]));
  }
  double mean = std::accumulate(dist.begin(), dist.end(), 0.0) / n;
  double var = 0;
  for (double d : dist) var += sq(d - mean);
  std::vector<double> sorted(dist);
  std::sort(sorted.begin(), sorted.end());
  out.stats.mean = mean;
  out.stats.stddev = std::sqrt(var / n);
  out.stats.median = n % 2 ? sorted[n / 2]
                           : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  out.stats.max = sorted.back();
  return out;
}

double uncongested_user_cost(const TransitNetwork& net, const ODMatrix& od,
                             const FleetVector& y) {
  AssignmentConfig cfg;
  cfg.congestion = false;
  return user_cost(net, transit_assignment(net, y, od, cfg), UserCostWeights{});
}

double seed_fleet_descent(const TransitNetwork& net, const ODMatrix& od,
                          FleetVector& y) {
  struct Transfer {
    LineId from, to;
  };
  std::vector<Transfer> transfers;
  for (const Line& m : net.lines) {
    for (const Line& l : net.lines) {
      if (m.id != l.id && m.vehicle_type == l.vehicle_type) {
        transfers.push_back({m.id, l.id});
      }
    }
  }

  double current = uncongested_user_cost(net, od, y);
  if (transfers.empty()) return current;

  // First-improvement with a rotating cursor: after a transfer, scanning
  // resumes at the next pair rather than the front, which spreads the
  // improvements around and avoids rescanning the same prefix every time.
  std::size_t cursor = 0;
  std::size_t since_improvement = 0;
  while (since_improvement < transfers.size()) {
    const Transfer& t = transfers[cursor];
    cursor = (cursor + 1) % transfers.size();
    ++since_improvement;
    if (y[t.from] - 1 < net.lines[t.from].fleet_min) continue;
    if (y[t.to] + 1 > net.lines[t.to].fleet_max) continue;
    --y[t.from];
    ++y[t.to];
    const double cost = uncongested_user_cost(net, od, y);
    if (cost < current) {
      current = cost;
      since_improvement = 0;
    } else {
      ++y[t.from];
      --y[t.to];
    }
  }
  return current;
}

namespace {

// Stop node beneath a boarding node, via its Board arc.
NodeId stop_of_boarding(const TransitNetwork& net, NodeId b) {
  for (ArcId a : net.in_arcs(b)) {
    if (net.arcs[a].kind == ArcKind::Board) return net.arcs[a].tail;
  }
  throw ValidationError("boarding node " + std::to_string(b) +
                        " has no board arc");
}

}  // namespace

std::vector<ExpressInfo> generate_express(TransitNetwork& net,
                                          const ExpressParams& params) {
  if (params.min_stops < 2 || params.keep_frac <= 0 || params.keep_frac > 0.5) {
    throw ValidationError("express parameters out of range");
  }

  // Score every stop as a unit-population community under the current fleet.
  const FleetVector y_star = net.initial_fleet();
  const std::vector<NodeId>& stops = net.stop_nodes();
  std::vector<double> stop_metric(net.nodes.size(), 0.0);
  if (!net.facility_nodes().empty()) {
    const Matrix<double> d =
        access_travel_times(net, y_star, stops, net.facility_nodes());
    std::vector<double> populations(stops.size(), 1.0);
    std::vector<double> qualities;
    for (NodeId f : net.facility_nodes()) qualities.push_back(net.nodes[f].quality);
    const std::vector<double> crowding = facility_crowding(populations, d, params.beta);
    const std::vector<double> metric =
        gravity_metric(qualities, d, crowding, params.beta);
    for (std::size_t i = 0; i < stops.size(); ++i) stop_metric[stops[i]] = metric[i];
  }

  const std::size_t original_lines = net.lines.size();
  std::vector<ExpressInfo> added;

  for (std::size_t pl = 0; pl < original_lines; ++pl) {
    const Line parent = net.lines[pl];  // copy: net.lines reallocates below
    const std::size_t n = parent.boarding_sequence.size();
    if (n < static_cast<std::size_t>(params.min_stops)) continue;
    const std::size_t keep = static_cast<std::size_t>(
        std::llround(params.keep_frac * static_cast<double>(n)));
    if (keep < 1 || 2 * keep >= n) continue;

    std::vector<NodeId> parent_stops(n);
    for (std::size_t p = 0; p < n; ++p) {
      parent_stops[p] = stop_of_boarding(net, parent.boarding_sequence[p]);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return stop_metric[parent_stops[a]] > stop_metric[parent_stops[b]];
    });
    std::vector<char> kept(n, 0);
    for (std::size_t i = 0; i < keep; ++i) kept[order[i]] = 1;  // highest access
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return stop_metric[parent_stops[a]] < stop_metric[parent_stops[b]];
    });
    for (std::size_t i = 0, taken = 0; taken < keep; ++i) {     // lowest access
      if (!kept[order[i]]) {
        kept[order[i]] = 1;
        ++taken;
      }
    }
    std::vector<std::size_t> positions;
    for (std::size_t p = 0; p < n; ++p)
      if (kept[p]) positions.push_back(p);

    // Directed parent line-arc times by (tail, head).
    std::map<std::pair<NodeId, NodeId>, double> seg;
    double parent_arc_total = 0;
    for (ArcId a : net.line_arcs(parent.id)) {
      seg[{net.arcs[a].tail, net.arcs[a].head}] = net.arcs[a].base_time;
      parent_arc_total += net.arcs[a].base_time;
    }
    const double layover = std::max(0.0, parent.circuit_time - parent_arc_total);

    const LineId eid = static_cast<LineId>(net.lines.size());
    Line express;
    express.id = eid;
    express.vehicle_type = parent.vehicle_type;
    express.seats = parent.seats;
    express.active_fraction = parent.active_fraction;
    express.initial_fleet = 0;
    express.fleet_min = 0;
    express.fleet_max = parent.fleet_max;

    ExpressInfo info;
    info.express_line = eid;
    info.parent_line = parent.id;

    std::vector<NodeId> new_boardings;
    for (std::size_t pos : positions) {
      const NodeId stop = parent_stops[pos];
      Node b;
      b.id = static_cast<NodeId>(net.nodes.size());
      b.kind = NodeKind::Boarding;
      b.x = net.nodes[stop].x;
      b.y = net.nodes[stop].y;
      b.line = eid;
      net.nodes.push_back(b);
      new_boardings.push_back(b.id);
      info.kept_stops.push_back(stop);
    }
    express.boarding_sequence = new_boardings;

    auto add_arc = [&](NodeId tail, NodeId head, ArcKind kind, double time) {
      Arc a;
      a.id = static_cast<ArcId>(net.arcs.size());
      a.tail = tail;
      a.head = head;
      a.kind = kind;
      a.base_time = time;
      a.line = eid;
      net.arcs.push_back(a);
    };

    double arc_total = 0;
    auto span_time = [&](std::size_t from, std::size_t to, bool forward) {
      double sum = 0;
      for (std::size_t p = from; p < to; ++p) {
        const NodeId u = parent.boarding_sequence[p];
        const NodeId v = parent.boarding_sequence[p + 1];
        auto it = forward ? seg.find({u, v}) : seg.find({v, u});
        if (it == seg.end()) {
          throw ValidationError("line " + std::to_string(parent.id) +
                                " lacks a " + (forward ? "forward" : "reverse") +
                                " arc between sequence stops " +
                                std::to_string(p) + " and " + std::to_string(p + 1));
        }
        sum += it->second;
      }
      const double skipped = static_cast<double>(to - from - 1);
      return std::max(params.min_arc_minutes,
                      sum - skipped * params.skip_saving_sec / 60.0);
    };

    for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
      const double t = span_time(positions[i], positions[i + 1], true);
      add_arc(new_boardings[i], new_boardings[i + 1], ArcKind::Line, t);
      arc_total += t;
    }
    for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
      const double t = span_time(positions[i], positions[i + 1], false);
      add_arc(new_boardings[i + 1], new_boardings[i], ArcKind::Line, t);
      arc_total += t;
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const NodeId stop = parent_stops[positions[i]];
      add_arc(stop, new_boardings[i], ArcKind::Board, 0);
      add_arc(new_boardings[i], stop, ArcKind::Alight, 0);
    }

    express.circuit_time = arc_total + layover;
    net.lines.push_back(std::move(express));
    added.push_back(std::move(info));
  }

  net.finalize();
  return added;
}

}  // namespace samp
