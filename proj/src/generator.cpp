#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "samp/pipeline.hpp"
#include "samp/rng.hpp"

// Draw order, which the seed contract freezes: extra-stop counts (horizontal
// segments row by row, then vertical column by column), then per line (east/
// west lines south to north, then north/south lines west to east) one speed,
// one dwell per forward arc, one layover; then community placements
// (x,y pairs until accepted), then community populations, then facility
// positions, then one seed-matrix perturbation per cell in row-major order.

namespace samp {

namespace {

double l1(double ax, double ay, double bx, double by) {
  return std::abs(ax - bx) + std::abs(ay - by);
}

void validate(const ArtificialNetConfig& c) {
  auto bad = [](const std::string& what) {
    throw ValidationError("generator config: " + what);
  };
  if (c.grid_rows < 2 || c.grid_cols < 2) bad("grid must be at least 2x2");
  if (c.extent_x <= 0 || c.extent_y <= 0) bad("extents must be positive");
  if (!(c.speed_min > 0) || c.speed_max < c.speed_min) bad("speed range is not ordered");
  if (c.dwell_min < 0 || c.dwell_max < c.dwell_min) bad("dwell range is not ordered");
  if (c.layover_min < 0 || c.layover_max < c.layover_min) bad("layover range is not ordered");
  if (c.extra_stops_max < 0) bad("extra stop count cannot be negative");
  if (c.walk_cutoff <= 0 || c.walk_max_degree < 0) bad("walk limits out of range");
  if (c.community_count < 1) bad("need at least one community");
  if (c.community_min_spacing < 0) bad("community spacing cannot be negative");
  if (!(c.population_min > 0) || c.population_max < c.population_min)
    bad("population range is not ordered");
  if (c.facility_count < 0) bad("facility count cannot be negative");
  if (c.poi_walk_cutoff <= 0) bad("community/facility cutoff must be positive");
  if (c.line_fleet_min < 0 || c.line_fleet_max < c.line_fleet_min)
    bad("per-line fleet bounds are not ordered");
  const int line_count = c.grid_rows + c.grid_cols;
  if (c.total_fleet < line_count * c.line_fleet_min ||
      c.total_fleet > line_count * c.line_fleet_max)
    bad("total fleet cannot satisfy the per-line bounds");
  if (c.seats <= 0) bad("seats must be positive");
  if (c.horizon <= 0) bad("horizon must be positive");
  if (c.od_gamma_mean <= 0 || c.od_gamma_std <= 0) bad("gamma parameters must be positive");
  if (c.boarding_share < 0 || c.boarding_share > 1) bad("boarding share must lie in [0,1]");
  if (c.perturb_max < c.perturb_min) bad("perturbation range is not ordered");
  if (c.ipf_max_iterations < 1 || c.ipf_tolerance <= 0) bad("ipf settings out of range");
  if (c.placement_retry_budget < 1) bad("placement retry budget must be positive");
}

// Splits `total` units across lines proportionally to nonnegative credits,
// integerized by largest remainder and then squeezed into the per-line
// bounds while keeping the exact total.
FleetVector proportional_fleet(const std::vector<double>& credits, int total,
                               int lo, int hi) {
  const std::size_t n = credits.size();
  double credit_sum = std::accumulate(credits.begin(), credits.end(), 0.0);
  std::vector<double> share(n);
  for (std::size_t l = 0; l < n; ++l) {
    share[l] = credit_sum > 0 ? total * credits[l] / credit_sum
                              : static_cast<double>(total) / n;
  }

  FleetVector y(n);
  std::vector<std::pair<double, std::size_t>> remainder(n);
  int assigned = 0;
  for (std::size_t l = 0; l < n; ++l) {
    y[l] = static_cast<int>(std::floor(share[l]));
    assigned += y[l];
    remainder[l] = {share[l] - y[l], l};
  }
  std::sort(remainder.begin(), remainder.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  for (int i = 0; i < total - assigned; ++i) ++y[remainder[i % n].second];

  for (std::size_t l = 0; l < n; ++l) y[l] = std::clamp(y[l], lo, hi);
  int diff = total - std::accumulate(y.begin(), y.end(), 0);
  while (diff != 0) {
    // Push surplus toward high-share lines and take shortfall from low-share
    // ones; strictly decreasing |diff| because the bounds admit the total.
    std::size_t pick = n;
    for (std::size_t l = 0; l < n; ++l) {
      if (diff > 0 && y[l] >= hi) continue;
      if (diff < 0 && y[l] <= lo) continue;
      if (pick == n || (diff > 0 ? share[l] > share[pick] : share[l] < share[pick]))
        pick = l;
    }
    y[pick] += diff > 0 ? 1 : -1;
    diff += diff > 0 ? -1 : 1;
  }
  return y;
}

}  // namespace

ArtificialNetConfig artificial_config_from_json(const std::string& text,
                                                const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw SchemaError(origin + ": config must be a JSON object");

  ArtificialNetConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "grid_rows") c.grid_rows = value.get<int>();
      else if (key == "grid_cols") c.grid_cols = value.get<int>();
      else if (key == "extent_x") c.extent_x = value.get<double>();
      else if (key == "extent_y") c.extent_y = value.get<double>();
      else if (key == "speed_min") c.speed_min = value.get<double>();
      else if (key == "speed_max") c.speed_max = value.get<double>();
      else if (key == "dwell_min") c.dwell_min = value.get<double>();
      else if (key == "dwell_max") c.dwell_max = value.get<double>();
      else if (key == "layover_min") c.layover_min = value.get<double>();
      else if (key == "layover_max") c.layover_max = value.get<double>();
      else if (key == "extra_stops_max") c.extra_stops_max = value.get<int>();
      else if (key == "walk_cutoff") c.walk_cutoff = value.get<double>();
      else if (key == "walk_max_degree") c.walk_max_degree = value.get<int>();
      else if (key == "community_count") c.community_count = value.get<int>();
      else if (key == "community_min_spacing") c.community_min_spacing = value.get<double>();
      else if (key == "population_min") c.population_min = value.get<double>();
      else if (key == "population_max") c.population_max = value.get<double>();
      else if (key == "facility_count") c.facility_count = value.get<int>();
      else if (key == "poi_walk_cutoff") c.poi_walk_cutoff = value.get<double>();
      else if (key == "total_fleet") c.total_fleet = value.get<int>();
      else if (key == "line_fleet_min") c.line_fleet_min = value.get<int>();
      else if (key == "line_fleet_max") c.line_fleet_max = value.get<int>();
      else if (key == "seats") c.seats = value.get<double>();
      else if (key == "horizon") c.horizon = value.get<double>();
      else if (key == "od_gamma_mean") c.od_gamma_mean = value.get<double>();
      else if (key == "od_gamma_std") c.od_gamma_std = value.get<double>();
      else if (key == "boarding_share") c.boarding_share = value.get<double>();
      else if (key == "perturb_min") c.perturb_min = value.get<double>();
      else if (key == "perturb_max") c.perturb_max = value.get<double>();
      else if (key == "ipf_max_iterations") c.ipf_max_iterations = value.get<int>();
      else if (key == "ipf_tolerance") c.ipf_tolerance = value.get<double>();
      else if (key == "placement_retry_budget") c.placement_retry_budget = value.get<int>();
      else if (key == "optimize_seed_fleet") c.optimize_seed_fleet = value.get<bool>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw SchemaError(origin + ": unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
  validate(c);  // reject impossible settings at load time, not mid-generation
  return c;
}

GeneratedInstance generate_artificial(const ArtificialNetConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);

  const int rows = cfg.grid_rows, cols = cfg.grid_cols;
  const double dx = cfg.extent_x / (cols - 1);
  const double dy = cfg.extent_y / (rows - 1);
  const int line_count = rows + cols;

  TransitNetwork net;
  net.horizon = cfg.horizon;

  auto add_stop = [&](double x, double y) {
    Node n;
    n.id = static_cast<NodeId>(net.nodes.size());
    n.kind = NodeKind::Stop;
    n.x = x;
    n.y = y;
    net.nodes.push_back(n);
    return n.id;
  };

  // Intersections first, row-major, so intersection (r, c) has id r*cols + c.
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) add_stop(c * dx, r * dy);

  // Ordered stop lists per road; extra stops are spaced evenly within their
  // segment, only their count is random.
  std::vector<std::vector<NodeId>> road(line_count);
  for (int r = 0; r < rows; ++r) {
    auto& stops = road[r];
    for (int c = 0; c + 1 < cols; ++c) {
      stops.push_back(r * cols + c);
      const int extras = static_cast<int>(rng.int_range(0, cfg.extra_stops_max));
      for (int i = 1; i <= extras; ++i)
        stops.push_back(add_stop(c * dx + dx * i / (extras + 1), r * dy));
    }
    stops.push_back(r * cols + (cols - 1));
  }
  for (int c = 0; c < cols; ++c) {
    auto& stops = road[rows + c];
    for (int r = 0; r + 1 < rows; ++r) {
      stops.push_back(r * cols + c);
      const int extras = static_cast<int>(rng.int_range(0, cfg.extra_stops_max));
      for (int i = 1; i <= extras; ++i)
        stops.push_back(add_stop(c * dx, r * dy + dy * i / (extras + 1)));
    }
    stops.push_back((rows - 1) * cols + c);
  }

  // One out-and-back line per road: boarding nodes over its stops, forward
  // then reverse arcs with shared times, zero-time board/alight pairs.
  for (int l = 0; l < line_count; ++l) {
    const auto& stops = road[l];
    Line line;
    line.id = l;
    line.vehicle_type = "bus";
    line.seats = cfg.seats;
    line.active_fraction = 1;
    line.fleet_min = cfg.line_fleet_min;
    line.fleet_max = cfg.line_fleet_max;
    line.initial_fleet = cfg.line_fleet_min;  // placeholder until allocation

    std::vector<NodeId> boardings;
    for (NodeId s : stops) {
      Node b;
      b.id = static_cast<NodeId>(net.nodes.size());
      b.kind = NodeKind::Boarding;
      b.x = net.nodes[s].x;
      b.y = net.nodes[s].y;
      b.line = l;
      net.nodes.push_back(b);
      boardings.push_back(b.id);
    }
    line.boarding_sequence = boardings;

    const double speed = rng.range(cfg.speed_min, cfg.speed_max);
    std::vector<double> times(stops.size() - 1);
    double one_way = 0;
    for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
      const Node& a = net.nodes[stops[i]];
      const Node& b = net.nodes[stops[i + 1]];
      times[i] = std::hypot(b.x - a.x, b.y - a.y) / speed +
                 rng.range(cfg.dwell_min, cfg.dwell_max);
      one_way += times[i];
    }
    const double layover = rng.range(cfg.layover_min, cfg.layover_max);
    line.circuit_time = 2 * one_way + layover;

    auto add_arc = [&](NodeId tail, NodeId head, ArcKind kind, double time) {
      Arc a;
      a.id = static_cast<ArcId>(net.arcs.size());
      a.tail = tail;
      a.head = head;
      a.kind = kind;
      a.base_time = time;
      a.line = l;
      net.arcs.push_back(a);
    };
    for (std::size_t i = 0; i + 1 < boardings.size(); ++i)
      add_arc(boardings[i], boardings[i + 1], ArcKind::Line, times[i]);
    for (std::size_t i = 0; i + 1 < boardings.size(); ++i)
      add_arc(boardings[i + 1], boardings[i], ArcKind::Line, times[i]);
    for (std::size_t i = 0; i < boardings.size(); ++i) {
      add_arc(stops[i], boardings[i], ArcKind::Board, 0);
      add_arc(boardings[i], stops[i], ArcKind::Alight, 0);
    }
    net.lines.push_back(std::move(line));
  }

  const std::vector<NodeId> stop_ids = [&] {
    std::vector<NodeId> v;
    for (const Node& n : net.nodes)
      if (n.kind == NodeKind::Stop) v.push_back(n.id);
    return v;
  }();

  // Communities: uniform draws rejected until the pairwise spacing holds.
  std::vector<NodeId> community_ids;
  {
    std::vector<std::pair<double, double>> placed;
    int budget = cfg.placement_retry_budget;
    while (static_cast<int>(placed.size()) < cfg.community_count) {
      if (--budget < 0) {
        throw ValidationError(
            "could not place " + std::to_string(cfg.community_count) +
            " communities " + std::to_string(cfg.community_min_spacing) +
            " miles apart within the retry budget");
      }
      const double x = rng.range(0, cfg.extent_x);
      const double y = rng.range(0, cfg.extent_y);
      bool ok = true;
      for (const auto& [px, py] : placed) {
        if (std::hypot(x - px, y - py) < cfg.community_min_spacing) {
          ok = false;
          break;
        }
      }
      if (ok) placed.emplace_back(x, y);
    }
    for (const auto& [x, y] : placed) {
      Node n;
      n.id = static_cast<NodeId>(net.nodes.size());
      n.kind = NodeKind::Community;
      n.x = x;
      n.y = y;
      net.nodes.push_back(n);
      community_ids.push_back(n.id);
    }
    for (NodeId c : community_ids)
      net.nodes[c].population = rng.range(cfg.population_min, cfg.population_max);
  }

  std::vector<NodeId> facility_ids;
  for (int i = 0; i < cfg.facility_count; ++i) {
    Node n;
    n.id = static_cast<NodeId>(net.nodes.size());
    n.kind = NodeKind::Facility;
    n.x = rng.range(0, cfg.extent_x);
    n.y = rng.range(0, cfg.extent_y);
    n.quality = 1;
    net.nodes.push_back(n);
    facility_ids.push_back(n.id);
  }

  auto add_walk = [&](NodeId tail, NodeId head, double miles) {
    Arc a;
    a.id = static_cast<ArcId>(net.arcs.size());
    a.tail = tail;
    a.head = head;
    a.kind = ArcKind::Walk;
    a.base_time = miles * kWalkMinutesPerMile;
    net.arcs.push_back(a);
  };

  // Stop-to-stop walking: each stop nominates its nearest qualifying stops,
  // the nominated pairs get one bidirectional arc pair each.
  {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId s : stop_ids) {
      std::vector<std::pair<double, NodeId>> close;
      for (NodeId t : stop_ids) {
        if (t == s) continue;
        const double d = l1(net.nodes[s].x, net.nodes[s].y, net.nodes[t].x,
                            net.nodes[t].y);
        if (d <= cfg.walk_cutoff) close.emplace_back(d, t);
      }
      std::sort(close.begin(), close.end());
      const std::size_t take =
          std::min<std::size_t>(close.size(), cfg.walk_max_degree);
      for (std::size_t i = 0; i < take; ++i) {
        pairs.emplace_back(std::min(s, close[i].second),
                           std::max(s, close[i].second));
      }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (const auto& [a, b] : pairs) {
      const double d = l1(net.nodes[a].x, net.nodes[a].y, net.nodes[b].x,
                          net.nodes[b].y);
      add_walk(a, b, d);
      add_walk(b, a, d);
    }
  }

  // Communities walk out to nearby stops, facilities are walked to from
  // them; a location with no stop inside the cutoff gets its single nearest.
  auto connect_poi = [&](NodeId poi, bool outgoing) {
    std::vector<std::pair<double, NodeId>> close;
    NodeId nearest = -1;
    double nearest_d = kInf;
    for (NodeId s : stop_ids) {
      const double d = l1(net.nodes[poi].x, net.nodes[poi].y, net.nodes[s].x,
                          net.nodes[s].y);
      if (d <= cfg.poi_walk_cutoff) close.emplace_back(d, s);
      if (d < nearest_d) {
        nearest_d = d;
        nearest = s;
      }
    }
    if (close.empty()) close.emplace_back(nearest_d, nearest);
    std::sort(close.begin(), close.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [d, s] : close) {
      if (outgoing) add_walk(poi, s, d);
      else add_walk(s, poi, d);
    }
  };
  for (NodeId c : community_ids) connect_poi(c, true);
  for (NodeId f : facility_ids) connect_poi(f, false);

  net.finalize();

  // Stop-level boarding totals: each stop books a share of the population of
  // the community it sits nearest to (L1, ties to the lower community id).
  std::vector<double> boardings(stop_ids.size(), 0.0);
  {
    std::vector<std::vector<std::size_t>> cell(community_ids.size());
    for (std::size_t si = 0; si < stop_ids.size(); ++si) {
      const Node& s = net.nodes[stop_ids[si]];
      std::size_t best = 0;
      double best_d = kInf;
      for (std::size_t ci = 0; ci < community_ids.size(); ++ci) {
        const Node& c = net.nodes[community_ids[ci]];
        const double d = l1(s.x, s.y, c.x, c.y);
        if (d < best_d) {
          best_d = d;
          best = ci;
        }
      }
      cell[best].push_back(si);
    }
    for (std::size_t ci = 0; ci < community_ids.size(); ++ci) {
      if (cell[ci].empty()) continue;
      const double share = cfg.boarding_share *
                           net.nodes[community_ids[ci]].population /
                           cell[ci].size();
      for (std::size_t si : cell[ci]) boardings[si] += share;
    }
  }

  // OD matrix: gamma-of-travel-time seed, additive noise, balance, round.
  const Matrix<double> t = zero_wait_travel_times(net, stop_ids, stop_ids);
  Matrix<double> seed(stop_ids.size(), stop_ids.size(), 0.0);
  for (std::size_t i = 0; i < stop_ids.size(); ++i)
    for (std::size_t j = 0; j < stop_ids.size(); ++j)
      if (i != j)
        seed(i, j) = gamma_density(t(i, j), cfg.od_gamma_mean, cfg.od_gamma_std);
  for (std::size_t i = 0; i < stop_ids.size(); ++i) {
    for (std::size_t j = 0; j < stop_ids.size(); ++j) {
      const double noisy = seed(i, j) + rng.range(cfg.perturb_min, cfg.perturb_max);
      seed(i, j) = (i == j || !std::isfinite(t(i, j))) ? 0.0 : std::max(0.0, noisy);
    }
  }
  IpfResult balanced = ipf_balance(std::move(seed), boardings, boardings,
                                   cfg.ipf_tolerance, cfg.ipf_max_iterations);

  GeneratedInstance out;
  for (std::size_t i = 0; i < stop_ids.size(); ++i) {
    for (std::size_t j = 0; j < stop_ids.size(); ++j) {
      const long long trips = std::llround(balanced.matrix(i, j));
      if (trips > 0) {
        out.od.entries.push_back(
            {stop_ids[i], stop_ids[j], static_cast<double>(trips)});
      }
    }
  }

  // Initial fleet: lines earn credit for every trip whose zero-wait shortest
  // path rides them, then the total splits proportionally.
  {
    std::vector<double> credits(line_count, 0.0);
    std::vector<std::size_t> stop_index(net.nodes.size(), 0);
    for (std::size_t si = 0; si < stop_ids.size(); ++si)
      stop_index[stop_ids[si]] = si;

    std::vector<std::vector<const ODEntry*>> by_origin(stop_ids.size());
    for (const ODEntry& e : out.od.entries)
      by_origin[stop_index[e.origin]].push_back(&e);

    std::vector<double> dist;
    std::vector<ArcId> parent;
    std::vector<char> rides(line_count);
    for (std::size_t si = 0; si < stop_ids.size(); ++si) {
      if (by_origin[si].empty()) continue;
      shortest_path_tree(net, nullptr, stop_ids[si], dist, &parent);
      for (const ODEntry* e : by_origin[si]) {
        std::fill(rides.begin(), rides.end(), 0);
        for (NodeId v = e->destination; v != e->origin;) {
          if (parent[v] < 0) {
            throw UnreachableDemandError(e->origin, e->destination);
          }
          const Arc& a = net.arcs[parent[v]];
          if (a.kind == ArcKind::Line) rides[a.line] = 1;
          v = a.tail;
        }
        for (int l = 0; l < line_count; ++l)
          if (rides[l]) credits[l] += e->demand;
      }
    }

    FleetVector y = proportional_fleet(credits, cfg.total_fleet,
                                       cfg.line_fleet_min, cfg.line_fleet_max);
    if (cfg.optimize_seed_fleet) {
      for (int l = 0; l < line_count; ++l) net.lines[l].initial_fleet = y[l];
      seed_fleet_descent(net, out.od, y);
    }
    for (int l = 0; l < line_count; ++l) net.lines[l].initial_fleet = y[l];
  }

  net.finalize();
  out.network = std::move(net);
  return out;
}

}  // namespace samp
