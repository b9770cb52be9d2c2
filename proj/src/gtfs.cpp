#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <unordered_map>

#include "samp/csv.hpp"
#include "samp/pipeline.hpp"

// Feed ingestion keeps to the four core tables. Geographic coordinates are
// flattened to planar miles with an equirectangular projection about the
// mean stop position (adequate at city scale), and stop-to-stop distances
// use the L1 norm throughout, matching a street-grid walking assumption.

namespace samp {

namespace {

constexpr double kMilesPerLatDegree = 69.055;
constexpr double kMilesPerLonDegreeAtEquator = 69.172;

// GTFS H:MM:SS with hours allowed past 24; returns minutes.
double parse_gtfs_time(const std::string& s, const std::string& where) {
  int h = 0, m = 0;
  double sec = 0;
  std::size_t p1 = s.find(':');
  std::size_t p2 = p1 == std::string::npos ? p1 : s.find(':', p1 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos) {
    throw SchemaError(where + ": bad time '" + s + "'");
  }
  try {
    h = std::stoi(s.substr(0, p1));
    m = std::stoi(s.substr(p1 + 1, p2 - p1 - 1));
    sec = std::stod(s.substr(p2 + 1));
  } catch (const std::exception&) {
    throw SchemaError(where + ": bad time '" + s + "'");
  }
  if (h < 0 || m < 0 || m > 59 || sec < 0 || sec >= 60) {
    throw SchemaError(where + ": bad time '" + s + "'");
  }
  return h * 60.0 + m + sec / 60.0;
}

struct StopTimeRow {
  std::string stop_id;
  double arrival = 0;
  long long sequence = 0;
};

double l1(double ax, double ay, double bx, double by) {
  return std::abs(ax - bx) + std::abs(ay - by);
}

}  // namespace

IngestResult ingest_gtfs_lite(const std::string& dir,
                              const GtfsIngestConfig& cfg) {
  namespace fs = std::filesystem;
  auto table = [&](const char* name) {
    return CsvTable::read_file((fs::path(dir) / name).string());
  };

  const CsvTable stops_t = table("stops.txt");
  std::vector<std::string> stop_ids;
  std::vector<double> lat, lon;
  std::unordered_map<std::string, int> stop_index;
  for (std::size_t r = 0; r < stops_t.num_rows(); ++r) {
    const std::string& id = stops_t.cell(r, "stop_id");
    if (id.empty()) throw SchemaError(stops_t.origin() + ": empty stop_id");
    if (!stop_index.emplace(id, static_cast<int>(stop_ids.size())).second) {
      throw SchemaError(stops_t.origin() + ": stop_id '" + id + "' repeats");
    }
    stop_ids.push_back(id);
    lat.push_back(stops_t.num(r, "stop_lat"));
    lon.push_back(stops_t.num(r, "stop_lon"));
  }
  if (stop_ids.empty()) throw SchemaError(stops_t.origin() + ": no stops");

  const double lat0 = std::accumulate(lat.begin(), lat.end(), 0.0) / lat.size();
  const double lon0 = std::accumulate(lon.begin(), lon.end(), 0.0) / lon.size();
  const double lon_scale =
      kMilesPerLonDegreeAtEquator * std::cos(lat0 * std::acos(-1.0) / 180.0);
  std::vector<double> px(lat.size()), py(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    px[i] = (lon[i] - lon0) * lon_scale;
    py[i] = (lat[i] - lat0) * kMilesPerLatDegree;
  }

  const CsvTable routes_t = table("routes.txt");
  std::map<std::string, int> route_type;  // ordered: lines come out sorted
  for (std::size_t r = 0; r < routes_t.num_rows(); ++r) {
    const std::string& id = routes_t.cell(r, "route_id");
    if (id.empty()) throw SchemaError(routes_t.origin() + ": empty route_id");
    if (!route_type.emplace(id, static_cast<int>(routes_t.integer(r, "route_type")))
             .second) {
      throw SchemaError(routes_t.origin() + ": route_id '" + id + "' repeats");
    }
  }

  const CsvTable trips_t = table("trips.txt");
  const bool filter_service = !cfg.service_id.empty();
  std::unordered_map<std::string, std::string> trip_route;  // kept trips only
  std::unordered_map<std::string, char> known_trip;
  for (std::size_t r = 0; r < trips_t.num_rows(); ++r) {
    const std::string& tid = trips_t.cell(r, "trip_id");
    const std::string& rid = trips_t.cell(r, "route_id");
    if (tid.empty()) throw SchemaError(trips_t.origin() + ": empty trip_id");
    if (!route_type.count(rid)) {
      throw SchemaError(trips_t.origin() + ": trip '" + tid +
                        "' references unknown route '" + rid + "'");
    }
    if (!known_trip.emplace(tid, 1).second) {
      throw SchemaError(trips_t.origin() + ": trip_id '" + tid + "' repeats");
    }
    if (filter_service && trips_t.cell(r, "service_id") != cfg.service_id) continue;
    trip_route[tid] = rid;
  }

  const CsvTable st_t = table("stop_times.txt");
  std::unordered_map<std::string, std::vector<StopTimeRow>> trip_rows;
  for (std::size_t r = 0; r < st_t.num_rows(); ++r) {
    const std::string& tid = st_t.cell(r, "trip_id");
    const std::string where = st_t.origin() + " row " + std::to_string(r + 2);
    if (!known_trip.count(tid)) {
      throw SchemaError(where + ": unknown trip '" + tid + "'");
    }
    if (!trip_route.count(tid)) continue;  // excluded by the service filter
    StopTimeRow row;
    row.stop_id = st_t.cell(r, "stop_id");
    if (!stop_index.count(row.stop_id)) {
      throw SchemaError(where + ": unknown stop '" + row.stop_id + "'");
    }
    std::string time = st_t.cell(r, "arrival_time");
    if (time.empty()) time = st_t.cell(r, "departure_time");
    if (time.empty()) throw SchemaError(where + ": no arrival or departure time");
    row.arrival = parse_gtfs_time(time, where);
    row.sequence = st_t.integer(r, "stop_sequence");
    trip_rows[tid].push_back(std::move(row));
  }
  for (auto& [tid, rows] : trip_rows) {
    std::sort(rows.begin(), rows.end(),
              [](const StopTimeRow& a, const StopTimeRow& b) {
                return a.sequence < b.sequence;
              });
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      if (rows[i].sequence == rows[i + 1].sequence) {
        throw SchemaError(st_t.origin() + ": trip '" + tid +
                          "' repeats stop_sequence " +
                          std::to_string(rows[i].sequence));
      }
      if (rows[i + 1].arrival < rows[i].arrival) {
        throw SchemaError(st_t.origin() + ": trip '" + tid +
                          "' has decreasing arrival times");
      }
    }
  }

  const int k = cfg.clusters;
  ClusterResult clusters = cluster_stops(px, py, k, cfg.seed);

  IngestResult out;
  out.stop_count = static_cast<int>(stop_ids.size());
  out.cluster_stats = clusters.stats;
  TransitNetwork& net = out.network;
  net.horizon = cfg.horizon;
  net.distance_convention = "planar-miles-equirectangular";

  for (int c = 0; c < k; ++c) {
    Node n;
    n.id = c;
    n.kind = NodeKind::Stop;
    n.x = clusters.cx[c];
    n.y = clusters.cy[c];
    net.nodes.push_back(n);
  }

  for (const auto& [rid, rtype] : route_type) {
    // The route's geometry comes from its fullest trip; visit counts and the
    // service span pool every kept trip.
    std::vector<std::pair<std::string, const std::vector<StopTimeRow>*>> trips;
    for (const auto& [tid, rows] : trip_rows) {
      if (trip_route.at(tid) == rid && !rows.empty()) trips.emplace_back(tid, &rows);
    }
    if (trips.empty()) continue;
    std::sort(trips.begin(), trips.end());
    const std::vector<StopTimeRow>* rep = trips[0].second;
    for (const auto& [tid, rows] : trips) {
      if (rows->size() > rep->size()) rep = rows;
    }

    double arrivals = 0, first = kInf, last = -kInf;
    std::vector<char> seen(k, 0);
    int unique_stops = 0;
    for (const auto& [tid, rows] : trips) {
      for (const StopTimeRow& row : *rows) {
        arrivals += 1;
        first = std::min(first, row.arrival);
        last = std::max(last, row.arrival);
        const int c = clusters.assignment[stop_index.at(row.stop_id)];
        if (!seen[c]) {
          seen[c] = 1;
          ++unique_stops;
        }
      }
    }

    // Collapse consecutive stops that landed in one cluster, pushing the
    // time spent inside a run onto its incident arcs so the line total
    // keeps its length.
    std::vector<int> run_centroid;
    std::vector<double> run_loop, gap;
    for (std::size_t i = 0; i < rep->size(); ++i) {
      const int c = clusters.assignment[stop_index.at((*rep)[i].stop_id)];
      const double dt = i == 0 ? 0 : (*rep)[i].arrival - (*rep)[i - 1].arrival;
      if (!run_centroid.empty() && run_centroid.back() == c) {
        run_loop.back() += dt;
      } else {
        if (!run_centroid.empty()) gap.push_back(dt);
        run_centroid.push_back(c);
        run_loop.push_back(0);
      }
    }
    const std::size_t m = run_centroid.size();
    if (m < 2) continue;
    std::vector<double> fwd(m - 1);
    double one_way = 0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      fwd[i] = gap[i] + run_loop[i] * (i == 0 ? 1.0 : 0.5) +
               run_loop[i + 1] * (i + 1 == m - 1 ? 1.0 : 0.5);
      one_way += fwd[i];
    }

    const double span = last - first;
    const double active_minutes = std::max(span, 1.0);
    const double v_per_stop = arrivals / unique_stops;
    const double frequency = v_per_stop / active_minutes;
    const double circuit = std::max(2 * one_way, 0.01);
    const int y_star = static_cast<int>(std::ceil(circuit * frequency));
    const int y_min = static_cast<int>(std::ceil(circuit / cfg.min_headway));

    Line line;
    line.id = static_cast<LineId>(net.lines.size());
    const bool is_train = rtype >= 0 && rtype <= 2;
    line.vehicle_type = is_train ? "train" : "bus";
    line.seats = is_train ? cfg.train_seats : cfg.bus_seats;
    line.circuit_time = circuit;
    line.active_fraction = std::clamp(span / cfg.horizon, 0.01, 1.0);
    line.fleet_min = y_min;
    line.initial_fleet = std::max(y_star, y_min);

    std::vector<NodeId> boardings;
    for (std::size_t i = 0; i < m; ++i) {
      Node b;
      b.id = static_cast<NodeId>(net.nodes.size());
      b.kind = NodeKind::Boarding;
      b.x = net.nodes[run_centroid[i]].x;
      b.y = net.nodes[run_centroid[i]].y;
      b.line = line.id;
      net.nodes.push_back(b);
      boardings.push_back(b.id);
    }
    line.boarding_sequence = boardings;

    auto add_arc = [&](NodeId tail, NodeId head, ArcKind kind, double time) {
      Arc a;
      a.id = static_cast<ArcId>(net.arcs.size());
      a.tail = tail;
      a.head = head;
      a.kind = kind;
      a.base_time = time;
      a.line = line.id;
      net.arcs.push_back(a);
    };
    for (std::size_t i = 0; i + 1 < m; ++i)
      add_arc(boardings[i], boardings[i + 1], ArcKind::Line, fwd[i]);
    for (std::size_t i = 0; i + 1 < m; ++i)
      add_arc(boardings[i + 1], boardings[i], ArcKind::Line, fwd[i]);
    for (std::size_t i = 0; i < m; ++i) {
      add_arc(run_centroid[i], boardings[i], ArcKind::Board, 0);
      add_arc(boardings[i], run_centroid[i], ArcKind::Alight, 0);
    }

    IngestLineStat stat;
    stat.line = line.id;
    stat.route_id = rid;
    stat.visits_per_stop = v_per_stop;
    stat.span_minutes = span;
    stat.frequency = frequency;
    stat.initial_fleet = line.initial_fleet;
    out.line_stats.push_back(std::move(stat));
    net.lines.push_back(std::move(line));
  }

  // Walking arcs between nearby centroids, except where a third stop sits
  // essentially on the way (the pair is then reachable through it and the
  // direct arc would only add clutter).
  {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        const double d = l1(net.nodes[a].x, net.nodes[a].y, net.nodes[b].x,
                            net.nodes[b].y);
        if (d >= cfg.walk_cutoff) continue;
        bool shadowed = false;
        for (int u = 0; u < k && !shadowed; ++u) {
          if (u == a || u == b) continue;
          const double da = l1(net.nodes[a].x, net.nodes[a].y, net.nodes[u].x,
                               net.nodes[u].y);
          const double db = l1(net.nodes[u].x, net.nodes[u].y, net.nodes[b].x,
                               net.nodes[b].y);
          shadowed = da < d && db < d && da + db <= d * 1.001;
        }
        if (!shadowed) pairs.emplace_back(a, b);
      }
    }
    for (const auto& [a, b] : pairs) {
      const double d =
          l1(net.nodes[a].x, net.nodes[a].y, net.nodes[b].x, net.nodes[b].y);
      Arc arc;
      arc.kind = ArcKind::Walk;
      arc.base_time = d * kWalkMinutesPerMile;
      arc.id = static_cast<ArcId>(net.arcs.size());
      arc.tail = a;
      arc.head = b;
      net.arcs.push_back(arc);
      arc.id = static_cast<ArcId>(net.arcs.size());
      arc.tail = b;
      arc.head = a;
      net.arcs.push_back(arc);
    }
  }

  net.finalize();
  return out;
}

}  // namespace samp
