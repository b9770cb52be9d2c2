#include "samp/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "samp/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace samp {

namespace {

std::string join_path(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

std::string join_ids(const std::vector<NodeId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(';');
    out += std::to_string(ids[i]);
  }
  return out;
}

std::vector<NodeId> split_ids(const std::string& joined, const std::string& where) {
  std::vector<NodeId> ids;
  std::string tok;
  std::istringstream ss(joined);
  while (std::getline(ss, tok, ';')) {
    if (tok.empty()) throw SchemaError(where + ": empty id in sequence");
    std::size_t used = 0;
    int v;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      throw SchemaError(where + ": bad id '" + tok + "' in sequence");
    }
    if (used != tok.size()) throw SchemaError(where + ": bad id '" + tok + "' in sequence");
    ids.push_back(v);
  }
  return ids;
}

// Assigns rows to dense id slots, rejecting duplicates and out-of-range ids.
template <typename T, typename Fill>
std::vector<T> rows_by_id(const CsvTable& t, Fill fill) {
  std::vector<T> out(t.num_rows());
  std::vector<bool> seen(t.num_rows(), false);
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    long long id = t.integer(r, "id");
    if (id < 0 || id >= static_cast<long long>(out.size()) || seen[id]) {
      throw SchemaError(t.origin() + ": ids must be 0.." +
                        std::to_string(out.size() - 1) + " without repeats (row " +
                        std::to_string(r + 2) + ")");
    }
    seen[id] = true;
    out[id] = fill(r, static_cast<int>(id));
  }
  return out;
}

}  // namespace

void write_network(const std::string& dir, const TransitNetwork& net) {
  fs::create_directories(dir);

  CsvWriter nodes({"id", "kind", "x", "y", "line", "population", "quality"});
  for (const Node& n : net.nodes) {
    nodes.add_row({std::to_string(n.id), to_string(n.kind), format_full(n.x),
                   format_full(n.y),
                   n.kind == NodeKind::Boarding ? std::to_string(n.line) : "",
                   n.kind == NodeKind::Community ? format_full(n.population) : "",
                   n.kind == NodeKind::Facility ? format_full(n.quality) : ""});
  }
  nodes.write_file(join_path(dir, "nodes.csv"));

  CsvWriter arcs({"id", "tail", "head", "kind", "base_time", "line"});
  for (const Arc& a : net.arcs) {
    arcs.add_row({std::to_string(a.id), std::to_string(a.tail),
                  std::to_string(a.head), to_string(a.kind),
                  format_full(a.base_time),
                  a.kind == ArcKind::Walk ? "" : std::to_string(a.line)});
  }
  arcs.write_file(join_path(dir, "arcs.csv"));

  CsvWriter lines({"id", "vehicle_type", "circuit_time", "seats",
                   "active_fraction", "initial_fleet", "fleet_min", "fleet_max",
                   "boarding_sequence"});
  for (const Line& l : net.lines) {
    lines.add_row({std::to_string(l.id), l.vehicle_type,
                   format_full(l.circuit_time), format_full(l.seats),
                   format_full(l.active_fraction), std::to_string(l.initial_fleet),
                   std::to_string(l.fleet_min),
                   l.fleet_max == kUnboundedFleet ? "" : std::to_string(l.fleet_max),
                   join_ids(l.boarding_sequence)});
  }
  lines.write_file(join_path(dir, "lines.csv"));

  json manifest;
  manifest["horizon"] = net.horizon;
  manifest["distance_convention"] = net.distance_convention;
  std::ofstream out(join_path(dir, "network.json"), std::ios::binary);
  if (!out) throw ValidationError("cannot write " + join_path(dir, "network.json"));
  out << manifest.dump(2) << "\n";
}

TransitNetwork read_network(const std::string& dir) {
  TransitNetwork net;

  const std::string mpath = join_path(dir, "network.json");
  std::ifstream min(mpath, std::ios::binary);
  if (!min) throw SchemaError("cannot open file: " + mpath);
  json manifest;
  try {
    min >> manifest;
  } catch (const json::exception& e) {
    throw SchemaError(mpath + ": " + e.what());
  }
  if (!manifest.contains("horizon") || !manifest["horizon"].is_number()) {
    throw SchemaError(mpath + ": missing numeric 'horizon'");
  }
  net.horizon = manifest["horizon"].get<double>();
  if (manifest.contains("distance_convention")) {
    net.distance_convention = manifest["distance_convention"].get<std::string>();
  }

  CsvTable nt = CsvTable::read_file(join_path(dir, "nodes.csv"));
  net.nodes = rows_by_id<Node>(nt, [&](std::size_t r, int id) {
    Node n;
    n.id = id;
    n.kind = node_kind_from_string(nt.cell(r, "kind"));
    n.x = nt.num(r, "x");
    n.y = nt.num(r, "y");
    if (!nt.cell(r, nt.column("line")).empty())
      n.line = static_cast<LineId>(nt.integer(r, "line"));
    if (!nt.cell(r, nt.column("population")).empty())
      n.population = nt.num(r, "population");
    if (!nt.cell(r, nt.column("quality")).empty()) n.quality = nt.num(r, "quality");
    return n;
  });

  CsvTable at = CsvTable::read_file(join_path(dir, "arcs.csv"));
  net.arcs = rows_by_id<Arc>(at, [&](std::size_t r, int id) {
    Arc a;
    a.id = id;
    a.tail = static_cast<NodeId>(at.integer(r, "tail"));
    a.head = static_cast<NodeId>(at.integer(r, "head"));
    a.kind = arc_kind_from_string(at.cell(r, "kind"));
    a.base_time = at.num(r, "base_time");
    if (!at.cell(r, at.column("line")).empty())
      a.line = static_cast<LineId>(at.integer(r, "line"));
    return a;
  });

  CsvTable lt = CsvTable::read_file(join_path(dir, "lines.csv"));
  net.lines = rows_by_id<Line>(lt, [&](std::size_t r, int id) {
    Line l;
    l.id = id;
    l.vehicle_type = lt.cell(r, "vehicle_type");
    l.circuit_time = lt.num(r, "circuit_time");
    l.seats = lt.num(r, "seats");
    l.active_fraction = lt.num(r, "active_fraction");
    l.initial_fleet = static_cast<int>(lt.integer(r, "initial_fleet"));
    l.fleet_min = static_cast<int>(lt.integer(r, "fleet_min"));
    l.fleet_max = lt.cell(r, lt.column("fleet_max")).empty()
                      ? kUnboundedFleet
                      : static_cast<int>(lt.integer(r, "fleet_max"));
    l.boarding_sequence =
        split_ids(lt.cell(r, "boarding_sequence"), lt.origin());
    return l;
  });

  net.finalize();
  return net;
}

ODMatrix read_od(const std::string& path) {
  CsvTable t = CsvTable::read_file(path);
  ODMatrix od;
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    ODEntry e;
    e.origin = static_cast<NodeId>(t.integer(r, "origin"));
    e.destination = static_cast<NodeId>(t.integer(r, "destination"));
    e.demand = t.num(r, "demand");
    if (e.demand < 0) {
      throw ValidationError(path + ": negative demand at row " +
                            std::to_string(r + 2));
    }
    if (e.demand > 0) od.entries.push_back(e);
  }
  return od;
}

void write_od(const std::string& path, const ODMatrix& od) {
  CsvWriter w({"origin", "destination", "demand"});
  for (const ODEntry& e : od.entries) {
    w.add_row({std::to_string(e.origin), std::to_string(e.destination),
               format_full(e.demand)});
  }
  w.write_file(path);
}

FleetVector read_fleet(const std::string& path, const TransitNetwork& net) {
  CsvTable t = CsvTable::read_file(path);
  const char* value_col = nullptr;
  for (const char* c : {"fleet", "y_final", "y"}) {
    if (t.has_column(c)) {
      value_col = c;
      break;
    }
  }
  if (!value_col) {
    throw SchemaError(path + ": need a fleet, y_final, or y column");
  }
  FleetVector y(net.lines.size(), -1);
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    long long id = t.integer(r, "line_id");
    if (id < 0 || id >= static_cast<long long>(y.size())) {
      throw SchemaError(path + ": unknown line_id " + std::to_string(id));
    }
    if (y[id] >= 0) {
      throw SchemaError(path + ": line_id " + std::to_string(id) + " repeats");
    }
    long long v = t.integer(r, value_col);
    if (v < 0) throw ValidationError(path + ": negative fleet for line " +
                                     std::to_string(id));
    y[id] = static_cast<int>(v);
  }
  for (std::size_t l = 0; l < y.size(); ++l) {
    if (y[l] < 0) {
      throw SchemaError(path + ": no row for line " + std::to_string(l));
    }
  }
  return y;
}

void write_fleet(const std::string& path, const TransitNetwork& net,
                 const FleetVector& y) {
  CsvWriter w({"line_id", "fleet"});
  for (const Line& l : net.lines) {
    w.add_row({std::to_string(l.id), std::to_string(y[l.id])});
  }
  w.write_file(path);
}

namespace {

std::string rel_diff_field(double initial, double current,
                           const ReportFormat& fmt) {
  if (initial == 0) {
    if (current == 0) return fmt(0.0);
    return current > 0 ? "inf" : "-inf";
  }
  return fmt((current - initial) / initial);
}

}  // namespace

void write_solution_csv(const std::string& path, const TransitNetwork& net,
                        const FleetVector& initial, const FleetVector& final_y,
                        const ReportFormat& fmt) {
  CsvWriter w({"line_id", "y_initial", "y_final", "abs_diff", "rel_diff"});
  for (const Line& l : net.lines) {
    const int yi = initial[l.id], yf = final_y[l.id];
    w.add_row({std::to_string(l.id), std::to_string(yi), std::to_string(yf),
               std::to_string(yf - yi), rel_diff_field(yi, yf, fmt)});
  }
  w.write_file(path);
}

void write_history_csv(const std::string& path,
                       const std::vector<HistoryRow>& history,
                       const ReportFormat& fmt) {
  CsvWriter w({"iteration", "incumbent_objective", "best_objective"});
  for (const HistoryRow& h : history) {
    w.add_row({std::to_string(h.iteration), fmt(h.incumbent_objective),
               fmt(h.best_objective)});
  }
  w.write_file(path);
}

void write_access_report(const std::string& path, const AccessProfile& initial,
                         const AccessProfile& current, const ReportFormat& fmt) {
  if (initial.community_ids != current.community_ids) {
    throw ValidationError("access profiles cover different communities");
  }
  CsvWriter w({"community_id", "metric_initial", "metric_current", "abs_diff",
               "rel_diff"});
  for (std::size_t i = 0; i < initial.community_ids.size(); ++i) {
    const double a = initial.metric[i], b = current.metric[i];
    w.add_row({std::to_string(initial.community_ids[i]), fmt(a), fmt(b),
               fmt(b - a), rel_diff_field(a, b, fmt)});
  }
  w.write_file(path);
}

void write_flows_csv(const std::string& path, const TransitNetwork& net,
                     const AssignmentResult& result, const ReportFormat& fmt) {
  CsvWriter w({"arc_id", "tail", "head", "kind", "line", "flow"});
  for (const Arc& a : net.arcs) {
    w.add_row({std::to_string(a.id), std::to_string(a.tail),
               std::to_string(a.head), to_string(a.kind),
               a.kind == ArcKind::Walk ? "" : std::to_string(a.line),
               fmt(result.flows[a.id])});
  }
  w.write_file(path);
}

std::string geojson_export(const TransitNetwork& net, const FleetVector* y,
                           const AccessProfile* profile) {
  json features = json::array();

  auto point = [](const Node& n) {
    return json{{"type", "Point"}, {"coordinates", {n.x, n.y}}};
  };

  for (NodeId s : net.stop_nodes()) {
    const Node& n = net.nodes[s];
    features.push_back({{"type", "Feature"},
                        {"geometry", point(n)},
                        {"properties", {{"id", n.id}, {"kind", "stop"}}}});
  }
  for (std::size_t i = 0; i < net.community_nodes().size(); ++i) {
    const Node& n = net.nodes[net.community_nodes()[i]];
    json props = {{"id", n.id}, {"kind", "community"}, {"population", n.population}};
    if (profile) props["metric"] = profile->metric[i];
    features.push_back({{"type", "Feature"},
                        {"geometry", point(n)},
                        {"properties", std::move(props)}});
  }
  for (NodeId f : net.facility_nodes()) {
    const Node& n = net.nodes[f];
    features.push_back(
        {{"type", "Feature"},
         {"geometry", point(n)},
         {"properties", {{"id", n.id}, {"kind", "facility"}, {"quality", n.quality}}}});
  }
  for (const Line& l : net.lines) {
    json coords = json::array();
    for (NodeId b : l.boarding_sequence) {
      coords.push_back({net.nodes[b].x, net.nodes[b].y});
    }
    json props = {{"id", l.id}, {"kind", "line"}, {"vehicle_type", l.vehicle_type}};
    if (y) props["fleet"] = (*y)[l.id];
    features.push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
         {"properties", std::move(props)}});
  }

  json fc = {{"type", "FeatureCollection"},
             {"distance_convention", net.distance_convention},
             {"features", std::move(features)}};
  return fc.dump(2) + "\n";
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setfill('0') << std::setw(16) << v;
  return ss.str();
}

}  // namespace samp
