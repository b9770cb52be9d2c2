#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "samp/access.hpp"
#include "samp/assignment.hpp"
#include "samp/csv.hpp"
#include "samp/io.hpp"
#include "samp/network.hpp"
#include "samp/pipeline.hpp"
#include "samp/solver.hpp"

// Exit codes: 0 success, 1 unexpected failure, 2 usage, 3 broken input,
// 4 infeasibility or a failed verification.

namespace fs = std::filesystem;
using nlohmann::json;
using namespace samp;

namespace {

constexpr const char* kToolVersion = "1.0.0";

double parse_number(const std::string& text, const std::string& flag) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(flag + " expects a number (inf allowed), got '" +
                          text + "'");
  }
}

// JSON has no infinities, so manifests store them as strings.
json jnum(double v) {
  if (std::isnan(v)) return json();
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  return json(v);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

json network_digests(const std::string& dir) {
  json d;
  for (const char* f : {"nodes.csv", "arcs.csv", "lines.csv", "network.json"})
    d[f] = file_digest((fs::path(dir) / f).string());
  return d;
}

// Replaces the recorded initial fleet, so solves and baselines start there.
void apply_initial_fleet(TransitNetwork& net, const std::string& fleet_path) {
  if (fleet_path.empty()) return;
  const FleetVector y = read_fleet(fleet_path, net);
  for (std::size_t l = 0; l < net.lines.size(); ++l)
    net.lines[l].initial_fleet = y[l];
  net.finalize();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

json tool_stamp(const char* command) {
  return json{{"name", "samp"}, {"version", kToolVersion}, {"command", command}};
}

struct AssignFlags {
  double alpha = 2.0;
  bool no_congestion = false;
  double msa_tol = 1e-4;
  int msa_iters = 100;

  AssignmentConfig config() const {
    AssignmentConfig c;
    c.alpha = alpha;
    c.congestion = !no_congestion;
    c.msa_tolerance = msa_tol;
    c.msa_max_iterations = msa_iters;
    return c;
  }
  void attach(CLI::App* s) {
    s->add_option("--alpha", alpha, "congestion steepness")->capture_default_str();
    s->add_flag("--no-congestion", no_congestion,
                "single uncongested assignment pass");
    s->add_option("--msa-tol", msa_tol, "equilibrium relative-gap target")
        ->capture_default_str();
    s->add_option("--msa-max-iter", msa_iters, "averaging iteration cap")
        ->capture_default_str();
  }
};

// ---------------------------------------------------------------- solve ----

struct SolveOpt {
  std::string network, od, fleet, out, from_manifest;
  std::string epsilon = "inf";
  std::vector<double> theta{1, 1, 1};
  double beta = 1.0;
  int k = 1;
  AssignFlags assign;
  int iters = 200;
  std::uint64_t seed = 1;
  double t0 = 6.0, growth = 1.15, temp0 = 1e16, cooling = 0.999;
  int q_in = 20, q_out = 10, n_tilde = 50, n_max = 2, ltm = 40;
  bool no_final = false, full_precision = false;
  int threads = 1;
};

void load_solve_manifest(SolveOpt& o) {
  const json m = parse_json_file(o.from_manifest);
  try {
    const json& in = m.at("inputs");
    o.network = in.at("network").get<std::string>();
    o.od = in.at("od").get<std::string>();
    o.fleet = in.at("fleet").is_null() ? "" : in.at("fleet").get<std::string>();
    const json& c = m.at("config");
    o.beta = c.at("beta").get<double>();
    o.k = c.at("k").get<int>();
    o.epsilon = c.at("epsilon").is_string()
                    ? c.at("epsilon").get<std::string>()
                    : format_full(c.at("epsilon").get<double>());
    o.theta = c.at("theta").get<std::vector<double>>();
    o.assign.alpha = c.at("alpha").get<double>();
    o.assign.no_congestion = !c.at("congestion").get<bool>();
    o.assign.msa_tol = c.at("msa_tolerance").get<double>();
    o.assign.msa_iters = c.at("msa_max_iterations").get<int>();
    o.iters = c.at("iterations").get<int>();
    o.seed = c.at("seed").get<std::uint64_t>();
    o.t0 = c.at("t0").get<double>();
    o.growth = c.at("tenure_growth").get<double>();
    o.temp0 = c.at("temperature0").get<double>();
    o.cooling = c.at("cooling").get<double>();
    o.q_in = c.at("q_in_max").get<int>();
    o.q_out = c.at("q_out_max").get<int>();
    o.n_tilde = c.at("n_tilde_max").get<int>();
    o.n_max = c.at("n_max").get<int>();
    o.ltm = c.at("ltm_cap").get<int>();
    o.no_final = !c.at("final_search").get<bool>();
    o.full_precision = c.at("full_precision").get<bool>();
  } catch (const json::exception& e) {
    throw SchemaError(o.from_manifest + ": " + e.what());
  }
  if (o.theta.size() != 3)
    throw SchemaError(o.from_manifest + ": theta must have three entries");
}

int run_solve(SolveOpt& o) {
  if (!o.from_manifest.empty()) load_solve_manifest(o);

  TransitNetwork net = read_network(o.network);
  apply_initial_fleet(net, o.fleet);
  const ODMatrix od = read_od(o.od);

  SolverConfig cfg;
  cfg.iterations = o.iters;
  cfg.seed = o.seed;
  cfg.t0 = o.t0;
  cfg.tenure_growth = o.growth;
  cfg.temperature0 = o.temp0;
  cfg.cooling = o.cooling;
  cfg.q_in_max = o.q_in;
  cfg.q_out_max = o.q_out;
  cfg.n_tilde_max = o.n_tilde;
  cfg.n_max = o.n_max;
  cfg.ltm_cap = o.ltm;
  cfg.final_search = !o.no_final;
  cfg.access.beta = o.beta;
  cfg.access.k_count = o.k;
  cfg.assignment = o.assign.config();
  cfg.weights.theta1 = o.theta[0];
  cfg.weights.theta2 = o.theta[1];
  cfg.weights.theta3 = o.theta[2];
  cfg.weights.epsilon = parse_number(o.epsilon, "--epsilon");

  Evaluator eval(net, od, cfg.access, cfg.assignment, cfg.weights);
  const auto start = std::chrono::steady_clock::now();
  Solver solver(eval, cfg);
  const SolveResult res = solver.run();
  const double wall = seconds_since(start);

  const ReportFormat fmt{6, o.full_precision};
  fs::create_directories(o.out);
  const auto path = [&](const char* f) { return (fs::path(o.out) / f).string(); };
  write_solution_csv(path("solution.csv"), net, res.initial, res.best, fmt);
  write_history_csv(path("history.csv"), res.history, fmt);
  const AccessProfile before = access_objective(net, res.initial, cfg.access);
  const AccessProfile after = access_objective(net, res.best, cfg.access);
  write_access_report(path("access_report.csv"), before, after, fmt);

  json manifest;
  manifest["tool"] = tool_stamp("solve");
  json digests = network_digests(o.network);
  digests["od"] = file_digest(o.od);
  if (!o.fleet.empty()) digests["fleet"] = file_digest(o.fleet);
  manifest["inputs"] = {
      {"network", fs::absolute(o.network).string()},
      {"od", fs::absolute(o.od).string()},
      {"fleet", o.fleet.empty() ? json() : json(fs::absolute(o.fleet).string())},
      {"digests", digests},
  };
  manifest["config"] = {
      {"beta", o.beta},
      {"k", o.k},
      {"epsilon", jnum(cfg.weights.epsilon)},
      {"theta", o.theta},
      {"alpha", o.assign.alpha},
      {"congestion", !o.assign.no_congestion},
      {"msa_tolerance", o.assign.msa_tol},
      {"msa_max_iterations", o.assign.msa_iters},
      {"iterations", o.iters},
      {"seed", o.seed},
      {"t0", o.t0},
      {"tenure_growth", o.growth},
      {"temperature0", o.temp0},
      {"cooling", o.cooling},
      {"q_in_max", o.q_in},
      {"q_out_max", o.q_out},
      {"n_tilde_max", o.n_tilde},
      {"n_max", o.n_max},
      {"ltm_cap", o.ltm},
      {"final_search", !o.no_final},
      {"full_precision", o.full_precision},
      {"threads", o.threads},
  };
  manifest["results"] = {
      {"initial_objective", res.initial_objective},
      {"best_objective", res.best_objective},
      {"baseline_user_cost", jnum(res.baseline_user_cost)},
      {"improvements", res.improvements},
      {"sa_acceptances", res.sa_acceptances},
      {"forced_backtracks", res.forced_backtracks},
      {"ltm_backtracks", res.ltm_backtracks},
      {"access_evaluations", res.access_evaluations},
      {"assignment_evaluations", res.assignment_evaluations},
  };
  manifest["timings"] = {{"wall_seconds", wall}};
  write_text_file(path("run_manifest.json"), manifest.dump(2) + "\n");

  std::cout << "objective: " << fmt(res.initial_objective) << " -> "
            << fmt(res.best_objective) << "\n"
            << "improving steps: " << res.improvements
            << ", annealing acceptances: " << res.sa_acceptances
            << ", backtracks: " << res.ltm_backtracks + res.forced_backtracks
            << "\n"
            << "evaluations: " << res.access_evaluations << " access, "
            << res.assignment_evaluations << " assignment\n"
            << "wrote " << o.out << "\n";
  return 0;
}

// --------------------------------------------------------------- assign ----

struct AssignOpt {
  std::string network, od, fleet, out;
  std::vector<double> theta{1, 1, 1};
  AssignFlags assign;
  bool full_precision = false;
  int threads = 1;
};

int run_assign(const AssignOpt& o) {
  const TransitNetwork net = read_network(o.network);
  const FleetVector y =
      o.fleet.empty() ? net.initial_fleet() : read_fleet(o.fleet, net);
  const ODMatrix od = read_od(o.od);

  const auto start = std::chrono::steady_clock::now();
  const AssignmentResult r = transit_assignment(net, y, od, o.assign.config());
  const double wall = seconds_since(start);

  UserCostWeights w;
  w.theta1 = o.theta[0];
  w.theta2 = o.theta[1];
  w.theta3 = o.theta[2];
  const UserCostBreakdown b = user_cost_breakdown(net, r, w);

  const json summary = {
      {"user_cost", b.total},
      {"in_vehicle", b.in_vehicle},
      {"walking", b.walking},
      {"waiting", b.waiting},
      {"omega", r.waiting_total},
      {"iterations", r.iterations},
      {"gap", jnum(r.gap)},
      {"theta", o.theta},
      {"congestion", !o.assign.no_congestion},
      {"total_demand", od.total_demand()},
      {"wall_seconds", wall},
  };
  std::cout << summary.dump(2) << "\n";
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    write_flows_csv((fs::path(o.out) / "flows.csv").string(), net, r,
                    ReportFormat{6, o.full_precision});
    write_text_file((fs::path(o.out) / "summary.json").string(),
                    summary.dump(2) + "\n");
  }
  return 0;
}

// --------------------------------------------------------------- access ----

struct AccessOpt {
  std::string network, fleet, out;
  double beta = 1.0;
  int k = 1;
  bool full_precision = false;
};

int run_access(const AccessOpt& o) {
  const TransitNetwork net = read_network(o.network);
  const AccessParams params{o.beta, o.k};
  const FleetVector initial = net.initial_fleet();
  const AccessProfile base = access_objective(net, initial, params);
  const AccessProfile current =
      o.fleet.empty() ? base
                      : access_objective(net, read_fleet(o.fleet, net), params);

  if (!o.out.empty())
    write_access_report(o.out, base, current, ReportFormat{6, o.full_precision});

  const json summary = {
      {"objective", current.objective},
      {"beta", o.beta},
      {"k", o.k},
      {"included_communities", current.included},
      {"communities", current.community_ids.size()},
      {"unreached_facilities", current.unreached_facilities},
  };
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// ------------------------------------------------------------- generate ----

json generator_config_json(const ArtificialNetConfig& c) {
  return json{
      {"grid_rows", c.grid_rows},
      {"grid_cols", c.grid_cols},
      {"extent_x", c.extent_x},
      {"extent_y", c.extent_y},
      {"speed_min", c.speed_min},
      {"speed_max", c.speed_max},
      {"dwell_min", c.dwell_min},
      {"dwell_max", c.dwell_max},
      {"layover_min", c.layover_min},
      {"layover_max", c.layover_max},
      {"extra_stops_max", c.extra_stops_max},
      {"walk_cutoff", c.walk_cutoff},
      {"walk_max_degree", c.walk_max_degree},
      {"community_count", c.community_count},
      {"community_min_spacing", c.community_min_spacing},
      {"population_min", c.population_min},
      {"population_max", c.population_max},
      {"facility_count", c.facility_count},
      {"poi_walk_cutoff", c.poi_walk_cutoff},
      {"total_fleet", c.total_fleet},
      {"line_fleet_min", c.line_fleet_min},
      {"line_fleet_max", c.line_fleet_max},
      {"seats", c.seats},
      {"horizon", c.horizon},
      {"od_gamma_mean", c.od_gamma_mean},
      {"od_gamma_std", c.od_gamma_std},
      {"boarding_share", c.boarding_share},
      {"perturb_min", c.perturb_min},
      {"perturb_max", c.perturb_max},
      {"ipf_max_iterations", c.ipf_max_iterations},
      {"ipf_tolerance", c.ipf_tolerance},
      {"placement_retry_budget", c.placement_retry_budget},
      {"optimize_seed_fleet", c.optimize_seed_fleet},
      {"seed", c.seed},
  };
}

struct GenerateOpt {
  std::string config, out;
  long long seed = -1;  // negative: keep the config's seed
  bool optimize_fleet = false;
};

int run_generate(const GenerateOpt& o) {
  ArtificialNetConfig cfg;
  if (!o.config.empty())
    cfg = artificial_config_from_json(read_text_file(o.config), o.config);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.optimize_fleet) cfg.optimize_seed_fleet = true;

  const auto start = std::chrono::steady_clock::now();
  const GeneratedInstance inst = generate_artificial(cfg);
  const double wall = seconds_since(start);

  write_network(o.out, inst.network);
  const std::string od_path = (fs::path(o.out) / "od.csv").string();
  write_od(od_path, inst.od);

  int fleet_total = 0;
  for (const Line& l : inst.network.lines) fleet_total += l.initial_fleet;
  json manifest;
  manifest["tool"] = tool_stamp("generate");
  manifest["config"] = generator_config_json(cfg);
  json digests = network_digests(o.out);
  digests["od.csv"] = file_digest(od_path);
  manifest["outputs"] = digests;
  manifest["summary"] = {
      {"lines", inst.network.lines.size()},
      {"stops", inst.network.stop_nodes().size()},
      {"communities", inst.network.community_nodes().size()},
      {"facilities", inst.network.facility_nodes().size()},
      {"od_entries", inst.od.entries.size()},
      {"total_demand", inst.od.total_demand()},
      {"fleet_total", fleet_total},
  };
  manifest["timings"] = {{"wall_seconds", wall}};
  write_text_file((fs::path(o.out) / "generate_manifest.json").string(),
                  manifest.dump(2) + "\n");
  std::cout << manifest["summary"].dump(2) << "\n";
  return 0;
}

// --------------------------------------------------------------- ingest ----

struct IngestOpt {
  std::string gtfs, out, service;
  int clusters = 100;
  double walk_cutoff = 0.75;
  double horizon = 1440;
  double bus_seats = 39, train_seats = 228;
  double min_headway = 30;
  std::uint64_t seed = 1;
};

int run_ingest(const IngestOpt& o) {
  GtfsIngestConfig cfg;
  cfg.clusters = o.clusters;
  cfg.walk_cutoff = o.walk_cutoff;
  cfg.service_id = o.service;
  cfg.horizon = o.horizon;
  cfg.bus_seats = o.bus_seats;
  cfg.train_seats = o.train_seats;
  cfg.min_headway = o.min_headway;
  cfg.seed = o.seed;

  const IngestResult r = ingest_gtfs_lite(o.gtfs, cfg);
  write_network(o.out, r.network);

  json lines = json::array();
  for (const IngestLineStat& s : r.line_stats) {
    lines.push_back({
        {"line", s.line},
        {"route_id", s.route_id},
        {"visits_per_stop", s.visits_per_stop},
        {"span_minutes", s.span_minutes},
        {"frequency", s.frequency},
        {"initial_fleet", s.initial_fleet},
    });
  }
  json summary;
  summary["tool"] = tool_stamp("ingest");
  summary["raw_stops"] = r.stop_count;
  summary["clusters"] = o.clusters;
  summary["cluster_distance_miles"] = {
      {"mean", r.cluster_stats.mean},
      {"stddev", r.cluster_stats.stddev},
      {"median", r.cluster_stats.median},
      {"max", r.cluster_stats.max},
  };
  summary["lines"] = lines;
  write_text_file((fs::path(o.out) / "ingest_summary.json").string(),
                  summary.dump(2) + "\n");
  std::cout << "clustered " << r.stop_count << " stops into " << o.clusters
            << ", built " << r.line_stats.size() << " lines\n"
            << "wrote " << o.out << "\n";
  return 0;
}

// ------------------------------------------------------------- build-od ----

struct BuildOdOpt {
  std::string network, boardings, out;
  double mean = 43.8, std_dev = 20.0;
  double tolerance = 0.001;
  int max_iterations = 50;
};

int run_build_od(const BuildOdOpt& o) {
  const TransitNetwork net = read_network(o.network);
  const CsvTable table = CsvTable::read_file(o.boardings);
  std::vector<std::pair<NodeId, double>> boardings;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    boardings.emplace_back(static_cast<NodeId>(table.integer(r, "stop")),
                           table.num(r, "boardings"));
  }

  IPFConfig cfg;
  cfg.max_iterations = o.max_iterations;
  cfg.tolerance = o.tolerance;
  cfg.gamma_mean = o.mean;
  cfg.gamma_std = o.std_dev;
  IpfResult details;
  const ODMatrix od = build_od_ipf(net, boardings, cfg, &details);
  write_od(o.out, od);

  const json summary = {
      {"entries", od.entries.size()},
      {"total_demand", od.total_demand()},
      {"ipf_iterations", details.iterations},
      {"ipf_max_error", details.max_error},
      {"ipf_converged", details.converged},
  };
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------- gen-express ----

struct ExpressOpt {
  std::string network, out;
  int min_stops = 18;
  double keep_frac = 0.1;
  double skip_saving_sec = 40;
  double beta = 1.0;
};

int run_express(const ExpressOpt& o) {
  TransitNetwork net = read_network(o.network);
  ExpressParams params;
  params.min_stops = o.min_stops;
  params.keep_frac = o.keep_frac;
  params.skip_saving_sec = o.skip_saving_sec;
  params.beta = o.beta;
  const std::vector<ExpressInfo> infos = generate_express(net, params);
  write_network(o.out, net);

  json lines = json::array();
  for (const ExpressInfo& e : infos) {
    lines.push_back({{"express_line", e.express_line},
                     {"parent_line", e.parent_line},
                     {"kept_stops", e.kept_stops}});
  }
  const json summary = {{"express_lines", infos.size()}, {"lines", lines}};
  write_text_file((fs::path(o.out) / "express_summary.json").string(),
                  summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// ------------------------------------------------------- export-geojson ----

struct GeoOpt {
  std::string network, fleet, out;
  bool with_access = false;
  double beta = 1.0;
  int k = 1;
};

int run_geojson(const GeoOpt& o) {
  const TransitNetwork net = read_network(o.network);
  const FleetVector y =
      o.fleet.empty() ? net.initial_fleet() : read_fleet(o.fleet, net);
  AccessProfile profile;
  const AccessProfile* pp = nullptr;
  if (o.with_access) {
    profile = access_objective(net, y, AccessParams{o.beta, o.k});
    pp = &profile;
  }
  std::string text = geojson_export(net, &y, pp);
  if (text.empty() || text.back() != '\n') text += '\n';
  if (o.out.empty())
    std::cout << text;
  else
    write_text_file(o.out, text);
  return 0;
}

// --------------------------------------------------------------- verify ----

struct VerifyOpt {
  std::string network, od, fleet, baseline_fleet, run;
  std::string epsilon = "inf";
  std::vector<double> theta{1, 1, 1};
  double beta = 1.0;
  int k = 1;
  AssignFlags assign;
};

void load_verify_run(VerifyOpt& o) {
  const std::string path = (fs::path(o.run) / "run_manifest.json").string();
  const json m = parse_json_file(path);
  try {
    const json& in = m.at("inputs");
    o.network = in.at("network").get<std::string>();
    o.od = in.at("od").get<std::string>();
    o.baseline_fleet =
        in.at("fleet").is_null() ? "" : in.at("fleet").get<std::string>();
    const json& c = m.at("config");
    o.beta = c.at("beta").get<double>();
    o.k = c.at("k").get<int>();
    o.epsilon = c.at("epsilon").is_string()
                    ? c.at("epsilon").get<std::string>()
                    : format_full(c.at("epsilon").get<double>());
    o.theta = c.at("theta").get<std::vector<double>>();
    o.assign.alpha = c.at("alpha").get<double>();
    o.assign.no_congestion = !c.at("congestion").get<bool>();
    o.assign.msa_tol = c.at("msa_tolerance").get<double>();
    o.assign.msa_iters = c.at("msa_max_iterations").get<int>();
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
  if (o.fleet.empty())
    o.fleet = (fs::path(o.run) / "solution.csv").string();
}

int run_verify(VerifyOpt& o) {
  if (!o.run.empty()) load_verify_run(o);
  if (o.network.empty() || o.od.empty() || o.fleet.empty())
    throw ValidationError(
        "verify needs --run DIR or --network, --od and --fleet");
  if (o.theta.size() != 3)
    throw ValidationError("--theta expects three weights");

  TransitNetwork net = read_network(o.network);
  apply_initial_fleet(net, o.baseline_fleet);
  const ODMatrix od = read_od(o.od);
  const FleetVector y = read_fleet(o.fleet, net);
  const double eps = parse_number(o.epsilon, "--epsilon");

  UserCostWeights w;
  w.theta1 = o.theta[0];
  w.theta2 = o.theta[1];
  w.theta3 = o.theta[2];
  w.epsilon = eps;
  Evaluator eval(net, od, AccessParams{o.beta, o.k}, o.assign.config(), w);
  const VerifyReport rep = verify_solution(eval, y, eps);

  const auto mark = [](bool ok) { return ok ? "[ok]   " : "[FAIL] "; };
  std::cout << mark(rep.bounds_ok) << "per-line fleet bounds\n"
            << mark(rep.budget_ok) << "vehicle-type budgets\n"
            << mark(rep.user_cost_ok) << "user-cost bound (epsilon = "
            << format_sig(eps, 6) << ")\n"
            << mark(rep.locally_optimal) << "single-move local optimality\n";
  if (rep.user_cost_ok && !std::isnan(rep.user_cost)) {
    std::cout << "user cost " << format_sig(rep.user_cost, 6) << " vs baseline "
              << format_sig(rep.baseline, 6) << "\n";
  }
  if (rep.ok()) {
    std::cout << "objective " << format_sig(rep.objective, 6)
              << "\nverdict: pass\n";
    return 0;
  }
  std::cout << "detail: " << rep.detail << "\nverdict: fail\n";
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fleet reallocation toolkit for transit access equity"};
  app.set_version_flag("--version", std::string("samp ") + kToolVersion);
  app.require_subcommand(1);

  int rc = 0;

  SolveOpt so;
  auto* solve = app.add_subcommand(
      "solve", "reallocate the fleet to raise the lowest community metrics");
  solve->add_option("--network", so.network, "network directory");
  solve->add_option("--od", so.od, "demand CSV");
  solve->add_option("--fleet", so.fleet, "starting fleet CSV (default: recorded)");
  solve->add_option("--out", so.out, "output directory")->required();
  solve->add_option("--from-manifest", so.from_manifest,
                    "rerun a previous run_manifest.json (inputs and config)");
  solve->add_option("--epsilon", so.epsilon,
                    "allowed relative user-cost increase, inf to ignore")
      ->capture_default_str();
  solve->add_option("--beta", so.beta, "gravity decay exponent")
      ->capture_default_str();
  solve->add_option("--k", so.k, "communities the objective sums")
      ->capture_default_str();
  solve->add_option("--theta", so.theta,
                    "in-vehicle, walking, waiting weights")
      ->expected(3);
  so.assign.attach(solve);
  solve->add_option("--iters", so.iters, "search iterations")
      ->capture_default_str();
  solve->add_option("--seed", so.seed, "random seed")->capture_default_str();
  solve->add_option("--t0", so.t0, "initial tabu tenure")->capture_default_str();
  solve->add_option("--tenure-growth", so.growth, "tenure growth factor")
      ->capture_default_str();
  solve->add_option("--temperature", so.temp0, "initial annealing temperature")
      ->capture_default_str();
  solve->add_option("--cooling", so.cooling, "temperature decay per iteration")
      ->capture_default_str();
  solve->add_option("--q-in-max", so.q_in, "inner stagnation cutoff")
      ->capture_default_str();
  solve->add_option("--q-out-max", so.q_out, "outer stagnation cutoff")
      ->capture_default_str();
  solve->add_option("--n-tilde-max", so.n_tilde, "tentative candidates per pass")
      ->capture_default_str();
  solve->add_option("--n-max", so.n_max, "feasible candidates kept per list")
      ->capture_default_str();
  solve->add_option("--ltm-cap", so.ltm, "attractive-solution pool size")
      ->capture_default_str();
  solve->add_flag("--no-final-search", so.no_final,
                  "skip the terminal exhaustive local search");
  solve->add_flag("--full-precision", so.full_precision,
                  "print every bit of each number");
  solve->add_option("--threads", so.threads, "reserved; runs are single-threaded")
      ->capture_default_str();
  solve->callback([&] {
    if (so.from_manifest.empty() && (so.network.empty() || so.od.empty()))
      throw CLI::RequiredError("--network and --od (or --from-manifest)");
    rc = run_solve(so);
  });

  AssignOpt ao;
  auto* assign = app.add_subcommand(
      "assign", "equilibrium passenger flows for a fixed fleet");
  assign->add_option("--network", ao.network, "network directory")->required();
  assign->add_option("--od", ao.od, "demand CSV")->required();
  assign->add_option("--fleet", ao.fleet, "fleet CSV (default: recorded)");
  assign->add_option("--out", ao.out, "directory for flows.csv and summary.json");
  assign->add_option("--theta", ao.theta, "in-vehicle, walking, waiting weights")
      ->expected(3);
  ao.assign.attach(assign);
  assign->add_flag("--full-precision", ao.full_precision,
                   "print every bit of each number");
  assign->add_option("--threads", ao.threads,
                     "reserved; runs are single-threaded")
      ->capture_default_str();
  assign->callback([&] { rc = run_assign(ao); });

  AccessOpt co;
  auto* access = app.add_subcommand(
      "access", "community access metrics for a fleet");
  access->add_option("--network", co.network, "network directory")->required();
  access->add_option("--fleet", co.fleet, "fleet CSV (default: recorded)");
  access->add_option("--out", co.out, "access report CSV path");
  access->add_option("--beta", co.beta, "gravity decay exponent")
      ->capture_default_str();
  access->add_option("--k", co.k, "communities the objective sums")
      ->capture_default_str();
  access->add_flag("--full-precision", co.full_precision,
                   "print every bit of each number");
  access->callback([&] { rc = run_access(co); });

  GenerateOpt go;
  auto* generate = app.add_subcommand(
      "generate", "build a synthetic grid instance (network plus demand)");
  generate->add_option("--config", go.config, "JSON config overriding defaults");
  generate->add_option("--seed", go.seed, "override the config seed");
  generate->add_flag("--optimize-fleet", go.optimize_fleet,
                     "descend on the seed fleet to cut user cost (slow)");
  generate->add_option("--out", go.out, "output directory")->required();
  generate->callback([&] { rc = run_generate(go); });

  IngestOpt io_;
  auto* ingest = app.add_subcommand(
      "ingest", "build a network from a GTFS feed directory");
  ingest->add_option("--gtfs", io_.gtfs, "feed directory")->required();
  ingest->add_option("--out", io_.out, "output directory")->required();
  ingest->add_option("--clusters", io_.clusters, "stop clusters to keep")
      ->capture_default_str();
  ingest->add_option("--walk-cutoff", io_.walk_cutoff,
                     "max walking-arc length, miles")
      ->capture_default_str();
  ingest->add_option("--service", io_.service,
                     "keep only trips of this service_id");
  ingest->add_option("--horizon", io_.horizon, "service horizon, minutes")
      ->capture_default_str();
  ingest->add_option("--bus-seats", io_.bus_seats, "seats per bus")
      ->capture_default_str();
  ingest->add_option("--train-seats", io_.train_seats, "seats per train")
      ->capture_default_str();
  ingest->add_option("--min-headway", io_.min_headway,
                     "fleet floor: one vehicle per this many minutes")
      ->capture_default_str();
  ingest->add_option("--seed", io_.seed, "clustering seed")
      ->capture_default_str();
  ingest->callback([&] { rc = run_ingest(io_); });

  BuildOdOpt bo;
  auto* build_od = app.add_subcommand(
      "build-od", "balance a demand matrix from per-stop boarding totals");
  build_od->add_option("--network", bo.network, "network directory")->required();
  build_od->add_option("--boardings", bo.boardings,
                       "CSV with stop and boardings columns")
      ->required();
  build_od->add_option("--out", bo.out, "demand CSV path")->required();
  build_od->add_option("--mean", bo.mean, "trip-length gamma mean, minutes")
      ->capture_default_str();
  build_od->add_option("--std", bo.std_dev, "trip-length gamma stddev")
      ->capture_default_str();
  build_od->add_option("--ipf-tol", bo.tolerance, "marginal error target")
      ->capture_default_str();
  build_od->add_option("--ipf-max-iter", bo.max_iterations,
                       "balancing iteration cap")
      ->capture_default_str();
  build_od->callback([&] { rc = run_build_od(bo); });

  ExpressOpt eo;
  auto* express = app.add_subcommand(
      "gen-express", "add limited-stop variants of long lines");
  express->add_option("--network", eo.network, "network directory")->required();
  express->add_option("--out", eo.out, "output directory")->required();
  express->add_option("--min-stops", eo.min_stops,
                      "only lines with at least this many stops")
      ->capture_default_str();
  express->add_option("--keep-frac", eo.keep_frac,
                      "share of stops kept at each access extreme")
      ->capture_default_str();
  express->add_option("--skip-saving-sec", eo.skip_saving_sec,
                      "seconds saved per skipped stop")
      ->capture_default_str();
  express->add_option("--beta", eo.beta, "decay for the stop-scoring metric")
      ->capture_default_str();
  express->callback([&] { rc = run_express(eo); });

  GeoOpt ge;
  auto* geojson = app.add_subcommand(
      "export-geojson", "emit the network (and optional metrics) as GeoJSON");
  geojson->add_option("--network", ge.network, "network directory")->required();
  geojson->add_option("--fleet", ge.fleet, "fleet CSV (default: recorded)");
  geojson->add_option("--out", ge.out, "output file (default: stdout)");
  geojson->add_flag("--with-access", ge.with_access,
                    "attach community metrics for this fleet");
  geojson->add_option("--beta", ge.beta, "gravity decay exponent")
      ->capture_default_str();
  geojson->add_option("--k", ge.k, "communities the objective sums")
      ->capture_default_str();
  geojson->callback([&] { rc = run_geojson(ge); });

  VerifyOpt vo;
  auto* verify = app.add_subcommand(
      "verify", "re-check a solution's feasibility and local optimality");
  verify->add_option("--run", vo.run, "solve output directory to re-check");
  verify->add_option("--network", vo.network, "network directory");
  verify->add_option("--od", vo.od, "demand CSV");
  verify->add_option("--fleet", vo.fleet, "solution fleet CSV");
  verify->add_option("--baseline-fleet", vo.baseline_fleet,
                     "initial fleet override for the cost baseline");
  verify->add_option("--epsilon", vo.epsilon,
                     "allowed relative user-cost increase")
      ->capture_default_str();
  verify->add_option("--theta", vo.theta, "in-vehicle, walking, waiting weights")
      ->expected(3);
  verify->add_option("--beta", vo.beta, "gravity decay exponent")
      ->capture_default_str();
  verify->add_option("--k", vo.k, "communities the objective sums")
      ->capture_default_str();
  vo.assign.attach(verify);
  verify->callback([&] { rc = run_verify(vo); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const UnreachableDemandError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
