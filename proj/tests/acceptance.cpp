// Acceptance gate for the toolkit. Twelve end-to-end properties, one
// [PASS]/[FAIL] line each, nonzero exit when any fails. Every tolerance and
// time budget is pinned right here so a reader can audit what "pass" means.
//
// The checks are property-based on purpose: they pit the library against
// literal reimplementations, closed forms, brute-force enumeration and its
// own command-line tool, never against recorded outputs.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "samp/access.hpp"
#include "samp/assignment.hpp"
#include "samp/io.hpp"
#include "samp/network.hpp"
#include "samp/pipeline.hpp"
#include "samp/rng.hpp"
#include "samp/solver.hpp"
#include "support/builders.hpp"

namespace fs = std::filesystem;
using namespace samp;
using samp::test::ThreeLineToy;
using samp::test::three_line_instance;
using samp::test::two_parallel_lines;

namespace {

// Tolerances and budgets, one place only.
constexpr double kOracleRel = 1e-12;   // arithmetic identity comparisons
constexpr double kFlowRel = 1e-6;      // conservation and closed-form splits
constexpr double kCostSlack = 1e-6;    // relative slack on the user-cost bound
constexpr double kMarginalTol = 1e-3;  // trip-table marginal error target
constexpr double kOracleSeconds = 5.0;
constexpr double kAssignSeconds = 60.0;
constexpr double kSolveSeconds = 300.0;
constexpr double kGenerateSeconds = 10.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream ss;
  ss << std::setprecision(digits) << v;
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The hand-sized generator configuration several criteria share: a 3x4 road
// grid, six communities, three facilities, thirty vehicles.
ArtificialNetConfig small_config(std::uint64_t seed) {
  ArtificialNetConfig cfg;
  cfg.grid_rows = 3;
  cfg.grid_cols = 4;
  cfg.extent_x = 1.0;
  cfg.extent_y = 0.8;
  cfg.community_count = 6;
  cfg.community_min_spacing = 0.1;
  cfg.facility_count = 3;
  cfg.total_fleet = 30;
  cfg.line_fleet_max = 10;
  cfg.seed = seed;
  return cfg;
}

// Instances generated once and reused across criteria.
struct SharedState {
  std::optional<GeneratedInstance> city;   // the default configuration
  double city_seconds = -1;
  std::string city_error;
  std::optional<GeneratedInstance> tight;  // small, cost-locally-optimal seed
  fs::path scratch;
};

// ---------------------------------------------------------------------------
// 1. Gravity metrics against a literal recomputation.

bool gravity_oracle(SharedState&, std::string& note) {
  const auto t0 = Clock::now();
  Rng rng(2026);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const int nc = 1 + static_cast<int>(rng.index(30));
    const int nf = 1 + static_cast<int>(rng.index(12));
    const double beta = rng.range(0.5, 2.5);
    std::vector<double> pop(nc), quality(nf);
    for (double& p : pop) p = rng.range(200.0, 5000.0);
    for (double& q : quality) q = rng.range(1.0, 100.0);
    Matrix<double> d(nc, nf);
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nf; ++j)
        d(i, j) = rng.u01() < 0.1 ? kInf : rng.range(0.5, 90.0);

    const std::vector<double> crowd = facility_crowding(pop, d, beta);
    const std::vector<double> metric = gravity_metric(quality, d, crowd, beta);

    // Written from the formulas, not from the library: facility crowding is
    // the population-weighted inverse-power sum, the metric the crowding-
    // discounted quality sum.
    std::vector<double> f(nf, 0.0);
    for (int j = 0; j < nf; ++j)
      for (int i = 0; i < nc; ++i)
        if (std::isfinite(d(i, j))) f[j] += pop[i] * std::pow(d(i, j), -beta);
    for (int j = 0; j < nf; ++j) worst = std::max(worst, rel_gap(f[j], crowd[j]));
    for (int i = 0; i < nc; ++i) {
      double a = 0;
      for (int j = 0; j < nf; ++j)
        if (std::isfinite(d(i, j)) && f[j] > 0)
          a += quality[j] * std::pow(d(i, j), -beta) / f[j];
      worst = std::max(worst, rel_gap(a, metric[i]));
    }
  }
  const double sec = seconds_since(t0);
  note = "worst relative gap " + fmt(worst) + " over 100 instances, " +
         fmt(sec) + " s";
  return worst <= kOracleRel && sec < kOracleSeconds;
}

// ---------------------------------------------------------------------------
// 2. One community, one facility: the metric collapses to quality over
//    population, independent of distance and decay.

bool crowding_cancellation(SharedState&, std::string& note) {
  Rng rng(7);
  double worst = 0;
  for (double beta : {0.5, 1.0, 1.5, 2.0}) {
    for (int t = 0; t < 10; ++t) {
      const double dist = rng.range(0.2, 60.0);
      const double pop = rng.range(50.0, 5000.0);
      const double quality = rng.range(1.0, 100.0);
      Matrix<double> d(1, 1);
      d(0, 0) = dist;
      const std::vector<double> crowd = facility_crowding({pop}, d, beta);
      const double a = gravity_metric({quality}, d, crowd, beta)[0];
      const double expected = quality / pop;
      worst = std::max(worst, std::abs(a - expected) / expected);
    }
  }
  note = "worst relative error " + fmt(worst) + " across 4 decays x 10 draws";
  return worst <= kOracleRel;
}

// ---------------------------------------------------------------------------
// 3. Assignment conserves flow on random cities and reproduces the
//    closed-form frequency split on two identical parallel lines.

bool assignment_conservation(SharedState&, std::string& note) {
  const auto t0 = Clock::now();
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const GeneratedInstance inst = generate_artificial(small_config(3000 + t));
    const TransitNetwork& net = inst.network;
    AssignmentConfig cfg;  // congestion on, defaults throughout
    const AssignmentResult r =
        transit_assignment(net, net.initial_fleet(), inst.od, cfg);

    std::vector<double> balance(net.nodes.size(), 0.0);
    for (const Arc& a : net.arcs) {
      balance[a.tail] -= r.flows[a.id];
      balance[a.head] += r.flows[a.id];
    }
    // Origins inject their demand, destinations absorb it; every node must
    // then balance to zero, which covers conservation and satisfaction both.
    for (const ODEntry& e : inst.od.entries) {
      balance[e.origin] += e.demand;
      balance[e.destination] -= e.demand;
    }
    const double scale = std::max(1.0, inst.od.total_demand());
    for (double b : balance) worst = std::max(worst, std::abs(b) / scale);
  }

  // Two identical lines, demand 10: equal frequencies split the flow 5/5 and
  // the expected wait is 1/(f1+f2) = 5 minutes, so total waiting is 50.
  auto toy = two_parallel_lines();
  ODMatrix od;
  od.entries.push_back({toy.from, toy.to, 10.0});
  AssignmentConfig un;
  un.congestion = false;
  const AssignmentResult r =
      transit_assignment(toy.net, toy.net.initial_fleet(), od, un);
  double split = 0;
  for (LineId l = 0; l < 2; ++l)
    for (ArcId a : toy.net.line_arcs(l))
      split = std::max(split, std::abs(r.flows[a] - 5.0) / 5.0);
  const double wait = std::abs(r.waiting_total - 50.0) / 50.0;

  const double sec = seconds_since(t0);
  note = "worst imbalance " + fmt(worst) + ", split error " + fmt(split) +
         ", wait error " + fmt(wait) + ", " + fmt(sec) + " s";
  return worst <= kFlowRel && split <= kFlowRel && wait <= kFlowRel &&
         sec < kAssignSeconds;
}

// ---------------------------------------------------------------------------
// 4. The congestion factor anchors exactly at 1 (zero flow) and 2 (at
//    capacity) and increases strictly in between and beyond.

bool congestion_anchors(SharedState&, std::string& note) {
  const double cap = 7.5;
  bool anchors = true, monotone = true;
  for (double alpha : {1.5, 2.0, 4.0}) {
    anchors = anchors && conical_congestion_factor(0.0, cap, alpha) == 1.0;
    anchors = anchors && conical_congestion_factor(cap, cap, alpha) == 2.0;
    double prev = -kInf;
    for (int i = 0; i < 1000; ++i) {
      const double v = cap * (2.0 * i / 999.0);  // saturation 0..2
      const double g = conical_congestion_factor(v, cap, alpha);
      monotone = monotone && g > prev;
      prev = g;
    }
  }
  note = std::string("anchors ") + (anchors ? "exact" : "off") +
         ", 1000-point grid " + (monotone ? "strictly increasing" : "not monotone");
  return anchors && monotone;
}

// ---------------------------------------------------------------------------
// 5. Default-city run: every incumbent the search accepts is certified
//    against bounds, budget and the user-cost cap, and the command-line
//    verifier signs off on the final fleet.

bool incumbents_certified(SharedState& s, std::string& note) {
  if (!s.city) {
    note = "city generation failed: " + s.city_error;
    return false;
  }
  const auto t0 = Clock::now();
  const TransitNetwork& net = s.city->network;
  const ODMatrix& od = s.city->od;

  SolverConfig cfg;
  cfg.iterations = 200;
  cfg.seed = 1;
  cfg.access.beta = 1.0;
  cfg.access.k_count = 1;
  // The uncongested cost model keeps two hundred certified steps on the full
  // default city inside the time budget; the congested solver is exercised
  // by the fifty-network conservation sweep instead. Feasibility here is
  // judged by the same evaluator the solver itself consults.
  cfg.assignment.congestion = false;
  cfg.weights.epsilon = 0.05;

  Evaluator eval(net, od, cfg.access, cfg.assignment, cfg.weights);
  const double baseline = eval.baseline();
  Solver solver(eval, cfg);

  int bad = 0;
  for (int i = 0; i < cfg.iterations; ++i) {
    solver.step();
    const FleetVector& y = solver.incumbent();  // integer by construction
    bool ok = true;
    try {
      validate_fleet_bounds(net, y);
    } catch (const std::exception&) {
      ok = false;
    }
    if (ok) ok = fleet_within_budget(net, y);
    if (ok) {
      const Evaluator::CostEval& ce = eval.cost_of(y);
      ok = ce.reachable &&
           ce.user_cost <= (1 + cfg.weights.epsilon) * baseline * (1 + kCostSlack);
    }
    if (!ok) ++bad;
  }
  const FleetVector final_y = solver.exhaustive_local_search(solver.best());

  // Round-trip through the tool: write the instance and the answer, then ask
  // the verifier for its independent verdict.
  const fs::path dir = s.scratch / "certified_run";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_network(dir.string(), net);
  write_od((dir / "od.csv").string(), od);
  write_fleet((dir / "fleet.csv").string(), net, final_y);
  const std::string cmd = std::string(SAMP_CLI_PATH) + " verify --network " +
                          dir.string() + " --od " + (dir / "od.csv").string() +
                          " --fleet " + (dir / "fleet.csv").string() +
                          " --epsilon 0.05 --no-congestion > " +
                          (dir / "verify.txt").string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  const int rc = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;

  const double sec = seconds_since(t0);
  note = "200 steps, " + std::to_string(bad) + " uncertified incumbents, " +
         std::to_string(eval.assignment_evaluations) + " cost evaluations, " +
         "verifier exit " + std::to_string(rc) + ", " + fmt(sec) + " s";
  return bad == 0 && rc == 0 && sec < kSolveSeconds;
}

// ---------------------------------------------------------------------------
// 6. Local optimality: the returned fleet beats its whole add/drop/swap
//    neighborhood under an independent sweep, and steepest ascent lands on
//    the brute-force optimum of the three-line toy.

std::vector<FleetVector> toy_neighbors(const ThreeLineToy& t,
                                       const FleetVector& y) {
  long long budget = 0, total = 0;
  for (const Line& l : t.net.lines) budget += l.initial_fleet;
  for (int v : y) total += v;
  std::vector<FleetVector> out;
  const std::size_t n = y.size();
  for (std::size_t l = 0; l < n; ++l) {
    if (total + 1 <= budget && y[l] + 1 <= t.net.lines[l].fleet_max) {
      FleetVector z = y;
      ++z[l];
      out.push_back(std::move(z));
    }
    if (y[l] - 1 >= t.net.lines[l].fleet_min) {
      FleetVector z = y;
      --z[l];
      out.push_back(std::move(z));
    }
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t l = 0; l < n; ++l) {
      if (m == l) continue;
      if (y[m] - 1 < t.net.lines[m].fleet_min) continue;
      if (y[l] + 1 > t.net.lines[l].fleet_max) continue;
      FleetVector z = y;
      --z[m];
      ++z[l];
      out.push_back(std::move(z));
    }
  return out;
}

bool local_optimality(SharedState&, std::string& note) {
  ThreeLineToy t = three_line_instance();
  SolverConfig cfg;
  cfg.access.beta = 1.0;
  // Sum every community. With partial coverage, thinning service relieves
  // facility crowding enough that the optimum hides behind simultaneous
  // drops, out of reach of single coordinate moves.
  cfg.access.k_count = 3;
  cfg.assignment.congestion = false;
  cfg.iterations = 60;
  cfg.seed = 29;
  Evaluator eval(t.net, t.od, cfg.access, cfg.assignment, cfg.weights);
  Solver solver(eval, cfg);
  const SolveResult r = solver.run();

  Evaluator probe(t.net, t.od, cfg.access, cfg.assignment, cfg.weights);
  int improving = 0;
  for (const FleetVector& z : toy_neighbors(t, r.best))
    if (probe.objective(z) > r.best_objective) ++improving;

  // Brute force over the whole box the budget and bounds allow.
  long long budget = 0;
  for (const Line& l : t.net.lines) budget += l.initial_fleet;
  double global = -kInf;
  const int hi = t.net.lines[0].fleet_max;
  for (int a = 1; a <= hi; ++a)
    for (int b = 1; b <= hi; ++b)
      for (int c = 1; c <= hi; ++c)
        if (a + b + c <= budget)
          global = std::max(global, probe.objective({a, b, c}));

  const FleetVector steep = solver.exhaustive_local_search(t.net.initial_fleet());
  const double steep_obj = probe.objective(steep);
  const double gap = rel_gap(steep_obj, global);

  note = std::to_string(improving) + " improving neighbors after the run, " +
         "steepest-ascent vs brute-force gap " + fmt(gap);
  return improving == 0 && gap <= kOracleRel;
}

// ---------------------------------------------------------------------------
// 7. With a seed fleet that is already user-cost locally optimal, a zero
//    allowance leaves the search exactly where it started.

bool zero_allowance_stagnates(SharedState& s, std::string& note) {
  if (!s.tight) {
    ArtificialNetConfig cfg = small_config(5);
    cfg.optimize_seed_fleet = true;
    s.tight = generate_artificial(cfg);
  }
  const TransitNetwork& net = s.tight->network;

  SolverConfig cfg;
  cfg.iterations = 40;
  cfg.seed = 3;
  cfg.access.beta = 1.0;
  cfg.access.k_count = 1;
  cfg.assignment.congestion = false;  // matches how the seed was optimized
  cfg.weights.epsilon = 0.0;
  Evaluator eval(net, s.tight->od, cfg.access, cfg.assignment, cfg.weights);
  Solver solver(eval, cfg);
  const SolveResult r = solver.run();

  const bool unchanged = r.best == r.initial;
  note = std::string("final fleet ") + (unchanged ? "unchanged" : "moved") +
         ", " + std::to_string(r.forced_backtracks) + " forced backtracks in " +
         std::to_string(cfg.iterations) + " steps";
  return unchanged;
}

// ---------------------------------------------------------------------------
// 8. Relaxing the cost allowance never ends below the locked run, and
//    identical seeded runs leave byte-identical histories.

bool relaxation_dominates(SharedState& s, std::string& note) {
  if (!s.tight) {
    ArtificialNetConfig cfg = small_config(5);
    cfg.optimize_seed_fleet = true;
    s.tight = generate_artificial(cfg);
  }
  const TransitNetwork& net = s.tight->network;
  const ODMatrix& od = s.tight->od;

  SolverConfig common;
  common.iterations = 60;
  common.seed = 7;
  common.access.beta = 1.0;
  common.access.k_count = 1;
  common.assignment.congestion = false;

  // One evaluator serves every allowance: its caches key on the fleet alone.
  Evaluator eval(net, od, common.access, common.assignment, common.weights);
  auto run_at = [&](double epsilon) {
    SolverConfig cfg = common;
    cfg.weights.epsilon = epsilon;
    Solver solver(eval, cfg);
    return solver.run();
  };

  const double locked = run_at(0.0).best_objective;
  bool dominated = true;
  std::string objs;
  for (double epsilon : {0.01, 0.05, 0.10, kInf}) {
    const SolveResult r = run_at(epsilon);
    dominated = dominated && r.best_objective >= locked;
    objs += (objs.empty() ? "" : "/") + fmt(r.best_objective, 6);
  }

  const SolveResult a = run_at(0.05);
  const SolveResult b = run_at(0.05);
  const fs::path dir = s.scratch / "history_twins";
  fs::create_directories(dir);
  write_history_csv((dir / "a.csv").string(), a.history);
  write_history_csv((dir / "b.csv").string(), b.history);
  const bool twins = a.best == b.best && a.history == b.history &&
                     slurp(dir / "a.csv") == slurp(dir / "b.csv") &&
                     !slurp(dir / "a.csv").empty();

  note = "locked " + fmt(locked, 6) + ", relaxed " + objs + ", twin runs " +
         (twins ? "byte-identical" : "diverged");
  return dominated && twins;
}

// ---------------------------------------------------------------------------
// 9. Trip-table balancing hits its marginals inside the iteration budget on
//    the default city, and honors exact fixed-point and symmetry cases.

bool trip_table_balances(SharedState& s, std::string& note) {
  if (!s.city) {
    note = "city generation failed: " + s.city_error;
    return false;
  }
  const TransitNetwork& net = s.city->network;
  std::vector<std::pair<NodeId, double>> boardings;
  for (NodeId stop : net.stop_nodes()) boardings.emplace_back(stop, 100.0);
  IpfResult details;
  const ODMatrix od = build_od_ipf(net, boardings, IPFConfig{}, &details);
  const bool balanced = details.converged && details.iterations <= 50 &&
                        details.max_error < kMarginalTol && !od.entries.empty();

  // A seed already on its marginals must come back bit for bit in one pass.
  Matrix<double> seed(2, 2);
  seed(0, 0) = 2;
  seed(0, 1) = 1;
  seed(1, 0) = 1;
  seed(1, 1) = 2;
  const IpfResult fixed = ipf_balance(seed, {3, 3}, {3, 3}, kMarginalTol, 50);
  const bool fixed_ok = fixed.converged && fixed.iterations == 1 &&
                        fixed.matrix == seed;

  // Symmetric seed, equal marginals, equal scale factors: the balanced
  // off-diagonal entries are exactly equal.
  Matrix<double> sym(2, 2);
  sym(0, 1) = 2;
  sym(1, 0) = 2;
  const IpfResult mirrored = ipf_balance(sym, {5, 5}, {5, 5}, kMarginalTol, 50);
  const bool sym_ok = mirrored.converged &&
                      mirrored.matrix(0, 1) == mirrored.matrix(1, 0) &&
                      mirrored.matrix(0, 1) == 5.0;

  note = "city marginal error " + fmt(details.max_error) + " after " +
         std::to_string(details.iterations) + " iterations, exact cases " +
         ((fixed_ok && sym_ok) ? "hold" : "broken");
  return balanced && fixed_ok && sym_ok;
}

// ---------------------------------------------------------------------------
// 10. Express generation: on every eligible line of twenty random cities the
//     derived line keeps round(n/10) stops at each end of the ranking, in
//     parent order, with each spanned arc shortened by exactly 40 seconds
//     per skipped stop (floored positive) and an initial fleet of zero.

struct ParentSnapshot {
  std::vector<NodeId> stops;                  // travel order
  std::map<std::pair<NodeId, NodeId>, double> seg;  // boarding pair -> minutes
  std::vector<NodeId> boarding;
};

bool express_contract(SharedState&, std::string& note) {
  int expresses = 0, violations = 0;
  for (int t = 0; t < 20; ++t) {
    ArtificialNetConfig cfg = small_config(7000 + t);
    cfg.grid_rows = 4;
    cfg.grid_cols = 5;
    cfg.extent_x = 1.2;
    cfg.extent_y = 0.9;
    cfg.total_fleet = 40;
    cfg.line_fleet_max = 12;
    GeneratedInstance inst = generate_artificial(cfg);
    TransitNetwork& net = inst.network;

    std::map<NodeId, NodeId> stop_of;  // boarding node -> street stop
    for (const Arc& a : net.arcs)
      if (a.kind == ArcKind::Board) stop_of[a.head] = a.tail;

    ExpressParams params;
    params.min_stops = 8;  // the small grids top out below the default

    std::vector<ParentSnapshot> parents(net.lines.size());
    int eligible = 0;
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      ParentSnapshot& p = parents[l];
      p.boarding = net.lines[l].boarding_sequence;
      for (NodeId b : p.boarding) p.stops.push_back(stop_of.at(b));
      for (ArcId a : net.line_arcs(static_cast<LineId>(l)))
        p.seg[{net.arcs[a].tail, net.arcs[a].head}] = net.arcs[a].base_time;
      const long long n = static_cast<long long>(p.stops.size());
      const long long keep = std::llround(params.keep_frac * n);
      if (n >= params.min_stops && keep >= 1 && 2 * keep < n) ++eligible;
    }

    const std::vector<ExpressInfo> infos = generate_express(net, params);
    if (static_cast<int>(infos.size()) != eligible) ++violations;

    for (const ExpressInfo& info : infos) {
      ++expresses;
      const ParentSnapshot& p = parents[info.parent_line];
      const long long n = static_cast<long long>(p.stops.size());
      const long long keep = std::llround(params.keep_frac * n);
      if (static_cast<long long>(info.kept_stops.size()) != 2 * keep) {
        ++violations;
        continue;
      }
      // Kept stops must appear in strictly increasing parent positions.
      std::vector<std::size_t> pos;
      bool order_ok = true;
      for (NodeId kept : info.kept_stops) {
        const auto it = std::find(p.stops.begin(), p.stops.end(), kept);
        if (it == p.stops.end()) {
          order_ok = false;
          break;
        }
        pos.push_back(static_cast<std::size_t>(it - p.stops.begin()));
      }
      for (std::size_t i = 0; order_ok && i + 1 < pos.size(); ++i)
        order_ok = pos[i] < pos[i + 1];
      if (!order_ok) {
        ++violations;
        continue;
      }

      const Line& e = net.lines[info.express_line];
      if (e.initial_fleet != 0 || e.fleet_min != 0) ++violations;

      std::map<std::pair<NodeId, NodeId>, double> eseg;
      for (ArcId a : net.line_arcs(info.express_line))
        eseg[{net.arcs[a].tail, net.arcs[a].head}] = net.arcs[a].base_time;

      for (std::size_t i = 0; i + 1 < pos.size(); ++i) {
        double fwd = 0, rev = 0;
        for (std::size_t k = pos[i]; k < pos[i + 1]; ++k) {
          fwd += p.seg.at({p.boarding[k], p.boarding[k + 1]});
          rev += p.seg.at({p.boarding[k + 1], p.boarding[k]});
        }
        const double skipped = static_cast<double>(pos[i + 1] - pos[i] - 1);
        const double want_fwd =
            std::max(params.min_arc_minutes, fwd - skipped * params.skip_saving_sec / 60.0);
        const double want_rev =
            std::max(params.min_arc_minutes, rev - skipped * params.skip_saving_sec / 60.0);
        const NodeId bu = e.boarding_sequence[i];
        const NodeId bv = e.boarding_sequence[i + 1];
        if (want_fwd <= 0 || want_rev <= 0) ++violations;
        if (rel_gap(eseg.at({bu, bv}), want_fwd) > kOracleRel) ++violations;
        if (rel_gap(eseg.at({bv, bu}), want_rev) > kOracleRel) ++violations;
      }
    }
  }
  note = std::to_string(expresses) + " express lines over 20 cities, " +
         std::to_string(violations) + " contract violations";
  return expresses > 0 && violations == 0;
}

// ---------------------------------------------------------------------------
// 11. The default city meets its envelope: 18 lines, exactly 200 vehicles,
//     stop count within the lattice bounds, communities spaced apart.

bool generator_envelope(SharedState& s, std::string& note) {
  if (!s.city) {
    note = "city generation failed: " + s.city_error;
    return false;
  }
  const TransitNetwork& net = s.city->network;
  const bool lines_ok = net.lines.size() == 18;
  long long fleet = 0;
  for (const Line& l : net.lines) fleet += l.initial_fleet;
  const std::size_t stops = net.stop_nodes().size();
  const bool stops_ok = stops >= 77 && stops <= 349;

  double min_spacing = kInf;
  const std::vector<NodeId> communities = net.community_nodes();
  for (std::size_t i = 0; i < communities.size(); ++i)
    for (std::size_t j = i + 1; j < communities.size(); ++j) {
      const Node& a = net.nodes[communities[i]];
      const Node& b = net.nodes[communities[j]];
      min_spacing = std::min(min_spacing, std::hypot(a.x - b.x, a.y - b.y));
    }
  const bool spacing_ok = min_spacing >= 0.15 - 1e-12;

  note = std::to_string(net.lines.size()) + " lines, fleet " +
         std::to_string(fleet) + ", " + std::to_string(stops) +
         " stops, min community spacing " + fmt(min_spacing) + " mi, generated in " +
         fmt(s.city_seconds) + " s";
  return lines_ok && fleet == 200 && stops_ok && spacing_ok &&
         s.city_seconds < kGenerateSeconds;
}

// ---------------------------------------------------------------------------
// 12. Door-to-door times never increase when any line gains a vehicle.

bool extra_vehicle_monotone(SharedState&, std::string& note) {
  int checked = 0, regressions = 0;
  for (int t = 0; t < 20; ++t) {
    const GeneratedInstance inst = generate_artificial(small_config(12000 + t));
    TransitNetwork net = inst.network;
    // Travel times see the fleet only through frequencies; the caps steer
    // the search, not the cost model. Widen them so a line already at its
    // cap can still take the probe vehicle.
    for (Line& l : net.lines)
      if (l.fleet_max != kUnboundedFleet) ++l.fleet_max;
    const std::vector<NodeId> sources = net.community_nodes();
    const std::vector<NodeId> targets = net.facility_nodes();
    const FleetVector y0 = net.initial_fleet();
    const Matrix<double> base = access_travel_times(net, y0, sources, targets);

    std::vector<Matrix<double>> boosted;
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      FleetVector y = y0;
      ++y[l];
      boosted.push_back(access_travel_times(net, y, sources, targets));
    }

    Rng rng(500 + t);
    for (int k = 0; k < 100; ++k) {
      const std::size_t i = rng.index(sources.size());
      const std::size_t j = rng.index(targets.size());
      const std::size_t l = rng.index(net.lines.size());
      ++checked;
      if (!(boosted[l](i, j) <= base(i, j))) ++regressions;
    }
  }
  note = std::to_string(checked) + " community-facility-line triples, " +
         std::to_string(regressions) + " regressions";
  return checked == 2000 && regressions == 0;
}

}  // namespace

int main() {
  SharedState shared;
  shared.scratch = fs::temp_directory_path() / "samp_acceptance";
  fs::remove_all(shared.scratch);
  fs::create_directories(shared.scratch);

  {
    const auto t0 = Clock::now();
    try {
      shared.city = generate_artificial(ArtificialNetConfig{});
      shared.city_seconds = seconds_since(t0);
    } catch (const std::exception& e) {
      shared.city_error = e.what();
    }
  }

  struct Criterion {
    const char* name;
    bool (*body)(SharedState&, std::string&);
  };
  const Criterion criteria[] = {
      {"gravity metrics match a literal recomputation", gravity_oracle},
      {"lone community metric reduces to quality over population", crowding_cancellation},
      {"assignment conserves flow and splits equal lines evenly", assignment_conservation},
      {"congestion factor anchors exactly and climbs strictly", congestion_anchors},
      {"every accepted incumbent is certified feasible end to end", incumbents_certified},
      {"settled fleets beat their neighborhood and the toy brute force", local_optimality},
      {"a cost-tight seed stays put under a zero allowance", zero_allowance_stagnates},
      {"relaxing the allowance never lands below the locked run", relaxation_dominates},
      {"trip tables balance to their marginals with exact edge cases", trip_table_balances},
      {"express lines honor the keep/skip timetable contract", express_contract},
      {"the default city meets its size, fleet and spacing envelope", generator_envelope},
      {"an extra vehicle never lengthens a door-to-door time", extra_vehicle_monotone},
  };

  int failures = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    std::string detail;
    bool ok = false;
    try {
      ok = c.body(shared, detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << index << ". " << c.name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++failures;
  }

  std::cout << (12 - failures) << " of 12 criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
