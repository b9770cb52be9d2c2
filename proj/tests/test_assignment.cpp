#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "samp/assignment.hpp"
#include "samp/pipeline.hpp"
#include "support/builders.hpp"

using namespace samp;
using namespace samp::test;

namespace {

// Node balance from the OD matrix: arc inflow minus outflow must equal the
// demand terminating here minus the demand starting here.
void check_conservation(const TransitNetwork& net, const ODMatrix& od,
                        const AssignmentResult& res, double tol) {
  std::vector<double> net_in(net.nodes.size(), 0.0);
  for (const Arc& a : net.arcs) {
    net_in[a.head] += res.flows[a.id];
    net_in[a.tail] -= res.flows[a.id];
  }
  std::vector<double> expected(net.nodes.size(), 0.0);
  for (const ODEntry& e : od.entries) {
    if (e.origin == e.destination) continue;
    expected[e.destination] += e.demand;
    expected[e.origin] -= e.demand;
  }
  for (std::size_t v = 0; v < net.nodes.size(); ++v) {
    CAPTURE(v);
    CHECK(net_in[v] == doctest::Approx(expected[v]).epsilon(tol).scale(
                           std::max(1.0, od.total_demand())));
  }
}

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

}  // namespace

TEST_CASE("conical factor hits its anchors and stays monotone") {
  // Hand-derived values: beta = (2a-1)/(2a-2) makes sqrt(a^2 + beta^2) equal
  // a + beta - 1, so the curve passes through 1 at empty and 2 at capacity.
  CHECK(conical_congestion_factor(50, 100, 2.0) ==
        doctest::Approx(2 + std::sqrt(3.25) - 2.5).epsilon(1e-15));
  CHECK(conical_congestion_factor(50, 100, 2.0) ==
        doctest::Approx(1.302775637731995).epsilon(1e-12));

  for (double alpha : {1.5, 2.0, 4.0}) {
    CAPTURE(alpha);
    CHECK(conical_congestion_factor(0, 100, alpha) == 1.0);  // exact branch
    CHECK(conical_congestion_factor(100, 100, alpha) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(conical_congestion_factor(1e-9, 100, alpha) ==
          doctest::Approx(1.0).epsilon(1e-6));

    double prev = 0;
    for (int i = 1; i <= 1000; ++i) {
      const double g = conical_congestion_factor(i * 0.002 * 100, 100, alpha);
      CHECK(g > prev);
      prev = g;
    }
  }
}

TEST_CASE("conical factor rejects degenerate inputs") {
  CHECK_THROWS_AS(conical_congestion_factor(5, 0, 2.0), ValidationError);
  CHECK_THROWS_AS(conical_congestion_factor(5, 100, 1.0), ValidationError);
  CHECK_THROWS_AS(conical_congestion_factor(5, 100, 0.5), ValidationError);
  CHECK_THROWS_AS(conical_congestion_factor(-1, 100, 2.0), ValidationError);
  CHECK_NOTHROW(conical_congestion_factor(0, 0, 2.0));  // parked line, no flow
}

TEST_CASE("one forced line loads all demand and waits 1/f per rider") {
  SingleLineToy t = single_line();  // f = 0.5
  ODMatrix od;
  od.entries.push_back({t.from, t.to, 10});

  for (bool congestion : {false, true}) {
    CAPTURE(congestion);
    AssignmentConfig cfg;
    cfg.congestion = congestion;
    const AssignmentResult res =
        transit_assignment(t.net, t.net.initial_fleet(), od, cfg);
    REQUIRE(res.flows.size() == t.net.arcs.size());
    // The traveled chain (board at the origin, ride, alight at the
    // destination) carries everything; the other two access arcs are idle.
    for (const Arc& a : t.net.arcs) {
      CAPTURE(a.id);
      const bool used = a.kind == ArcKind::Line ||
                        (a.kind == ArcKind::Board && a.tail == t.from) ||
                        (a.kind == ArcKind::Alight && a.head == t.to);
      CHECK(res.flows[a.id] == doctest::Approx(used ? 10.0 : 0.0).epsilon(1e-6));
    }
    CHECK(res.waiting_total == doctest::Approx(20.0).epsilon(1e-6));
    if (!congestion) {
      CHECK(res.iterations == 1);
      CHECK(res.gap == 0.0);
    }
  }
}

TEST_CASE("identical parallel lines split demand by frequency") {
  ParallelLinesToy t = two_parallel_lines();  // f1 = f2 = 0.1
  ODMatrix od;
  od.entries.push_back({t.from, t.to, 10});
  AssignmentConfig cfg;
  cfg.congestion = false;
  const AssignmentResult res =
      transit_assignment(t.net, t.net.initial_fleet(), od, cfg);

  for (const Arc& a : t.net.arcs) {
    CAPTURE(a.id);
    const bool used = a.kind == ArcKind::Line ||
                      (a.kind == ArcKind::Board && a.tail == t.from) ||
                      (a.kind == ArcKind::Alight && a.head == t.to);
    CHECK(res.flows[a.id] == doctest::Approx(used ? 5.0 : 0.0).epsilon(1e-6));
  }
  // Combined frequency 0.2: five expected minutes for each of ten riders.
  CHECK(res.waiting_total == doctest::Approx(50.0).epsilon(1e-6));
}

TEST_CASE("cost breakdown separates riding, walking and waiting") {
  UserCostToy t = user_cost_chain();
  AssignmentConfig cfg;
  cfg.congestion = false;
  const AssignmentResult res =
      transit_assignment(t.net, t.net.initial_fleet(), t.od, cfg);

  UserCostWeights w;  // unit weights
  const UserCostBreakdown b = user_cost_breakdown(t.net, res, w);
  CHECK(b.in_vehicle == doctest::Approx(50.0).epsilon(1e-9));
  CHECK(b.walking == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(b.waiting == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(b.total == doctest::Approx(80.0).epsilon(1e-9));
  CHECK(user_cost(t.net, res, w) == b.total);

  w.theta1 = 0;
  w.theta2 = 0;
  w.theta3 = 1;
  CHECK(user_cost(t.net, res, w) == doctest::Approx(20.0).epsilon(1e-9));

  w = UserCostWeights{};
  w.theta1 = 2;
  CHECK(user_cost(t.net, res, w) == doctest::Approx(130.0).epsilon(1e-9));

  // The total is linear in the weights.
  w.theta1 = 1.3;
  w.theta2 = 0.7;
  w.theta3 = 2.1;
  CHECK(user_cost(t.net, res, w) ==
        doctest::Approx(1.3 * 50 + 0.7 * 10 + 2.1 * 20).epsilon(1e-9));

  AssignmentResult wrong;
  wrong.flows.assign(3, 0.0);
  CHECK_THROWS_AS(user_cost_breakdown(t.net, wrong, w), ValidationError);
}

TEST_CASE("the user-cost bound allows epsilon growth plus a sliver of slack") {
  CHECK(check_user_cost_bound(100.0, 100.0, 0.0));
  CHECK(check_user_cost_bound(101.5, 100.0, 0.015));
  CHECK(check_user_cost_bound(105.0, 100.0, 0.05));
  CHECK(check_user_cost_bound(105.0 * (1 + kUserCostSlack), 100.0, 0.05));
  CHECK_FALSE(check_user_cost_bound(105.001, 100.0, 0.05));
  CHECK_FALSE(check_user_cost_bound(100.0 * (1 + 3e-6), 100.0, 0.0));
  CHECK(check_user_cost_bound(1e18, 100.0, kInf));
  CHECK_THROWS_AS(check_user_cost_bound(10.0, 0.0, 0.05), ValidationError);
  CHECK_THROWS_AS(check_user_cost_bound(10.0, -1.0, 0.05), ValidationError);
}

TEST_CASE("the operator-cost hook gates feasibility only when given a cost") {
  ParallelLinesToy t = two_parallel_lines();
  const FleetVector y = t.net.initial_fleet();  // {6, 6}

  OperatorCostHook off;
  CHECK_FALSE(off.enabled());
  CHECK(off.feasible(t.net, y));

  OperatorCostHook hook;
  hook.cost = [](const TransitNetwork&, const FleetVector& fleet) {
    double total = 0;
    for (int v : fleet) total += 100.0 * v;  // flat per-vehicle cost
    return total;
  };
  hook.budget = 1200;
  CHECK(hook.enabled());
  CHECK(hook.feasible(t.net, y));  // cost 1200 meets budget 1200
  hook.budget = 1199;
  CHECK_FALSE(hook.feasible(t.net, y));
}

TEST_CASE("equilibrium flows conserve demand on generated cities") {
  for (std::uint64_t seed : {2ull, 5ull, 9ull}) {
    CAPTURE(seed);
    const GeneratedInstance inst = generate_artificial(small_config(seed));
    AssignmentConfig cfg;
    const AssignmentResult res = transit_assignment(
        inst.network, inst.network.initial_fleet(), inst.od, cfg);

    REQUIRE(res.flows.size() == inst.network.arcs.size());
    for (double f : res.flows) CHECK(f >= 0.0);
    CHECK(res.waiting_total >= 0.0);
    CHECK(res.iterations >= 1);
    const bool converged = res.gap <= cfg.msa_tolerance;
    CHECK((converged || res.iterations == cfg.msa_max_iterations));

    check_conservation(inst.network, inst.od, res, 1e-6);

    // The reported gap is recomputable from the returned flows alone.
    CHECK(relative_gap(inst.network, inst.network.initial_fleet(), inst.od,
                       cfg, res) == res.gap);
  }
}

TEST_CASE("no demand means no flows and no iterations") {
  SingleLineToy t = single_line();
  ODMatrix od;  // empty
  const AssignmentResult empty =
      transit_assignment(t.net, t.net.initial_fleet(), od, AssignmentConfig{});
  for (double f : empty.flows) CHECK(f == 0.0);
  CHECK(empty.waiting_total == 0.0);
  CHECK(empty.iterations == 0);
  CHECK(empty.gap == 0.0);

  // Zero-demand entries are dropped the same way.
  od.entries.push_back({t.from, t.to, 0});
  const AssignmentResult zeroed =
      transit_assignment(t.net, t.net.initial_fleet(), od, AssignmentConfig{});
  for (double f : zeroed.flows) CHECK(f == 0.0);
  CHECK(zeroed.iterations == 0);
}

TEST_CASE("unreachable demand names the failing pair") {
  SingleLineToy t = single_line();
  ODMatrix od;
  od.entries.push_back({t.from, t.to, 5});
  // Parking the only line severs the pair.
  try {
    transit_assignment(t.net, FleetVector{0}, od, AssignmentConfig{});
    FAIL("expected UnreachableDemandError");
  } catch (const UnreachableDemandError& e) {
    CHECK(e.origin == t.from);
    CHECK(e.destination == t.to);
  }
}

TEST_CASE("OD validation rejects malformed entries") {
  SingleLineToy t = single_line();
  const FleetVector y = t.net.initial_fleet();
  ODMatrix od;
  od.entries.push_back({t.from, t.to, -1});
  CHECK_THROWS_AS(transit_assignment(t.net, y, od, AssignmentConfig{}),
                  ValidationError);
  od.entries = {{t.from, 999, 5}};
  CHECK_THROWS_AS(transit_assignment(t.net, y, od, AssignmentConfig{}),
                  ValidationError);
  // Boarding nodes are internal and not valid trip endpoints.
  NodeId boarding = -1;
  for (const Node& n : t.net.nodes)
    if (n.kind == NodeKind::Boarding) boarding = n.id;
  REQUIRE(boarding >= 0);
  od.entries = {{t.from, boarding, 5}};
  CHECK_THROWS_AS(transit_assignment(t.net, y, od, AssignmentConfig{}),
                  ValidationError);
}
