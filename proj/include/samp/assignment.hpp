#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "samp/common.hpp"
#include "samp/network.hpp"

namespace samp {

struct ODEntry {
  NodeId origin = -1;
  NodeId destination = -1;
  double demand = 0;  // trips over the horizon
  bool operator==(const ODEntry&) const = default;
};

struct ODMatrix {
  std::vector<ODEntry> entries;

  double total_demand() const {
    double t = 0;
    for (const ODEntry& e : entries) t += e.demand;
    return t;
  }
  bool operator==(const ODMatrix&) const = default;
};

struct AssignmentConfig {
  double alpha = 2.0;          // conical congestion steepness, > 1
  bool congestion = true;      // false: single uncongested strategy assignment
  double msa_tolerance = 1e-4; // relative-gap stopping threshold
  int msa_max_iterations = 100;
};

struct AssignmentResult {
  std::vector<double> flows;   // per arc, trips over the horizon
  double waiting_total = 0;    // person-minutes
  int iterations = 0;          // MSA flow updates performed
  double gap = 0;              // relative gap at the returned flows
};

// g(r) = 2 + sqrt(alpha^2 (1-r)^2 + beta^2) - alpha (1-r) - beta with
// r = volume / capacity and beta = (2 alpha - 1)/(2 alpha - 2). Equals 1 at
// zero flow and 2 at capacity, strictly increasing.
double conical_congestion_factor(double volume, double capacity, double alpha);

// User-optimal flows under the optimal-strategies model: per destination,
// riders follow the cheapest strategy (attractive line sets with combined-
// frequency waits); congestion scales line-arc costs by the conical factor of
// arc volume over line capacity, and the method of successive averages drives
// the flows toward equilibrium. Throws UnreachableDemandError when a positive
// demand has no finite-cost strategy under y.
AssignmentResult transit_assignment(const TransitNetwork& net,
                                    const FleetVector& y, const ODMatrix& od,
                                    const AssignmentConfig& cfg);

// The relative gap of `flows` for this instance: (current cost - best
// response cost) / best response cost under arc costs frozen at the given
// flows. transit_assignment's reported gap matches this recomputation.
double relative_gap(const TransitNetwork& net, const FleetVector& y,
                    const ODMatrix& od, const AssignmentConfig& cfg,
                    const AssignmentResult& result);

struct UserCostWeights {
  double theta1 = 1;  // in-vehicle person-minutes
  double theta2 = 1;  // walking person-minutes
  double theta3 = 1;  // waiting person-minutes
  double epsilon = kInf;  // allowed relative user-cost increase; kInf = ignored
};

struct UserCostBreakdown {
  double in_vehicle = 0;  // sum of base_time * flow over Line arcs
  double walking = 0;     // sum over Walk arcs
  double waiting = 0;     // omega
  double total = 0;       // theta-weighted sum
};

UserCostBreakdown user_cost_breakdown(const TransitNetwork& net,
                                      const AssignmentResult& result,
                                      const UserCostWeights& w);

inline double user_cost(const TransitNetwork& net, const AssignmentResult& result,
                        const UserCostWeights& w) {
  return user_cost_breakdown(net, result, w).total;
}

// Assignment arithmetic leaves the computed cost a hair above the bound on
// occasion; the check absorbs that with a small relative slack.
inline constexpr double kUserCostSlack = 1e-6;

bool check_user_cost_bound(double current, double baseline, double epsilon);

// Optional stand-in for an operator-cost budget. Disabled (no cost function)
// means always feasible, which is the model actually solved here.
struct OperatorCostHook {
  std::function<double(const TransitNetwork&, const FleetVector&)> cost;
  double budget = kInf;

  bool enabled() const { return static_cast<bool>(cost); }
  bool feasible(const TransitNetwork& net, const FleetVector& y) const {
    return !enabled() || cost(net, y) <= budget;
  }
};

}  // namespace samp
