#pragma once

#include <vector>

#include "samp/common.hpp"
#include "samp/network.hpp"

namespace samp {

struct AccessParams {
  double beta = 1.0;  // gravity decay exponent, > 0
  int k_count = 1;    // how many lowest community metrics the objective sums
};

struct AccessProfile {
  std::vector<NodeId> community_ids;   // metric[i] belongs to community_ids[i]
  std::vector<double> metric;          // A_i
  std::vector<NodeId> facility_ids;    // crowding[j] belongs to facility_ids[j]
  std::vector<double> crowding;        // F_j
  std::vector<NodeId> unreached_facilities;  // F_j = 0: no community reaches j
  std::vector<NodeId> included;        // the k_count communities the objective sums
  double objective = 0;
};

// F_j = sum_k P_k d_kj^-beta, skipping infinite distances. d is communities x
// facilities, already floored by access_travel_times.
std::vector<double> facility_crowding(const std::vector<double>& populations,
                                      const Matrix<double>& d, double beta);

// A_i = sum_j S_j d_ij^-beta / F_j, skipping facilities with F_j = 0 and
// unreachable pairs.
std::vector<double> gravity_metric(const std::vector<double>& qualities,
                                   const Matrix<double>& d,
                                   const std::vector<double>& crowding,
                                   double beta);

// Sum of the k smallest values; ties at the cutoff go to the lowest index so
// the reported selection is stable. picked (optional) receives the chosen
// indices in increasing order.
double k_min_sum(const std::vector<double>& values, int k,
                 std::vector<int>* picked = nullptr);

// Full objective evaluation for a fleet vector: recomputes d(y), F, A and the
// k_count-minimum sum.
AccessProfile access_objective(const TransitNetwork& net, const FleetVector& y,
                               const AccessParams& params);

}  // namespace samp
