#include "samp/access.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace samp {

std::vector<double> facility_crowding(const std::vector<double>& populations,
                                      const Matrix<double>& d, double beta) {
  if (d.rows() != populations.size())
    throw ValidationError("crowding: population count does not match distance rows");
  std::vector<double> crowding(d.cols(), 0.0);
  for (std::size_t j = 0; j < d.cols(); ++j) {
    double sum = 0;
    for (std::size_t k = 0; k < d.rows(); ++k) {
      double dist = d(k, j);
      if (std::isfinite(dist)) sum += populations[k] * std::pow(dist, -beta);
    }
    crowding[j] = sum;
  }
  return crowding;
}

std::vector<double> gravity_metric(const std::vector<double>& qualities,
                                   const Matrix<double>& d,
                                   const std::vector<double>& crowding,
                                   double beta) {
  if (d.cols() != qualities.size() || d.cols() != crowding.size())
    throw ValidationError("gravity: facility count mismatch");
  std::vector<double> metric(d.rows(), 0.0);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    double sum = 0;
    for (std::size_t j = 0; j < d.cols(); ++j) {
      double dist = d(i, j);
      if (!std::isfinite(dist) || crowding[j] == 0) continue;
      sum += qualities[j] * std::pow(dist, -beta) / crowding[j];
    }
    metric[i] = sum;
  }
  return metric;
}

double k_min_sum(const std::vector<double>& values, int k,
                 std::vector<int>* picked) {
  const int n = static_cast<int>(values.size());
  if (k < 1 || k > n)
    throw ValidationError("objective k_count must lie in [1, communities]");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Sort by value, index-ascending within ties, then take the first k: equal
  // metrics at the cutoff resolve to the lowest community index.
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  double sum = 0;
  for (int idx : order) sum += values[idx];
  if (picked) *picked = std::move(order);
  return sum;
}

AccessProfile access_objective(const TransitNetwork& net, const FleetVector& y,
                               const AccessParams& params) {
  if (params.beta <= 0) throw ValidationError("beta must be positive");
  AccessProfile profile;
  profile.community_ids = net.community_nodes();
  profile.facility_ids = net.facility_nodes();
  if (profile.community_ids.empty() || profile.facility_ids.empty())
    throw ValidationError("access objective needs at least one community and one facility");

  Matrix<double> d =
      access_travel_times(net, y, profile.community_ids, profile.facility_ids);

  std::vector<double> populations, qualities;
  populations.reserve(profile.community_ids.size());
  for (NodeId c : profile.community_ids) populations.push_back(net.nodes[c].population);
  qualities.reserve(profile.facility_ids.size());
  for (NodeId f : profile.facility_ids) qualities.push_back(net.nodes[f].quality);

  profile.crowding = facility_crowding(populations, d, params.beta);
  for (std::size_t j = 0; j < profile.crowding.size(); ++j)
    if (profile.crowding[j] == 0)
      profile.unreached_facilities.push_back(profile.facility_ids[j]);

  profile.metric = gravity_metric(qualities, d, profile.crowding, params.beta);

  std::vector<int> picked;
  profile.objective = k_min_sum(profile.metric, params.k_count, &picked);
  profile.included.reserve(picked.size());
  for (int idx : picked) profile.included.push_back(profile.community_ids[idx]);
  return profile;
}

}  // namespace samp
