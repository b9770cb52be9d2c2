#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "samp/access.hpp"
#include "samp/assignment.hpp"
#include "samp/common.hpp"
#include "samp/csv.hpp"
#include "samp/network.hpp"
#include "samp/solver.hpp"

namespace samp {

// A network directory holds nodes.csv, arcs.csv, lines.csv and network.json
// (horizon and the distance convention). Writing then reading a finalized
// network yields an equal one, byte for byte on disk.
void write_network(const std::string& dir, const TransitNetwork& net);
TransitNetwork read_network(const std::string& dir);

// origin,destination,demand rows; zero-demand rows are dropped on read.
ODMatrix read_od(const std::string& path);
void write_od(const std::string& path, const ODMatrix& od);

// line_id plus a vehicle count column named fleet, y, or y_final, so a
// solution.csv can be fed straight back in. Every line must appear once.
FleetVector read_fleet(const std::string& path, const TransitNetwork& net);
void write_fleet(const std::string& path, const TransitNetwork& net,
                 const FleetVector& y);

// Report numbers default to 6 significant digits; full keeps every bit.
struct ReportFormat {
  int sig_digits = 6;
  bool full = false;
  std::string operator()(double v) const {
    return full ? format_full(v) : format_sig(v, sig_digits);
  }
};

// line_id,y_initial,y_final,abs_diff,rel_diff. rel_diff is inf when the
// initial count is zero and the final is not.
void write_solution_csv(const std::string& path, const TransitNetwork& net,
                        const FleetVector& initial, const FleetVector& final_y,
                        const ReportFormat& fmt = {});

void write_history_csv(const std::string& path,
                       const std::vector<HistoryRow>& history,
                       const ReportFormat& fmt = {});

// community_id,metric_initial,metric_current,abs_diff,rel_diff comparing two
// access profiles of the same network.
void write_access_report(const std::string& path, const AccessProfile& initial,
                         const AccessProfile& current,
                         const ReportFormat& fmt = {});

// arc_id,tail,head,kind,line,flow for every arc with the assigned volumes.
void write_flows_csv(const std::string& path, const TransitNetwork& net,
                     const AssignmentResult& result,
                     const ReportFormat& fmt = {});

// FeatureCollection with stop/community/facility points and one LineString
// per transit line (its boarding sequence in travel order). Community
// features carry their metric when a profile is given; line features carry
// the fleet when y is given.
std::string geojson_export(const TransitNetwork& net, const FleetVector* y,
                           const AccessProfile* profile);

// FNV-1a digest of a file's bytes, as fixed-width hex for run manifests.
std::string file_digest(const std::string& path);
std::string hex64(std::uint64_t v);

}  // namespace samp
