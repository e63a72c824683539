#pragma once

#include <map>
#include <string>
#include <vector>

#include "v2xsim/road_network.hpp"
#include "v2xsim/trajectory.hpp"

namespace v2x {

struct RouteEntry {
  std::string node_id;
  double t_first = 0.0;  // seconds, first frame associated with this node
  double dist = 0.0;     // association distance at that frame, meters
};

struct RouteAssociation {
  std::string vehicle_id;
  std::vector<RouteEntry> route;  // consecutive duplicates collapsed
  int skipped_frames = 0;         // frames failing the d_max threshold
  int interpolated_segments = 0;  // skip runs bridged between two associations
  bool empty() const { return route.empty(); }
};

// Per-frame nearest-node association under the d_max threshold. Frames whose
// nearest node is farther than d_max are skipped; a run of skipped frames
// bounded by associations on both sides counts as one interpolated segment.
RouteAssociation associate_route(const VehicleTrack& track, const RoadNetwork& net,
                                 double d_max);

struct GridSearchRow {
  double d_max = 0.0;
  double coverage = 0.0;   // fraction of vehicles with a non-empty route
  double mean_dist = 0.0;  // mean association distance over all associations
};

struct GridSearchResult {
  double selected = 0.0;
  std::vector<GridSearchRow> table;
};

// Sweeps candidate thresholds and picks the best by (highest coverage, then
// lower mean association distance, then smaller d_max). Throws DataError when
// every candidate yields zero coverage.
GridSearchResult grid_search_dmax(const std::vector<VehicleTrack>& tracks,
                                  const RoadNetwork& net, double lo = 0.0,
                                  double hi = 5.0, double step = 0.5);

struct ConversionReport {
  int location_id = 0;
  std::size_t vehicles_orig = 0;
  std::size_t vehicles_converted = 0;
  double delta_t_s = 0.0;  // mean of (replayed - original) running times
  struct Row {
    std::string vehicle_id;
    double t_replayed = 0.0;
    double t_original = 0.0;
  };
  std::vector<Row> detail;
};

// Mean running-time difference between replayed and original tracks. The
// vehicle-id sets must match; a mismatch lists the symmetric difference.
ConversionReport conversion_report(const std::vector<VehicleTrack>& orig_tracks,
                                   const std::map<std::string, double>& replayed_times,
                                   double fps, int location_id = 0);

}  // namespace v2x
