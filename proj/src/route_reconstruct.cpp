#include "v2xsim/route_reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace v2x {

RouteAssociation associate_route(const VehicleTrack& track, const RoadNetwork& net,
                                 double d_max) {
  RouteAssociation out;
  out.vehicle_id = track.id;
  bool in_skip_run = false;
  bool any_association = false;
  for (const FrameSample& s : track.frames) {
    auto [node, dist] = net.nearest(Point{s.x, s.y});
    if (dist <= d_max) {
      if (in_skip_run && any_association) ++out.interpolated_segments;
      in_skip_run = false;
      any_association = true;
      if (out.route.empty() || out.route.back().node_id != node->id) {
        out.route.push_back(RouteEntry{node->id, s.t, dist});
      }
    } else {
      ++out.skipped_frames;
      in_skip_run = true;
    }
  }
  return out;
}

GridSearchResult grid_search_dmax(const std::vector<VehicleTrack>& tracks,
                                  const RoadNetwork& net, double lo, double hi,
                                  double step) {
  if (tracks.empty()) throw DataError("grid search requires at least one track");
  GridSearchResult res;
  int steps = static_cast<int>(std::round((hi - lo) / step));
  for (int k = 0; k <= steps; ++k) {
    double d_max = lo + k * step;
    std::size_t covered = 0;
    double dist_sum = 0.0;
    std::uint64_t dist_n = 0;
    for (const VehicleTrack& t : tracks) {
      RouteAssociation a = associate_route(t, net, d_max);
      if (!a.empty()) ++covered;
      for (const RouteEntry& e : a.route) {
        dist_sum += e.dist;
        ++dist_n;
      }
    }
    GridSearchRow row;
    row.d_max = d_max;
    row.coverage = static_cast<double>(covered) / tracks.size();
    row.mean_dist = dist_n > 0 ? dist_sum / dist_n : 0.0;
    res.table.push_back(row);
  }

  const GridSearchRow* best = nullptr;
  for (const GridSearchRow& row : res.table) {
    if (row.coverage <= 0.0) continue;
    if (best == nullptr || row.coverage > best->coverage ||
        (row.coverage == best->coverage && row.mean_dist < best->mean_dist)) {
      best = &row;
    }
  }
  if (best == nullptr) {
    throw DataError("grid search: no candidate threshold yields any coverage");
  }
  res.selected = best->d_max;
  return res;
}

ConversionReport conversion_report(const std::vector<VehicleTrack>& orig_tracks,
                                   const std::map<std::string, double>& replayed_times,
                                   double fps, int location_id) {
  std::set<std::string> orig_ids;
  for (const VehicleTrack& t : orig_tracks) orig_ids.insert(t.id);
  std::set<std::string> replay_ids;
  for (const auto& [id, _] : replayed_times) replay_ids.insert(id);
  if (orig_ids != replay_ids) {
    std::vector<std::string> diff;
    std::set_symmetric_difference(orig_ids.begin(), orig_ids.end(),
                                  replay_ids.begin(), replay_ids.end(),
                                  std::back_inserter(diff));
    std::ostringstream msg;
    msg << "vehicle-id sets differ between original and replayed:";
    for (const auto& id : diff) msg << " " << id;
    throw DataError(msg.str());
  }

  ConversionReport rep;
  rep.location_id = location_id;
  rep.vehicles_orig = orig_tracks.size();
  rep.vehicles_converted = replayed_times.size();
  double sum = 0.0;
  for (const VehicleTrack& t : orig_tracks) {
    double t_orig = t.running_time(fps);
    double t_replay = replayed_times.at(t.id);
    sum += t_replay - t_orig;
    rep.detail.push_back({t.id, t_replay, t_orig});
  }
  rep.delta_t_s = orig_tracks.empty() ? 0.0 : sum / orig_tracks.size();
  return rep;
}

}  // namespace v2x
