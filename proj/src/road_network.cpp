#include "v2xsim/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <json.hpp>

namespace v2x {

RoadNetwork::RoadNetwork(Point origin, std::vector<Node> nodes, double cell_size)
    : origin_(origin), nodes_(std::move(nodes)), cell_size_(std::max(cell_size, 10.0)) {
  if (nodes_.empty()) {
    throw ValidationError("road network must contain at least one node");
  }
  std::unordered_set<std::string> seen;
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();
  min_x_ = std::numeric_limits<double>::infinity();
  min_y_ = std::numeric_limits<double>::infinity();
  for (const Node& n : nodes_) {
    if (!std::isfinite(n.x) || !std::isfinite(n.y)) {
      throw ValidationError("node '" + n.id + "' has non-finite coordinates");
    }
    if (!seen.insert(n.id).second) {
      throw ValidationError("duplicate node id '" + n.id + "'");
    }
    min_x_ = std::min(min_x_, n.x);
    min_y_ = std::min(min_y_, n.y);
    max_x = std::max(max_x, n.x);
    max_y = std::max(max_y, n.y);
  }
  nx_ = std::max(1, static_cast<int>((max_x - min_x_) / cell_size_) + 1);
  ny_ = std::max(1, static_cast<int>((max_y - min_y_) / cell_size_) + 1);
  cells_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    int cx = static_cast<int>((nodes_[i].x - min_x_) / cell_size_);
    int cy = static_cast<int>((nodes_[i].y - min_y_) / cell_size_);
    cells_[cell_of(cx, cy)].node_idx.push_back(i);
  }
}

std::size_t RoadNetwork::cell_of(int cx, int cy) const {
  return static_cast<std::size_t>(cy) * nx_ + cx;
}

void RoadNetwork::consider(const Cell& cell, Point p, const Node*& best,
                           double& best_d) const {
  for (std::uint32_t idx : cell.node_idx) {
    const Node& n = nodes_[idx];
    double d = std::hypot(p.x - n.x, p.y - n.y);
    if (d < best_d || (d == best_d && (best == nullptr || n.id < best->id))) {
      best = &n;
      best_d = d;
    }
  }
}

std::pair<const Node*, double> RoadNetwork::nearest(Point p) const {
  int pcx = static_cast<int>(std::floor((p.x - min_x_) / cell_size_));
  int pcy = static_cast<int>(std::floor((p.y - min_y_) / cell_size_));
  pcx = std::clamp(pcx, 0, nx_ - 1);
  pcy = std::clamp(pcy, 0, ny_ - 1);

  const Node* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();

  int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Anything in ring r is at least (r-1)*cell_size away from p's cell, so
    // once that bound exceeds the best distance no further ring can win.
    if (best != nullptr) {
      double ring_min = (ring - 1) * cell_size_;
      if (ring_min > best_d) break;
    }
    int x0 = pcx - ring, x1 = pcx + ring;
    int y0 = pcy - ring, y1 = pcy + ring;
    for (int cy = y0; cy <= y1; ++cy) {
      if (cy < 0 || cy >= ny_) continue;
      for (int cx = x0; cx <= x1; ++cx) {
        if (cx < 0 || cx >= nx_) continue;
        bool on_ring = (cx == x0 || cx == x1 || cy == y0 || cy == y1);
        if (!on_ring) continue;
        consider(cells_[cell_of(cx, cy)], p, best, best_d);
      }
    }
  }
  return {best, best_d};
}

RoadNetwork RoadNetwork::load(const std::string& path, double cell_size) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed network file " + path + ": " + e.what());
  }
  if (!j.contains("origin") || !j.contains("nodes")) {
    throw ParseError("network file " + path + " missing 'origin' or 'nodes'");
  }
  Point origin{j["origin"].at(0).get<double>(), j["origin"].at(1).get<double>()};
  std::vector<Node> nodes;
  for (const auto& nj : j["nodes"]) {
    if (!nj.contains("id") || !nj.contains("x") || !nj.contains("y")) {
      throw ParseError("network node record missing id/x/y: " + nj.dump());
    }
    nodes.push_back(Node{nj["id"].get<std::string>(), nj["x"].get<double>(),
                         nj["y"].get<double>()});
  }
  return RoadNetwork(origin, std::move(nodes), cell_size);
}

void RoadNetwork::save(const std::string& path) const {
  nlohmann::json j;
  j["origin"] = {origin_.x, origin_.y};
  j["nodes"] = nlohmann::json::array();
  for (const Node& n : nodes_) {
    j["nodes"].push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write network file: " + path);
  out << j.dump(1) << "\n";
}

}  // namespace v2x
