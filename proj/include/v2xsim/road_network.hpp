#pragma once

#include <string>
#include <utility>
#include <vector>

#include "v2xsim/common.hpp"

namespace v2x {

struct Node {
  std::string id;
  double x = 0.0;
  double y = 0.0;
};

// Static road scene: a node/junction set in a local metric frame with a
// uniform-grid spatial index. Immutable after construction, safe for
// concurrent reads.
class RoadNetwork {
 public:
  // Throws ValidationError on empty node set, duplicate ids, or non-finite
  // coordinates. cell_size is clamped to at least 10 m.
  RoadNetwork(Point origin, std::vector<Node> nodes, double cell_size = 10.0);

  static RoadNetwork load(const std::string& path, double cell_size = 10.0);
  void save(const std::string& path) const;

  const Point& origin() const { return origin_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  // Nearest node by Euclidean distance; ties broken by lexicographically
  // smallest node id. Exact: the grid ring expansion stops only once the
  // next ring cannot contain anything closer than the best candidate.
  std::pair<const Node*, double> nearest(Point p) const;

 private:
  struct Cell {
    std::vector<std::uint32_t> node_idx;
  };

  std::size_t cell_of(int cx, int cy) const;
  void consider(const Cell& cell, Point p, const Node*& best, double& best_d) const;

  Point origin_;
  std::vector<Node> nodes_;
  double cell_size_;
  double min_x_ = 0.0, min_y_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<Cell> cells_;
};

}  // namespace v2x
