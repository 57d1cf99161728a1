#pragma once

#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

namespace ridesim {

using NodeId = std::int64_t;
using EdgeId = std::int64_t;

struct GraphNode {
  NodeId id;
  double x_m;
  double y_m;
};

struct GraphEdge {
  EdgeId id;
  std::uint32_t from;  // internal node index
  std::uint32_t to;    // internal node index
  double length_m;
  double speed_mps;

  double time_s() const { return length_m / speed_mps; }
};

// Time-shortest path. Node sequence uses external ids; distance and time are
// sums over the traversed edges.
struct Route {
  std::vector<NodeId> nodes;
  double distance_m = 0.0;
  double time_s = 0.0;
};

inline double kmh_to_mps(double kmh) { return kmh * 1000.0 / 3600.0; }

// Directed road network with two speed classes and cached all-pairs travel
// times. Construction goes through generate_grid or load_graph, both of which
// reject graphs that are not strongly connected.
class RoadGraph {
 public:
  static constexpr std::size_t kDefaultRouteCacheLimit = 2000;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const GraphNode& node_at(std::size_t index) const { return nodes_[index]; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  bool has_node(NodeId id) const { return index_.count(id) != 0; }
  std::uint32_t index_of(NodeId id) const;  // LookupError on unknown ids
  NodeId id_of(std::size_t index) const { return nodes_[index].id; }

  void bounding_box(double& x0, double& y0, double& x1, double& y1) const;

  // Two-speed assignment: an edge is central iff its midpoint lies within
  // radius_m of the centre, and gets central_speed_kmh; everything else gets
  // outer_speed_kmh. Invalidates any route cache.
  void classify_speeds(double centre_x_m, double centre_y_m, double radius_m,
                       double central_speed_kmh, double outer_speed_kmh);

  bool has_zone() const { return radius_m_ > 0.0; }
  // Whether the node itself sits inside the central zone (used for shift
  // context, not for edge speeds). False when no zone has been classified.
  bool in_central_zone(std::uint32_t node_index) const;

  // Precomputes all-pairs travel times when node_count() <= max_nodes. Call
  // once, single-threaded; afterwards route queries are lock-free reads.
  // Larger graphs silently fall back to per-query searches.
  void build_route_cache(std::size_t max_nodes = kDefaultRouteCacheLimit);
  bool route_cache_built() const { return cache_built_; }

  // Index-based variants for hot paths; id-based wrappers validate ids.
  double route_time_ix(std::uint32_t origin, std::uint32_t dest) const;
  Route shortest_route_ix(std::uint32_t origin, std::uint32_t dest) const;

  double route_time_s(NodeId origin, NodeId dest) const;
  Route shortest_route(NodeId origin, NodeId dest) const;

 private:
  friend RoadGraph generate_grid(std::size_t rows, std::size_t cols, double edge_len_m);
  friend RoadGraph load_graph(const std::filesystem::path& nodes_file,
                              const std::filesystem::path& edges_file);

  void add_node(NodeId id, double x_m, double y_m, const std::string& where);
  void add_edge(EdgeId id, NodeId from, NodeId to, double length_m, const std::string& where);
  void freeze();  // builds adjacency and checks strong connectivity
  void sort_adjacency();
  std::vector<double> times_to(std::uint32_t dest) const;  // backward Dijkstra

  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::unordered_map<NodeId, std::uint32_t> index_;
  std::unordered_map<EdgeId, std::uint32_t> edge_index_;
  std::vector<std::vector<std::uint32_t>> out_;  // edge indices, see sort_adjacency
  std::vector<std::vector<std::uint32_t>> in_;
  std::vector<std::vector<double>> time_to_;  // [dest][node], built by build_route_cache
  bool cache_built_ = false;
  double centre_x_ = 0.0;
  double centre_y_ = 0.0;
  double radius_m_ = -1.0;
};

// Rectangular lattice: rows x cols nodes, every adjacent pair linked by one
// directed edge in each direction. Node ids are row-major; coordinates are
// metres with edge_len_m spacing.
RoadGraph generate_grid(std::size_t rows, std::size_t cols, double edge_len_m);

// CSV loader. nodes_file header: node_id,x_m,y_m
//             edges_file header: edge_id,from_node,to_node,length_m
RoadGraph load_graph(const std::filesystem::path& nodes_file,
                     const std::filesystem::path& edges_file);

}  // namespace ridesim
