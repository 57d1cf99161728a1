#include "ridesim/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <string>

#include "ridesim/csv.hpp"
#include "ridesim/errors.hpp"

namespace ridesim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// min-heap entries for Dijkstra
using HeapItem = std::pair<double, std::uint32_t>;

}  // namespace

std::uint32_t RoadGraph::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw LookupError("unknown node id " + std::to_string(id));
  return it->second;
}

void RoadGraph::bounding_box(double& x0, double& y0, double& x1, double& y1) const {
  if (nodes_.empty()) throw ValidationError("bounding box of an empty graph");
  x0 = x1 = nodes_[0].x_m;
  y0 = y1 = nodes_[0].y_m;
  for (const auto& n : nodes_) {
    x0 = std::min(x0, n.x_m);
    x1 = std::max(x1, n.x_m);
    y0 = std::min(y0, n.y_m);
    y1 = std::max(y1, n.y_m);
  }
}

void RoadGraph::add_node(NodeId id, double x_m, double y_m, const std::string& where) {
  if (!std::isfinite(x_m) || !std::isfinite(y_m))
    throw SchemaError(where + ": node " + std::to_string(id) + " has non-finite coordinates");
  auto [it, inserted] = index_.emplace(id, static_cast<std::uint32_t>(nodes_.size()));
  if (!inserted) throw SchemaError(where + ": duplicate node id " + std::to_string(id));
  nodes_.push_back(GraphNode{id, x_m, y_m});
}

void RoadGraph::add_edge(EdgeId id, NodeId from, NodeId to, double length_m, const std::string& where) {
  if (!(length_m > 0.0) || !std::isfinite(length_m))
    throw SchemaError(where + ": edge " + std::to_string(id) + " has nonpositive length");
  auto fit = index_.find(from);
  auto tit = index_.find(to);
  if (fit == index_.end())
    throw SchemaError(where + ": edge " + std::to_string(id) + " references unknown node " + std::to_string(from));
  if (tit == index_.end())
    throw SchemaError(where + ": edge " + std::to_string(id) + " references unknown node " + std::to_string(to));
  auto [eit, inserted] = edge_index_.emplace(id, static_cast<std::uint32_t>(edges_.size()));
  if (!inserted) throw SchemaError(where + ": duplicate edge id " + std::to_string(id));
  // every edge starts in the outer speed class; classify_speeds refines this
  edges_.push_back(GraphEdge{id, fit->second, tit->second, length_m, kmh_to_mps(36.0)});
}

void RoadGraph::sort_adjacency() {
  // Route reconstruction scans out-edges in order and takes the first
  // optimal continuation, so order adjacency by (external target id, edge
  // time, edge id). That makes the reconstructed node sequence the
  // lexicographically smallest optimal path.
  for (auto& lst : out_) {
    std::sort(lst.begin(), lst.end(), [this](std::uint32_t a, std::uint32_t b) {
      const auto& ea = edges_[a];
      const auto& eb = edges_[b];
      if (nodes_[ea.to].id != nodes_[eb.to].id) return nodes_[ea.to].id < nodes_[eb.to].id;
      if (ea.time_s() != eb.time_s()) return ea.time_s() < eb.time_s();
      return ea.id < eb.id;
    });
  }
}

void RoadGraph::freeze() {
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (std::uint32_t e = 0; e < edges_.size(); ++e) {
    out_[edges_[e].from].push_back(e);
    in_[edges_[e].to].push_back(e);
  }
  sort_adjacency();

  if (nodes_.empty()) throw ValidationError("graph has no nodes");

  // strong connectivity: everything reachable from node 0, forwards and backwards
  auto sweep = [this](const std::vector<std::vector<std::uint32_t>>& adj, bool forward) {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<std::uint32_t> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      std::uint32_t u = stack.back();
      stack.pop_back();
      for (std::uint32_t e : adj[u]) {
        std::uint32_t v = forward ? edges_[e].to : edges_[e].from;
        if (!seen[v]) {
          seen[v] = 1;
          ++reached;
          stack.push_back(v);
        }
      }
    }
    return reached == nodes_.size();
  };
  if (!sweep(out_, true) || !sweep(in_, false))
    throw ValidationError("graph is not strongly connected");
}

void RoadGraph::classify_speeds(double centre_x_m, double centre_y_m, double radius_m,
                                double central_speed_kmh, double outer_speed_kmh) {
  if (!(radius_m > 0.0)) throw ConfigError("central zone radius must be positive");
  if (!(central_speed_kmh > 0.0) || !(outer_speed_kmh > 0.0))
    throw ConfigError("speeds must be positive");
  const double central = kmh_to_mps(central_speed_kmh);
  const double outer = kmh_to_mps(outer_speed_kmh);
  const double r2 = radius_m * radius_m;
  for (auto& e : edges_) {
    const auto& a = nodes_[e.from];
    const auto& b = nodes_[e.to];
    const double mx = (a.x_m + b.x_m) / 2.0 - centre_x_m;
    const double my = (a.y_m + b.y_m) / 2.0 - centre_y_m;
    e.speed_mps = (mx * mx + my * my <= r2) ? central : outer;
  }
  centre_x_ = centre_x_m;
  centre_y_ = centre_y_m;
  radius_m_ = radius_m;
  cache_built_ = false;
  time_to_.clear();
  sort_adjacency();  // edge times changed
}

bool RoadGraph::in_central_zone(std::uint32_t node_index) const {
  if (radius_m_ <= 0.0) return false;
  const auto& n = nodes_[node_index];
  const double dx = n.x_m - centre_x_;
  const double dy = n.y_m - centre_y_;
  return dx * dx + dy * dy <= radius_m_ * radius_m_;
}

std::vector<double> RoadGraph::times_to(std::uint32_t dest) const {
  // Dijkstra over reversed edges: dist[v] = min travel time v -> dest.
  // Final labels satisfy t(u, v*) + dist[v*] == dist[u] exactly for the
  // relaxing edge, which is what shortest_route_ix relies on.
  std::vector<double> dist(nodes_.size(), kInf);
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;
  dist[dest] = 0.0;
  heap.emplace(0.0, dest);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d != dist[v]) continue;
    for (std::uint32_t e : in_[v]) {
      const auto& edge = edges_[e];
      const double cand = edge.time_s() + d;
      if (cand < dist[edge.from]) {
        dist[edge.from] = cand;
        heap.emplace(cand, edge.from);
      }
    }
  }
  return dist;
}

void RoadGraph::build_route_cache(std::size_t max_nodes) {
  cache_built_ = false;
  time_to_.clear();
  if (nodes_.size() > max_nodes) return;
  time_to_.resize(nodes_.size());
  for (std::uint32_t d = 0; d < nodes_.size(); ++d) time_to_[d] = times_to(d);
  cache_built_ = true;
}

double RoadGraph::route_time_ix(std::uint32_t origin, std::uint32_t dest) const {
  if (origin >= nodes_.size() || dest >= nodes_.size())
    throw LookupError("node index out of range");
  if (cache_built_) return time_to_[dest][origin];
  return times_to(dest)[origin];
}

Route RoadGraph::shortest_route_ix(std::uint32_t origin, std::uint32_t dest) const {
  if (origin >= nodes_.size() || dest >= nodes_.size())
    throw LookupError("node index out of range");
  Route route;
  route.nodes.push_back(nodes_[origin].id);
  if (origin == dest) return route;

  std::vector<double> local;
  const std::vector<double>* labels;
  if (cache_built_) {
    labels = &time_to_[dest];
  } else {
    local = times_to(dest);
    labels = &local;
  }
  const std::vector<double>& t = *labels;
  if (t[origin] == kInf) throw InternalError("route requested between disconnected nodes");

  std::uint32_t u = origin;
  while (u != dest) {
    const GraphEdge* step = nullptr;
    for (std::uint32_t e : out_[u]) {
      const auto& edge = edges_[e];
      if (edge.time_s() + t[edge.to] == t[u]) {
        step = &edge;
        break;
      }
    }
    // cannot happen: the label of u was produced by relaxing one of these
    // edges with exactly this arithmetic
    if (step == nullptr) throw InternalError("route reconstruction found no optimal step");
    route.nodes.push_back(nodes_[step->to].id);
    route.distance_m += step->length_m;
    route.time_s += step->time_s();
    u = step->to;
  }
  return route;
}

double RoadGraph::route_time_s(NodeId origin, NodeId dest) const {
  return route_time_ix(index_of(origin), index_of(dest));
}

Route RoadGraph::shortest_route(NodeId origin, NodeId dest) const {
  return shortest_route_ix(index_of(origin), index_of(dest));
}

RoadGraph generate_grid(std::size_t rows, std::size_t cols, double edge_len_m) {
  if (rows < 2 || cols < 2) throw ConfigError("grid needs at least 2 rows and 2 columns");
  if (!(edge_len_m > 0.0)) throw ConfigError("grid edge length must be positive");

  RoadGraph g;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      g.add_node(static_cast<NodeId>(r * cols + c), static_cast<double>(c) * edge_len_m,
                 static_cast<double>(r) * edge_len_m, "grid");

  EdgeId next_edge = 0;
  auto link = [&](NodeId a, NodeId b) {
    g.add_edge(next_edge++, a, b, edge_len_m, "grid");
    g.add_edge(next_edge++, b, a, edge_len_m, "grid");
  };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const NodeId n = static_cast<NodeId>(r * cols + c);
      if (c + 1 < cols) link(n, n + 1);
      if (r + 1 < rows) link(n, n + static_cast<NodeId>(cols));
    }
  }
  g.freeze();
  return g;
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void check_header(const std::vector<std::string>& lines, const std::string& expected,
                  const std::filesystem::path& path) {
  if (lines.empty()) throw SchemaError(path.string() + ": empty file");
  std::string_view first = lines[0];
  if (first.substr(0, 3) == "\xEF\xBB\xBF") first.remove_prefix(3);
  if (trim(first) != expected)
    throw SchemaError(path.string() + ": expected header '" + expected + "'");
}

}  // namespace

RoadGraph load_graph(const std::filesystem::path& nodes_file,
                     const std::filesystem::path& edges_file) {
  RoadGraph g;

  const auto node_lines = read_lines(nodes_file);
  check_header(node_lines, "node_id,x_m,y_m", nodes_file);
  for (std::size_t i = 1; i < node_lines.size(); ++i) {
    if (trim(node_lines[i]).empty()) continue;
    const std::string where = nodes_file.string() + ":" + std::to_string(i + 1);
    auto f = split_fields(node_lines[i]);
    if (f.size() != 3) throw SchemaError(where + ": expected 3 fields, got " + std::to_string(f.size()));
    g.add_node(parse_i64_field(f[0], where), parse_double_field(f[1], where),
               parse_double_field(f[2], where), where);
  }

  const auto edge_lines = read_lines(edges_file);
  check_header(edge_lines, "edge_id,from_node,to_node,length_m", edges_file);
  for (std::size_t i = 1; i < edge_lines.size(); ++i) {
    if (trim(edge_lines[i]).empty()) continue;
    const std::string where = edges_file.string() + ":" + std::to_string(i + 1);
    auto f = split_fields(edge_lines[i]);
    if (f.size() != 4) throw SchemaError(where + ": expected 4 fields, got " + std::to_string(f.size()));
    g.add_edge(parse_i64_field(f[0], where), parse_i64_field(f[1], where),
               parse_i64_field(f[2], where), parse_double_field(f[3], where), where);
  }

  g.freeze();
  return g;
}

}  // namespace ridesim
