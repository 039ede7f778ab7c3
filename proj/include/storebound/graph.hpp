#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace storebound {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

// Simple undirected graph on vertices 0..n-1 with sorted adjacency lists.
class Graph {
 public:
  explicit Graph(std::size_t vertex_count = 0);

  // Self-loops are rejected; repeated edges (in either orientation) collapse.
  static Graph from_edges(std::size_t vertex_count, std::span<const Edge> edges);

  static Graph complete(std::size_t n);
  static Graph path(std::size_t n);
  static Graph cycle(std::size_t n);
  // Vertex 0 is the centre.
  static Graph star(std::size_t n);

  std::size_t vertex_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::span<const Vertex> neighbors(Vertex v) const { return adjacency_[v]; }
  std::size_t degree(Vertex v) const { return adjacency_[v].size(); }
  bool has_edge(Vertex u, Vertex v) const;
  // Each edge once as (u, v) with u < v, in lexicographic order.
  std::vector<Edge> edges() const;

 private:
  std::vector<std::vector<Vertex>> adjacency_;
  std::size_t edge_count_ = 0;
};

// Directed graph given by out-neighbour lists. In-neighbour lists are derived
// on construction.
class DirectedGraph {
 public:
  explicit DirectedGraph(std::vector<std::vector<Vertex>> out_neighbors);

  std::size_t vertex_count() const { return out_.size(); }
  std::span<const Vertex> neighbors(Vertex v) const { return out_[v]; }
  std::span<const Vertex> in_neighbors(Vertex v) const { return in_[v]; }
  std::size_t degree(Vertex v) const { return out_[v].size(); }
  bool has_edge(Vertex u, Vertex v) const;

 private:
  std::vector<std::vector<Vertex>> out_;
  std::vector<std::vector<Vertex>> in_;
};

// G(n, p): each of the n(n-1)/2 possible edges independently with probability p.
Graph gen_gnp(std::size_t n, double p, std::uint64_t seed);

struct DegreeStats {
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  std::vector<std::size_t> degrees;
};

DegreeStats degree_stats(const Graph& g);
DegreeStats degree_stats(const DirectedGraph& g);

// Hop count of a shortest u-v path, or kUnreachable.
std::size_t bfs_distance(const Graph& g, Vertex u, Vertex v);

// Greedy maximal set with pairwise distance >= 3, scanning vertices in
// ascending order. Disconnected pairs count as far apart. The returned set is
// re-verified and its size checked against n / (2 Delta^2).
std::vector<Vertex> three_far_set(const Graph& g);

// True if no two members are within distance 2 of each other.
bool is_three_far(const Graph& g, std::span<const Vertex> set);

// Edge-list text: optional "# vertices N" line, then one "u v" pair per line,
// 0-indexed. Other '#' lines are comments.
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);
Graph load_edge_list(const std::string& path);
void save_edge_list(const std::string& path, const Graph& g);

}  // namespace storebound
