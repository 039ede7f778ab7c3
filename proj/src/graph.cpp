#include "storebound/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "storebound/csv.hpp"
#include "storebound/random.hpp"

namespace storebound {

namespace {

void check_vertex(std::size_t n, Vertex v) {
  if (v >= n) {
    throw std::out_of_range("vertex " + std::to_string(v) + " out of range for " +
                            std::to_string(n) + " vertices");
  }
}

}  // namespace

Graph::Graph(std::size_t vertex_count) : adjacency_(vertex_count) {}

Graph Graph::from_edges(std::size_t vertex_count, std::span<const Edge> edges) {
  Graph g(vertex_count);
  for (auto [u, v] : edges) {
    check_vertex(vertex_count, u);
    check_vertex(vertex_count, v);
    if (u == v) {
      throw std::invalid_argument("self-loop at vertex " + std::to_string(u));
    }
    g.adjacency_[u].push_back(v);
    g.adjacency_[v].push_back(u);
  }
  std::size_t twice_edges = 0;
  for (auto& list : g.adjacency_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    twice_edges += list.size();
  }
  g.edge_count_ = twice_edges / 2;
  return g;
}

Graph Graph::complete(std::size_t n) {
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  }
  return from_edges(n, edges);
}

Graph Graph::path(std::size_t n) {
  std::vector<Edge> edges;
  for (Vertex u = 0; u + 1 < n; ++u) edges.emplace_back(u, u + 1);
  return from_edges(n, edges);
}

Graph Graph::cycle(std::size_t n) {
  if (n < 3) throw std::invalid_argument("a cycle needs at least 3 vertices");
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u) {
    edges.emplace_back(u, static_cast<Vertex>((u + 1) % n));
  }
  return from_edges(n, edges);
}

Graph Graph::star(std::size_t n) {
  std::vector<Edge> edges;
  for (Vertex v = 1; v < n; ++v) edges.emplace_back(0, v);
  return from_edges(n, edges);
}

bool Graph::has_edge(Vertex u, Vertex v) const {
  const auto& list = adjacency_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (Vertex u = 0; u < adjacency_.size(); ++u) {
    for (Vertex v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

DirectedGraph::DirectedGraph(std::vector<std::vector<Vertex>> out_neighbors)
    : out_(std::move(out_neighbors)), in_(out_.size()) {
  const std::size_t n = out_.size();
  for (Vertex u = 0; u < n; ++u) {
    auto sorted = out_[u];
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("parallel arc out of vertex " + std::to_string(u));
    }
    for (Vertex v : out_[u]) {
      check_vertex(n, v);
      if (v == u) {
        throw std::invalid_argument("self-loop at vertex " + std::to_string(u));
      }
      in_[v].push_back(u);
    }
  }
}

bool DirectedGraph::has_edge(Vertex u, Vertex v) const {
  const auto& list = out_[u];
  return std::find(list.begin(), list.end(), v) != list.end();
}

Graph gen_gnp(std::size_t n, double p, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("G(n, p) needs n >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      if (rng.bernoulli(p)) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

namespace {

template <class G>
DegreeStats degree_stats_impl(const G& g) {
  DegreeStats stats;
  const std::size_t n = g.vertex_count();
  stats.degrees.resize(n);
  for (Vertex v = 0; v < n; ++v) stats.degrees[v] = g.degree(v);
  if (n > 0) {
    const auto [lo, hi] = std::minmax_element(stats.degrees.begin(), stats.degrees.end());
    stats.min_degree = *lo;
    stats.max_degree = *hi;
  }
  return stats;
}

}  // namespace

DegreeStats degree_stats(const Graph& g) { return degree_stats_impl(g); }
DegreeStats degree_stats(const DirectedGraph& g) { return degree_stats_impl(g); }

std::size_t bfs_distance(const Graph& g, Vertex u, Vertex v) {
  check_vertex(g.vertex_count(), u);
  check_vertex(g.vertex_count(), v);
  if (u == v) return 0;
  std::vector<std::size_t> dist(g.vertex_count(), kUnreachable);
  std::deque<Vertex> queue{u};
  dist[u] = 0;
  while (!queue.empty()) {
    const Vertex w = queue.front();
    queue.pop_front();
    for (Vertex x : g.neighbors(w)) {
      if (dist[x] != kUnreachable) continue;
      dist[x] = dist[w] + 1;
      if (x == v) return dist[x];
      queue.push_back(x);
    }
  }
  return kUnreachable;
}

std::vector<Vertex> three_far_set(const Graph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<char> blocked(n, 0);
  std::vector<Vertex> chosen;
  for (Vertex v = 0; v < n; ++v) {
    if (blocked[v]) continue;
    chosen.push_back(v);
    blocked[v] = 1;
    for (Vertex w : g.neighbors(v)) {
      blocked[w] = 1;
      for (Vertex x : g.neighbors(w)) blocked[x] = 1;
    }
  }
  if (!is_three_far(g, chosen)) {
    throw std::logic_error("greedy 3-far set failed verification");
  }
  const std::size_t max_degree = degree_stats(g).max_degree;
  if (max_degree >= 1) {
    const double bound = static_cast<double>(n) /
                         (2.0 * static_cast<double>(max_degree * max_degree));
    if (static_cast<double>(chosen.size()) < std::ceil(bound - 1e-9)) {
      throw std::logic_error("3-far set smaller than n / (2 Delta^2)");
    }
  }
  return chosen;
}

bool is_three_far(const Graph& g, std::span<const Vertex> set) {
  std::vector<char> member(g.vertex_count(), 0);
  for (Vertex v : set) {
    check_vertex(g.vertex_count(), v);
    if (member[v]) return false;
    member[v] = 1;
  }
  // Depth-2 search from every member must not reach another member.
  for (Vertex v : set) {
    for (Vertex w : g.neighbors(v)) {
      if (member[w]) return false;
      for (Vertex x : g.neighbors(w)) {
        if (x != v && member[x]) return false;
      }
    }
  }
  return true;
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# vertices " << g.vertex_count() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

Graph read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::size_t declared = 0;
  std::size_t needed = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream header(line.substr(first + 1));
      std::string word;
      std::size_t count = 0;
      if (header >> word && word == "vertices" && header >> count) declared = count;
      continue;
    }
    std::istringstream fields(line);
    long long u = -1, v = -1;
    std::string rest;
    if (!(fields >> u >> v) || u < 0 || v < 0 || (fields >> rest)) {
      throw ParseError("edge list line " + std::to_string(line_no) +
                       ": expected two non-negative vertex indices");
    }
    edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    needed = std::max<std::size_t>(needed, static_cast<std::size_t>(std::max(u, v)) + 1);
  }
  return Graph::from_edges(std::max(declared, needed), edges);
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

void save_edge_list(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list '" + path + "'");
  write_edge_list(out, g);
}

}  // namespace storebound
