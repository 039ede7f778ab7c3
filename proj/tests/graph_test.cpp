#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "storebound/graph.hpp"
#include "storebound/random.hpp"

using namespace storebound;

TEST(Graph, FromEdgesDedupesAndRejectsLoops) {
  const std::vector<Edge> edges{{0, 1}, {1, 0}, {1, 2}};
  const auto g = Graph::from_edges(3, edges);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_TRUE(g.has_edge(2, 1));
  EXPECT_FALSE(g.has_edge(0, 2));
  const std::vector<Edge> loop{{1, 1}};
  EXPECT_THROW(Graph::from_edges(3, loop), std::invalid_argument);
  const std::vector<Edge> out_of_range{{0, 3}};
  EXPECT_THROW(Graph::from_edges(3, out_of_range), std::out_of_range);
}

TEST(Gnp, Extremes) {
  EXPECT_EQ(gen_gnp(30, 0.0, 1).edge_count(), 0u);
  EXPECT_EQ(gen_gnp(30, 1.0, 1).edge_count(), 30u * 29u / 2u);
  EXPECT_THROW(gen_gnp(5, 1.5, 1), std::invalid_argument);
}

TEST(Gnp, EdgeCountWithinBinomialBand) {
  const double mean = 2475.0, sd = std::sqrt(4950 * 0.25);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto count = static_cast<double>(gen_gnp(100, 0.5, seed).edge_count());
    EXPECT_NEAR(count, mean, 2.576 * sd) << "seed " << seed;
  }
}

TEST(Gnp, SeedDeterminism) {
  EXPECT_EQ(gen_gnp(50, 0.2, 7).edges(), gen_gnp(50, 0.2, 7).edges());
  EXPECT_NE(gen_gnp(50, 0.2, 7).edges(), gen_gnp(50, 0.2, 8).edges());
}

TEST(DegreeStats, Examples) {
  const auto k5 = degree_stats(Graph::complete(5));
  EXPECT_EQ(k5.min_degree, 4u);
  EXPECT_EQ(k5.max_degree, 4u);
  const auto star = degree_stats(Graph::star(5));
  EXPECT_EQ(star.min_degree, 1u);
  EXPECT_EQ(star.max_degree, 4u);
  const auto empty = degree_stats(Graph(4));
  EXPECT_EQ(empty.min_degree, 0u);
  EXPECT_EQ(empty.max_degree, 0u);
}

TEST(Bfs, Examples) {
  const auto path = Graph::path(3);
  EXPECT_EQ(bfs_distance(path, 1, 1), 0u);
  EXPECT_EQ(bfs_distance(path, 0, 2), 2u);
  EXPECT_EQ(bfs_distance(Graph(2), 0, 1), kUnreachable);
}

TEST(ThreeFar, Examples) {
  EXPECT_EQ(three_far_set(Graph(5)).size(), 5u);
  EXPECT_EQ(three_far_set(Graph::complete(6)).size(), 1u);
  EXPECT_EQ(three_far_set(Graph::path(5)), (std::vector<Vertex>{0, 3}));
}

TEST(ThreeFar, PairwiseDistanceAndSizeProperty) {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng.below(25);
    const auto g = gen_gnp(n, 0.05 + 0.4 * rng.uniform(), rng.next());
    const auto set = three_far_set(g);
    for (std::size_t i = 0; i < set.size(); ++i) {
      for (std::size_t j = i + 1; j < set.size(); ++j) {
        EXPECT_GE(bfs_distance(g, set[i], set[j]), 3u);
      }
    }
    // Maximality: every other vertex is within distance 2 of some member.
    for (Vertex v = 0; v < n; ++v) {
      bool close = false;
      for (Vertex s : set) close = close || bfs_distance(g, v, s) <= 2;
      EXPECT_TRUE(close);
    }
    const double delta = static_cast<double>(std::max<std::size_t>(1, degree_stats(g).max_degree));
    EXPECT_GE(static_cast<double>(set.size()), n / (2 * delta * delta) - 1e-9);
  }
}

TEST(EdgeList, RoundTrip) {
  const auto g = gen_gnp(20, 0.3, 4);
  std::stringstream ss;
  write_edge_list(ss, g);
  const auto back = read_edge_list(ss);
  EXPECT_EQ(back.vertex_count(), 20u);
  EXPECT_EQ(back.edges(), g.edges());

  std::istringstream bad("# vertices 3\n0 x\n");
  EXPECT_THROW(read_edge_list(bad), std::exception);
  std::istringstream inferred("0 4\n# comment\n1 2\n");
  EXPECT_EQ(read_edge_list(inferred).vertex_count(), 5u);
}

TEST(DirectedGraph, InNeighbours) {
  const DirectedGraph g({{1, 2}, {0}, {1}});
  EXPECT_EQ(g.in_neighbors(1).size(), 2u);
  EXPECT_TRUE(g.has_edge(2, 1));
  EXPECT_FALSE(g.has_edge(1, 2));
  EXPECT_THROW(DirectedGraph(std::vector<std::vector<Vertex>>{{0}}), std::invalid_argument);
}
