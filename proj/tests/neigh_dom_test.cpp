#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "storebound/neigh_dom.hpp"
#include "storebound/random.hpp"

using namespace storebound;

namespace {

// Naive feasibility check written independently of the library.
bool dominates(const Graph& g, double theta, const std::vector<Vertex>& set) {
  std::vector<bool> in(g.vertex_count(), false);
  for (auto v : set) in[v] = true;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    std::size_t hit = 0;
    for (auto w : g.neighbors(v)) hit += in[w];
    if (static_cast<double>(hit) < theta * static_cast<double>(g.degree(v)) - 1e-9) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(RequiredCount, Rounding) {
  EXPECT_EQ(required_count(0.5, 3), 2u);
  EXPECT_EQ(required_count(0.3, 30), 9u);
  EXPECT_EQ(required_count(0.5, 0), 0u);
  EXPECT_EQ(required_count(1.0, 7), 7u);
}

TEST(IsThetaDominating, Examples) {
  const auto k4 = Graph::complete(4);
  const std::vector<Vertex> all{0, 1, 2, 3};
  EXPECT_TRUE(is_theta_dominating(k4, 1.0, all).feasible);

  // 1-indexed {1, 2} in the hand example is {0, 1} here.
  const std::vector<Vertex> pair{0, 1};
  const auto cert = is_theta_dominating(k4, 0.5, pair);
  EXPECT_FALSE(cert.feasible);
  EXPECT_EQ(cert.achieved[0], 1u);
  EXPECT_EQ(cert.required[0], 2u);

  const std::vector<Vertex> c5set{1, 4};
  const auto c5 = is_theta_dominating(Graph::cycle(5), 0.5, c5set);
  EXPECT_FALSE(c5.feasible);
  EXPECT_EQ(c5.achieved[1], 0u);

  const std::vector<Vertex> dup{1, 1};
  EXPECT_THROW(is_theta_dominating(k4, 0.5, dup), std::invalid_argument);
}

TEST(IsThetaDominating, MatchesNaiveCheckProperty) {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const auto g = gen_gnp(n, rng.uniform(), rng.next());
    const double theta = 0.1 + 0.9 * rng.uniform();
    std::vector<Vertex> set;
    for (Vertex v = 0; v < n; ++v) {
      if (rng.bernoulli(0.5)) set.push_back(v);
    }
    EXPECT_EQ(is_theta_dominating(g, theta, set).feasible, dominates(g, theta, set));
  }
}

TEST(SufficientCondition, Examples) {
  const auto low = check_sufficient_condition(0.3, 0.1, 100, 100);
  EXPECT_FALSE(low.holds);
  EXPECT_NEAR(low.z, 0.001, 1e-15);
  EXPECT_NEAR(low.degree_term, 4e4 * std::exp(-0.1), 1e-6);

  const auto high = check_sufficient_condition(0.3, 0.1, 25000, 25000);
  EXPECT_TRUE(high.holds);
  EXPECT_NEAR(high.degree_term, 4.0 * 25000.0 * 25000.0 * std::exp(-25.0), 1e-9);
  EXPECT_LT(high.strict_term, 1.0);

  EXPECT_THROW(check_sufficient_condition(0.95, 0.1, 10, 10), std::invalid_argument);
  EXPECT_THROW(check_sufficient_condition(0.3, 0.1, 10, 5), std::invalid_argument);
}

TEST(LllParams, Validation) {
  EXPECT_THROW(LllParams::make(0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(LllParams::make(0.5, 0.0), std::invalid_argument);
  EXPECT_THROW(LllParams::make(0.8, 0.3), std::invalid_argument);
  const auto p = LllParams::make(0.3, 0.1);
  EXPECT_NEAR(p.x, 0.4, 1e-15);
  EXPECT_NEAR(p.alpha(100), std::exp(-0.1), 1e-12);
}

TEST(Lll, FullSelectionAndEmptyGraph) {
  const auto k6 = Graph::complete(6);
  const auto all = lll_construct(k6, 0.6, 0.4, 3);
  EXPECT_EQ(all.certificate.size(), 6u);
  EXPECT_TRUE(all.certificate.feasible);
  EXPECT_EQ(all.resamplings, 0u);

  const auto empty = lll_construct(Graph(8), 0.5, 0.1, 3);
  EXPECT_TRUE(empty.certificate.feasible);
  EXPECT_EQ(empty.resamplings, 0u);
}

TEST(Lll, NonTerminationCarriesPartialState) {
  // A perfect matching on 200 vertices has 100 independent components, each
  // violated with probability about 0.4, so one redraw cannot fix them all.
  std::vector<Edge> matching;
  for (Vertex v = 0; v < 200; v += 2) matching.emplace_back(v, v + 1);
  try {
    lll_construct(Graph::from_edges(200, matching), 0.5, 0.1, 5, 1);
    FAIL() << "expected NonTermination";
  } catch (const NonTermination& e) {
    EXPECT_FALSE(e.partial().feasible);
    EXPECT_EQ(e.resamplings(), 1u);
  }
}

TEST(Lll, DeterministicPerSeed) {
  const auto g = gen_gnp(60, 0.3, 1);
  const auto a = lll_construct(g, 0.3, 0.1, 42);
  const auto b = lll_construct(g, 0.3, 0.1, 42);
  EXPECT_EQ(a.certificate.set, b.certificate.set);
  EXPECT_EQ(a.resamplings, b.resamplings);
}

TEST(GreedyShrink, Examples) {
  const std::vector<Vertex> all{0, 1, 2, 3, 4, 5};
  EXPECT_EQ(greedy_shrink(Graph(6), 0.7, all).size(), 0u);

  const std::vector<Vertex> k4all{0, 1, 2, 3};
  const auto k4 = greedy_shrink(Graph::complete(4), 0.5, k4all);
  EXPECT_EQ(k4.size(), 3u);
  EXPECT_TRUE(k4.feasible);

  const std::vector<Vertex> minimal{0, 1, 2};
  EXPECT_EQ(greedy_shrink(Graph::complete(4), 0.5, minimal).set, minimal);

  const std::vector<Vertex> infeasible{0};
  EXPECT_THROW(greedy_shrink(Graph::complete(4), 0.5, infeasible), std::invalid_argument);
}

TEST(GreedyShrink, DirectedGraph) {
  const DirectedGraph g({{1}, {2}, {0}});
  const std::vector<Vertex> all{0, 1, 2};
  const auto out = greedy_shrink(g, 1.0, all);
  EXPECT_EQ(out.size(), 3u);
  EXPECT_TRUE(is_theta_dominating(g, 1.0, out.set).feasible);
}

TEST(BruteForce, Examples) {
  EXPECT_EQ(brute_force_min(Graph(5), 0.5).minimum, 0u);
  EXPECT_EQ(brute_force_min(Graph::cycle(5), 0.5).minimum, 3u);
  EXPECT_EQ(brute_force_min(Graph::complete(4), 0.5).minimum, 3u);
  EXPECT_THROW(brute_force_min(Graph(21), 0.5), std::invalid_argument);
}

TEST(BruteForce, WitnessIsFeasibleAndNothingSmallerIsProperty) {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(9);
    const auto g = gen_gnp(n, rng.uniform(), rng.next());
    const double theta = 0.2 + 0.8 * rng.uniform();
    const auto r = brute_force_min(g, theta);
    EXPECT_EQ(r.witness.size(), r.minimum);
    EXPECT_TRUE(dominates(g, theta, r.witness));
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) >= r.minimum) continue;
      std::vector<Vertex> set;
      for (Vertex v = 0; v < n; ++v) {
        if (mask >> v & 1u) set.push_back(v);
      }
      EXPECT_FALSE(dominates(g, theta, set));
    }
  }
}

TEST(BruteForce, MonotoneInThetaProperty) {
  Rng rng(37);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    const auto g = gen_gnp(n, 0.2 + 0.6 * rng.uniform(), rng.next());
    std::size_t last = 0;
    for (double theta : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      const auto m = brute_force_min(g, theta).minimum;
      EXPECT_GE(m, last);
      last = m;
    }
  }
}

TEST(LowerBound, Examples) {
  const auto k5 = lower_bound_certificate(Graph::complete(5), 0.5);
  EXPECT_NEAR(k5.closed_form, 0.3125, 1e-12);
  EXPECT_NEAR(k5.sum_form, 2.0, 1e-12);
  EXPECT_EQ(k5.far_set.size(), 1u);
  EXPECT_DOUBLE_EQ(lower_bound_certificate(Graph(6), 0.5).value(), 0.0);
}

TEST(LowerBound, NeverExceedsMinimumProperty) {
  Rng rng(43);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const auto g = gen_gnp(n, rng.uniform(), rng.next());
    const double theta = 0.1 + 0.9 * rng.uniform();
    const auto lb = lower_bound_certificate(g, theta);
    const auto m = static_cast<double>(brute_force_min(g, theta).minimum);
    EXPECT_LE(lb.sum_form, m + 1e-9);
    EXPECT_LE(lb.closed_form, m + 1e-9);
  }
}

TEST(Chernoff, BoundFormula) {
  EXPECT_NEAR(bernoulli_deviation_bound(50.0, 0.5), 2 * std::exp(-0.25 * 50 / 4), 1e-15);
}

TEST(Chernoff, EmpiricalTailBelowBound) {
  Rng rng(61);
  const int runs = 20000;
  for (double gamma : {0.25, 0.5}) {
    int tail = 0;
    for (int r = 0; r < runs; ++r) {
      int s = 0;
      for (int i = 0; i < 100; ++i) s += rng.bernoulli(0.5);
      tail += std::fabs(s - 50.0) >= gamma * 50.0;
    }
    const double bound = bernoulli_deviation_bound(50.0, gamma);
    const double p = static_cast<double>(tail) / runs;
    EXPECT_LE(p, bound + 3 * std::sqrt(bound * (1 - std::min(bound, 1.0)) / runs) + 1e-12);
  }
}

TEST(Concentration, EmptyAndFullSelection) {
  ExperimentConfig cfg;
  cfg.n = 30;
  cfg.p = 0.3;
  cfg.theta = 0.5;
  cfg.eta = 0.5;
  cfg.zeta = 0.2;
  cfg.trials = 0;
  cfg.seed = 1;
  EXPECT_TRUE(concentration_experiment(cfg).trials.empty());

  cfg.trials = 3;
  const auto report = concentration_experiment(cfg);
  ASSERT_EQ(report.trials.size(), 3u);
  for (const auto& t : report.trials) {
    EXPECT_EQ(t.lll_size, 30u);
    EXPECT_LE(t.constructed_size, 30u);
    EXPECT_TRUE(t.feasible);
  }

  std::ostringstream a, b;
  write_concentration_csv(a, report);
  write_concentration_csv(b, concentration_experiment(cfg));
  EXPECT_EQ(a.str(), b.str());
}
