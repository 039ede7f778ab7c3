#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "storebound/graph.hpp"

namespace storebound {

// Absorbs float noise when comparing a neighbour count with theta * d(v).
inline constexpr double kThresholdTolerance = 1e-9;

// ceil(theta * degree - 1e-9), never negative.
std::size_t required_count(double theta, std::size_t degree);

// Selection parameters of the randomized construction. A vertex is kept with
// probability x = theta + eta; z = eta^2 x / 4 is the exponent in the
// concentration bound and alpha(delta) = exp(-z delta) bounds the failure
// probability at a vertex of degree >= delta.
struct LllParams {
  double theta = 0.0;
  double eta = 0.0;
  double x = 0.0;
  double z = 0.0;
  double slack_y = 0.01;

  // Throws std::invalid_argument unless 0 < theta <= 1, eta > 0, x <= 1.
  static LllParams make(double theta, double eta, double slack_y = 0.01);
  double alpha(std::size_t min_degree) const;
};

struct DominationCertificate {
  double theta = 0.0;
  std::vector<Vertex> set;  // ascending
  std::vector<std::size_t> required;
  std::vector<std::size_t> achieved;
  bool feasible = false;

  std::size_t size() const { return set.size(); }
  // Vertices whose achieved count falls short.
  std::vector<Vertex> violations() const;
  // {"theta", "size", "set", "feasible", "per_vertex": [[required, achieved]]}
  nlohmann::json to_json() const;
};

// Every vertex v (selected or not) needs at least theta * d(v) of its
// (out-)neighbours in the set. Duplicate or out-of-range members throw.
DominationCertificate is_theta_dominating(const Graph& g, double theta,
                                          std::span<const Vertex> set);
DominationCertificate is_theta_dominating(const DirectedGraph& g, double theta,
                                          std::span<const Vertex> set);

struct SufficientCondition {
  double z = 0.0;
  double alpha = 0.0;            // exp(-z delta)
  double degree_term = 0.0;      // 4 Delta^2 exp(-z delta)
  double strict_term = 0.0;      // exp(-z) + 2 exp(-z delta)
  bool degree_condition = false;  // degree_term <= 1
  bool strict_condition = false;  // strict_term < 1
  double slack_y = 0.0;
  bool slack_condition = false;   // strict_term + y <= 1
  bool holds = false;             // degree_condition && strict_condition
};

// Throws std::invalid_argument for invalid parameters, delta < 1, or
// Delta < delta.
SufficientCondition check_sufficient_condition(double theta, double eta,
                                               std::size_t min_degree,
                                               std::size_t max_degree,
                                               double slack_y = 0.01);

class NonTermination : public std::runtime_error {
 public:
  NonTermination(const std::string& what, DominationCertificate partial,
                 std::uint64_t resamplings)
      : std::runtime_error(what),
        partial_(std::move(partial)),
        resamplings_(resamplings) {}
  const DominationCertificate& partial() const { return partial_; }
  std::uint64_t resamplings() const { return resamplings_; }

 private:
  DominationCertificate partial_;
  std::uint64_t resamplings_;
};

struct LllOutcome {
  DominationCertificate certificate;
  std::uint64_t resamplings = 0;
  double size_bound = 0.0;  // (theta + 2 eta) n
  bool within_bound = false;
  bool sufficient_condition = false;
  std::vector<std::string> warnings;
};

// Keeps every vertex independently with probability theta + eta, then, while
// some vertex v has fewer than theta * d(v) selected neighbours, redraws the
// selection of N(v) for the lowest such v. max_rounds == 0 means 1000 n
// redraws. Throws NonTermination when the cap is hit.
LllOutcome lll_construct(const Graph& g, double theta, double eta,
                         std::uint64_t seed, std::uint64_t max_rounds = 0);
LllOutcome lll_construct(const DirectedGraph& g, double theta, double eta,
                         std::uint64_t seed, std::uint64_t max_rounds = 0);

// Drops the removable member of largest slack (lowest index on ties) until no
// single removal keeps the set feasible. Throws std::invalid_argument if the
// input is infeasible.
DominationCertificate greedy_shrink(const Graph& g, double theta,
                                    std::span<const Vertex> set);
DominationCertificate greedy_shrink(const DirectedGraph& g, double theta,
                                    std::span<const Vertex> set);

inline constexpr std::size_t kBruteForceMaxVertices = 20;

struct BruteForceResult {
  std::size_t minimum = 0;
  std::vector<Vertex> witness;  // lexicographically least among minimum sets
};

BruteForceResult brute_force_min(const Graph& g, double theta);

struct LowerBound {
  std::vector<Vertex> far_set;
  double sum_form = 0.0;        // Σ_{v in T} ceil(theta d(v))
  double closed_form = 0.0;     // theta delta n / (2 Delta^2)
  double statement_form = 0.0;  // theta delta n / Delta^2
  double value() const { return sum_form; }
};

LowerBound lower_bound_certificate(const Graph& g, double theta);

// Two-sided Chernoff bound 2 exp(-gamma^2 mean / 4) for a sum of independent
// Bernoulli variables with the given mean.
double bernoulli_deviation_bound(double mean, double gamma);

struct ExperimentConfig {
  std::size_t n = 0;
  double p = 0.0;
  double theta = 0.0;
  double eta = 0.0;
  double zeta = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t subset_probes = 100;  // random floor(zeta n)-subsets per trial
  std::uint64_t max_rounds = 0;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t edges = 0;
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  std::size_t lll_size = 0;
  std::size_t constructed_size = 0;  // after greedy_shrink
  std::uint64_t resamplings = 0;
  bool feasible = false;
  bool within_bound = false;      // constructed_size <= (theta + 2 eta) n
  bool lll_within_bound = false;  // same bound on lll_size, before shrinking
  bool sufficient_condition = false;
  std::size_t probes = 0;
  std::size_t probes_infeasible = 0;
};

struct ConcentrationReport {
  ExperimentConfig config;
  double size_bound = 0.0;  // (theta + 2 eta) n
  std::size_t probe_size = 0;
  std::vector<TrialRecord> trials;
  double fraction_feasible = 0.0;
  double fraction_within_bound = 0.0;
  double fraction_lll_within_bound = 0.0;
  double random_subset_infeasible_rate = 0.0;
  std::vector<std::string> warnings;
};

ConcentrationReport concentration_experiment(const ExperimentConfig& config);

void write_concentration_csv(std::ostream& out, const ConcentrationReport& report);
nlohmann::json concentration_summary_json(const ConcentrationReport& report);

}  // namespace storebound
