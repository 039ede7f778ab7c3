#include "storebound/neigh_dom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "storebound/csv.hpp"
#include "storebound/random.hpp"

namespace storebound {

namespace {

std::span<const Vertex> incoming(const Graph& g, Vertex v) { return g.neighbors(v); }
std::span<const Vertex> incoming(const DirectedGraph& g, Vertex v) {
  return g.in_neighbors(v);
}

std::vector<char> membership(std::size_t n, std::span<const Vertex> set) {
  std::vector<char> member(n, 0);
  for (Vertex v : set) {
    if (v >= n) {
      throw std::out_of_range("set member " + std::to_string(v) + " out of range");
    }
    if (member[v]) {
      throw std::invalid_argument("duplicate set member " + std::to_string(v));
    }
    member[v] = 1;
  }
  return member;
}

void check_theta(double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("theta must lie in (0, 1]");
  }
}

template <class G>
DominationCertificate certificate_from_membership(const G& g, double theta,
                                                  const std::vector<char>& member) {
  const std::size_t n = g.vertex_count();
  DominationCertificate cert;
  cert.theta = theta;
  cert.required.resize(n);
  cert.achieved.resize(n);
  cert.feasible = true;
  for (Vertex v = 0; v < n; ++v) {
    if (member[v]) cert.set.push_back(v);
    cert.required[v] = required_count(theta, g.degree(v));
    std::size_t count = 0;
    for (Vertex u : g.neighbors(v)) count += member[u] ? 1 : 0;
    cert.achieved[v] = count;
    if (count < cert.required[v]) cert.feasible = false;
  }
  return cert;
}

template <class G>
DominationCertificate is_theta_dominating_impl(const G& g, double theta,
                                               std::span<const Vertex> set) {
  check_theta(theta);
  return certificate_from_membership(g, theta, membership(g.vertex_count(), set));
}

template <class G>
LllOutcome lll_construct_impl(const G& g, double theta, double eta,
                              std::uint64_t seed, std::uint64_t max_rounds) {
  const LllParams params = LllParams::make(theta, eta);
  const std::size_t n = g.vertex_count();
  if (max_rounds == 0) max_rounds = 1000 * static_cast<std::uint64_t>(std::max<std::size_t>(n, 1));

  LllOutcome outcome;
  outcome.size_bound = (theta + 2.0 * eta) * static_cast<double>(n);
  const DegreeStats stats = degree_stats(g);
  if (stats.min_degree >= 1) {
    outcome.sufficient_condition =
        check_sufficient_condition(theta, eta, stats.min_degree, stats.max_degree)
            .holds;
  }
  if (!outcome.sufficient_condition && stats.max_degree > 0) {
    outcome.warnings.push_back(
        "sufficient condition fails for this degree range; termination relies on "
        "the round cap");
  }

  Rng rng(seed);
  std::vector<char> selected(n);
  for (Vertex v = 0; v < n; ++v) selected[v] = rng.bernoulli(params.x) ? 1 : 0;

  std::vector<std::size_t> required(n), achieved(n, 0);
  std::set<Vertex> violated;
  for (Vertex v = 0; v < n; ++v) {
    required[v] = required_count(theta, g.degree(v));
    for (Vertex u : g.neighbors(v)) achieved[v] += selected[u];
    if (achieved[v] < required[v]) violated.insert(v);
  }

  std::uint64_t steps = 0;
  while (!violated.empty()) {
    if (steps >= max_rounds) {
      throw NonTermination("resampling did not terminate within " +
                               std::to_string(max_rounds) + " rounds",
                           certificate_from_membership(g, theta, selected), steps);
    }
    const Vertex v = *violated.begin();
    for (Vertex u : g.neighbors(v)) {
      const char fresh = rng.bernoulli(params.x) ? 1 : 0;
      if (fresh == selected[u]) continue;
      selected[u] = fresh;
      for (Vertex w : incoming(g, u)) {
        if (fresh) {
          ++achieved[w];
          if (achieved[w] >= required[w]) violated.erase(w);
        } else {
          --achieved[w];
          if (achieved[w] < required[w]) violated.insert(w);
        }
      }
    }
    ++steps;
  }

  outcome.resamplings = steps;
  outcome.certificate = certificate_from_membership(g, theta, selected);
  if (!outcome.certificate.feasible) {
    throw std::logic_error("resampling ended on an infeasible selection");
  }
  outcome.within_bound =
      static_cast<double>(outcome.certificate.size()) <= outcome.size_bound + 1e-9;
  return outcome;
}

template <class G>
DominationCertificate greedy_shrink_impl(const G& g, double theta,
                                         std::span<const Vertex> set) {
  check_theta(theta);
  const std::size_t n = g.vertex_count();
  std::vector<char> member = membership(n, set);
  DominationCertificate cert = certificate_from_membership(g, theta, member);
  if (!cert.feasible) {
    throw std::invalid_argument("greedy_shrink needs a feasible input set");
  }
  std::vector<std::size_t>& achieved = cert.achieved;
  const std::vector<std::size_t>& required = cert.required;
  constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  for (;;) {
    Vertex best = 0;
    std::size_t best_slack = 0;
    bool found = false;
    for (Vertex u = 0; u < n; ++u) {
      if (!member[u]) continue;
      std::size_t slack = kUnbounded;
      for (Vertex w : incoming(g, u)) {
        slack = std::min(slack, achieved[w] - required[w]);
        if (slack == 0) break;
      }
      if (slack >= 1 && (!found || slack > best_slack)) {
        best = u;
        best_slack = slack;
        found = true;
      }
    }
    if (!found) break;
    member[best] = 0;
    for (Vertex w : incoming(g, best)) --achieved[w];
  }

  DominationCertificate out = certificate_from_membership(g, theta, member);
  if (!out.feasible) throw std::logic_error("greedy_shrink produced an infeasible set");
  return out;
}

}  // namespace

std::size_t required_count(double theta, std::size_t degree) {
  const double r = std::ceil(theta * static_cast<double>(degree) - kThresholdTolerance);
  return r <= 0.0 ? 0 : static_cast<std::size_t>(r);
}

LllParams LllParams::make(double theta, double eta, double slack_y) {
  check_theta(theta);
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(slack_y > 0.0)) throw std::invalid_argument("slack y must be positive");
  LllParams p;
  p.theta = theta;
  p.eta = eta;
  p.x = theta + eta;
  if (p.x > 1.0 + kThresholdTolerance) {
    throw std::invalid_argument("selection probability theta + eta exceeds 1");
  }
  p.x = std::min(p.x, 1.0);
  p.z = eta * eta * p.x / 4.0;
  p.slack_y = slack_y;
  return p;
}

double LllParams::alpha(std::size_t min_degree) const {
  return std::exp(-z * static_cast<double>(min_degree));
}

std::vector<Vertex> DominationCertificate::violations() const {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < required.size(); ++v) {
    if (achieved[v] < required[v]) out.push_back(v);
  }
  return out;
}

nlohmann::json DominationCertificate::to_json() const {
  nlohmann::json doc;
  doc["theta"] = theta;
  doc["size"] = set.size();
  doc["set"] = set;
  doc["feasible"] = feasible;
  auto per_vertex = nlohmann::json::array();
  for (std::size_t v = 0; v < required.size(); ++v) {
    per_vertex.push_back({required[v], achieved[v]});
  }
  doc["per_vertex"] = std::move(per_vertex);
  return doc;
}

DominationCertificate is_theta_dominating(const Graph& g, double theta,
                                          std::span<const Vertex> set) {
  return is_theta_dominating_impl(g, theta, set);
}

DominationCertificate is_theta_dominating(const DirectedGraph& g, double theta,
                                          std::span<const Vertex> set) {
  return is_theta_dominating_impl(g, theta, set);
}

SufficientCondition check_sufficient_condition(double theta, double eta,
                                               std::size_t min_degree,
                                               std::size_t max_degree,
                                               double slack_y) {
  const LllParams params = LllParams::make(theta, eta, slack_y);
  if (min_degree < 1) throw std::invalid_argument("minimum degree must be >= 1");
  if (max_degree < min_degree) {
    throw std::invalid_argument("maximum degree below minimum degree");
  }
  SufficientCondition sc;
  sc.z = params.z;
  sc.slack_y = slack_y;
  const double delta = static_cast<double>(min_degree);
  const double big_delta = static_cast<double>(max_degree);
  sc.alpha = std::exp(-sc.z * delta);
  // log-domain first so huge Delta cannot overflow the comparison.
  const double log_degree_term = std::log(4.0) + 2.0 * std::log(big_delta) - sc.z * delta;
  sc.degree_term = std::exp(log_degree_term);
  sc.degree_condition = log_degree_term <= 0.0;
  sc.strict_term = std::exp(-sc.z) + 2.0 * sc.alpha;
  sc.strict_condition = sc.strict_term < 1.0;
  sc.slack_condition = sc.strict_term + slack_y <= 1.0;
  sc.holds = sc.degree_condition && sc.strict_condition;
  return sc;
}

LllOutcome lll_construct(const Graph& g, double theta, double eta,
                         std::uint64_t seed, std::uint64_t max_rounds) {
  return lll_construct_impl(g, theta, eta, seed, max_rounds);
}

LllOutcome lll_construct(const DirectedGraph& g, double theta, double eta,
                         std::uint64_t seed, std::uint64_t max_rounds) {
  return lll_construct_impl(g, theta, eta, seed, max_rounds);
}

DominationCertificate greedy_shrink(const Graph& g, double theta,
                                    std::span<const Vertex> set) {
  return greedy_shrink_impl(g, theta, set);
}

DominationCertificate greedy_shrink(const DirectedGraph& g, double theta,
                                    std::span<const Vertex> set) {
  return greedy_shrink_impl(g, theta, set);
}

BruteForceResult brute_force_min(const Graph& g, double theta) {
  check_theta(theta);
  const std::size_t n = g.vertex_count();
  if (n > kBruteForceMaxVertices) {
    throw std::invalid_argument("brute force is limited to " +
                                std::to_string(kBruteForceMaxVertices) + " vertices");
  }
  std::vector<std::uint32_t> neighbor_mask(n, 0);
  std::vector<int> required(n);
  for (Vertex v = 0; v < n; ++v) {
    for (Vertex u : g.neighbors(v)) neighbor_mask[v] |= std::uint32_t{1} << u;
    required[v] = static_cast<int>(required_count(theta, g.degree(v)));
  }
  const auto feasible = [&](std::uint32_t mask) {
    for (Vertex v = 0; v < n; ++v) {
      if (std::popcount(neighbor_mask[v] & mask) < required[v]) return false;
    }
    return true;
  };

  // Sizes in increasing order; within a size, combinations in lexicographic
  // order, so the first hit is the lexicographically least minimum set.
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<Vertex> combo(k);
    std::iota(combo.begin(), combo.end(), Vertex{0});
    for (;;) {
      std::uint32_t mask = 0;
      for (Vertex v : combo) mask |= std::uint32_t{1} << v;
      if (feasible(mask)) return {k, combo};
      std::size_t i = k;
      while (i > 0 && combo[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++combo[i - 1];
      for (std::size_t j = i; j < k; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  throw std::logic_error("full vertex set must be feasible");
}

LowerBound lower_bound_certificate(const Graph& g, double theta) {
  check_theta(theta);
  LowerBound lb;
  lb.far_set = three_far_set(g);
  for (Vertex v : lb.far_set) {
    lb.sum_form += static_cast<double>(required_count(theta, g.degree(v)));
  }
  const DegreeStats stats = degree_stats(g);
  if (stats.max_degree >= 1) {
    const double n = static_cast<double>(g.vertex_count());
    const double d2 = static_cast<double>(stats.max_degree * stats.max_degree);
    const double delta = static_cast<double>(stats.min_degree);
    lb.closed_form = theta * delta * n / (2.0 * d2);
    lb.statement_form = theta * delta * n / d2;
  }
  return lb;
}

double bernoulli_deviation_bound(double mean, double gamma) {
  return 2.0 * std::exp(-gamma * gamma * mean / 4.0);
}

ConcentrationReport concentration_experiment(const ExperimentConfig& config) {
  LllParams::make(config.theta, config.eta);
  if (!(config.zeta > 0.0 && config.zeta < config.theta)) {
    throw std::invalid_argument("need 0 < zeta < theta");
  }
  if (config.n < 1) throw std::invalid_argument("n must be positive");
  if (!(config.p >= 0.0 && config.p <= 1.0)) {
    throw std::invalid_argument("p must lie in [0, 1]");
  }

  ConcentrationReport report;
  report.config = config;
  const double nd = static_cast<double>(config.n);
  report.size_bound = (config.theta + 2.0 * config.eta) * nd;
  report.probe_size = static_cast<std::size_t>(std::floor(config.zeta * nd));
  if (config.n > 1 && config.p * nd < std::log2(nd)) {
    report.warnings.push_back("p is below log2(n) / n; the concentration regime "
                              "needs p >= M log n / n");
  }

  std::size_t feasible = 0, within = 0, lll_within = 0, probes = 0, probes_infeasible = 0;
  for (std::size_t t = 0; t < config.trials; ++t) {
    TrialRecord rec;
    rec.trial = t;
    rec.seed = derive_seed(config.seed, t);
    const Graph g = gen_gnp(config.n, config.p, derive_seed(rec.seed, 0));
    const DegreeStats stats = degree_stats(g);
    rec.edges = g.edge_count();
    rec.min_degree = stats.min_degree;
    rec.max_degree = stats.max_degree;

    const LllOutcome lll = lll_construct(g, config.theta, config.eta,
                                         derive_seed(rec.seed, 1), config.max_rounds);
    const DominationCertificate shrunk =
        greedy_shrink(g, config.theta, lll.certificate.set);
    rec.lll_size = lll.certificate.size();
    rec.constructed_size = shrunk.size();
    rec.resamplings = lll.resamplings;
    rec.sufficient_condition = lll.sufficient_condition;
    rec.feasible = lll.certificate.feasible && shrunk.feasible;
    rec.within_bound =
        static_cast<double>(rec.constructed_size) <= report.size_bound + 1e-9;
    rec.lll_within_bound = lll.within_bound;

    Rng probe_rng(derive_seed(rec.seed, 2));
    std::vector<Vertex> pool(config.n);
    for (std::size_t q = 0; q < config.subset_probes; ++q) {
      std::iota(pool.begin(), pool.end(), Vertex{0});
      for (std::size_t i = 0; i < report.probe_size; ++i) {
        const auto j = i + probe_rng.below(config.n - i);
        std::swap(pool[i], pool[j]);
      }
      const std::span<const Vertex> subset(pool.data(), report.probe_size);
      if (!is_theta_dominating(g, config.theta, subset).feasible) {
        ++rec.probes_infeasible;
      }
      ++rec.probes;
    }

    feasible += rec.feasible;
    within += rec.within_bound;
    lll_within += rec.lll_within_bound;
    probes += rec.probes;
    probes_infeasible += rec.probes_infeasible;
    report.trials.push_back(rec);
  }
  if (config.trials > 0) {
    const double td = static_cast<double>(config.trials);
    report.fraction_feasible = static_cast<double>(feasible) / td;
    report.fraction_within_bound = static_cast<double>(within) / td;
    report.fraction_lll_within_bound = static_cast<double>(lll_within) / td;
  }
  if (probes > 0) {
    report.random_subset_infeasible_rate =
        static_cast<double>(probes_infeasible) / static_cast<double>(probes);
  }
  return report;
}

void write_concentration_csv(std::ostream& out, const ConcentrationReport& report) {
  out << "trial,seed,edges,min_degree,max_degree,lll_size,constructed_size,"
         "resamplings,feasible,within_bound,lll_within_bound,sufficient_condition,probes,"
         "probes_infeasible\n";
  for (const auto& r : report.trials) {
    out << r.trial << ',' << r.seed << ',' << r.edges << ',' << r.min_degree << ','
        << r.max_degree << ',' << r.lll_size << ',' << r.constructed_size << ','
        << r.resamplings << ',' << (r.feasible ? 1 : 0) << ','
        << (r.within_bound ? 1 : 0) << ',' << (r.lll_within_bound ? 1 : 0) << ','
        << (r.sufficient_condition ? 1 : 0) << ','
        << r.probes << ',' << r.probes_infeasible << '\n';
  }
}

nlohmann::json concentration_summary_json(const ConcentrationReport& report) {
  const auto& c = report.config;
  nlohmann::json doc;
  doc["n"] = c.n;
  doc["p"] = c.p;
  doc["theta"] = c.theta;
  doc["eta"] = c.eta;
  doc["zeta"] = c.zeta;
  doc["trials"] = c.trials;
  doc["seed"] = c.seed;
  doc["subset_probes"] = c.subset_probes;
  doc["size_bound"] = report.size_bound;
  doc["probe_size"] = report.probe_size;
  doc["fraction_feasible"] = report.fraction_feasible;
  doc["fraction_within_bound"] = report.fraction_within_bound;
  doc["fraction_lll_within_bound"] = report.fraction_lll_within_bound;
  doc["random_subset_infeasible_rate"] = report.random_subset_infeasible_rate;
  std::vector<std::size_t> sizes;
  for (const auto& r : report.trials) sizes.push_back(r.constructed_size);
  doc["constructed_sizes"] = sizes;
  if (!sizes.empty()) {
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    doc["constructed_size_min"] = *lo;
    doc["constructed_size_max"] = *hi;
    doc["constructed_size_mean"] =
        std::accumulate(sizes.begin(), sizes.end(), 0.0) /
        static_cast<double>(sizes.size());
  }
  doc["warnings"] = report.warnings;
  return doc;
}

}  // namespace storebound
