#include "storebound/undersample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "storebound/csv.hpp"
#include "storebound/random.hpp"

namespace storebound {

namespace {

struct Neighbour {
  double distance;
  std::size_t index;
  bool operator<(const Neighbour& o) const {
    return distance != o.distance ? distance < o.distance : index < o.index;
  }
};

void check_points(const std::vector<std::vector<double>>& points) {
  if (points.empty()) return;
  const std::size_t d = points.front().size();
  for (const auto& p : points) {
    if (p.size() != d) throw std::invalid_argument("points differ in dimension");
    for (double v : p) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite coordinate");
    }
  }
}

// The `count` nearest points to `query` among `pool`, skipping `exclude`.
std::vector<Neighbour> nearest(const std::vector<std::vector<double>>& pool,
                               const std::vector<double>& query, std::size_t count,
                               Metric metric, std::size_t exclude) {
  std::vector<Neighbour> all;
  all.reserve(pool.size());
  for (std::size_t j = 0; j < pool.size(); ++j) {
    if (j == exclude) continue;
    all.push_back({distance(metric, query, pool[j]), j});
  }
  count = std::min(count, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count),
                    all.end());
  all.resize(count);
  return all;
}

}  // namespace

// Dataset --------------------------------------------------------------------

std::map<std::string, std::size_t> Dataset::class_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  return counts;
}

std::string Dataset::majority_label() const {
  const auto counts = class_counts();
  if (counts.empty()) throw std::invalid_argument("dataset has no rows");
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts) {
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

std::vector<std::size_t> Dataset::indices_of(const std::string& label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(i);
  }
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.label_column = label_column;
  for (auto r : rows) {
    out.points.push_back(points.at(r));
    out.labels.push_back(labels.at(r));
  }
  return out;
}

Dataset load_dataset(const std::string& path, const std::string& label_column) {
  const CsvDocument doc = read_csv(path);
  const std::size_t label_idx = doc.column(label_column);
  Dataset data;
  data.label_column = label_column;
  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    if (c != label_idx) data.feature_names.push_back(doc.header[c]);
  }
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    std::vector<double> point;
    point.reserve(data.feature_names.size());
    for (std::size_t c = 0; c < doc.header.size(); ++c) {
      if (c == label_idx) continue;
      point.push_back(parse_number(doc.rows[r][c], r + 1, doc.header[c]));
    }
    data.points.push_back(std::move(point));
    data.labels.push_back(doc.rows[r][label_idx]);
  }
  if (data.class_counts().size() < 2) {
    throw ParseError("dataset '" + path + "' needs at least two classes");
  }
  return data;
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset '" + path + "'");
  for (const auto& name : data.feature_names) out << csv_escape(name) << ',';
  out << csv_escape(data.label_column) << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.points[i]) out << format_double(v) << ',';
    out << csv_escape(data.labels[i]) << '\n';
  }
}

// Metrics / kNN --------------------------------------------------------------

Metric parse_metric(const std::string& name) {
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "manhattan") return Metric::kManhattan;
  if (name == "cosine") return Metric::kCosine;
  throw std::invalid_argument("unknown metric '" + name +
                              "' (expected euclidean, manhattan or cosine)");
}

std::string metric_name(Metric metric) {
  switch (metric) {
    case Metric::kEuclidean:
      return "euclidean";
    case Metric::kManhattan:
      return "manhattan";
    case Metric::kCosine:
      return "cosine";
  }
  return "euclidean";
}

double distance(Metric metric, const std::vector<double>& a,
                const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  switch (metric) {
    case Metric::kEuclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      return std::sqrt(s);
    }
    case Metric::kManhattan: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
      return s;
    }
    case Metric::kCosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
      }
      if (na == 0.0 || nb == 0.0) {
        throw std::invalid_argument("cosine distance is undefined for zero vectors");
      }
      return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    }
  }
  return 0.0;
}

KnnGraph knn_graph(const std::vector<std::vector<double>>& points, std::size_t k,
                   Metric metric) {
  check_points(points);
  const std::size_t n = points.size();
  if (k == 0 || k >= n) {
    throw std::invalid_argument("k must satisfy 1 <= k < number of points (k=" +
                                std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::vector<Vertex>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& nb : nearest(points, points[i], k, metric, i)) {
      out[i].push_back(static_cast<Vertex>(nb.index));
    }
  }
  return KnnGraph{DirectedGraph(std::move(out)), metric, k};
}

std::size_t choose_k(std::size_t n, double m) {
  if (n < 2) throw std::invalid_argument("choose_k needs n >= 2");
  if (!(m > 0.0)) throw std::invalid_argument("choose_k needs M > 0");
  const double raw =
      std::ceil(m * std::log2(static_cast<double>(n)) - kThresholdTolerance);
  const auto k = static_cast<std::size_t>(std::max(1.0, raw));
  return std::min(n - 1, k);
}

// Undersampling --------------------------------------------------------------

std::vector<std::size_t> UndersampleResult::balanced_rows(const Dataset& data) const {
  std::vector<std::size_t> rows;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] != majority_label) {
      rows.push_back(i);
      continue;
    }
    while (cursor < retained_rows.size() && retained_rows[cursor] < i) ++cursor;
    if (cursor < retained_rows.size() && retained_rows[cursor] == i) rows.push_back(i);
  }
  return rows;
}

UndersampleResult undersample_majority(const Dataset& data, double theta,
                                       std::size_t k, double eta, std::uint64_t seed,
                                       Metric metric, std::uint64_t max_rounds) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::invalid_argument("theta must lie in (0, 1)");
  }
  LllParams::make(theta, eta);
  UndersampleResult result;
  result.majority_label = data.majority_label();
  result.majority_rows = data.indices_of(result.majority_label);
  result.k = k;

  std::vector<std::vector<double>> majority_points;
  majority_points.reserve(result.majority_rows.size());
  for (auto r : result.majority_rows) majority_points.push_back(data.points[r]);
  const KnnGraph knn = knn_graph(majority_points, k, metric);

  const LllOutcome lll = lll_construct(knn.graph, theta, eta, seed, max_rounds);
  result.lll_size = lll.certificate.size();
  result.resamplings = lll.resamplings;
  result.size_bound = lll.size_bound;
  result.warnings = lll.warnings;
  result.certificate = greedy_shrink(knn.graph, theta, lll.certificate.set);

  const DominationCertificate check =
      is_theta_dominating(knn.graph, theta, result.certificate.set);
  if (!check.feasible) throw std::logic_error("undersampled set is infeasible");

  double min_retention = 1.0;
  for (std::size_t v = 0; v < check.achieved.size(); ++v) {
    min_retention = std::min(
        min_retention, static_cast<double>(check.achieved[v]) / static_cast<double>(k));
  }
  result.min_retention = min_retention;
  for (Vertex v : result.certificate.set) {
    result.retained_rows.push_back(result.majority_rows[v]);
  }
  return result;
}

// Evaluation -----------------------------------------------------------------

nlohmann::json ClassifierReport::to_json() const {
  nlohmann::json doc;
  doc["per_class"] = nlohmann::json::object();
  for (const auto& [label, r] : recall) doc["per_class"][label] = r;
  doc["accuracy"] = accuracy;
  return doc;
}

ClassifierReport evaluate_knn_classifier(const Dataset& train, const Dataset& test,
                                         std::size_t k_eval, Metric metric) {
  if (train.size() == 0) throw std::invalid_argument("empty training set");
  if (k_eval == 0 || k_eval > train.size()) {
    throw std::invalid_argument("k_eval must lie in [1, training size]");
  }
  check_points(train.points);
  check_points(test.points);
  if (test.size() > 0 && test.points.front().size() != train.points.front().size()) {
    throw std::invalid_argument("train and test dimensions differ");
  }

  ClassifierReport report;
  std::map<std::string, std::size_t> correct;
  std::size_t total_correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto nbs = nearest(train.points, test.points[i], k_eval, metric,
                             static_cast<std::size_t>(-1));
    std::map<std::string, std::size_t> votes;
    for (const auto& nb : nbs) ++votes[train.labels[nb.index]];
    std::size_t top = 0;
    for (const auto& [label, v] : votes) top = std::max(top, v);
    // Walk neighbours nearest first; the first one from a top-voted class wins.
    std::string predicted;
    for (const auto& nb : nbs) {
      if (votes[train.labels[nb.index]] == top) {
        predicted = train.labels[nb.index];
        break;
      }
    }
    report.predictions.push_back(predicted);
    ++report.support[test.labels[i]];
    if (predicted == test.labels[i]) {
      ++correct[test.labels[i]];
      ++total_correct;
    }
  }
  for (const auto& [label, count] : report.support) {
    report.recall[label] =
        static_cast<double>(correct[label]) / static_cast<double>(count);
  }
  if (test.size() > 0) {
    report.accuracy =
        static_cast<double>(total_correct) / static_cast<double>(test.size());
  }
  return report;
}

Dataset two_gaussian_dataset(std::size_t majority, std::size_t minority,
                             std::size_t dimension, double separation,
                             std::uint64_t seed) {
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  Rng rng(seed);
  Dataset data;
  for (std::size_t d = 0; d < dimension; ++d) {
    data.feature_names.push_back("x" + std::to_string(d));
  }
  const auto draw = [&](double shift, const char* label) {
    std::vector<double> p(dimension);
    for (std::size_t d = 0; d < dimension; ++d) p[d] = rng.normal();
    p[0] += shift;
    data.points.push_back(std::move(p));
    data.labels.emplace_back(label);
  };
  for (std::size_t i = 0; i < majority; ++i) draw(0.0, "majority");
  for (std::size_t i = 0; i < minority; ++i) draw(separation, "minority");
  return data;
}

}  // namespace storebound
