#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "storebound/graph.hpp"
#include "storebound/neigh_dom.hpp"

namespace storebound {

// Labelled points with uniform dimension.
struct Dataset {
  std::vector<std::string> feature_names;
  std::string label_column = "label";
  std::vector<std::vector<double>> points;
  std::vector<std::string> labels;

  std::size_t size() const { return points.size(); }
  std::size_t dimension() const {
    return points.empty() ? feature_names.size() : points.front().size();
  }
  // Label -> count, ordered by label.
  std::map<std::string, std::size_t> class_counts() const;
  // Largest class; ties go to the lexicographically smallest label.
  std::string majority_label() const;
  std::vector<std::size_t> indices_of(const std::string& label) const;
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

// Throws ParseError for a missing label column, a non-numeric feature cell
// (naming row and column), or fewer than two classes.
Dataset load_dataset(const std::string& path, const std::string& label_column);
// Header: features in order, then the label column.
void save_dataset(const std::string& path, const Dataset& data);

enum class Metric { kEuclidean, kManhattan, kCosine };

Metric parse_metric(const std::string& name);
std::string metric_name(Metric metric);
// Cosine distance is 1 - cos(a, b); zero vectors throw std::invalid_argument.
double distance(Metric metric, const std::vector<double>& a,
                const std::vector<double>& b);

struct KnnGraph {
  DirectedGraph graph;
  Metric metric;
  std::size_t k;
};

// Exact k nearest neighbours per point (excluding itself); distance ties go to
// the lower point index. Out-lists are ordered nearest first.
KnnGraph knn_graph(const std::vector<std::vector<double>>& points, std::size_t k,
                   Metric metric = Metric::kEuclidean);

// min(n - 1, ceil(M log2 n)), at least 1.
std::size_t choose_k(std::size_t n, double m);

struct UndersampleResult {
  std::vector<std::size_t> retained_rows;  // dataset row indices, ascending
  std::vector<std::size_t> majority_rows;  // graph vertex i is majority_rows[i]
  std::string majority_label;
  DominationCertificate certificate;       // over the majority kNN graph
  std::size_t lll_size = 0;
  std::uint64_t resamplings = 0;
  double size_bound = 0.0;                 // (theta + 2 eta) * majority size
  std::size_t k = 0;
  double min_retention = 0.0;              // min_v achieved(v) / k
  std::vector<std::string> warnings;

  // Minority rows plus retained majority rows, in original order.
  std::vector<std::size_t> balanced_rows(const Dataset& data) const;
};

// Builds the kNN graph over majority points only, runs lll_construct then
// greedy_shrink on it, and maps the surviving vertices back to dataset rows.
UndersampleResult undersample_majority(const Dataset& data, double theta,
                                       std::size_t k, double eta,
                                       std::uint64_t seed,
                                       Metric metric = Metric::kEuclidean,
                                       std::uint64_t max_rounds = 0);

struct ClassifierReport {
  std::map<std::string, double> recall;        // per test label
  std::map<std::string, std::size_t> support;  // test count per label
  double accuracy = 0.0;
  std::vector<std::string> predictions;

  // {"per_class": {label: recall}, "accuracy": a}
  nlohmann::json to_json() const;
};

// Majority vote over the k_eval nearest training points; a vote tie goes to
// the tied class whose member is nearest.
ClassifierReport evaluate_knn_classifier(const Dataset& train, const Dataset& test,
                                         std::size_t k_eval,
                                         Metric metric = Metric::kEuclidean);

// Two isotropic Gaussian clouds: majority centred at the origin, minority at
// (separation, 0, ..., 0), unit variance per coordinate. Labels "majority" and
// "minority"; rows are majority first.
Dataset two_gaussian_dataset(std::size_t majority, std::size_t minority,
                             std::size_t dimension, double separation,
                             std::uint64_t seed);

}  // namespace storebound
