#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "storebound/random.hpp"

namespace storebound {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// A symbol sequence; entry i is drawn from component i of a SourceFamily.
using Sequence = std::vector<std::uint32_t>;

// Joint pmf p(x, y) over a finite product alphabet, stored row-major with x as
// the row index.
class JointDistribution {
 public:
  JointDistribution(std::size_t x_size, std::size_t y_size,
                    std::vector<double> pmf);

  std::size_t x_size() const { return x_size_; }
  std::size_t y_size() const { return y_size_; }
  double operator()(std::size_t x, std::size_t y) const {
    return pmf_[x * y_size_ + y];
  }
  std::span<const double> masses() const { return pmf_; }

  std::vector<double> x_marginal() const;
  std::vector<double> y_marginal() const;

  // Doubly symmetric binary source: X uniform, Y = X flipped w.p. crossover.
  static JointDistribution binary_symmetric(double crossover);
  static JointDistribution uniform(std::size_t x_size, std::size_t y_size);
  // Y = X with X ~ pmf.
  static JointDistribution copy(std::span<const double> x_pmf);
  // X and Y independent with the given marginals.
  static JointDistribution independent(std::span<const double> x_pmf,
                                       std::span<const double> y_pmf);

 private:
  std::size_t x_size_;
  std::size_t y_size_;
  std::vector<double> pmf_;
};

struct MarginalsAndConditional {
  std::vector<double> x;
  std::vector<double> y;
  // Row-major (x, y): p(x | y). Columns with zero Y-mass are filled with NaN.
  std::vector<double> x_given_y;
  std::vector<std::size_t> undefined_columns;
};

// Independent, not necessarily identical, components (X_i, Y_i), i < n.
class SourceFamily {
 public:
  // epsilon1 / epsilon2 bound every joint and Y-marginal mass. Violations are
  // recorded in warnings() rather than rejected.
  explicit SourceFamily(std::vector<JointDistribution> components,
                        double epsilon1 = 0.0, double epsilon2 = 1.0);

  static SourceFamily iid(const JointDistribution& dist, std::size_t n,
                          double epsilon1 = 0.0, double epsilon2 = 1.0);
  // Component i is distributions[i % distributions.size()].
  static SourceFamily cycled(const std::vector<JointDistribution>& distributions,
                             std::size_t n, double epsilon1 = 0.0,
                             double epsilon2 = 1.0);

  std::size_t length() const { return components_.size(); }
  std::size_t x_size() const { return components_.front().x_size(); }
  std::size_t y_size() const { return components_.front().y_size(); }
  double epsilon1() const { return epsilon1_; }
  double epsilon2() const { return epsilon2_; }

  const JointDistribution& component(std::size_t i) const {
    return components_[i];
  }
  const std::vector<JointDistribution>& components() const {
    return components_;
  }

  // log2 p_i(x, y), log2 p_{i,X}(x), log2 p_{i,Y}(y); -inf for zero mass.
  double log2_joint(std::size_t i, std::size_t x, std::size_t y) const {
    return log2_joint_[i][x * y_size() + y];
  }
  double log2_x(std::size_t i, std::size_t x) const { return log2_x_[i][x]; }
  double log2_y(std::size_t i, std::size_t y) const { return log2_y_[i][y]; }

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<JointDistribution> components_;
  double epsilon1_;
  double epsilon2_;
  std::vector<std::vector<double>> log2_joint_;
  std::vector<std::vector<double>> log2_x_;
  std::vector<std::vector<double>> log2_y_;
  std::vector<std::string> warnings_;
};

struct EntropyProfile {
  std::vector<double> per_index_hxy;
  std::vector<double> per_index_hy;
  std::vector<double> per_index_hx;
  double avg_hxy = 0.0;
  double avg_hy = 0.0;
  double avg_hx = 0.0;
};

struct SequencePair {
  Sequence u;
  Sequence v;
};

// Shannon entropy in bits; 0 log 0 = 0. Throws std::invalid_argument unless
// the masses are non-negative and sum to 1 within 1e-12.
double entropy(std::span<const double> pmf);
double entropy(const JointDistribution& dist);

MarginalsAndConditional marginals_and_conditional(const JointDistribution& dist);

EntropyProfile entropy_profile(const SourceFamily& family);

SequencePair sample_sequence(const SourceFamily& family, Rng& rng);
SequencePair sample_sequence(const SourceFamily& family, std::uint64_t seed);

// Σ_i log2 p_i(u_i, v_i), or -inf when any factor is zero. Throws
// std::invalid_argument on a length mismatch or an out-of-alphabet symbol.
double sequence_log_prob(const SourceFamily& family, const Sequence& u,
                         const Sequence& v);
double sequence_log_prob_u(const SourceFamily& family, const Sequence& u);
double sequence_log_prob_v(const SourceFamily& family, const Sequence& v);

// 1 - (H_XY - H_Y) / H_X.
double storage_savings(const EntropyProfile& profile);

// Mixed-radix index of a sequence, first symbol most significant, so index
// order is lexicographic order.
std::uint64_t sequence_index(const Sequence& seq, std::size_t alphabet);
Sequence index_to_sequence(std::uint64_t index, std::size_t length,
                           std::size_t alphabet);
// alphabet^length, saturating at UINT64_MAX.
std::uint64_t sequence_count(std::size_t alphabet, std::size_t length);

// Feature-correlation bookkeeping ---------------------------------------

struct NumericTable {
  std::vector<std::string> column_names;
  // Column-major values.
  std::vector<std::vector<double>> columns;

  std::size_t row_count() const {
    return columns.empty() ? 0 : columns.front().size();
  }
};

struct DependencyGraph {
  std::size_t feature_count = 0;
  // i < j, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  // Zero-variance columns; correlation is undefined so they get no edges.
  std::vector<std::size_t> constant_features;

  bool has_edge(std::size_t i, std::size_t j) const;
};

// Edge {i, j} iff |pearson(col i, col j)| >= corr_threshold.
DependencyGraph build_dependency_graph(const NumericTable& table,
                                       double corr_threshold);

NumericTable read_numeric_table(const std::string& path);

// Serialization ------------------------------------------------------------

// {"x_alphabet": a, "y_alphabet": b, "components": [pmf, ...]} where each pmf
// is either a nested row-major matrix (rows indexed by x) or a flat row-major
// list. Optional: "epsilon1", "epsilon2", and "n" (components are cycled to
// length n). A non-zero length_override takes precedence over "n".
SourceFamily family_from_json(const nlohmann::json& doc,
                              std::size_t length_override = 0);
nlohmann::json family_to_json(const SourceFamily& family);
SourceFamily load_family(const std::string& path,
                         std::size_t length_override = 0);

}  // namespace storebound
