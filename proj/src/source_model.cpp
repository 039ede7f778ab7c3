#include "storebound/source_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "storebound/csv.hpp"
#include "storebound/summation.hpp"

namespace storebound {

namespace {

constexpr double kNormalizationTolerance = 1e-12;

void validate_pmf(std::span<const double> pmf, const char* what) {
  if (pmf.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty pmf");
  }
  CompensatedSum total;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument(std::string(what) +
                                  ": masses must be finite and non-negative");
    }
    total.add(p);
  }
  if (std::fabs(total.value() - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument(std::string(what) + ": masses sum to " +
                                format_double(total.value()) + ", not 1");
  }
}

double safe_log2(double p) { return p > 0.0 ? std::log2(p) : kNegInf; }

double entropy_unchecked(std::span<const double> pmf) {
  CompensatedSum h;
  for (double p : pmf) {
    if (p > 0.0) h.add(-p * std::log2(p));
  }
  // Rounding can leave a -0.0 or a tiny negative for point masses.
  return std::max(0.0, h.value());
}

void check_symbols(const Sequence& seq, std::size_t n, std::size_t alphabet,
                   const char* which) {
  if (seq.size() != n) {
    throw std::invalid_argument(std::string(which) + " sequence has length " +
                                std::to_string(seq.size()) + ", family has " +
                                std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (seq[i] >= alphabet) {
      throw std::invalid_argument(std::string(which) + " symbol " +
                                  std::to_string(seq[i]) + " at index " +
                                  std::to_string(i) + " is outside the alphabet");
    }
  }
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return sab / std::sqrt(saa * sbb);
}

bool is_constant(const std::vector<double>& col) {
  return std::all_of(col.begin(), col.end(),
                     [&](double v) { return v == col.front(); });
}

std::vector<double> parse_pmf_json(const nlohmann::json& node,
                                   std::size_t x_size, std::size_t y_size) {
  std::vector<double> pmf;
  pmf.reserve(x_size * y_size);
  if (!node.is_array()) {
    throw std::invalid_argument("pmf must be an array");
  }
  if (!node.empty() && node.front().is_array()) {
    if (node.size() != x_size) {
      throw std::invalid_argument("pmf matrix must have x_alphabet rows");
    }
    for (const auto& row : node) {
      if (!row.is_array() || row.size() != y_size) {
        throw std::invalid_argument("pmf matrix rows must have y_alphabet entries");
      }
      for (const auto& v : row) pmf.push_back(v.get<double>());
    }
  } else {
    if (node.size() != x_size * y_size) {
      throw std::invalid_argument("flat pmf must have x_alphabet*y_alphabet entries");
    }
    for (const auto& v : node) pmf.push_back(v.get<double>());
  }
  return pmf;
}

}  // namespace

// JointDistribution ----------------------------------------------------------

JointDistribution::JointDistribution(std::size_t x_size, std::size_t y_size,
                                     std::vector<double> pmf)
    : x_size_(x_size), y_size_(y_size), pmf_(std::move(pmf)) {
  if (x_size_ == 0 || y_size_ == 0) {
    throw std::invalid_argument("alphabet sizes must be positive");
  }
  if (pmf_.size() != x_size_ * y_size_) {
    throw std::invalid_argument("pmf size does not match alphabet sizes");
  }
  validate_pmf(pmf_, "joint distribution");
}

std::vector<double> JointDistribution::x_marginal() const {
  std::vector<double> out(x_size_, 0.0);
  for (std::size_t x = 0; x < x_size_; ++x) {
    CompensatedSum s;
    for (std::size_t y = 0; y < y_size_; ++y) s.add((*this)(x, y));
    out[x] = s.value();
  }
  return out;
}

std::vector<double> JointDistribution::y_marginal() const {
  std::vector<double> out(y_size_, 0.0);
  for (std::size_t y = 0; y < y_size_; ++y) {
    CompensatedSum s;
    for (std::size_t x = 0; x < x_size_; ++x) s.add((*this)(x, y));
    out[y] = s.value();
  }
  return out;
}

JointDistribution JointDistribution::binary_symmetric(double crossover) {
  if (!(crossover >= 0.0 && crossover <= 1.0)) {
    throw std::invalid_argument("crossover must lie in [0, 1]");
  }
  const double same = 0.5 * (1.0 - crossover);
  const double diff = 0.5 * crossover;
  return JointDistribution(2, 2, {same, diff, diff, same});
}

JointDistribution JointDistribution::uniform(std::size_t x_size,
                                             std::size_t y_size) {
  const double p = 1.0 / static_cast<double>(x_size * y_size);
  return JointDistribution(x_size, y_size,
                           std::vector<double>(x_size * y_size, p));
}

JointDistribution JointDistribution::copy(std::span<const double> x_pmf) {
  const std::size_t k = x_pmf.size();
  std::vector<double> pmf(k * k, 0.0);
  for (std::size_t a = 0; a < k; ++a) pmf[a * k + a] = x_pmf[a];
  return JointDistribution(k, k, std::move(pmf));
}

JointDistribution JointDistribution::independent(std::span<const double> x_pmf,
                                                 std::span<const double> y_pmf) {
  std::vector<double> pmf;
  pmf.reserve(x_pmf.size() * y_pmf.size());
  for (double px : x_pmf) {
    for (double py : y_pmf) pmf.push_back(px * py);
  }
  return JointDistribution(x_pmf.size(), y_pmf.size(), std::move(pmf));
}

// SourceFamily ---------------------------------------------------------------

SourceFamily::SourceFamily(std::vector<JointDistribution> components,
                           double epsilon1, double epsilon2)
    : components_(std::move(components)),
      epsilon1_(epsilon1),
      epsilon2_(epsilon2) {
  if (components_.empty()) {
    throw std::invalid_argument("source family needs at least one component");
  }
  if (!(epsilon1_ >= 0.0) || !(epsilon2_ >= epsilon1_)) {
    throw std::invalid_argument("need 0 <= epsilon1 <= epsilon2");
  }
  const std::size_t xs = components_.front().x_size();
  const std::size_t ys = components_.front().y_size();
  double min_joint = 1.0, max_joint = 0.0, min_y = 1.0, max_y = 0.0;
  log2_joint_.reserve(components_.size());
  for (const auto& c : components_) {
    if (c.x_size() != xs || c.y_size() != ys) {
      throw std::invalid_argument("family components must share alphabets");
    }
    std::vector<double> lj;
    lj.reserve(xs * ys);
    for (double p : c.masses()) {
      lj.push_back(safe_log2(p));
      min_joint = std::min(min_joint, p);
      max_joint = std::max(max_joint, p);
    }
    log2_joint_.push_back(std::move(lj));
    std::vector<double> lx, ly;
    for (double p : c.x_marginal()) lx.push_back(safe_log2(p));
    for (double p : c.y_marginal()) {
      ly.push_back(safe_log2(p));
      min_y = std::min(min_y, p);
      max_y = std::max(max_y, p);
    }
    log2_x_.push_back(std::move(lx));
    log2_y_.push_back(std::move(ly));
  }
  if (min_joint < epsilon1_ || max_joint > epsilon2_) {
    warnings_.push_back("joint masses span [" + format_double(min_joint) + ", " +
                        format_double(max_joint) + "], outside [epsilon1, epsilon2] = [" +
                        format_double(epsilon1_) + ", " + format_double(epsilon2_) + "]");
  }
  if (min_y < epsilon1_ || max_y > epsilon2_) {
    warnings_.push_back("Y-marginal masses span [" + format_double(min_y) + ", " +
                        format_double(max_y) + "], outside [epsilon1, epsilon2] = [" +
                        format_double(epsilon1_) + ", " + format_double(epsilon2_) + "]");
  }
}

SourceFamily SourceFamily::iid(const JointDistribution& dist, std::size_t n,
                               double epsilon1, double epsilon2) {
  return SourceFamily(std::vector<JointDistribution>(n, dist), epsilon1,
                      epsilon2);
}

SourceFamily SourceFamily::cycled(
    const std::vector<JointDistribution>& distributions, std::size_t n,
    double epsilon1, double epsilon2) {
  if (distributions.empty()) {
    throw std::invalid_argument("no distributions to cycle");
  }
  std::vector<JointDistribution> comps;
  comps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    comps.push_back(distributions[i % distributions.size()]);
  }
  return SourceFamily(std::move(comps), epsilon1, epsilon2);
}

// Entropies ------------------------------------------------------------------

double entropy(std::span<const double> pmf) {
  validate_pmf(pmf, "entropy");
  return entropy_unchecked(pmf);
}

double entropy(const JointDistribution& dist) {
  return entropy_unchecked(dist.masses());
}

MarginalsAndConditional marginals_and_conditional(const JointDistribution& dist) {
  MarginalsAndConditional out;
  out.x = dist.x_marginal();
  out.y = dist.y_marginal();
  out.x_given_y.assign(dist.x_size() * dist.y_size(), 0.0);
  for (std::size_t y = 0; y < dist.y_size(); ++y) {
    if (out.y[y] <= 0.0) {
      out.undefined_columns.push_back(y);
      for (std::size_t x = 0; x < dist.x_size(); ++x) {
        out.x_given_y[x * dist.y_size() + y] = std::nan("");
      }
      continue;
    }
    for (std::size_t x = 0; x < dist.x_size(); ++x) {
      out.x_given_y[x * dist.y_size() + y] = dist(x, y) / out.y[y];
    }
  }
  return out;
}

EntropyProfile entropy_profile(const SourceFamily& family) {
  EntropyProfile profile;
  CompensatedSum hxy, hy, hx;
  for (const auto& c : family.components()) {
    const double joint = entropy(c);
    const double ey = entropy_unchecked(c.y_marginal());
    const double ex = entropy_unchecked(c.x_marginal());
    profile.per_index_hxy.push_back(joint);
    profile.per_index_hy.push_back(ey);
    profile.per_index_hx.push_back(ex);
    hxy.add(joint);
    hy.add(ey);
    hx.add(ex);
  }
  const double n = static_cast<double>(family.length());
  profile.avg_hxy = hxy.value() / n;
  profile.avg_hy = hy.value() / n;
  profile.avg_hx = hx.value() / n;
  return profile;
}

// Sequences ------------------------------------------------------------------

SequencePair sample_sequence(const SourceFamily& family, Rng& rng) {
  SequencePair out;
  const std::size_t n = family.length();
  const std::size_t ys = family.y_size();
  out.u.resize(n);
  out.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto masses = family.component(i).masses();
    const double r = rng.uniform();
    double cumulative = 0.0;
    // Falls back to the last positive cell if rounding leaves r above the total.
    std::size_t chosen = masses.size();
    std::size_t last_positive = 0;
    for (std::size_t cell = 0; cell < masses.size(); ++cell) {
      if (masses[cell] > 0.0) last_positive = cell;
      cumulative += masses[cell];
      if (r < cumulative && masses[cell] > 0.0) {
        chosen = cell;
        break;
      }
    }
    if (chosen == masses.size()) chosen = last_positive;
    out.u[i] = static_cast<std::uint32_t>(chosen / ys);
    out.v[i] = static_cast<std::uint32_t>(chosen % ys);
  }
  return out;
}

SequencePair sample_sequence(const SourceFamily& family, std::uint64_t seed) {
  Rng rng(seed);
  return sample_sequence(family, rng);
}

double sequence_log_prob(const SourceFamily& family, const Sequence& u,
                         const Sequence& v) {
  check_symbols(u, family.length(), family.x_size(), "X");
  check_symbols(v, family.length(), family.y_size(), "Y");
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double l = family.log2_joint(i, u[i], v[i]);
    if (l == kNegInf) return kNegInf;
    total += l;
  }
  return total;
}

double sequence_log_prob_u(const SourceFamily& family, const Sequence& u) {
  check_symbols(u, family.length(), family.x_size(), "X");
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double l = family.log2_x(i, u[i]);
    if (l == kNegInf) return kNegInf;
    total += l;
  }
  return total;
}

double sequence_log_prob_v(const SourceFamily& family, const Sequence& v) {
  check_symbols(v, family.length(), family.y_size(), "Y");
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double l = family.log2_y(i, v[i]);
    if (l == kNegInf) return kNegInf;
    total += l;
  }
  return total;
}

double storage_savings(const EntropyProfile& profile) {
  if (!(profile.avg_hx > 0.0)) {
    throw std::invalid_argument("storage savings undefined for H_X = 0");
  }
  return 1.0 - (profile.avg_hxy - profile.avg_hy) / profile.avg_hx;
}

std::uint64_t sequence_index(const Sequence& seq, std::size_t alphabet) {
  std::uint64_t index = 0;
  for (auto s : seq) index = index * alphabet + s;
  return index;
}

Sequence index_to_sequence(std::uint64_t index, std::size_t length,
                           std::size_t alphabet) {
  Sequence seq(length);
  for (std::size_t i = length; i-- > 0;) {
    seq[i] = static_cast<std::uint32_t>(index % alphabet);
    index /= alphabet;
  }
  return seq;
}

std::uint64_t sequence_count(std::size_t alphabet, std::size_t length) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < length; ++i) {
    if (alphabet != 0 && count > kMax / alphabet) return kMax;
    count *= alphabet;
  }
  return count;
}

// Dependency graph -----------------------------------------------------------

bool DependencyGraph::has_edge(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
}

DependencyGraph build_dependency_graph(const NumericTable& table,
                                       double corr_threshold) {
  if (!(corr_threshold > 0.0 && corr_threshold < 1.0)) {
    throw std::invalid_argument("correlation threshold must lie in (0, 1)");
  }
  if (table.row_count() < 2) {
    throw std::invalid_argument("dependency graph needs at least 2 rows");
  }
  DependencyGraph graph;
  graph.feature_count = table.columns.size();
  std::vector<bool> constant(graph.feature_count);
  for (std::size_t i = 0; i < graph.feature_count; ++i) {
    if (table.columns[i].size() != table.row_count()) {
      throw std::invalid_argument("ragged numeric table");
    }
    constant[i] = is_constant(table.columns[i]);
    if (constant[i]) graph.constant_features.push_back(i);
  }
  for (std::size_t i = 0; i < graph.feature_count; ++i) {
    if (constant[i]) continue;
    for (std::size_t j = i + 1; j < graph.feature_count; ++j) {
      if (constant[j]) continue;
      const double r = pearson(table.columns[i], table.columns[j]);
      if (std::fabs(r) >= corr_threshold) graph.edges.emplace_back(i, j);
    }
  }
  return graph;
}

NumericTable read_numeric_table(const std::string& path) {
  const CsvDocument doc = read_csv(path);
  NumericTable table;
  table.column_names = doc.header;
  table.columns.assign(doc.header.size(), {});
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    for (std::size_t c = 0; c < doc.header.size(); ++c) {
      table.columns[c].push_back(parse_number(doc.rows[r][c], r + 1, doc.header[c]));
    }
  }
  return table;
}

// Serialization --------------------------------------------------------------

SourceFamily family_from_json(const nlohmann::json& doc,
                              std::size_t length_override) {
  const auto xs = doc.at("x_alphabet").get<std::size_t>();
  const auto ys = doc.at("y_alphabet").get<std::size_t>();
  const auto& comps = doc.at("components");
  if (!comps.is_array() || comps.empty()) {
    throw std::invalid_argument("'components' must be a non-empty array");
  }
  std::vector<JointDistribution> dists;
  for (const auto& c : comps) {
    dists.emplace_back(xs, ys, parse_pmf_json(c, xs, ys));
  }
  const double eps1 = doc.value("epsilon1", 0.0);
  const double eps2 = doc.value("epsilon2", 1.0);
  std::size_t n = doc.value("n", dists.size());
  if (length_override != 0) n = length_override;
  if (n == 0) throw std::invalid_argument("family length must be positive");
  return SourceFamily::cycled(dists, n, eps1, eps2);
}

nlohmann::json family_to_json(const SourceFamily& family) {
  nlohmann::json doc;
  doc["x_alphabet"] = family.x_size();
  doc["y_alphabet"] = family.y_size();
  doc["epsilon1"] = family.epsilon1();
  doc["epsilon2"] = family.epsilon2();
  doc["n"] = family.length();
  auto comps = nlohmann::json::array();
  for (const auto& c : family.components()) {
    auto rows = nlohmann::json::array();
    for (std::size_t x = 0; x < c.x_size(); ++x) {
      auto row = nlohmann::json::array();
      for (std::size_t y = 0; y < c.y_size(); ++y) row.push_back(c(x, y));
      rows.push_back(std::move(row));
    }
    comps.push_back(std::move(rows));
  }
  doc["components"] = std::move(comps);
  return doc;
}

SourceFamily load_family(const std::string& path, std::size_t length_override) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open family file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("family file '" + path + "': " + e.what());
  }
  return family_from_json(doc, length_override);
}

}  // namespace storebound
