#include "storebound/sw_coding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "storebound/csv.hpp"
#include "storebound/summation.hpp"

namespace storebound {

namespace {

constexpr double kWindowCheckTolerance = 1e-6;

// Visits every length-`length` sequence in lexicographic order together with
// Σ_i weight(i, s_i). Prefix sums are refreshed only from the first changed
// position, so the per-sequence cost is amortized O(1).
template <class Weight, class Visit>
void enumerate_log_sums(std::size_t length, std::size_t alphabet, Weight&& weight,
                        Visit&& visit) {
  std::vector<std::uint32_t> digits(length, 0);
  std::vector<double> prefix(length + 1, 0.0);
  for (std::size_t i = 0; i < length; ++i) {
    prefix[i + 1] = prefix[i] + weight(i, 0u);
  }
  std::uint64_t index = 0;
  for (;;) {
    visit(index, prefix[length]);
    ++index;
    std::size_t pos = length;
    for (;;) {
      if (pos == 0) return;
      --pos;
      if (++digits[pos] < alphabet) break;
      digits[pos] = 0;
    }
    for (std::size_t i = pos; i < length; ++i) {
      prefix[i + 1] = prefix[i] + weight(i, digits[i]);
    }
  }
}

std::uint64_t checked_product(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

void require_within_cap(std::uint64_t count, std::uint64_t cap, const char* what) {
  if (count > cap) {
    throw EnumerationTooLarge(std::string(what) + " needs " +
                              std::to_string(count) + " outcomes, cap is " +
                              std::to_string(cap));
  }
}

bool in_window(double log2_p, double lo, double hi) {
  return log2_p >= lo - kMembershipTolerance && log2_p <= hi + kMembershipTolerance;
}

// Y-sequence digits for an index, reused by the per-y loops.
Sequence y_digits(std::uint64_t y_index, std::size_t n, std::size_t alphabet) {
  return index_to_sequence(y_index, n, alphabet);
}

struct AchievabilityContext {
  TypicalSet ey;
  TypicalSet exy;
  HeavySliceReport heavy;
  EntropyProfile profile;
};

AchievabilityContext build_context(const SourceFamily& family, double epsilon,
                                   std::uint64_t cap) {
  AchievabilityContext ctx;
  ctx.ey = build_typical_set_y(family, epsilon, cap);
  ctx.exy = build_typical_set_xy(family, epsilon, cap);
  ctx.heavy = heavy_slice_set(ctx.exy, ctx.ey, family, epsilon);
  ctx.profile = entropy_profile(family);
  return ctx;
}

DependentEncoder encoder_from_context(const SourceFamily& family, double epsilon,
                                      double rate,
                                      const AchievabilityContext& ctx) {
  const std::size_t n = family.length();
  const Codebook codebook = make_codebook(n, rate);
  const std::uint64_t x_count = sequence_count(family.x_size(), n);
  const std::uint64_t y_count = sequence_count(family.y_size(), n);
  if (codebook.size > x_count) {
    throw ImpossibleInjection("codebook of size " + std::to_string(codebook.size) +
                              " cannot inject into " + std::to_string(x_count) +
                              " X-sequences");
  }

  std::vector<SideInformationClass> classes(y_count,
                                            SideInformationClass::kAtypical);
  for (auto y : ctx.ey.keys) classes[y] = SideInformationClass::kReliable;
  for (auto y : ctx.heavy.heavy) classes[y] = SideInformationClass::kHeavy;

  const std::uint64_t c = codebook.size;
  std::vector<std::uint32_t> images(y_count * c);
  std::uint64_t truncated_slices = 0;
  for (std::uint64_t y = 0; y < y_count; ++y) {
    std::uint32_t* out = images.data() + y * c;
    if (classes[y] != SideInformationClass::kReliable) {
      for (std::uint64_t j = 0; j < c; ++j) out[j] = static_cast<std::uint32_t>(j);
      continue;
    }
    const auto slice = slice_a_y(ctx.exy, y);
    const std::uint64_t take = std::min<std::uint64_t>(c, slice.size());
    if (slice.size() > c) ++truncated_slices;
    for (std::uint64_t j = 0; j < take; ++j) {
      out[j] = static_cast<std::uint32_t>(slice[j]);
    }
    // Pad with the lexicographically-first sequences outside the slice.
    std::uint64_t filled = take;
    std::size_t cursor = 0;
    for (std::uint64_t x = 0; filled < c; ++x) {
      while (cursor < slice.size() && slice[cursor] < x) ++cursor;
      if (cursor < slice.size() && slice[cursor] == x) continue;
      out[filled++] = static_cast<std::uint32_t>(x);
    }
  }

  DependentEncoder encoder(codebook, n, family.x_size(), family.y_size(),
                           std::move(images), std::move(classes));
  const double recommended =
      ctx.profile.avg_hxy - ctx.profile.avg_hy + 5.0 * epsilon;
  if (!(rate > recommended)) {
    encoder.add_warning("rate " + format_double(rate) +
                        " does not exceed H_XY - H_Y + 5 epsilon = " +
                        format_double(recommended));
  }
  if (truncated_slices > 0) {
    encoder.add_warning(std::to_string(truncated_slices) +
                        " reliable slices exceed the codebook size and were truncated");
  }
  if (!ctx.heavy.count_within_bound) {
    encoder.add_warning("heavy-slice count exceeds 2^{n(H_Y - 3 epsilon)}");
  }
  return encoder;
}

void check_family_matches(const DependentEncoder& encoder,
                          const SourceFamily& family) {
  if (encoder.n() != family.length() || encoder.x_alphabet() != family.x_size() ||
      encoder.y_alphabet() != family.y_size()) {
    throw std::invalid_argument("encoder and family dimensions differ");
  }
}

const char* class_name(SideInformationClass c) {
  switch (c) {
    case SideInformationClass::kReliable:
      return "reliable";
    case SideInformationClass::kHeavy:
      return "heavy";
    case SideInformationClass::kAtypical:
      return "atypical";
  }
  return "atypical";
}

SideInformationClass class_from_name(const std::string& s) {
  if (s == "reliable") return SideInformationClass::kReliable;
  if (s == "heavy") return SideInformationClass::kHeavy;
  if (s == "atypical") return SideInformationClass::kAtypical;
  throw std::invalid_argument("unknown side-information class '" + s + "'");
}

}  // namespace

// TypicalSet -----------------------------------------------------------------

bool TypicalSet::contains(std::uint64_t key) const {
  return std::binary_search(keys.begin(), keys.end(), key);
}

double TypicalSet::log2_count_lower() const {
  if (epsilon >= 1.0) return kNegInf;
  const double nd = static_cast<double>(n);
  return std::log2(1.0 - epsilon) + nd * (target_entropy - epsilon);
}

double TypicalSet::log2_count_upper() const {
  return static_cast<double>(n) * (target_entropy + epsilon);
}

bool TypicalSet::count_in_window() const {
  const double log2_count =
      keys.empty() ? kNegInf : std::log2(static_cast<double>(keys.size()));
  return log2_count >= log2_count_lower() - kWindowCheckTolerance &&
         log2_count <= log2_count_upper() + kWindowCheckTolerance;
}

TypicalSet build_typical_set_y(const SourceFamily& family, double epsilon,
                               std::uint64_t cap) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const std::size_t n = family.length();
  const std::uint64_t count = sequence_count(family.y_size(), n);
  require_within_cap(count, cap, "Y typical set");

  TypicalSet set;
  set.n = n;
  set.epsilon = epsilon;
  set.target_entropy = entropy_profile(family).avg_hy;
  const double nd = static_cast<double>(n);
  const double lo = -nd * (set.target_entropy + epsilon);
  const double hi = -nd * (set.target_entropy - epsilon);
  CompensatedSum mass;
  enumerate_log_sums(
      n, family.y_size(),
      [&](std::size_t i, std::uint32_t s) { return family.log2_y(i, s); },
      [&](std::uint64_t index, double lp) {
        if (in_window(lp, lo, hi)) {
          set.keys.push_back(index);
          set.log2_probs.push_back(lp);
          mass.add_log2(lp);
        }
      });
  set.total_mass = mass.value();
  if (set.mass_condition() && !set.count_in_window()) {
    throw std::logic_error("Y typical set violates its size window");
  }
  return set;
}

TypicalSet build_typical_set_xy(const SourceFamily& family, double epsilon,
                                std::uint64_t cap) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const std::size_t n = family.length();
  const std::uint64_t x_count = sequence_count(family.x_size(), n);
  const std::uint64_t y_count = sequence_count(family.y_size(), n);
  require_within_cap(checked_product(x_count, y_count), cap, "joint typical set");

  TypicalSet set;
  set.n = n;
  set.epsilon = epsilon;
  set.joint = true;
  set.x_sequence_count = x_count;
  set.target_entropy = entropy_profile(family).avg_hxy;
  const double nd = static_cast<double>(n);
  const double lo = -nd * (set.target_entropy + epsilon);
  const double hi = -nd * (set.target_entropy - epsilon);
  CompensatedSum mass;
  for (std::uint64_t y = 0; y < y_count; ++y) {
    const Sequence yd = y_digits(y, n, family.y_size());
    const std::uint64_t base = y * x_count;
    enumerate_log_sums(
        n, family.x_size(),
        [&](std::size_t i, std::uint32_t s) { return family.log2_joint(i, s, yd[i]); },
        [&](std::uint64_t x, double lp) {
          if (in_window(lp, lo, hi)) {
            set.keys.push_back(base + x);
            set.log2_probs.push_back(lp);
            mass.add_log2(lp);
          }
        });
  }
  set.total_mass = mass.value();
  if (set.mass_condition() && !set.count_in_window()) {
    throw std::logic_error("joint typical set violates its size window");
  }
  return set;
}

std::vector<std::uint64_t> slice_a_y(const TypicalSet& exy, std::uint64_t y_index) {
  if (!exy.joint) throw std::invalid_argument("slices need a joint typical set");
  const std::uint64_t lo_key = y_index * exy.x_sequence_count;
  const std::uint64_t hi_key = lo_key + exy.x_sequence_count;
  const auto first = std::lower_bound(exy.keys.begin(), exy.keys.end(), lo_key);
  const auto last = std::lower_bound(first, exy.keys.end(), hi_key);
  std::vector<std::uint64_t> xs;
  xs.reserve(static_cast<std::size_t>(last - first));
  for (auto it = first; it != last; ++it) xs.push_back(*it - lo_key);
  return xs;
}

std::vector<std::uint64_t> slice_a_y(const TypicalSet& exy, const Sequence& y,
                                     std::size_t y_alphabet) {
  for (auto s : y) {
    if (s >= y_alphabet) throw std::invalid_argument("y symbol outside alphabet");
  }
  return slice_a_y(exy, sequence_index(y, y_alphabet));
}

HeavySliceReport heavy_slice_set(const TypicalSet& exy, const TypicalSet& ey,
                                 const SourceFamily& family, double epsilon) {
  if (!exy.joint || ey.joint) {
    throw std::invalid_argument("heavy_slice_set expects (E_XY, E_Y)");
  }
  const EntropyProfile profile = entropy_profile(family);
  const double nd = static_cast<double>(family.length());
  HeavySliceReport report;
  report.log2_slice_threshold =
      nd * (profile.avg_hxy - profile.avg_hy + 5.0 * epsilon);
  report.log2_count_bound = nd * (profile.avg_hy - 3.0 * epsilon);
  for (auto y : ey.keys) {
    const std::uint64_t lo_key = y * exy.x_sequence_count;
    const auto first = std::lower_bound(exy.keys.begin(), exy.keys.end(), lo_key);
    const auto last =
        std::lower_bound(first, exy.keys.end(), lo_key + exy.x_sequence_count);
    const auto slice_size = static_cast<double>(last - first);
    if (slice_size > 0 &&
        std::log2(slice_size) >= report.log2_slice_threshold - kMembershipTolerance) {
      report.heavy.push_back(y);
    }
  }
  if (!report.heavy.empty()) {
    report.count_within_bound =
        std::log2(static_cast<double>(report.heavy.size())) <=
        report.log2_count_bound + kMembershipTolerance;
  }
  return report;
}

// Codebook / encoder ---------------------------------------------------------

Codebook make_codebook(std::size_t n, double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("rate must lie in (0, 1]");
  }
  if (n == 0) throw std::invalid_argument("block length must be positive");
  Codebook cb;
  cb.n = n;
  cb.rate = rate;
  cb.log2_size = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n) * rate - kMembershipTolerance));
  if (cb.log2_size >= 63) throw EnumerationTooLarge("codebook too large");
  cb.size = std::uint64_t{1} << cb.log2_size;
  return cb;
}

DependentEncoder::DependentEncoder(Codebook codebook, std::size_t n,
                                   std::size_t x_alphabet, std::size_t y_alphabet,
                                   std::vector<std::uint32_t> images,
                                   std::vector<SideInformationClass> classes)
    : codebook_(codebook),
      n_(n),
      x_alphabet_(x_alphabet),
      y_alphabet_(y_alphabet),
      images_(std::move(images)),
      classes_(std::move(classes)) {
  const std::uint64_t y_count = sequence_count(y_alphabet_, n_);
  const std::uint64_t x_count = sequence_count(x_alphabet_, n_);
  if (classes_.size() != y_count || images_.size() != y_count * codebook_.size) {
    throw std::invalid_argument("encoder tables do not match dimensions");
  }
  sorted_images_ = images_;
  for (std::uint64_t y = 0; y < y_count; ++y) {
    auto* first = sorted_images_.data() + y * codebook_.size;
    auto* last = first + codebook_.size;
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) {
      throw std::invalid_argument("f_y is not injective for y index " +
                                  std::to_string(y));
    }
    if (codebook_.size > 0 && *(last - 1) >= x_count) {
      throw std::invalid_argument("encoder image outside the X-sequence space");
    }
  }
}

bool DependentEncoder::covers(std::uint64_t y_index, std::uint64_t x_index) const {
  const auto* first = sorted_images_.data() + y_index * codebook_.size;
  return std::binary_search(first, first + codebook_.size, x_index);
}

std::uint64_t DependentEncoder::count(SideInformationClass c) const {
  return static_cast<std::uint64_t>(std::count(classes_.begin(), classes_.end(), c));
}

nlohmann::json DependentEncoder::to_json() const {
  nlohmann::json doc;
  doc["n"] = n_;
  doc["rate"] = codebook_.rate;
  doc["codebook_size"] = codebook_.size;
  doc["x_alphabet"] = x_alphabet_;
  doc["y_alphabet"] = y_alphabet_;
  nlohmann::json maps = nlohmann::json::object();
  nlohmann::json classes = nlohmann::json::object();
  for (std::uint64_t y = 0; y < classes_.size(); ++y) {
    const auto img = images(y);
    maps[std::to_string(y)] = std::vector<std::uint32_t>(img.begin(), img.end());
    classes[std::to_string(y)] = class_name(classes_[y]);
  }
  doc["maps"] = std::move(maps);
  doc["classes"] = std::move(classes);
  return doc;
}

DependentEncoder DependentEncoder::from_json(const nlohmann::json& doc) {
  const auto n = doc.at("n").get<std::size_t>();
  const Codebook cb = make_codebook(n, doc.at("rate").get<double>());
  if (cb.size != doc.at("codebook_size").get<std::uint64_t>()) {
    throw std::invalid_argument("codebook_size inconsistent with rate");
  }
  const auto xa = doc.at("x_alphabet").get<std::size_t>();
  const auto ya = doc.at("y_alphabet").get<std::size_t>();
  const std::uint64_t y_count = sequence_count(ya, n);
  std::vector<std::uint32_t> images(y_count * cb.size);
  std::vector<SideInformationClass> classes(y_count, SideInformationClass::kAtypical);
  const auto& maps = doc.at("maps");
  const auto& cls = doc.at("classes");
  for (std::uint64_t y = 0; y < y_count; ++y) {
    const auto key = std::to_string(y);
    const auto img = maps.at(key).get<std::vector<std::uint32_t>>();
    if (img.size() != cb.size) {
      throw std::invalid_argument("map for y index " + key + " has wrong length");
    }
    std::copy(img.begin(), img.end(), images.begin() + static_cast<std::ptrdiff_t>(y * cb.size));
    classes[y] = class_from_name(cls.at(key).get<std::string>());
  }
  return DependentEncoder(cb, n, xa, ya, std::move(images), std::move(classes));
}

DependentEncoder construct_achievability_encoder(const SourceFamily& family,
                                                 double epsilon, double rate,
                                                 std::uint64_t cap) {
  // Fail on an impossible codebook before any enumeration.
  const Codebook cb = make_codebook(family.length(), rate);
  if (cb.size > sequence_count(family.x_size(), family.length())) {
    throw ImpossibleInjection("codebook larger than the X-sequence space");
  }
  const AchievabilityContext ctx = build_context(family, epsilon, cap);
  return encoder_from_context(family, epsilon, rate, ctx);
}

// Error probabilities --------------------------------------------------------

double exact_error(const DependentEncoder& encoder, const SourceFamily& family,
                   std::uint64_t cap) {
  check_family_matches(encoder, family);
  const std::size_t n = family.length();
  const std::uint64_t x_count = sequence_count(family.x_size(), n);
  const std::uint64_t y_count = sequence_count(family.y_size(), n);
  require_within_cap(checked_product(x_count, y_count), cap, "exact error");

  std::vector<char> covered(x_count, 0);
  CompensatedSum error;
  for (std::uint64_t y = 0; y < y_count; ++y) {
    const auto img = encoder.images(y);
    for (auto x : img) covered[x] = 1;
    const Sequence yd = y_digits(y, n, family.y_size());
    enumerate_log_sums(
        n, family.x_size(),
        [&](std::size_t i, std::uint32_t s) { return family.log2_joint(i, s, yd[i]); },
        [&](std::uint64_t x, double lp) {
          if (!covered[x]) error.add_log2(lp);
        });
    for (auto x : img) covered[x] = 0;
  }
  return std::clamp(error.value(), 0.0, 1.0);
}

double optimal_error(const SourceFamily& family, double rate, std::uint64_t cap) {
  const std::size_t n = family.length();
  const Codebook cb = make_codebook(n, rate);
  const std::uint64_t x_count = sequence_count(family.x_size(), n);
  const std::uint64_t y_count = sequence_count(family.y_size(), n);
  if (cb.size > x_count) {
    throw ImpossibleInjection("codebook larger than the X-sequence space");
  }
  require_within_cap(checked_product(x_count, y_count), cap, "optimal error");

  std::vector<double> log2_mass(x_count);
  std::vector<std::uint64_t> order(x_count);
  std::vector<char> kept(x_count, 0);
  CompensatedSum error;
  for (std::uint64_t y = 0; y < y_count; ++y) {
    const Sequence yd = y_digits(y, n, family.y_size());
    enumerate_log_sums(
        n, family.x_size(),
        [&](std::size_t i, std::uint32_t s) { return family.log2_joint(i, s, yd[i]); },
        [&](std::uint64_t x, double lp) { log2_mass[x] = lp; });
    std::iota(order.begin(), order.end(), std::uint64_t{0});
    const auto keep = static_cast<std::ptrdiff_t>(cb.size);
    std::nth_element(order.begin(), order.begin() + keep - 1, order.end(),
                     [&](std::uint64_t a, std::uint64_t b) {
                       if (log2_mass[a] != log2_mass[b]) return log2_mass[a] > log2_mass[b];
                       return a < b;
                     });
    for (std::ptrdiff_t j = 0; j < keep; ++j) kept[order[j]] = 1;
    // Uncovered mass summed in x order so the result does not depend on the
    // selection order.
    for (std::uint64_t x = 0; x < x_count; ++x) {
      if (!kept[x]) error.add_log2(log2_mass[x]);
    }
    for (std::ptrdiff_t j = 0; j < keep; ++j) kept[order[j]] = 0;
  }
  return std::clamp(error.value(), 0.0, 1.0);
}

MonteCarloEstimate wilson_interval(std::uint64_t failures, std::uint64_t trials) {
  MonteCarloEstimate est;
  est.trials = trials;
  est.failures = failures;
  if (trials == 0) return est;
  constexpr double z = 1.959963984540054;
  const double t = static_cast<double>(trials);
  const double phat = static_cast<double>(failures) / t;
  const double denom = 1.0 + z * z / t;
  const double center = (phat + z * z / (2.0 * t)) / denom;
  const double half =
      z / denom * std::sqrt(phat * (1.0 - phat) / t + z * z / (4.0 * t * t));
  est.estimate = phat;
  est.half_width = half;
  est.ci_low = std::max(0.0, center - half);
  est.ci_high = std::min(1.0, center + half);
  return est;
}

MonteCarloEstimate monte_carlo_error(const DependentEncoder& encoder,
                                     const SourceFamily& family,
                                     std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("need at least one trial");
  check_family_matches(encoder, family);
  Rng rng(seed);
  std::uint64_t failures = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const SequencePair pair = sample_sequence(family, rng);
    const auto x = sequence_index(pair.u, family.x_size());
    const auto y = sequence_index(pair.v, family.y_size());
    if (!encoder.covers(y, x)) ++failures;
  }
  return wilson_interval(failures, trials);
}

// Sweep ----------------------------------------------------------------------

bool sweep_needs_sampling(const SourceFamily& family, const SweepOptions& options) {
  const std::uint64_t joint =
      checked_product(sequence_count(family.x_size(), family.length()),
                      sequence_count(family.y_size(), family.length()));
  return joint > options.exact_cap;
}

std::vector<SweepRow> threshold_sweep(const SourceFamily& family, double epsilon,
                                      const std::vector<double>& rates,
                                      const SweepOptions& options) {
  if (rates.empty()) throw std::invalid_argument("rate grid is empty");
  for (double r : rates) make_codebook(family.length(), r);
  const AchievabilityContext ctx =
      build_context(family, epsilon, options.enumeration_cap);
  const bool sampled = sweep_needs_sampling(family, options);
  std::vector<SweepRow> rows;
  rows.reserve(rates.size());
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const DependentEncoder encoder =
        encoder_from_context(family, epsilon, rates[k], ctx);
    SweepRow row;
    row.rate = rates[k];
    row.n = family.length();
    row.epsilon = epsilon;
    if (!sampled) {
      row.error_constructed = exact_error(encoder, family, options.exact_cap);
      row.error_optimal = optimal_error(family, rates[k], options.exact_cap);
      row.ci_low = row.ci_high = row.error_constructed;
      row.exact = true;
    } else {
      const auto est = monte_carlo_error(encoder, family, options.trials,
                                         derive_seed(options.seed, k));
      row.error_constructed = est.estimate;
      row.error_optimal = std::numeric_limits<double>::quiet_NaN();
      row.ci_low = est.ci_low;
      row.ci_high = est.ci_high;
      row.exact = false;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "rate,n,epsilon,error_constructed,error_optimal,ci_low,ci_high\n";
  for (const auto& r : rows) {
    out << format_double(r.rate) << ',' << r.n << ',' << format_double(r.epsilon)
        << ',' << format_double(r.error_constructed) << ','
        << format_double(r.error_optimal) << ',' << format_double(r.ci_low) << ','
        << format_double(r.ci_high) << '\n';
  }
}

}  // namespace storebound
