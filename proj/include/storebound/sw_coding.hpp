#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "storebound/source_model.hpp"

namespace storebound {

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 26;

// Log-domain slack for typical-set window membership.
inline constexpr double kMembershipTolerance = 1e-9;

class EnumerationTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ImpossibleInjection : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exhaustively enumerated epsilon-typical set, either over Y-sequences or over
// pairs (x, y).
//
// Members are stored by key in ascending order. For a Y set the key is the
// sequence index of y. For a joint set the key is y_index * |X|^n + x_index,
// so members sharing a y are contiguous and ordered by x.
struct TypicalSet {
  std::size_t n = 0;
  double epsilon = 0.0;
  double target_entropy = 0.0;
  bool joint = false;
  std::uint64_t x_sequence_count = 0;  // |X|^n for joint sets, else 0
  std::vector<std::uint64_t> keys;
  std::vector<double> log2_probs;
  double total_mass = 0.0;

  std::size_t size() const { return keys.size(); }
  bool empty() const { return keys.empty(); }

  bool contains(std::uint64_t key) const;
  std::uint64_t y_of(std::size_t member) const {
    return joint ? keys[member] / x_sequence_count : keys[member];
  }
  std::uint64_t x_of(std::size_t member) const {
    return keys[member] % x_sequence_count;
  }

  bool mass_condition() const { return total_mass >= 1.0 - epsilon; }
  // log2 of (1-eps) 2^{n(H-eps)} and of 2^{n(H+eps)}.
  double log2_count_lower() const;
  double log2_count_upper() const;
  // Size window check; only meaningful (and guaranteed) when mass_condition().
  bool count_in_window() const;
};

TypicalSet build_typical_set_y(const SourceFamily& family, double epsilon,
                               std::uint64_t cap = kDefaultEnumerationCap);
TypicalSet build_typical_set_xy(const SourceFamily& family, double epsilon,
                                std::uint64_t cap = kDefaultEnumerationCap);

// X-sequence indices x with (x, y) in the joint typical set, ascending.
std::vector<std::uint64_t> slice_a_y(const TypicalSet& exy, std::uint64_t y_index);
std::vector<std::uint64_t> slice_a_y(const TypicalSet& exy, const Sequence& y,
                                     std::size_t y_alphabet);

struct HeavySliceReport {
  std::vector<std::uint64_t> heavy;  // y indices, ascending
  double log2_slice_threshold = 0.0;  // n(H_XY - H_Y + 5 eps)
  double log2_count_bound = 0.0;      // n(H_Y - 3 eps)
  // #B_Y <= 2^{n(H_Y - 3 eps)}; a finite-n diagnostic, not an error.
  bool count_within_bound = true;
};

HeavySliceReport heavy_slice_set(const TypicalSet& exy, const TypicalSet& ey,
                                 const SourceFamily& family, double epsilon);

// Canonical binary code: the first 2^{ceil(nR)} binary n-strings in
// lexicographic order.
struct Codebook {
  std::size_t n = 0;
  double rate = 0.0;
  std::size_t log2_size = 0;
  std::uint64_t size = 0;

  Sequence codeword(std::uint64_t j) const {
    return index_to_sequence(j, n, 2);
  }
};

// rate must lie in (0, 1].
Codebook make_codebook(std::size_t n, double rate);

enum class SideInformationClass : std::uint8_t {
  kReliable,  // y in E_Y \ B_Y
  kHeavy,     // y in B_Y
  kAtypical,  // y not in E_Y
};

// Family {f_y} of injective maps from codeword index to X-sequence index, one
// per y-sequence.
class DependentEncoder {
 public:
  DependentEncoder(Codebook codebook, std::size_t n, std::size_t x_alphabet,
                   std::size_t y_alphabet, std::vector<std::uint32_t> images,
                   std::vector<SideInformationClass> classes);

  const Codebook& codebook() const { return codebook_; }
  std::size_t n() const { return n_; }
  std::size_t x_alphabet() const { return x_alphabet_; }
  std::size_t y_alphabet() const { return y_alphabet_; }
  std::uint64_t y_sequence_count() const { return classes_.size(); }

  std::uint32_t image(std::uint64_t y_index, std::uint64_t codeword) const {
    return images_[y_index * codebook_.size + codeword];
  }
  std::span<const std::uint32_t> images(std::uint64_t y_index) const {
    return {images_.data() + y_index * codebook_.size, codebook_.size};
  }
  bool covers(std::uint64_t y_index, std::uint64_t x_index) const;
  SideInformationClass classification(std::uint64_t y_index) const {
    return classes_[y_index];
  }
  std::uint64_t count(SideInformationClass c) const;

  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  // {"n", "rate", "codebook_size", "x_alphabet", "y_alphabet",
  //  "maps": {"<y index>": [x index per codeword]},
  //  "classes": {"<y index>": "reliable"|"heavy"|"atypical"}}
  nlohmann::json to_json() const;
  static DependentEncoder from_json(const nlohmann::json& doc);

 private:
  Codebook codebook_;
  std::size_t n_;
  std::size_t x_alphabet_;
  std::size_t y_alphabet_;
  std::vector<std::uint32_t> images_;
  std::vector<std::uint32_t> sorted_images_;
  std::vector<SideInformationClass> classes_;
  std::vector<std::string> warnings_;
};

// Achievability construction: for y in E_Y \ B_Y, codeword j maps to the j-th
// element of A_y (ascending), padded with the lexicographically-first unused
// X-sequences when #A_y < |C|. Every other y gets codeword j -> sequence j.
DependentEncoder construct_achievability_encoder(
    const SourceFamily& family, double epsilon, double rate,
    std::uint64_t cap = kDefaultEnumerationCap);

// q(f, C) = P(U not in f_V(C)), by exhaustive summation.
double exact_error(const DependentEncoder& encoder, const SourceFamily& family,
                   std::uint64_t cap = kDefaultEnumerationCap);

// Minimum of q over all Y-dependent encoders with a codebook of this rate:
// per y keep the |C| largest masses p(x, y).
double optimal_error(const SourceFamily& family, double rate,
                     std::uint64_t cap = kDefaultEnumerationCap);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // Wilson 95%
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
};

MonteCarloEstimate wilson_interval(std::uint64_t failures, std::uint64_t trials);

MonteCarloEstimate monte_carlo_error(const DependentEncoder& encoder,
                                     const SourceFamily& family,
                                     std::uint64_t trials, std::uint64_t seed);

struct SweepOptions {
  // Caps the exhaustive typical-set and encoder construction.
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  // Above this many joint outcomes the constructed-encoder error is estimated
  // by Monte Carlo and the optimal error is reported as NaN.
  std::uint64_t exact_cap = kDefaultEnumerationCap;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
};

struct SweepRow {
  double rate = 0.0;
  std::size_t n = 0;
  double epsilon = 0.0;
  double error_constructed = 0.0;
  double error_optimal = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool exact = true;
};

// True when threshold_sweep would need Monte Carlo (and therefore a seed).
bool sweep_needs_sampling(const SourceFamily& family, const SweepOptions& options);

std::vector<SweepRow> threshold_sweep(const SourceFamily& family, double epsilon,
                                      const std::vector<double>& rates,
                                      const SweepOptions& options);

// Columns: rate,n,epsilon,error_constructed,error_optimal,ci_low,ci_high
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace storebound
