#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "storebound/sw_coding.hpp"
#include "test_support.hpp"

using namespace storebound;
using storebound::testing::random_joint;

namespace {

SourceFamily bsc(std::size_t n) {
  return SourceFamily::iid(JointDistribution::binary_symmetric(0.11), n);
}

double joint_mass(const SourceFamily& fam, std::uint64_t x, std::uint64_t y) {
  const std::size_t n = fam.length();
  return std::exp2(sequence_log_prob(fam, index_to_sequence(x, n, fam.x_size()),
                                     index_to_sequence(y, n, fam.y_size())));
}

// Minimum error over every family of injections C -> X^n, one per y, found by
// walking the full product of ordered injections.
double brute_force_optimal(const SourceFamily& fam, std::uint64_t codebook_size) {
  const std::size_t n = fam.length();
  const std::uint64_t xs = sequence_count(fam.x_size(), n);
  const std::uint64_t ys = sequence_count(fam.y_size(), n);
  std::vector<std::vector<std::uint64_t>> injections;
  std::vector<std::uint64_t> current;
  std::vector<bool> used(xs, false);
  std::function<void()> grow = [&] {
    if (current.size() == codebook_size) {
      injections.push_back(current);
      return;
    }
    for (std::uint64_t x = 0; x < xs; ++x) {
      if (used[x]) continue;
      used[x] = true;
      current.push_back(x);
      grow();
      current.pop_back();
      used[x] = false;
    }
  };
  grow();

  std::vector<std::size_t> choice(ys, 0);
  double best = 2.0;
  for (;;) {
    double covered = 0.0;
    for (std::uint64_t y = 0; y < ys; ++y) {
      for (auto x : injections[choice[y]]) covered += joint_mass(fam, x, y);
    }
    best = std::min(best, 1.0 - covered);
    std::size_t pos = 0;
    while (pos < ys && ++choice[pos] == injections.size()) choice[pos++] = 0;
    if (pos == ys) break;
  }
  return best;
}

}  // namespace

TEST(TypicalSetY, UniformKeepsEverything) {
  const auto fam = SourceFamily::iid(JointDistribution::uniform(2, 2), 4);
  const auto ey = build_typical_set_y(fam, 0.1);
  EXPECT_EQ(ey.size(), 16u);
  EXPECT_NEAR(ey.total_mass, 1.0, 1e-12);
}

TEST(TypicalSetY, SkewedSingleSymbolIsEmpty) {
  const std::vector<double> x{0.5, 0.5}, y{0.9, 0.1};
  const auto fam = SourceFamily::iid(JointDistribution::independent(x, y), 1);
  const auto ey = build_typical_set_y(fam, 0.01);
  EXPECT_TRUE(ey.empty());
  EXPECT_DOUBLE_EQ(ey.total_mass, 0.0);
}

TEST(TypicalSetY, SandwichWhenMassConditionHolds) {
  const std::vector<double> x{0.5, 0.5}, y{0.7, 0.3};
  const auto fam = SourceFamily::iid(JointDistribution::independent(x, y), 10);
  const auto ey = build_typical_set_y(fam, 0.3);
  ASSERT_TRUE(ey.mass_condition());
  EXPECT_TRUE(ey.count_in_window());
}

TEST(TypicalSetY, SandwichProperty) {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    const double eps = 0.05 + 0.4 * rng.uniform();
    const auto fam =
        SourceFamily::cycled({random_joint(rng, 2, 2), random_joint(rng, 2, 2)}, n);
    const auto ey = build_typical_set_y(fam, eps);
    const auto exy = build_typical_set_xy(fam, eps);
    if (ey.mass_condition()) EXPECT_TRUE(ey.count_in_window());
    if (exy.mass_condition()) EXPECT_TRUE(exy.count_in_window());
    EXPECT_LE(ey.total_mass, 1.0 + 1e-12);
    // Every member's probability must sit inside the window.
    const double h = ey.target_entropy;
    for (double lp : ey.log2_probs) {
      EXPECT_GE(lp, -static_cast<double>(n) * (h + eps) - 1e-9);
      EXPECT_LE(lp, -static_cast<double>(n) * (h - eps) + 1e-9);
    }
  }
}

TEST(TypicalSetXY, Examples) {
  const auto uni = SourceFamily::iid(JointDistribution::uniform(2, 2), 3);
  const auto all = build_typical_set_xy(uni, 0.1);
  EXPECT_EQ(all.size(), 64u);
  EXPECT_NEAR(all.total_mass, 1.0, 1e-12);

  const auto odd = SourceFamily::iid(JointDistribution(2, 2, {0.6, 0.25, 0.1, 0.05}), 1);
  EXPECT_TRUE(build_typical_set_xy(odd, 0.01).empty());

  // -log2 p = 8 log2(1/0.445) + 3.016 k for k disagreements, so the window
  // [10, 14] admits exactly k = 1.
  const auto exy = build_typical_set_xy(bsc(8), 0.25);
  EXPECT_EQ(exy.size(), 256u * 8u);
  EXPECT_NEAR(exy.total_mass, 8 * 0.11 * std::pow(0.89, 7), 1e-12);
  EXPECT_FALSE(exy.mass_condition());
}

TEST(TypicalSet, EnumerationCap) {
  EXPECT_THROW(build_typical_set_xy(bsc(8), 0.25, 1000), EnumerationTooLarge);
  EXPECT_THROW(build_typical_set_y(bsc(8), 0.0), std::invalid_argument);
}

TEST(Slice, MembersShareTheirY) {
  const auto fam = bsc(6);
  const auto exy = build_typical_set_xy(fam, 0.3);
  std::size_t total = 0;
  for (std::uint64_t y = 0; y < 64; ++y) {
    const auto slice = slice_a_y(exy, y);
    EXPECT_TRUE(std::is_sorted(slice.begin(), slice.end()));
    for (auto x : slice) EXPECT_TRUE(exy.contains(y * 64 + x));
    total += slice.size();
  }
  EXPECT_EQ(total, exy.size());
  EXPECT_EQ(slice_a_y(exy, Sequence(6, 0), 2), slice_a_y(exy, 0));
}

TEST(Slice, UntouchedYIsEmpty) {
  const std::vector<double> px{0.5, 0.5}, py{0.9, 0.1};
  const auto fam = SourceFamily::iid(JointDistribution::independent(px, py), 1);
  const auto exy = build_typical_set_xy(fam, 0.01);
  EXPECT_TRUE(slice_a_y(exy, 0).empty());
  EXPECT_TRUE(slice_a_y(exy, 1).empty());
}

TEST(HeavySlices, Examples) {
  const auto uni = SourceFamily::iid(JointDistribution::uniform(2, 2), 4);
  const auto ey = build_typical_set_y(uni, 0.1);
  const auto exy = build_typical_set_xy(uni, 0.1);
  const auto heavy = heavy_slice_set(exy, ey, uni, 0.1);
  EXPECT_TRUE(heavy.heavy.empty());
  EXPECT_NEAR(heavy.log2_slice_threshold, 6.0, 1e-12);

  const std::vector<double> px{0.5, 0.5}, py{0.9, 0.1};
  const auto skew = SourceFamily::iid(JointDistribution::independent(px, py), 1);
  EXPECT_TRUE(heavy_slice_set(build_typical_set_xy(skew, 0.01),
                              build_typical_set_y(skew, 0.01), skew, 0.01)
                  .heavy.empty());
}

TEST(HeavySlices, DegenerateY) {
  // One Y symbol: E_Y is the single all-zero sequence and the slice is the
  // set of typical x, compared against 2^{n(H_X + 5 eps)}.
  const auto fam = SourceFamily::iid(JointDistribution(2, 1, {0.5, 0.5}), 2);
  for (double eps : {0.01, 0.3}) {
    const auto ey = build_typical_set_y(fam, eps);
    const auto exy = build_typical_set_xy(fam, eps);
    ASSERT_EQ(ey.size(), 1u);
    const auto slice = slice_a_y(exy, 0);
    ASSERT_EQ(slice.size(), 4u);
    const bool expect_heavy = 2.0 >= 2.0 * (1.0 + 5 * eps);
    EXPECT_EQ(heavy_slice_set(exy, ey, fam, eps).heavy.size(), expect_heavy ? 1u : 0u);
  }
}

TEST(HeavySlices, ThresholdSplitsTypicalYProperty) {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    const double eps = 0.02 + 0.2 * rng.uniform();
    const auto fam = SourceFamily::iid(random_joint(rng, 2, 2), n);
    const auto ey = build_typical_set_y(fam, eps);
    const auto exy = build_typical_set_xy(fam, eps);
    const auto report = heavy_slice_set(exy, ey, fam, eps);
    for (auto y : ey.keys) {
      const double size = static_cast<double>(slice_a_y(exy, y).size());
      const bool heavy = std::binary_search(report.heavy.begin(), report.heavy.end(), y);
      EXPECT_EQ(heavy, size > 0 && std::log2(size) >= report.log2_slice_threshold - 1e-9);
    }
    for (auto y : report.heavy) EXPECT_TRUE(ey.contains(y));
  }
}

TEST(Codebook, SizeAndCodewords) {
  const auto c = make_codebook(12, 0.9);
  EXPECT_EQ(c.log2_size, 11u);
  EXPECT_EQ(c.size, 2048u);
  EXPECT_EQ(c.codeword(3), (Sequence{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1}));
  EXPECT_EQ(make_codebook(10, 0.5).log2_size, 5u);
  EXPECT_EQ(make_codebook(1, 1e-12).size, 1u);
  EXPECT_THROW(make_codebook(4, 0.0), std::invalid_argument);
  EXPECT_THROW(make_codebook(4, 1.5), std::invalid_argument);
}

TEST(Encoder, ImpossibleInjection) {
  const auto fam = SourceFamily::iid(JointDistribution(1, 2, {0.5, 0.5}), 2);
  EXPECT_THROW(construct_achievability_encoder(fam, 0.1, 0.5), ImpossibleInjection);
}

TEST(Encoder, MapsAreInjectiveAndFollowSlices) {
  const auto fam = bsc(8);
  const double eps = 0.25;
  const auto enc = construct_achievability_encoder(fam, eps, 0.5);
  const auto exy = build_typical_set_xy(fam, eps);
  for (std::uint64_t y = 0; y < enc.y_sequence_count(); ++y) {
    auto img = std::vector<std::uint32_t>(enc.images(y).begin(), enc.images(y).end());
    std::sort(img.begin(), img.end());
    EXPECT_EQ(std::adjacent_find(img.begin(), img.end()), img.end());
    if (enc.classification(y) == SideInformationClass::kReliable) {
      const auto slice = slice_a_y(exy, y);
      const std::size_t take = std::min<std::size_t>(slice.size(), enc.codebook().size);
      for (std::size_t j = 0; j < take; ++j) EXPECT_EQ(enc.image(y, j), slice[j]);
    } else {
      for (std::uint64_t j = 0; j < enc.codebook().size; ++j) EXPECT_EQ(enc.image(y, j), j);
    }
  }
}

TEST(Encoder, BelowThresholdRateWarns) {
  const auto enc = construct_achievability_encoder(bsc(6), 0.1, 0.2);
  EXPECT_FALSE(enc.warnings().empty());
}

TEST(Encoder, JsonRoundTrip) {
  const auto enc = construct_achievability_encoder(bsc(5), 0.2, 0.6);
  const auto back = DependentEncoder::from_json(enc.to_json());
  EXPECT_EQ(back.to_json(), enc.to_json());
  EXPECT_DOUBLE_EQ(exact_error(back, bsc(5)), exact_error(enc, bsc(5)));

  auto doc = enc.to_json();
  doc["maps"]["0"][1] = doc["maps"]["0"][0];
  EXPECT_THROW(DependentEncoder::from_json(doc), std::invalid_argument);
}

TEST(ExactError, Examples) {
  const auto full = construct_achievability_encoder(bsc(4), 0.1, 1.0);
  EXPECT_DOUBLE_EQ(exact_error(full, bsc(4)), 0.0);

  const auto uni = SourceFamily::iid(JointDistribution::uniform(2, 2), 1);
  const auto single = construct_achievability_encoder(uni, 0.1, 1e-12);
  EXPECT_EQ(single.codebook().size, 1u);
  EXPECT_NEAR(exact_error(single, uni), 0.5, 1e-12);
  EXPECT_NEAR(optimal_error(uni, 1e-12), 0.5, 1e-12);

  const auto copy = SourceFamily::iid(JointDistribution::copy(std::vector<double>{0.3, 0.7}), 3);
  EXPECT_NEAR(optimal_error(copy, 1e-12), 0.0, 1e-12);
}

TEST(ExactError, ExceedsOptimalProperty) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    const auto fam = SourceFamily::iid(random_joint(rng, 2, 2), n);
    const double rate = 0.05 + 0.95 * rng.uniform();
    const double eps = 0.05 + 0.3 * rng.uniform();
    const auto enc = construct_achievability_encoder(fam, eps, rate);
    EXPECT_GE(exact_error(enc, fam), optimal_error(fam, rate) - 1e-12);
  }
}

TEST(OptimalError, MatchesBruteForceOracle) {
  Rng rng(5);
  int checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const auto d = random_joint(rng, 2, 2, trial % 3 == 0 ? 3 : 0);
    for (std::size_t n = 1; n <= 2; ++n) {
      const auto fam = SourceFamily::iid(d, n);
      for (double rate : {1e-12, 0.5}) {
        const auto size = make_codebook(n, rate).size;
        if (size > 2) continue;
        EXPECT_NEAR(optimal_error(fam, rate), brute_force_optimal(fam, size), 1e-12);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(OptimalError, NonIncreasingInRateProperty) {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fam = SourceFamily::iid(random_joint(rng, 2, 2), 1 + rng.below(7));
    double last = 1.0;
    for (double r = 0.1; r <= 1.0 + 1e-9; r += 0.1) {
      const double e = optimal_error(fam, r);
      EXPECT_LE(e, last + 1e-12);
      last = e;
    }
    EXPECT_NEAR(last, 0.0, 1e-12);
  }
}

TEST(OptimalError, HighRateBeatsLowRate) {
  const auto fam = bsc(10);
  EXPECT_LT(optimal_error(fam, 0.9), optimal_error(fam, 0.1));
}

TEST(MonteCarlo, FullRateAndAgreement) {
  const auto full = construct_achievability_encoder(bsc(4), 0.1, 1.0);
  const auto zero = monte_carlo_error(full, bsc(4), 1000, 3);
  EXPECT_EQ(zero.failures, 0u);
  EXPECT_DOUBLE_EQ(zero.estimate, 0.0);

  const auto fam = bsc(8);
  const auto enc = construct_achievability_encoder(fam, 0.2, 0.5);
  const double exact = exact_error(enc, fam);
  const auto a = monte_carlo_error(enc, fam, 20000, 1);
  const auto b = monte_carlo_error(enc, fam, 20000, 2);
  const double sd = std::sqrt(exact * (1 - exact) / 20000.0);
  EXPECT_NEAR(a.estimate, exact, 4 * sd);
  EXPECT_NEAR(a.estimate, b.estimate, 4 * std::sqrt(2.0) * sd);
  EXPECT_LE(a.ci_low, a.estimate);
  EXPECT_GE(a.ci_high, a.estimate);

  const auto again = monte_carlo_error(enc, fam, 20000, 1);
  EXPECT_EQ(again.failures, a.failures);
}

TEST(MonteCarlo, WilsonInterval) {
  const auto w = wilson_interval(0, 100);
  EXPECT_NEAR(w.ci_low, 0.0, 1e-15);
  EXPECT_GT(w.ci_high, 0.0);
  const auto h = wilson_interval(50, 100);
  EXPECT_NEAR(h.ci_low + h.ci_high, 1.0, 1e-12);
}

TEST(Sweep, SingleRowAndCsv) {
  const auto fam = SourceFamily::iid(JointDistribution::uniform(2, 2), 6);
  const auto rows = threshold_sweep(fam, 0.1, {0.25, 1.0}, {});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[1].error_constructed, 0.0);
  EXPECT_TRUE(rows[0].exact);
  EXPECT_EQ(threshold_sweep(fam, 0.1, {0.5}, {}).size(), 1u);

  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "rate,n,epsilon,error_constructed,error_optimal,ci_low,ci_high");
}

TEST(Sweep, SamplingPathBeyondExactCap) {
  const auto fam = bsc(6);
  SweepOptions opts;
  opts.exact_cap = 100;
  opts.trials = 2000;
  opts.seed = 9;
  EXPECT_TRUE(sweep_needs_sampling(fam, opts));
  const auto rows = threshold_sweep(fam, 0.2, {0.5}, opts);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].exact);
  EXPECT_TRUE(std::isnan(rows[0].error_optimal));
  EXPECT_LE(rows[0].ci_low, rows[0].error_constructed);
}
