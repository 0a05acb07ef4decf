#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "pml/dataset.hpp"
#include "pml/random.hpp"

using namespace pml;

TEST_CASE("synthetic generator hits the requested positive rate") {
  SyntheticSpec spec{1000, 32, 20, 2.5, 0.5, 7};
  const Dataset ds = generate_synthetic(spec);
  REQUIRE(ds.instances() == 1000);
  REQUIRE(ds.feature_dim() == 32);
  REQUIRE(ds.classes() == 20);
  ds.validate();

  double total = 0.0;
  for (std::int8_t v : ds.labels.flat()) total += v;
  const double mean = total / 1000.0;
  CHECK(mean >= 2.125);  // within 15% of 2.5
  CHECK(mean <= 2.875);

  // mean >= 1 construction guarantees a positive in every row
  for (std::size_t i = 0; i < ds.labels.rows(); ++i) {
    int row_sum = 0;
    for (std::size_t j = 0; j < ds.labels.cols(); ++j) row_sum += ds.labels(i, j);
    REQUIRE(row_sum >= 1);
  }
}

TEST_CASE("synthetic generator is deterministic per seed") {
  SyntheticSpec spec{200, 8, 5, 1.5, 0.3, 42};
  const Dataset a = generate_synthetic(spec);
  const Dataset b = generate_synthetic(spec);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);

  spec.seed = 43;
  const Dataset c = generate_synthetic(spec);
  CHECK_FALSE(a.labels == c.labels);
}

TEST_CASE("synthetic generator rejects invalid specs by field") {
  SyntheticSpec spec{100, 8, 5, 5.0, 0.3, 1};  // mean == n_classes
  CHECK_THROWS_MATCHES(generate_synthetic(spec), ValidationError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("mean_positives_per_instance")));
  spec.mean_positives_per_instance = 2.0;
  spec.n_instances = 0;
  CHECK_THROWS_MATCHES(generate_synthetic(spec), ValidationError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("n_instances")));
}

TEST_CASE("synthetic features are prototype sums plus noise") {
  SyntheticSpec spec{50, 16, 6, 2.0, 0.0, 9};  // zero noise: features determined by labels
  const Dataset ds = generate_synthetic(spec);
  // identical label rows must produce identical feature rows when noise is off
  for (std::size_t a = 0; a < ds.instances(); ++a)
    for (std::size_t b = a + 1; b < ds.instances(); ++b) {
      bool same_labels = true;
      for (std::size_t j = 0; j < ds.classes(); ++j)
        if (ds.labels(a, j) != ds.labels(b, j)) same_labels = false;
      if (!same_labels) continue;
      for (std::size_t f = 0; f < ds.feature_dim(); ++f)
        REQUIRE(ds.features(a, f) == ds.features(b, f));
    }
}

TEST_CASE("SPL keeps exactly one positive") {
  BinaryLabels y = BinaryLabels::from_rows({{1, 0, 1}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LabelMatrix z = apply_mask(y, {MaskSetting::SPL, 1.0, seed});
    int pos = 0, neg = 0, missing = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      if (z(0, j) == Label::Pos) {
        ++pos;
        CHECK((j == 0 || j == 2));
      } else if (z(0, j) == Label::Neg) ++neg;
      else ++missing;
    }
    CHECK(pos == 1);
    CHECK(neg == 0);
    CHECK(missing == 2);
  }
}

TEST_CASE("PAL retains round(keep * L) entries that agree with the source") {
  BinaryLabels y = BinaryLabels::from_rows({{1, 0, 1, 0}});
  const LabelMatrix z = apply_mask(y, {MaskSetting::PAL, 0.5, 11});
  int retained = 0;
  for (std::size_t j = 0; j < 4; ++j) {
    if (z(0, j) == Label::Missing) continue;
    ++retained;
    CHECK((z(0, j) == Label::Pos) == (y(0, j) == 1));
  }
  CHECK(retained == 2);
}

TEST_CASE("PPL keeps max(1, round(keep * positives)) positives and no negatives") {
  BinaryLabels y = BinaryLabels::from_rows({{1, 1, 1, 0, 0}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const LabelMatrix z = apply_mask(y, {MaskSetting::PPL, 0.3, seed});
    int pos = 0, missing = 0;
    for (std::size_t j = 0; j < 5; ++j) {
      REQUIRE(z(0, j) != Label::Neg);
      if (z(0, j) == Label::Pos) {
        ++pos;
        CHECK(y(0, j) == 1);
      } else ++missing;
    }
    CHECK(pos == 1);  // round(0.3 * 3) = 1
    CHECK(missing == 4);
  }
}

TEST_CASE("FAL observes everything") {
  BinaryLabels y = BinaryLabels::from_rows({{1, 0}, {0, 1}});
  const LabelMatrix z = apply_mask(y, {MaskSetting::FAL, 1.0, 3});
  CHECK_FALSE(has_missing(z));
  CHECK(z(0, 0) == Label::Pos);
  CHECK(z(1, 0) == Label::Neg);
}

TEST_CASE("SPL and PPL reject rows without positives, naming the row") {
  BinaryLabels y = BinaryLabels::from_rows({{1, 0, 1}, {0, 0, 0}});
  CHECK_THROWS_MATCHES(apply_mask(y, {MaskSetting::SPL, 1.0, 0}), ValidationError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("row 1")));
  CHECK_THROWS_MATCHES(apply_mask(y, {MaskSetting::PPL, 0.5, 0}), ValidationError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("row 1")));
}

TEST_CASE("mask invariants hold over random cases") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    const std::size_t l = 2 + rng.below(14);
    BinaryLabels y(n, l, 0);
    for (std::size_t i = 0; i < n; ++i) {
      y(i, rng.below(l)) = 1;  // at least one positive per row
      for (std::size_t j = 0; j < l; ++j)
        if (rng.uniform() < 0.25) y(i, j) = 1;
    }
    MaskSpec spec;
    const auto settings = {MaskSetting::FAL, MaskSetting::PAL, MaskSetting::PPL, MaskSetting::SPL};
    spec.setting = *(settings.begin() + rng.below(4));
    spec.keep_fraction = rng.uniform(0.05, 1.0);
    spec.seed = rng.next_u64();

    const LabelMatrix z = apply_mask(y, spec);
    REQUIRE(z == apply_mask(y, spec));  // determinism

    for (std::size_t i = 0; i < n; ++i) {
      std::size_t pos = 0, neg = 0, observed = 0;
      for (std::size_t j = 0; j < l; ++j) {
        if (z(i, j) == Label::Missing) continue;
        ++observed;
        // agreement with the source
        REQUIRE((z(i, j) == Label::Pos) == (y(i, j) == 1));
        if (z(i, j) == Label::Pos) ++pos;
        else ++neg;
      }
      switch (spec.setting) {
        case MaskSetting::FAL:
          REQUIRE(observed == l);
          break;
        case MaskSetting::PAL:
          REQUIRE(observed == static_cast<std::size_t>(std::llround(spec.keep_fraction * double(l))));
          break;
        case MaskSetting::PPL: {
          std::size_t row_pos = 0;
          for (std::size_t j = 0; j < l; ++j) row_pos += y(i, j);
          auto expect = static_cast<std::size_t>(std::llround(spec.keep_fraction * double(row_pos)));
          if (expect < 1) expect = 1;
          REQUIRE(neg == 0);
          REQUIRE(pos == expect);
          break;
        }
        case MaskSetting::SPL:
          REQUIRE(pos == 1);
          REQUIRE(neg == 0);
          break;
      }
    }
  }
}

TEST_CASE("mask spec names") {
  CHECK(MaskSpec{MaskSetting::FAL, 1.0, 0}.name() == "FAL");
  CHECK(MaskSpec{MaskSetting::PAL, 0.3, 0}.name() == "PAL_0.3");
  CHECK(MaskSpec{MaskSetting::PPL, 0.6, 0}.name() == "PPL_0.6");
  CHECK(MaskSpec{MaskSetting::SPL, 1.0, 0}.name() == "SPL");
}
