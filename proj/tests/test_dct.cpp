#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nucsynth/dct.hpp"
#include "oracles.hpp"

using namespace nucsynth;

namespace {
Image random_image(Index rows, Index cols, Rng& rng) {
  return Image(oracles::random_grid(rows, cols, -1.0, 1.0, rng), ValueRange{-1.0, 1.0});
}
}  // namespace

TEST_CASE("constant image concentrates all energy in the DC coefficient") {
  const Image ones(Grid<double>::Ones(2, 2), ValueRange{0.0, 1.0});
  const DctCoeffs c = dct2(ones);
  CHECK(c(0, 0) == doctest::Approx(2.0));  // value * sqrt(N*M)
  CHECK(std::abs(c(0, 1)) < 1e-12);
  CHECK(std::abs(c(1, 0)) < 1e-12);
  CHECK(std::abs(c(1, 1)) < 1e-12);
}

TEST_CASE("2x2 impulse spreads evenly: every coefficient 0.5") {
  Grid<double> v(2, 2);
  v << 1.0, 0.0, 0.0, 0.0;
  const DctCoeffs direct = oracles::naive_dct2(v);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(direct(i, j) == doctest::Approx(0.5));
  const DctCoeffs c = dct2(v);
  CHECK((c - direct).abs().maxCoeff() < 1e-12);
}

TEST_CASE("separable transform agrees with the direct summation on small grids") {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = static_cast<Index>(rng.uniform_int(1, 8));
    const Index m = static_cast<Index>(rng.uniform_int(1, 8));
    const Grid<double> img = oracles::random_grid(n, m, -1.0, 1.0, rng);
    CHECK((dct2(img) - oracles::naive_dct2(img)).abs().maxCoeff() < 1e-6);
    const Grid<double> coeffs = oracles::random_grid(n, m, -1.0, 1.0, rng);
    CHECK((idct2_values(coeffs) - oracles::naive_idct2(coeffs)).abs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("round trip is the identity across shapes") {
  Rng rng(55);
  const std::pair<Index, Index> shapes[] = {{1, 1}, {2, 2}, {3, 5}, {256, 256}};
  for (const auto& [n, m] : shapes) {
    for (int trial = 0; trial < 3; ++trial) {
      const Image img = random_image(n, m, rng);
      const Image back = idct2(dct2(img), img.range);
      CHECK((back.values - img.values).abs().maxCoeff() < 1e-4);
    }
  }
}

TEST_CASE("transform preserves energy and is linear") {
  Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    const Grid<double> a = oracles::random_grid(17, 23, -2.0, 2.0, rng);
    const Grid<double> b = oracles::random_grid(17, 23, -2.0, 2.0, rng);
    const double ea = sum_squares(a);
    CHECK(std::abs(sum_squares(dct2(a)) - ea) / ea < 1e-6);
    const Grid<double> combo = 0.7 * a + -1.3 * b;
    const Grid<double> lhs = dct2(combo);
    const Grid<double> rhs = 0.7 * dct2(a) + -1.3 * dct2(b);
    CHECK((lhs - rhs).abs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("DC-only coefficients reconstruct a constant image") {
  DctCoeffs c = DctCoeffs::Zero(5, 7);
  const double value = 3.25;
  c(0, 0) = value * std::sqrt(5.0 * 7.0);
  const Image img = idct2(c, ValueRange{0.0, 4.0});
  CHECK((img.values - value).abs().maxCoeff() < 1e-10);
}

TEST_CASE("the single highest coefficient reconstructs to the direct-sum pattern") {
  DctCoeffs c = DctCoeffs::Zero(4, 6);
  c(3, 5) = 1.0;
  const Grid<double> img = idct2_values(c);
  const Grid<double> direct = oracles::naive_idct2(c);
  CHECK((img - direct).abs().maxCoeff() < 1e-9);
  // alternating sign structure along both axes
  for (Index r = 0; r + 1 < 4; ++r)
    for (Index x = 0; x + 1 < 6; ++x) {
      CHECK(img(r, x) * img(r, x + 1) < 0.0);
      CHECK(img(r, x) * img(r + 1, x) < 0.0);
    }
}

TEST_CASE("frequency mask: keep everything / keep nothing / tiny grid tie-break") {
  const FrequencyMask all = build_frequency_mask(4, 4, 1.0, FrequencyOrdering::radial);
  CHECK(all.keep.count() == 16);
  const FrequencyMask none = build_frequency_mask(4, 4, 0.0, FrequencyOrdering::radial);
  CHECK(none.keep.count() == 0);

  // 2x2 at half keep: (0,0) plus the lexicographically first of the tied pair
  const FrequencyMask half = build_frequency_mask(2, 2, 0.5, FrequencyOrdering::radial);
  CHECK(half.keep.count() == 2);
  CHECK(half.keep(0, 0));
  CHECK(half.keep(0, 1));
  CHECK_FALSE(half.keep(1, 0));
  CHECK_FALSE(half.keep(1, 1));
}

TEST_CASE("frequency mask is downward closed and sized by rounding") {
  Rng rng(31);
  for (const auto ord : {FrequencyOrdering::radial, FrequencyOrdering::diagonal}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Index n = static_cast<Index>(rng.uniform_int(1, 12));
      const Index m = static_cast<Index>(rng.uniform_int(1, 12));
      const double f = rng.uniform(0.0, 1.0);
      const FrequencyMask mask = build_frequency_mask(n, m, f, ord);
      const auto expected = std::llround(f * static_cast<double>(n * m));
      if (expected > 0) CHECK(mask.keep.count() == expected);
      if (f > 0.0) CHECK(mask.keep(0, 0));

      const auto ranking = frequency_ranking(n, m, ord);
      bool seen_zero = false;
      for (const auto& [i, j] : ranking) {
        if (!mask.keep(i, j)) seen_zero = true;
        if (seen_zero) CHECK_FALSE(mask.keep(i, j));
      }
    }
  }
}

TEST_CASE("DC is kept even when rounding would drop everything") {
  const FrequencyMask tiny = build_frequency_mask(1, 1, 0.4, FrequencyOrdering::radial);
  CHECK(tiny.keep(0, 0));
}

TEST_CASE("identity mask filtering returns the image") {
  Rng rng(13);
  const Image img = random_image(16, 16, rng);
  const FrequencyMask all = build_frequency_mask(16, 16, 1.0, FrequencyOrdering::radial);
  const Image out = lowpass_filter(img, all);
  CHECK((out.values - img.values).abs().maxCoeff() < 1e-4);
}

TEST_CASE("constant image passes through any mask that keeps DC") {
  const Image flat(Grid<double>::Constant(8, 8, 0.6), ValueRange{0.0, 1.0});
  for (double f : {0.1, 0.5, 0.9}) {
    const Image out = lowpass_filter(flat, build_frequency_mask(8, 8, f, FrequencyOrdering::radial));
    CHECK((out.values - 0.6).abs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("checkerboard rides the highest frequency and filtering removes it") {
  const Index n = 8, m = 8;
  const double amplitude = 0.25;
  Grid<double> v(n, m);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < m; ++c)
      v(r, c) = 0.5 + (((r + c) % 2 == 0) ? amplitude : -amplitude);

  // dominant coefficient sits at (N-1, M-1)
  const DctCoeffs coeffs = dct2(v);
  Index best_r = 0, best_c = 0;
  double best = -1.0;
  double checker_energy = 0.0;
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < m; ++c) {
      if (r == 0 && c == 0) continue;
      checker_energy += coeffs(r, c) * coeffs(r, c);
      if (std::abs(coeffs(r, c)) > best) {
        best = std::abs(coeffs(r, c));
        best_r = r;
        best_c = c;
      }
    }
  CHECK(best_r == n - 1);
  CHECK(best_c == m - 1);
  CHECK(best * best / checker_energy > 0.6);

  const Image img(v, ValueRange{0.0, 1.0});
  const Image out = lowpass_filter(img, build_frequency_mask(n, m, 0.5, FrequencyOrdering::radial));
  // residual is the small checkerboard energy that leaks below the cut
  CHECK((out.values - 0.5).abs().maxCoeff() < 0.15 * amplitude);

  // on 2x2 the removal is exact: the only non-DC kept coefficient is untouched
  Grid<double> v2(2, 2);
  v2 << 0.5 + amplitude, 0.5 - amplitude, 0.5 - amplitude, 0.5 + amplitude;
  const Image out2 = lowpass_filter(Image(v2, ValueRange{0.0, 1.0}),
                                    build_frequency_mask(2, 2, 0.5, FrequencyOrdering::radial));
  CHECK((out2.values - 0.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("filtering never raises energy, zeroed coefficients stay zero, idempotent") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = static_cast<Index>(rng.uniform_int(2, 24));
    const Index m = static_cast<Index>(rng.uniform_int(2, 24));
    const Image img = random_image(n, m, rng);
    const double f = rng.uniform(0.0, 1.0);
    const FrequencyMask mask = build_frequency_mask(n, m, f, FrequencyOrdering::radial);
    const Image out = lowpass_filter(img, mask);
    CHECK(sum_squares(out.values) <= sum_squares(img.values) * (1.0 + 1e-12));

    const DctCoeffs reread = dct2(out);
    double worst = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j)
        if (!mask.keep(i, j)) worst = std::max(worst, std::abs(reread(i, j)));
    CHECK(worst < 1e-6);

    const Image twice = lowpass_filter(out, mask);
    CHECK((twice.values - out.values).abs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("mask shape mismatch is rejected") {
  Rng rng(1);
  const Image img = random_image(8, 8, rng);
  const FrequencyMask wrong = build_frequency_mask(8, 9, 0.5, FrequencyOrdering::radial);
  CHECK_THROWS_AS(lowpass_filter(img, wrong), std::invalid_argument);
}

TEST_CASE("ordering names parse both ways") {
  CHECK(parse_ordering("radial") == FrequencyOrdering::radial);
  CHECK(parse_ordering("diagonal") == FrequencyOrdering::diagonal);
  CHECK_THROWS_AS(parse_ordering("zigzag"), std::invalid_argument);
  CHECK(ordering_name(FrequencyOrdering::diagonal) == "diagonal");
}
