#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nucsynth/stego.hpp"
#include "oracles.hpp"

using namespace nucsynth;

namespace {

Image random_carrier(Index side, Rng& rng) {
  return Image(oracles::random_grid(side, side, -0.9, 0.9, rng), ValueRange{-1.0, 1.0});
}

BinaryMask random_payload(Index side, Rng& rng) {
  return oracles::random_mask(side, side, 0.5, rng);
}

// Carrier whose embedding band is exactly zero, so the stego MSE has the
// closed form P^2 eps^2 / (N M).
Image band_free_carrier(Index side, Rng& rng, const StegoConfig& cfg) {
  const Image raw = random_carrier(side, rng);
  DctCoeffs coeffs = dct2(raw);
  for (const auto& [i, j] : embedding_band(side, side, cfg)) coeffs(i, j) = 0.0;
  const Grid<double> values = idct2_values(coeffs);
  return Image(values.min(1.0).max(-1.0), ValueRange{-1.0, 1.0});
}

}  // namespace

TEST_CASE("majority pooling keeps block majorities, ties go background") {
  BinaryMask m(4, 4);
  m.setConstant(false);
  // top-left 2x2 block: 3 of 4 set; top-right: 2 of 4 (tie); bottom-left: 1;
  // bottom-right: 4
  m(0, 0) = m(0, 1) = m(1, 0) = true;
  m(0, 2) = m(1, 3) = true;
  m(3, 0) = true;
  m(2, 2) = m(2, 3) = m(3, 2) = m(3, 3) = true;
  const BinaryMask pooled = downsample_majority(m, 2);
  CHECK(pooled(0, 0));
  CHECK_FALSE(pooled(0, 1));
  CHECK_FALSE(pooled(1, 0));
  CHECK(pooled(1, 1));
}

TEST_CASE("pooling a payload smaller than the target replicates pixels") {
  BinaryMask m(2, 2);
  m << true, false, false, true;
  const BinaryMask up = downsample_majority(m, 4);
  CHECK(up(0, 0));
  CHECK(up(0, 1));
  CHECK_FALSE(up(0, 2));
  CHECK(up(3, 3));
}

TEST_CASE("embed/extract round trip recovers the pooled payload exactly") {
  Rng rng(42);
  StegoConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    const Image carrier = random_carrier(64, rng);
    const BinaryMask payload = random_payload(64, rng);
    const Image stego = embed(carrier, payload, cfg);
    const BinaryMask got = extract(stego, cfg);
    const BinaryMask want = downsample_majority(payload, cfg.payload_side);
    CHECK(bit_error_ratio(got, want) == 0.0);
  }
}

TEST_CASE("an all-zero payload still perturbs the carrier") {
  Rng rng(7);
  StegoConfig cfg;
  const Image carrier = random_carrier(64, rng);
  const BinaryMask none = BinaryMask::Constant(64, 64, false);
  const Image stego = embed(carrier, none, cfg);
  CHECK((stego.values - carrier.values).abs().maxCoeff() > 0.0);
  // and decodes to all zeros
  CHECK(extract(stego, cfg).count() == 0);
}

TEST_CASE("embed refuses carriers not declared in [-1,1] and undersized bands") {
  Rng rng(3);
  StegoConfig cfg;
  const Image wrong(Grid<double>::Zero(64, 64), ValueRange{0.0, 255.0});
  CHECK_THROWS_AS(embed(wrong, random_payload(64, rng), cfg), std::invalid_argument);

  StegoConfig big;
  big.payload_side = 16;          // 256 bits
  big.band_fraction = 0.1;        // 32x32 * 0.1 = 102 coefficient band
  const Image small = random_carrier(32, rng);
  CHECK_THROWS_WITH_AS(embed(small, random_payload(32, rng), big),
                       doctest::Contains("band too small"), std::invalid_argument);
}

TEST_CASE("psnr follows the closed form on a band-free carrier") {
  Rng rng(31);
  StegoConfig cfg;
  const Index side = 128;
  const Image carrier = band_free_carrier(side, rng, cfg);
  const Image stego = embed(carrier, random_payload(side, rng), cfg);

  const double bits = static_cast<double>(cfg.payload_side) * cfg.payload_side;
  const double mse = bits * cfg.epsilon * cfg.epsilon / static_cast<double>(side * side);
  const double expected = 10.0 * std::log10(4.0 / mse);  // peak = range width = 2
  CHECK(psnr(carrier, stego) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(psnr(carrier, carrier) == std::numeric_limits<double>::infinity());
}

TEST_CASE("psnr decreases strictly as epsilon grows") {
  Rng rng(17);
  StegoConfig cfg;
  const Image carrier = band_free_carrier(128, rng, cfg);
  const BinaryMask payload = random_payload(128, rng);
  double previous = std::numeric_limits<double>::infinity();
  for (const double eps : {0.005, 0.01, 0.02, 0.04, 0.08}) {
    StegoConfig c = cfg;
    c.epsilon = eps;
    const double db = psnr(carrier, embed(carrier, payload, c));
    CHECK(db < previous);
    previous = db;
  }
}

TEST_CASE("extracting from an un-embedded carrier is a coin flip per bit") {
  StegoConfig cfg;
  const BinaryMask fixed = [] {
    Rng r(1);
    return oracles::random_mask(16, 16, 0.5, r);
  }();
  double total = 0.0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(1000 + static_cast<std::uint64_t>(s));
    const Image carrier = random_carrier(64, rng);
    total += bit_error_ratio(extract(carrier, cfg), fixed);
  }
  const double mean = total / seeds;
  CHECK(mean > 0.45);
  CHECK(mean < 0.55);
}

TEST_CASE("the filter wipes the embedding band and garbles the channel") {
  Rng rng(23);
  StegoConfig cfg;
  const FrequencyMask half = build_frequency_mask(64, 64, 0.5, FrequencyOrdering::radial);
  double ber_total = 0.0;
  const int pairs = 20;
  for (int t = 0; t < pairs; ++t) {
    const Image carrier = random_carrier(64, rng);
    const BinaryMask payload = random_payload(64, rng);
    const Image stego = embed(carrier, payload, cfg);
    const Image filtered = lowpass_filter(stego, half);

    const DctCoeffs reread = dct2(filtered);
    double worst = 0.0;
    for (const auto& [i, j] : embedding_band(64, 64, cfg))
      worst = std::max(worst, std::abs(reread(i, j)));
    CHECK(worst < 1e-6);

    ber_total += bit_error_ratio(extract(filtered, cfg),
                                 downsample_majority(payload, cfg.payload_side));
  }
  CHECK(ber_total / pairs >= 0.3);
}

TEST_CASE("embedding does not change what filtering removes from the content") {
  Rng rng(29);
  StegoConfig cfg;
  const FrequencyMask half = build_frequency_mask(96, 96, 0.5, FrequencyOrdering::radial);
  for (int t = 0; t < 5; ++t) {
    const Image carrier = random_carrier(96, rng);
    const BinaryMask payload = random_payload(96, rng);
    const double clean_db = psnr(carrier, lowpass_filter(carrier, half));
    const double stego_db = psnr(carrier, lowpass_filter(embed(carrier, payload, cfg), half));
    CHECK(clean_db >= stego_db - 0.1);
  }
}

TEST_CASE("stego report: identity filter keeps the channel, zero filter kills the image") {
  Rng rng(37);
  StegoConfig cfg;
  const Image carrier = random_carrier(64, rng);
  const BinaryMask payload = random_payload(64, rng);

  const FrequencyMask identity = build_frequency_mask(64, 64, 1.0, FrequencyOrdering::radial);
  const StegoReport keep = stego_report(carrier, payload, cfg, identity);
  CHECK(keep.ber_prefilter == 0.0);
  CHECK(keep.ber_postfilter == 0.0);
  CHECK(keep.psnr_db >= 40.0);

  const FrequencyMask nothing = build_frequency_mask(64, 64, 0.0, FrequencyOrdering::radial);
  const StegoReport wipe = stego_report(carrier, payload, cfg, nothing);
  // the filtered image is exactly zero, zero coefficients decode as bit 0,
  // so the post-filter error rate is the payload's foreground share
  const BinaryMask pooled = downsample_majority(payload, cfg.payload_side);
  const double ones = static_cast<double>(pooled.count()) / static_cast<double>(pooled.size());
  CHECK(wipe.ber_postfilter == doctest::Approx(ones));
  CHECK(lowpass_filter(carrier, nothing).values.abs().maxCoeff() < 1e-12);
}
