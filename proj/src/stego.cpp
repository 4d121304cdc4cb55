#include "nucsynth/stego.hpp"

#include <cmath>
#include <limits>

namespace nucsynth {

BinaryMask downsample_majority(const BinaryMask& mask, Index side) {
  if (side < 1) throw std::invalid_argument("payload side must be positive");
  const Index rows = mask.rows();
  const Index cols = mask.cols();
  BinaryMask pooled(side, side);
  for (Index i = 0; i < side; ++i) {
    Index r0 = i * rows / side;
    Index r1 = std::max((i + 1) * rows / side, r0 + 1);
    r0 = std::min(r0, rows - 1);
    r1 = std::min(r1, rows);
    for (Index j = 0; j < side; ++j) {
      Index c0 = j * cols / side;
      Index c1 = std::max((j + 1) * cols / side, c0 + 1);
      c0 = std::min(c0, cols - 1);
      c1 = std::min(c1, cols);
      Index fg = 0;
      for (Index r = r0; r < r1; ++r)
        for (Index c = c0; c < c1; ++c) fg += mask(r, c) ? 1 : 0;
      pooled(i, j) = 2 * fg > (r1 - r0) * (c1 - c0);
    }
  }
  return pooled;
}

std::vector<std::pair<Index, Index>> embedding_band(Index n, Index m, const StegoConfig& cfg) {
  if (cfg.epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  if (cfg.band_fraction <= 0.0 || cfg.band_fraction > 0.5)
    throw std::invalid_argument("band_fraction must lie in (0, 0.5]");
  const std::int64_t bits =
      static_cast<std::int64_t>(cfg.payload_side) * cfg.payload_side;
  const std::int64_t capacity = std::llround(cfg.band_fraction * static_cast<double>(n * m));
  if (bits > capacity)
    throw std::invalid_argument("embedding band too small for payload: " + std::to_string(bits) +
                                " bits > " + std::to_string(capacity) + " coefficients");

  auto ranking = frequency_ranking(n, m, FrequencyOrdering::radial);
  std::vector<std::pair<Index, Index>> band(static_cast<std::size_t>(bits));
  for (std::int64_t k = 0; k < bits; ++k)
    band[static_cast<std::size_t>(k)] = ranking[ranking.size() - 1 - static_cast<std::size_t>(k)];
  return band;
}

Image embed(const Image& carrier, const BinaryMask& payload, const StegoConfig& cfg) {
  if (!(carrier.range == ValueRange{-1.0, 1.0}))
    throw std::invalid_argument("carrier must be declared in [-1, 1]");
  const auto band = embedding_band(carrier.rows(), carrier.cols(), cfg);
  const BinaryMask bits = downsample_majority(payload, cfg.payload_side);

  DctCoeffs coeffs = dct2(carrier);
  const bool* bit = bits.data();
  for (std::size_t k = 0; k < band.size(); ++k)
    coeffs(band[k].first, band[k].second) = bit[k] ? cfg.epsilon : -cfg.epsilon;
  return idct2(coeffs, carrier.range);
}

BinaryMask extract(const Image& stego, const StegoConfig& cfg) {
  const auto band = embedding_band(stego.rows(), stego.cols(), cfg);
  const DctCoeffs coeffs = dct2(stego);
  BinaryMask bits(cfg.payload_side, cfg.payload_side);
  bool* bit = bits.data();
  for (std::size_t k = 0; k < band.size(); ++k)
    bit[k] = coeffs(band[k].first, band[k].second) > 0.0;
  return bits;
}

double bit_error_ratio(const BinaryMask& got, const BinaryMask& want) {
  if (got.rows() != want.rows() || got.cols() != want.cols())
    throw std::invalid_argument("bit grids differ in shape");
  const Index wrong = (got != want).count();
  return static_cast<double>(wrong) / static_cast<double>(got.size());
}

double psnr(const Image& reference, const Image& other) {
  if (reference.rows() != other.rows() || reference.cols() != other.cols())
    throw std::invalid_argument("images differ in shape");
  const double mse = (reference.values - other.values).square().mean();
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = reference.range.width();
  return 10.0 * std::log10(peak * peak / mse);
}

StegoReport stego_report(const Image& carrier, const BinaryMask& payload, const StegoConfig& cfg,
                         const FrequencyMask& filter_mask) {
  const BinaryMask truth = downsample_majority(payload, cfg.payload_side);
  const Image stego = embed(carrier, payload, cfg);
  StegoReport report;
  report.psnr_db = psnr(carrier, stego);
  report.ber_prefilter = bit_error_ratio(extract(stego, cfg), truth);
  const Image filtered = lowpass_filter(stego, filter_mask);
  report.ber_postfilter = bit_error_ratio(extract(filtered, cfg), truth);
  return report;
}

}  // namespace nucsynth
