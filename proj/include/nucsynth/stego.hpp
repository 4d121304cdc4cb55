#pragma once

#include "nucsynth/dct.hpp"
#include "nucsynth/grid.hpp"

namespace nucsynth {

/// Hidden-channel parameters: the payload is majority-pooled to
/// payload_side^2 bits and written into the highest-frequency coefficients,
/// +epsilon for 1 and -epsilon for 0.
struct StegoConfig {
  int payload_side = 16;       // P; payload becomes P x P bits
  double epsilon = 0.01;       // coefficient amplitude, image-value units
  double band_fraction = 0.5;  // top slice of the spectrum reserved for embedding
};

struct StegoReport {
  double psnr_db = 0.0;          // carrier vs stego
  double ber_prefilter = 0.0;    // bit error ratio straight off the stego image
  double ber_postfilter = 0.0;   // after low-pass filtering
};

/// Majority-pooled downsampling to side x side (ties resolve to background).
BinaryMask downsample_majority(const BinaryMask& mask, Index side);

/// The payload_side^2 highest-frequency coefficient positions under the
/// radial ordering, descending, so bit 0 rides the very highest frequency.
std::vector<std::pair<Index, Index>> embedding_band(Index n, Index m, const StegoConfig& cfg);

/// Writes the pooled payload into the carrier's top frequencies. The carrier
/// must be declared in [-1, 1].
Image embed(const Image& carrier, const BinaryMask& payload, const StegoConfig& cfg);

/// Reads the embedded band back out by coefficient sign; a zero coefficient
/// decodes as 0. Garbage in, garbage bits out.
BinaryMask extract(const Image& stego, const StegoConfig& cfg);

/// Fraction of differing bits between two equal-size masks.
double bit_error_ratio(const BinaryMask& got, const BinaryMask& want);

/// Peak signal-to-noise ratio in dB, peak = declared range width of `reference`.
/// Identical images give +infinity.
double psnr(const Image& reference, const Image& other);

/// embed -> measure -> filter -> measure again.
StegoReport stego_report(const Image& carrier, const BinaryMask& payload, const StegoConfig& cfg,
                         const FrequencyMask& filter_mask);

}  // namespace nucsynth
