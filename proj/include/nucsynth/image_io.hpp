#pragma once

#include <filesystem>
#include <string>

#include "nucsynth/dct.hpp"
#include "nucsynth/grid.hpp"

namespace nucsynth {

/// Reads an 8- or 16-bit single-channel PNG or TIFF. The declared range is
/// the full range of the source bit depth ([0,255] or [0,65535]).
/// Multi-channel inputs are rejected, as are compressed or tiled TIFFs.
Image load_image(const std::filesystem::path& path);

/// Writes a grayscale PNG at the requested bit depth. The declared range is
/// mapped affinely onto [0, 2^depth - 1] and rounded to nearest.
void save_image(const Image& img, const std::filesystem::path& path, int bit_depth);

/// Label rasters travel as 16-bit grayscale PNGs where the pixel value is the
/// label id.
InstanceMask load_instance_mask(const std::filesystem::path& path);
void save_instance_mask(const InstanceMask& mask, const std::filesystem::path& path);

BinaryMask load_binary_mask(const std::filesystem::path& path);
void save_binary_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// 8-bit PNG rendering of a keep/zero pattern: 255 = keep, 0 = zero.
void save_frequency_mask(const FrequencyMask& mask, const std::filesystem::path& path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace nucsynth
