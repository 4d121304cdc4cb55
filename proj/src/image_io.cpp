#include "nucsynth/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace nucsynth {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_to_exception(png_structp, png_const_charp msg) {
  throw std::runtime_error(std::string("png: ") + msg);
}

void png_warning_sink(png_structp, png_const_charp) {}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngReader() {
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_exception,
                                 png_warning_sink);
    if (!png) throw std::runtime_error("png: failed to allocate read struct");
    info = png_create_info_struct(png);
    if (!info) {
      png_destroy_read_struct(&png, nullptr, nullptr);
      throw std::runtime_error("png: failed to allocate info struct");
    }
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngWriter() {
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_exception,
                                  png_warning_sink);
    if (!png) throw std::runtime_error("png: failed to allocate write struct");
    info = png_create_info_struct(png);
    if (!info) {
      png_destroy_write_struct(&png, nullptr);
      throw std::runtime_error("png: failed to allocate info struct");
    }
  }
  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

bool is_little_endian_host() {
  const std::uint16_t probe = 1;
  return *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
}

Grid<double> read_png_grid(const std::filesystem::path& path, int& bit_depth_out) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw std::runtime_error("cannot open '" + path.string() + "' for reading");

  unsigned char signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8))
    throw std::runtime_error("'" + path.string() + "' is not a PNG file");

  PngReader reader;
  png_init_io(reader.png, file.get());
  png_set_sig_bytes(reader.png, 8);
  png_read_info(reader.png, reader.info);

  const int color_type = png_get_color_type(reader.png, reader.info);
  const int bit_depth = png_get_bit_depth(reader.png, reader.info);
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
        color_type == PNG_COLOR_TYPE_GRAY_ALPHA || color_type == PNG_COLOR_TYPE_PALETTE)
      throw std::runtime_error("'" + path.string() + "': multi-channel unsupported");
    throw std::runtime_error("'" + path.string() + "': unsupported PNG color type");
  }
  if (bit_depth != 8 && bit_depth != 16)
    throw std::runtime_error("'" + path.string() + "': unsupported bit depth " +
                             std::to_string(bit_depth) + " (expected 8 or 16)");

  if (bit_depth == 16 && is_little_endian_host()) png_set_swap(reader.png);
  png_set_interlace_handling(reader.png);
  png_read_update_info(reader.png, reader.info);

  const Index rows = static_cast<Index>(png_get_image_height(reader.png, reader.info));
  const Index cols = static_cast<Index>(png_get_image_width(reader.png, reader.info));
  const std::size_t stride = png_get_rowbytes(reader.png, reader.info);

  std::vector<unsigned char> bytes(static_cast<std::size_t>(rows) * stride);
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r)
    row_ptrs[static_cast<std::size_t>(r)] = bytes.data() + static_cast<std::size_t>(r) * stride;
  png_read_image(reader.png, row_ptrs.data());
  png_read_end(reader.png, nullptr);

  Grid<double> values(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const unsigned char* src = row_ptrs[static_cast<std::size_t>(r)];
    if (bit_depth == 8) {
      for (Index c = 0; c < cols; ++c) values(r, c) = static_cast<double>(src[c]);
    } else {
      const std::uint16_t* src16 = reinterpret_cast<const std::uint16_t*>(src);
      for (Index c = 0; c < cols; ++c) values(r, c) = static_cast<double>(src16[c]);
    }
  }
  bit_depth_out = bit_depth;
  return values;
}

void write_png_grid(const std::filesystem::path& path, const Grid<std::uint16_t>& pixels,
                    int bit_depth) {
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot open '" + path.string() + "' for writing");

  PngWriter writer;
  png_init_io(writer.png, file.get());
  png_set_IHDR(writer.png, writer.info, static_cast<png_uint_32>(pixels.cols()),
               static_cast<png_uint_32>(pixels.rows()), bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(writer.png, writer.info);

  const Index rows = pixels.rows();
  const Index cols = pixels.cols();
  if (bit_depth == 8) {
    std::vector<unsigned char> row(static_cast<std::size_t>(cols));
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) row[static_cast<std::size_t>(c)] =
          static_cast<unsigned char>(pixels(r, c));
      png_write_row(writer.png, row.data());
    }
  } else {
    if (is_little_endian_host()) png_set_swap(writer.png);
    std::vector<std::uint16_t> row(static_cast<std::size_t>(cols));
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) row[static_cast<std::size_t>(c)] = pixels(r, c);
      png_write_row(writer.png, reinterpret_cast<png_bytep>(row.data()));
    }
  }
  png_write_end(writer.png, writer.info);
}

// --- minimal baseline TIFF: single page, grayscale, uncompressed strips ---

class TiffParser {
 public:
  explicit TiffParser(std::vector<unsigned char> bytes, std::string name)
      : bytes_(std::move(bytes)), name_(std::move(name)) {
    if (bytes_.size() < 8) fail("truncated header");
    if (bytes_[0] == 'I' && bytes_[1] == 'I')
      little_ = true;
    else if (bytes_[0] == 'M' && bytes_[1] == 'M')
      little_ = false;
    else
      fail("bad byte-order mark");
    if (u16(2) != 42) fail("bad magic number");
  }

  Grid<double> read(int& bit_depth_out) {
    const std::uint32_t ifd = u32(4);
    if (ifd + 2 > bytes_.size()) fail("IFD offset out of bounds");
    const std::uint16_t entries = u16(ifd);

    std::uint32_t width = 0, height = 0, rows_per_strip = 0xffffffffu;
    std::uint32_t bits = 1, compression = 1, samples = 1;
    std::vector<std::uint32_t> strip_offsets, strip_counts;
    bool tiled = false;

    for (std::uint16_t e = 0; e < entries; ++e) {
      const std::uint32_t at = ifd + 2 + 12u * e;
      if (at + 12 > bytes_.size()) fail("truncated IFD entry");
      const std::uint16_t tag = u16(at);
      switch (tag) {
        case 256: width = entry_value(at); break;
        case 257: height = entry_value(at); break;
        case 258: bits = entry_value(at); break;
        case 259: compression = entry_value(at); break;
        case 273: strip_offsets = entry_values(at); break;
        case 277: samples = entry_value(at); break;
        case 278: rows_per_strip = entry_value(at); break;
        case 279: strip_counts = entry_values(at); break;
        case 322:
        case 323:
        case 324:
        case 325: tiled = true; break;
        default: break;
      }
    }

    if (width == 0 || height == 0) fail("missing dimensions");
    if (samples != 1) fail("multi-channel unsupported");
    if (compression != 1) fail("only uncompressed TIFF is supported");
    if (tiled || strip_offsets.empty()) fail("only strip-organized TIFF is supported");
    if (bits != 8 && bits != 16)
      fail("unsupported bit depth " + std::to_string(bits) + " (expected 8 or 16)");

    const std::size_t bytes_per_px = bits / 8;
    const std::size_t row_bytes = static_cast<std::size_t>(width) * bytes_per_px;
    Grid<double> values(static_cast<Index>(height), static_cast<Index>(width));

    std::uint32_t row = 0;
    for (std::size_t s = 0; s < strip_offsets.size() && row < height; ++s) {
      const std::uint32_t strip_rows =
          std::min<std::uint32_t>(rows_per_strip, height - row);
      const std::size_t need = static_cast<std::size_t>(strip_rows) * row_bytes;
      if (s < strip_counts.size() && strip_counts[s] < need) fail("short strip");
      std::size_t at = strip_offsets[s];
      if (at + need > bytes_.size()) fail("strip data out of bounds");
      for (std::uint32_t r = 0; r < strip_rows; ++r, ++row) {
        for (std::uint32_t c = 0; c < width; ++c) {
          const std::size_t px = at + static_cast<std::size_t>(c) * bytes_per_px;
          values(static_cast<Index>(row), static_cast<Index>(c)) =
              bits == 8 ? static_cast<double>(bytes_[px]) : static_cast<double>(u16(px));
        }
        at += row_bytes;
      }
    }
    if (row != height) fail("missing strip data");
    bit_depth_out = static_cast<int>(bits);
    return values;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw std::runtime_error("'" + name_ + "': " + why);
  }
  std::uint16_t u16(std::size_t at) const {
    if (at + 2 > bytes_.size()) fail("read past end");
    return little_ ? static_cast<std::uint16_t>(bytes_[at] | bytes_[at + 1] << 8)
                   : static_cast<std::uint16_t>(bytes_[at] << 8 | bytes_[at + 1]);
  }
  std::uint32_t u32(std::size_t at) const {
    if (at + 4 > bytes_.size()) fail("read past end");
    return little_ ? (std::uint32_t(bytes_[at]) | std::uint32_t(bytes_[at + 1]) << 8 |
                      std::uint32_t(bytes_[at + 2]) << 16 | std::uint32_t(bytes_[at + 3]) << 24)
                   : (std::uint32_t(bytes_[at]) << 24 | std::uint32_t(bytes_[at + 1]) << 16 |
                      std::uint32_t(bytes_[at + 2]) << 8 | std::uint32_t(bytes_[at + 3]));
  }

  // A short-value entry stores its payload inline, longer ones point elsewhere.
  std::uint32_t type_size(std::uint16_t type) const {
    switch (type) {
      case 1: case 2: case 6: case 7: return 1;
      case 3: case 8: return 2;
      case 4: case 9: case 11: return 4;
      default: return 8;
    }
  }
  std::uint32_t value_at(std::size_t at, std::uint16_t type) const {
    return type_size(type) == 2 ? u16(at) : type_size(type) == 1 ? bytes_.at(at) : u32(at);
  }
  std::uint32_t entry_value(std::uint32_t at) const {
    const std::uint16_t type = u16(at + 2);
    const std::uint32_t count = u32(at + 4);
    if (count != 1) fail("unexpected multi-valued tag");
    return value_at(at + 8, type);
  }
  std::vector<std::uint32_t> entry_values(std::uint32_t at) const {
    const std::uint16_t type = u16(at + 2);
    const std::uint32_t count = u32(at + 4);
    const std::uint32_t sz = type_size(type);
    std::size_t base = sz * count <= 4 ? at + 8 : u32(at + 8);
    std::vector<std::uint32_t> out;
    out.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) out.push_back(value_at(base + k * sz, type));
    return out;
  }

  std::vector<unsigned char> bytes_;
  std::string name_;
  bool little_ = true;
};

Grid<std::uint16_t> quantize(const Image& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw std::invalid_argument("bit depth must be 8 or 16");
  const double peak = bit_depth == 8 ? 255.0 : 65535.0;
  if (img.range.width() == 0.0)
    throw std::invalid_argument("cannot quantize a zero-width range");
  const double scale = peak / img.range.width();
  Grid<std::uint16_t> pixels(img.rows(), img.cols());
  for (Index r = 0; r < img.rows(); ++r)
    for (Index c = 0; c < img.cols(); ++c) {
      const double mapped = (img.values(r, c) - img.range.lo) * scale;
      const double rounded = std::nearbyint(mapped);
      if (rounded < 0.0 || rounded > peak)
        throw std::runtime_error("value " + std::to_string(img.values(r, c)) +
                                 " maps outside the representable range");
      pixels(r, c) = static_cast<std::uint16_t>(rounded);
    }
  return pixels;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw std::runtime_error("no such file: '" + path.string() + "'");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  unsigned char magic[4] = {0, 0, 0, 0};
  in.read(reinterpret_cast<char*>(magic), 4);

  int bit_depth = 0;
  Grid<double> values;
  if (magic[0] == 0x89 && magic[1] == 'P') {
    in.close();
    values = read_png_grid(path, bit_depth);
  } else if ((magic[0] == 'I' && magic[1] == 'I') || (magic[0] == 'M' && magic[1] == 'M')) {
    in.seekg(0, std::ios::end);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(in.tellg()));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    values = TiffParser(std::move(bytes), path.string()).read(bit_depth);
  } else {
    throw std::runtime_error("'" + path.string() + "': unsupported format (expected PNG or TIFF)");
  }
  const double hi = bit_depth == 8 ? 255.0 : 65535.0;
  return Image(std::move(values), ValueRange{0.0, hi});
}

void save_image(const Image& img, const std::filesystem::path& path, int bit_depth) {
  write_png_grid(path, quantize(img, bit_depth), bit_depth);
}

InstanceMask load_instance_mask(const std::filesystem::path& path) {
  const Image img = load_image(path);
  Grid<std::int32_t> labels = img.values.cast<std::int32_t>();
  return InstanceMask(std::move(labels));
}

void save_instance_mask(const InstanceMask& mask, const std::filesystem::path& path) {
  Grid<std::uint16_t> pixels = mask.labels().cast<std::uint16_t>();
  write_png_grid(path, pixels, 16);
}

BinaryMask load_binary_mask(const std::filesystem::path& path) {
  const Image img = load_image(path);
  return img.values >= img.range.midpoint();
}

void save_binary_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  Grid<std::uint16_t> pixels =
      mask.select(Grid<std::uint16_t>::Constant(mask.rows(), mask.cols(), 255),
                  Grid<std::uint16_t>::Constant(mask.rows(), mask.cols(), 0));
  write_png_grid(path, pixels, 8);
}

void save_frequency_mask(const FrequencyMask& mask, const std::filesystem::path& path) {
  Grid<std::uint16_t> pixels =
      mask.keep.select(Grid<std::uint16_t>::Constant(mask.rows(), mask.cols(), 255),
                       Grid<std::uint16_t>::Constant(mask.rows(), mask.cols(), 0));
  write_png_grid(path, pixels, 8);
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for hashing");
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char chunk[4096];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(chunk[i]);
      hash *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
  return std::string(hex);
}

}  // namespace nucsynth
