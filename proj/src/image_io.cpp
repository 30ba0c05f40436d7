#include "r2d2/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "r2d2/errors.hpp"

namespace r2d2 {

namespace fs = std::filesystem;

namespace {

constexpr char kRawMagic[4] = {'R', '2', 'D', '2'};
constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

std::vector<unsigned char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t le_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

Image decode_raw(const std::vector<unsigned char>& bytes, const fs::path& path) {
  if (bytes.size() < 16) throw IoError("'" + path.string() + "': raw header truncated");
  const std::uint32_t width = le_u32(bytes.data() + 4);
  const std::uint32_t height = le_u32(bytes.data() + 8);
  const std::uint32_t dtype = le_u32(bytes.data() + 12);
  if (dtype != kRawDtypeF32) {
    throw IoError("'" + path.string() + "': unsupported dtype code " + std::to_string(dtype));
  }
  if (width == 0 || height == 0) throw IoError("'" + path.string() + "': zero image dimension");
  const std::uint64_t expected = 4ull * width * height;
  const std::uint64_t actual = bytes.size() - 16;
  if (actual != expected) {
    throw IoError("'" + path.string() + "': payload has " + std::to_string(actual) +
                  " bytes, expected " + std::to_string(expected));
  }
  Image img(height, width);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const float v = std::bit_cast<float>(le_u32(bytes.data() + 16 + 4 * i));
    if (!std::isfinite(v)) {
      throw IoError("'" + path.string() + "': non-finite value at pixel " + std::to_string(i));
    }
    img[i] = v;
  }
  return img;
}

struct PngReadState {
  const std::vector<unsigned char>* bytes;
  std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->offset + count > st->bytes->size()) png_error(png, "truncated PNG data");
  std::memcpy(out, st->bytes->data() + st->offset, count);
  st->offset += count;
}

// libpng reports errors by longjmp back to the setjmp in the caller.
void png_record_error(png_structp png, png_const_charp msg) {
  auto* where = static_cast<std::string*>(png_get_error_ptr(png));
  *where += ": ";
  *where += msg;
  png_longjmp(png, 1);
}

void png_silent_warning(png_structp, png_const_charp) {}

Image decode_png(const std::vector<unsigned char>& bytes, const fs::path& path) {
  std::string where = "'" + path.string() + "'";
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &where, png_record_error,
                                           png_silent_warning);
  if (!png) throw IoError(where + ": libpng init failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp& p;
    png_infop& i;
    ~Guard() { png_destroy_read_struct(&p, &i, nullptr); }
  } guard{png, info};
  if (!info) throw IoError(where + ": libpng init failed");

  PngReadState st{&bytes, 0};
  std::vector<unsigned char> raster;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) throw IoError(where);
  png_set_read_fn(png, &st, png_read_from_memory);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (width == 0 || height == 0) throw IoError(where + ": zero image dimension");
  if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
    throw IoError(where + ": only 8/16-bit grayscale PNG is supported");
  }
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  raster.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = raster.data() + r * row_bytes;
  png_read_image(png, rows.data());

  Image img(height, width);
  const double scale = depth == 16 ? 65535.0 : 255.0;
  for (png_uint_32 r = 0; r < height; ++r) {
    for (png_uint_32 c = 0; c < width; ++c) {
      const unsigned char* p = rows[r] + (depth == 16 ? 2 * c : c);
      const unsigned v = depth == 16 ? (static_cast<unsigned>(p[0]) << 8) | p[1] : p[0];
      img(r, c) = static_cast<double>(v) / scale;
    }
  }
  return img;
}

void png_write_to_string(png_structp png, png_bytep data, png_size_t count) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), count);
}

void png_flush_noop(png_structp) {}

std::uint16_t quantize16(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::round(clamped * 65535.0));
}

std::string encode_png(const Image& img, const fs::path& path) {
  std::string where = "'" + path.string() + "'";
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &where, png_record_error,
                                            png_silent_warning);
  if (!png) throw IoError(where + ": libpng init failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp& p;
    png_infop& i;
    ~Guard() { png_destroy_write_struct(&p, &i); }
  } guard{png, info};
  if (!info) throw IoError(where + ": libpng init failed");

  std::string out;
  std::vector<unsigned char> row(2 * img.cols());
  if (setjmp(png_jmpbuf(png))) throw IoError(where);
  png_set_write_fn(png, &out, png_write_to_string, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols()), static_cast<png_uint_32>(img.rows()),
               16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (std::size_t c = 0; c < img.cols(); ++c) {
      const std::uint16_t q = quantize16(img(r, c));
      row[2 * c] = static_cast<unsigned char>(q >> 8);
      row[2 * c + 1] = static_cast<unsigned char>(q & 0xFF);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  return out;
}

std::string encode_raw(const Image& img) {
  std::string out(kRawMagic, 4);
  append_u32(out, static_cast<std::uint32_t>(img.cols()));
  append_u32(out, static_cast<std::uint32_t>(img.rows()));
  append_u32(out, kRawDtypeF32);
  out.reserve(out.size() + 4 * img.size());
  for (double v : img.values()) append_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

}  // namespace

ImageFormat format_for_path(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" ? ImageFormat::png16 : ImageFormat::raw;
}

Image load_image(const fs::path& path) {
  const auto bytes = read_all(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kRawMagic, 4) == 0) return decode_raw(bytes, path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) return decode_png(bytes, path);
  throw IoError("'" + path.string() + "': unknown image format");
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into '" + path.string() + "'");
  }
}

void save_image(const Image& img, const fs::path& path, ImageFormat format) {
  if (img.empty()) throw IoError("refusing to save an empty image to '" + path.string() + "'");
  if (!all_finite(img)) throw IoError("refusing to save non-finite image to '" + path.string() + "'");
  write_file_atomic(path, format == ImageFormat::png16 ? encode_png(img, path) : encode_raw(img));
}

void save_image(const Image& img, const fs::path& path) {
  save_image(img, path, format_for_path(path));
}

}  // namespace r2d2
