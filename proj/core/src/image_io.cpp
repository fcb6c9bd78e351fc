#include "vidcurate/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "vidcurate/error.hpp"

namespace vidcurate::image_io {
namespace {

[[noreturn]] void decode_fail(const std::filesystem::path& name, const std::string& why) {
  throw Error(Errc::DecodeError, name.string() + ": " + why);
}

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

RgbImage decode_bmp(std::span<const std::uint8_t> b, const std::filesystem::path& name) {
  if (b.size() < 54) decode_fail(name, "truncated BMP header");
  const std::uint32_t data_offset = le32(&b[10]);
  const std::uint32_t dib_size = le32(&b[14]);
  if (dib_size < 40) decode_fail(name, "unsupported BMP core header");
  const auto w = static_cast<std::int32_t>(le32(&b[18]));
  const auto h_raw = static_cast<std::int32_t>(le32(&b[22]));
  const std::uint16_t bpp = le16(&b[28]);
  const std::uint32_t compression = le32(&b[30]);
  std::uint32_t palette_count = le32(&b[46]);

  if (w <= 0 || h_raw == 0) decode_fail(name, "invalid BMP dimensions");
  const bool top_down = h_raw < 0;
  const std::int64_t h = top_down ? -static_cast<std::int64_t>(h_raw) : h_raw;
  if (compression != 0 && !(compression == 3 && bpp == 32)) {
    decode_fail(name, "compressed BMP not supported");
  }
  if (bpp != 24 && bpp != 32 && bpp != 8) decode_fail(name, "unsupported BMP bit depth");

  std::vector<std::uint8_t> palette;
  if (bpp == 8) {
    if (palette_count == 0) palette_count = 256;
    const std::size_t pal_off = 14 + dib_size;
    if (pal_off + palette_count * 4 > b.size()) decode_fail(name, "truncated BMP palette");
    palette.assign(b.begin() + static_cast<std::ptrdiff_t>(pal_off),
                   b.begin() + static_cast<std::ptrdiff_t>(pal_off + palette_count * 4));
  }

  const std::size_t row_bytes = ((static_cast<std::size_t>(w) * bpp + 31) / 32) * 4;
  if (data_offset + row_bytes * static_cast<std::size_t>(h) > b.size()) {
    decode_fail(name, "truncated BMP pixel data");
  }

  RgbImage img;
  img.width = w;
  img.height = static_cast<int>(h);
  img.pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::int64_t row = 0; row < h; ++row) {
    const std::int64_t src_row = top_down ? row : (h - 1 - row);
    const std::uint8_t* src = &b[data_offset + static_cast<std::size_t>(src_row) * row_bytes];
    std::uint8_t* dst = &img.pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(w) * 3];
    for (std::int32_t x = 0; x < w; ++x) {
      if (bpp == 8) {
        const std::uint32_t idx = src[x];
        if (idx >= palette_count) decode_fail(name, "palette index out of range");
        dst[3 * x + 0] = palette[idx * 4 + 2];
        dst[3 * x + 1] = palette[idx * 4 + 1];
        dst[3 * x + 2] = palette[idx * 4 + 0];
      } else {
        const std::size_t step = bpp / 8;
        dst[3 * x + 0] = src[step * x + 2];
        dst[3 * x + 1] = src[step * x + 1];
        dst[3 * x + 2] = src[step * x + 0];
      }
    }
  }
  return img;
}

struct PngReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->pos + len > st->bytes.size()) png_error(png, "unexpected end of data");
  std::memcpy(out, st->bytes.data() + st->pos, len);
  st->pos += len;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes, const std::filesystem::path& name) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) decode_fail(name, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    decode_fail(name, "libpng init failed");
  }

  RgbImage img;
  std::vector<png_bytep> rows;
  PngReadState state{bytes, 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    decode_fail(name, "corrupt PNG stream");
  }
  png_set_read_fn(png, &state, png_read_from_span);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  if (png_get_rowbytes(png, info) != static_cast<std::size_t>(img.width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    decode_fail(name, "unexpected PNG row layout");
  }
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3);
  rows.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        img.pixels.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) * 3;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RgbImage decode(std::span<const std::uint8_t> bytes, const std::filesystem::path& name) {
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::equal(std::begin(kPngMagic), std::end(kPngMagic), bytes.begin())) {
    return decode_png(bytes, name);
  }
  if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') return decode_bmp(bytes, name);
  decode_fail(name, "unrecognized image format");
}

RgbImage decode(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    decode_fail(path, "unreadable file");
  }
  return decode(bytes, path);
}

std::vector<std::uint8_t> encode_bmp(const RgbImage& img) {
  const std::size_t row_bytes = ((static_cast<std::size_t>(img.width) * 24 + 31) / 32) * 4;
  const std::size_t data_size = row_bytes * static_cast<std::size_t>(img.height);
  std::vector<std::uint8_t> out;
  out.reserve(54 + data_size);
  out.push_back('B');
  out.push_back('M');
  put_le32(out, static_cast<std::uint32_t>(54 + data_size));
  put_le32(out, 0);
  put_le32(out, 54);
  put_le32(out, 40);
  put_le32(out, static_cast<std::uint32_t>(img.width));
  put_le32(out, static_cast<std::uint32_t>(img.height));
  put_le16(out, 1);
  put_le16(out, 24);
  put_le32(out, 0);
  put_le32(out, static_cast<std::uint32_t>(data_size));
  put_le32(out, 2835);
  put_le32(out, 2835);
  put_le32(out, 0);
  put_le32(out, 0);
  for (int row = img.height - 1; row >= 0; --row) {
    const std::uint8_t* src =
        &img.pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(img.width) * 3];
    for (int x = 0; x < img.width; ++x) {
      out.push_back(src[3 * x + 2]);
      out.push_back(src[3 * x + 1]);
      out.push_back(src[3 * x + 0]);
    }
    for (std::size_t pad = static_cast<std::size_t>(img.width) * 3; pad < row_bytes; ++pad) {
      out.push_back(0);
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw Error(Errc::IoError, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(Errc::IoError, "libpng init failed");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::IoError, "PNG encode failed");
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(
        img.pixels.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) * 3);
  }
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_bmp(const std::filesystem::path& path, const RgbImage& img) {
  write_bytes(path, encode_bmp(img));
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  write_bytes(path, encode_png(img));
}

bool is_supported_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".bmp";
}

}  // namespace vidcurate::image_io
