#include <gtest/gtest.h>

#include <random>

#include <fmt/format.h>

#include <cstring>

#include "test_util.hpp"
#include "vidcurate/error.hpp"
#include "vidcurate/image_io.hpp"

namespace vidcurate {
namespace {

image_io::RgbImage random_image(int w, int h, std::mt19937_64& rng) {
  image_io::RgbImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w * h * 3))};
  for (auto& b : img.pixels) b = static_cast<std::uint8_t>(rng());
  return img;
}

TEST(ImageIo, BmpAndPngDecodeWhatWasEncoded) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 17);
    const int h = 1 + static_cast<int>(rng() % 11);
    const auto img = random_image(w, h, rng);
    for (const auto& bytes : {image_io::encode_bmp(img), image_io::encode_png(img)}) {
      const auto back = image_io::decode(bytes, "mem");
      ASSERT_EQ(back.width, w);
      ASSERT_EQ(back.height, h);
      ASSERT_EQ(back.pixels, img.pixels);
    }
  }
}

TEST(ImageIo, TopDownBmp) {
  image_io::RgbImage img{2, 2, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}};
  auto bytes = image_io::encode_bmp(img);
  // Flip to top-down: negate height and reverse the two 8-byte rows.
  const std::int32_t neg = -2;
  std::memcpy(&bytes[22], &neg, 4);
  std::vector<std::uint8_t> rows(bytes.begin() + 54, bytes.end());
  std::copy(rows.begin() + 8, rows.end(), bytes.begin() + 54);
  std::copy(rows.begin(), rows.begin() + 8, bytes.begin() + 62);
  EXPECT_EQ(image_io::decode(bytes, "td").pixels, img.pixels);
}

TEST(ImageIo, GarbageIsDecodeErrorNamingTheSource) {
  const std::vector<std::uint8_t> junk{'n', 'o', 'p', 'e'};
  try {
    image_io::decode(junk, "frame_0042.png");
    FAIL() << "expected DecodeError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DecodeError);
    EXPECT_NE(std::string(e.what()).find("frame_0042.png"), std::string::npos);
  }
}

TEST(ImageIo, TruncatedPngIsDecodeError) {
  std::mt19937_64 rng(1);
  auto bytes = image_io::encode_png(random_image(8, 8, rng));
  bytes.resize(bytes.size() / 2);
  try {
    image_io::decode(bytes, "cut.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DecodeError);
  }
}

TEST(ImageIo, ExtensionFilter) {
  EXPECT_TRUE(image_io::is_supported_extension("a.PNG"));
  EXPECT_TRUE(image_io::is_supported_extension("a.bmp"));
  EXPECT_FALSE(image_io::is_supported_extension("a.jpg"));
  EXPECT_FALSE(image_io::is_supported_extension("frames.txt"));
}

}  // namespace
}  // namespace vidcurate
