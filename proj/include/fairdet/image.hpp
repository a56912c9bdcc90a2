#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace fairdet {

enum class ValueRange { Byte255, Unit01, Signed };

const char* to_string(ValueRange r);

// H x W x C raster, row-major with interleaved channels.
class Image {
 public:
  Image() = default;
  // Zero-filled.
  Image(int height, int width, int channels, ValueRange range);
  // Validates the length and, for Byte255/Unit01, the value range.
  Image(int height, int width, int channels, ValueRange range, std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  ValueRange range() const noexcept { return range_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  double at(int y, int x, int c) const noexcept { return data_[index(y, x, c)]; }
  double& at(int y, int x, int c) noexcept { return data_[index(y, x, c)]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  // Retags without touching values; the new tag's invariant is checked.
  Image with_range(ValueRange range) const;

  // Single channel c as a 1-channel image carrying the same range tag.
  Image channel(int c) const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  ValueRange range_ = ValueRange::Signed;
  std::vector<double> data_;
};

// Throws ContractError when values violate the range tag.
void check_range(const Image& img);

// Byte255 -> Unit01 by division with 255.
Image normalize(const Image& img);

// Unit01 -> Byte255, rounding to nearest and clamping.
Image quantize(const Image& img);

// L2 norm of the elementwise difference. Shapes and range tags must match.
double euclidean_distance(const Image& a, const Image& b);

// Binary P6 (3 channels) or P5 (1 channel), maxval 255.
Image load_ppm(const std::filesystem::path& path);
Image decode_ppm(std::span<const unsigned char> bytes);
void save_ppm(const Image& img, const std::filesystem::path& path);
std::vector<unsigned char> encode_ppm(const Image& img);

}  // namespace fairdet
