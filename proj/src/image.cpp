#include "fairdet/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "fairdet/error.hpp"

namespace fairdet {

const char* to_string(ValueRange r) {
  switch (r) {
    case ValueRange::Byte255: return "Byte255";
    case ValueRange::Unit01: return "Unit01";
    case ValueRange::Signed: return "Signed";
  }
  return "?";
}

Image::Image(int height, int width, int channels, ValueRange range)
    : height_(height), width_(width), channels_(channels), range_(range) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw ContractError("image dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
}

Image::Image(int height, int width, int channels, ValueRange range, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), range_(range), data_(std::move(data)) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw ContractError("image dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw ContractError("image data length " + std::to_string(data_.size()) +
                        " does not match " + std::to_string(height) + "x" +
                        std::to_string(width) + "x" + std::to_string(channels));
  }
  check_range(*this);
}

Image Image::with_range(ValueRange range) const {
  Image out = *this;
  out.range_ = range;
  check_range(out);
  return out;
}

Image Image::channel(int c) const {
  if (c < 0 || c >= channels_) throw ContractError("channel index out of range");
  Image out(height_, width_, 1, range_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out.at(y, x, 0) = at(y, x, c);
  return out;
}

void check_range(const Image& img) {
  switch (img.range()) {
    case ValueRange::Unit01:
      for (double v : img.data())
        if (!(v >= 0.0 && v <= 1.0)) throw ContractError("Unit01 image has value outside [0,1]");
      break;
    case ValueRange::Byte255:
      for (double v : img.data())
        if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v))
          throw ContractError("Byte255 image has non-integer or out-of-range value");
      break;
    case ValueRange::Signed:
      break;
  }
}

Image normalize(const Image& img) {
  if (img.range() != ValueRange::Byte255) {
    throw ContractError(std::string("normalize expects Byte255 input, got ") +
                        to_string(img.range()));
  }
  std::vector<double> out(img.data().begin(), img.data().end());
  for (double& v : out) v /= 255.0;
  return Image(img.height(), img.width(), img.channels(), ValueRange::Unit01, std::move(out));
}

Image quantize(const Image& img) {
  if (img.range() != ValueRange::Unit01) {
    throw ContractError(std::string("quantize expects Unit01 input, got ") +
                        to_string(img.range()));
  }
  std::vector<double> out(img.data().begin(), img.data().end());
  for (double& v : out) v = std::clamp(std::round(v * 255.0), 0.0, 255.0);
  return Image(img.height(), img.width(), img.channels(), ValueRange::Byte255, std::move(out));
}

double euclidean_distance(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ContractError("euclidean_distance: shape mismatch");
  if (a.range() != b.range()) throw ContractError("euclidean_distance: range tag mismatch");
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Cursor over the PNM header; comments are allowed between fields.
struct HeaderReader {
  std::span<const unsigned char> bytes;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      if (is_space(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos;
    long value = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000) throw ParseError(std::string("PNM ") + field + " too large", start);
      ++pos;
    }
    if (pos == start) {
      throw ParseError(std::string("PNM header: expected ") + field + " at byte " +
                           std::to_string(start),
                       start);
    }
    return value;
  }
};

}  // namespace

Image decode_ppm(std::span<const unsigned char> bytes) {
  HeaderReader r{bytes};
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
    throw ParseError("PNM header: expected magic P6 or P5 at byte 0", 0);
  }
  const int channels = bytes[1] == '6' ? 3 : 1;
  r.pos = 2;
  if (r.pos < bytes.size() && !is_space(bytes[r.pos]) && bytes[r.pos] != '#') {
    throw ParseError("PNM header: expected whitespace at byte 2", 2);
  }
  const long width = r.read_uint("width");
  const long height = r.read_uint("height");
  r.skip_space_and_comments();
  const std::size_t maxval_at = r.pos;
  const long maxval = r.read_uint("maxval");
  if (maxval != 255) {
    throw ParseError("PNM header: maxval " + std::to_string(maxval) + " is not 255 at byte " +
                         std::to_string(maxval_at),
                     maxval_at);
  }
  if (width <= 0 || height <= 0) throw ParseError("PNM header: zero dimension", maxval_at);
  if (r.pos >= bytes.size() || !is_space(bytes[r.pos])) {
    throw ParseError("PNM header: expected single whitespace after maxval at byte " +
                         std::to_string(r.pos),
                     r.pos);
  }
  const std::size_t payload_at = r.pos + 1;
  const std::size_t need = static_cast<std::size_t>(width) * height * channels;
  const std::size_t have = bytes.size() - payload_at;
  if (have < need) {
    throw ParseError("PNM payload truncated: expected " + std::to_string(need) +
                         " bytes from byte " + std::to_string(payload_at) + ", got " +
                         std::to_string(have) + " (file ends at byte " +
                         std::to_string(bytes.size()) + ")",
                     bytes.size());
  }
  if (have > need) {
    throw ParseError("PNM payload has trailing data at byte " + std::to_string(payload_at + need),
                     payload_at + need);
  }
  std::vector<double> data(need);
  for (std::size_t i = 0; i < need; ++i) data[i] = bytes[payload_at + i];
  return Image(static_cast<int>(height), static_cast<int>(width), channels, ValueRange::Byte255,
               std::move(data));
}

std::vector<unsigned char> encode_ppm(const Image& img) {
  if (img.range() != ValueRange::Byte255) throw ContractError("save_ppm expects a Byte255 image");
  if (img.channels() != 1 && img.channels() != 3) {
    throw ContractError("save_ppm supports 1 or 3 channels");
  }
  const std::string header = std::string(img.channels() == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(img.width()) + " " + std::to_string(img.height()) +
                             "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double v : img.data()) out.push_back(static_cast<unsigned char>(v));
  return out;
}

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return decode_ppm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

void save_ppm(const Image& img, const std::filesystem::path& path) {
  const auto bytes = encode_ppm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace fairdet
