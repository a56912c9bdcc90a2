#include "fairdet/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "fairdet/error.hpp"

namespace fairdet {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft1d(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ContractError("fft1d: length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles from direct cos/sin per index rather than a running product,
    // which keeps the error at the 1e-15 level for every size.
    std::vector<std::complex<double>> w(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      w[k] = {std::cos(angle), std::sin(angle)};
    }
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const auto u = data[start + k];
        const auto t = w[k] * data[start + k + half];
        data[start + k] = u + t;
        data[start + k + half] = u - t;
      }
    }
  }
}

namespace {

void fft2d_into(std::span<const double> values, int height, int width,
                std::span<std::complex<double>> out) {
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i];
  for (int u = 0; u < height; ++u) fft1d(out.subspan(static_cast<std::size_t>(u) * width, width));
  std::vector<std::complex<double>> column(height);
  for (int v = 0; v < width; ++v) {
    for (int u = 0; u < height; ++u) column[u] = out[static_cast<std::size_t>(u) * width + v];
    fft1d(column);
    for (int u = 0; u < height; ++u) out[static_cast<std::size_t>(u) * width + v] = column[u];
  }
}

void check_dims(int height, int width) {
  if (!is_power_of_two(height) || !is_power_of_two(width)) {
    throw ContractError("fft2d: dimensions " + std::to_string(height) + "x" +
                        std::to_string(width) + " are not powers of two");
  }
}

}  // namespace

Spectrum fft2d(std::span<const double> values, int height, int width) {
  check_dims(height, width);
  if (values.size() != static_cast<std::size_t>(height) * width) {
    throw ContractError("fft2d: value count does not match dimensions");
  }
  Spectrum s{height, width, 1, std::vector<std::complex<double>>(values.size())};
  fft2d_into(values, height, width, s.bins);
  return s;
}

Spectrum fft2d(const Image& img) {
  check_dims(img.height(), img.width());
  const int h = img.height();
  const int w = img.width();
  const int c = img.channels();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Spectrum s{h, w, c, std::vector<std::complex<double>>(plane * c)};
  std::vector<double> values(plane);
  const auto data = img.data();
  for (int ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < plane; ++i) values[i] = data[i * c + ch];
    fft2d_into(values, h, w, std::span(s.bins).subspan(ch * plane, plane));
  }
  return s;
}

Image power_spectrum(const Image& img) {
  const Spectrum s = fft2d(img);
  Image out(s.height, s.width, s.channels, ValueRange::Signed);
  for (int ch = 0; ch < s.channels; ++ch)
    for (int u = 0; u < s.height; ++u)
      for (int v = 0; v < s.width; ++v) out.at(u, v, ch) = std::norm(s.at(u, v, ch));
  return out;
}

double complex_l2_distance(const Spectrum& a, const Spectrum& b) {
  if (!a.same_shape(b)) throw ContractError("complex_l2_distance: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.bins.size(); ++i) sum += std::norm(a.bins[i] - b.bins[i]);
  return std::sqrt(sum);
}

}  // namespace fairdet
