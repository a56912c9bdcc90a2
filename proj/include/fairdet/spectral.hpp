#pragma once

#include <complex>
#include <span>
#include <vector>

#include "fairdet/image.hpp"

namespace fairdet {

// Unnormalized forward 2-D DFT of each channel. Bins are stored
// channel-major, then row-major: bins[(c * height + u) * width + v].
struct Spectrum {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::complex<double>> bins;

  std::complex<double> at(int u, int v, int c = 0) const {
    return bins[(static_cast<std::size_t>(c) * height + u) * width + v];
  }
  bool same_shape(const Spectrum& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

bool is_power_of_two(int n);

// In-place iterative radix-2 transform; data.size() must be a power of two.
void fft1d(std::span<std::complex<double>> data);

// One real H x W matrix (row-major).
Spectrum fft2d(std::span<const double> values, int height, int width);

// All channels of an image.
Spectrum fft2d(const Image& img);

// |F|^2 per bin, returned as an H x W x C image tagged Signed (entries >= 0).
Image power_spectrum(const Image& img);

// sqrt(sum |A - B|^2) over every bin of every channel.
double complex_l2_distance(const Spectrum& a, const Spectrum& b);

}  // namespace fairdet
