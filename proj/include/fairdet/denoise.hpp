#pragma once

#include <vector>

#include "fairdet/image.hpp"

namespace fairdet {

// Separable Gaussian smoother with half-sample symmetric ("reflect") borders.
struct DenoiseConfig {
  double sigma = 1.0;

  int radius() const;
};

// Normalized 1-D taps of length 2*radius+1.
std::vector<double> gaussian_kernel(const DenoiseConfig& cfg);

// Maps any integer index onto [0, n) by mirroring about the half-sample edges.
int reflect_index(int i, int n);

// Accepts Unit01 or Signed input; the output keeps the input's tag.
Image denoise(const Image& img, const DenoiseConfig& cfg);

// img - denoise(img), tagged Signed.
Image residual(const Image& img, const DenoiseConfig& cfg);

}  // namespace fairdet
