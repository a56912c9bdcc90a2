#include "fairdet/denoise.hpp"

#include <cmath>

#include "fairdet/error.hpp"

namespace fairdet {

int DenoiseConfig::radius() const { return static_cast<int>(std::ceil(3.0 * sigma)); }

std::vector<double> gaussian_kernel(const DenoiseConfig& cfg) {
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) {
    throw ContractError("denoise: sigma must be positive");
  }
  const int r = cfg.radius();
  std::vector<double> taps(2 * static_cast<std::size_t>(r) + 1);
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    const double v = std::exp(-0.5 * k * k / (cfg.sigma * cfg.sigma));
    taps[k + r] = v;
    sum += v;
  }
  for (double& t : taps) t /= sum;
  return taps;
}

int reflect_index(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

Image denoise(const Image& img, const DenoiseConfig& cfg) {
  if (img.range() == ValueRange::Byte255) {
    throw ContractError("denoise expects a normalized (Unit01) or Signed image");
  }
  const auto taps = gaussian_kernel(cfg);
  const int r = cfg.radius();
  const int h = img.height();
  const int w = img.width();
  const int c = img.channels();

  Image tmp(h, w, c, ValueRange::Signed);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) acc += taps[k + r] * img.at(y, reflect_index(x + k, w), ch);
        tmp.at(y, x, ch) = acc;
      }

  Image out(h, w, c, ValueRange::Signed);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) acc += taps[k + r] * tmp.at(reflect_index(y + k, h), x, ch);
        out.at(y, x, ch) = acc;
      }

  if (img.range() == ValueRange::Unit01) {
    // Convex combinations can land an ulp outside [0,1].
    for (double& v : out.data()) v = std::fmin(1.0, std::fmax(0.0, v));
    return out.with_range(ValueRange::Unit01);
  }
  return out;
}

Image residual(const Image& img, const DenoiseConfig& cfg) {
  const Image smooth = denoise(img, cfg);
  Image out(img.height(), img.width(), img.channels(), ValueRange::Signed);
  const auto a = img.data();
  const auto b = smooth.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] - b[i];
  return out;
}

}  // namespace fairdet
