#include "fairdet/patches.hpp"

#include <numeric>
#include <string>
#include <utility>

#include "fairdet/error.hpp"
#include "fairdet/random.hpp"

namespace fairdet {

PatchGrid partition(const Image& img, int patch_size) {
  if (img.height() != img.width()) throw ContractError("partition: image must be square");
  if (patch_size <= 0 || img.height() % patch_size != 0) {
    throw ContractError("partition: side " + std::to_string(img.height()) +
                        " not divisible by patch size " + std::to_string(patch_size));
  }
  PatchGrid grid;
  grid.per_side = img.height() / patch_size;
  grid.patch_size = patch_size;
  grid.source_height = img.height();
  grid.source_width = img.width();
  grid.source_channels = img.channels();
  grid.range = img.range();
  grid.patches.reserve(static_cast<std::size_t>(grid.per_side) * grid.per_side);
  const int c = img.channels();
  for (int py = 0; py < grid.per_side; ++py) {
    for (int px = 0; px < grid.per_side; ++px) {
      Image tile(patch_size, patch_size, c, ValueRange::Signed);
      for (int y = 0; y < patch_size; ++y)
        for (int x = 0; x < patch_size; ++x)
          for (int k = 0; k < c; ++k)
            tile.at(y, x, k) = img.at(py * patch_size + y, px * patch_size + x, k);
      grid.patches.push_back(tile.with_range(img.range()));
    }
  }
  return grid;
}

std::vector<int> seeded_permutation(int n, std::uint64_t seed) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.index(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

PatchGrid permute_patches(const PatchGrid& grid, const std::vector<int>& perm) {
  if (perm.size() != grid.patches.size()) throw ContractError("permutation length mismatch");
  PatchGrid out = grid;
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const int src = perm[i];
    if (src < 0 || static_cast<std::size_t>(src) >= perm.size() || seen[src]) {
      throw ContractError("permute_patches: not a permutation");
    }
    seen[src] = true;
    out.patches[i] = grid.patches[src];
  }
  return out;
}

PatchGrid shuffle_patches(const PatchGrid& grid, std::uint64_t seed) {
  return permute_patches(grid, seeded_permutation(static_cast<int>(grid.patches.size()), seed));
}

Image reconstruct(const PatchGrid& grid) {
  const int k = grid.per_side;
  const int p = grid.patch_size;
  const int c = grid.source_channels;
  if (k <= 0 || p <= 0 || grid.patches.size() != static_cast<std::size_t>(k) * k ||
      k * p != grid.source_height || k * p != grid.source_width) {
    throw ContractError("reconstruct: inconsistent grid metadata");
  }
  Image out(grid.source_height, grid.source_width, c, ValueRange::Signed);
  for (int idx = 0; idx < k * k; ++idx) {
    const Image& tile = grid.patches[idx];
    if (tile.height() != p || tile.width() != p || tile.channels() != c) {
      throw ContractError("reconstruct: tile " + std::to_string(idx) + " has wrong shape");
    }
    const int oy = (idx / k) * p;
    const int ox = (idx % k) * p;
    for (int y = 0; y < p; ++y)
      for (int x = 0; x < p; ++x)
        for (int ch = 0; ch < c; ++ch) out.at(oy + y, ox + x, ch) = tile.at(y, x, ch);
  }
  return out.with_range(grid.range);
}

}  // namespace fairdet
