#pragma once

#include <cstdint>
#include <vector>

#include "fairdet/image.hpp"

namespace fairdet {

// Square image split into K x K non-overlapping P x P tiles, stored row-major.
struct PatchGrid {
  std::vector<Image> patches;
  int per_side = 0;    // K
  int patch_size = 0;  // P
  int source_height = 0;
  int source_width = 0;
  int source_channels = 0;
  ValueRange range = ValueRange::Signed;
};

PatchGrid partition(const Image& img, int patch_size);

// Uniform Fisher-Yates permutation of length n drawn from seed.
std::vector<int> seeded_permutation(int n, std::uint64_t seed);

// Reorders tiles so that output slot i holds input tile perm[i].
PatchGrid permute_patches(const PatchGrid& grid, const std::vector<int>& perm);

PatchGrid shuffle_patches(const PatchGrid& grid, std::uint64_t seed);

Image reconstruct(const PatchGrid& grid);

}  // namespace fairdet
