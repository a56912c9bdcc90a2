#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fairdet/image.hpp"

namespace fairdet {

// Read-only pool of reference images sharing one shape.
class ReferenceSet {
 public:
  ReferenceSet(std::vector<Image> refs, std::vector<std::string> ids);

  std::size_t size() const noexcept { return refs_.size(); }
  const Image& image(std::size_t i) const { return refs_.at(i); }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  std::optional<std::size_t> find(std::string_view id) const;

 private:
  std::vector<Image> refs_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Channel concatenation [r, x - r]; tagged Signed.
Image make_anchor(const Image& x, const Image& r);

// [0, x]: the zero-reference layout used by detectors trained without anchors.
Image make_raw_input(const Image& x);

// Zeroes the first half of the channels in place.
void mask_reference(Image& anchor);

// Uniform draw over entries whose id differs from exclude_id. Returns the index.
std::size_t sample_reference(const ReferenceSet& set, std::optional<std::string_view> exclude_id,
                             std::uint64_t seed);

struct AnchorBatch {
  std::vector<Image> inputs;
  bool masked = false;  // shared by every sample
  std::vector<std::string> ref_ids;
  std::vector<int> labels;
};

// One Bernoulli(alpha) draw decides the mask for the whole batch; sample i
// draws its reference from derive_seed(seed, i + 1), excluding its own id.
// References are drawn and recorded even when masked.
AnchorBatch make_batch(std::span<const Image> xs, std::span<const int> labels,
                       std::span<const std::string> ids, const ReferenceSet& set, double alpha,
                       std::uint64_t seed);

}  // namespace fairdet
