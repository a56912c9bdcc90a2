#include "fairdet/anchoring.hpp"

#include "fairdet/error.hpp"
#include "fairdet/random.hpp"

namespace fairdet {

ReferenceSet::ReferenceSet(std::vector<Image> refs, std::vector<std::string> ids)
    : refs_(std::move(refs)), ids_(std::move(ids)) {
  if (refs_.empty()) throw ContractError("reference set must be nonempty");
  if (refs_.size() != ids_.size()) throw ContractError("reference set: ids/images length mismatch");
  for (std::size_t i = 0; i < refs_.size(); ++i) {
    if (!refs_[i].same_shape(refs_[0])) throw ContractError("reference set: mixed shapes");
    if (!index_.emplace(ids_[i], i).second) {
      throw ContractError("reference set: duplicate id '" + ids_[i] + "'");
    }
  }
}

std::optional<std::size_t> ReferenceSet::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Image make_anchor(const Image& x, const Image& r) {
  if (!x.same_shape(r)) throw ContractError("make_anchor: reference shape differs from input");
  const int c = x.channels();
  Image out(x.height(), x.width(), 2 * c, ValueRange::Signed);
  for (int y = 0; y < x.height(); ++y)
    for (int xx = 0; xx < x.width(); ++xx)
      for (int k = 0; k < c; ++k) {
        const double rv = r.at(y, xx, k);
        out.at(y, xx, k) = rv;
        out.at(y, xx, c + k) = x.at(y, xx, k) - rv;
      }
  return out;
}

Image make_raw_input(const Image& x) {
  const int c = x.channels();
  Image out(x.height(), x.width(), 2 * c, ValueRange::Signed);
  for (int y = 0; y < x.height(); ++y)
    for (int xx = 0; xx < x.width(); ++xx)
      for (int k = 0; k < c; ++k) out.at(y, xx, c + k) = x.at(y, xx, k);
  return out;
}

void mask_reference(Image& anchor) {
  const int c = anchor.channels() / 2;
  for (int y = 0; y < anchor.height(); ++y)
    for (int x = 0; x < anchor.width(); ++x)
      for (int k = 0; k < c; ++k) anchor.at(y, x, k) = 0.0;
}

std::size_t sample_reference(const ReferenceSet& set, std::optional<std::string_view> exclude_id,
                             std::uint64_t seed) {
  Rng rng(seed);
  const std::optional<std::size_t> excluded = exclude_id ? set.find(*exclude_id) : std::nullopt;
  if (!excluded) return rng.index(set.size());
  if (set.size() < 2) throw ContractError("sample_reference: no reference left after exclusion");
  const std::size_t k = rng.index(set.size() - 1);
  return k < *excluded ? k : k + 1;
}

AnchorBatch make_batch(std::span<const Image> xs, std::span<const int> labels,
                       std::span<const std::string> ids, const ReferenceSet& set, double alpha,
                       std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("make_batch: alpha must lie in [0,1]");
  if (xs.size() != labels.size() || xs.size() != ids.size()) {
    throw ContractError("make_batch: inputs, labels and ids differ in length");
  }
  AnchorBatch batch;
  Rng rng(seed);
  batch.masked = rng.bernoulli(alpha);
  batch.labels.assign(labels.begin(), labels.end());
  batch.inputs.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::size_t r = sample_reference(set, ids[i], derive_seed(seed, i + 1));
    batch.ref_ids.push_back(set.id(r));
    Image anchor = make_anchor(xs[i], set.image(r));
    if (batch.masked) mask_reference(anchor);
    batch.inputs.push_back(std::move(anchor));
  }
  return batch;
}

}  // namespace fairdet
