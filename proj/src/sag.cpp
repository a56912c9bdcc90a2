#include "fairdet/sag.hpp"

#include <algorithm>
#include <sstream>

#include "fairdet/error.hpp"
#include "fairdet/patches.hpp"
#include "fairdet/random.hpp"

namespace fairdet {

const char* to_string(Stage s) {
  switch (s) {
    case Stage::Patch: return "patch";
    case Stage::Residual: return "residual";
    case Stage::Frequency: return "frequency";
  }
  return "?";
}

StageOrder::StageOrder(std::vector<Stage> stages) : stages_(std::move(stages)) {
  if (stages_.empty() || stages_.size() > 3) throw ContractError("stage order needs 1 to 3 stages");
  for (std::size_t i = 0; i < stages_.size(); ++i)
    for (std::size_t j = i + 1; j < stages_.size(); ++j)
      if (stages_[i] == stages_[j]) throw ContractError("stage order repeats a stage");
}

StageOrder StageOrder::standard() {
  return StageOrder({Stage::Patch, Stage::Residual, Stage::Frequency});
}

std::vector<StageOrder> StageOrder::all_permutations() {
  std::vector<Stage> s = {Stage::Patch, Stage::Residual, Stage::Frequency};
  std::vector<StageOrder> out;
  do {
    out.emplace_back(s);
  } while (std::next_permutation(s.begin(), s.end()));
  return out;
}

StageOrder StageOrder::parse(std::string_view text) {
  std::vector<Stage> stages;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    std::transform(item.begin(), item.end(), item.begin(), ::tolower);
    if (item == "patch") stages.push_back(Stage::Patch);
    else if (item == "residual") stages.push_back(Stage::Residual);
    else if (item == "frequency") stages.push_back(Stage::Frequency);
    else throw ContractError("unknown stage '" + item + "'");
  }
  return StageOrder(std::move(stages));
}

bool StageOrder::contains(Stage s) const {
  return std::find(stages_.begin(), stages_.end(), s) != stages_.end();
}

StageOrder StageOrder::without(Stage s) const {
  std::vector<Stage> rest;
  for (Stage x : stages_)
    if (x != s) rest.push_back(x);
  return StageOrder(std::move(rest));
}

std::string StageOrder::str() const {
  std::string out;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (i) out += ',';
    out += to_string(stages_[i]);
  }
  return out;
}

bool is_complex(const SagRepr& r) { return std::holds_alternative<Spectrum>(r); }

SagRepr sag_transform(const Image& img, const SagConfig& cfg, std::uint64_t batch_seed) {
  Image current = img;
  const auto& stages = cfg.order.stages();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    switch (stages[i]) {
      case Stage::Patch: {
        const PatchGrid grid = partition(current, cfg.patch_size);
        current = reconstruct(shuffle_patches(grid, batch_seed));
        break;
      }
      case Stage::Residual:
        current = residual(current, cfg.denoise);
        break;
      case Stage::Frequency:
        if (i + 1 == stages.size()) return fft2d(current);
        current = power_spectrum(current);
        break;
    }
  }
  return current;
}

double repr_distance(const SagRepr& a, const SagRepr& b) {
  if (a.index() != b.index()) throw ContractError("repr_distance: mixed representation kinds");
  if (const auto* sa = std::get_if<Spectrum>(&a)) return complex_l2_distance(*sa, std::get<Spectrum>(b));
  const Image& ia = std::get<Image>(a);
  const Image& ib = std::get<Image>(b);
  if (ia.range() != ib.range()) {
    return euclidean_distance(ia.with_range(ValueRange::Signed), ib.with_range(ValueRange::Signed));
  }
  return euclidean_distance(ia, ib);
}

double sag_distance(const Image& a, const Image& b, const SagConfig& cfg, std::uint64_t batch_seed) {
  if (!a.same_shape(b)) throw ContractError("sag_distance: shape mismatch");
  return repr_distance(sag_transform(a, cfg, batch_seed), sag_transform(b, cfg, batch_seed));
}

DistanceMode parse_distance_mode(std::string_view text) {
  if (text == "pixel") return DistanceMode::Pixel;
  if (text == "power") return DistanceMode::Power;
  if (text == "sag") return DistanceMode::Sag;
  throw ContractError("unknown distance mode '" + std::string(text) + "'");
}

TripletDistances motivation_experiment(std::span<const Triplet> triplets, DistanceMode mode,
                                       std::size_t count, const SagConfig& cfg,
                                       std::uint64_t seed) {
  if (triplets.empty()) throw ContractError("motivation_experiment: no triplets");
  if (count == 0 || count > triplets.size()) {
    throw ContractError("motivation_experiment: count must lie in [1, " +
                        std::to_string(triplets.size()) + "]");
  }
  SagConfig sag = cfg;
  sag.order = StageOrder::standard();
  double ft = 0.0;
  double td = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const Triplet& t = triplets[i];
    switch (mode) {
      case DistanceMode::Pixel:
        ft += euclidean_distance(t.fake, t.target);
        td += euclidean_distance(t.target, t.donor);
        break;
      case DistanceMode::Power: {
        const Image pt = power_spectrum(t.target);
        ft += euclidean_distance(power_spectrum(t.fake), pt);
        td += euclidean_distance(pt, power_spectrum(t.donor));
        break;
      }
      case DistanceMode::Sag: {
        const std::uint64_t s = derive_seed(seed, i);
        const SagRepr rt = sag_transform(t.target, sag, s);
        ft += repr_distance(sag_transform(t.fake, sag, s), rt);
        td += repr_distance(rt, sag_transform(t.donor, sag, s));
        break;
      }
    }
  }
  return {ft / static_cast<double>(count), td / static_cast<double>(count)};
}

}  // namespace fairdet
