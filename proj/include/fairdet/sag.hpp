#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fairdet/denoise.hpp"
#include "fairdet/image.hpp"
#include "fairdet/spectral.hpp"
#include "fairdet/synthdata.hpp"

namespace fairdet {

enum class Stage { Patch, Residual, Frequency };

const char* to_string(Stage s);

// Ordered, repeat-free list of semantic-agnostic stages. The full transform
// uses all three; ablations drop one.
class StageOrder {
 public:
  StageOrder() = default;
  explicit StageOrder(std::vector<Stage> stages);

  // Patch -> Residual -> Frequency.
  static StageOrder standard();
  // All six permutations of the three stages, standard order first.
  static std::vector<StageOrder> all_permutations();
  // Comma list such as "patch,residual,frequency".
  static StageOrder parse(std::string_view text);

  const std::vector<Stage>& stages() const noexcept { return stages_; }
  bool contains(Stage s) const;
  bool frequency_last() const { return !stages_.empty() && stages_.back() == Stage::Frequency; }
  StageOrder without(Stage s) const;
  std::string str() const;

  friend bool operator==(const StageOrder&, const StageOrder&) = default;

 private:
  std::vector<Stage> stages_;
};

struct SagConfig {
  StageOrder order = StageOrder::standard();
  int patch_size = 16;
  DenoiseConfig denoise;
};

// Complex when Frequency is the final stage, otherwise a real raster.
using SagRepr = std::variant<Spectrum, Image>;

bool is_complex(const SagRepr& r);

SagRepr sag_transform(const Image& img, const SagConfig& cfg, std::uint64_t batch_seed);

// Distance between two representations of the same kind.
double repr_distance(const SagRepr& a, const SagRepr& b);

// Both images are transformed with the same batch_seed.
double sag_distance(const Image& a, const Image& b, const SagConfig& cfg, std::uint64_t batch_seed);

enum class DistanceMode { Pixel, Power, Sag };

DistanceMode parse_distance_mode(std::string_view text);

struct TripletDistances {
  double fake_target = 0.0;
  double target_donor = 0.0;
};

// Mean d(fake, target) and d(target, donor) over the first `count` triplets.
// Sag mode draws triplet i's shared shuffle seed from derive_seed(seed, i).
TripletDistances motivation_experiment(std::span<const Triplet> triplets, DistanceMode mode,
                                       std::size_t count, const SagConfig& cfg,
                                       std::uint64_t seed);

}  // namespace fairdet
