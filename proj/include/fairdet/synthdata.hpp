#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fairdet/image.hpp"

namespace fairdet {

// Generator knobs. The "face" is a smooth random field: a fixed mid-grey
// base plus integer-frequency sinusoids (so it averages to the base over the
// full image) plus white sensor noise.
struct SynthConfig {
  int side = 64;
  double blend_fraction = 0.25;      // rho: area share of the swapped square
  double artifact_amplitude = 0.05;  // a
  int artifact_period = 8;           // p, in pixels; must be even
  int field_components = 4;          // sinusoids per channel
  int max_frequency = 3;             // cycles per image side
  double field_amplitude = 0.05;     // per-component amplitude
  double noise_sigma = 0.01;
};

struct Triplet {
  Image target;
  Image donor;
  Image fake;
  double blend_fraction = 0.0;
  double artifact_amplitude = 0.0;
  int artifact_period = 0;
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);

// Smooth random field; exposed for tests.
Image smooth_field(const SynthConfig& cfg, std::uint64_t seed);

// Side length of the centered square covering blend_fraction of the image.
int blend_square_side(const SynthConfig& cfg);

// +1/-1 pattern with cells of side p/2; the fake adds amplitude * pattern.
Image checkerboard(int side, int channels, int period);

Triplet gen_triplet(std::uint64_t seed, const SynthConfig& cfg);

enum class Role { Target, Donor, Fake };

const char* to_string(Role r);
Role parse_role(const std::string& text);

inline constexpr int kLabelFake = 0;
inline constexpr int kLabelReal = 1;

struct ManifestRow {
  std::string path;  // relative to the manifest's directory
  int label = kLabelReal;
  Role role = Role::Target;
  int triplet_id = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

struct Manifest {
  std::vector<ManifestRow> rows;
  std::filesystem::path base_dir;

  friend bool operator==(const Manifest& a, const Manifest& b) { return a.rows == b.rows; }
};

inline constexpr const char* kManifestHeader = "path,label,role,triplet_id,seed";

// Writes t{id}_{role}.ppm for every triplet and out_dir/manifest.csv.
Manifest gen_dataset(int n_triplets, std::uint64_t seed, const SynthConfig& cfg,
                     const std::filesystem::path& out_dir);

void write_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);

// Splits by triplet so no triplet straddles the two sides.
std::pair<Manifest, Manifest> split(const Manifest& m, double train_frac, std::uint64_t seed);

struct Sample {
  Image image;  // Unit01
  int label = kLabelReal;
  std::string id;
  int triplet_id = 0;
};

std::vector<Sample> load_samples(const Manifest& m);

// Groups loaded rows back into triplets (rows for incomplete triplets are skipped).
std::vector<Triplet> load_triplets(const Manifest& m);

}  // namespace fairdet

namespace fairdet {

struct DataSplit {
  std::vector<Sample> train;
  std::vector<Sample> eval;
};

// load_manifest + split + load_samples.
DataSplit load_split(const std::filesystem::path& manifest, double train_frac, std::uint64_t seed);

}  // namespace fairdet
