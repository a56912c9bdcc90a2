#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fairdet/optim.hpp"
#include "fairdet/synthdata.hpp"

namespace fairdet {

struct DataConfig {
  double train_frac = 0.8;
  std::uint64_t split_seed = 7;
};

// Fully resolved settings for one command.
struct RunConfig {
  TrainConfig train = TrainConfig::preset(Method::Ours);
  SynthConfig synth;
  DataConfig data;
  std::vector<std::string> warnings;
};

// Flat dotted key=value settings. Later sources override earlier ones.
class ConfigMap {
 public:
  static const std::vector<std::string>& known_keys();

  // Throws ContractError naming the key when it is unknown.
  void set(const std::string& key, const std::string& value);
  // "key=value"
  void set_assignment(const std::string& assignment);
  // `key = value` lines, '#' comments, blank lines ignored. ParseError carries the line.
  void load_file(const std::filesystem::path& path);
  void merge(const ConfigMap& higher);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Starts from the method preset (train.method, default ours) and applies the
// remaining keys. Setting loss.lambda or loss.tau_train for method ori is
// ignored with a warning.
RunConfig resolve(const ConfigMap& map);

// Training canonical form followed by the data and synth keys.
std::string canonical(const RunConfig& rc);
std::uint64_t hash(const RunConfig& rc);

// Patch size defaulting: 32 pixels on 224-pixel inputs scales to 16 on 64.
int default_patch_size(int side);

}  // namespace fairdet
