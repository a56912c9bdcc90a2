#pragma once

// Small in-memory datasets for the training-level tests.

#include <string>
#include <vector>

#include "fairdet/optim.hpp"
#include "fairdet/synthdata.hpp"

namespace fixture {

inline fairdet::SynthConfig small_synth() {
  fairdet::SynthConfig c;
  c.side = 32;
  return c;
}

inline std::vector<fairdet::Sample> samples(int n_triplets, std::uint64_t seed_base,
                                            const fairdet::SynthConfig& cfg = small_synth()) {
  std::vector<fairdet::Sample> out;
  for (int t = 0; t < n_triplets; ++t) {
    const fairdet::Triplet tr = fairdet::gen_triplet(seed_base + t, cfg);
    const std::string stem = "t" + std::to_string(t) + "_";
    out.push_back({tr.target, fairdet::kLabelReal, stem + "target", t});
    out.push_back({tr.donor, fairdet::kLabelReal, stem + "donor", t});
    out.push_back({tr.fake, fairdet::kLabelFake, stem + "fake", t});
  }
  return out;
}

inline fairdet::TrainConfig quick(fairdet::Method m, int epochs = 2) {
  fairdet::TrainConfig c = fairdet::TrainConfig::preset(m);
  c.epochs = epochs;
  c.batch_size = 8;
  c.hidden = 8;
  c.sag.patch_size = 8;
  c.eval_sag.patch_size = 8;
  return c;
}

}  // namespace fixture
