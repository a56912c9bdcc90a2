#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fairdet/image.hpp"

namespace fairdet {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kPooledSide = 32;
inline constexpr int kDefaultHidden = 128;

// Flat parameters of the one-hidden-layer detector: E(x) = relu(W1 x + b1),
// h(e) = W2 e + b2. Layout in theta: W1 (hidden x in_dim, row-major), b1,
// W2 (2 x hidden, row-major), b2.
struct ClassifierParams {
  int in_dim = 0;
  int hidden = 0;
  std::vector<double> theta;

  ClassifierParams() = default;
  ClassifierParams(int in_dim, int hidden);  // zero-filled

  static std::size_t param_count(int in_dim, int hidden);

  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return static_cast<std::size_t>(hidden) * in_dim; }
  std::size_t w2_offset() const { return b1_offset() + hidden; }
  std::size_t b2_offset() const { return w2_offset() + 2 * static_cast<std::size_t>(hidden); }

  friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;
};

// He-normal weights (std sqrt(2 / fan_in)), zero biases.
ClassifierParams init_params(int in_dim, int hidden, std::uint64_t seed);

// Block-mean pools a square power-of-two image (side >= 32) to 32 x 32 and
// flattens it row-major with interleaved channels.
std::vector<double> downsample(const Image& img);

// Stacks pooled vectors into an n x in_dim matrix.
RowMatrix stack_rows(std::span<const std::vector<double>> rows);

struct ForwardCache {
  RowMatrix inputs;       // n x in_dim
  RowMatrix pre;          // n x hidden
  RowMatrix activations;  // n x hidden
  RowMatrix logits;       // n x 2
  RowMatrix probs;        // n x 2
};

ForwardCache forward(const ClassifierParams& params, const RowMatrix& inputs);

// Gradient of sum_i <upstream_i, logits_i> with respect to theta.
std::vector<double> backward(const ClassifierParams& params, const ForwardCache& cache,
                             const RowMatrix& upstream);

// Probability of class 1 ("real").
double predict_score(const ClassifierParams& params, const Image& input);
std::vector<double> predict_scores(const ClassifierParams& params, const RowMatrix& inputs);

// How evaluation builds classifier inputs for a checkpoint.
enum class InputMode { Anchored, Raw };

const char* to_string(InputMode m);

// "FAIRDET-CKPT 1\n<in_dim> <hidden> <mode>\n" followed by little-endian
// IEEE-754 doubles for theta.
void save_checkpoint(const ClassifierParams& params, InputMode mode,
                     const std::filesystem::path& path);

struct Checkpoint {
  ClassifierParams params;
  InputMode mode = InputMode::Anchored;
};

// Throws FormatError on bad magic, malformed header, truncation, or when
// expected dimensions are given and differ.
Checkpoint load_checkpoint(const std::filesystem::path& path, int expected_in_dim = 0,
                           int expected_hidden = 0);

}  // namespace fairdet
