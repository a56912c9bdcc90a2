#pragma once

#include <array>
#include <span>
#include <vector>

#include "fairdet/image.hpp"
#include "fairdet/sag.hpp"

namespace fairdet {

using ProbPair = std::array<double, 2>;

struct LossConfig {
  double lambda = 0.001;
  double tau_train = 0.00001;
  double tau_eval = 0.00005;
};

void validate(const LossConfig& cfg);

inline constexpr double kLogClamp = 1e-12;

// Mean of -log p[label], log argument clamped at 1e-12.
double ce_loss(std::span<const ProbPair> probs, std::span<const int> labels);

// Mean cross-entropy against the uniform prior (1/2, 1/2).
double ce_uniform(std::span<const ProbPair> probs);

// Batch-level switch between the labelled and the uniform-prior loss.
double ce_star(std::span<const ProbPair> probs, std::span<const int> labels, bool masked);

// Symmetric pairwise distances, upper triangle stored row by row.
class PairDistances {
 public:
  PairDistances() = default;
  explicit PairDistances(std::size_t n) : n_(n), d_(n * (n - 1) / 2, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t pair_count() const noexcept { return d_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return d_[slot(i, j)]; }
  void set(std::size_t i, std::size_t j, double v) { d_[slot(i, j)] = v; }

 private:
  std::size_t slot(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }
  std::size_t n_ = 0;
  std::vector<double> d_;
};

PairDistances pixel_distances(std::span<const Image> images);
PairDistances repr_distances(std::span<const SagRepr> reprs);

// Mean over unordered pairs of [|s_i - s_j| - tau * d_ij]_+.
double pairwise_hinge(std::span<const double> scores, const PairDistances& dist, double tau);

// Subgradient of pairwise_hinge with respect to each score (sign(0) = 0).
std::vector<double> pairwise_hinge_grad(std::span<const double> scores, const PairDistances& dist,
                                        double tau);

// Fairness regularizer on raw-pixel distances.
double ind_naive(std::span<const double> scores, std::span<const Image> raws, double tau);

// Fairness regularizer on semantic-agnostic representations.
double ind_star(std::span<const double> scores, std::span<const SagRepr> reprs, double tau);

double total_loss(double ce, double ind, double lambda);

// Evaluation forms: the hinge is the same, only the score source differs
// (anchored-input scores for the naive metric, original-input scores for the
// star metric when the detector is not anchored).
double metric_naive_adapted(std::span<const double> scores, std::span<const Image> raws,
                            double tau_eval);
double metric_star_adapted(std::span<const double> scores, std::span<const SagRepr> reprs,
                           double tau_eval);

}  // namespace fairdet
