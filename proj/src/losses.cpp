#include "fairdet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairdet/error.hpp"

namespace fairdet {

void validate(const LossConfig& cfg) {
  if (!(cfg.lambda >= 0.0) || !(cfg.tau_train >= 0.0) || !(cfg.tau_eval >= 0.0)) {
    throw ContractError("loss config: lambda and tau must be nonnegative");
  }
}

namespace {

double clamped_log(double p) { return std::log(std::max(p, kLogClamp)); }

void check_pairs(std::size_t n_scores, std::size_t n_items) {
  if (n_scores != n_items) throw ContractError("pairwise loss: scores and inputs differ in length");
  if (n_scores < 2) throw ContractError("pairwise loss needs at least 2 samples");
}

}  // namespace

double ce_loss(std::span<const ProbPair> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) throw ContractError("ce_loss: length mismatch");
  if (probs.empty()) throw ContractError("ce_loss: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ContractError("ce_loss: invalid label " + std::to_string(labels[i]));
    }
    sum -= clamped_log(probs[i][labels[i]]);
  }
  return sum / static_cast<double>(probs.size());
}

double ce_uniform(std::span<const ProbPair> probs) {
  if (probs.empty()) throw ContractError("ce_uniform: empty batch");
  double sum = 0.0;
  for (const auto& p : probs) sum -= 0.5 * clamped_log(p[0]) + 0.5 * clamped_log(p[1]);
  return sum / static_cast<double>(probs.size());
}

double ce_star(std::span<const ProbPair> probs, std::span<const int> labels, bool masked) {
  return masked ? ce_uniform(probs) : ce_loss(probs, labels);
}

PairDistances pixel_distances(std::span<const Image> images) {
  PairDistances d(images.size());
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j)
      d.set(i, j, euclidean_distance(images[i], images[j]));
  return d;
}

PairDistances repr_distances(std::span<const SagRepr> reprs) {
  for (const auto& r : reprs)
    if (r.index() != reprs.front().index()) throw ContractError("ind_star: mixed representation kinds");
  PairDistances d(reprs.size());
  for (std::size_t i = 0; i < reprs.size(); ++i)
    for (std::size_t j = i + 1; j < reprs.size(); ++j) d.set(i, j, repr_distance(reprs[i], reprs[j]));
  return d;
}

double pairwise_hinge(std::span<const double> scores, const PairDistances& dist, double tau) {
  check_pairs(scores.size(), dist.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = i + 1; j < scores.size(); ++j)
      sum += std::max(0.0, std::abs(scores[i] - scores[j]) - tau * dist(i, j));
  return sum / static_cast<double>(dist.pair_count());
}

std::vector<double> pairwise_hinge_grad(std::span<const double> scores, const PairDistances& dist,
                                        double tau) {
  check_pairs(scores.size(), dist.size());
  std::vector<double> g(scores.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(dist.pair_count());
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = i + 1; j < scores.size(); ++j) {
      const double diff = scores[i] - scores[j];
      if (std::abs(diff) - tau * dist(i, j) <= 0.0 || diff == 0.0) continue;
      const double s = diff > 0.0 ? inv : -inv;
      g[i] += s;
      g[j] -= s;
    }
  return g;
}

double ind_naive(std::span<const double> scores, std::span<const Image> raws, double tau) {
  check_pairs(scores.size(), raws.size());
  return pairwise_hinge(scores, pixel_distances(raws), tau);
}

double ind_star(std::span<const double> scores, std::span<const SagRepr> reprs, double tau) {
  check_pairs(scores.size(), reprs.size());
  return pairwise_hinge(scores, repr_distances(reprs), tau);
}

double total_loss(double ce, double ind, double lambda) { return ce + lambda * ind; }

double metric_naive_adapted(std::span<const double> scores, std::span<const Image> raws,
                            double tau_eval) {
  return ind_naive(scores, raws, tau_eval);
}

double metric_star_adapted(std::span<const double> scores, std::span<const SagRepr> reprs,
                           double tau_eval) {
  return ind_star(scores, reprs, tau_eval);
}

}  // namespace fairdet
