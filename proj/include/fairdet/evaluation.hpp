#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairdet/anchoring.hpp"
#include "fairdet/classifier.hpp"
#include "fairdet/losses.hpp"
#include "fairdet/sag.hpp"
#include "fairdet/synthdata.hpp"

namespace fairdet {

// Mann-Whitney AUC with label 1 as the positive class; ties count one half.
// Rank-based, O(n log n).
double auc(std::span<const double> scores, std::span<const int> labels);

enum class PerturbKind { BrightnessContrast, GaussianBlur };

struct Perturbation {
  PerturbKind kind = PerturbKind::GaussianBlur;
  int severity = 1;  // 1..5

  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

const char* to_string(PerturbKind k);
// "gaussianblur:3", "brightnesscontrast:1"
Perturbation parse_perturbation(std::string_view text);
std::string to_string(const Perturbation& p);

// Severity ladders, index severity-1.
inline constexpr double kContrastFactors[5] = {1.1, 1.2, 1.3, 1.4, 1.5};
inline constexpr double kBrightnessShifts[5] = {0.05, 0.10, 0.15, 0.20, 0.25};
inline constexpr double kBlurSigmas[5] = {0.5, 1.0, 1.5, 2.0, 2.5};

// Unit01 in, Unit01 out (clamped). seed is accepted for ladders with random
// parameters; both current kinds are deterministic.
Image perturb(const Image& img, const Perturbation& p, std::uint64_t seed = 0);

struct EvalReport {
  double auc = 0.0;
  double metric_naive = 0.0;
  double metric_star = 0.0;
  int n_eval = 0;
  std::string reference_id;
  std::optional<Perturbation> perturbation;
};

std::string to_json(const EvalReport& r);
inline constexpr const char* kEvalCsvHeader =
    "auc,metric_naive,metric_star,n_eval,reference_id,perturbation";
std::string to_csv_row(const EvalReport& r);

struct EvalSettings {
  std::uint64_t seed = 5;
  int batch_size = 32;
  double tau_eval = 0.00005;
  SagConfig sag;  // always the standard order for reporting
  InputMode mode = InputMode::Anchored;
  std::optional<Perturbation> perturbation;
};

// Everything about an evaluation that does not depend on the parameters:
// one reference drawn by seed, classifier inputs, and per-batch distances.
struct EvalPlan {
  RowMatrix inputs;
  std::vector<int> labels;
  std::vector<std::pair<std::size_t, std::size_t>> batches;  // [begin, end)
  std::vector<PairDistances> pixel;
  std::vector<PairDistances> sag;
  std::string reference_id;
  double tau_eval = 0.0;
  std::optional<Perturbation> perturbation;
};

EvalPlan make_eval_plan(std::span<const Sample> eval_set, const ReferenceSet& refs,
                        const EvalSettings& settings);

EvalReport evaluate(const ClassifierParams& params, const EvalPlan& plan);

EvalReport evaluate(const ClassifierParams& params, std::span<const Sample> eval_set,
                    const ReferenceSet& refs, const EvalSettings& settings);

}  // namespace fairdet
