#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairdet/anchoring.hpp"
#include "fairdet/classifier.hpp"
#include "fairdet/evaluation.hpp"
#include "fairdet/losses.hpp"
#include "fairdet/sag.hpp"
#include "fairdet/synthdata.hpp"

namespace fairdet {

// gamma * g / ||g||; the zero vector when ||g|| < 1e-12.
std::vector<double> sam_epsilon(std::span<const double> grad, double gamma);

// theta - beta * grad.
std::vector<double> sgd_step(std::span<const double> theta, std::span<const double> grad,
                             double beta);

enum class Method { Ori, Naive, Ours };
enum class FairnessKind { None, Naive, Star };

const char* to_string(Method m);
Method parse_method(std::string_view text);
const char* to_string(FairnessKind k);

struct Seeds {
  std::uint64_t data = 1;     // epoch order
  std::uint64_t init = 2;     // parameter init
  std::uint64_t mask = 3;     // mask draws and references
  std::uint64_t shuffle = 4;  // patch permutations
  std::uint64_t eval = 5;     // evaluation reference and batches

  // All five streams from one number, for repeated runs.
  static Seeds from(std::uint64_t s);
};

struct TrainConfig {
  Method method = Method::Ours;
  int epochs = 20;
  int batch_size = 32;
  double lr = 5e-4;      // beta
  double gamma = 0.05;   // SAM radius
  double alpha = 0.2;    // mask probability
  LossConfig loss;
  bool anchoring = true;
  FairnessKind fairness = FairnessKind::Star;
  SagConfig sag;         // used by the training fairness term
  SagConfig eval_sag;    // used by reported metrics
  int hidden = kDefaultHidden;
  Seeds seeds;

  // Method defaults: Ori is plain CE SGD on zero-reference inputs; Naive adds
  // the raw-pixel regularizer; Ours anchors, masks, uses the semantic-agnostic
  // regularizer and SAM.
  static TrainConfig preset(Method m);

  InputMode input_mode() const { return anchoring ? InputMode::Anchored : InputMode::Raw; }

  // Sorted key=value lines covering every field.
  std::string canonical() const;
  std::uint64_t hash() const;
};

void validate(const TrainConfig& cfg);

std::uint64_t fnv1a64(std::string_view text);
std::string hex_hash(std::uint64_t h);

// Classifier-ready batch: pooled inputs plus the pairwise distances used by
// the fairness term (empty when the method has none).
struct PreparedBatch {
  RowMatrix inputs;
  std::vector<int> labels;
  bool masked = false;
  PairDistances distances;
};

PreparedBatch prepare_batch(const TrainConfig& cfg, std::span<const Sample* const> samples,
                            const ReferenceSet& refs, std::uint64_t mask_seed,
                            std::uint64_t shuffle_seed);

struct ObjectiveValue {
  double total = 0.0;
  double ce = 0.0;
  double ind = 0.0;
  std::vector<double> grad;  // empty unless requested
};

// CE* + lambda * ind at theta, optionally with its gradient.
ObjectiveValue batch_objective(const ClassifierParams& params, const PreparedBatch& batch,
                               const TrainConfig& cfg, bool with_grad);

// Deterministic full-pass objective over the training set (fixed batches,
// references, masks, permutations), used to rank iterates.
class ObjectiveProbe {
 public:
  ObjectiveProbe(const TrainConfig& cfg, std::span<const Sample> train, const ReferenceSet& refs);
  ObjectiveValue operator()(const ClassifierParams& params) const;

 private:
  TrainConfig cfg_;
  std::vector<PreparedBatch> batches_;
};

struct EpochRecord {
  int epoch = 0;
  double total = 0.0;
  double ce = 0.0;
  double ind = 0.0;
  double auc = 0.0;
  double metric_naive = 0.0;
  double metric_star = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> records;
  int best_index = -1;  // into records
};

inline constexpr const char* kHistoryCsvHeader = "epoch,total,ce,ind,auc,metric_naive,metric_star";
std::string history_csv(const TrainHistory& h);

struct TrainResult {
  ClassifierParams params;  // best iterate
  ClassifierParams last;    // final iterate
  TrainHistory history;
};

// Per-step observer; receives the step index and the parameters after the update.
using StepObserver = std::function<void(long step, const ClassifierParams&)>;

TrainResult train(const TrainConfig& cfg, std::span<const Sample> train_set,
                  const ReferenceSet& refs, std::span<const Sample> eval_set,
                  const StepObserver& observer = {});

ReferenceSet make_reference_set(std::span<const Sample> samples);

EvalSettings eval_settings(const TrainConfig& cfg);

// True when L(theta + eps*) >= L(theta + eps_rand), eps_rand uniform on the
// gamma-sphere drawn from seed.
bool sam_ascent_check(const std::function<double(std::span<const double>)>& loss,
                      std::span<const double> theta, std::span<const double> grad, double gamma,
                      std::uint64_t seed);

bool sam_ascent_check(const ClassifierParams& params, const PreparedBatch& batch,
                      const TrainConfig& cfg, double gamma, std::uint64_t seed);

}  // namespace fairdet
