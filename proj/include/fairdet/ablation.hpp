#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairdet/evaluation.hpp"
#include "fairdet/optim.hpp"

namespace fairdet {

struct Variant {
  std::string name;
  TrainConfig config;
};

// Every variant runs `repeats` times; repeat r of every variant uses
// Seeds::from(seed_base + r), so variants differ only in the ablated factor.
struct AblationPlan {
  std::string kind;  // order | component | lambda
  TrainConfig base;
  std::vector<Variant> variants;
  int repeats = 3;
  std::uint64_t seed_base = 1;
};

void validate(const AblationPlan& plan);

// The six stage orders, standard order first.
AblationPlan order_plan(const TrainConfig& base, int repeats = 3);

// full, no-sam, no-anchoring, no-residual, no-patch, no-frequency.
AblationPlan component_plan(const TrainConfig& base, int repeats = 3);

AblationPlan lambda_plan(const TrainConfig& base, std::span<const double> lambdas, int repeats = 3);

inline constexpr double kPaperLambdas[5] = {0.0001, 0.0005, 0.001, 0.005, 0.01};

TrainConfig with_seeds(TrainConfig cfg, const Seeds& seeds);

struct AblationRow {
  std::uint64_t config_hash = 0;
  std::string variant;
  int repeat = 0;  // -1 marks the median row
  EvalReport report;
};

struct AblationTable {
  std::string kind;
  std::vector<AblationRow> rows;

  // Median over repeats for one variant.
  const AblationRow& median(const std::string& variant) const;
};

// Runs one (variant, seeds) training + evaluation.
EvalReport run_variant(const TrainConfig& cfg, std::span<const Sample> train,
                       std::span<const Sample> eval);

// Reports keyed by TrainConfig::hash. Only valid for one train/eval split.
using RunCache = std::map<std::uint64_t, EvalReport>;

AblationTable run_plan(const AblationPlan& plan, std::span<const Sample> train,
                       std::span<const Sample> eval, RunCache* cache = nullptr);

AblationTable run_order_ablation(const TrainConfig& base, const DataSplit& data, int repeats = 3,
                                 RunCache* cache = nullptr);
AblationTable run_component_ablation(const TrainConfig& base, const DataSplit& data,
                                     int repeats = 3, RunCache* cache = nullptr);
AblationTable run_lambda_sweep(const TrainConfig& base, std::span<const double> lambdas,
                               const DataSplit& data, int repeats = 3, RunCache* cache = nullptr);

inline constexpr const char* kAblationCsvHeader =
    "config_hash,variant,repeat,auc,metric_naive,metric_star";
std::string to_csv(const AblationTable& t);

// Writes dir/ablation_{kind}.csv and returns the path.
std::filesystem::path write_table(const AblationTable& t, const std::filesystem::path& dir);

}  // namespace fairdet
