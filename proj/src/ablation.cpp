#include "fairdet/ablation.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "fairdet/error.hpp"

namespace fairdet {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string lambda_name(double l) { return "lambda=" + fmt(l); }

}  // namespace

void validate(const AblationPlan& plan) {
  if (plan.variants.empty()) throw ContractError("ablation plan has no variants");
  if (plan.repeats < 1) throw ContractError("ablation plan needs at least one repeat");
  std::set<std::string> names;
  for (const auto& v : plan.variants) {
    if (!names.insert(v.name).second) {
      throw ContractError("ablation plan repeats variant name '" + v.name + "'");
    }
  }
}

AblationPlan order_plan(const TrainConfig& base, int repeats) {
  AblationPlan plan{"order", base, {}, repeats};
  for (const StageOrder& order : StageOrder::all_permutations()) {
    TrainConfig c = base;
    c.sag.order = order;
    std::string name = order.str();
    std::replace(name.begin(), name.end(), ',', '-');
    plan.variants.push_back({name, c});
  }
  return plan;
}

AblationPlan component_plan(const TrainConfig& base, int repeats) {
  AblationPlan plan{"component", base, {}, repeats};
  plan.variants.push_back({"full", base});
  TrainConfig c = base;
  c.gamma = 0.0;
  plan.variants.push_back({"no-sam", c});
  c = base;
  c.anchoring = false;
  c.alpha = 0.0;
  plan.variants.push_back({"no-anchoring", c});
  for (Stage s : {Stage::Residual, Stage::Patch, Stage::Frequency}) {
    c = base;
    c.sag.order = base.sag.order.without(s);
    plan.variants.push_back({std::string("no-") + to_string(s), c});
  }
  return plan;
}

AblationPlan lambda_plan(const TrainConfig& base, std::span<const double> lambdas, int repeats) {
  if (lambdas.empty()) throw ContractError("lambda sweep needs at least one value");
  AblationPlan plan{"lambda", base, {}, repeats};
  for (double l : lambdas) {
    TrainConfig c = base;
    c.loss.lambda = l;
    plan.variants.push_back({lambda_name(l), c});
  }
  return plan;
}

TrainConfig with_seeds(TrainConfig cfg, const Seeds& seeds) {
  cfg.seeds = seeds;
  return cfg;
}

const AblationRow& AblationTable::median(const std::string& variant) const {
  for (const auto& r : rows)
    if (r.variant == variant && r.repeat < 0) return r;
  throw ContractError("no median row for variant '" + variant + "'");
}

EvalReport run_variant(const TrainConfig& cfg, std::span<const Sample> train,
                       std::span<const Sample> eval) {
  const ReferenceSet refs = make_reference_set(train);
  const TrainResult res = fairdet::train(cfg, train, refs, {});
  return evaluate(res.params, eval, refs, eval_settings(cfg));
}

AblationTable run_plan(const AblationPlan& plan, std::span<const Sample> train,
                       std::span<const Sample> eval, RunCache* cache) {
  validate(plan);
  AblationTable table;
  table.kind = plan.kind;
  for (const auto& v : plan.variants) {
    std::vector<double> aucs, naive, star;
    for (int r = 0; r < plan.repeats; ++r) {
      const TrainConfig cfg = with_seeds(v.config, Seeds::from(plan.seed_base + r));
      AblationRow row;
      row.config_hash = cfg.hash();
      row.variant = v.name;
      row.repeat = r;
      if (cache) {
        auto it = cache->find(row.config_hash);
        if (it == cache->end()) it = cache->emplace(row.config_hash, run_variant(cfg, train, eval)).first;
        row.report = it->second;
      } else {
        row.report = run_variant(cfg, train, eval);
      }
      aucs.push_back(row.report.auc);
      naive.push_back(row.report.metric_naive);
      star.push_back(row.report.metric_star);
      table.rows.push_back(std::move(row));
    }
    AblationRow med;
    med.config_hash = with_seeds(v.config, Seeds{}).hash();
    med.variant = v.name;
    med.repeat = -1;
    med.report.auc = median_of(aucs);
    med.report.metric_naive = median_of(naive);
    med.report.metric_star = median_of(star);
    med.report.n_eval = static_cast<int>(eval.size());
    table.rows.push_back(std::move(med));
  }
  return table;
}

AblationTable run_order_ablation(const TrainConfig& base, const DataSplit& data, int repeats,
                                 RunCache* cache) {
  return run_plan(order_plan(base, repeats), data.train, data.eval, cache);
}

AblationTable run_component_ablation(const TrainConfig& base, const DataSplit& data,
                                     int repeats, RunCache* cache) {
  return run_plan(component_plan(base, repeats), data.train, data.eval, cache);
}

AblationTable run_lambda_sweep(const TrainConfig& base, std::span<const double> lambdas,
                               const DataSplit& data, int repeats, RunCache* cache) {
  return run_plan(lambda_plan(base, lambdas, repeats), data.train, data.eval, cache);
}

std::string to_csv(const AblationTable& t) {
  std::ostringstream os;
  os << kAblationCsvHeader << '\n';
  for (const auto& r : t.rows) {
    os << hex_hash(r.config_hash) << ',' << r.variant << ','
       << (r.repeat < 0 ? std::string("median") : std::to_string(r.repeat)) << ','
       << fmt(r.report.auc) << ',' << fmt(r.report.metric_naive) << ','
       << fmt(r.report.metric_star) << '\n';
  }
  return os.str();
}

std::filesystem::path write_table(const AblationTable& t, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / ("ablation_" + t.kind + ".csv");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_csv(t);
  if (!out) throw IoError("write failed for " + path.string());
  return path;
}

}  // namespace fairdet
