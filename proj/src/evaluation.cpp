#include "fairdet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "fairdet/error.hpp"
#include "fairdet/random.hpp"

namespace fairdet {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ContractError("auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the average 1-based rank, kept integral so the result is exact.
  long long rank_sum_x2 = 0;
  long long n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const long long tied_rank_x2 = static_cast<long long>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum_x2 += tied_rank_x2;
        ++n_pos;
      } else if (labels[order[k]] != 0) {
        throw ContractError("auc: labels must be 0 or 1");
      }
    }
    i = j;
  }
  const long long n_neg = static_cast<long long>(scores.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ContractError("auc: both classes must be present");
  const long long u_x2 = rank_sum_x2 - n_pos * (n_pos + 1);
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

const char* to_string(PerturbKind k) {
  return k == PerturbKind::BrightnessContrast ? "brightnesscontrast" : "gaussianblur";
}

Perturbation parse_perturbation(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ContractError("perturbation must look like kind:severity");
  }
  std::string kind(text.substr(0, colon));
  std::transform(kind.begin(), kind.end(), kind.begin(), ::tolower);
  Perturbation p;
  if (kind == "gaussianblur") p.kind = PerturbKind::GaussianBlur;
  else if (kind == "brightnesscontrast") p.kind = PerturbKind::BrightnessContrast;
  else throw ContractError("unknown perturbation kind '" + kind + "'");
  const std::string sev(text.substr(colon + 1));
  std::size_t used = 0;
  try {
    p.severity = std::stoi(sev, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != sev.size() || sev.empty()) throw ContractError("bad perturbation severity '" + sev + "'");
  if (p.severity < 1 || p.severity > 5) throw ContractError("perturbation severity must be 1..5");
  return p;
}

std::string to_string(const Perturbation& p) {
  return std::string(to_string(p.kind)) + ":" + std::to_string(p.severity);
}

Image perturb(const Image& img, const Perturbation& p, std::uint64_t /*seed*/) {
  if (img.range() != ValueRange::Unit01) throw ContractError("perturb expects a Unit01 image");
  if (p.severity < 1 || p.severity > 5) throw ContractError("perturbation severity must be 1..5");
  const int s = p.severity - 1;
  if (p.kind == PerturbKind::GaussianBlur) return denoise(img, DenoiseConfig{kBlurSigmas[s]});
  Image out = img.with_range(ValueRange::Signed);
  for (double& v : out.data())
    v = std::clamp(kContrastFactors[s] * (v - 0.5) + 0.5 + kBrightnessShifts[s], 0.0, 1.0);
  return out.with_range(ValueRange::Unit01);
}

std::string to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["auc"] = r.auc;
  j["metric_naive"] = r.metric_naive;
  j["metric_star"] = r.metric_star;
  j["n_eval"] = r.n_eval;
  j["reference_id"] = r.reference_id;
  if (r.perturbation) {
    j["perturbation"] = {{"kind", to_string(r.perturbation->kind)},
                         {"severity", r.perturbation->severity}};
  } else {
    j["perturbation"] = nullptr;
  }
  return j.dump();
}

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_csv_row(const EvalReport& r) {
  return fmt_double(r.auc) + "," + fmt_double(r.metric_naive) + "," + fmt_double(r.metric_star) +
         "," + std::to_string(r.n_eval) + "," + r.reference_id + "," +
         (r.perturbation ? to_string(*r.perturbation) : std::string());
}

EvalPlan make_eval_plan(std::span<const Sample> eval_set, const ReferenceSet& refs,
                        const EvalSettings& settings) {
  if (eval_set.empty()) throw ContractError("evaluate: empty evaluation set");
  if (settings.batch_size < 2) throw ContractError("evaluate: batch size must be at least 2");
  EvalPlan plan;
  plan.tau_eval = settings.tau_eval;
  plan.perturbation = settings.perturbation;

  const std::size_t ref = sample_reference(refs, std::nullopt, settings.seed);
  plan.reference_id = refs.id(ref);

  std::vector<Image> images;
  images.reserve(eval_set.size());
  std::vector<std::vector<double>> rows;
  rows.reserve(eval_set.size());
  for (std::size_t i = 0; i < eval_set.size(); ++i) {
    Image x = settings.perturbation ? perturb(eval_set[i].image, *settings.perturbation,
                                              derive_seed(settings.seed, 0x9e7, i))
                                    : eval_set[i].image;
    rows.push_back(downsample(settings.mode == InputMode::Anchored ? make_anchor(x, refs.image(ref))
                                                                   : make_raw_input(x)));
    plan.labels.push_back(eval_set[i].label);
    images.push_back(std::move(x));
  }
  plan.inputs = stack_rows(rows);

  const auto bs = static_cast<std::size_t>(settings.batch_size);
  for (std::size_t begin = 0, b = 0; begin + 1 < images.size(); begin += bs, ++b) {
    const std::size_t end = std::min(begin + bs, images.size());
    const std::span<const Image> chunk(images.data() + begin, end - begin);
    plan.batches.emplace_back(begin, end);
    plan.pixel.push_back(pixel_distances(chunk));
    const std::uint64_t batch_seed = derive_seed(settings.seed, 0x5a9, b);
    std::vector<SagRepr> reprs;
    reprs.reserve(chunk.size());
    for (const Image& x : chunk) reprs.push_back(sag_transform(x, settings.sag, batch_seed));
    plan.sag.push_back(repr_distances(reprs));
  }
  return plan;
}

EvalReport evaluate(const ClassifierParams& params, const EvalPlan& plan) {
  const std::vector<double> scores = predict_scores(params, plan.inputs);
  EvalReport r;
  r.n_eval = static_cast<int>(scores.size());
  r.reference_id = plan.reference_id;
  r.perturbation = plan.perturbation;
  r.auc = auc(scores, plan.labels);
  double naive = 0.0;
  double star = 0.0;
  for (std::size_t b = 0; b < plan.batches.size(); ++b) {
    const auto [begin, end] = plan.batches[b];
    const std::span<const double> s(scores.data() + begin, end - begin);
    naive += pairwise_hinge(s, plan.pixel[b], plan.tau_eval);
    star += pairwise_hinge(s, plan.sag[b], plan.tau_eval);
  }
  const double nb = static_cast<double>(plan.batches.size());
  r.metric_naive = plan.batches.empty() ? 0.0 : naive / nb;
  r.metric_star = plan.batches.empty() ? 0.0 : star / nb;
  return r;
}

EvalReport evaluate(const ClassifierParams& params, std::span<const Sample> eval_set,
                    const ReferenceSet& refs, const EvalSettings& settings) {
  return evaluate(params, make_eval_plan(eval_set, refs, settings));
}

}  // namespace fairdet
