#include "fairdet/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "fairdet/error.hpp"
#include "fairdet/patches.hpp"
#include "fairdet/random.hpp"

namespace fairdet {

namespace {

constexpr std::uint64_t kProbeStream = 0x70726f6265ULL;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::vector<double> sam_epsilon(std::span<const double> grad, double gamma) {
  if (!all_finite(grad)) throw NumericalError("sam_epsilon: non-finite gradient", -1);
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  std::vector<double> eps(grad.size(), 0.0);
  if (norm < 1e-12) return eps;
  const double scale = gamma / norm;
  for (std::size_t i = 0; i < grad.size(); ++i) eps[i] = scale * grad[i];
  return eps;
}

std::vector<double> sgd_step(std::span<const double> theta, std::span<const double> grad,
                             double beta) {
  if (theta.size() != grad.size()) throw ContractError("sgd_step: length mismatch");
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] - beta * grad[i];
  return out;
}

const char* to_string(Method m) {
  switch (m) {
    case Method::Ori: return "ori";
    case Method::Naive: return "naive";
    case Method::Ours: return "ours";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  if (text == "ori") return Method::Ori;
  if (text == "naive") return Method::Naive;
  if (text == "ours") return Method::Ours;
  throw ContractError("unknown method '" + std::string(text) + "'");
}

const char* to_string(FairnessKind k) {
  switch (k) {
    case FairnessKind::None: return "none";
    case FairnessKind::Naive: return "naive";
    case FairnessKind::Star: return "star";
  }
  return "?";
}

Seeds Seeds::from(std::uint64_t s) {
  return {derive_seed(s, 1), derive_seed(s, 2), derive_seed(s, 3), derive_seed(s, 4),
          derive_seed(s, 5)};
}

TrainConfig TrainConfig::preset(Method m) {
  TrainConfig c;
  c.method = m;
  switch (m) {
    case Method::Ori:
      c.anchoring = false;
      c.fairness = FairnessKind::None;
      c.alpha = 0.0;
      c.gamma = 0.0;
      c.loss.lambda = 0.0;
      c.loss.tau_train = 0.0;
      break;
    case Method::Naive:
      c.anchoring = false;
      c.fairness = FairnessKind::Naive;
      c.alpha = 0.0;
      c.gamma = 0.0;
      c.loss.lambda = 0.005;
      c.loss.tau_train = 0.0001;
      break;
    case Method::Ours:
      break;
  }
  return c;
}

std::string TrainConfig::canonical() const {
  std::ostringstream os;
  os << "denoise.sigma=" << fmt(sag.denoise.sigma) << '\n'
     << "eval.order=" << eval_sag.order.str() << '\n'
     << "eval.patch=" << eval_sag.patch_size << '\n'
     << "eval.sigma=" << fmt(eval_sag.denoise.sigma) << '\n'
     << "loss.lambda=" << fmt(loss.lambda) << '\n'
     << "loss.tau_eval=" << fmt(loss.tau_eval) << '\n'
     << "loss.tau_train=" << fmt(loss.tau_train) << '\n'
     << "model.hidden=" << hidden << '\n'
     << "seeds.data=" << seeds.data << '\n'
     << "seeds.eval=" << seeds.eval << '\n'
     << "seeds.init=" << seeds.init << '\n'
     << "seeds.mask=" << seeds.mask << '\n'
     << "seeds.shuffle=" << seeds.shuffle << '\n'
     << "train.alpha=" << fmt(alpha) << '\n'
     << "train.anchoring=" << (anchoring ? "true" : "false") << '\n'
     << "train.batch_size=" << batch_size << '\n'
     << "train.epochs=" << epochs << '\n'
     << "train.fairness=" << to_string(fairness) << '\n'
     << "train.gamma=" << fmt(gamma) << '\n'
     << "train.lr=" << fmt(lr) << '\n'
     << "train.method=" << to_string(method) << '\n'
     << "train.order=" << sag.order.str() << '\n'
     << "train.patch=" << sag.patch_size << '\n';
  return os.str();
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t TrainConfig::hash() const { return fnv1a64(canonical()); }

std::string hex_hash(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = digits[h & 0xf];
  return s;
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ContractError("train: epochs must be >= 1");
  if (cfg.batch_size < 2) throw ContractError("train: batch_size must be >= 2");
  if (!(cfg.lr > 0.0)) throw ContractError("train: learning rate must be positive");
  if (!(cfg.gamma >= 0.0)) throw ContractError("train: gamma must be >= 0");
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw ContractError("train: alpha must lie in [0,1]");
  if (cfg.hidden < 1) throw ContractError("train: hidden must be >= 1");
  validate(cfg.loss);
}

PreparedBatch prepare_batch(const TrainConfig& cfg, std::span<const Sample* const> samples,
                            const ReferenceSet& refs, std::uint64_t mask_seed,
                            std::uint64_t shuffle_seed) {
  PreparedBatch pb;
  std::vector<Image> xs;
  std::vector<std::string> ids;
  xs.reserve(samples.size());
  for (const Sample* s : samples) {
    xs.push_back(s->image);
    ids.push_back(s->id);
    pb.labels.push_back(s->label);
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(xs.size());
  if (cfg.anchoring) {
    const AnchorBatch ab = make_batch(xs, pb.labels, ids, refs, cfg.alpha, mask_seed);
    pb.masked = ab.masked;
    for (const Image& a : ab.inputs) rows.push_back(downsample(a));
  } else {
    for (const Image& x : xs) rows.push_back(downsample(make_raw_input(x)));
  }
  pb.inputs = stack_rows(rows);

  switch (cfg.fairness) {
    case FairnessKind::None:
      break;
    case FairnessKind::Naive:
      pb.distances = pixel_distances(xs);
      break;
    case FairnessKind::Star: {
      std::vector<SagRepr> reprs;
      reprs.reserve(xs.size());
      for (const Image& x : xs) reprs.push_back(sag_transform(x, cfg.sag, shuffle_seed));
      pb.distances = repr_distances(reprs);
      break;
    }
  }
  return pb;
}

ObjectiveValue batch_objective(const ClassifierParams& params, const PreparedBatch& batch,
                               const TrainConfig& cfg, bool with_grad) {
  const ForwardCache cache = forward(params, batch.inputs);
  const auto n = static_cast<std::size_t>(cache.probs.rows());
  std::vector<ProbPair> probs(n);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    probs[i] = {cache.probs(r, 0), cache.probs(r, 1)};
    scores[i] = cache.probs(r, 1);
  }

  ObjectiveValue v;
  v.ce = ce_star(probs, batch.labels, batch.masked);
  const bool fair = cfg.fairness != FairnessKind::None && n >= 2;
  if (fair) v.ind = pairwise_hinge(scores, batch.distances, cfg.loss.tau_train);
  v.total = total_loss(v.ce, v.ind, cfg.loss.lambda);
  if (!with_grad) return v;

  // d(total)/d(logits).
  RowMatrix up(static_cast<Eigen::Index>(n), 2);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (batch.masked) {
      up(r, 0) = (probs[i][0] - 0.5) * inv_n;
      up(r, 1) = (probs[i][1] - 0.5) * inv_n;
    } else {
      up(r, 0) = (probs[i][0] - (batch.labels[i] == 0 ? 1.0 : 0.0)) * inv_n;
      up(r, 1) = (probs[i][1] - (batch.labels[i] == 1 ? 1.0 : 0.0)) * inv_n;
    }
  }
  if (fair && cfg.loss.lambda != 0.0) {
    const auto gs = pairwise_hinge_grad(scores, batch.distances, cfg.loss.tau_train);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double ds = cfg.loss.lambda * gs[i] * scores[i] * (1.0 - scores[i]);
      up(r, 0) -= ds;
      up(r, 1) += ds;
    }
  }
  v.grad = backward(params, cache, up);
  return v;
}

ObjectiveProbe::ObjectiveProbe(const TrainConfig& cfg, std::span<const Sample> train,
                               const ReferenceSet& refs)
    : cfg_(cfg) {
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  std::vector<const Sample*> ptrs;
  for (const Sample& s : train) ptrs.push_back(&s);
  for (std::size_t begin = 0, b = 0; begin + 1 < ptrs.size(); begin += bs, ++b) {
    const std::size_t end = std::min(begin + bs, ptrs.size());
    batches_.push_back(prepare_batch(cfg, std::span(ptrs).subspan(begin, end - begin), refs,
                                     derive_seed(cfg.seeds.mask, kProbeStream, b),
                                     derive_seed(cfg.seeds.shuffle, kProbeStream, b)));
  }
}

ObjectiveValue ObjectiveProbe::operator()(const ClassifierParams& params) const {
  ObjectiveValue sum;
  for (const auto& b : batches_) {
    const ObjectiveValue v = batch_objective(params, b, cfg_, false);
    sum.total += v.total;
    sum.ce += v.ce;
    sum.ind += v.ind;
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, batches_.size()));
  sum.total /= n;
  sum.ce /= n;
  sum.ind /= n;
  return sum;
}

std::string history_csv(const TrainHistory& h) {
  std::ostringstream os;
  os << kHistoryCsvHeader << '\n';
  for (const auto& r : h.records) {
    os << r.epoch << ',' << fmt(r.total) << ',' << fmt(r.ce) << ',' << fmt(r.ind) << ','
       << fmt(r.auc) << ',' << fmt(r.metric_naive) << ',' << fmt(r.metric_star) << '\n';
  }
  return os.str();
}

ReferenceSet make_reference_set(std::span<const Sample> samples) {
  std::vector<Image> images;
  std::vector<std::string> ids;
  for (const Sample& s : samples) {
    images.push_back(s.image);
    ids.push_back(s.id);
  }
  return ReferenceSet(std::move(images), std::move(ids));
}

EvalSettings eval_settings(const TrainConfig& cfg) {
  EvalSettings e;
  e.seed = cfg.seeds.eval;
  e.batch_size = cfg.batch_size;
  e.tau_eval = cfg.loss.tau_eval;
  e.sag = cfg.eval_sag;
  e.mode = cfg.input_mode();
  return e;
}

TrainResult train(const TrainConfig& cfg, std::span<const Sample> train_set,
                  const ReferenceSet& refs, std::span<const Sample> eval_set,
                  const StepObserver& observer) {
  validate(cfg);
  if (train_set.size() < 2) throw ContractError("train: need at least 2 training samples");
  const int channels = train_set.front().image.channels();
  const int in_dim = 2 * channels * kPooledSide * kPooledSide;

  TrainResult result;
  ClassifierParams params = init_params(in_dim, cfg.hidden, cfg.seeds.init);
  const ObjectiveProbe probe(cfg, train_set, refs);
  std::optional<EvalPlan> plan;
  if (!eval_set.empty()) plan = make_eval_plan(eval_set, refs, eval_settings(cfg));

  const auto n = static_cast<int>(train_set.size());
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  double best = std::numeric_limits<double>::infinity();
  long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<int> order = seeded_permutation(n, derive_seed(cfg.seeds.data, epoch));
    for (std::size_t begin = 0; begin + 1 < order.size(); begin += bs) {
      const std::size_t end = std::min(begin + bs, order.size());
      std::vector<const Sample*> members;
      for (std::size_t i = begin; i < end; ++i) members.push_back(&train_set[order[i]]);
      const PreparedBatch batch =
          prepare_batch(cfg, members, refs, derive_seed(cfg.seeds.mask, step),
                        derive_seed(cfg.seeds.shuffle, step));

      ObjectiveValue v = batch_objective(params, batch, cfg, true);
      if (!std::isfinite(v.total) || !all_finite(v.grad)) {
        throw NumericalError("non-finite loss at batch " + std::to_string(step), step);
      }
      std::vector<double> grad = std::move(v.grad);
      if (cfg.gamma > 0.0) {
        const std::vector<double> eps = sam_epsilon(grad, cfg.gamma);
        ClassifierParams shifted = params;
        for (std::size_t i = 0; i < eps.size(); ++i) shifted.theta[i] += eps[i];
        ObjectiveValue at_shift = batch_objective(shifted, batch, cfg, true);
        if (!std::isfinite(at_shift.total) || !all_finite(at_shift.grad)) {
          throw NumericalError("non-finite perturbed loss at batch " + std::to_string(step), step);
        }
        grad = std::move(at_shift.grad);
      }
      params.theta = sgd_step(params.theta, grad, cfg.lr);
      if (observer) observer(step, params);
      ++step;
    }

    const ObjectiveValue obj = probe(params);
    if (!std::isfinite(obj.total)) {
      throw NumericalError("non-finite objective after epoch " + std::to_string(epoch), step - 1);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.total = obj.total;
    rec.ce = obj.ce;
    rec.ind = obj.ind;
    if (plan) {
      const EvalReport rep = evaluate(params, *plan);
      rec.auc = rep.auc;
      rec.metric_naive = rep.metric_naive;
      rec.metric_star = rep.metric_star;
    } else {
      rec.auc = rec.metric_naive = rec.metric_star = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.records.push_back(rec);
    if (obj.total < best) {
      best = obj.total;
      result.history.best_index = static_cast<int>(result.history.records.size()) - 1;
      result.params = params;
    }
  }
  result.last = std::move(params);
  return result;
}

bool sam_ascent_check(const std::function<double(std::span<const double>)>& loss,
                      std::span<const double> theta, std::span<const double> grad, double gamma,
                      std::uint64_t seed) {
  if (theta.size() != grad.size()) throw ContractError("sam_ascent_check: length mismatch");
  const std::vector<double> eps = sam_epsilon(grad, gamma);
  Rng rng(seed);
  std::vector<double> dir(theta.size());
  double sq = 0.0;
  for (double& d : dir) {
    d = rng.normal();
    sq += d * d;
  }
  const double scale = sq > 0.0 ? gamma / std::sqrt(sq) : 0.0;
  std::vector<double> a(theta.begin(), theta.end());
  std::vector<double> b(theta.begin(), theta.end());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    a[i] += eps[i];
    b[i] += scale * dir[i];
  }
  if (gamma == 0.0) b.assign(theta.begin(), theta.end());
  return loss(a) >= loss(b);
}

bool sam_ascent_check(const ClassifierParams& params, const PreparedBatch& batch,
                      const TrainConfig& cfg, double gamma, std::uint64_t seed) {
  const ObjectiveValue v = batch_objective(params, batch, cfg, true);
  auto loss = [&](std::span<const double> theta) {
    ClassifierParams p = params;
    p.theta.assign(theta.begin(), theta.end());
    return batch_objective(p, batch, cfg, false).total;
  };
  return sam_ascent_check(loss, params.theta, v.grad, gamma, seed);
}

}  // namespace fairdet
