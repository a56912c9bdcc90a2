// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "fairdet/ablation.hpp"
#include "fairdet/anchoring.hpp"
#include "fairdet/classifier.hpp"
#include "fairdet/evaluation.hpp"
#include "fairdet/losses.hpp"
#include "fairdet/optim.hpp"
#include "fairdet/sag.hpp"
#include "fairdet/spectral.hpp"
#include "fairdet/synthdata.hpp"
#include "oracles.hpp"

using namespace fairdet;
namespace fs = std::filesystem;

namespace tol {
constexpr double kFftAbs = 1e-9;
constexpr double kParsevalRel = 1e-10;
constexpr double kFftSeconds = 10.0;
constexpr double kGradStep = 1e-5;
constexpr double kGradRel = 1e-4;
constexpr double kGradFloor = 1e-7;  // denominator floor for coordinates with vanishing gradient
constexpr double kGradSeconds = 30.0;
constexpr double kPairwiseAbs = 1e-12;
constexpr double kMotivationMargin = 0.10;
constexpr double kMotivationSeconds = 60.0;
constexpr double kSamNormAbs = 1e-12;
constexpr double kSamGamma = 0.05;
constexpr int kSamTrainedWins = 90;
constexpr double kMaskSigmas = 3.0;
constexpr double kMinAuc = 0.90;
constexpr double kAucSlack = 0.02;
constexpr double kEndToEndSeconds = 15 * 60.0;
constexpr double kAblationSeconds = 90 * 60.0;
constexpr int kLambdaInversions = 1;
}  // namespace tol

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

void progress(const std::string& s) {
  std::fprintf(stderr, "[acceptance] %s\n", s.c_str());
}

// 1
void fft_oracle() {
  const auto t0 = Clock::now();
  oracle::Gen g(1001);
  double worst = 0.0, worst_parseval = 0.0;
  for (int n : {2, 4, 8, 16, 32}) {
    for (int k = 0; k < 50; ++k) {
      const auto x = g.vec(static_cast<std::size_t>(n) * n, -1.0, 1.0);
      const Spectrum f = fft2d(x, n, n);
      const auto ref = oracle::naive_dft(x, n, n);
      double energy_x = 0.0, energy_f = 0.0;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        worst = std::max(worst, std::abs(f.bins[i] - ref[i]));
        energy_x += x[i] * x[i];
        energy_f += std::norm(f.bins[i]);
      }
      worst_parseval =
          std::max(worst_parseval, std::fabs(energy_f / (n * n) - energy_x) / energy_x);
    }
  }
  const double secs = seconds_since(t0);
  report(1, worst < tol::kFftAbs && worst_parseval < tol::kParsevalRel && secs < tol::kFftSeconds,
         fmt("max_abs=%.3g", worst) + fmt(" parseval_rel=%.3g", worst_parseval) +
             fmt(" seconds=%.2f", secs));
}

// 2
void gradient_oracle() {
  const auto t0 = Clock::now();
  oracle::Gen g(1002);
  const int in_dim = 2 * 3 * kPooledSide * kPooledSide;
  const int batch = 4;
  double worst = 0.0;
  for (int draw = 0; draw < 10; ++draw) {
    ClassifierParams p = init_params(in_dim, kDefaultHidden, 500 + draw);
    for (std::size_t i = p.b1_offset(); i < p.w2_offset(); ++i) p.theta[i] = 0.1 * g.normal();
    for (std::size_t i = p.w2_offset(); i < p.theta.size(); ++i) p.theta[i] = 0.3 * g.normal();
    RowMatrix x(batch, in_dim);
    for (int r = 0; r < batch; ++r)
      for (int c = 0; c < in_dim; ++c) x(r, c) = g.uniform(-1.0, 1.0);
    std::vector<int> y(batch);
    for (int& v : y) v = g.integer(0, 1);

    const auto loss = [&](const ClassifierParams& q) {
      const ForwardCache c = forward(q, x);
      double s = 0.0;
      for (int r = 0; r < batch; ++r) s -= std::log(c.probs(r, y[r]));
      return s;
    };
    const ForwardCache cache = forward(p, x);
    RowMatrix up = cache.probs;
    for (int r = 0; r < batch; ++r) up(r, y[r]) -= 1.0;
    const auto grad = backward(p, cache, up);

    for (int k = 0; k < 100; ++k) {
      const auto i = static_cast<std::size_t>(g.integer(0, static_cast<int>(p.theta.size()) - 1));
      const double saved = p.theta[i];
      p.theta[i] = saved + tol::kGradStep;
      const double hi = loss(p);
      p.theta[i] = saved - tol::kGradStep;
      const double lo = loss(p);
      p.theta[i] = saved;
      const double fd = (hi - lo) / (2 * tol::kGradStep);
      const double rel =
          std::fabs(fd - grad[i]) / std::max(std::fabs(fd) + std::fabs(grad[i]), tol::kGradFloor);
      worst = std::max(worst, rel);
    }
  }
  const double secs = seconds_since(t0);
  report(2, worst < tol::kGradRel && secs < tol::kGradSeconds,
         fmt("max_rel=%.3g", worst) + fmt(" seconds=%.2f", secs));
}

// 3
void pairwise_oracle() {
  oracle::Gen g(1003);
  SagConfig sag;
  sag.patch_size = 4;
  double worst = 0.0;
  for (int b = 0; b < 200; ++b) {
    const int n = g.integer(2, 8);
    std::vector<Image> imgs;
    for (int i = 0; i < n; ++i) imgs.push_back(g.unit_image(16, 16, 3));
    const auto s = g.vec(static_cast<std::size_t>(n));
    const double tau = g.uniform(0.0, 0.1);
    std::vector<SagRepr> reprs;
    for (const auto& im : imgs) reprs.push_back(sag_transform(im, sag, 77 + b));

    const auto pixel = [&](std::size_t i, std::size_t j) {
      return oracle::l2(oracle::values(imgs[i]), oracle::values(imgs[j]));
    };
    const auto spectral = [&](std::size_t i, std::size_t j) {
      return oracle::l2(std::get<Spectrum>(reprs[i]).bins, std::get<Spectrum>(reprs[j]).bins);
    };
    const double tau_s = tau / 16.0;
    worst = std::max(worst, std::fabs(ind_naive(s, imgs, tau) - oracle::brute_hinge(s, pixel, tau)));
    worst = std::max(worst, std::fabs(metric_naive_adapted(s, imgs, tau) -
                                      oracle::brute_hinge(s, pixel, tau)));
    worst = std::max(worst, std::fabs(ind_star(s, reprs, tau_s) -
                                      oracle::brute_hinge(s, spectral, tau_s)));
    worst = std::max(worst, std::fabs(metric_star_adapted(s, reprs, tau_s) -
                                      oracle::brute_hinge(s, spectral, tau_s)));
  }
  report(3, worst <= tol::kPairwiseAbs, fmt("max_abs=%.3g", worst));
}

// 4
void auc_oracle() {
  oracle::Gen g(1004);
  int mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = g.integer(2, 200);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = g.integer(0, 20) / 20.0;
      y[i] = g.integer(0, 1);
    }
    y[0] = 0;
    y[1] = 1;
    if (auc(s, y) != oracle::pair_count_auc(s, y)) ++mismatches;
  }
  const double ex = auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1});
  report(4, mismatches == 0 && ex == 0.75,
         "mismatches=" + std::to_string(mismatches) + fmt(" example=%.4f", ex));
}

// 5
void motivation() {
  const auto t0 = Clock::now();
  const SynthConfig cfg;
  std::vector<Triplet> ts;
  for (std::uint64_t s = 0; s < 200; ++s) ts.push_back(gen_triplet(derive_seed(42, s), cfg));
  SagConfig sag;
  sag.patch_size = 16;
  const TripletDistances px = motivation_experiment(ts, DistanceMode::Pixel, ts.size(), sag, 0);
  const TripletDistances sg = motivation_experiment(ts, DistanceMode::Sag, ts.size(), sag, 0);
  // Margins relative to the larger of the two averages.
  const double px_margin = (px.target_donor - px.fake_target) / std::max(px.target_donor, px.fake_target);
  const double sg_margin = (sg.fake_target - sg.target_donor) / std::max(sg.target_donor, sg.fake_target);
  const double secs = seconds_since(t0);
  report(5,
         px_margin >= tol::kMotivationMargin && sg_margin >= tol::kMotivationMargin &&
             secs < tol::kMotivationSeconds,
         fmt("pixel ft=%.3f", px.fake_target) + fmt(" td=%.3f", px.target_donor) +
             fmt(" margin=%.3f", px_margin) + fmt(" | sag ft=%.3f", sg.fake_target) +
             fmt(" td=%.3f", sg.target_donor) + fmt(" margin=%.3f", sg_margin) +
             fmt(" seconds=%.1f", secs));
}

// 7
void masking() {
  oracle::Gen g(1007);
  std::vector<Image> refs_img;
  std::vector<std::string> ref_ids;
  for (int i = 0; i < 10; ++i) {
    refs_img.push_back(g.unit_image(8, 8, 3));
    ref_ids.push_back("r" + std::to_string(i));
  }
  const ReferenceSet refs(refs_img, ref_ids);
  const std::vector<Image> xs = {refs_img[0], refs_img[1], g.unit_image(8, 8, 3), refs_img[3]};
  const std::vector<int> labels = {1, 1, 0, 1};
  const std::vector<std::string> ids = {"r0", "r1", "x2", "r3"};

  const auto ref_channels_zero = [](const Image& a) {
    const int c = a.channels() / 2;
    for (int y = 0; y < a.height(); ++y)
      for (int x = 0; x < a.width(); ++x)
        for (int k = 0; k < c; ++k)
          if (a.at(y, x, k) != 0.0) return false;
    return true;
  };

  bool alpha0 = true, alpha1 = true, shared = true;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const AnchorBatch b0 = make_batch(xs, labels, ids, refs, 0.0, s);
    alpha0 = alpha0 && !b0.masked;
    for (const auto& a : b0.inputs) alpha0 = alpha0 && !ref_channels_zero(a);
    const AnchorBatch b1 = make_batch(xs, labels, ids, refs, 1.0, s);
    alpha1 = alpha1 && b1.masked;
    for (const auto& a : b1.inputs) alpha1 = alpha1 && ref_channels_zero(a);
  }
  const int n = 10000;
  int masked = 0;
  for (int s = 0; s < n; ++s) {
    const AnchorBatch b = make_batch(xs, labels, ids, refs, 0.2, 50000 + s);
    masked += b.masked ? 1 : 0;
    for (const auto& a : b.inputs) shared = shared && (ref_channels_zero(a) == b.masked);
  }
  const double frac = static_cast<double>(masked) / n;
  const double bound = tol::kMaskSigmas * std::sqrt(0.2 * 0.8 / n);
  report(7, alpha0 && alpha1 && shared && std::fabs(frac - 0.2) <= bound,
         std::string("alpha0_never=") + (alpha0 ? "yes" : "no") + " alpha1_zero=" +
             (alpha1 ? "yes" : "no") + " shared=" + (shared ? "yes" : "no") +
             fmt(" masked_frac=%.4f", frac) + fmt(" bound=%.4f", bound));
}

struct MethodRun {
  ClassifierParams params;
  ReferenceSet refs;
  TrainConfig cfg;
  EvalReport clean;
  EvalReport blur;
};

// 6, after the end-to-end runs supply trained models.
void sam_contract(const MethodRun& trained, std::span<const Sample> train_set) {
  oracle::Gen g(1006);
  double worst_norm = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto grad = g.vec(static_cast<std::size_t>(g.integer(1, 500)), -3.0, 3.0);
    const auto eps = sam_epsilon(grad, tol::kSamGamma);
    double sq = 0.0;
    for (double e : eps) sq += e * e;
    worst_norm = std::max(worst_norm, std::fabs(std::sqrt(sq) - tol::kSamGamma));
  }

  // L(t) = 0.5 * sum d_i t_i^2 + b.t
  const std::size_t dim = 32;
  const auto d = g.vec(dim, 1.0, 1.5);
  const auto b = g.vec(dim, -1.0, 1.0);
  const auto quad = [&](std::span<const double> t) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += 0.5 * d[i] * t[i] * t[i] + b[i] * t[i];
    return s;
  };
  const auto theta = g.vec(dim, -1.0, 1.0);
  std::vector<double> grad(dim);
  for (std::size_t i = 0; i < dim; ++i) grad[i] = d[i] * theta[i] + b[i];
  int quad_wins = 0;
  for (std::uint64_t s = 0; s < 100; ++s)
    quad_wins += sam_ascent_check(quad, theta, grad, tol::kSamGamma, s) ? 1 : 0;

  int worst_batch = 100;
  for (int batch = 0; batch < 3; ++batch) {
    std::vector<const Sample*> members;
    for (int i = 0; i < trained.cfg.batch_size; ++i)
      members.push_back(&train_set[static_cast<std::size_t>(batch * trained.cfg.batch_size + i)]);
    const PreparedBatch pb = prepare_batch(trained.cfg, members, trained.refs, 900 + batch, 950 + batch);
    int wins = 0;
    for (std::uint64_t s = 0; s < 100; ++s)
      wins += sam_ascent_check(trained.params, pb, trained.cfg, tol::kSamGamma, 7000 + s) ? 1 : 0;
    worst_batch = std::min(worst_batch, wins);
  }
  report(6,
         worst_norm <= tol::kSamNormAbs && quad_wins == 100 && worst_batch >= tol::kSamTrainedWins,
         fmt("norm_err=%.3g", worst_norm) + " quadratic=" + std::to_string(quad_wins) +
             "/100 trained_min=" + std::to_string(worst_batch) + "/100");
}

// 11
int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FAIRDET_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void determinism(const fs::path& root) {
  const std::string small = " --set synth.side=32";
  const std::string quick =
      small + " --set train.epochs=2 --set train.batch_size=8 --set model.hidden=16";
  bool ok = true;
  int compared = 0;
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = root / ("det" + std::to_string(pass));
    fs::create_directories(dir);
    const std::string m = " --manifest " + (dir / "data" / "manifest.csv").string();
    const fs::path log = dir / "log.txt";
    const std::vector<std::string> cmds = {
        "gen --n 8 --seed 5 --out " + (dir / "data").string() + small,
        "motivate --mode sag" + m,
        "motivate --mode pixel" + m,
        "train --method ours --out " + (dir / "ours").string() + m + quick,
        "train --method naive --out " + (dir / "naive").string() + m + quick,
        "eval --checkpoint " + (dir / "ours" / "model.ckpt").string() + m + " --seed 11",
        "eval --checkpoint " + (dir / "ours" / "model.ckpt").string() + m +
            " --seed 11 --perturb gaussianblur:3 --out " + (dir / "blur").string(),
        "ablate --which lambda --repeats 1 --out " + dir.string() + m + quick,
    };
    for (const auto& c : cmds) ok = ok && run_cli(c, log) == 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (!e.is_regular_file() || e.path().filename() == "log.txt") continue;
      const std::string rel = fs::relative(e.path(), dir).string();
      if (pass == 0) {
        first[rel] = slurp(e.path());
      } else {
        ++compared;
        const auto it = first.find(rel);
        ok = ok && it != first.end() && it->second == slurp(e.path());
      }
    }
  }
  ok = ok && compared == static_cast<int>(first.size()) && compared > 0;
  report(11, ok, "files_compared=" + std::to_string(compared));
}

}  // namespace

int main() {
  fft_oracle();
  gradient_oracle();
  pairwise_oracle();
  auc_oracle();
  motivation();

  const fs::path root =
      fs::temp_directory_path() / ("fairdet_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  progress("generating the 500-triplet corpus");
  gen_dataset(500, 42, SynthConfig{}, root / "corpus");
  const DataSplit data = load_split(root / "corpus" / "manifest.csv", 0.8, 7);

  // End-to-end runs for criteria 6, 8 and 12.
  const auto t8 = Clock::now();
  RunCache cache;
  std::map<Method, std::vector<MethodRun>> runs;
  const ReferenceSet refs = make_reference_set(data.train);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (Method m : {Method::Ori, Method::Naive, Method::Ours}) {
      progress(std::string("training ") + to_string(m) + " seed " + std::to_string(seed));
      const TrainConfig cfg = with_seeds(TrainConfig::preset(m), Seeds::from(seed));
      const TrainResult res = train(cfg, data.train, refs, {});
      EvalSettings es = eval_settings(cfg);
      const EvalReport clean = evaluate(res.params, data.eval, refs, es);
      es.perturbation = Perturbation{PerturbKind::GaussianBlur, 3};
      const EvalReport blur = evaluate(res.params, data.eval, refs, es);
      cache.emplace(cfg.hash(), clean);
      runs[m].push_back({res.params, refs, cfg, clean, blur});
    }
  }
  const double secs8 = seconds_since(t8);

  sam_contract(runs[Method::Ours][0], data.train);
  masking();

  const auto med = [&](Method m, double EvalReport::*field) {
    std::vector<double> v;
    for (const auto& r : runs[m]) v.push_back(r.clean.*field);
    return median3(v);
  };
  {
    const double s_ori = med(Method::Ori, &EvalReport::metric_star);
    const double s_naive = med(Method::Naive, &EvalReport::metric_star);
    const double s_ours = med(Method::Ours, &EvalReport::metric_star);
    const double a_ori = med(Method::Ori, &EvalReport::auc);
    const double a_naive = med(Method::Naive, &EvalReport::auc);
    const double a_ours = med(Method::Ours, &EvalReport::auc);
    report(8,
           s_ours < s_ori && s_ours < s_naive && a_ours >= tol::kMinAuc &&
               a_ours >= a_ori - tol::kAucSlack && secs8 < tol::kEndToEndSeconds,
           fmt("star ori=%.5f", s_ori) + fmt(" naive=%.5f", s_naive) + fmt(" ours=%.5f", s_ours) +
               fmt(" | auc ori=%.4f", a_ori) + fmt(" naive=%.4f", a_naive) +
               fmt(" ours=%.4f", a_ours) + fmt(" seconds=%.0f", secs8));
  }

  {
    const auto t9 = Clock::now();
    const TrainConfig base = TrainConfig::preset(Method::Ours);
    progress("order ablation");
    const AblationTable order = run_order_ablation(base, data, 3, &cache);
    progress("component ablation");
    const AblationTable comp = run_component_ablation(base, data, 3, &cache);
    const double secs9 = seconds_since(t9);
    const std::string def = order_plan(base).variants.front().name;
    const double def_star = order.median(def).report.metric_star;
    bool order_ok = true;
    std::string detail = "order:";
    for (const auto& v : order_plan(base).variants) {
      const double s = order.median(v.name).report.metric_star;
      detail += " " + v.name + fmt("=%.5f", s);
      if (v.name != def && !(def_star <= s)) order_ok = false;
    }
    const double full_star = comp.median("full").report.metric_star;
    bool comp_ok = true;
    detail += " | component:";
    for (const auto& v : component_plan(base).variants) {
      const double s = comp.median(v.name).report.metric_star;
      detail += " " + v.name + fmt("=%.5f", s);
      if (v.name != "full" && !(full_star < s)) comp_ok = false;
    }
    write_table(order, root);
    write_table(comp, root);
    report(9, order_ok && comp_ok && secs9 < tol::kAblationSeconds,
           detail + fmt(" seconds=%.0f", secs9));
  }

  {
    progress("lambda sweep");
    const TrainConfig base = TrainConfig::preset(Method::Ours);
    const AblationTable sweep = run_lambda_sweep(base, kPaperLambdas, data, 3, &cache);
    const auto plan = lambda_plan(base, kPaperLambdas);
    std::vector<double> star, aucs;
    std::string detail;
    for (const auto& v : plan.variants) {
      const auto& r = sweep.median(v.name).report;
      star.push_back(r.metric_star);
      aucs.push_back(r.auc);
      detail += v.name + fmt(" star=%.5f", r.metric_star) + fmt(" auc=%.4f  ", r.auc);
    }
    int inversions = 0;
    for (std::size_t i = 0; i + 1 < star.size(); ++i) inversions += star[i + 1] > star[i] ? 1 : 0;
    report(10, inversions <= tol::kLambdaInversions && aucs.back() <= aucs.front(),
           detail + "inversions=" + std::to_string(inversions));
  }

  determinism(root);

  {
    const auto delta = [&](Method m) {
      std::vector<double> v;
      for (const auto& r : runs[m]) v.push_back(r.blur.metric_star - r.clean.metric_star);
      return median3(v);
    };
    const double d_ours = delta(Method::Ours), d_ori = delta(Method::Ori);
    report(12, d_ours <= d_ori,
           fmt("median increase ours=%.5f", d_ours) + fmt(" ori=%.5f", d_ori) +
               fmt(" | blurred auc ours=%.4f", median3({runs[Method::Ours][0].blur.auc,
                                                          runs[Method::Ours][1].blur.auc,
                                                          runs[Method::Ours][2].blur.auc})) +
               fmt(" ori=%.4f", median3({runs[Method::Ori][0].blur.auc, runs[Method::Ori][1].blur.auc,
                                          runs[Method::Ori][2].blur.auc})));
  }

  fs::remove_all(root);
  std::printf("acceptance: %d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
