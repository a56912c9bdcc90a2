#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fairdet/ablation.hpp"
#include "fairdet/config.hpp"
#include "fairdet/error.hpp"
#include "fairdet/evaluation.hpp"
#include "fairdet/optim.hpp"
#include "fairdet/sag.hpp"
#include "fairdet/synthdata.hpp"

namespace fs = std::filesystem;
using namespace fairdet;

namespace {

enum Exit { kOk = 0, kIo = 1, kUsage = 2, kNumerical = 3, kFormat = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "key = value config file");
  cmd->add_option("--set", c.sets, "override, key=value (repeatable)");
}

ConfigMap build_map(const Common& c) {
  ConfigMap map;
  try {
    if (!c.config_file.empty()) map.load_file(c.config_file);
    ConfigMap flags;
    for (const auto& s : c.sets) flags.set_assignment(s);
    map.merge(flags);
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  return map;
}

// Patch sizes follow the image side of the loaded data unless set explicitly.
RunConfig resolve_for(ConfigMap map, int side, bool report = true) {
  if (!map.has("synth.side")) map.set("synth.side", std::to_string(side));
  try {
    RunConfig rc = resolve(map);
    if (report)
      for (const auto& w : rc.warnings) std::cerr << "warning: " << w << '\n';
    return rc;
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
}

void print_hash(const RunConfig& rc) {
  std::cout << "config_hash=" << hex_hash(hash(rc)) << '\n';
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw IoError("missing file: " + p.string());
}

int sample_side(const DataSplit& d) {
  if (d.train.empty()) throw UsageError("manifest has no training samples");
  return d.train.front().image.height();
}

DataSplit load_data(const fs::path& manifest, const RunConfig& rc) {
  return load_split(manifest, rc.data.train_frac, rc.data.split_seed);
}

// The split itself depends on data.* keys, so resolve twice: once to read
// them, once with the actual image side.
std::pair<RunConfig, DataSplit> load_resolved(const ConfigMap& map, const fs::path& manifest) {
  require_file(manifest);
  const RunConfig pre = resolve_for(map, SynthConfig{}.side, false);
  DataSplit data = load_data(manifest, pre);
  return {resolve_for(map, sample_side(data)), std::move(data)};
}

std::string report_line(const EvalReport& r) {
  return "auc=" + fmt(r.auc) + " metric_naive=" + fmt(r.metric_naive) +
         " metric_star=" + fmt(r.metric_star) + " n_eval=" + std::to_string(r.n_eval);
}

int cmd_gen(const Common& c, int n, std::uint64_t seed, const std::string& out) {
  if (n <= 0) throw UsageError("--n must be positive");
  ConfigMap map = build_map(c);
  const RunConfig rc = resolve_for(map, SynthConfig{}.side);
  print_hash(rc);
  gen_dataset(n, seed, rc.synth, out);
  std::cout << "manifest=" << (fs::path(out) / "manifest.csv").string() << '\n';
  return kOk;
}

int cmd_motivate(const Common& c, const std::string& manifest_path, const std::string& mode_text,
                 std::optional<long> count, std::uint64_t seed, std::string csv) {
  const ConfigMap map = build_map(c);
  require_file(manifest_path);
  DistanceMode mode;
  try {
    mode = parse_distance_mode(mode_text);
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  const std::vector<Triplet> triplets = load_triplets(load_manifest(manifest_path));
  if (triplets.empty()) throw UsageError("manifest has no complete triplets");
  const long n = count.value_or(static_cast<long>(triplets.size()));
  if (n <= 0 || n > static_cast<long>(triplets.size()))
    throw UsageError("--i must lie in [1, " + std::to_string(triplets.size()) + "]");
  const RunConfig rc = resolve_for(map, triplets.front().target.height());
  print_hash(rc);

  const TripletDistances d =
      motivation_experiment(triplets, mode, static_cast<std::size_t>(n), rc.train.sag, seed);
  std::cout << "d_fake_target=" << fmt(d.fake_target) << " d_target_donor=" << fmt(d.target_donor)
            << '\n';
  if (csv.empty()) csv = (fs::path(manifest_path).parent_path() / ("motivation_" + mode_text + ".csv")).string();
  write_text(csv, "mode,count,d_fake_target,d_target_donor\n" + mode_text + ',' + std::to_string(n) +
                      ',' + fmt(d.fake_target) + ',' + fmt(d.target_donor) + '\n');
  std::cout << "csv=" << csv << '\n';
  return kOk;
}

int cmd_train(const Common& c, const std::string& manifest, const std::string& method,
              const std::string& out) {
  ConfigMap map = build_map(c);
  if (!method.empty()) {
    try {
      map.set("train.method", method);
      parse_method(method);
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
  }
  auto [rc, data] = load_resolved(map, manifest);
  print_hash(rc);
  const ReferenceSet refs = make_reference_set(data.train);
  const TrainResult res = train(rc.train, data.train, refs, data.eval);

  const fs::path dir(out);
  fs::create_directories(dir);
  save_checkpoint(res.params, rc.train.input_mode(), dir / "model.ckpt");
  write_text(dir / "history.csv", history_csv(res.history));
  write_text(dir / "config.txt", canonical(rc));
  std::cout << "best_epoch=" << res.history.records.at(res.history.best_index).epoch << '\n';
  if (!data.eval.empty())
    std::cout << report_line(evaluate(res.params, data.eval, refs, eval_settings(rc.train))) << '\n';
  std::cout << "checkpoint=" << (dir / "model.ckpt").string() << '\n';
  return kOk;
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& manifest,
             std::optional<std::uint64_t> seed, const std::string& perturb_text, std::string out) {
  require_file(checkpoint);
  // Without --config, the settings saved next to the checkpoint apply.
  Common with_saved = c;
  const fs::path saved = fs::path(checkpoint).parent_path() / "config.txt";
  if (with_saved.config_file.empty() && fs::is_regular_file(saved)) with_saved.config_file = saved.string();
  const ConfigMap map = build_map(with_saved);
  std::optional<Perturbation> perturbation;
  if (!perturb_text.empty()) {
    try {
      perturbation = parse_perturbation(perturb_text);
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
  }
  auto [rc, data] = load_resolved(map, manifest);
  if (data.eval.empty()) throw UsageError("manifest split has no evaluation samples");
  const Image& probe = data.eval.front().image;
  const int in_dim = kPooledSide * kPooledSide * 2 * probe.channels();
  const Checkpoint ck = load_checkpoint(checkpoint, in_dim);
  print_hash(rc);

  EvalSettings settings = eval_settings(rc.train);
  settings.mode = ck.mode;
  if (seed) settings.seed = *seed;
  settings.perturbation = perturbation;
  const ReferenceSet refs = make_reference_set(data.train);
  const EvalReport report = evaluate(ck.params, data.eval, refs, settings);

  if (out.empty()) out = fs::path(checkpoint).parent_path().string();
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  write_text(dir / "eval.json", to_json(report) + "\n");
  write_text(dir / "eval.csv", std::string(kEvalCsvHeader) + '\n' + to_csv_row(report) + '\n');
  std::cout << report_line(report) << '\n' << "json=" << (dir / "eval.json").string() << '\n';
  return kOk;
}

int cmd_ablate(const Common& c, const std::string& which, const std::string& manifest, int repeats,
               const std::string& out) {
  if (which != "order" && which != "component" && which != "lambda")
    throw UsageError("--which must be order, component or lambda");
  if (repeats < 1) throw UsageError("--repeats must be >= 1");
  auto [rc, data] = load_resolved(build_map(c), manifest);
  print_hash(rc);
  AblationTable table;
  if (which == "order") table = run_order_ablation(rc.train, data, repeats);
  else if (which == "component") table = run_component_ablation(rc.train, data, repeats);
  else table = run_lambda_sweep(rc.train, kPaperLambdas, data, repeats);
  for (const auto& row : table.rows)
    if (row.repeat < 0) std::cout << row.variant << ' ' << report_line(row.report) << '\n';
  std::cout << "csv=" << write_table(table, out).string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairness-regularized forgery detector on synthetic triplets"};
  app.require_subcommand(1);

  Common gen_c, mot_c, train_c, eval_c, abl_c;

  auto* gen = app.add_subcommand("gen", "generate a seeded synthetic triplet dataset");
  int gen_n = 0;
  std::uint64_t gen_seed = 42;
  std::string gen_out;
  gen->add_option("--n", gen_n, "number of triplets")->required();
  gen->add_option("--seed", gen_seed, "dataset seed");
  gen->add_option("--out", gen_out, "output directory")->required();
  add_common(gen, gen_c);

  auto* mot = app.add_subcommand("motivate", "average triplet distances in one space");
  std::string mot_manifest, mot_mode = "pixel", mot_csv;
  std::optional<long> mot_i;
  std::uint64_t mot_seed = 0;
  mot->add_option("--manifest", mot_manifest)->required();
  mot->add_option("--mode", mot_mode, "pixel|power|sag");
  mot->add_option("--i", mot_i, "number of triplets (default: all)");
  mot->add_option("--seed", mot_seed, "patch shuffle seed for sag mode");
  mot->add_option("--csv", mot_csv, "output CSV path");
  add_common(mot, mot_c);

  auto* tr = app.add_subcommand("train", "train a detector");
  std::string tr_manifest, tr_method, tr_out = "run";
  tr->add_option("--manifest", tr_manifest)->required();
  tr->add_option("--method", tr_method, "ori|naive|ours");
  tr->add_option("--out", tr_out, "output directory");
  add_common(tr, train_c);

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ev_ckpt, ev_manifest, ev_perturb, ev_out;
  std::optional<std::uint64_t> ev_seed;
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--manifest", ev_manifest)->required();
  ev->add_option("--seed", ev_seed, "reference and batching seed");
  ev->add_option("--perturb", ev_perturb, "kind:severity, e.g. gaussianblur:3");
  ev->add_option("--out", ev_out, "output directory (default: checkpoint directory)");
  add_common(ev, eval_c);

  auto* ab = app.add_subcommand("ablate", "run an ablation table");
  std::string ab_which, ab_manifest, ab_out = ".";
  int ab_repeats = 3;
  ab->add_option("--which", ab_which, "order|component|lambda")->required();
  ab->add_option("--manifest", ab_manifest)->required();
  ab->add_option("--repeats", ab_repeats);
  ab->add_option("--out", ab_out, "output directory");
  add_common(ab, abl_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen(gen_c, gen_n, gen_seed, gen_out);
    if (*mot) return cmd_motivate(mot_c, mot_manifest, mot_mode, mot_i, mot_seed, mot_csv);
    if (*tr) return cmd_train(train_c, tr_manifest, tr_method, tr_out);
    if (*ev) return cmd_eval(eval_c, ev_ckpt, ev_manifest, ev_seed, ev_perturb, ev_out);
    if (*ab) return cmd_ablate(abl_c, ab_which, ab_manifest, ab_repeats, ab_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error at batch " << e.batch_index() << ": " << e.what() << '\n';
    return kNumerical;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kFormat;
  } catch (const ParseError& e) {
    std::cerr << "format error at offset " << e.offset() << ": " << e.what() << '\n';
    return kFormat;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const ContractError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}
