#include "fairdet/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fairdet/error.hpp"

namespace fairdet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ContractError(key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ContractError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  const long long s = to_int(key, v);
  if (s < 0) throw ContractError(key + ": seeds must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ContractError(key + ": expected true or false, got '" + v + "'");
}

FairnessKind to_fairness(const std::string& key, const std::string& v) {
  if (v == "none") return FairnessKind::None;
  if (v == "naive") return FairnessKind::Naive;
  if (v == "star") return FairnessKind::Star;
  throw ContractError(key + ": expected none, naive or star, got '" + v + "'");
}

}  // namespace

const std::vector<std::string>& ConfigMap::known_keys() {
  static const std::vector<std::string> keys = {
      "data.split_seed",      "data.train_frac",      "denoise.sigma",
      "eval.order",           "eval.patch",           "eval.sigma",
      "loss.lambda",          "loss.tau_eval",        "loss.tau_train",
      "model.hidden",         "seeds.all",            "seeds.data",
      "seeds.eval",           "seeds.init",           "seeds.mask",
      "seeds.shuffle",        "synth.artifact_amplitude", "synth.artifact_period",
      "synth.blend_fraction", "synth.field_amplitude", "synth.field_components",
      "synth.max_frequency",  "synth.noise_sigma",    "synth.side",
      "train.alpha",          "train.anchoring",      "train.batch_size",
      "train.epochs",         "train.fairness",       "train.gamma",
      "train.lr",             "train.method",         "train.order",
      "train.patch",
  };
  return keys;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw ContractError("unknown config key '" + key + "'");
  }
  values_[key] = value;
}

void ConfigMap::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ContractError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ConfigMap::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected key = value",
                       line_no);
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ContractError& e) {
      throw ContractError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void ConfigMap::merge(const ConfigMap& higher) {
  for (const auto& [k, v] : higher.values_) values_[k] = v;
}

int default_patch_size(int side) { return std::max(1, side / 4); }

RunConfig resolve(const ConfigMap& map) {
  const auto& v = map.values();
  auto get = [&](const std::string& k) -> const std::string* {
    const auto it = v.find(k);
    return it == v.end() ? nullptr : &it->second;
  };

  RunConfig rc;
  const Method method = get("train.method") ? parse_method(*get("train.method")) : Method::Ours;
  rc.train = TrainConfig::preset(method);
  TrainConfig& t = rc.train;

  for (const auto& [key, val] : v) {
    if (key == "train.method") continue;
    if (method == Method::Ori && (key == "loss.lambda" || key == "loss.tau_train")) {
      if (to_double(key, val) != 0.0) rc.warnings.push_back("method ori ignores " + key);
      continue;
    }
    if (key == "data.split_seed") rc.data.split_seed = to_seed(key, val);
    else if (key == "data.train_frac") rc.data.train_frac = to_double(key, val);
    else if (key == "denoise.sigma") t.sag.denoise.sigma = to_double(key, val);
    else if (key == "eval.order") t.eval_sag.order = StageOrder::parse(val);
    else if (key == "eval.patch") t.eval_sag.patch_size = static_cast<int>(to_int(key, val));
    else if (key == "eval.sigma") t.eval_sag.denoise.sigma = to_double(key, val);
    else if (key == "loss.lambda") t.loss.lambda = to_double(key, val);
    else if (key == "loss.tau_eval") t.loss.tau_eval = to_double(key, val);
    else if (key == "loss.tau_train") t.loss.tau_train = to_double(key, val);
    else if (key == "model.hidden") t.hidden = static_cast<int>(to_int(key, val));
    else if (key == "seeds.all") continue;  // applied first, below
    else if (key == "seeds.data") t.seeds.data = to_seed(key, val);
    else if (key == "seeds.eval") t.seeds.eval = to_seed(key, val);
    else if (key == "seeds.init") t.seeds.init = to_seed(key, val);
    else if (key == "seeds.mask") t.seeds.mask = to_seed(key, val);
    else if (key == "seeds.shuffle") t.seeds.shuffle = to_seed(key, val);
    else if (key == "synth.artifact_amplitude") rc.synth.artifact_amplitude = to_double(key, val);
    else if (key == "synth.artifact_period") rc.synth.artifact_period = static_cast<int>(to_int(key, val));
    else if (key == "synth.blend_fraction") rc.synth.blend_fraction = to_double(key, val);
    else if (key == "synth.field_amplitude") rc.synth.field_amplitude = to_double(key, val);
    else if (key == "synth.field_components") rc.synth.field_components = static_cast<int>(to_int(key, val));
    else if (key == "synth.max_frequency") rc.synth.max_frequency = static_cast<int>(to_int(key, val));
    else if (key == "synth.noise_sigma") rc.synth.noise_sigma = to_double(key, val);
    else if (key == "synth.side") rc.synth.side = static_cast<int>(to_int(key, val));
    else if (key == "train.alpha") t.alpha = to_double(key, val);
    else if (key == "train.anchoring") t.anchoring = to_bool(key, val);
    else if (key == "train.batch_size") t.batch_size = static_cast<int>(to_int(key, val));
    else if (key == "train.epochs") t.epochs = static_cast<int>(to_int(key, val));
    else if (key == "train.fairness") t.fairness = to_fairness(key, val);
    else if (key == "train.gamma") t.gamma = to_double(key, val);
    else if (key == "train.lr") t.lr = to_double(key, val);
    else if (key == "train.order") t.sag.order = StageOrder::parse(val);
    else if (key == "train.patch") t.sag.patch_size = static_cast<int>(to_int(key, val));
    else throw ContractError("unknown config key '" + key + "'");
  }
  if (const auto* all = get("seeds.all")) {
    // Individual seeds.* keys still win over seeds.all.
    const Seeds derived = Seeds::from(to_seed("seeds.all", *all));
    if (!get("seeds.data")) t.seeds.data = derived.data;
    if (!get("seeds.init")) t.seeds.init = derived.init;
    if (!get("seeds.mask")) t.seeds.mask = derived.mask;
    if (!get("seeds.shuffle")) t.seeds.shuffle = derived.shuffle;
    if (!get("seeds.eval")) t.seeds.eval = derived.eval;
  }
  if (!get("train.patch")) t.sag.patch_size = default_patch_size(rc.synth.side);
  if (!get("eval.patch")) t.eval_sag.patch_size = default_patch_size(rc.synth.side);
  validate(t);
  validate(rc.synth);
  return rc;
}

std::string canonical(const RunConfig& rc) {
  std::ostringstream os;
  os.precision(17);
  os << rc.train.canonical() << "data.split_seed=" << rc.data.split_seed << '\n'
     << "data.train_frac=" << rc.data.train_frac << '\n'
     << "synth.artifact_amplitude=" << rc.synth.artifact_amplitude << '\n'
     << "synth.artifact_period=" << rc.synth.artifact_period << '\n'
     << "synth.blend_fraction=" << rc.synth.blend_fraction << '\n'
     << "synth.field_amplitude=" << rc.synth.field_amplitude << '\n'
     << "synth.field_components=" << rc.synth.field_components << '\n'
     << "synth.max_frequency=" << rc.synth.max_frequency << '\n'
     << "synth.noise_sigma=" << rc.synth.noise_sigma << '\n'
     << "synth.side=" << rc.synth.side << '\n';
  return os.str();
}

std::uint64_t hash(const RunConfig& rc) { return fnv1a64(canonical(rc)); }

}  // namespace fairdet
