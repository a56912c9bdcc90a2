#include "fairdet/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fairdet/error.hpp"
#include "fairdet/random.hpp"
#include "fairdet/spectral.hpp"

namespace fairdet {

namespace {

constexpr std::uint64_t kTargetStream = 1;
constexpr std::uint64_t kDonorStream = 2;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (!is_power_of_two(cfg.side)) throw ContractError("synth: side must be a power of two");
  if (!(cfg.blend_fraction >= 0.0 && cfg.blend_fraction <= 1.0)) {
    throw ContractError("synth: blend fraction must lie in [0,1]");
  }
  if (!(cfg.artifact_amplitude >= 0.0)) throw ContractError("synth: artifact amplitude must be >= 0");
  if (cfg.artifact_period < 2 || cfg.artifact_period % 2 != 0) {
    throw ContractError("synth: artifact period must be an even number >= 2");
  }
  if (cfg.field_components < 0 || cfg.max_frequency < 1 || cfg.field_amplitude < 0.0 ||
      cfg.noise_sigma < 0.0) {
    throw ContractError("synth: invalid field parameters");
  }
}

Image smooth_field(const SynthConfig& cfg, std::uint64_t seed) {
  const int s = cfg.side;
  constexpr int kChannels = 3;
  Rng rng(seed);
  Image img(s, s, kChannels, ValueRange::Signed);
  for (int ch = 0; ch < kChannels; ++ch) {
    for (int k = 0; k < cfg.field_components; ++k) {
      const int span = 2 * cfg.max_frequency + 1;
      int fx = 0;
      int fy = 0;
      while (fx == 0 && fy == 0) {
        fx = static_cast<int>(rng.index(span)) - cfg.max_frequency;
        fy = static_cast<int>(rng.index(span)) - cfg.max_frequency;
      }
      const double amp = cfg.field_amplitude * rng.uniform(0.5, 1.0);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
          img.at(y, x, ch) +=
              amp * std::sin(2.0 * std::numbers::pi * (fx * x + fy * y) / s + phase);
    }
  }
  for (double& v : img.data()) v += 0.5 + cfg.noise_sigma * rng.normal();
  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
  return img.with_range(ValueRange::Unit01);
}

int blend_square_side(const SynthConfig& cfg) {
  return static_cast<int>(std::lround(std::sqrt(cfg.blend_fraction) * cfg.side));
}

Image checkerboard(int side, int channels, int period) {
  const int cell = period / 2;
  Image img(side, side, channels, ValueRange::Signed);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const double on = ((y / cell + x / cell) % 2 == 0) ? 1.0 : -1.0;
      for (int c = 0; c < channels; ++c) img.at(y, x, c) = on;
    }
  return img;
}

Triplet gen_triplet(std::uint64_t seed, const SynthConfig& cfg) {
  validate(cfg);
  Triplet t;
  t.seed = seed;
  t.blend_fraction = cfg.blend_fraction;
  t.artifact_amplitude = cfg.artifact_amplitude;
  t.artifact_period = cfg.artifact_period;
  t.target = smooth_field(cfg, derive_seed(seed, kTargetStream));
  t.donor = smooth_field(cfg, derive_seed(seed, kDonorStream));

  Image fake = t.target;
  const int s = cfg.side;
  const int sq = blend_square_side(cfg);
  const int lo = (s - sq) / 2;
  for (int y = lo; y < lo + sq; ++y)
    for (int x = lo; x < lo + sq; ++x)
      for (int c = 0; c < fake.channels(); ++c)
        fake.at(y, x, c) = 0.5 * t.target.at(y, x, c) + 0.5 * t.donor.at(y, x, c);
  if (cfg.artifact_amplitude > 0.0) {
    const Image pattern = checkerboard(s, fake.channels(), cfg.artifact_period);
    auto f = fake.data();
    const auto p = pattern.data();
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] = std::clamp(f[i] + cfg.artifact_amplitude * p[i], 0.0, 1.0);
  }
  t.fake = std::move(fake);
  return t;
}

const char* to_string(Role r) {
  switch (r) {
    case Role::Target: return "target";
    case Role::Donor: return "donor";
    case Role::Fake: return "fake";
  }
  return "?";
}

Role parse_role(const std::string& text) {
  if (text == "target") return Role::Target;
  if (text == "donor") return Role::Donor;
  if (text == "fake") return Role::Fake;
  throw ContractError("unknown role '" + text + "'");
}

Manifest gen_dataset(int n_triplets, std::uint64_t seed, const SynthConfig& cfg,
                     const std::filesystem::path& out_dir) {
  if (n_triplets <= 0) throw ContractError("gen_dataset: n must be positive");
  validate(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  Manifest m;
  m.base_dir = out_dir;
  for (int id = 0; id < n_triplets; ++id) {
    const std::uint64_t tseed = derive_seed(seed, static_cast<std::uint64_t>(id));
    const Triplet t = gen_triplet(tseed, cfg);
    const std::pair<Role, const Image*> members[] = {
        {Role::Target, &t.target}, {Role::Donor, &t.donor}, {Role::Fake, &t.fake}};
    for (const auto& [role, img] : members) {
      const std::string name = "t" + std::to_string(id) + "_" + to_string(role) + ".ppm";
      save_ppm(quantize(*img), out_dir / name);
      m.rows.push_back({name, role == Role::Fake ? kLabelFake : kLabelReal, role, id, tseed});
    }
  }
  write_manifest(m, out_dir / "manifest.csv");
  return m;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << kManifestHeader << '\n';
  for (const auto& r : m.rows) {
    out << r.path << ',' << r.label << ',' << to_string(r.role) << ',' << r.triplet_id << ','
        << r.seed << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Manifest m;
  m.base_dir = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kManifestHeader) {
        throw ParseError(path.string() + ":1: expected header '" + kManifestHeader + "'", 1);
      }
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    auto fail = [&](const std::string& why) {
      return ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why, line_no);
    };
    if (fields.size() != 5) throw fail("expected 5 fields, got " + std::to_string(fields.size()));
    ManifestRow row;
    row.path = fields[0];
    if (row.path.empty()) throw fail("empty path");
    try {
      std::size_t used = 0;
      row.label = std::stoi(fields[1], &used);
      if (used != fields[1].size() || (row.label != 0 && row.label != 1)) throw fail("bad label");
      row.role = parse_role(fields[2]);
      row.triplet_id = std::stoi(fields[3], &used);
      if (used != fields[3].size() || row.triplet_id < 0) throw fail("bad triplet_id");
      row.seed = std::stoull(fields[4], &used);
      if (used != fields[4].size()) throw fail("bad seed");
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(std::string("malformed field: ") + e.what());
    }
    if ((row.role == Role::Fake) != (row.label == kLabelFake)) {
      throw fail("label does not match role");
    }
    m.rows.push_back(std::move(row));
  }
  if (line_no == 0) throw ParseError(path.string() + ": empty manifest", 1);
  return m;
}

std::pair<Manifest, Manifest> split(const Manifest& m, double train_frac, std::uint64_t seed) {
  if (!(train_frac >= 0.0 && train_frac <= 1.0)) {
    throw ContractError("split: train fraction must lie in [0,1]");
  }
  std::vector<int> ids;
  for (const auto& r : m.rows) ids.push_back(r.triplet_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  Rng rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.index(i)]);
  const auto n_train = static_cast<std::size_t>(std::lround(train_frac * ids.size()));
  std::map<int, bool> in_train;
  for (std::size_t i = 0; i < ids.size(); ++i) in_train[ids[i]] = i < n_train;

  Manifest train;
  Manifest eval;
  train.base_dir = eval.base_dir = m.base_dir;
  for (const auto& r : m.rows) (in_train[r.triplet_id] ? train : eval).rows.push_back(r);
  return {train, eval};
}

std::vector<Sample> load_samples(const Manifest& m) {
  std::vector<Sample> out;
  out.reserve(m.rows.size());
  for (const auto& r : m.rows) {
    Sample s;
    s.image = normalize(load_ppm(m.base_dir / r.path));
    s.label = r.label;
    s.id = r.path;
    s.triplet_id = r.triplet_id;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Triplet> load_triplets(const Manifest& m) {
  std::map<int, Triplet> by_id;
  for (const auto& r : m.rows) {
    Triplet& t = by_id[r.triplet_id];
    t.seed = r.seed;
    Image img = normalize(load_ppm(m.base_dir / r.path));
    switch (r.role) {
      case Role::Target: t.target = std::move(img); break;
      case Role::Donor: t.donor = std::move(img); break;
      case Role::Fake: t.fake = std::move(img); break;
    }
  }
  std::vector<Triplet> out;
  for (auto& [id, t] : by_id) {
    if (!t.target.empty() && !t.donor.empty() && !t.fake.empty()) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace fairdet

namespace fairdet {

DataSplit load_split(const std::filesystem::path& manifest, double train_frac, std::uint64_t seed) {
  const auto [train, eval] = split(load_manifest(manifest), train_frac, seed);
  return {load_samples(train), load_samples(eval)};
}

}  // namespace fairdet
