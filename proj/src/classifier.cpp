#include "fairdet/classifier.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fairdet/error.hpp"
#include "fairdet/random.hpp"

namespace fairdet {

namespace {

constexpr const char* kMagic = "FAIRDET-CKPT 1";

using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

}  // namespace

ClassifierParams::ClassifierParams(int in_dim_, int hidden_)
    : in_dim(in_dim_), hidden(hidden_), theta(param_count(in_dim_, hidden_), 0.0) {
  if (in_dim_ <= 0 || hidden_ <= 0) throw ContractError("classifier dimensions must be positive");
}

std::size_t ClassifierParams::param_count(int in_dim, int hidden) {
  const auto h = static_cast<std::size_t>(hidden);
  return h * static_cast<std::size_t>(in_dim) + h + 2 * h + 2;
}

ClassifierParams init_params(int in_dim, int hidden, std::uint64_t seed) {
  ClassifierParams p(in_dim, hidden);
  Rng rng(seed);
  const double s1 = std::sqrt(2.0 / in_dim);
  const double s2 = std::sqrt(2.0 / hidden);
  for (std::size_t i = p.w1_offset(); i < p.b1_offset(); ++i) p.theta[i] = s1 * rng.normal();
  for (std::size_t i = p.w2_offset(); i < p.b2_offset(); ++i) p.theta[i] = s2 * rng.normal();
  return p;
}

std::vector<double> downsample(const Image& img) {
  const int side = img.height();
  if (img.width() != side) throw ContractError("downsample: image must be square");
  if (side < kPooledSide) throw ContractError("downsample: side must be at least 32");
  if ((side & (side - 1)) != 0) throw ContractError("downsample: side must be a power of two");
  const int f = side / kPooledSide;
  const int c = img.channels();
  const double inv = 1.0 / (static_cast<double>(f) * f);
  std::vector<double> out(static_cast<std::size_t>(kPooledSide) * kPooledSide * c, 0.0);
  for (int py = 0; py < kPooledSide; ++py)
    for (int px = 0; px < kPooledSide; ++px)
      for (int k = 0; k < c; ++k) {
        double acc = 0.0;
        for (int y = 0; y < f; ++y)
          for (int x = 0; x < f; ++x) acc += img.at(py * f + y, px * f + x, k);
        out[(static_cast<std::size_t>(py) * kPooledSide + px) * c + k] = f == 1 ? acc : acc * inv;
      }
  return out;
}

RowMatrix stack_rows(std::span<const std::vector<double>> rows) {
  if (rows.empty()) return RowMatrix(0, 0);
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ContractError("stack_rows: ragged rows");
    m.row(static_cast<Eigen::Index>(i)) = ConstVecMap(rows[i].data(), m.cols()).transpose();
  }
  return m;
}

ForwardCache forward(const ClassifierParams& params, const RowMatrix& inputs) {
  if (inputs.cols() != params.in_dim) {
    throw ContractError("forward: input dimension " + std::to_string(inputs.cols()) +
                        " does not match in_dim " + std::to_string(params.in_dim));
  }
  const int h = params.hidden;
  const double* t = params.theta.data();
  const ConstRowMap w1(t + params.w1_offset(), h, params.in_dim);
  const ConstVecMap b1(t + params.b1_offset(), h);
  const ConstRowMap w2(t + params.w2_offset(), 2, h);
  const ConstVecMap b2(t + params.b2_offset(), 2);

  ForwardCache c;
  c.inputs = inputs;
  c.pre.noalias() = inputs * w1.transpose();
  c.pre.rowwise() += b1.transpose();
  c.activations = c.pre.cwiseMax(0.0);
  c.logits.noalias() = c.activations * w2.transpose();
  c.logits.rowwise() += b2.transpose();
  c.probs.resize(c.logits.rows(), 2);
  for (Eigen::Index i = 0; i < c.logits.rows(); ++i) {
    const double m = std::max(c.logits(i, 0), c.logits(i, 1));
    const double e0 = std::exp(c.logits(i, 0) - m);
    const double e1 = std::exp(c.logits(i, 1) - m);
    const double z = e0 + e1;
    c.probs(i, 0) = e0 / z;
    c.probs(i, 1) = e1 / z;
  }
  return c;
}

std::vector<double> backward(const ClassifierParams& params, const ForwardCache& cache,
                             const RowMatrix& upstream) {
  const int h = params.hidden;
  if (cache.inputs.cols() != params.in_dim || cache.pre.cols() != h ||
      upstream.rows() != cache.logits.rows() || upstream.cols() != 2) {
    throw ContractError("backward: cache or upstream does not match the parameters");
  }
  const double* t = params.theta.data();
  const ConstRowMap w2(t + params.w2_offset(), 2, h);

  std::vector<double> grad(params.theta.size(), 0.0);
  double* g = grad.data();
  RowMap gw1(g + params.w1_offset(), h, params.in_dim);
  VecMap gb1(g + params.b1_offset(), h);
  RowMap gw2(g + params.w2_offset(), 2, h);
  VecMap gb2(g + params.b2_offset(), 2);

  gw2.noalias() = upstream.transpose() * cache.activations;
  gb2 = upstream.colwise().sum().transpose();
  RowMatrix dpre = upstream * w2;
  for (Eigen::Index i = 0; i < dpre.rows(); ++i)
    for (Eigen::Index j = 0; j < dpre.cols(); ++j)
      if (cache.pre(i, j) <= 0.0) dpre(i, j) = 0.0;
  gw1.noalias() = dpre.transpose() * cache.inputs;
  gb1 = dpre.colwise().sum().transpose();
  return grad;
}

double predict_score(const ClassifierParams& params, const Image& input) {
  const std::vector<double> v = downsample(input);
  RowMatrix x = ConstVecMap(v.data(), static_cast<Eigen::Index>(v.size())).transpose();
  return forward(params, x).probs(0, 1);
}

std::vector<double> predict_scores(const ClassifierParams& params, const RowMatrix& inputs) {
  const ForwardCache c = forward(params, inputs);
  std::vector<double> out(static_cast<std::size_t>(c.probs.rows()));
  for (Eigen::Index i = 0; i < c.probs.rows(); ++i) out[static_cast<std::size_t>(i)] = c.probs(i, 1);
  return out;
}

const char* to_string(InputMode m) { return m == InputMode::Anchored ? "anchored" : "raw"; }

void save_checkpoint(const ClassifierParams& params, InputMode mode,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << kMagic << '\n' << params.in_dim << ' ' << params.hidden << ' ' << to_string(mode) << '\n';
  std::vector<char> buf(params.theta.size() * 8);
  for (std::size_t i = 0; i < params.theta.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(params.theta[i]);
    for (int b = 0; b < 8; ++b) buf[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, int expected_in_dim,
                           int expected_hidden) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  std::string shape;
  if (!std::getline(in, magic) || magic != kMagic) {
    throw FormatError(path.string() + ": not a checkpoint (bad magic)");
  }
  if (!std::getline(in, shape)) throw FormatError(path.string() + ": missing shape header");
  std::istringstream hs(shape);
  int in_dim = 0;
  int hidden = 0;
  std::string mode_text;
  if (!(hs >> in_dim >> hidden >> mode_text) || in_dim <= 0 || hidden <= 0 ||
      (mode_text != "anchored" && mode_text != "raw")) {
    throw FormatError(path.string() + ": malformed shape header '" + shape + "'");
  }
  if ((expected_in_dim && in_dim != expected_in_dim) ||
      (expected_hidden && hidden != expected_hidden)) {
    throw FormatError(path.string() + ": checkpoint shape (" + std::to_string(in_dim) + ", " +
                      std::to_string(hidden) + ") does not match expected (" +
                      std::to_string(expected_in_dim) + ", " + std::to_string(expected_hidden) +
                      ")");
  }
  Checkpoint ck;
  ck.mode = mode_text == "anchored" ? InputMode::Anchored : InputMode::Raw;
  ck.params = ClassifierParams(in_dim, hidden);
  const std::vector<char> payload((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (payload.size() != ck.params.theta.size() * 8) {
    throw FormatError(path.string() + ": payload has " + std::to_string(payload.size()) +
                      " bytes, expected " + std::to_string(ck.params.theta.size() * 8));
  }
  for (std::size_t i = 0; i < ck.params.theta.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(payload[i * 8 + b])) << (8 * b);
    ck.params.theta[i] = std::bit_cast<double>(bits);
  }
  return ck;
}

}  // namespace fairdet
