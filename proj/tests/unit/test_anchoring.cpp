#include <doctest.h>

#include <cmath>
#include <string>

#include "fairdet/anchoring.hpp"
#include "fairdet/error.hpp"
#include "oracles.hpp"

using namespace fairdet;

namespace {

ReferenceSet make_set(oracle::Gen& g, int n, int side = 8) {
  std::vector<Image> imgs;
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    imgs.push_back(g.unit_image(side, side, 3));
    ids.push_back("r" + std::to_string(i));
  }
  return ReferenceSet(imgs, ids);
}

bool within_3_sigma(int count, int n, double p) {
  return std::fabs(count - n * p) <= 3.0 * std::sqrt(n * p * (1.0 - p));
}

}  // namespace

TEST_SUITE("anchoring") {

TEST_CASE("anchor layout") {
  oracle::Gen g(41);
  const Image x = g.unit_image(8, 8, 3), r = g.unit_image(8, 8, 3);
  const Image a = make_anchor(x, r);
  CHECK(a.channels() == 6);
  CHECK(a.range() == ValueRange::Signed);
  for (int y = 0; y < 8; ++y)
    for (int xx = 0; xx < 8; ++xx)
      for (int c = 0; c < 3; ++c) {
        CHECK(a.at(y, xx, c) == r.at(y, xx, c));
        CHECK(std::fabs(a.at(y, xx, c) + a.at(y, xx, c + 3) - x.at(y, xx, c)) < 1e-12);
      }
  const Image self = make_anchor(x, x);
  for (int y = 0; y < 8; ++y)
    for (int xx = 0; xx < 8; ++xx)
      for (int c = 3; c < 6; ++c) CHECK(self.at(y, xx, c) == 0.0);
  CHECK_THROWS_AS(make_anchor(x, g.unit_image(4, 4, 3)), ContractError);
}

TEST_CASE("raw input and masking zero the reference half") {
  oracle::Gen g(42);
  const Image x = g.unit_image(4, 4, 3);
  const Image raw = make_raw_input(x);
  Image masked = make_anchor(x, g.unit_image(4, 4, 3));
  mask_reference(masked);
  for (int y = 0; y < 4; ++y)
    for (int xx = 0; xx < 4; ++xx)
      for (int c = 0; c < 3; ++c) {
        CHECK(raw.at(y, xx, c) == 0.0);
        CHECK(raw.at(y, xx, c + 3) == x.at(y, xx, c));
        CHECK(masked.at(y, xx, c) == 0.0);
      }
}

TEST_CASE("reference set contract") {
  oracle::Gen g(43);
  CHECK_THROWS_AS(ReferenceSet({}, {}), ContractError);
  CHECK_THROWS_AS(ReferenceSet({g.unit_image(4, 4, 3), g.unit_image(8, 8, 3)}, {"a", "b"}), ContractError);
  CHECK_THROWS_AS(ReferenceSet({g.unit_image(4, 4, 3), g.unit_image(4, 4, 3)}, {"a", "a"}), ContractError);
  CHECK_THROWS_AS(ReferenceSet({g.unit_image(4, 4, 3)}, {"a", "b"}), ContractError);
  const ReferenceSet s = make_set(g, 3);
  CHECK(s.find("r2") == std::optional<std::size_t>(2));
  CHECK_FALSE(s.find("zz").has_value());
}

TEST_CASE("reference sampling") {
  oracle::Gen g(44);
  const ReferenceSet one = make_set(g, 1);
  CHECK(sample_reference(one, std::nullopt, 5) == 0);
  CHECK_THROWS_AS(sample_reference(one, std::string_view("r0"), 5), ContractError);
  CHECK(sample_reference(one, std::string_view("elsewhere"), 5) == 0);

  const ReferenceSet four = make_set(g, 4);
  CHECK(sample_reference(four, std::nullopt, 77) == sample_reference(four, std::nullopt, 77));

  const int n = 10000;
  int counts[4] = {0, 0, 0, 0};
  int excl[4] = {0, 0, 0, 0};
  for (int s = 0; s < n; ++s) {
    counts[sample_reference(four, std::nullopt, static_cast<std::uint64_t>(s))]++;
    excl[sample_reference(four, std::string_view("r1"), static_cast<std::uint64_t>(s))]++;
  }
  for (int i = 0; i < 4; ++i) CHECK(within_3_sigma(counts[i], n, 0.25));
  CHECK(excl[1] == 0);
  for (int i : {0, 2, 3}) CHECK(within_3_sigma(excl[i], n, 1.0 / 3.0));
}

TEST_CASE("batch masking") {
  oracle::Gen g(45);
  const ReferenceSet refs = make_set(g, 6);
  std::vector<Image> xs;
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (int i = 0; i < 5; ++i) {
    xs.push_back(g.unit_image(8, 8, 3));
    labels.push_back(i % 2);
    ids.push_back(i == 0 ? "r3" : "x" + std::to_string(i));
  }

  for (std::uint64_t s = 0; s < 200; ++s) CHECK_FALSE(make_batch(xs, labels, ids, refs, 0.0, s).masked);

  for (std::uint64_t s = 0; s < 50; ++s) {
    const AnchorBatch b = make_batch(xs, labels, ids, refs, 1.0, s);
    CHECK(b.masked);
    CHECK(b.ref_ids.size() == xs.size());
    CHECK(b.ref_ids[0] != "r3");
    for (const auto& in : b.inputs)
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          for (int c = 0; c < 3; ++c) CHECK(in.at(y, x, c) == 0.0);
  }

  const AnchorBatch open = make_batch(xs, labels, ids, refs, 0.0, 3);
  CHECK(open.labels == labels);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Image& r = refs.image(*refs.find(open.ref_ids[i]));
    CHECK(open.inputs[i] == make_anchor(xs[i], r));
  }

  // Masking does not change which references are drawn.
  const AnchorBatch closed = make_batch(xs, labels, ids, refs, 1.0, 3);
  CHECK(closed.ref_ids == open.ref_ids);

  CHECK_THROWS_AS(make_batch(xs, labels, ids, refs, -0.1, 1), ContractError);
  CHECK_THROWS_AS(make_batch(xs, labels, ids, refs, 1.1, 1), ContractError);
}

TEST_CASE("masking frequency at alpha 0.2") {
  oracle::Gen g(46);
  const ReferenceSet refs = make_set(g, 3, 4);
  const std::vector<Image> xs = {g.unit_image(4, 4, 3), g.unit_image(4, 4, 3)};
  const std::vector<int> labels = {0, 1};
  const std::vector<std::string> ids = {"a", "b"};
  const int n = 10000;
  int masked = 0;
  for (int s = 0; s < n; ++s) masked += make_batch(xs, labels, ids, refs, 0.2, static_cast<std::uint64_t>(s)).masked;
  CHECK(within_3_sigma(masked, n, 0.2));
}

}  // TEST_SUITE
