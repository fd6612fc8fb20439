#include <random>
#include <set>

#include "convbench/conv_descriptor.hpp"
#include "convbench/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace convbench;

namespace {

ConvDescriptor make(std::int64_t c, std::int64_t h, std::int64_t w,
                    std::int64_t f, std::int64_t kh, std::int64_t kw,
                    std::int64_t s = 1, std::int64_t p = 0, std::int64_t dil = 1,
                    std::int64_t g = 1, bool bias = false) {
  ConvDescriptor d;
  d.in_channels = c;
  d.in_h = h;
  d.in_w = w;
  d.out_channels = f;
  d.k_h = kh;
  d.k_w = kw;
  d.stride_h = d.stride_w = s;
  d.pad_h = d.pad_w = p;
  d.dil_h = d.dil_w = dil;
  d.groups = g;
  d.has_bias = bias;
  return d;
}

}  // namespace

TEST_CASE("output_shape: sliding window counts") {
  CHECK(output_shape(make(1, 5, 5, 1, 3, 3)) == OutputShape{3, 3});
  CHECK(output_shape(make(4, 13, 9, 2, 1, 1)) == OutputShape{13, 9});

  // Frozen from oracle::count_windows(224, 7, 2, 3, 1) == 112.
  REQUIRE(oracle::count_windows(224, 7, 2, 3, 1) == 112);
  CHECK(output_shape(make(3, 224, 224, 64, 7, 7, 2, 3)) == OutputShape{112, 112});
}

TEST_CASE("output_shape matches brute-force window enumeration") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const ConvDescriptor d = oracle::random_descriptor(rng);
    const OutputShape o = output_shape(d);
    CHECK(o.out_h == oracle::count_windows(d.in_h, d.k_h, d.stride_h, d.pad_h, d.dil_h));
    CHECK(o.out_w == oracle::count_windows(d.in_w, d.k_w, d.stride_w, d.pad_w, d.dil_w));
  }
}

TEST_CASE("output_shape monotonicity in pad and stride") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    ConvDescriptor d = oracle::random_descriptor(rng);
    const OutputShape base = output_shape(d);
    ConvDescriptor padded = d;
    padded.pad_h += 1;
    padded.pad_w += 1;
    const OutputShape op = output_shape(padded);
    CHECK(op.out_h >= base.out_h);
    CHECK(op.out_w >= base.out_w);
    ConvDescriptor strided = d;
    strided.stride_h += 1;
    strided.stride_w += 1;
    const OutputShape os = output_shape(strided);
    CHECK(os.out_h <= base.out_h);
    CHECK(os.out_w <= base.out_w);
  }
}

TEST_CASE("validate rejects broken descriptors") {
  CHECK_THROWS_AS(validate(make(0, 5, 5, 1, 3, 3)), InvalidDescriptor);
  CHECK_THROWS_AS(validate(make(3, 5, 5, 4, 3, 3, 1, 0, 1, 2)), InvalidDescriptor);
  CHECK_THROWS_AS(validate(make(4, 5, 5, 3, 3, 3, 1, 0, 1, 2)), InvalidDescriptor);
  CHECK_THROWS_AS(validate(make(1, 5, 5, 1, 3, 3, 0)), InvalidDescriptor);
  CHECK_THROWS_AS(validate(make(1, 5, 5, 1, 3, 3, 1, -1)), InvalidDescriptor);
  CHECK_THROWS_AS(output_shape(make(1, 2, 2, 1, 3, 3)), InvalidDescriptor);
  // Dilated 3x3 spans 5 taps: fits 5x5 exactly, not 4x4.
  CHECK(output_shape(make(1, 5, 5, 1, 3, 3, 1, 0, 2)) == OutputShape{1, 1});
  CHECK_THROWS_AS(output_shape(make(1, 4, 4, 1, 3, 3, 1, 0, 2)), InvalidDescriptor);
}

TEST_CASE("key_of format and round trip") {
  const ConvDescriptor d = make(3, 224, 224, 64, 7, 7, 2, 3, 1, 1, true);
  CHECK(key_of(d) == "n1_c3x224x224_f64x7x7_s2x2_p3x3_d1x1_g1_b1");
  CHECK(key_of(d) == key_of(make(3, 224, 224, 64, 7, 7, 2, 3, 1, 1, true)));

  ConvDescriptor e = d;
  e.stride_w = 1;
  CHECK(key_of(e) != key_of(d));

  CHECK(parse_key(key_of(d)) == d);
  CHECK_THROWS_AS(parse_key("n1_c3x224x224_f64x7x7_s2x2_p3x3_d1x1_g1"), InvalidDescriptor);
  CHECK_THROWS_AS(parse_key("n1_c3x224x224_f64x7x7_s2x2_p3x3_d1x1_g1_b2"), InvalidDescriptor);
  CHECK_THROWS_AS(parse_key("n01_c3x224x224_f64x7x7_s2x2_p3x3_d1x1_g1_b1"), InvalidDescriptor);
  CHECK_THROWS_AS(parse_key("n1_c3x224x224_f64x7x7_s2x2_p3x3_d1x1_g1_b1x"), InvalidDescriptor);
}

TEST_CASE("key_of is injective over sampled descriptor pairs") {
  std::mt19937_64 rng(2024);
  int distinct_pairs = 0;
  while (distinct_pairs < 10000) {
    const ConvDescriptor a = oracle::random_descriptor(rng, 12);
    ConvDescriptor b = a;
    // Perturb one random field so pairs are often near-identical.
    switch (rng() % 15) {
      case 0: b.batch += 1; break;
      case 1: b.in_channels += b.groups; break;
      case 2: b.in_h += 1; break;
      case 3: b.in_w += 1; break;
      case 4: b.out_channels += b.groups; break;
      case 5: b.k_h = 1; break;
      case 6: b.k_w = 1; break;
      case 7: b.stride_h += 1; break;
      case 8: b.stride_w += 1; break;
      case 9: b.pad_h += 1; break;
      case 10: b.pad_w += 1; break;
      case 11: b.dil_h = 1; break;
      case 12: b.dil_w = 1; break;
      case 13: b.has_bias = !b.has_bias; break;
      default: b = oracle::random_descriptor(rng, 12); break;
    }
    if (a == b) continue;
    ++distinct_pairs;
    REQUIRE(key_of(a) != key_of(b));
    CHECK(parse_key(key_of(b)) == b);
  }
}

TEST_CASE("classify") {
  const ConvFlags pw = classify(make(8, 7, 7, 8, 1, 1));
  CHECK(pw.pointwise);
  CHECK_FALSE(pw.regular);

  const ConvFlags reg = classify(make(8, 7, 7, 8, 3, 3));
  CHECK(reg.regular);
  CHECK_FALSE(reg.any_irregular());

  const ConvFlags rect = classify(make(8, 7, 7, 8, 3, 1));
  CHECK(rect.rectangular);
  CHECK_FALSE(rect.regular);

  const ConvFlags both = classify(make(4, 9, 9, 4, 3, 3, 1, 0, 2, 2));
  CHECK(both.grouped);
  CHECK(both.dilated);
  CHECK_FALSE(both.regular);
}

TEST_CASE("classify partition property") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 3000; ++i) {
    const ConvDescriptor d = oracle::random_descriptor(rng);
    const ConvFlags f = classify(d);
    CHECK(f.regular == !(f.pointwise || f.grouped || f.dilated || f.rectangular));
    CHECK(f.pointwise == (d.k_h == 1 && d.k_w == 1));
  }
}

TEST_CASE("flop_count") {
  CHECK(flop_count(make(1, 1, 1, 1, 1, 1)) == 2);
  CHECK(flop_count(make(1, 3, 3, 1, 3, 3)) == 18);
  CHECK(flop_count(make(1, 3, 3, 1, 3, 3, 1, 0, 1, 1, true)) == 19);

  std::mt19937_64 rng(99);
  int checked = 0;
  while (checked < 300) {
    const ConvDescriptor d = oracle::random_descriptor(rng, 20);
    const std::int64_t flops = flop_count(d);
    if (flops > 1'000'000) continue;
    ++checked;
    CHECK(flops == oracle::count_naive_flops(d));
  }
}

TEST_CASE("lint warns on out-of-range shapes without throwing") {
  CHECK(lint(make(3, 224, 224, 64, 7, 7)).empty());
  const auto w = lint(make(16384, 2048, 8, 8, 33, 1));
  CHECK(w.size() == 3);
}
