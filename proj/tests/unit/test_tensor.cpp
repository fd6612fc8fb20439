#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "convbench/error.hpp"
#include "convbench/tensor.hpp"
#include "doctest.h"

using namespace convbench;

TEST_CASE("fill_random is deterministic per seed") {
  std::vector<float> a(1000), b(1000), c(1000);
  fill_random<float>(a, 42);
  fill_random<float>(b, 42);
  fill_random<float>(c, 43);
  CHECK(a == b);
  CHECK(a != c);
  for (float x : a) {
    CHECK(x >= -1.0f);
    CHECK(x < 1.0f);
  }
}

TEST_CASE("fill_random mean over 1e6 draws") {
  std::vector<double> v(1'000'000);
  fill_random<double>(v, 7);
  double sum = 0;
  for (double x : v) sum += x;
  CHECK(std::abs(sum / static_cast<double>(v.size())) <= 0.01);
}

TEST_CASE("fill_constant") {
  Tensor4D<float> t(1, 2, 3, 4);
  fill_constant(t, 0.5f);
  for (float x : t.data()) CHECK(x == 0.5f);
}

TEST_CASE("NCHW index is a bijection onto [0, count)") {
  Tensor4D<float> t(2, 3, 4, 5);
  std::set<std::size_t> seen;
  std::size_t expect = 0;
  for (std::int64_t n = 0; n < 2; ++n)
    for (std::int64_t c = 0; c < 3; ++c)
      for (std::int64_t y = 0; y < 4; ++y)
        for (std::int64_t x = 0; x < 5; ++x) {
          const std::size_t i = t.index(n, c, y, x);
          CHECK(i == expect++);  // innermost w is contiguous
          seen.insert(i);
        }
  CHECK(seen.size() == t.size());
  CHECK(*seen.rbegin() == t.size() - 1);
}

TEST_CASE("allclose boundary") {
  const std::vector<double> b{1.0, -2.0, 0.0};
  const double rtol = 1e-4, atol = 1e-6;

  // Exactly on the bound passes; just past it fails.
  std::vector<double> a{1.0 + (atol + rtol * 1.0), -2.0, 0.0};
  CHECK(allclose<double>(a, b, rtol, atol).pass);
  a[0] = 1.0 + 1.01 * (atol + rtol * 1.0);
  const Closeness over = allclose<double>(a, b, rtol, atol);
  CHECK_FALSE(over.pass);
  CHECK(over.max_rel_err > rtol);

  // Near zero only atol applies.
  std::vector<double> z{1.0, -2.0, 0.9e-6};
  const Closeness zc = allclose<double>(z, b, rtol, atol);
  CHECK(zc.pass);
  CHECK(zc.max_rel_err <= rtol);
  z[2] = 1.1e-6;
  CHECK_FALSE(allclose<double>(z, b, rtol, atol).pass);

  CHECK(allclose<double>(b, b).max_rel_err == 0.0);
  CHECK(allclose<double>(b, b).max_abs_err == 0.0);
}

TEST_CASE("allclose pass implies max_rel_err <= rtol") {
  std::vector<double> b(2000), a(2000), noise(2000);
  fill_random<double>(b, 1);
  fill_random<double>(noise, 2);
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] *= (i % 3 == 0) ? 1e-7 : 10.0;
    a[i] = b[i] + noise[i] * (1e-6 + 1e-4 * std::abs(b[i])) * 0.999;
  }
  const Closeness c = allclose<double>(a, b);
  CHECK(c.pass);
  CHECK(c.max_rel_err <= kDefaultRtol);
}

TEST_CASE("allclose NaN and shape errors") {
  const std::vector<float> b{1.0f, 2.0f};
  const std::vector<float> a{1.0f, std::numeric_limits<float>::quiet_NaN()};
  CHECK_FALSE(allclose<float>(a, b).pass);
  const std::vector<float> shorter{1.0f};
  CHECK_THROWS_AS(allclose<float>(shorter, b), DimensionMismatch);
  CHECK_THROWS_AS(allclose(Tensor4D<float>(1, 1, 2, 1), Tensor4D<float>(1, 1, 1, 2)),
                  DimensionMismatch);
}

TEST_CASE("mix_seed streams differ") {
  std::set<std::uint64_t> s;
  for (std::uint64_t stream = 0; stream < 3; ++stream)
    for (std::uint64_t seed = 0; seed < 100; ++seed) s.insert(mix_seed(seed, stream));
  CHECK(s.size() == 300);
}

TEST_CASE("MatrixView block addressing") {
  MatrixRM<int> m(4, 5);
  for (std::int64_t r = 0; r < 4; ++r)
    for (std::int64_t c = 0; c < 5; ++c) m(r, c) = static_cast<int>(10 * r + c);
  const auto blk = m.view().block(1, 2, 2, 3);
  CHECK(blk.rows == 2);
  CHECK(blk.cols == 3);
  CHECK(blk(0, 0) == 12);
  CHECK(blk(1, 2) == 24);
}
