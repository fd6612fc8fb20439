#include "convbench/tensor.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace convbench {

template <typename T>
void fill_random(std::span<T> values, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& x : values) {
    T v;
    // Narrowing to float can round values just below 1 up to 1.
    do {
      v = static_cast<T>(dist(gen));
    } while (v >= T(1));
    x = v;
  }
}

template <typename T>
Closeness allclose(std::span<const T> a, std::span<const T> b, double rtol,
                   double atol) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("allclose: buffer lengths differ");
  }
  Closeness c;
  const double floor = rtol > 0 ? atol / rtol : 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = static_cast<double>(a[i]);
    const double y = static_cast<double>(b[i]);
    const double diff = std::abs(x - y);
    if (std::isnan(diff)) {
      c.pass = false;
      c.max_rel_err = std::numeric_limits<double>::infinity();
      c.max_abs_err = std::numeric_limits<double>::infinity();
      continue;
    }
    if (!(diff <= atol + rtol * std::abs(y))) c.pass = false;
    const double denom = std::abs(y) + floor;
    double rel = 0;
    if (diff > 0) {
      rel = denom > 0 ? diff / denom : std::numeric_limits<double>::infinity();
    }
    c.max_rel_err = std::max(c.max_rel_err, rel);
    c.max_abs_err = std::max(c.max_abs_err, diff);
  }
  return c;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

template void fill_random<float>(std::span<float>, std::uint64_t);
template void fill_random<double>(std::span<double>, std::uint64_t);
template Closeness allclose<float>(std::span<const float>,
                                   std::span<const float>, double, double);
template Closeness allclose<double>(std::span<const double>,
                                    std::span<const double>, double, double);

}  // namespace convbench
