#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "convbench/error.hpp"

namespace convbench {

struct Dims4 {
  std::int64_t n = 0;
  std::int64_t c = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;

  std::int64_t count() const noexcept { return n * c * h * w; }
  friend bool operator==(const Dims4&, const Dims4&) = default;
};

/// Dense NCHW tensor owning a contiguous buffer.
template <typename T>
class Tensor4D {
 public:
  using value_type = T;

  Tensor4D() = default;
  explicit Tensor4D(Dims4 dims)
      : dims_(dims), data_(static_cast<std::size_t>(dims.count()), T{}) {}
  Tensor4D(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w)
      : Tensor4D(Dims4{n, c, h, w}) {}

  const Dims4& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t index(std::int64_t n, std::int64_t c, std::int64_t y,
                    std::int64_t x) const noexcept {
    return static_cast<std::size_t>(((n * dims_.c + c) * dims_.h + y) * dims_.w +
                                    x);
  }

  T& operator()(std::int64_t n, std::int64_t c, std::int64_t y,
                std::int64_t x) noexcept {
    return data_[index(n, c, y, x)];
  }
  const T& operator()(std::int64_t n, std::int64_t c, std::int64_t y,
                      std::int64_t x) const noexcept {
    return data_[index(n, c, y, x)];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  friend bool operator==(const Tensor4D&, const Tensor4D&) = default;

 private:
  Dims4 dims_;
  std::vector<T> data_;
};

/// Non-owning row-major view with leading dimension `ld` (>= cols).
template <typename T>
struct MatrixView {
  T* data = nullptr;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::int64_t ld = 0;

  T& operator()(std::int64_t r, std::int64_t c) const noexcept {
    return data[r * ld + c];
  }

  // Rows [r0, r0 + n) and columns [c0, c0 + m) of this view.
  MatrixView block(std::int64_t r0, std::int64_t n, std::int64_t c0,
                   std::int64_t m) const noexcept {
    return {data + r0 * ld + c0, n, m, ld};
  }

  operator MatrixView<const T>() const noexcept {
    return {data, rows, cols, ld};
  }
};

/// Dense row-major matrix (im2col / GEMM workspace).
template <typename T>
class MatrixRM {
 public:
  MatrixRM() = default;
  MatrixRM(std::int64_t rows, std::int64_t cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows * cols), T{}) {}

  std::int64_t rows() const noexcept { return rows_; }
  std::int64_t cols() const noexcept { return cols_; }

  T& operator()(std::int64_t r, std::int64_t c) noexcept {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }
  const T& operator()(std::int64_t r, std::int64_t c) const noexcept {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  MatrixView<T> view() noexcept { return {data_.data(), rows_, cols_, cols_}; }
  MatrixView<const T> view() const noexcept {
    return {data_.data(), rows_, cols_, cols_};
  }

  friend bool operator==(const MatrixRM&, const MatrixRM&) = default;

 private:
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::vector<T> data_;
};

// I.i.d. uniform draws over [-1, 1) from a seeded generator. The same seed
// gives the same buffer within one build.
template <typename T>
void fill_random(std::span<T> values, std::uint64_t seed);
template <typename T>
void fill_random(Tensor4D<T>& t, std::uint64_t seed) {
  fill_random(t.data(), seed);
}

template <typename T>
void fill_constant(std::span<T> values, T v) {
  for (auto& x : values) x = v;
}
template <typename T>
void fill_constant(Tensor4D<T>& t, T v) {
  fill_constant(t.data(), v);
}

inline constexpr double kDefaultRtol = 1e-4;
inline constexpr double kDefaultAtol = 1e-6;

struct Closeness {
  bool pass = true;
  // max_i |a_i - b_i| / (|b_i| + atol / rtol). This is a relative error with
  // an absolute floor, scaled so that pass implies max_rel_err <= rtol. With
  // rtol == 0 the floor is dropped (plain |a - b| / |b|).
  double max_rel_err = 0;
  double max_abs_err = 0;
};

// pass iff |a_i - b_i| <= atol + rtol * |b_i| for every element (NaN fails).
// Throws DimensionMismatch when the shapes differ.
template <typename T>
Closeness allclose(std::span<const T> a, std::span<const T> b,
                   double rtol = kDefaultRtol, double atol = kDefaultAtol);
template <typename T>
Closeness allclose(const Tensor4D<T>& a, const Tensor4D<T>& b,
                   double rtol = kDefaultRtol, double atol = kDefaultAtol) {
  if (!(a.dims() == b.dims())) {
    throw DimensionMismatch("allclose: tensor dims differ");
  }
  return allclose<T>(a.data(), b.data(), rtol, atol);
}

// Mixes a 64-bit seed into a well-distributed stream seed (SplitMix64 step).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

extern template void fill_random<float>(std::span<float>, std::uint64_t);
extern template void fill_random<double>(std::span<double>, std::uint64_t);
extern template Closeness allclose<float>(std::span<const float>,
                                          std::span<const float>, double,
                                          double);
extern template Closeness allclose<double>(std::span<const double>,
                                           std::span<const double>, double,
                                           double);

}  // namespace convbench
