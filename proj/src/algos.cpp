#include "convbench/algos.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "convbench/error.hpp"

namespace convbench {

template <typename T>
ConvInputs<T> allocate_inputs(const ConvDescriptor& desc) {
  validate(desc);
  ConvInputs<T> in;
  in.desc = desc;
  in.input = Tensor4D<T>(desc.batch, desc.in_channels, desc.in_h, desc.in_w);
  in.weights = Tensor4D<T>(desc.out_channels, desc.in_channels / desc.groups,
                           desc.k_h, desc.k_w);
  if (desc.has_bias) in.bias.assign(static_cast<std::size_t>(desc.out_channels), T{});
  return in;
}

template <typename T>
void check_inputs(const ConvInputs<T>& in) {
  const ConvDescriptor& d = in.desc;
  validate(d);
  if (!(in.input.dims() == Dims4{d.batch, d.in_channels, d.in_h, d.in_w})) {
    throw DimensionMismatch("input dims do not match descriptor");
  }
  if (!(in.weights.dims() ==
        Dims4{d.out_channels, d.in_channels / d.groups, d.k_h, d.k_w})) {
    throw DimensionMismatch("weight dims do not match descriptor");
  }
  const std::size_t want_bias =
      d.has_bias ? static_cast<std::size_t>(d.out_channels) : 0;
  if (in.bias.size() != want_bias) {
    throw DimensionMismatch("bias length does not match descriptor");
  }
}

void GemmBlocking::validate() const {
  if (mc < 1 || kc < 1 || nc < 1 || mr < 1 || nr < 1) {
    throw std::invalid_argument("GEMM block sizes must be >= 1");
  }
  if (mc % mr != 0 || nc % nr != 0) {
    throw std::invalid_argument(
        "GEMM blocking requires mc % mr == 0 and nc % nr == 0");
  }
}

// ---------------------------------------------------------------------------
// im2col

template <typename T>
MatrixRM<T> im2col_transform(const ConvInputs<T>& in) {
  check_inputs(in);
  const ConvDescriptor& d = in.desc;
  const OutputShape o = output_shape(d);
  const std::int64_t pixels = o.out_h * o.out_w;
  MatrixRM<T> cols(d.in_channels * d.k_h * d.k_w, d.batch * pixels);

  for (std::int64_t c = 0; c < d.in_channels; ++c) {
    for (std::int64_t ky = 0; ky < d.k_h; ++ky) {
      for (std::int64_t kx = 0; kx < d.k_w; ++kx) {
        const std::int64_t row = (c * d.k_h + ky) * d.k_w + kx;
        for (std::int64_t n = 0; n < d.batch; ++n) {
          T* dst = &cols(row, n * pixels);
          for (std::int64_t oy = 0; oy < o.out_h; ++oy) {
            const std::int64_t iy = oy * d.stride_h + ky * d.dil_h - d.pad_h;
            const bool row_ok = iy >= 0 && iy < d.in_h;
            for (std::int64_t ox = 0; ox < o.out_w; ++ox) {
              const std::int64_t ix = ox * d.stride_w + kx * d.dil_w - d.pad_w;
              *dst++ = (row_ok && ix >= 0 && ix < d.in_w) ? in.input(n, c, iy, ix)
                                                         : T{};
            }
          }
        }
      }
    }
  }
  return cols;
}

// ---------------------------------------------------------------------------
// GEMM

namespace {

// Packs rows [0, rows) x cols [0, depth) of `a` into panels of `mr` rows;
// each panel is depth x mr, column-interleaved. Rows past the edge are zero.
template <typename T>
void pack_a(MatrixView<const T> a, std::int64_t mr, T* dst) {
  for (std::int64_t r0 = 0; r0 < a.rows; r0 += mr) {
    const std::int64_t rb = std::min(mr, a.rows - r0);
    for (std::int64_t p = 0; p < a.cols; ++p) {
      for (std::int64_t i = 0; i < rb; ++i) *dst++ = a(r0 + i, p);
      for (std::int64_t i = rb; i < mr; ++i) *dst++ = T{};
    }
  }
}

// Packs `b` into panels of `nr` columns; each panel is depth x nr.
template <typename T>
void pack_b(MatrixView<const T> b, std::int64_t nr, T* dst) {
  for (std::int64_t c0 = 0; c0 < b.cols; c0 += nr) {
    const std::int64_t cb = std::min(nr, b.cols - c0);
    for (std::int64_t p = 0; p < b.rows; ++p) {
      const T* src = &b(p, c0);
      for (std::int64_t j = 0; j < cb; ++j) *dst++ = src[j];
      for (std::int64_t j = cb; j < nr; ++j) *dst++ = T{};
    }
  }
}

template <typename T, int MR, int NR>
void microkernel_fixed(std::int64_t depth, const T* ap, const T* bp,
                       double* acc, std::int64_t ld) {
  double c[MR][NR];
  for (int i = 0; i < MR; ++i)
    for (int j = 0; j < NR; ++j) c[i][j] = acc[i * ld + j];
  for (std::int64_t p = 0; p < depth; ++p) {
    const T* a = ap + p * MR;
    const T* b = bp + p * NR;
    for (int i = 0; i < MR; ++i) {
      const double ai = a[i];
      for (int j = 0; j < NR; ++j) c[i][j] += ai * static_cast<double>(b[j]);
    }
  }
  for (int i = 0; i < MR; ++i)
    for (int j = 0; j < NR; ++j) acc[i * ld + j] = c[i][j];
}

template <typename T>
void microkernel_generic(std::int64_t depth, std::int64_t mr, std::int64_t nr,
                         const T* ap, const T* bp, double* acc,
                         std::int64_t ld) {
  for (std::int64_t p = 0; p < depth; ++p) {
    const T* a = ap + p * mr;
    const T* b = bp + p * nr;
    for (std::int64_t i = 0; i < mr; ++i) {
      const double ai = a[i];
      double* row = acc + i * ld;
      for (std::int64_t j = 0; j < nr; ++j) row[j] += ai * static_cast<double>(b[j]);
    }
  }
}

}  // namespace

template <typename T>
void gemm(MatrixView<const T> a, MatrixView<const T> b, MatrixView<T> c,
          const GemmBlocking& blk, PhaseLedger& ledger) {
  blk.validate();
  if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols) {
    throw DimensionMismatch(
        "gemm: A is " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
        ", B is " + std::to_string(b.rows) + "x" + std::to_string(b.cols) +
        ", C is " + std::to_string(c.rows) + "x" + std::to_string(c.cols));
  }
  const std::int64_t m = a.rows, n = b.cols, k = a.cols;
  if (m == 0 || n == 0) return;

  const std::int64_t mr = blk.mr, nr = blk.nr;
  std::vector<T> a_pack(static_cast<std::size_t>(blk.mc * blk.kc));
  std::vector<T> b_pack(static_cast<std::size_t>(blk.kc * blk.nc));
  std::vector<double> acc(static_cast<std::size_t>(blk.mc * blk.nc));

  for (std::int64_t jc = 0; jc < n; jc += blk.nc) {
    ledger.start(Phase::kInTiling);
    const std::int64_t nb = std::min(blk.nc, n - jc);
    const std::int64_t nb_pad = (nb + nr - 1) / nr * nr;
    ledger.update(Phase::kInTiling);

    for (std::int64_t ic = 0; ic < m; ic += blk.mc) {
      ledger.start(Phase::kInTiling);
      const std::int64_t mb = std::min(blk.mc, m - ic);
      const std::int64_t mb_pad = (mb + mr - 1) / mr * mr;
      std::fill_n(acc.begin(), mb_pad * nb_pad, 0.0);
      ledger.update(Phase::kInTiling);

      for (std::int64_t pc = 0; pc < k; pc += blk.kc) {
        ledger.start(Phase::kInTiling);
        const std::int64_t kb = std::min(blk.kc, k - pc);
        ledger.update(Phase::kInTiling);

        ledger.start(Phase::kInPacking);
        pack_a(a.block(ic, mb, pc, kb), mr, a_pack.data());
        pack_b(b.block(pc, kb, jc, nb), nr, b_pack.data());
        ledger.update(Phase::kInPacking);

        for (std::int64_t jr = 0; jr < nb; jr += nr) {
          const T* bp = b_pack.data() + (jr / nr) * kb * nr;
          for (std::int64_t ir = 0; ir < mb; ir += mr) {
            const T* ap = a_pack.data() + (ir / mr) * kb * mr;
            double* tile = acc.data() + ir * nb_pad + jr;
            ledger.start(Phase::kInMicrokernel);
            if (mr == 8 && nr == 8) {
              microkernel_fixed<T, 8, 8>(kb, ap, bp, tile, nb_pad);
            } else {
              microkernel_generic(kb, mr, nr, ap, bp, tile, nb_pad);
            }
            ledger.update(Phase::kInMicrokernel);
          }
        }
      }

      ledger.start(Phase::kInUnpacking);
      for (std::int64_t i = 0; i < mb; ++i) {
        T* dst = &c(ic + i, jc);
        const double* src = acc.data() + i * nb_pad;
        for (std::int64_t j = 0; j < nb; ++j) {
          dst[j] = static_cast<T>(static_cast<double>(dst[j]) + src[j]);
        }
      }
      ledger.update(Phase::kInUnpacking);
    }
  }
}

// ---------------------------------------------------------------------------
// Convolutions

template <typename T>
Tensor4D<T> conv_baseline_im2col_gemm(const ConvInputs<T>& in,
                                      PhaseLedger& ledger,
                                      const GemmBlocking& blocking) {
  check_inputs(in);
  blocking.validate();
  const ConvDescriptor& d = in.desc;
  const OutputShape o = output_shape(d);
  const std::int64_t pixels = o.out_h * o.out_w;
  const std::int64_t f_per_group = d.out_channels / d.groups;
  const std::int64_t k_per_group = d.in_channels / d.groups * d.k_h * d.k_w;

  Tensor4D<T> out(d.batch, d.out_channels, o.out_h, o.out_w);
  if (d.has_bias) {
    for (std::int64_t n = 0; n < d.batch; ++n)
      for (std::int64_t f = 0; f < d.out_channels; ++f)
        std::fill_n(&out(n, f, 0, 0), pixels, in.bias[static_cast<std::size_t>(f)]);
  }

  ledger.start(Phase::kPreReorder);
  const MatrixRM<T> cols = im2col_transform(in);
  ledger.update(Phase::kPreReorder);

  const T* w = in.weights.data().data();
  T* y = out.data().data();
  for (std::int64_t n = 0; n < d.batch; ++n) {
    for (std::int64_t g = 0; g < d.groups; ++g) {
      MatrixView<const T> a{w + g * f_per_group * k_per_group, f_per_group,
                            k_per_group, k_per_group};
      MatrixView<const T> b =
          MatrixView<const T>(cols.view()).block(g * k_per_group, k_per_group,
                                                 n * pixels, pixels);
      MatrixView<T> c{y + (n * d.out_channels + g * f_per_group) * pixels,
                      f_per_group, pixels, pixels};
      gemm<T>(a, b, c, blocking, ledger);
    }
  }
  return out;
}

template <typename T>
Tensor4D<T> conv_direct_naive(const ConvInputs<T>& in) {
  check_inputs(in);
  const ConvDescriptor& d = in.desc;
  const OutputShape o = output_shape(d);
  const std::int64_t c_per_group = d.in_channels / d.groups;
  const std::int64_t f_per_group = d.out_channels / d.groups;

  Tensor4D<T> out(d.batch, d.out_channels, o.out_h, o.out_w);
  for (std::int64_t n = 0; n < d.batch; ++n) {
    for (std::int64_t f = 0; f < d.out_channels; ++f) {
      const std::int64_t c_base = (f / f_per_group) * c_per_group;
      const double bias =
          d.has_bias ? static_cast<double>(in.bias[static_cast<std::size_t>(f)]) : 0.0;
      for (std::int64_t oy = 0; oy < o.out_h; ++oy) {
        for (std::int64_t ox = 0; ox < o.out_w; ++ox) {
          double acc = bias;
          for (std::int64_t c = 0; c < c_per_group; ++c) {
            for (std::int64_t ky = 0; ky < d.k_h; ++ky) {
              const std::int64_t iy = oy * d.stride_h + ky * d.dil_h - d.pad_h;
              if (iy < 0 || iy >= d.in_h) continue;
              for (std::int64_t kx = 0; kx < d.k_w; ++kx) {
                const std::int64_t ix = ox * d.stride_w + kx * d.dil_w - d.pad_w;
                if (ix < 0 || ix >= d.in_w) continue;
                acc += static_cast<double>(in.input(n, c_base + c, iy, ix)) *
                       static_cast<double>(in.weights(f, c, ky, kx));
              }
            }
          }
          out(n, f, oy, ox) = static_cast<T>(acc);
        }
      }
    }
  }
  return out;
}

bool blocked_direct_supports(const ConvDescriptor& desc) noexcept {
  return desc.groups == 1 && desc.dil_h == 1 && desc.dil_w == 1;
}

template <typename T>
DirectTiling select_direct_tiling(const ConvDescriptor& d,
                                  const CacheParams& cache) {
  validate(d);
  if (!blocked_direct_supports(d)) {
    throw UnsupportedDescriptor(
        "blocked direct convolution requires groups == 1 and dilation 1 (" +
        key_of(d) + ")");
  }
  const OutputShape o = output_shape(d);
  const std::int64_t budget = std::max<std::int64_t>(cache.l2_bytes / 2, 1);

  auto footprint = [&](std::int64_t th, std::int64_t tw) {
    const std::int64_t win_h = (th - 1) * d.stride_h + d.k_h;
    const std::int64_t win_w = (tw - 1) * d.stride_w + d.k_w;
    return d.in_channels * win_h * win_w * static_cast<std::int64_t>(sizeof(T)) +
           d.out_channels * th * tw * static_cast<std::int64_t>(sizeof(double));
  };

  DirectTiling t;
  t.tile_w = std::min<std::int64_t>(o.out_w, 64);
  t.tile_h = o.out_h;
  while (t.tile_h > 1 && footprint(t.tile_h, t.tile_w) > budget) {
    t.tile_h = (t.tile_h + 1) / 2;
  }
  while (t.tile_w > 1 && footprint(t.tile_h, t.tile_w) > budget) {
    t.tile_w = (t.tile_w + 1) / 2;
  }
  // Keep one output row of f_block accumulators within L1.
  t.f_block = 4;
  while (t.f_block > 1 &&
         t.f_block * t.tile_w * static_cast<std::int64_t>(sizeof(double)) >
             cache.l1_bytes / 2) {
    t.f_block /= 2;
  }
  const std::int64_t tiles_h = (o.out_h + t.tile_h - 1) / t.tile_h;
  const std::int64_t tiles_w = (o.out_w + t.tile_w - 1) / t.tile_w;
  t.tiles = d.batch * tiles_h * tiles_w;
  return t;
}

template <typename T>
Tensor4D<T> conv_main_blocked_direct(const ConvInputs<T>& in,
                                     PhaseLedger& ledger,
                                     const CacheParams& cache) {
  check_inputs(in);
  const ConvDescriptor& d = in.desc;
  if (!blocked_direct_supports(d)) {
    throw UnsupportedDescriptor(
        "blocked direct convolution requires groups == 1 and dilation 1 (" +
        key_of(d) + ")");
  }
  const OutputShape o = output_shape(d);

  ledger.start(Phase::kPreAnalysis);
  const DirectTiling tiling = select_direct_tiling<T>(d, cache);
  ledger.update(Phase::kPreAnalysis);

  const std::int64_t C = d.in_channels, F = d.out_channels;
  const std::int64_t sh = d.stride_h, sw = d.stride_w;
  const std::int64_t max_win_h = (tiling.tile_h - 1) * sh + d.k_h;
  const std::int64_t max_win_w = (tiling.tile_w - 1) * sw + d.k_w;
  std::vector<T> window(static_cast<std::size_t>(C * max_win_h * max_win_w));
  std::vector<double> acc(
      static_cast<std::size_t>(F * tiling.tile_h * tiling.tile_w));

  Tensor4D<T> out(d.batch, F, o.out_h, o.out_w);
  const T* weights = in.weights.data().data();
  const std::int64_t taps = C * d.k_h * d.k_w;

  for (std::int64_t n = 0; n < d.batch; ++n) {
    for (std::int64_t ty = 0; ty < o.out_h; ty += tiling.tile_h) {
      for (std::int64_t tx = 0; tx < o.out_w; tx += tiling.tile_w) {
        ledger.start(Phase::kInTiling);
        const std::int64_t th = std::min(tiling.tile_h, o.out_h - ty);
        const std::int64_t tw = std::min(tiling.tile_w, o.out_w - tx);
        const std::int64_t win_h = (th - 1) * sh + d.k_h;
        const std::int64_t win_w = (tw - 1) * sw + d.k_w;
        const std::int64_t iy0 = ty * sh - d.pad_h;
        const std::int64_t ix0 = tx * sw - d.pad_w;
        const std::int64_t plane = th * tw;
        std::fill_n(acc.begin(), F * plane, 0.0);
        ledger.update(Phase::kInTiling);

        ledger.start(Phase::kInPacking);
        T* dst = window.data();
        for (std::int64_t c = 0; c < C; ++c) {
          for (std::int64_t wy = 0; wy < win_h; ++wy) {
            const std::int64_t iy = iy0 + wy;
            if (iy < 0 || iy >= d.in_h) {
              std::fill_n(dst, win_w, T{});
              dst += win_w;
              continue;
            }
            const T* src = &in.input(n, c, iy, 0);
            for (std::int64_t wx = 0; wx < win_w; ++wx) {
              const std::int64_t ix = ix0 + wx;
              *dst++ = (ix >= 0 && ix < d.in_w) ? src[ix] : T{};
            }
          }
        }
        ledger.update(Phase::kInPacking);

        for (std::int64_t f0 = 0; f0 < F; f0 += tiling.f_block) {
          const std::int64_t fb = std::min(tiling.f_block, F - f0);
          ledger.start(Phase::kInMicrokernel);
          for (std::int64_t f = 0; f < fb; ++f) {
            double* a = acc.data() + (f0 + f) * plane;
            const T* wf = weights + (f0 + f) * taps;
            for (std::int64_t c = 0; c < C; ++c) {
              const T* wc = window.data() + c * win_h * win_w;
              for (std::int64_t ky = 0; ky < d.k_h; ++ky) {
                for (std::int64_t kx = 0; kx < d.k_w; ++kx) {
                  const double wv =
                      static_cast<double>(wf[(c * d.k_h + ky) * d.k_w + kx]);
                  for (std::int64_t y = 0; y < th; ++y) {
                    const T* row = wc + (y * sh + ky) * win_w + kx;
                    double* arow = a + y * tw;
                    for (std::int64_t x = 0; x < tw; ++x) {
                      arow[x] += wv * static_cast<double>(row[x * sw]);
                    }
                  }
                }
              }
            }
          }
          ledger.update(Phase::kInMicrokernel);
        }

        ledger.start(Phase::kInUnpacking);
        for (std::int64_t f = 0; f < F; ++f) {
          const double bias =
              d.has_bias ? static_cast<double>(in.bias[static_cast<std::size_t>(f)])
                         : 0.0;
          const double* a = acc.data() + f * plane;
          for (std::int64_t y = 0; y < th; ++y) {
            T* dst_row = &out(n, f, ty + y, tx);
            for (std::int64_t x = 0; x < tw; ++x) {
              dst_row[x] = static_cast<T>(bias + a[y * tw + x]);
            }
          }
        }
        ledger.update(Phase::kInUnpacking);
      }
    }
  }
  return out;
}

#define CONVBENCH_ALGOS_INSTANTIATE(T)                                        \
  template ConvInputs<T> allocate_inputs<T>(const ConvDescriptor&);           \
  template void check_inputs<T>(const ConvInputs<T>&);                        \
  template MatrixRM<T> im2col_transform<T>(const ConvInputs<T>&);             \
  template void gemm<T>(MatrixView<const T>, MatrixView<const T>,             \
                        MatrixView<T>, const GemmBlocking&, PhaseLedger&);    \
  template Tensor4D<T> conv_baseline_im2col_gemm<T>(                          \
      const ConvInputs<T>&, PhaseLedger&, const GemmBlocking&);               \
  template Tensor4D<T> conv_direct_naive<T>(const ConvInputs<T>&);            \
  template DirectTiling select_direct_tiling<T>(const ConvDescriptor&,        \
                                                const CacheParams&);          \
  template Tensor4D<T> conv_main_blocked_direct<T>(                           \
      const ConvInputs<T>&, PhaseLedger&, const CacheParams&);

CONVBENCH_ALGOS_INSTANTIATE(float)
CONVBENCH_ALGOS_INSTANTIATE(double)

}  // namespace convbench
