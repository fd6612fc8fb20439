#pragma once

#include <cstdint>
#include <vector>

#include "convbench/conv_descriptor.hpp"
#include "convbench/tensor.hpp"
#include "convbench/timing.hpp"

namespace convbench {

/// Operands of one convolution. Weights are (F, C / groups, k_h, k_w); bias
/// holds F entries when desc.has_bias and is empty otherwise.
template <typename T>
struct ConvInputs {
  ConvDescriptor desc;
  Tensor4D<T> input;
  Tensor4D<T> weights;
  std::vector<T> bias;
};

// Zero-filled operands shaped for `desc`. Throws InvalidDescriptor.
template <typename T>
ConvInputs<T> allocate_inputs(const ConvDescriptor& desc);

// Throws InvalidDescriptor / DimensionMismatch when the buffers do not match
// the descriptor.
template <typename T>
void check_inputs(const ConvInputs<T>& in);

// BLIS-style blocking. mc x kc blocks of A and kc x nc blocks of B are packed
// into mr-row / nr-column panels; the microkernel computes one mr x nr tile.
struct GemmBlocking {
  std::int64_t mc = 128;
  std::int64_t kc = 256;
  std::int64_t nc = 512;
  std::int64_t mr = 8;
  std::int64_t nr = 8;

  // Throws std::invalid_argument unless all sizes are >= 1, mc % mr == 0 and
  // nc % nr == 0.
  void validate() const;
};

struct CacheParams {
  std::int64_t l1_bytes = 32 * 1024;
  std::int64_t l2_bytes = 1024 * 1024;
};

// Unrolls input patches into a (C * k_h * k_w) x (n * out_h * out_w) matrix.
// Rows are ordered (channel, ky, kx) with channels in global order, so group
// g owns the contiguous row block [g * Kg, (g + 1) * Kg), Kg = C/g * k_h * k_w.
// Out-of-bounds taps are zero.
template <typename T>
MatrixRM<T> im2col_transform(const ConvInputs<T>& in);

/// C += A * B using packed panels and a register-tiled microkernel.
///
/// Products are accumulated in double across the whole K extent for each
/// mc x nc block of C and then added to C, which the caller pre-initializes
/// (zeros or bias). Panel packing is timed as InPacking, each micro-tile
/// multiply as InMicrokernel, block-extent bookkeeping as InTiling and the
/// write-back of the block accumulator into C as InUnpacking.
///
/// Throws DimensionMismatch unless A is m x k, B is k x n and C is m x n.
template <typename T>
void gemm(MatrixView<const T> a, MatrixView<const T> b, MatrixView<T> c,
          const GemmBlocking& blocking, PhaseLedger& ledger);

template <typename T>
void gemm(const MatrixRM<T>& a, const MatrixRM<T>& b, MatrixRM<T>& c,
          const GemmBlocking& blocking, PhaseLedger& ledger) {
  gemm<T>(a.view(), b.view(), c.view(), blocking, ledger);
}

// Im2col-GEMM. The im2col transform is the single PreReorder call; weights
// are used in place as an F x Kg matrix per group; bias seeds the output.
template <typename T>
Tensor4D<T> conv_baseline_im2col_gemm(const ConvInputs<T>& in,
                                      PhaseLedger& ledger,
                                      const GemmBlocking& blocking = {});

// Uninstrumented seven-loop reference over the full descriptor space.
// Accumulates in double.
template <typename T>
Tensor4D<T> conv_direct_naive(const ConvInputs<T>& in);

// Tile geometry chosen by the blocked direct convolution's analysis step.
struct DirectTiling {
  std::int64_t tile_h = 1;  // output rows per tile
  std::int64_t tile_w = 1;  // output columns per tile
  std::int64_t f_block = 4;  // output channels per microkernel call
  std::int64_t tiles = 0;   // total tiles over batch x height x width
};

bool blocked_direct_supports(const ConvDescriptor& desc) noexcept;

// Largest output tile whose packed input window plus accumulators fit in half
// of L2. Throws UnsupportedDescriptor for grouped or dilated descriptors.
template <typename T>
DirectTiling select_direct_tiling(const ConvDescriptor& desc,
                                  const CacheParams& cache = {});

/// Tiled direct convolution exercising every in-convolution phase.
///
/// PreAnalysis: one tiling selection. Per output tile: InTiling computes the
/// tile extent, InPacking copies the zero-padded input window for all input
/// channels into a contiguous buffer, InMicrokernel accumulates f_block output
/// channels at a time, InUnpacking writes bias + accumulators back to NCHW.
/// Requires groups == 1 and unit dilation (UnsupportedDescriptor otherwise).
template <typename T>
Tensor4D<T> conv_main_blocked_direct(const ConvInputs<T>& in,
                                     PhaseLedger& ledger,
                                     const CacheParams& cache = {});

#define CONVBENCH_ALGOS_EXTERN(T)                                            \
  extern template ConvInputs<T> allocate_inputs<T>(const ConvDescriptor&);   \
  extern template void check_inputs<T>(const ConvInputs<T>&);                \
  extern template MatrixRM<T> im2col_transform<T>(const ConvInputs<T>&);     \
  extern template void gemm<T>(MatrixView<const T>, MatrixView<const T>,     \
                               MatrixView<T>, const GemmBlocking&,           \
                               PhaseLedger&);                                \
  extern template Tensor4D<T> conv_baseline_im2col_gemm<T>(                  \
      const ConvInputs<T>&, PhaseLedger&, const GemmBlocking&);              \
  extern template Tensor4D<T> conv_direct_naive<T>(const ConvInputs<T>&);    \
  extern template DirectTiling select_direct_tiling<T>(const ConvDescriptor&, \
                                                       const CacheParams&);  \
  extern template Tensor4D<T> conv_main_blocked_direct<T>(                   \
      const ConvInputs<T>&, PhaseLedger&, const CacheParams&);

CONVBENCH_ALGOS_EXTERN(float)
CONVBENCH_ALGOS_EXTERN(double)
#undef CONVBENCH_ALGOS_EXTERN

}  // namespace convbench
