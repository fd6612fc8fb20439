#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace convbench {

/**
 * Complete shape/parameter record of one 2D convolution.
 *
 * Input is (batch, in_channels, in_h, in_w) in NCHW, weights are
 * (out_channels, in_channels / groups, k_h, k_w). Padding is symmetric per
 * axis. A descriptor is plain data; call validate() before trusting it.
 */
struct ConvDescriptor {
  std::int64_t batch = 1;
  std::int64_t in_channels = 1;
  std::int64_t in_h = 1;
  std::int64_t in_w = 1;
  std::int64_t out_channels = 1;
  std::int64_t k_h = 1;
  std::int64_t k_w = 1;
  std::int64_t stride_h = 1;
  std::int64_t stride_w = 1;
  std::int64_t pad_h = 0;
  std::int64_t pad_w = 0;
  std::int64_t dil_h = 1;
  std::int64_t dil_w = 1;
  std::int64_t groups = 1;
  bool has_bias = false;

  friend bool operator==(const ConvDescriptor&, const ConvDescriptor&) = default;
};

struct OutputShape {
  std::int64_t out_h = 0;
  std::int64_t out_w = 0;

  friend bool operator==(const OutputShape&, const OutputShape&) = default;
};

struct ConvFlags {
  bool pointwise = false;
  bool grouped = false;
  bool dilated = false;
  bool rectangular = false;
  bool regular = false;

  bool any_irregular() const noexcept {
    return pointwise || grouped || dilated || rectangular;
  }

  friend bool operator==(const ConvFlags&, const ConvFlags&) = default;
};

// Throws InvalidDescriptor if any field invariant fails or the output would be
// empty.
void validate(const ConvDescriptor& desc);

// Floor-semantics output spatial size. Throws InvalidDescriptor when either
// dimension would be < 1.
OutputShape output_shape(const ConvDescriptor& desc);

// Canonical identifying key, e.g.
// n1_c3x224x224_f64x7x7_s2x2_p3x3_d1x1_g1_b1
std::string key_of(const ConvDescriptor& desc);

// Inverse of key_of. Throws InvalidDescriptor on malformed keys or keys that
// describe an invalid convolution.
ConvDescriptor parse_key(std::string_view key);

ConvFlags classify(const ConvDescriptor& desc);

// Multiply-accumulate counts as 2 FLOPs; bias adds one per output element.
std::int64_t flop_count(const ConvDescriptor& desc);

// Soft bounds observed on real-world convolution sets (spatial <= 1024,
// kernel <= 32, channels <= 12288). Returns human-readable warnings; never
// throws for out-of-range values.
std::vector<std::string> lint(const ConvDescriptor& desc);

}  // namespace convbench
