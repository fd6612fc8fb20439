#include "convbench/conv_descriptor.hpp"

#include <cstdio>
#include <string>

#include "convbench/error.hpp"

namespace convbench {
namespace {

constexpr std::int64_t kMaxObservedSpatial = 1024;
constexpr std::int64_t kMaxObservedKernel = 32;
constexpr std::int64_t kMaxObservedChannels = 12288;

std::int64_t out_extent(std::int64_t in, std::int64_t k, std::int64_t stride,
                        std::int64_t pad, std::int64_t dil) {
  const std::int64_t span = in + 2 * pad - dil * (k - 1) - 1;
  // Floor division; span may be negative when the dilated kernel exceeds the
  // padded input.
  if (span < 0) return 0;
  return span / stride + 1;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw InvalidDescriptor("FLOP count overflows 64-bit integer");
  }
  return r;
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidDescriptor(what);
}

}  // namespace

void validate(const ConvDescriptor& d) {
  require(d.batch >= 1, "batch must be >= 1");
  require(d.in_channels >= 1, "in_channels must be >= 1");
  require(d.in_h >= 1 && d.in_w >= 1, "input spatial dims must be >= 1");
  require(d.out_channels >= 1, "out_channels must be >= 1");
  require(d.k_h >= 1 && d.k_w >= 1, "kernel dims must be >= 1");
  require(d.stride_h >= 1 && d.stride_w >= 1, "strides must be >= 1");
  require(d.pad_h >= 0 && d.pad_w >= 0, "padding must be >= 0");
  require(d.dil_h >= 1 && d.dil_w >= 1, "dilation must be >= 1");
  require(d.groups >= 1, "groups must be >= 1");
  require(d.in_channels % d.groups == 0,
          "in_channels must be divisible by groups");
  require(d.out_channels % d.groups == 0,
          "out_channels must be divisible by groups");
  require(out_extent(d.in_h, d.k_h, d.stride_h, d.pad_h, d.dil_h) >= 1,
          "output height < 1");
  require(out_extent(d.in_w, d.k_w, d.stride_w, d.pad_w, d.dil_w) >= 1,
          "output width < 1");
}

OutputShape output_shape(const ConvDescriptor& d) {
  validate(d);
  return {out_extent(d.in_h, d.k_h, d.stride_h, d.pad_h, d.dil_h),
          out_extent(d.in_w, d.k_w, d.stride_w, d.pad_w, d.dil_w)};
}

std::string key_of(const ConvDescriptor& d) {
  auto s = [](std::int64_t v) { return std::to_string(v); };
  std::string key;
  key.reserve(64);
  key += "n" + s(d.batch);
  key += "_c" + s(d.in_channels) + "x" + s(d.in_h) + "x" + s(d.in_w);
  key += "_f" + s(d.out_channels) + "x" + s(d.k_h) + "x" + s(d.k_w);
  key += "_s" + s(d.stride_h) + "x" + s(d.stride_w);
  key += "_p" + s(d.pad_h) + "x" + s(d.pad_w);
  key += "_d" + s(d.dil_h) + "x" + s(d.dil_w);
  key += "_g" + s(d.groups);
  key += d.has_bias ? "_b1" : "_b0";
  return key;
}

ConvDescriptor parse_key(std::string_view key) {
  const std::string buf(key);
  long long v[14] = {};
  int bias = -1;
  int consumed = 0;
  const int n = std::sscanf(
      buf.c_str(),
      "n%lld_c%lldx%lldx%lld_f%lldx%lldx%lld_s%lldx%lld_p%lldx%lld_d%lldx%lld"
      "_g%lld_b%d%n",
      &v[0], &v[1], &v[2], &v[3], &v[4], &v[5], &v[6], &v[7], &v[8], &v[9],
      &v[10], &v[11], &v[12], &v[13], &bias, &consumed);
  if (n != 15 || static_cast<std::size_t>(consumed) != buf.size() ||
      (bias != 0 && bias != 1)) {
    throw InvalidDescriptor("malformed convolution key '" + buf + "'");
  }
  ConvDescriptor d;
  d.batch = v[0];
  d.in_channels = v[1];
  d.in_h = v[2];
  d.in_w = v[3];
  d.out_channels = v[4];
  d.k_h = v[5];
  d.k_w = v[6];
  d.stride_h = v[7];
  d.stride_w = v[8];
  d.pad_h = v[9];
  d.pad_w = v[10];
  d.dil_h = v[11];
  d.dil_w = v[12];
  d.groups = v[13];
  d.has_bias = bias == 1;
  validate(d);
  // sscanf tolerates signs and leading zeros; only the canonical spelling is a
  // key.
  if (key_of(d) != buf) {
    throw InvalidDescriptor("non-canonical convolution key '" + buf + "'");
  }
  return d;
}

ConvFlags classify(const ConvDescriptor& d) {
  ConvFlags f;
  f.pointwise = d.k_h == 1 && d.k_w == 1;
  f.grouped = d.groups > 1;
  f.dilated = d.dil_h > 1 || d.dil_w > 1;
  f.rectangular = d.k_h != d.k_w;
  f.regular = !f.any_irregular();
  return f;
}

std::int64_t flop_count(const ConvDescriptor& d) {
  const OutputShape o = output_shape(d);
  const std::int64_t outputs = checked_mul(
      checked_mul(checked_mul(d.batch, d.out_channels), o.out_h), o.out_w);
  const std::int64_t taps =
      checked_mul(checked_mul(d.in_channels / d.groups, d.k_h), d.k_w);
  std::int64_t flops = checked_mul(checked_mul(2, outputs), taps);
  if (d.has_bias) {
    if (__builtin_add_overflow(flops, outputs, &flops)) {
      throw InvalidDescriptor("FLOP count overflows 64-bit integer");
    }
  }
  return flops;
}

std::vector<std::string> lint(const ConvDescriptor& d) {
  std::vector<std::string> warnings;
  auto check = [&](std::int64_t v, std::int64_t limit, const char* field) {
    if (v > limit) {
      warnings.push_back(std::string(field) + "=" + std::to_string(v) +
                         " exceeds observed bound " + std::to_string(limit));
    }
  };
  check(d.in_h, kMaxObservedSpatial, "in_h");
  check(d.in_w, kMaxObservedSpatial, "in_w");
  check(d.k_h, kMaxObservedKernel, "k_h");
  check(d.k_w, kMaxObservedKernel, "k_w");
  check(d.in_channels, kMaxObservedChannels, "in_channels");
  check(d.out_channels, kMaxObservedChannels, "out_channels");
  return warnings;
}

}  // namespace convbench
