#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "convbench/conv_descriptor.hpp"

namespace convbench {

// Exact convSet CSV header.
inline constexpr const char* kConvSetHeader =
    "key,batch,in_channels,in_h,in_w,out_channels,k_h,k_w,stride_h,stride_w,"
    "pad_h,pad_w,dil_h,dil_w,groups,has_bias,out_h,out_w,flops";

/**
 * Deduplicated, insertion-ordered collection of convolution descriptors.
 *
 * Positions are stable: the i-th inserted unique descriptor stays at index i,
 * which is what the breakdown report uses as its x-axis.
 */
class ConvSet {
 public:
  ConvSet() = default;

  // Appends `desc` unless a descriptor with the same key is already present.
  // Returns whether it was appended. Throws InvalidDescriptor.
  bool insert_unique(const ConvDescriptor& desc);

  bool contains(const std::string& key) const { return index_.contains(key); }
  std::optional<std::size_t> position(const std::string& key) const;

  const std::vector<ConvDescriptor>& entries() const noexcept {
    return entries_;
  }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const ConvDescriptor& operator[](std::size_t i) const { return entries_[i]; }

  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  friend bool operator==(const ConvSet& a, const ConvSet& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<ConvDescriptor> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class ConvClass : std::uint8_t {
  kPointwise = 1u << 0,
  kGrouped = 1u << 1,
  kDilated = 1u << 2,
  kRectangular = 1u << 3,
  kRegular = 1u << 4,
};

// Parses "pointwise", "grouped", "dilated", "rectangular" or "regular".
std::optional<ConvClass> parse_conv_class(std::string_view name);

struct FilterSpec {
  // Bitwise OR of ConvClass values; 0 means every class.
  std::uint8_t classes = 0;
  bool exclude_padded = false;
  // Keep only stride_h == stride_w == 1.
  bool unit_stride_only = false;
  std::optional<std::int64_t> min_flops;
  std::optional<std::int64_t> max_flops;

  FilterSpec& with(ConvClass c) {
    classes |= static_cast<std::uint8_t>(c);
    return *this;
  }
};

bool matches(const ConvDescriptor& desc, const FilterSpec& spec);

// Order-preserving subset of `set` whose entries satisfy `spec`.
ConvSet apply_filter(const ConvSet& set, const FilterSpec& spec);

struct CsvLoad {
  ConvSet set;
  std::size_t rows = 0;        // data rows read
  std::size_t duplicates = 0;  // rows dropped by key deduplication
};

// Reads a convSet CSV. Columns are matched by name; the derived columns
// (key, out_h, out_w, flops) may be absent, but when present they must agree
// with the values recomputed from the row. Throws IoError, SchemaError, or
// ParseError (with the 1-based data row).
CsvLoad read_convset_csv(const std::filesystem::path& path);
ConvSet load_csv(const std::filesystem::path& path);

std::string to_csv(const ConvSet& set);
void save_csv(const ConvSet& set, const std::filesystem::path& path);

struct Range {
  std::int64_t min = 0;
  std::int64_t max = 0;
};

struct ConvSetStats {
  std::size_t total = 0;
  std::size_t pointwise = 0;
  std::size_t grouped = 0;
  std::size_t dilated = 0;
  std::size_t rectangular = 0;
  std::size_t regular = 0;
  // Entries with at least one of pointwise/grouped/dilated/rectangular.
  std::size_t irregular = 0;
  std::size_t padded = 0;
  Range in_h, in_w, out_h, out_w, k_h, k_w, in_channels, out_channels, flops;
};

ConvSetStats stats(const ConvSet& set);

std::string format_stats(const ConvSetStats& s);

}  // namespace convbench
