#include "convbench/convset.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "convbench/csv.hpp"
#include "convbench/error.hpp"

namespace convbench {

bool ConvSet::insert_unique(const ConvDescriptor& desc) {
  validate(desc);
  auto key = key_of(desc);
  if (index_.contains(key)) return false;
  index_.emplace(std::move(key), entries_.size());
  entries_.push_back(desc);
  return true;
}

std::optional<std::size_t> ConvSet::position(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ConvClass> parse_conv_class(std::string_view name) {
  if (name == "pointwise") return ConvClass::kPointwise;
  if (name == "grouped") return ConvClass::kGrouped;
  if (name == "dilated") return ConvClass::kDilated;
  if (name == "rectangular") return ConvClass::kRectangular;
  if (name == "regular") return ConvClass::kRegular;
  return std::nullopt;
}

namespace {

std::uint8_t class_mask(const ConvFlags& f) {
  std::uint8_t m = 0;
  if (f.pointwise) m |= static_cast<std::uint8_t>(ConvClass::kPointwise);
  if (f.grouped) m |= static_cast<std::uint8_t>(ConvClass::kGrouped);
  if (f.dilated) m |= static_cast<std::uint8_t>(ConvClass::kDilated);
  if (f.rectangular) m |= static_cast<std::uint8_t>(ConvClass::kRectangular);
  if (f.regular) m |= static_cast<std::uint8_t>(ConvClass::kRegular);
  return m;
}

}  // namespace

bool matches(const ConvDescriptor& desc, const FilterSpec& spec) {
  if (spec.classes != 0 && (class_mask(classify(desc)) & spec.classes) == 0) {
    return false;
  }
  if (spec.exclude_padded && (desc.pad_h != 0 || desc.pad_w != 0)) return false;
  if (spec.unit_stride_only && (desc.stride_h != 1 || desc.stride_w != 1)) {
    return false;
  }
  if (spec.min_flops || spec.max_flops) {
    const std::int64_t flops = flop_count(desc);
    if (spec.min_flops && flops < *spec.min_flops) return false;
    if (spec.max_flops && flops > *spec.max_flops) return false;
  }
  return true;
}

ConvSet apply_filter(const ConvSet& set, const FilterSpec& spec) {
  ConvSet out;
  for (const auto& d : set) {
    if (matches(d, spec)) out.insert_unique(d);
  }
  return out;
}

namespace {

constexpr std::array<const char*, 15> kFieldColumns = {
    "batch",    "in_channels", "in_h",  "in_w",  "out_channels",
    "k_h",      "k_w",         "stride_h", "stride_w", "pad_h",
    "pad_w",    "dil_h",       "dil_w", "groups", "has_bias"};

std::int64_t* field_slot(ConvDescriptor& d, std::size_t i) {
  std::int64_t* slots[] = {&d.batch,    &d.in_channels, &d.in_h,   &d.in_w,
                           &d.out_channels, &d.k_h,     &d.k_w,    &d.stride_h,
                           &d.stride_w, &d.pad_h,       &d.pad_w,  &d.dil_h,
                           &d.dil_w,    &d.groups};
  return slots[i];
}

}  // namespace

CsvLoad read_convset_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  const auto cols = csv::index_columns(
      table.header, std::vector<std::string>(kFieldColumns.begin(),
                                             kFieldColumns.end()));
  auto optional_col = [&](const char* name) -> std::optional<std::size_t> {
    auto it = cols.find(name);
    if (it == cols.end()) return std::nullopt;
    return it->second;
  };
  const auto key_col = optional_col("key");
  const auto out_h_col = optional_col("out_h");
  const auto out_w_col = optional_col("out_w");
  const auto flops_col = optional_col("flops");

  CsvLoad result;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const std::size_t row = r + 1;
    auto int_cell = [&](std::size_t col, const char* name) {
      auto v = csv::parse_int(cells[col]);
      if (!v || *v < 0) {
        throw ParseError(row, std::string("column '") + name +
                                  "' is not a non-negative integer: '" +
                                  cells[col] + "'");
      }
      return *v;
    };

    ConvDescriptor d;
    for (std::size_t i = 0; i + 1 < kFieldColumns.size(); ++i) {
      *field_slot(d, i) = int_cell(cols.at(kFieldColumns[i]), kFieldColumns[i]);
    }
    const std::int64_t bias = int_cell(cols.at("has_bias"), "has_bias");
    if (bias > 1) throw ParseError(row, "has_bias must be 0 or 1");
    d.has_bias = bias == 1;

    OutputShape shape;
    std::int64_t flops = 0;
    try {
      shape = output_shape(d);
      flops = flop_count(d);
    } catch (const InvalidDescriptor& e) {
      throw ParseError(row, e.what());
    }
    if (key_col && cells[*key_col] != key_of(d)) {
      throw ParseError(row, "key '" + cells[*key_col] +
                                "' does not match fields (expected '" +
                                key_of(d) + "')");
    }
    if (out_h_col && int_cell(*out_h_col, "out_h") != shape.out_h) {
      throw ParseError(row, "out_h does not match recomputed value " +
                                std::to_string(shape.out_h));
    }
    if (out_w_col && int_cell(*out_w_col, "out_w") != shape.out_w) {
      throw ParseError(row, "out_w does not match recomputed value " +
                                std::to_string(shape.out_w));
    }
    if (flops_col && int_cell(*flops_col, "flops") != flops) {
      throw ParseError(row, "flops does not match recomputed value " +
                                std::to_string(flops));
    }

    ++result.rows;
    if (!result.set.insert_unique(d)) ++result.duplicates;
  }
  return result;
}

ConvSet load_csv(const std::filesystem::path& path) {
  return read_convset_csv(path).set;
}

std::string to_csv(const ConvSet& set) {
  std::ostringstream out;
  out << kConvSetHeader << '\n';
  for (const auto& d : set) {
    const OutputShape o = output_shape(d);
    out << key_of(d) << ',' << d.batch << ',' << d.in_channels << ','
        << d.in_h << ',' << d.in_w << ',' << d.out_channels << ',' << d.k_h
        << ',' << d.k_w << ',' << d.stride_h << ',' << d.stride_w << ','
        << d.pad_h << ',' << d.pad_w << ',' << d.dil_h << ',' << d.dil_w << ','
        << d.groups << ',' << (d.has_bias ? 1 : 0) << ',' << o.out_h << ','
        << o.out_w << ',' << flop_count(d) << '\n';
  }
  return out.str();
}

void save_csv(const ConvSet& set, const std::filesystem::path& path) {
  csv::write(path, to_csv(set));
}

ConvSetStats stats(const ConvSet& set) {
  ConvSetStats s;
  bool first = true;
  auto widen = [&](Range& r, std::int64_t v) {
    if (first) {
      r = {v, v};
    } else {
      r.min = std::min(r.min, v);
      r.max = std::max(r.max, v);
    }
  };
  for (const auto& d : set) {
    const ConvFlags f = classify(d);
    const OutputShape o = output_shape(d);
    ++s.total;
    s.pointwise += f.pointwise;
    s.grouped += f.grouped;
    s.dilated += f.dilated;
    s.rectangular += f.rectangular;
    s.regular += f.regular;
    s.irregular += f.any_irregular();
    s.padded += (d.pad_h != 0 || d.pad_w != 0);
    widen(s.in_h, d.in_h);
    widen(s.in_w, d.in_w);
    widen(s.out_h, o.out_h);
    widen(s.out_w, o.out_w);
    widen(s.k_h, d.k_h);
    widen(s.k_w, d.k_w);
    widen(s.in_channels, d.in_channels);
    widen(s.out_channels, d.out_channels);
    widen(s.flops, flop_count(d));
    first = false;
  }
  return s;
}

std::string format_stats(const ConvSetStats& s) {
  std::ostringstream out;
  auto range = [&](const char* name, const Range& r) {
    out << name << ": " << r.min << ".." << r.max << '\n';
  };
  out << "total: " << s.total << '\n'
      << "pointwise: " << s.pointwise << '\n'
      << "non_pointwise: " << (s.total - s.pointwise) << '\n'
      << "grouped: " << s.grouped << '\n'
      << "dilated: " << s.dilated << '\n'
      << "rectangular: " << s.rectangular << '\n'
      << "regular: " << s.regular << '\n'
      << "padded: " << s.padded << '\n';
  range("in_h", s.in_h);
  range("in_w", s.in_w);
  range("out_h", s.out_h);
  range("out_w", s.out_w);
  range("k_h", s.k_h);
  range("k_w", s.k_w);
  range("in_channels", s.in_channels);
  range("out_channels", s.out_channels);
  range("flops", s.flops);
  return out.str();
}

}  // namespace convbench
