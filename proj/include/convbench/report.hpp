#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convbench/harness.hpp"
#include "convbench/timing.hpp"

namespace convbench {

// Exact results CSV header.
inline constexpr const char* kResultsHeader =
    "key,mode,status,runs,warmups,"
    "pre_analysis_ns_mean,pre_analysis_ns_min,pre_analysis_calls,"
    "pre_reorder_ns_mean,pre_reorder_ns_min,pre_reorder_calls,"
    "in_tiling_ns_mean,in_tiling_ns_min,in_tiling_calls,"
    "in_packing_ns_mean,in_packing_ns_min,in_packing_calls,"
    "in_microkernel_ns_mean,in_microkernel_ns_min,in_microkernel_calls,"
    "in_unpacking_ns_mean,in_unpacking_ns_min,in_unpacking_calls,"
    "post_reorder_ns_mean,post_reorder_ns_min,post_reorder_calls,"
    "operation_ns_mean,operation_ns_min,convolution_ns_mean,"
    "convolution_ns_min,correctness_max_rel_err";

struct PhaseCells {
  std::optional<double> ns_mean;
  std::optional<std::int64_t> ns_min;
  std::optional<std::int64_t> calls;

  friend bool operator==(const PhaseCells&, const PhaseCells&) = default;
};

// One line of the results CSV. Timing cells are empty for skipped, failed
// and correctness-mode rows.
struct ResultRow {
  std::string key;
  RunMode mode = RunMode::kMain;
  RunStatus status = RunStatus::kOk;
  std::int64_t runs = 0;
  std::int64_t warmups = 0;
  std::array<PhaseCells, kPhaseCount> phases{};
  std::optional<double> operation_ns_mean;
  std::optional<std::int64_t> operation_ns_min;
  std::optional<double> convolution_ns_mean;
  std::optional<std::int64_t> convolution_ns_min;
  std::optional<double> correctness_max_rel_err;

  bool has_timings() const noexcept {
    return operation_ns_mean.has_value() && convolution_ns_mean.has_value();
  }
  const PhaseCells& operator[](Phase p) const { return phases[index_of(p)]; }

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

ResultRow to_result_row(const RunOutcome& outcome);

std::string results_to_csv(std::span<const ResultRow> rows);
void write_results_csv(std::span<const ResultRow> rows,
                       const std::filesystem::path& path);
void write_results_csv(std::span<const RunOutcome> outcomes,
                       const std::filesystem::path& path);

// Throws IoError, SchemaError (missing columns), ParseError (bad cells).
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// Main-vs-baseline comparison of one operation. Ratios are
/// baseline_ns_mean / main_ns_mean, so > 1 means main is faster. A ratio is
/// empty when either side spent zero time in that scope.
struct SpeedupRow {
  std::size_t index = 0;  // row position in the main results file
  std::string key;
  std::optional<std::int64_t> flops;
  std::optional<double> convolution_speedup;
  std::optional<double> operation_speedup;
  std::array<std::optional<double>, kPhaseCount> phase_ratio{};

  const std::optional<double>& operator[](Phase p) const {
    return phase_ratio[index_of(p)];
  }
};

struct Unmatched {
  std::string key;
  std::string side;  // "main", "baseline" or "both"
  std::string reason;
};

struct SpeedupSet {
  std::vector<SpeedupRow> rows;
  // Keys that could not be joined; never silently dropped.
  std::vector<Unmatched> unmatched;
};

// Joins on key, keeping main-file order. Only keys with status ok and timing
// cells on both sides are joined. Throws Error when nothing joins.
SpeedupSet compute_speedups(std::span<const ResultRow> main_rows,
                            std::span<const ResultRow> baseline_rows);

inline constexpr const char* kSpeedupHeader =
    "index,key,flops,convolution_speedup,operation_speedup,"
    "pre_analysis_ratio,pre_reorder_ratio,in_tiling_ratio,in_packing_ratio,"
    "in_microkernel_ratio,in_unpacking_ratio,post_reorder_ratio";
inline constexpr const char* kReconcileHeader = "key,side,reason";

std::string speedups_to_csv(std::span<const SpeedupRow> rows);
std::string reconcile_to_csv(std::span<const Unmatched> unmatched);

struct PhaseSpeedupSummary {
  std::size_t faster = 0;  // ratio > 1
  std::size_t slower = 0;  // ratio < 1
  // Mean of (ratio - 1) * 100 over the faster keys.
  std::optional<double> mean_speedup_pct;
  // Mean of (1 / ratio - 1) * 100 over the slower keys: 79.5 means main took
  // 1.795x the baseline time.
  std::optional<double> mean_slowdown_pct;
};

struct SpeedupSummary {
  std::size_t keys = 0;
  std::size_t convolution_defined = 0;
  std::size_t convolution_faster = 0;
  // convolution_faster / convolution_defined.
  double faster_fraction = 0;
  std::size_t operation_defined = 0;
  std::size_t operation_faster = 0;
  double operation_faster_fraction = 0;
  PhaseSpeedupSummary convolution;
  PhaseSpeedupSummary operation;
  std::array<PhaseSpeedupSummary, kPhaseCount> phases{};

  const PhaseSpeedupSummary& operator[](Phase p) const {
    return phases[index_of(p)];
  }
};

// Throws Error on an empty input.
SpeedupSummary summarize(std::span<const SpeedupRow> rows);
std::string format_summary(const SpeedupSummary& s);

// One tidy row per (key, side, phase): main stacks left, baseline right.
struct BreakdownRow {
  std::size_t index = 0;
  std::string key;
  std::string side;  // "main" or "baseline"
  Phase phase = Phase::kPreAnalysis;
  double time_ms = 0;
  double operation_ms = 0;  // stack total for this (key, side)
};

inline constexpr const char* kBreakdownHeader =
    "index,key,side,phase,time_ms,operation_ms";

// Joined keys in main-file order; per key 7 main rows then 7 baseline rows.
std::vector<BreakdownRow> breakdown_dataset(
    std::span<const ResultRow> main_rows,
    std::span<const ResultRow> baseline_rows);
std::string breakdown_to_csv(std::span<const BreakdownRow> rows);

}  // namespace convbench
