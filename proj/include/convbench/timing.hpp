#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

namespace convbench {

/// Standardized convolution phases. Pre-convolution covers operation analysis
/// and input reordering; in-convolution covers tiling, microkernel-specific
/// packing, the microkernel itself and result unpacking; post-convolution is
/// an optional output reorder.
enum class Phase : std::uint8_t {
  kPreAnalysis,
  kPreReorder,
  kInTiling,
  kInPacking,
  kInMicrokernel,
  kInUnpacking,
  kPostReorder,
};

inline constexpr std::size_t kPhaseCount = 7;

inline constexpr std::array<Phase, kPhaseCount> kAllPhases = {
    Phase::kPreAnalysis,   Phase::kPreReorder,   Phase::kInTiling,
    Phase::kInPacking,     Phase::kInMicrokernel, Phase::kInUnpacking,
    Phase::kPostReorder};

constexpr std::size_t index_of(Phase p) noexcept {
  return static_cast<std::size_t>(p);
}

constexpr bool is_in_convolution(Phase p) noexcept {
  return p == Phase::kInTiling || p == Phase::kInPacking ||
         p == Phase::kInMicrokernel || p == Phase::kInUnpacking;
}

// snake_case name used as the CSV column prefix ("in_packing", ...).
std::string_view phase_name(Phase p) noexcept;
std::optional<Phase> parse_phase(std::string_view name) noexcept;

using Nanoseconds = std::int64_t;

struct PhaseStat {
  Nanoseconds ns = 0;
  std::int64_t calls = 0;

  friend bool operator==(const PhaseStat&, const PhaseStat&) = default;
};

struct TimingReport {
  std::array<PhaseStat, kPhaseCount> phases{};
  // Sum over all phases.
  Nanoseconds operation_ns = 0;
  // Sum over the in-convolution phases.
  Nanoseconds convolution_ns = 0;

  const PhaseStat& operator[](Phase p) const { return phases[index_of(p)]; }

  friend bool operator==(const TimingReport&, const TimingReport&) = default;
};

/**
 * Per-phase elapsed-time and call-count accumulator.
 *
 * Each phase is measured by a start()/update() pair; repeated pairs
 * accumulate. Phases are independent, so pairs of different phases may
 * overlap or nest. Unbalanced use (double start, update without start,
 * snapshot with a pending start) throws InstrumentationError.
 *
 * The default time source is std::chrono::steady_clock. Tests can inject a
 * deterministic source returning nanoseconds.
 *
 * Not thread-safe; one ledger belongs to one benchmark thread.
 */
class PhaseLedger {
 public:
  using TimeSource = std::function<Nanoseconds()>;

  PhaseLedger() = default;
  explicit PhaseLedger(TimeSource source) : source_(std::move(source)) {}

  void start(Phase p);
  void update(Phase p);

  // Clears accumulators, counts and pending starts.
  void reset() noexcept;

  TimingReport snapshot() const;

  bool pending(Phase p) const noexcept {
    return pending_[index_of(p)].has_value();
  }
  Nanoseconds elapsed(Phase p) const noexcept {
    return stats_[index_of(p)].ns;
  }
  std::int64_t calls(Phase p) const noexcept {
    return stats_[index_of(p)].calls;
  }

 private:
  Nanoseconds now() const;

  TimeSource source_;
  std::array<PhaseStat, kPhaseCount> stats_{};
  std::array<std::optional<Nanoseconds>, kPhaseCount> pending_{};
};

// Encloses a scope in a start()/update() pair.
class PhaseScope {
 public:
  PhaseScope(PhaseLedger& ledger, Phase phase) : ledger_(ledger), phase_(phase) {
    ledger_.start(phase_);
  }
  ~PhaseScope() {
    // A reset() inside the scope already dropped the pending start.
    if (ledger_.pending(phase_)) ledger_.update(phase_);
  }
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  PhaseLedger& ledger_;
  Phase phase_;
};

struct PhaseSummary {
  double mean_ns = 0;
  Nanoseconds min_ns = 0;
  std::int64_t calls = 0;
};

/// Statistics over repeated measured runs of one operation.
///
/// operation_ns_min / convolution_ns_min are sums of the per-phase minima so
/// that the phase columns of a result row always add up to its totals.
struct RunStatistics {
  std::int64_t runs = 0;
  std::array<PhaseSummary, kPhaseCount> phases{};
  double operation_ns_mean = 0;
  Nanoseconds operation_ns_min = 0;
  double convolution_ns_mean = 0;
  Nanoseconds convolution_ns_min = 0;

  const PhaseSummary& operator[](Phase p) const { return phases[index_of(p)]; }
};

// Throws InstrumentationError for an empty list or when call counts differ
// between reports.
RunStatistics aggregate(std::span<const TimingReport> reports);

}  // namespace convbench
