#include "convbench/timing.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "convbench/error.hpp"

namespace convbench {

namespace {
constexpr std::array<std::string_view, kPhaseCount> kPhaseNames = {
    "pre_analysis",   "pre_reorder",  "in_tiling",   "in_packing",
    "in_microkernel", "in_unpacking", "post_reorder"};
}  // namespace

std::string_view phase_name(Phase p) noexcept {
  return kPhaseNames[index_of(p)];
}

std::optional<Phase> parse_phase(std::string_view name) noexcept {
  for (Phase p : kAllPhases) {
    if (phase_name(p) == name) return p;
  }
  return std::nullopt;
}

Nanoseconds PhaseLedger::now() const {
  if (source_) return source_();
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void PhaseLedger::start(Phase p) {
  auto& pending = pending_[index_of(p)];
  if (pending) {
    throw InstrumentationError("start(" + std::string(phase_name(p)) +
                               ") while the phase is already started");
  }
  pending = now();
}

void PhaseLedger::update(Phase p) {
  const Nanoseconds t = now();
  auto& pending = pending_[index_of(p)];
  if (!pending) {
    throw InstrumentationError("update(" + std::string(phase_name(p)) +
                               ") without a matching start");
  }
  auto& s = stats_[index_of(p)];
  s.ns += std::max<Nanoseconds>(0, t - *pending);
  s.calls += 1;
  pending.reset();
}

void PhaseLedger::reset() noexcept {
  stats_.fill({});
  pending_.fill(std::nullopt);
}

TimingReport PhaseLedger::snapshot() const {
  std::string open;
  for (Phase p : kAllPhases) {
    if (pending(p)) {
      if (!open.empty()) open += ", ";
      open += phase_name(p);
    }
  }
  if (!open.empty()) {
    throw InstrumentationError("snapshot with pending start: " + open);
  }
  TimingReport r;
  r.phases = stats_;
  for (Phase p : kAllPhases) {
    r.operation_ns += r[p].ns;
    if (is_in_convolution(p)) r.convolution_ns += r[p].ns;
  }
  return r;
}

RunStatistics aggregate(std::span<const TimingReport> reports) {
  if (reports.empty()) {
    throw InstrumentationError("aggregate over an empty list of reports");
  }
  const TimingReport& first = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    for (Phase p : kAllPhases) {
      if (reports[i][p].calls != first[p].calls) {
        throw InstrumentationError(
            "call count of " + std::string(phase_name(p)) + " differs in run " +
            std::to_string(i) + " (" + std::to_string(reports[i][p].calls) +
            " vs " + std::to_string(first[p].calls) + ")");
      }
    }
  }

  RunStatistics s;
  s.runs = static_cast<std::int64_t>(reports.size());
  const double n = static_cast<double>(reports.size());
  Nanoseconds op_total = 0;
  Nanoseconds conv_total = 0;
  for (const auto& r : reports) {
    op_total += r.operation_ns;
    conv_total += r.convolution_ns;
  }
  s.operation_ns_mean = static_cast<double>(op_total) / n;
  s.convolution_ns_mean = static_cast<double>(conv_total) / n;

  for (Phase p : kAllPhases) {
    Nanoseconds total = 0;
    Nanoseconds lo = first[p].ns;
    for (const auto& r : reports) {
      total += r[p].ns;
      lo = std::min(lo, r[p].ns);
    }
    auto& out = s.phases[index_of(p)];
    out.mean_ns = static_cast<double>(total) / n;
    out.min_ns = lo;
    out.calls = first[p].calls;
    s.operation_ns_min += lo;
    if (is_in_convolution(p)) s.convolution_ns_min += lo;
  }
  return s;
}

}  // namespace convbench
