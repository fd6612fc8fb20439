#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convbench/algos.hpp"
#include "convbench/convset.hpp"
#include "convbench/timing.hpp"

namespace convbench {

enum class RunMode { kMain, kBaseline, kCorrectness };
enum class DataGen { kRandom, kConstant };
enum class RunStatus { kOk, kSkippedUnsupported, kFailed };

std::string_view to_string(RunMode m) noexcept;
std::string_view to_string(DataGen g) noexcept;
std::string_view to_string(RunStatus s) noexcept;
std::optional<RunMode> parse_run_mode(std::string_view s) noexcept;
std::optional<DataGen> parse_data_gen(std::string_view s) noexcept;
std::optional<RunStatus> parse_run_status(std::string_view s) noexcept;

struct RunConfig {
  RunMode mode = RunMode::kMain;
  DataGen data_gen = DataGen::kRandom;
  double constant_value = 1.0;
  std::int64_t warmups = 10;
  std::int64_t runs = 100;
  std::uint64_t seed = 0;
  FilterSpec filter;
  GemmBlocking blocking;
  CacheParams cache;
  // Correctness-mode comparison tolerances.
  double rtol = kDefaultRtol;
  double atol = kDefaultAtol;

  // Throws std::invalid_argument unless runs >= 1, warmups >= 0 and the
  // blocking is valid.
  void validate() const;
};

struct RunOutcome {
  std::string key;
  RunMode mode = RunMode::kMain;
  RunStatus status = RunStatus::kOk;
  std::string reason;  // set for skipped/failed outcomes
  std::int64_t warmups = 0;
  std::int64_t runs = 0;
  // Present for successful main/baseline runs.
  std::optional<RunStatistics> stats;
  // Present iff mode == correctness and both sides executed.
  std::optional<double> correctness_max_rel_err;
};

// 64-bit FNV-1a over the key bytes.
std::uint64_t key_hash(std::string_view key) noexcept;

// Per-operation seed: cfg.seed XOR key_hash(key).
std::uint64_t operation_seed(std::uint64_t seed, std::string_view key) noexcept;

// Allocates and fills the operands for one operation. Random data uses
// independent streams of the operation seed for input, weights and bias.
template <typename T>
ConvInputs<T> make_inputs(const ConvDescriptor& desc, const RunConfig& cfg);

using ProgressFn =
    std::function<void(std::size_t done, std::size_t total, const RunOutcome&)>;

/**
 * Benchmark driver. Subclasses provide the algorithm under test through
 * convolution() and may replace the Im2col-GEMM baseline. Both receive the
 * ledger to instrument; it is reset before every execution.
 *
 * An implementation that cannot handle a descriptor throws
 * UnsupportedDescriptor; the sweep records it as skipped and moves on.
 */
template <typename T>
class ConvBench {
 public:
  virtual ~ConvBench() = default;

  virtual Tensor4D<T> convolution(const ConvInputs<T>& in,
                                  PhaseLedger& ledger) = 0;

  virtual Tensor4D<T> convolution_baseline(const ConvInputs<T>& in,
                                           PhaseLedger& ledger) {
    return conv_baseline_im2col_gemm<T>(in, ledger, config().blocking);
  }

  // Runs every descriptor of apply_filter(set, cfg.filter) in order. The
  // returned list always has one outcome per filtered descriptor.
  std::vector<RunOutcome> convset_exec(const ConvSet& set, const RunConfig& cfg,
                                       const ProgressFn& progress = {});

  RunOutcome run_single(const ConvDescriptor& desc, const RunConfig& cfg);

 protected:
  const RunConfig& config() const noexcept { return config_; }

 private:
  Tensor4D<T> execute(RunMode mode, const ConvInputs<T>& in,
                      PhaseLedger& ledger);

  RunConfig config_;
};

// Default benchmark: blocked direct convolution as the main algorithm.
template <typename T>
class BlockedDirectBench : public ConvBench<T> {
 public:
  Tensor4D<T> convolution(const ConvInputs<T>& in,
                          PhaseLedger& ledger) override {
    return conv_main_blocked_direct<T>(in, ledger, this->config().cache);
  }
};

// convset_exec with BlockedDirectBench<float>.
std::vector<RunOutcome> convset_exec(const ConvSet& set, const RunConfig& cfg,
                                     const ProgressFn& progress = {});
RunOutcome run_single(const ConvDescriptor& desc, const RunConfig& cfg);

extern template class ConvBench<float>;
extern template class ConvBench<double>;
extern template ConvInputs<float> make_inputs<float>(const ConvDescriptor&,
                                                     const RunConfig&);
extern template ConvInputs<double> make_inputs<double>(const ConvDescriptor&,
                                                       const RunConfig&);

}  // namespace convbench
