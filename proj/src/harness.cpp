#include "convbench/harness.hpp"

#include <new>
#include <stdexcept>

#include "convbench/error.hpp"

namespace convbench {

std::string_view to_string(RunMode m) noexcept {
  switch (m) {
    case RunMode::kMain: return "main";
    case RunMode::kBaseline: return "baseline";
    case RunMode::kCorrectness: return "correctness";
  }
  return "?";
}

std::string_view to_string(DataGen g) noexcept {
  return g == DataGen::kRandom ? "random" : "constant";
}

std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::kOk: return "ok";
    case RunStatus::kSkippedUnsupported: return "skipped_unsupported";
    case RunStatus::kFailed: return "failed";
  }
  return "?";
}

std::optional<RunMode> parse_run_mode(std::string_view s) noexcept {
  for (RunMode m : {RunMode::kMain, RunMode::kBaseline, RunMode::kCorrectness}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::optional<DataGen> parse_data_gen(std::string_view s) noexcept {
  if (s == "random") return DataGen::kRandom;
  if (s == "constant") return DataGen::kConstant;
  return std::nullopt;
}

std::optional<RunStatus> parse_run_status(std::string_view s) noexcept {
  for (RunStatus r : {RunStatus::kOk, RunStatus::kSkippedUnsupported,
                      RunStatus::kFailed}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

void RunConfig::validate() const {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (warmups < 0) throw std::invalid_argument("warmups must be >= 0");
  blocking.validate();
}

std::uint64_t key_hash(std::string_view key) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t operation_seed(std::uint64_t seed, std::string_view key) noexcept {
  return seed ^ key_hash(key);
}

template <typename T>
ConvInputs<T> make_inputs(const ConvDescriptor& desc, const RunConfig& cfg) {
  ConvInputs<T> in = allocate_inputs<T>(desc);
  if (cfg.data_gen == DataGen::kConstant) {
    const T v = static_cast<T>(cfg.constant_value);
    fill_constant(in.input, v);
    fill_constant(in.weights, v);
    fill_constant(std::span<T>(in.bias), v);
  } else {
    const std::uint64_t seed = operation_seed(cfg.seed, key_of(desc));
    fill_random(in.input, mix_seed(seed, 0));
    fill_random(in.weights, mix_seed(seed, 1));
    fill_random(std::span<T>(in.bias), mix_seed(seed, 2));
  }
  return in;
}

template <typename T>
Tensor4D<T> ConvBench<T>::execute(RunMode mode, const ConvInputs<T>& in,
                                  PhaseLedger& ledger) {
  ledger.reset();
  return mode == RunMode::kBaseline ? convolution_baseline(in, ledger)
                                    : convolution(in, ledger);
}

template <typename T>
RunOutcome ConvBench<T>::run_single(const ConvDescriptor& desc,
                                    const RunConfig& cfg) {
  cfg.validate();
  config_ = cfg;

  RunOutcome out;
  out.key = key_of(desc);
  out.mode = cfg.mode;
  out.warmups = cfg.warmups;
  out.runs = cfg.runs;

  try {
    const ConvInputs<T> in = make_inputs<T>(desc, cfg);
    PhaseLedger ledger;

    if (cfg.mode == RunMode::kCorrectness) {
      const Tensor4D<T> main_out = execute(RunMode::kMain, in, ledger);
      const Tensor4D<T> base_out = execute(RunMode::kBaseline, in, ledger);
      const Closeness c = allclose(main_out, base_out, cfg.rtol, cfg.atol);
      out.correctness_max_rel_err = c.max_rel_err;
      if (!c.pass) {
        out.status = RunStatus::kFailed;
        out.reason = "output mismatch: max_rel_err " +
                     std::to_string(c.max_rel_err) + ", max_abs_err " +
                     std::to_string(c.max_abs_err);
      }
      return out;
    }

    for (std::int64_t i = 0; i < cfg.warmups; ++i) {
      execute(cfg.mode, in, ledger);
    }
    std::vector<TimingReport> reports;
    reports.reserve(static_cast<std::size_t>(cfg.runs));
    for (std::int64_t i = 0; i < cfg.runs; ++i) {
      execute(cfg.mode, in, ledger);
      reports.push_back(ledger.snapshot());
    }
    out.stats = aggregate(reports);
  } catch (const UnsupportedDescriptor& e) {
    out.status = RunStatus::kSkippedUnsupported;
    out.reason = e.what();
    out.correctness_max_rel_err.reset();
  } catch (const std::bad_alloc&) {
    out.status = RunStatus::kFailed;
    out.reason = "allocation failure";
    out.correctness_max_rel_err.reset();
  } catch (const Error& e) {
    out.status = RunStatus::kFailed;
    out.reason = e.what();
    out.correctness_max_rel_err.reset();
  }
  return out;
}

template <typename T>
std::vector<RunOutcome> ConvBench<T>::convset_exec(const ConvSet& set,
                                                   const RunConfig& cfg,
                                                   const ProgressFn& progress) {
  cfg.validate();
  const ConvSet filtered = apply_filter(set, cfg.filter);
  std::vector<RunOutcome> outcomes;
  outcomes.reserve(filtered.size());
  for (const auto& desc : filtered) {
    outcomes.push_back(run_single(desc, cfg));
    if (progress) progress(outcomes.size(), filtered.size(), outcomes.back());
  }
  return outcomes;
}

std::vector<RunOutcome> convset_exec(const ConvSet& set, const RunConfig& cfg,
                                     const ProgressFn& progress) {
  BlockedDirectBench<float> bench;
  return bench.convset_exec(set, cfg, progress);
}

RunOutcome run_single(const ConvDescriptor& desc, const RunConfig& cfg) {
  BlockedDirectBench<float> bench;
  return bench.run_single(desc, cfg);
}

template class ConvBench<float>;
template class ConvBench<double>;
template ConvInputs<float> make_inputs<float>(const ConvDescriptor&,
                                              const RunConfig&);
template ConvInputs<double> make_inputs<double>(const ConvDescriptor&,
                                                const RunConfig&);

}  // namespace convbench
