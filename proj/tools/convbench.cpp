// convbench command-line driver.
//
//   convbench run     sweep a convSet (or one operation) in main, baseline or
//                     correctness mode and write the results CSV
//   convbench filter  export a filtered convSet
//   convbench stats   print convSet class counts and ranges
//   convbench report  join main/baseline results into speedup, breakdown and
//                     summary files
//
// Exit codes: 0 success, 2 correctness failure, 3 I/O or schema error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "convbench/convset.hpp"
#include "convbench/csv.hpp"
#include "convbench/error.hpp"
#include "convbench/harness.hpp"
#include "convbench/report.hpp"

namespace cb = convbench;

namespace {

constexpr int kExitCorrectness = 2;
constexpr int kExitIo = 3;

struct FilterFlags {
  std::vector<std::string> classes;
  bool exclude_padded = false;
  bool unit_stride = false;
  std::optional<std::int64_t> min_flops;
  std::optional<std::int64_t> max_flops;

  void attach(CLI::App* cmd) {
    cmd->add_option("--filter", classes,
                    "Keep classes: pointwise,grouped,dilated,rectangular,regular")
        ->delimiter(',')
        ->check(CLI::IsMember(
            {"pointwise", "grouped", "dilated", "rectangular", "regular"}));
    cmd->add_flag("--exclude-padded", exclude_padded,
                  "Drop operations with non-zero padding");
    cmd->add_flag("--unit-stride", unit_stride,
                  "Keep only stride 1x1 operations");
    cmd->add_option("--min-flops", min_flops, "Minimum FLOP count");
    cmd->add_option("--max-flops", max_flops, "Maximum FLOP count");
  }

  cb::FilterSpec spec() const {
    cb::FilterSpec f;
    for (const auto& name : classes) f.with(*cb::parse_conv_class(name));
    f.exclude_padded = exclude_padded;
    f.unit_stride_only = unit_stride;
    f.min_flops = min_flops;
    f.max_flops = max_flops;
    return f;
  }
};

// Main algorithm with its output negated; used to check that correctness
// mode actually catches a broken kernel.
class SignFlipBench : public cb::BlockedDirectBench<float> {
 public:
  cb::Tensor4D<float> convolution(const cb::ConvInputs<float>& in,
                                  cb::PhaseLedger& ledger) override {
    auto out = cb::BlockedDirectBench<float>::convolution(in, ledger);
    for (auto& v : out.data()) v = -v;
    return out;
  }
};

cb::ConvSet load_convset(const std::string& path) {
  const cb::CsvLoad load = cb::read_convset_csv(path);
  if (load.duplicates > 0) {
    std::cerr << "convbench: dropped " << load.duplicates
              << " duplicate rows from " << path << "\n";
  }
  return load.set;
}

int cmd_run(const std::string& convset_path, const std::string& op_key,
            const std::string& mode, const std::string& data, double constant,
            std::int64_t warmups, std::int64_t runs, std::uint64_t seed,
            const FilterFlags& filter, const std::string& out_path,
            const std::string& fault, bool quiet) {
  cb::RunConfig cfg;
  cfg.mode = *cb::parse_run_mode(mode);
  cfg.data_gen = *cb::parse_data_gen(data);
  cfg.constant_value = constant;
  cfg.warmups = warmups;
  cfg.runs = runs;
  cfg.seed = seed;
  cfg.filter = filter.spec();

  cb::ConvSet set;
  if (!op_key.empty()) {
    set.insert_unique(cb::parse_key(op_key));
  } else {
    set = load_convset(convset_path);
  }

  SignFlipBench faulty;
  cb::BlockedDirectBench<float> normal;
  cb::ConvBench<float>& bench =
      fault == "sign-flip" ? static_cast<cb::ConvBench<float>&>(faulty) : normal;

  cb::ProgressFn progress;
  if (!quiet) {
    progress = [](std::size_t done, std::size_t total, const cb::RunOutcome& o) {
      std::cerr << "[" << done << "/" << total << "] " << o.key << " "
                << cb::to_string(o.status);
      if (o.correctness_max_rel_err) {
        std::cerr << " max_rel_err=" << *o.correctness_max_rel_err;
      }
      std::cerr << "\n";
    };
  }
  const auto outcomes = bench.convset_exec(set, cfg, progress);
  if (outcomes.empty()) {
    std::cerr << "convbench: warning: no operations left after filtering\n";
  }

  std::vector<cb::ResultRow> rows;
  for (const auto& o : outcomes) rows.push_back(cb::to_result_row(o));
  if (out_path.empty()) {
    std::cout << cb::results_to_csv(rows);
  } else {
    cb::write_results_csv(rows, out_path);
  }

  if (cfg.mode == cb::RunMode::kCorrectness) {
    std::size_t failures = 0;
    for (const auto& o : outcomes) {
      if (o.status == cb::RunStatus::kFailed) {
        ++failures;
        std::cerr << "convbench: FAIL " << o.key << ": " << o.reason << "\n";
      }
    }
    if (failures > 0) {
      std::cerr << "convbench: " << failures << " of " << outcomes.size()
                << " operations failed the correctness check\n";
      return kExitCorrectness;
    }
  }
  return 0;
}

int cmd_filter(const std::string& in, const std::string& out,
               const FilterFlags& filter) {
  const cb::ConvSet set = load_convset(in);
  const cb::ConvSet kept = cb::apply_filter(set, filter.spec());
  cb::save_csv(kept, out);
  std::cerr << "convbench: kept " << kept.size() << " of " << set.size()
            << " operations\n";
  return 0;
}

int cmd_stats(const std::string& path) {
  const cb::ConvSet set = load_convset(path);
  std::cout << cb::format_stats(cb::stats(set));
  std::size_t lint_warnings = 0;
  for (const auto& d : set) {
    for (const auto& w : cb::lint(d)) {
      std::cerr << "lint: " << cb::key_of(d) << ": " << w << "\n";
      ++lint_warnings;
    }
  }
  std::cout << "lint_warnings: " << lint_warnings << "\n";
  return 0;
}

int cmd_report(const std::string& main_path, const std::string& baseline_path,
               const std::string& out_speedup, const std::string& out_breakdown,
               const std::string& out_summary) {
  const auto main_rows = cb::read_results_csv(main_path);
  const auto baseline_rows = cb::read_results_csv(baseline_path);

  const cb::SpeedupSet speedups = cb::compute_speedups(main_rows, baseline_rows);
  cb::csv::write(out_speedup, cb::speedups_to_csv(speedups.rows));

  std::filesystem::path sidecar(out_speedup);
  sidecar.replace_extension(".reconcile.csv");
  cb::csv::write(sidecar, cb::reconcile_to_csv(speedups.unmatched));
  if (!speedups.unmatched.empty()) {
    std::cerr << "convbench: " << speedups.unmatched.size()
              << " keys did not join; see " << sidecar.string() << "\n";
  }

  const auto breakdown = cb::breakdown_dataset(main_rows, baseline_rows);
  cb::csv::write(out_breakdown, cb::breakdown_to_csv(breakdown));

  const std::string summary = cb::format_summary(cb::summarize(speedups.rows));
  cb::csv::write(out_summary, summary);
  std::cout << summary;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convolution algorithm benchmark"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Benchmark a convSet");
  std::string convset_path, op_key, mode, data = "random", out_path, fault;
  double constant = 1.0;
  std::int64_t warmups = 10, runs = 100;
  std::uint64_t seed = 0;
  bool quiet = false;
  FilterFlags run_filter;
  auto* convset_opt =
      run->add_option("--convset", convset_path, "convSet CSV");
  auto* op_opt = run->add_option("--op", op_key, "Run a single operation given by its key");
  convset_opt->excludes(op_opt);
  run->add_option("--mode", mode, "main | baseline | correctness")
      ->required()
      ->check(CLI::IsMember({"main", "baseline", "correctness"}));
  run->add_option("--data", data, "random | constant")
      ->check(CLI::IsMember({"random", "constant"}));
  run->add_option("--constant-value", constant, "Fill value for --data constant");
  run->add_option("--warmups", warmups, "Unmeasured executions per operation")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--runs", runs, "Measured executions per operation")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Base seed for random data");
  run->add_option("--out", out_path, "Results CSV (default: stdout)");
  run->add_option("--inject-fault", fault, "Self-test: corrupt the main kernel")
      ->check(CLI::IsMember({"sign-flip"}))
      ->group("");
  run->add_flag("--quiet", quiet, "No progress on stderr");
  run_filter.attach(run);

  // filter
  auto* filter = app.add_subcommand("filter", "Export a filtered convSet");
  std::string filter_in, filter_out;
  FilterFlags filter_flags;
  filter->add_option("--convset", filter_in, "Input convSet CSV")->required();
  filter->add_option("--out", filter_out, "Output convSet CSV")->required();
  filter_flags.attach(filter);

  // stats
  auto* stats = app.add_subcommand("stats", "Summarize a convSet");
  std::string stats_path;
  stats->add_option("--convset", stats_path, "convSet CSV")->required();

  // report
  auto* report = app.add_subcommand("report", "Compare main and baseline results");
  std::string main_results, baseline_results, out_speedup, out_breakdown, out_summary;
  report->add_option("--main", main_results, "Main results CSV")->required();
  report->add_option("--baseline", baseline_results, "Baseline results CSV")->required();
  report->add_option("--out-speedup", out_speedup, "Speedup CSV")->required();
  report->add_option("--out-breakdown", out_breakdown, "Breakdown CSV")->required();
  report->add_option("--out-summary", out_summary, "Summary text")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; usage errors exit 1.
    return app.exit(e) == 0 ? 0 : EXIT_FAILURE;
  }

  try {
    if (*run) {
      if (convset_path.empty() && op_key.empty()) {
        std::cerr << "convbench run: one of --convset or --op is required\n";
        return EXIT_FAILURE;
      }
      return cmd_run(convset_path, op_key, mode, data, constant, warmups, runs,
                     seed, run_filter, out_path, fault, quiet);
    }
    if (*filter) return cmd_filter(filter_in, filter_out, filter_flags);
    if (*stats) return cmd_stats(stats_path);
    if (*report) {
      return cmd_report(main_results, baseline_results, out_speedup,
                        out_breakdown, out_summary);
    }
  } catch (const cb::IoError& e) {
    std::cerr << "convbench: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const cb::SchemaError& e) {
    std::cerr << "convbench: schema error: " << e.what() << "\n";
    return kExitIo;
  } catch (const cb::ParseError& e) {
    std::cerr << "convbench: parse error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "convbench: " << e.what() << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_FAILURE;
}
