#include <vector>

#include "convbench/error.hpp"
#include "convbench/harness.hpp"
#include "doctest.h"

using namespace convbench;

namespace {

ConvDescriptor make(std::int64_t c, std::int64_t hw, std::int64_t f, std::int64_t k,
                    std::int64_t s = 1, std::int64_t p = 0, std::int64_t g = 1,
                    std::int64_t dil = 1) {
  ConvDescriptor d;
  d.in_channels = c;
  d.in_h = d.in_w = hw;
  d.out_channels = f;
  d.k_h = d.k_w = k;
  d.stride_h = d.stride_w = s;
  d.pad_h = d.pad_w = p;
  d.groups = g;
  d.dil_h = d.dil_w = dil;
  return d;
}

RunConfig quick(RunMode mode, std::int64_t warmups = 1, std::int64_t runs = 2) {
  RunConfig cfg;
  cfg.mode = mode;
  cfg.warmups = warmups;
  cfg.runs = runs;
  return cfg;
}

// Main is the baseline itself, so correctness must be exact.
class BaselineAsMain : public ConvBench<float> {
 public:
  Tensor4D<float> convolution(const ConvInputs<float>& in,
                              PhaseLedger& ledger) override {
    ++main_calls;
    return conv_baseline_im2col_gemm(in, ledger, config().blocking);
  }
  int main_calls = 0;
};

class Negated : public BlockedDirectBench<float> {
 public:
  Tensor4D<float> convolution(const ConvInputs<float>& in,
                              PhaseLedger& ledger) override {
    auto out = BlockedDirectBench<float>::convolution(in, ledger);
    for (float& v : out.data()) v = -v;
    return out;
  }
};

}  // namespace

TEST_CASE("enum string round trips") {
  for (auto m : {RunMode::kMain, RunMode::kBaseline, RunMode::kCorrectness})
    CHECK(parse_run_mode(to_string(m)) == m);
  for (auto g : {DataGen::kRandom, DataGen::kConstant})
    CHECK(parse_data_gen(to_string(g)) == g);
  for (auto s : {RunStatus::kOk, RunStatus::kSkippedUnsupported, RunStatus::kFailed})
    CHECK(parse_run_status(to_string(s)) == s);
  CHECK_FALSE(parse_run_mode("fast").has_value());
}

TEST_CASE("RunConfig validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.runs = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.runs = 1;
  cfg.warmups = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("baseline sweep reports one PreReorder per run") {
  ConvSet set;
  set.insert_unique(make(3, 8, 4, 3));
  set.insert_unique(make(4, 9, 4, 3, 1, 1, 2));
  set.insert_unique(make(8, 6, 8, 1, 2));
  const auto outcomes = convset_exec(set, quick(RunMode::kBaseline, 1, 3));
  REQUIRE(outcomes.size() == 3);
  for (const auto& o : outcomes) {
    CHECK(o.status == RunStatus::kOk);
    REQUIRE(o.stats.has_value());
    CHECK(o.stats->runs == 3);
    CHECK((*o.stats)[Phase::kPreReorder].calls == 1);
    CHECK((*o.stats)[Phase::kInMicrokernel].calls >= 1);
  }
}

TEST_CASE("main sweep: supported ok, grouped and dilated skipped") {
  ConvSet set;
  set.insert_unique(make(3, 8, 4, 3));
  set.insert_unique(make(4, 8, 4, 3, 1, 0, 2));
  set.insert_unique(make(4, 8, 4, 3, 1, 0, 1, 2));
  std::vector<std::size_t> progress;
  const auto outcomes = convset_exec(set, quick(RunMode::kMain),
                                     [&](std::size_t done, std::size_t total, const RunOutcome&) {
                                       CHECK(total == 3);
                                       progress.push_back(done);
                                     });
  REQUIRE(outcomes.size() == 3);
  CHECK(progress == std::vector<std::size_t>{1, 2, 3});
  CHECK(outcomes[0].status == RunStatus::kOk);
  const RunStatistics& s = *outcomes[0].stats;
  for (Phase p : {Phase::kInTiling, Phase::kInPacking, Phase::kInMicrokernel,
                  Phase::kInUnpacking})
    CHECK(s[p].calls >= 1);
  CHECK(s[Phase::kPostReorder].calls == 0);
  for (int i : {1, 2}) {
    CHECK(outcomes[i].status == RunStatus::kSkippedUnsupported);
    CHECK_FALSE(outcomes[i].reason.empty());
    CHECK_FALSE(outcomes[i].stats.has_value());
  }
}

TEST_CASE("correctness mode") {
  const ConvDescriptor d = make(5, 11, 7, 3, 2, 1);
  BaselineAsMain same;
  const RunOutcome ok = same.run_single(d, quick(RunMode::kCorrectness));
  CHECK(ok.status == RunStatus::kOk);
  REQUIRE(ok.correctness_max_rel_err.has_value());
  CHECK(*ok.correctness_max_rel_err == 0.0);
  CHECK_FALSE(ok.stats.has_value());
  CHECK(same.main_calls == 1);  // no warmups in correctness mode

  const RunOutcome direct = run_single(d, quick(RunMode::kCorrectness));
  CHECK(direct.status == RunStatus::kOk);
  CHECK(*direct.correctness_max_rel_err <= 1e-4);

  Negated neg;
  const RunOutcome bad = neg.run_single(d, quick(RunMode::kCorrectness));
  CHECK(bad.status == RunStatus::kFailed);
  CHECK(*bad.correctness_max_rel_err > 1e-4);
  CHECK(bad.reason.find("mismatch") != std::string::npos);
}

TEST_CASE("run counts and statistics") {
  const ConvDescriptor d = make(3, 10, 4, 3);
  const RunOutcome one = run_single(d, quick(RunMode::kMain, 0, 1));
  REQUIRE(one.stats.has_value());
  CHECK(one.stats->runs == 1);
  CHECK(one.warmups == 0);
  for (Phase p : kAllPhases)
    CHECK((*one.stats)[p].mean_ns == static_cast<double>((*one.stats)[p].min_ns));

  const RunOutcome five = run_single(d, quick(RunMode::kMain, 2, 5));
  const RunStatistics& s = *five.stats;
  CHECK(s.runs == 5);
  for (Phase p : kAllPhases) CHECK(static_cast<double>(s[p].min_ns) <= s[p].mean_ns);
  CHECK(static_cast<double>(s.operation_ns_min) <= s.operation_ns_mean);
  CHECK(s.convolution_ns_mean <= s.operation_ns_mean);

  // Warmups do not leak into per-run call counts.
  const RunOutcome cold = run_single(d, quick(RunMode::kMain, 0, 1));
  const RunOutcome warm = run_single(d, quick(RunMode::kMain, 4, 1));
  for (Phase p : kAllPhases)
    CHECK((*cold.stats)[p].calls == (*warm.stats)[p].calls);
}

TEST_CASE("make_inputs") {
  const ConvDescriptor d = make(1, 5, 1, 3);
  RunConfig cfg;
  cfg.data_gen = DataGen::kConstant;
  const auto ones = make_inputs<float>(d, cfg);
  PhaseLedger ledger;
  const auto out = conv_main_blocked_direct(ones, ledger);
  for (float v : out.data()) CHECK(v == 9.0f);

  cfg.data_gen = DataGen::kRandom;
  cfg.seed = 3;
  const auto a = make_inputs<float>(d, cfg);
  const auto b = make_inputs<float>(d, cfg);
  CHECK(a.input == b.input);
  CHECK(a.weights == b.weights);
  CHECK(a.input.data()[0] != a.weights.data()[0]);
  cfg.seed = 4;
  CHECK_FALSE(make_inputs<float>(d, cfg).input == a.input);
  CHECK(operation_seed(0, key_of(d)) != operation_seed(0, key_of(make(1, 5, 1, 1))));
}

TEST_CASE("outcome count equals filtered size") {
  ConvSet set;
  set.insert_unique(make(4, 8, 4, 1));
  set.insert_unique(make(4, 8, 4, 3));
  set.insert_unique(make(4, 8, 4, 3, 1, 1));
  RunConfig cfg = quick(RunMode::kMain, 0, 1);
  cfg.filter.with(ConvClass::kRegular);
  CHECK(convset_exec(set, cfg).size() == 2);
  cfg.filter.exclude_padded = true;
  CHECK(convset_exec(set, cfg).size() == 1);
  CHECK(convset_exec(ConvSet{}, cfg).empty());
}

TEST_CASE("double precision bench") {
  BlockedDirectBench<double> bench;
  const RunOutcome o = bench.run_single(make(3, 9, 5, 3, 1, 1), quick(RunMode::kCorrectness));
  CHECK(o.status == RunStatus::kOk);
  CHECK(*o.correctness_max_rel_err <= 1e-12);
}
