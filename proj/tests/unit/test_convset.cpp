#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "convbench/convset.hpp"
#include "convbench/csv.hpp"
#include "convbench/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace convbench;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = CONVBENCH_FIXTURE_DIR;

ConvDescriptor square(std::int64_t c, std::int64_t hw, std::int64_t f,
                      std::int64_t k, std::int64_t pad = 0, std::int64_t groups = 1) {
  ConvDescriptor d;
  d.in_channels = c;
  d.in_h = d.in_w = hw;
  d.out_channels = f;
  d.k_h = d.k_w = k;
  d.pad_h = d.pad_w = pad;
  d.groups = groups;
  return d;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("convbench_test_" + name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("insert_unique deduplicates by key") {
  ConvSet set;
  const auto d = square(3, 8, 4, 3);
  CHECK(set.insert_unique(d));
  CHECK_FALSE(set.insert_unique(d));
  CHECK(set.size() == 1);

  const auto e = square(3, 8, 4, 1);
  CHECK(set.insert_unique(e));
  REQUIRE(set.size() == 2);
  CHECK(set[0] == d);
  CHECK(set[1] == e);
  CHECK(set.position(key_of(e)) == 1u);

  CHECK_THROWS_AS(set.insert_unique(square(0, 8, 4, 3)), InvalidDescriptor);
  CHECK(set.size() == 2);
}

TEST_CASE("CSV with repeated rows of one shape collapses to one entry") {
  const auto d = square(3, 8, 4, 3, 1);
  ConvSet one;
  one.insert_unique(d);
  const std::string body = to_csv(one);
  const std::string row = body.substr(body.find('\n') + 1);
  std::string text = std::string(kConvSetHeader) + "\n";
  for (int i = 0; i < 6; ++i) text += row;
  const auto path = temp_file("dups.csv");
  write_text(path, text);
  const CsvLoad load = read_convset_csv(path);
  CHECK(load.rows == 6);
  CHECK(load.duplicates == 5);
  CHECK(load.set.size() == 1);
}

TEST_CASE("dedup fixture: 40 rows, 15 duplicates") {
  const CsvLoad load = read_convset_csv(kFixtures / "dedup_40.csv");
  CHECK(load.rows == 40);
  CHECK(load.duplicates == 15);
  CHECK(load.set.size() == 25);
  const ConvSet labelled = load_csv(kFixtures / "classify_25.csv");
  REQUIRE(labelled.size() == 25);
  for (const auto& d : labelled) CHECK(load.set.contains(key_of(d)));
}

TEST_CASE("apply_filter") {
  ConvSet set;
  set.insert_unique(square(8, 10, 8, 3, 1));  // padded regular
  set.insert_unique(square(8, 10, 8, 3, 0));  // unpadded regular

  FilterSpec regular_unpadded;
  regular_unpadded.with(ConvClass::kRegular).exclude_padded = true;
  const ConvSet kept = apply_filter(set, regular_unpadded);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].pad_h == 0);

  CHECK(apply_filter(set, FilterSpec{}) == set);

  ConvSet mixed;
  mixed.insert_unique(square(4, 8, 4, 1));
  mixed.insert_unique(square(8, 8, 4, 1));
  mixed.insert_unique(square(4, 8, 8, 1));
  mixed.insert_unique(square(4, 8, 4, 3));
  mixed.insert_unique(square(4, 8, 4, 5));
  FilterSpec pointwise;
  pointwise.with(ConvClass::kPointwise);
  CHECK(apply_filter(mixed, pointwise).size() == 3);

  FilterSpec regular;
  regular.with(ConvClass::kRegular);
  CHECK(apply_filter(apply_filter(mixed, pointwise), regular).empty());
}

TEST_CASE("apply_filter FLOP bounds and stride") {
  ConvSet set;
  set.insert_unique(square(1, 1, 1, 1));  // 2 FLOPs
  set.insert_unique(square(1, 3, 1, 3));  // 18 FLOPs
  ConvDescriptor strided = square(1, 5, 1, 1);
  strided.stride_h = 2;
  set.insert_unique(strided);  // 2 * 3 * 5 = 30 FLOPs

  FilterSpec f;
  f.min_flops = 10;
  f.max_flops = 20;
  const ConvSet mid = apply_filter(set, f);
  REQUIRE(mid.size() == 1);
  CHECK(flop_count(mid[0]) == 18);

  FilterSpec unit;
  unit.unit_stride_only = true;
  CHECK(apply_filter(set, unit).size() == 2);
}

TEST_CASE("apply_filter is idempotent and order preserving") {
  std::mt19937_64 rng(5);
  ConvSet set;
  for (int i = 0; i < 300; ++i) set.insert_unique(oracle::random_descriptor(rng));
  for (int trial = 0; trial < 50; ++trial) {
    FilterSpec f;
    f.classes = static_cast<std::uint8_t>(rng() % 32);
    f.exclude_padded = rng() % 2;
    if (rng() % 2) f.max_flops = static_cast<std::int64_t>(rng() % 200000);
    const ConvSet once = apply_filter(set, f);
    CHECK(apply_filter(once, f) == once);
    std::size_t last = 0;
    for (const auto& d : once) {
      const auto pos = *set.position(key_of(d));
      CHECK(pos >= last);
      last = pos;
    }
  }
}

TEST_CASE("save/load round trip is byte stable") {
  std::mt19937_64 rng(8);
  ConvSet set;
  for (int i = 0; i < 100; ++i) set.insert_unique(oracle::random_descriptor(rng));
  const auto a = temp_file("rt_a.csv");
  const auto b = temp_file("rt_b.csv");
  save_csv(set, a);
  const ConvSet loaded = load_csv(a);
  CHECK(loaded == set);
  save_csv(loaded, b);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind(std::string(kConvSetHeader) + "\n", 0) == 0);
}

TEST_CASE("load_csv errors") {
  const auto path = temp_file("bad.csv");

  write_text(path, std::string(kConvSetHeader) + "\n");
  CHECK(load_csv(path).empty());

  // in_channels = 0 on data row 2.
  write_text(path,
             "batch,in_channels,in_h,in_w,out_channels,k_h,k_w,stride_h,stride_w,"
             "pad_h,pad_w,dil_h,dil_w,groups,has_bias\n"
             "1,3,8,8,4,3,3,1,1,0,0,1,1,1,0\n"
             "1,0,8,8,4,3,3,1,1,0,0,1,1,1,0\n");
  try {
    load_csv(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }

  write_text(path, "batch,in_channels,in_h\n1,3,8\n");
  try {
    load_csv(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    const std::string what = e.what();
    CHECK(what.find("in_w") != std::string::npos);
    CHECK(what.find("has_bias") != std::string::npos);
    CHECK(what.find("in_channels") == std::string::npos);
  }

  // Stale derived column.
  write_text(path, std::string(kConvSetHeader) + "\n" +
                       "n1_c1x5x5_f1x3x3_s1x1_p0x0_d1x1_g1_b0,1,1,5,5,1,3,3,1,1,0,0,"
                       "1,1,1,0,3,3,999\n");
  CHECK_THROWS_AS(load_csv(path), ParseError);

  // Key disagrees with the fields.
  write_text(path, std::string(kConvSetHeader) + "\n" +
                       "n1_c1x5x5_f1x3x3_s1x1_p1x1_d1x1_g1_b0,1,1,5,5,1,3,3,1,1,0,0,"
                       "1,1,1,0,3,3,18\n");
  CHECK_THROWS_AS(load_csv(path), ParseError);

  write_text(path, std::string(kConvSetHeader) + "\n" +
                       "n1_c1x5x5_f1x3x3_s1x1_p0x0_d1x1_g1_b0,1,1,5,5,1,3,3,1,1,0,0,"
                       "1,1,1,2,3,3,18\n");
  CHECK_THROWS_AS(load_csv(path), ParseError);

  CHECK_THROWS_AS(load_csv(temp_file("does_not_exist.csv")), IoError);
}

TEST_CASE("stats") {
  ConvSet set;
  set.insert_unique(square(4, 8, 4, 1));
  set.insert_unique(square(8, 8, 4, 1));
  set.insert_unique(square(4, 8, 8, 1));
  set.insert_unique(square(4, 8, 4, 3, 0, 2));
  set.insert_unique(square(4, 8, 4, 3));
  const ConvSetStats s = stats(set);
  CHECK(s.total == 5);
  CHECK(s.pointwise == 3);
  CHECK(s.grouped == 1);
  CHECK(s.regular == 1);
  CHECK(s.regular + s.irregular == s.total);
  CHECK(s.in_channels.min == 4);
  CHECK(s.in_channels.max == 8);

  const ConvSetStats empty = stats(ConvSet{});
  CHECK(empty.total == 0);
  CHECK(empty.pointwise == 0);
  CHECK(empty.flops.max == 0);
}

TEST_CASE("class counts partition every fixture") {
  for (const char* name : {"dedup_40.csv", "classify_25.csv", "harness_25.csv"}) {
    const ConvSetStats s = stats(load_csv(kFixtures / name));
    CHECK(s.regular + s.irregular == s.total);
  }
}
