#include "convbench/report.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "convbench/csv.hpp"
#include "convbench/error.hpp"

namespace convbench {

ResultRow to_result_row(const RunOutcome& o) {
  ResultRow row;
  row.key = o.key;
  row.mode = o.mode;
  row.status = o.status;
  row.runs = o.runs;
  row.warmups = o.warmups;
  row.correctness_max_rel_err = o.correctness_max_rel_err;
  if (o.stats) {
    const RunStatistics& s = *o.stats;
    for (Phase p : kAllPhases) {
      auto& cell = row.phases[index_of(p)];
      cell.ns_mean = s[p].mean_ns;
      cell.ns_min = s[p].min_ns;
      cell.calls = s[p].calls;
    }
    row.operation_ns_mean = s.operation_ns_mean;
    row.operation_ns_min = s.operation_ns_min;
    row.convolution_ns_mean = s.convolution_ns_mean;
    row.convolution_ns_min = s.convolution_ns_min;
  }
  return row;
}

namespace {

std::string cell(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}
std::string cell(const std::optional<std::int64_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::vector<std::string> results_columns() { return csv::split(kResultsHeader); }

}  // namespace

std::string results_to_csv(std::span<const ResultRow> rows) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.key << ',' << to_string(r.mode) << ',' << to_string(r.status)
        << ',' << r.runs << ',' << r.warmups;
    for (const auto& p : r.phases) {
      out << ',' << cell(p.ns_mean) << ',' << cell(p.ns_min) << ','
          << cell(p.calls);
    }
    out << ',' << cell(r.operation_ns_mean) << ',' << cell(r.operation_ns_min)
        << ',' << cell(r.convolution_ns_mean) << ','
        << cell(r.convolution_ns_min) << ',' << cell(r.correctness_max_rel_err)
        << '\n';
  }
  return out.str();
}

void write_results_csv(std::span<const ResultRow> rows,
                       const std::filesystem::path& path) {
  csv::write(path, results_to_csv(rows));
}

void write_results_csv(std::span<const RunOutcome> outcomes,
                       const std::filesystem::path& path) {
  std::vector<ResultRow> rows;
  rows.reserve(outcomes.size());
  for (const auto& o : outcomes) rows.push_back(to_result_row(o));
  write_results_csv(rows, path);
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  const auto cols = csv::index_columns(table.header, results_columns());

  std::vector<ResultRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const std::size_t line = r + 1;
    auto text = [&](const std::string& name) -> const std::string& {
      return cells[cols.at(name)];
    };
    auto opt_int = [&](const std::string& name) -> std::optional<std::int64_t> {
      const auto& s = text(name);
      if (s.empty()) return std::nullopt;
      auto v = csv::parse_int(s);
      if (!v) throw ParseError(line, "column '" + name + "' is not an integer");
      return v;
    };
    auto opt_double = [&](const std::string& name) -> std::optional<double> {
      const auto& s = text(name);
      if (s.empty()) return std::nullopt;
      auto v = csv::parse_double(s);
      if (!v) throw ParseError(line, "column '" + name + "' is not a number");
      return v;
    };

    ResultRow row;
    row.key = text("key");
    if (row.key.empty()) throw ParseError(line, "empty key");
    auto mode = parse_run_mode(text("mode"));
    if (!mode) throw ParseError(line, "unknown mode '" + text("mode") + "'");
    row.mode = *mode;
    auto status = parse_run_status(text("status"));
    if (!status) throw ParseError(line, "unknown status '" + text("status") + "'");
    row.status = *status;
    auto runs = opt_int("runs");
    auto warmups = opt_int("warmups");
    if (!runs || !warmups) throw ParseError(line, "runs/warmups are required");
    row.runs = *runs;
    row.warmups = *warmups;
    for (Phase p : kAllPhases) {
      const std::string prefix(phase_name(p));
      auto& c = row.phases[index_of(p)];
      c.ns_mean = opt_double(prefix + "_ns_mean");
      c.ns_min = opt_int(prefix + "_ns_min");
      c.calls = opt_int(prefix + "_calls");
    }
    row.operation_ns_mean = opt_double("operation_ns_mean");
    row.operation_ns_min = opt_int("operation_ns_min");
    row.convolution_ns_mean = opt_double("convolution_ns_mean");
    row.convolution_ns_min = opt_int("convolution_ns_min");
    row.correctness_max_rel_err = opt_double("correctness_max_rel_err");
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Speedups

namespace {

std::optional<double> ratio(const std::optional<double>& baseline,
                            const std::optional<double>& main) {
  if (!baseline || !main || *baseline <= 0 || *main <= 0) return std::nullopt;
  return *baseline / *main;
}

bool joinable(const ResultRow& r) {
  return r.status == RunStatus::kOk && r.has_timings();
}

std::string why_not(const ResultRow& r) {
  if (r.status != RunStatus::kOk) {
    return "status " + std::string(to_string(r.status));
  }
  return "no timing cells";
}

}  // namespace

SpeedupSet compute_speedups(std::span<const ResultRow> main_rows,
                            std::span<const ResultRow> baseline_rows) {
  std::unordered_map<std::string, const ResultRow*> baseline;
  for (const auto& r : baseline_rows) baseline.emplace(r.key, &r);
  std::unordered_set<std::string> seen_in_main;

  SpeedupSet out;
  for (std::size_t i = 0; i < main_rows.size(); ++i) {
    const ResultRow& m = main_rows[i];
    seen_in_main.insert(m.key);
    auto it = baseline.find(m.key);
    if (it == baseline.end()) {
      out.unmatched.push_back({m.key, "baseline", "missing"});
      continue;
    }
    const ResultRow& b = *it->second;
    const bool m_ok = joinable(m), b_ok = joinable(b);
    if (!m_ok || !b_ok) {
      const std::string side = !m_ok && !b_ok ? "both" : (!m_ok ? "main" : "baseline");
      out.unmatched.push_back({m.key, side, !m_ok ? why_not(m) : why_not(b)});
      continue;
    }

    SpeedupRow row;
    row.index = i;
    row.key = m.key;
    try {
      row.flops = flop_count(parse_key(m.key));
    } catch (const InvalidDescriptor&) {
      row.flops.reset();
    }
    row.convolution_speedup = ratio(b.convolution_ns_mean, m.convolution_ns_mean);
    row.operation_speedup = ratio(b.operation_ns_mean, m.operation_ns_mean);
    for (Phase p : kAllPhases) {
      row.phase_ratio[index_of(p)] = ratio(b[p].ns_mean, m[p].ns_mean);
    }
    out.rows.push_back(std::move(row));
  }
  for (const auto& r : baseline_rows) {
    if (!seen_in_main.contains(r.key)) {
      out.unmatched.push_back({r.key, "main", "missing"});
    }
  }
  if (out.rows.empty()) {
    throw Error("no operation joins between the main and baseline results");
  }
  return out;
}

std::string speedups_to_csv(std::span<const SpeedupRow> rows) {
  std::ostringstream out;
  out << kSpeedupHeader << '\n';
  for (const auto& r : rows) {
    out << r.index << ',' << r.key << ',' << cell(r.flops) << ','
        << cell(r.convolution_speedup) << ',' << cell(r.operation_speedup);
    for (const auto& p : r.phase_ratio) out << ',' << cell(p);
    out << '\n';
  }
  return out.str();
}

std::string reconcile_to_csv(std::span<const Unmatched> unmatched) {
  std::ostringstream out;
  out << kReconcileHeader << '\n';
  for (const auto& u : unmatched) {
    out << u.key << ',' << u.side << ',' << u.reason << '\n';
  }
  return out.str();
}

namespace {

struct Tally {
  std::size_t faster = 0, slower = 0;
  double speedup_sum = 0, slowdown_sum = 0;

  void add(const std::optional<double>& r) {
    if (!r) return;
    if (*r > 1) {
      ++faster;
      speedup_sum += (*r - 1) * 100;
    } else if (*r < 1) {
      ++slower;
      slowdown_sum += (1 / *r - 1) * 100;
    }
  }

  PhaseSpeedupSummary finish() const {
    PhaseSpeedupSummary s;
    s.faster = faster;
    s.slower = slower;
    if (faster) s.mean_speedup_pct = speedup_sum / static_cast<double>(faster);
    if (slower) s.mean_slowdown_pct = slowdown_sum / static_cast<double>(slower);
    return s;
  }
};

}  // namespace

SpeedupSummary summarize(std::span<const SpeedupRow> rows) {
  if (rows.empty()) throw Error("summarize: no speedup rows");
  SpeedupSummary s;
  s.keys = rows.size();
  Tally conv, op;
  std::array<Tally, kPhaseCount> phases{};
  for (const auto& r : rows) {
    if (r.convolution_speedup) {
      ++s.convolution_defined;
      if (*r.convolution_speedup > 1) ++s.convolution_faster;
    }
    if (r.operation_speedup) {
      ++s.operation_defined;
      if (*r.operation_speedup > 1) ++s.operation_faster;
    }
    conv.add(r.convolution_speedup);
    op.add(r.operation_speedup);
    for (Phase p : kAllPhases) phases[index_of(p)].add(r[p]);
  }
  if (s.convolution_defined) {
    s.faster_fraction = static_cast<double>(s.convolution_faster) /
                        static_cast<double>(s.convolution_defined);
  }
  if (s.operation_defined) {
    s.operation_faster_fraction = static_cast<double>(s.operation_faster) /
                                  static_cast<double>(s.operation_defined);
  }
  s.convolution = conv.finish();
  s.operation = op.finish();
  for (Phase p : kAllPhases) s.phases[index_of(p)] = phases[index_of(p)].finish();
  return s;
}

std::string format_summary(const SpeedupSummary& s) {
  std::ostringstream out;
  auto pct = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string("n/a");
  };
  auto scope = [&](const std::string& name, const PhaseSpeedupSummary& p) {
    out << name << ".faster: " << p.faster << '\n'
        << name << ".slower: " << p.slower << '\n'
        << name << ".mean_speedup_pct: " << pct(p.mean_speedup_pct) << '\n'
        << name << ".mean_slowdown_pct: " << pct(p.mean_slowdown_pct) << '\n';
  };
  out << "keys: " << s.keys << '\n'
      << "convolution_faster_fraction: " << csv::format_double(s.faster_fraction)
      << " (" << s.convolution_faster << "/" << s.convolution_defined << ")\n"
      << "operation_faster_fraction: "
      << csv::format_double(s.operation_faster_fraction) << " ("
      << s.operation_faster << "/" << s.operation_defined << ")\n";
  scope("convolution", s.convolution);
  scope("operation", s.operation);
  for (Phase p : kAllPhases) scope(std::string(phase_name(p)), s[p]);
  return out.str();
}

// ---------------------------------------------------------------------------
// Breakdown

std::vector<BreakdownRow> breakdown_dataset(
    std::span<const ResultRow> main_rows,
    std::span<const ResultRow> baseline_rows) {
  std::unordered_map<std::string, const ResultRow*> baseline;
  for (const auto& r : baseline_rows) baseline.emplace(r.key, &r);

  std::vector<BreakdownRow> out;
  for (std::size_t i = 0; i < main_rows.size(); ++i) {
    const ResultRow& m = main_rows[i];
    auto it = baseline.find(m.key);
    if (it == baseline.end() || !joinable(m) || !joinable(*it->second)) continue;
    for (const auto& [side, row] :
         {std::pair<const char*, const ResultRow*>{"main", &m},
          std::pair<const char*, const ResultRow*>{"baseline", it->second}}) {
      const double total_ms = *row->operation_ns_mean / 1e6;
      for (Phase p : kAllPhases) {
        BreakdownRow b;
        b.index = i;
        b.key = m.key;
        b.side = side;
        b.phase = p;
        b.time_ms = (*row)[p].ns_mean.value_or(0.0) / 1e6;
        b.operation_ms = total_ms;
        out.push_back(std::move(b));
      }
    }
  }
  return out;
}

std::string breakdown_to_csv(std::span<const BreakdownRow> rows) {
  std::ostringstream out;
  out << kBreakdownHeader << '\n';
  for (const auto& r : rows) {
    out << r.index << ',' << r.key << ',' << r.side << ','
        << phase_name(r.phase) << ',' << csv::format_double(r.time_ms) << ','
        << csv::format_double(r.operation_ms) << '\n';
  }
  return out.str();
}

}  // namespace convbench
