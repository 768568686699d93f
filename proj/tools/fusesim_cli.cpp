// fusesim: run, compare and sweep L1D configurations over a trace.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "fusesim/config.hpp"
#include "fusesim/engine.hpp"
#include "fusesim/metrics.hpp"
#include "fusesim/trace.hpp"
#include "json.hpp"

using namespace fusesim;
using nlohmann::ordered_json;

namespace {

constexpr int kConfigError = 2;
constexpr int kTraceError = 3;

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputOptions {
  std::string trace_path;
  std::string synthetic_path;
  std::vector<std::string> mix;
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

void add_input_options(CLI::App *cmd, InputOptions &o) {
  cmd->add_option("trace", o.trace_path, "Trace file (cycle,warp,pc,addr,R|W); '-' reads stdin");
  cmd->add_option("--synthetic", o.synthetic_path, "Generate the trace from a mix spec file");
  cmd->add_option("--mix", o.mix, "Mix spec key=value for a synthetic trace (repeatable)");
  cmd->add_option("--config", o.config_path, "Config file applied before overrides");
  cmd->add_option("-O,--override", o.overrides, "Config override key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "Seed for the synthetic generator and the CBF hashes");
  cmd->add_option("-o,--out", o.out, "Output file (default stdout)");
  cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

ReportFormat format_of(const InputOptions &o) { return o.format == "json" ? ReportFormat::Json : ReportFormat::Csv; }

SimConfig build_config(const std::string &preset_name, const InputOptions &o) {
  SimConfig c = make_config(preset_name);
  // A preset line in the config file replaces --preset.
  if (!o.config_path.empty()) c = load_config_file(o.config_path, c);
  c.seed = o.seed;
  for (const auto &kv : o.overrides) apply_override(c, kv);
  c.validate();
  return c;
}

Trace load_input(const InputOptions &o, std::uint32_t warps) {
  const bool synthetic = !o.synthetic_path.empty() || !o.mix.empty();
  if (synthetic && !o.trace_path.empty()) throw ConfigError("give either a trace file or a synthetic mix, not both");
  if (synthetic) {
    MixSpec spec = o.synthetic_path.empty() ? MixSpec{} : load_mix_spec_file(o.synthetic_path);
    for (const auto &kv : o.mix) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidMix("expected key=value, got '" + kv + "'");
      apply_mix_key(spec, kv.substr(0, eq), kv.substr(eq + 1));
    }
    spec.validate();
    return generate_synthetic(spec, o.seed);
  }
  if (o.trace_path.empty()) throw ConfigError("no trace given (pass a file, '-', --synthetic or --mix)");
  try {
    if (o.trace_path == "-") return parse_trace(std::cin, warps);
    if (!std::filesystem::exists(o.trace_path)) throw TraceError("cannot open trace " + o.trace_path);
    return load_trace_file(o.trace_path, warps);
  } catch (const MalformedLine &e) {
    throw TraceError(o.trace_path + ": " + e.what());
  }
}

// Writes next to the destination and renames, so readers never see a partial file.
void emit(const std::string &path, const std::string &text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  const std::filesystem::path dest(path);
  std::filesystem::path tmp = dest;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, dest);
}

ordered_json report_json(const SimReport &r) { return ordered_json::parse(to_json(r, -1)); }

// ---------------------------------------------------------------------------

struct RunOptions {
  InputOptions in;
  std::string preset = "Dy-FUSE";
  std::string predictor_dump;
};

int cmd_run(const RunOptions &o) {
  const SimConfig c = build_config(o.preset, o.in);
  const Trace t = load_input(o.in, c.warps);
  const RunResult r = run(t, c);
  emit(o.in.out, serialize(r.report, format_of(o.in)));
  if (!o.predictor_dump.empty()) {
    if (!r.predictor) throw ConfigError(o.preset + " has no read-level predictor to dump");
    std::ostringstream ss;
    r.predictor->dump_csv(ss);
    emit(o.predictor_dump, ss.str());
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct CompareOptions {
  InputOptions in;
  std::vector<std::string> presets{"L1-SRAM", "FA-SRAM", "By-NVM", "Hybrid", "Base-FUSE", "FA-FUSE", "Dy-FUSE"};
};

double normalized(double value, double base) {
  if (base == 0) return value == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  return value / base;
}

struct NormColumn {
  const char *name;
  double (*get)(const SimReport &);
};

const std::vector<NormColumn> &norm_columns() {
  static const std::vector<NormColumn> cols{
      {"norm_amat_cycles", [](const SimReport &r) { return r.amat_cycles; }},
      {"norm_miss_rate", [](const SimReport &r) { return r.miss_rate; }},
      {"norm_total_cycles", [](const SimReport &r) { return static_cast<double>(r.total_cycles); }},
      {"norm_stall_cycles", [](const SimReport &r) { return static_cast<double>(r.stalls.total()); }},
      {"norm_offchip_requests", [](const SimReport &r) { return static_cast<double>(r.offchip_requests); }},
      {"norm_energy_total_nj", [](const SimReport &r) { return r.energy_nj.total_nj; }},
  };
  return cols;
}

std::string cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_compare(const CompareOptions &o) {
  if (o.presets.empty()) throw ConfigError("no presets to compare");
  std::vector<SimConfig> configs;
  for (const auto &p : o.presets) configs.push_back(build_config(p, o.in));
  const Trace t = load_input(o.in, configs.front().warps);

  std::vector<std::future<SimReport>> jobs;
  for (const auto &c : configs) jobs.push_back(std::async(std::launch::async, [&t, c] { return run(t, c).report; }));
  std::vector<SimReport> reports;
  for (auto &j : jobs) reports.push_back(j.get());

  const SimReport &base = reports.front();
  if (format_of(o.in) == ReportFormat::Json) {
    ordered_json rows = ordered_json::array();
    for (const auto &r : reports) {
      ordered_json row = report_json(r);
      for (const auto &col : norm_columns()) row[col.name] = normalized(col.get(r), col.get(base));
      rows.push_back(std::move(row));
    }
    emit(o.in.out, rows.dump(2) + "\n");
    return 0;
  }
  std::string text = csv_header();
  for (const auto &col : norm_columns()) text += std::string(",") + col.name;
  text += "\n";
  for (const auto &r : reports) {
    text += to_csv_row(r);
    for (const auto &col : norm_columns()) text += "," + cell(normalized(col.get(r), col.get(base)));
    text += "\n";
  }
  emit(o.in.out, text);
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepOptions {
  InputOptions in;
  std::string axis;
  std::string preset = "Dy-FUSE";
};

struct SweepPoint {
  std::string label;
  std::string key;
  std::string value;
};

std::vector<SweepPoint> sweep_points(const std::string &axis) {
  if (axis == "sram_ratio") {
    return {{"1/16", "sram_ratio", "0.0625"},
            {"1/8", "sram_ratio", "0.125"},
            {"1/4", "sram_ratio", "0.25"},
            {"1/2", "sram_ratio", "0.5"},
            {"3/4", "sram_ratio", "0.75"}};
  }
  if (axis == "cbf_hashes") {
    return {{"1", "cbf.hashes", "1"}, {"2", "cbf.hashes", "2"}, {"3", "cbf.hashes", "3"}, {"4", "cbf.hashes", "4"}};
  }
  if (axis == "cbf_slots") {
    return {{"32", "cbf.counters", "32"}, {"64", "cbf.counters", "64"}, {"128", "cbf.counters", "128"}};
  }
  throw ConfigError("unknown sweep axis: " + axis);
}

int cmd_sweep(const SweepOptions &o) {
  const auto points = sweep_points(o.axis);
  std::vector<SimConfig> configs;
  for (const auto &p : points) {
    SimConfig c = build_config(o.preset, o.in);
    apply_override(c, p.key, p.value);
    c.validate();
    configs.push_back(std::move(c));
  }
  const Trace t = load_input(o.in, configs.front().warps);

  // Points run in parallel; rows come out in point order.
  std::vector<std::future<SimReport>> jobs;
  for (const auto &c : configs) jobs.push_back(std::async(std::launch::async, [&t, c] { return run(t, c).report; }));

  if (format_of(o.in) == ReportFormat::Json) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
      ordered_json row;
      row["axis"] = o.axis;
      row["point"] = points[i].label;
      const ordered_json report = report_json(jobs[i].get());
      for (const auto &[k, v] : report.items()) row[k] = v;
      rows.push_back(std::move(row));
    }
    emit(o.in.out, rows.dump(2) + "\n");
    return 0;
  }
  std::string text = "axis,point," + csv_header() + "\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    text += o.axis + "," + points[i].label + "," + to_csv_row(jobs[i].get()) + "\n";
  }
  emit(o.in.out, text);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_gen(const InputOptions &o) {
  const Trace t = load_input(o, 48);
  std::ostringstream ss;
  write_trace(ss, t);
  emit(o.out, ss.str());
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Trace-driven simulator of a hybrid SRAM / STT-MRAM GPU L1 data cache"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto *run_cmd = app.add_subcommand("run", "Run one configuration and print its report");
  add_input_options(run_cmd, run_opts.in);
  run_cmd->add_option("-p,--preset", run_opts.preset, "Preset name")->capture_default_str();
  run_cmd->add_option("--dump-predictor", run_opts.predictor_dump, "Write the predictor history table as CSV");

  CompareOptions cmp_opts;
  auto *cmp_cmd = app.add_subcommand("compare", "Run several presets on one trace, normalized to the first");
  add_input_options(cmp_cmd, cmp_opts.in);
  cmp_cmd->add_option("--presets", cmp_opts.presets, "Comma-separated preset list")->delimiter(',');

  SweepOptions sweep_opts;
  auto *sweep_cmd = app.add_subcommand("sweep", "Sweep the SRAM:STT ratio or CBF parameters");
  add_input_options(sweep_cmd, sweep_opts.in);
  sweep_cmd->add_option("--axis", sweep_opts.axis, "sram_ratio, cbf_hashes or cbf_slots")->required();
  sweep_cmd->add_option("-p,--preset", sweep_opts.preset, "Preset to sweep")->capture_default_str();

  InputOptions gen_opts;
  auto *gen_cmd = app.add_subcommand("gen", "Write a synthetic trace");
  add_input_options(gen_cmd, gen_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(run_opts);
    if (*cmp_cmd) return cmd_compare(cmp_opts);
    if (*sweep_cmd) return cmd_sweep(sweep_opts);
    return cmd_gen(gen_opts);
  } catch (const TraceError &e) {
    std::cerr << "fusesim: " << e.what() << "\n";
    return kTraceError;
  } catch (const std::invalid_argument &e) {
    // ConfigError, UnknownPreset and InvalidMix.
    std::cerr << "fusesim: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception &e) {
    std::cerr << "fusesim: " << e.what() << "\n";
    return 1;
  }
}
