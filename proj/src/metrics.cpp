#include "fusesim/metrics.hpp"

#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fusesim {

using nlohmann::ordered_json;

EnergyBreakdown energy(const AccessCounters &c, const EnergyParams &p, std::uint64_t total_cycles) {
  EnergyBreakdown e;
  e.sram_dynamic_nj = static_cast<double>(c.sram_reads) * p.sram_read_nj + static_cast<double>(c.sram_writes) * p.sram_write_nj;
  e.stt_dynamic_nj = static_cast<double>(c.stt_reads) * p.stt_read_nj + static_cast<double>(c.stt_writes) * p.stt_write_nj;
  const double seconds = static_cast<double>(total_cycles) / p.clock_hz;
  // mW * s = mJ = 1e6 nJ
  e.leakage_nj = (p.sram_leak_mw + p.stt_leak_mw) * seconds * 1e6;
  e.total_nj = e.sram_dynamic_nj + e.stt_dynamic_nj + e.leakage_nj;
  return e;
}

double PredictionTally::accuracy() const {
  const std::uint64_t n = true_count + false_count + neutral_count;
  return n == 0 ? 0.0 : static_cast<double>(true_count) / static_cast<double>(n);
}

PredictionTally score_predictions(std::span<const PredictionRecord> log) {
  PredictionTally t;
  for (const auto &r : log) {
    switch (r.predicted) {
      case Prediction::Neutral:
        ++t.neutral_count;
        break;
      case Prediction::WM:
        ++(r.writes > 1 ? t.true_count : t.false_count);
        break;
      case Prediction::WORM:
      case Prediction::WORO:
        ++(r.writes <= 1 ? t.true_count : t.false_count);
        break;
    }
  }
  return t;
}

double SimReport::mean_search_cycles() const {
  return stt_searches == 0 ? 0.0 : static_cast<double>(stt_search_cycles) / static_cast<double>(stt_searches);
}

double SimReport::mean_search_cycles_at_full() const {
  return searches_at_full == 0 ? 0.0
                               : static_cast<double>(search_cycles_at_full) / static_cast<double>(searches_at_full);
}

namespace {
double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

void SimReport::finalize(const EnergyParams &params) {
  miss_rate = ratio(misses, accesses);
  flush_fraction = ratio(tag_queue_flushes, accesses);
  fp_rate = ratio(cbf_false_positives, cbf_tests);
  prediction_accuracy = predictions.accuracy();
  amat_cycles = ratio(total_latency, accesses);
  energy_nj = energy(bank_accesses, params, total_cycles);
}

void SimReport::accumulate(const SimReport &o) {
  accesses += o.accesses;
  reads += o.reads;
  writes += o.writes;
  sram_hits += o.sram_hits;
  stt_hits += o.stt_hits;
  misses += o.misses;
  mshr_allocations += o.mshr_allocations;
  mshr_merges += o.mshr_merges;
  bypasses += o.bypasses;
  stalls.stt_write += o.stalls.stt_write;
  stalls.tag_search += o.stalls.tag_search;
  stalls.tag_queue_full += o.stalls.tag_queue_full;
  stalls.swap_full += o.stalls.swap_full;
  stalls.mshr_full += o.stalls.mshr_full;
  tag_queue_flushes += o.tag_queue_flushes;
  stt_searches += o.stt_searches;
  stt_search_cycles += o.stt_search_cycles;
  searches_at_full += o.searches_at_full;
  search_cycles_at_full += o.search_cycles_at_full;
  cbf_tests += o.cbf_tests;
  cbf_false_positives += o.cbf_false_positives;
  predictions.true_count += o.predictions.true_count;
  predictions.false_count += o.predictions.false_count;
  predictions.neutral_count += o.predictions.neutral_count;
  migrations_sram_to_stt += o.migrations_sram_to_stt;
  migrations_stt_to_sram += o.migrations_stt_to_sram;
  writebacks += o.writebacks;
  offchip_requests += o.offchip_requests;
  bank_accesses.sram_reads += o.bank_accesses.sram_reads;
  bank_accesses.sram_writes += o.bank_accesses.sram_writes;
  bank_accesses.stt_reads += o.bank_accesses.stt_reads;
  bank_accesses.stt_writes += o.bank_accesses.stt_writes;
  total_latency += o.total_latency;
  total_cycles += o.total_cycles;
}

namespace {

struct Field {
  const char *name;
  std::function<ordered_json(const SimReport &)> get;
  std::function<void(SimReport &, const ordered_json &)> set;
};

template <typename T>
Field field(const char *name, T SimReport::*member) {
  return Field{name, [member](const SimReport &r) { return ordered_json(r.*member); },
               [member](SimReport &r, const ordered_json &j) { r.*member = j.get<T>(); }};
}

template <typename Outer, typename T>
Field nested(const char *name, Outer SimReport::*outer, T Outer::*member) {
  return Field{name, [=](const SimReport &r) { return ordered_json((r.*outer).*member); },
               [=](SimReport &r, const ordered_json &j) { (r.*outer).*member = j.get<T>(); }};
}

const std::vector<Field> &fields() {
  static const std::vector<Field> f{
      field("preset", &SimReport::preset),
      field("accesses", &SimReport::accesses),
      field("reads", &SimReport::reads),
      field("writes", &SimReport::writes),
      field("sram_hits", &SimReport::sram_hits),
      field("stt_hits", &SimReport::stt_hits),
      field("misses", &SimReport::misses),
      field("miss_rate", &SimReport::miss_rate),
      field("mshr_allocations", &SimReport::mshr_allocations),
      field("mshr_merges", &SimReport::mshr_merges),
      field("bypasses", &SimReport::bypasses),
      nested("stall_stt_write", &SimReport::stalls, &StallCycles::stt_write),
      nested("stall_tag_search", &SimReport::stalls, &StallCycles::tag_search),
      nested("stall_tag_queue_full", &SimReport::stalls, &StallCycles::tag_queue_full),
      nested("stall_swap_full", &SimReport::stalls, &StallCycles::swap_full),
      nested("stall_mshr_full", &SimReport::stalls, &StallCycles::mshr_full),
      field("tag_queue_flushes", &SimReport::tag_queue_flushes),
      field("flush_fraction", &SimReport::flush_fraction),
      field("stt_searches", &SimReport::stt_searches),
      field("stt_search_cycles", &SimReport::stt_search_cycles),
      field("searches_at_full", &SimReport::searches_at_full),
      field("search_cycles_at_full", &SimReport::search_cycles_at_full),
      field("cbf_tests", &SimReport::cbf_tests),
      field("cbf_false_positives", &SimReport::cbf_false_positives),
      field("fp_rate", &SimReport::fp_rate),
      nested("pred_true", &SimReport::predictions, &PredictionTally::true_count),
      nested("pred_false", &SimReport::predictions, &PredictionTally::false_count),
      nested("pred_neutral", &SimReport::predictions, &PredictionTally::neutral_count),
      field("pred_accuracy", &SimReport::prediction_accuracy),
      field("migrations_sram_to_stt", &SimReport::migrations_sram_to_stt),
      field("migrations_stt_to_sram", &SimReport::migrations_stt_to_sram),
      field("writebacks", &SimReport::writebacks),
      field("offchip_requests", &SimReport::offchip_requests),
      nested("sram_reads", &SimReport::bank_accesses, &AccessCounters::sram_reads),
      nested("sram_writes", &SimReport::bank_accesses, &AccessCounters::sram_writes),
      nested("stt_reads", &SimReport::bank_accesses, &AccessCounters::stt_reads),
      nested("stt_writes", &SimReport::bank_accesses, &AccessCounters::stt_writes),
      field("total_latency", &SimReport::total_latency),
      field("amat_cycles", &SimReport::amat_cycles),
      field("total_cycles", &SimReport::total_cycles),
      nested("energy_sram_dynamic_nj", &SimReport::energy_nj, &EnergyBreakdown::sram_dynamic_nj),
      nested("energy_stt_dynamic_nj", &SimReport::energy_nj, &EnergyBreakdown::stt_dynamic_nj),
      nested("energy_leakage_nj", &SimReport::energy_nj, &EnergyBreakdown::leakage_nj),
      nested("energy_total_nj", &SimReport::energy_nj, &EnergyBreakdown::total_nj),
  };
  return f;
}

std::string csv_cell(const ordered_json &j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
    return buf;
  }
  return j.dump();
}

}  // namespace

std::vector<std::string> csv_columns() {
  std::vector<std::string> cols;
  for (const auto &f : fields()) cols.emplace_back(f.name);
  return cols;
}

std::string csv_header() {
  std::string out;
  for (const auto &f : fields()) {
    if (!out.empty()) out += ',';
    out += f.name;
  }
  return out;
}

std::string to_csv_row(const SimReport &report) {
  std::string out;
  bool first = true;
  for (const auto &f : fields()) {
    if (!first) out += ',';
    first = false;
    out += csv_cell(f.get(report));
  }
  return out;
}

SimReport from_csv_row(const std::string &row) {
  std::vector<std::string> cells;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!row.empty() && row.back() == ',') cells.emplace_back();
  const auto &fs = fields();
  if (cells.size() != fs.size()) throw std::invalid_argument("csv row has wrong column count");
  SimReport r;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const ordered_json probe = fs[i].get(r);
    if (probe.is_string()) {
      fs[i].set(r, ordered_json(cells[i]));
    } else if (probe.is_number_float()) {
      fs[i].set(r, ordered_json(std::stod(cells[i])));
    } else {
      fs[i].set(r, ordered_json(std::stoull(cells[i])));
    }
  }
  return r;
}

std::string to_json(const SimReport &report, int indent) {
  ordered_json j = ordered_json::object();
  for (const auto &f : fields()) j[f.name] = f.get(report);
  return j.dump(indent);
}

SimReport from_json(const std::string &text) {
  const auto j = ordered_json::parse(text);
  SimReport r;
  for (const auto &f : fields()) {
    if (!j.contains(f.name)) throw std::invalid_argument(std::string("report json missing field ") + f.name);
    f.set(r, j.at(f.name));
  }
  return r;
}

std::string serialize(const SimReport &report, ReportFormat format) {
  if (format == ReportFormat::Json) return to_json(report) + "\n";
  return csv_header() + "\n" + to_csv_row(report) + "\n";
}

}  // namespace fusesim
