#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fusesim/geometry.hpp"
#include "fusesim/predictor.hpp"

namespace fusesim {

struct EnergyBreakdown {
  double sram_dynamic_nj = 0;
  double stt_dynamic_nj = 0;
  double leakage_nj = 0;
  double total_nj = 0;

  bool operator==(const EnergyBreakdown &) const = default;
};

struct AccessCounters {
  std::uint64_t sram_reads = 0;
  std::uint64_t sram_writes = 0;
  std::uint64_t stt_reads = 0;
  std::uint64_t stt_writes = 0;

  bool operator==(const AccessCounters &) const = default;
};

/// Per-access dynamic energy plus leakage power integrated over the run time
/// at the core clock. mW * us == nJ.
EnergyBreakdown energy(const AccessCounters &counters, const EnergyParams &params, std::uint64_t total_cycles);

/// One cache residency as seen by the read-level predictor: the class it was
/// predicted at fill time and the writes it received before leaving the L1D.
struct PredictionRecord {
  Prediction predicted = Prediction::Neutral;
  std::uint32_t writes = 0;
  std::uint64_t origin = 0;  // trace index of the request that caused the fill

  bool operator==(const PredictionRecord &) const = default;
};

struct PredictionTally {
  std::uint64_t true_count = 0;
  std::uint64_t false_count = 0;
  std::uint64_t neutral_count = 0;

  /// true / (true + false + neutral); 0 when empty.
  double accuracy() const;

  bool operator==(const PredictionTally &) const = default;
};

/// WM is right when the residency saw multiple writes; WORM and WORO are
/// right when it saw at most one.
PredictionTally score_predictions(std::span<const PredictionRecord> log);

struct StallCycles {
  std::uint64_t stt_write = 0;
  std::uint64_t tag_search = 0;
  std::uint64_t tag_queue_full = 0;
  std::uint64_t swap_full = 0;
  std::uint64_t mshr_full = 0;

  std::uint64_t total() const { return stt_write + tag_search + tag_queue_full + swap_full + mshr_full; }

  bool operator==(const StallCycles &) const = default;
};

struct SimReport {
  std::string preset;
  std::uint64_t accesses = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t sram_hits = 0;
  std::uint64_t stt_hits = 0;
  std::uint64_t misses = 0;
  double miss_rate = 0;
  std::uint64_t mshr_allocations = 0;
  std::uint64_t mshr_merges = 0;
  std::uint64_t bypasses = 0;
  StallCycles stalls;
  std::uint64_t tag_queue_flushes = 0;
  double flush_fraction = 0;
  std::uint64_t stt_searches = 0;
  std::uint64_t stt_search_cycles = 0;
  std::uint64_t searches_at_full = 0;
  std::uint64_t search_cycles_at_full = 0;
  std::uint64_t cbf_tests = 0;
  std::uint64_t cbf_false_positives = 0;
  double fp_rate = 0;
  PredictionTally predictions;
  double prediction_accuracy = 0;
  std::uint64_t migrations_sram_to_stt = 0;
  std::uint64_t migrations_stt_to_sram = 0;
  std::uint64_t writebacks = 0;
  std::uint64_t offchip_requests = 0;
  AccessCounters bank_accesses;
  std::uint64_t total_latency = 0;
  double amat_cycles = 0;
  std::uint64_t total_cycles = 0;
  EnergyBreakdown energy_nj;

  double mean_search_cycles() const;
  double mean_search_cycles_at_full() const;

  /// Recomputes every ratio field from the raw counters.
  void finalize(const EnergyParams &params);
  /// Adds the raw counters of another run (ratios are left for finalize()).
  void accumulate(const SimReport &other);

  bool operator==(const SimReport &) const = default;
};

std::vector<std::string> csv_columns();
std::string csv_header();
std::string to_csv_row(const SimReport &report);
SimReport from_csv_row(const std::string &row);

std::string to_json(const SimReport &report, int indent = 2);
SimReport from_json(const std::string &text);

enum class ReportFormat { Csv, Json };
std::string serialize(const SimReport &report, ReportFormat format);

}  // namespace fusesim
