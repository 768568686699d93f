#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fusesim/config.hpp"
#include "fusesim/controller.hpp"
#include "fusesim/metrics.hpp"
#include "fusesim/trace.hpp"

namespace fusesim {

struct RunResult {
  SimReport report;
  std::vector<RequestState> requests;  // filled when config.keep_request_log is set
  std::vector<PredictionRecord> predictions;
  std::optional<ReadLevelPredictor> predictor;  // final state, when the preset has one
  std::uint64_t invariant_checks = 0;
  std::uint64_t invariant_violations = 0;
  bool swap_queue_paired = true;  // pairing held at every cycle boundary (checked with check_invariants)
};

/// Runs `trace` through one L1D instance from a cold start.
///
/// Each cycle: controller step (fills, tag queue), then in-order issue of up
/// to issue_width records whose cycle has arrived. A record the controller
/// cannot accept stalls issue and the stall is charged to its cause. Idle
/// stretches are skipped.
RunResult run(std::span<const TraceRecord> trace, const SimConfig &config);

/// `passes` cold runs of the same trace, counters summed.
SimReport run_passes(std::span<const TraceRecord> trace, const SimConfig &config, unsigned passes);

}  // namespace fusesim
