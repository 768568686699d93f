#include "fusesim/engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace fusesim {

namespace {

void charge(StallCycles &s, StallCause cause, std::uint64_t cycles) {
  switch (cause) {
    case StallCause::SttWrite: s.stt_write += cycles; break;
    case StallCause::TagSearch: s.tag_search += cycles; break;
    case StallCause::TagQueueFull: s.tag_queue_full += cycles; break;
    case StallCause::SwapFull: s.swap_full += cycles; break;
    case StallCause::MshrFull: s.mshr_full += cycles; break;
  }
}

}  // namespace

RunResult run(std::span<const TraceRecord> trace, const SimConfig &config) {
  Controller ctl(config);
  RunResult out;
  StallCycles stalls;
  std::size_t next = 0;
  Cycle now = 0;
  const std::uint32_t width = std::max<std::uint32_t>(1, config.issue_width);

  for (;;) {
    ctl.step(now);
    if (config.check_invariants && !ctl.swap_queue_paired()) out.swap_queue_paired = false;

    std::uint32_t issued = 0;
    std::optional<StallCause> blocked;
    while (issued < width && next < trace.size() && trace[next].cycle <= now) {
      blocked = ctl.blocker(trace[next], now);
      if (blocked) break;
      ctl.handle(trace[next], now);
      ++next;
      ++issued;
    }

    const bool trace_left = next < trace.size();
    if (!trace_left && ctl.quiescent()) break;

    const std::optional<Cycle> event = ctl.next_event(now);
    Cycle to;
    if (blocked) {
      if (!event) throw std::logic_error("issue blocked with nothing in flight");
      to = *event;
      charge(stalls, *blocked, to - now);
    } else if (trace_left && trace[next].cycle <= now) {
      to = now + 1;  // issue width used up
    } else if (trace_left) {
      to = event ? std::min(*event, Cycle{trace[next].cycle}) : Cycle{trace[next].cycle};
    } else {
      if (!event) throw std::logic_error("controller not quiescent but has no pending event");
      to = *event;
    }
    now = std::max(to, now + 1);
  }

  ctl.finish();
  SimReport r = ctl.snapshot();
  r.stalls = stalls;
  Cycle last = std::max(now, ctl.busy_until());
  for (const RequestState &q : ctl.requests()) {
    if (!q.done) throw std::logic_error("request never completed");
    last = std::max(last, *q.done);
  }
  r.total_cycles = trace.empty() ? 0 : last;
  r.finalize(config.preset.energy);

  out.report = std::move(r);
  out.predictions = ctl.prediction_log();
  if (ctl.predictor()) out.predictor = *ctl.predictor();
  out.invariant_checks = ctl.invariant_checks();
  out.invariant_violations = ctl.invariant_violations();
  if (config.keep_request_log) out.requests = ctl.requests();
  return out;
}

SimReport run_passes(std::span<const TraceRecord> trace, const SimConfig &config, unsigned passes) {
  SimReport total;
  for (unsigned i = 0; i < passes; ++i) {
    const SimReport r = run(trace, config).report;
    if (i == 0) {
      total = r;
    } else {
      total.accumulate(r);
    }
  }
  total.finalize(config.preset.energy);
  return total;
}

}  // namespace fusesim
