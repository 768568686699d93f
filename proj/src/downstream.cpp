#include "fusesim/downstream.hpp"

#include <bit>
#include <stdexcept>

namespace fusesim {

CacheGeometry DownstreamConfig::l2_geometry() const {
  const std::uint64_t sets = l2_capacity_bytes / (std::uint64_t{l2_ways} * kLineBytes);
  if (sets == 0) throw std::invalid_argument("L2 capacity smaller than one set");
  return CacheGeometry{static_cast<std::uint32_t>(std::bit_floor(sets)), l2_ways};
}

Downstream::Downstream(const DownstreamConfig &config) : config_(config) {
  if (config_.l2_round_trip_cycles == 0 || config_.dram_extra_cycles == 0) {
    throw std::invalid_argument("downstream latencies must be positive");
  }
  if (config_.l2_enabled) l2_.emplace(config_.l2_geometry(), Replacement::LRU);
}

Cycle Downstream::request(LineAddr line, bool is_writeback, Cycle now) {
  ++requests_;
  Cycle latency = config_.l2_round_trip_cycles;
  if (!l2_) {
    latency += config_.dram_extra_cycles;
  } else if (l2_->access(line, is_writeback ? Op::Write : Op::Read).hit) {
    ++l2_hits_;
  } else {
    ++l2_misses_;
    // Writebacks allocate without fetching; reads pay the DRAM trip.
    if (!is_writeback) latency += config_.dram_extra_cycles;
    l2_->fill(line, 0, is_writeback);
  }
  const Cycle done = now + latency;
  if (is_writeback) {
    ++writebacks_;
  } else {
    inflight_.push(Inflight{done, seq_++, line});
  }
  return done;
}

std::vector<DownstreamCompletion> Downstream::collect(Cycle now) {
  std::vector<DownstreamCompletion> out;
  while (!inflight_.empty() && inflight_.top().cycle <= now) {
    out.push_back({inflight_.top().line, inflight_.top().cycle});
    inflight_.pop();
  }
  return out;
}

std::optional<Cycle> Downstream::next_completion() const {
  if (inflight_.empty()) return std::nullopt;
  return inflight_.top().cycle;
}

}  // namespace fusesim
