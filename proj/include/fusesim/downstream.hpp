#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "fusesim/sram_bank.hpp"

namespace fusesim {

struct DownstreamConfig {
  bool l2_enabled = false;
  std::uint64_t l2_capacity_bytes = 786 * 1024;
  std::uint32_t l2_ways = 8;
  std::uint32_t l2_round_trip_cycles = 60;
  std::uint32_t dram_extra_cycles = 160;

  /// Power-of-two set count that fits l2_capacity_bytes.
  CacheGeometry l2_geometry() const;
};

struct DownstreamCompletion {
  LineAddr line;
  Cycle cycle = 0;
};

/// Fixed-latency L2 + DRAM behind the interconnect. Every request() is one
/// off-chip memory reference as seen from the L1D.
class Downstream {
 public:
  explicit Downstream(const DownstreamConfig &config = {});

  /// Returns the completion cycle. Writebacks never produce a completion.
  Cycle request(LineAddr line, bool is_writeback, Cycle now);
  /// Pops completions due at or before `now`, oldest first.
  std::vector<DownstreamCompletion> collect(Cycle now);
  std::optional<Cycle> next_completion() const;
  bool idle() const { return inflight_.empty(); }

  std::uint64_t requests() const { return requests_; }
  std::uint64_t writebacks() const { return writebacks_; }
  std::uint64_t l2_hits() const { return l2_hits_; }
  std::uint64_t l2_misses() const { return l2_misses_; }
  const DownstreamConfig &config() const { return config_; }

 private:
  struct Inflight {
    Cycle cycle;
    std::uint64_t seq;
    LineAddr line;
    bool operator>(const Inflight &o) const { return cycle != o.cycle ? cycle > o.cycle : seq > o.seq; }
  };

  DownstreamConfig config_;
  std::optional<SetAssocCache> l2_;
  std::priority_queue<Inflight, std::vector<Inflight>, std::greater<>> inflight_;
  std::uint64_t seq_ = 0;
  std::uint64_t requests_ = 0;
  std::uint64_t writebacks_ = 0;
  std::uint64_t l2_hits_ = 0;
  std::uint64_t l2_misses_ = 0;
};

}  // namespace fusesim
