#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fusesim/geometry.hpp"
#include "fusesim/trace.hpp"

namespace fusesim {

/// 9-bit PC signature of the request that filled a line.
using PcSignature = std::uint16_t;

struct CacheLine {
  std::uint32_t tag = 0;
  bool valid = false;
  bool dirty = false;
  PcSignature fill_sig = 0;
  std::uint32_t lru_rank = 0;     // 0 is most recently used
  std::uint64_t insert_seq = 0;   // FIFO age
};

struct EvictedLine {
  LineAddr line;
  bool dirty = false;
  PcSignature fill_sig = 0;

  bool operator==(const EvictedLine &) const = default;
};

struct AccessOutcome {
  bool hit = false;
  bool dirty_set = false;
  std::uint32_t latency_cycles = 0;
};

enum class Replacement : std::uint8_t { LRU, FIFO };

/// Set-associative tag/state array. Used for the SRAM bank (LRU), the STT-MRAM
/// bank in set-associative mode (FIFO) and the optional L2.
class SetAssocCache {
 public:
  SetAssocCache(CacheGeometry geom, Replacement policy, std::uint32_t read_cycles = 1, std::uint32_t write_cycles = 1);

  /// Pure probe; never touches replacement state.
  std::optional<std::uint32_t> lookup(LineAddr line) const;
  bool contains(LineAddr line) const { return lookup(line).has_value(); }

  /// Probe plus replacement update on hit; a write hit marks the line dirty.
  /// Misses do not allocate.
  AccessOutcome access(LineAddr line, Op op);

  /// Inserts as MRU (or newest). Returns the victim if the set was full.
  std::optional<EvictedLine> fill(LineAddr line, PcSignature fill_sig, bool dirty);

  /// Returns the line that fill() would evict, without changing anything.
  std::optional<EvictedLine> peek_victim(LineAddr line) const;

  bool invalidate(LineAddr line);
  void mark_dirty(LineAddr line);
  std::optional<CacheLine> line_state(LineAddr line) const;

  const CacheGeometry &geometry() const { return geom_; }
  Replacement policy() const { return policy_; }
  std::size_t valid_count() const;
  void for_each_valid(const std::function<void(LineAddr, const CacheLine &)> &fn) const;
  const CacheLine &way(std::uint32_t set, std::uint32_t way) const { return lines_[set * geom_.ways + way]; }

 private:
  CacheLine *set_begin(std::uint32_t set) { return &lines_[std::size_t{set} * geom_.ways]; }
  const CacheLine *set_begin(std::uint32_t set) const { return &lines_[std::size_t{set} * geom_.ways]; }
  std::uint32_t victim_way(std::uint32_t set) const;
  void touch(std::uint32_t set, std::uint32_t way);

  CacheGeometry geom_;
  Replacement policy_;
  std::uint32_t read_cycles_;
  std::uint32_t write_cycles_;
  std::uint64_t next_seq_ = 0;
  std::vector<CacheLine> lines_;
};

/// SRAM bank: LRU, one-cycle reads and writes.
class SramBank : public SetAssocCache {
 public:
  explicit SramBank(CacheGeometry geom, const TimingParams &timing = {})
      : SetAssocCache(geom, Replacement::LRU, timing.sram_read_cyc, timing.sram_write_cyc) {}
};

}  // namespace fusesim
