#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fusesim/cbf.hpp"
#include "fusesim/sram_bank.hpp"

namespace fusesim {

struct SttParams {
  CacheGeometry geom{1, 512};
  bool approx_fa = true;
  unsigned cbf_hashes = 3;
  unsigned cbf_counters = 128;
  unsigned slots_per_partition = 4;  // one partition polled per cycle by 4 comparators
  std::uint64_t hash_seed = 0x5EED;
  std::uint32_t read_cycles = 1;
  std::uint32_t write_cycles = 5;
  std::uint32_t tag_queue_capacity = 16;
};

struct SearchResult {
  bool hit = false;
  std::uint32_t slot = 0;           // slot (approx mode) or way (set-associative mode)
  std::uint32_t search_cycles = 1;
  std::uint32_t positives = 0;      // partitions whose filter tested Positive
  std::uint32_t false_positives = 0;
  std::uint32_t filters_tested = 0;
};

enum class TagCmd : std::uint8_t { Read, Write, F };

struct TagQueueEntry {
  TagCmd cmd = TagCmd::Read;
  LineAddr line;
  std::uint64_t token = 0;  // request id (Read/Write) or swap-buffer slot (F)
  bool dirty = false;       // F payload
  PcSignature fill_sig = 0; // F payload
};

enum class EnqueueResult : std::uint8_t { Accepted, QueueFull };

struct CompletionEvent {
  TagCmd cmd = TagCmd::Read;
  LineAddr line;
  std::uint64_t token = 0;
  Cycle start = 0;
  Cycle done = 0;
  bool hit = false;
  std::uint32_t search_cycles = 0;
  std::optional<EvictedLine> evicted;  // F: FIFO victim pushed out by the insert
};

class DuplicateInsert : public std::logic_error {
 public:
  DuplicateInsert() : std::logic_error("line inserted into STT-MRAM twice") {}
};

struct SttStats {
  std::uint64_t searches = 0;
  std::uint64_t search_cycles = 0;
  std::uint64_t searches_at_full = 0;
  std::uint64_t search_cycles_at_full = 0;
  std::uint64_t cbf_tests = 0;
  std::uint64_t cbf_false_positives = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t flushes = 0;
};

/// STT-MRAM bank with its tag queue.
///
/// In approximately fully-associative mode the slots are split into
/// partitions of `slots_per_partition` consecutive slots, each guarded by a
/// counting bloom filter. A search tests every filter (free), then polls the
/// positive partitions in ascending order, one per cycle. Replacement is a
/// global FIFO cursor. In set-associative mode the bank is a FIFO-per-set
/// array with one-cycle search.
class SttBank {
 public:
  explicit SttBank(const SttParams &params);

  SearchResult search(LineAddr line);
  std::optional<EvictedLine> insert(LineAddr line, PcSignature fill_sig, bool dirty);
  bool invalidate(LineAddr line);
  bool contains(LineAddr line) const;
  std::optional<CacheLine> line_state(LineAddr line) const;
  void mark_dirty(LineAddr line);

  EnqueueResult enqueue(const TagQueueEntry &entry);
  /// Finishes the oldest started entry if it has completed by `now`.
  std::optional<CompletionEvent> retire(Cycle now);
  /// Starts the head entry if the server is free. A Read holds the server
  /// for its search only; its data read overlaps the next entry.
  void dispatch(Cycle now);
  /// retire() followed by dispatch().
  std::vector<CompletionEvent> tick(Cycle now);
  /// Services every pending entry back to back starting at `now`, reporting
  /// each completion. Entries enqueued by the callback are serviced too.
  /// Returns the cycles consumed; counts one flush if anything was pending.
  std::uint64_t drain(Cycle now, const std::function<void(const CompletionEvent &)> &on_complete = {});

  std::size_t queue_occupancy() const { return queue_.size() + in_flight_.size(); }
  bool queue_full() const { return queue_occupancy() >= params_.tag_queue_capacity; }
  bool idle() const { return queue_occupancy() == 0; }
  /// First cycle at which the server can start another entry.
  Cycle free_at() const { return in_flight_.empty() ? free_at_ : std::max(free_at_, in_flight_.back().busy_until); }
  /// Completion cycle of the oldest started entry.
  std::optional<Cycle> next_completion() const;
  /// Marks the bank busy until `t` for work done outside the tag queue.
  void occupy_until(Cycle t) { free_at_ = std::max(free_at_, t); }
  const std::deque<TagQueueEntry> &queued() const { return queue_; }
  /// Entries started but not yet completed, oldest first.
  std::vector<TagQueueEntry> in_flight() const;

  std::uint32_t capacity_lines() const { return params_.geom.lines(); }
  std::uint32_t resident_lines() const { return static_cast<std::uint32_t>(resident_.size()); }
  std::uint32_t fifo_cursor() const { return cursor_; }
  std::uint32_t partitions() const { return static_cast<std::uint32_t>(filters_.size()); }
  const CountingBloomFilter &filter(std::uint32_t p) const { return filters_[p]; }
  const SttParams &params() const { return params_; }
  const SttStats &stats() const { return stats_; }
  void for_each_valid(const std::function<void(LineAddr, const CacheLine &)> &fn) const;

  /// Multiset check: every filter's registered tags are exactly the valid
  /// tags of its partition (counter-by-counter, sticky counters excepted).
  bool cbf_registration_consistent() const;

 private:
  struct Slot {
    LineAddr line;
    bool valid = false;
    bool dirty = false;
    PcSignature fill_sig = 0;
  };

  struct Timing {
    std::uint32_t occupancy = 1;  // cycles the server is held
    std::uint32_t latency = 1;    // cycles until completion
  };
  Timing service(const TagQueueEntry &e, SearchResult &sr);
  CompletionEvent complete(const TagQueueEntry &e, Cycle start, Cycle done, const SearchResult &sr);
  std::uint32_t partition_of(std::uint32_t slot) const { return slot / params_.slots_per_partition; }

  SttParams params_;
  // approx mode
  std::shared_ptr<const HashFamily> hashes_;
  std::vector<CountingBloomFilter> filters_;
  std::vector<Slot> slots_;
  std::uint32_t cursor_ = 0;
  std::unordered_map<LineAddr, std::uint32_t> resident_;
  // set-associative mode
  std::optional<SetAssocCache> sets_;

  std::deque<TagQueueEntry> queue_;
  struct Service {
    TagQueueEntry entry;
    Cycle start = 0;
    Cycle busy_until = 0;
    Cycle done = 0;
    SearchResult result;
  };
  std::deque<Service> in_flight_;
  std::uint64_t inserts_ = 0;
  Cycle free_at_ = 0;
  SttStats stats_;
};

}  // namespace fusesim
