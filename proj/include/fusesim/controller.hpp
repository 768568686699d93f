#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fusesim/config.hpp"
#include "fusesim/downstream.hpp"
#include "fusesim/metrics.hpp"
#include "fusesim/predictor.hpp"
#include "fusesim/sram_bank.hpp"
#include "fusesim/stt_bank.hpp"

namespace fusesim {

enum class ServedBy : std::uint8_t { Sram, Stt, Downstream, Bypass };
enum class StallCause : std::uint8_t { SttWrite, TagSearch, TagQueueFull, SwapFull, MshrFull };
enum class Destination : std::uint8_t { SramBank, SttBank, Bypass };
enum class BankStatus : std::uint8_t { Hit, Miss, Busy };

std::string_view to_string(ServedBy s);
std::string_view to_string(StallCause c);

struct SwapSlot {
  LineAddr line;
  bool dirty = false;
  PcSignature fill_sig = 0;
  bool occupied = false;
};

struct MshrEntry {
  Destination destination = Destination::SramBank;
  std::vector<std::uint64_t> waiters;
  std::uint32_t merged_count = 0;
  Cycle issue_cycle = 0;
  PcSignature fill_sig = 0;
  bool dirty = false;
  Prediction prediction = Prediction::Neutral;
  std::uint32_t writes = 0;
  std::uint64_t origin = 0;
};

/// Bank status as seen by the most recent request.
struct StatusRegisters {
  BankStatus sram = BankStatus::Miss;
  BankStatus stt = BankStatus::Miss;
  BankStatus approx = BankStatus::Miss;
};

struct RequestState {
  TraceRecord record;
  Cycle issue = 0;
  std::optional<Cycle> done;
  ServedBy served_by = ServedBy::Sram;
};

class OrphanFill : public std::logic_error {
 public:
  OrphanFill() : std::logic_error("fill response without a matching MSHR entry") {}
};

/// The arbitrator in front of the SRAM and STT-MRAM banks.
///
/// Requests enter through handle(); everything asynchronous (tag queue
/// service, fill responses, stuck fills) advances in step(). Presets with a
/// tag queue run the STT-MRAM bank in the background; the others access it
/// synchronously and block issue while it is busy.
class Controller {
 public:
  explicit Controller(const SimConfig &config);

  /// Why the issue stage cannot accept `rec` at `now`, if it cannot.
  std::optional<StallCause> blocker(const TraceRecord &rec, Cycle now) const;
  /// Accepts a request and returns its id. Callers check blocker() first.
  std::uint64_t handle(const TraceRecord &rec, Cycle now);
  /// Delivers fill responses, services the tag queue and retries fills and
  /// misses that were waiting for resources.
  void step(Cycle now);
  /// Fill response for `line` arriving at `now`. Returns false if the fill
  /// has to wait for a swap-buffer slot or tag-queue space.
  bool complete_fill(LineAddr line, Cycle now);

  bool quiescent() const;
  /// Last cycle at which any bank or blocked issue slot is still busy.
  Cycle busy_until() const;
  /// Earliest cycle after `now` at which step() or blocker() can change.
  std::optional<Cycle> next_event(Cycle now) const;

  bool check_single_copy() const;
  bool swap_queue_paired() const;
  /// Scores residencies still in the cache. Call once at the end of a run.
  void finish();
  /// Raw counters gathered so far, including bank and downstream statistics.
  SimReport snapshot() const;

  std::uint64_t invariant_checks() const { return invariant_checks_; }
  std::uint64_t invariant_violations() const { return invariant_violations_; }

  const std::vector<RequestState> &requests() const { return requests_; }
  const std::vector<PredictionRecord> &prediction_log() const { return prediction_log_; }
  const StatusRegisters &status() const { return status_; }
  const SimConfig &config() const { return config_; }

  const SramBank *sram() const { return sram_ ? &*sram_ : nullptr; }
  const SttBank *stt() const { return stt_ ? &*stt_ : nullptr; }
  const ReadLevelPredictor *predictor() const { return predictor_ ? &*predictor_ : nullptr; }
  const Downstream &downstream() const { return downstream_; }
  const std::map<LineAddr, MshrEntry> &mshr() const { return mshr_; }
  const std::vector<SwapSlot> &swap_buffer() const { return swap_; }

  // Test hooks for corrupting state on purpose.
  SramBank *sram_mut() { return sram_ ? &*sram_ : nullptr; }
  SttBank *stt_mut() { return stt_ ? &*stt_ : nullptr; }

 private:
  struct Block {
    Cycle from;
    Cycle until;
    StallCause cause;
  };
  struct Residency {
    Prediction predicted = Prediction::Neutral;
    std::uint32_t writes = 0;
    std::uint64_t origin = 0;
  };

  bool nonblocking() const { return config_.preset.features.tag_queue && stt_.has_value(); }
  Prediction classify_pc(std::uint32_t pc) const;
  Prediction classify_sig(PcSignature sig) const;
  bool in_swap(LineAddr line) const;
  std::optional<std::uint32_t> free_swap_slot() const;
  bool victim_needs_stt(const EvictedLine &victim) const;
  bool can_stage(std::size_t entries) const;
  bool can_place_victim_of(LineAddr line) const;

  void finish_request(std::uint64_t id, Cycle done, ServedBy by);
  void merge(std::uint64_t id, MshrEntry &entry);
  void allocate(std::uint64_t id, Cycle now, Destination dest);
  Destination destination_for(const TraceRecord &rec) const;
  bool resolve_miss(std::uint64_t id, Cycle now);
  void place_sram_victim(const EvictedLine &victim, Cycle now);
  void leave_cache(const EvictedLine &line, Cycle now);
  void stage_to_stt(LineAddr line, PcSignature sig, bool dirty);
  Cycle stt_insert_blocking(LineAddr line, PcSignature sig, bool dirty, Cycle now);
  void on_stt_event(const CompletionEvent &ev);
  void migrate_to_sram(LineAddr line, Cycle now);
  void handle_nonblocking(std::uint64_t id, Cycle now);
  void write_via_drain(std::uint64_t id, Cycle now);
  void handle_blocking(std::uint64_t id, Cycle now);
  void blocking_miss(std::uint64_t id, Cycle now);
  void block_issue(Cycle from, Cycle until, StallCause cause);
  void note_write(LineAddr line);
  void start_residency(LineAddr line, const MshrEntry &entry);
  void after_event();

  SimConfig config_;
  std::optional<SramBank> sram_;
  std::optional<SttBank> stt_;
  std::optional<ReadLevelPredictor> predictor_;
  Downstream downstream_;
  std::vector<SwapSlot> swap_;
  std::map<LineAddr, MshrEntry> mshr_;
  std::deque<LineAddr> stuck_fills_;
  std::deque<std::uint64_t> pending_misses_;
  std::deque<Block> blocks_;
  Cycle stt_busy_until_ = 0;
  std::vector<RequestState> requests_;
  StatusRegisters status_;
  std::unordered_map<LineAddr, Residency> residency_;
  std::vector<PredictionRecord> prediction_log_;
  SimReport counts_;
  std::uint64_t invariant_checks_ = 0;
  std::uint64_t invariant_violations_ = 0;
};

}  // namespace fusesim
