#include "fusesim/controller.hpp"

#include <algorithm>

namespace fusesim {

std::string_view to_string(ServedBy s) {
  switch (s) {
    case ServedBy::Sram: return "sram";
    case ServedBy::Stt: return "stt";
    case ServedBy::Downstream: return "downstream";
    case ServedBy::Bypass: return "bypass";
  }
  return "?";
}

std::string_view to_string(StallCause c) {
  switch (c) {
    case StallCause::SttWrite: return "stt_write";
    case StallCause::TagSearch: return "tag_search";
    case StallCause::TagQueueFull: return "tag_queue_full";
    case StallCause::SwapFull: return "swap_full";
    case StallCause::MshrFull: return "mshr_full";
  }
  return "?";
}

Controller::Controller(const SimConfig &config) : config_(config), downstream_(config.downstream) {
  config_.validate();
  const ConfigPreset &p = config_.preset;
  if (p.sram) sram_.emplace(*p.sram, p.timing);
  if (p.stt) {
    SttParams sp;
    sp.geom = *p.stt;
    sp.approx_fa = p.features.approx_fa;
    sp.cbf_hashes = config_.cbf_hashes;
    sp.cbf_counters = config_.cbf_counters;
    sp.slots_per_partition = config_.cbf_slots_per_partition;
    sp.hash_seed = config_.seed;
    sp.read_cycles = p.timing.stt_read_cyc;
    sp.write_cycles = p.timing.stt_write_cyc;
    sp.tag_queue_capacity = config_.tag_queue_capacity;
    stt_.emplace(sp);
  }
  if (p.features.predictor || p.features.deadwrite_bypass) predictor_.emplace(config_.predictor);
  swap_.resize(config_.swap_slots);
}

Prediction Controller::classify_pc(std::uint32_t pc) const {
  return predictor_ ? predictor_->classify(pc) : Prediction::Neutral;
}

Prediction Controller::classify_sig(PcSignature sig) const {
  return predictor_ ? predictor_->classify_signature(sig) : Prediction::Neutral;
}

bool Controller::in_swap(LineAddr line) const {
  return std::any_of(swap_.begin(), swap_.end(), [&](const SwapSlot &s) { return s.occupied && s.line == line; });
}

std::optional<std::uint32_t> Controller::free_swap_slot() const {
  for (std::uint32_t i = 0; i < swap_.size(); ++i) {
    if (!swap_[i].occupied) return i;
  }
  return std::nullopt;
}

bool Controller::victim_needs_stt(const EvictedLine &victim) const {
  if (!stt_) return false;
  return !(config_.preset.features.predictor && classify_sig(victim.fill_sig) == Prediction::WORO);
}

bool Controller::can_stage(std::size_t entries) const {
  return free_swap_slot().has_value() && stt_->queue_occupancy() + entries <= config_.tag_queue_capacity;
}

bool Controller::can_place_victim_of(LineAddr line) const {
  if (!nonblocking()) return true;
  const auto v = sram_->peek_victim(line);
  return !v || !victim_needs_stt(*v) || can_stage(1);
}

void Controller::finish_request(std::uint64_t id, Cycle done, ServedBy by) {
  RequestState &r = requests_[id];
  r.done = done;
  r.served_by = by;
  counts_.total_latency += done - r.issue;
}

void Controller::note_write(LineAddr line) {
  if (!predictor_) return;
  if (auto it = residency_.find(line); it != residency_.end()) ++it->second.writes;
}

void Controller::start_residency(LineAddr line, const MshrEntry &entry) {
  if (!predictor_) return;
  residency_[line] = Residency{entry.prediction, entry.writes, entry.origin};
}

void Controller::leave_cache(const EvictedLine &line, Cycle now) {
  if (line.dirty) downstream_.request(line.line, true, now);
  if (!predictor_) return;
  if (auto it = residency_.find(line.line); it != residency_.end()) {
    prediction_log_.push_back({it->second.predicted, it->second.writes, it->second.origin});
    residency_.erase(it);
  }
}

void Controller::block_issue(Cycle from, Cycle until, StallCause cause) {
  if (!blocks_.empty()) from = std::max(from, blocks_.back().until);
  if (until <= from) return;
  blocks_.push_back({from, until, cause});
}

void Controller::after_event() {
  if (!config_.check_invariants) return;
  ++invariant_checks_;
  if (!check_single_copy()) ++invariant_violations_;
}

Destination Controller::destination_for(const TraceRecord &rec) const {
  const Features &f = config_.preset.features;
  if (f.deadwrite_bypass && classify_pc(rec.pc) == Prediction::WORO) return Destination::Bypass;
  if (!sram_) return Destination::SttBank;
  if (f.predictor && stt_ && classify_pc(rec.pc) == Prediction::WORM) return Destination::SttBank;
  return Destination::SramBank;
}

void Controller::merge(std::uint64_t id, MshrEntry &entry) {
  const TraceRecord &rec = requests_[id].record;
  ++counts_.misses;
  ++counts_.mshr_merges;
  ++entry.merged_count;
  entry.waiters.push_back(id);
  if (rec.is_write()) {
    entry.dirty = true;
    ++entry.writes;
    // Written data has to land somewhere.
    if (entry.destination == Destination::Bypass) {
      entry.destination = sram_ ? Destination::SramBank : Destination::SttBank;
    }
  }
}

void Controller::allocate(std::uint64_t id, Cycle now, Destination dest) {
  const TraceRecord &rec = requests_[id].record;
  MshrEntry e;
  e.destination = dest;
  e.waiters.push_back(id);
  e.issue_cycle = now;
  e.fill_sig = ReadLevelPredictor::signature(rec.pc);
  e.dirty = rec.is_write();
  e.writes = rec.is_write() ? 1 : 0;
  e.prediction = classify_pc(rec.pc);
  e.origin = id;
  ++counts_.misses;
  if (dest == Destination::Bypass) {
    ++counts_.bypasses;
  } else {
    ++counts_.mshr_allocations;
  }
  downstream_.request(rec.line(), false, now);
  mshr_.emplace(rec.line(), std::move(e));
}

void Controller::stage_to_stt(LineAddr line, PcSignature sig, bool dirty) {
  const auto slot = free_swap_slot();
  if (!slot) throw std::logic_error("swap buffer full while staging a line");
  swap_[*slot] = SwapSlot{line, dirty, sig, true};
  TagQueueEntry e;
  e.cmd = TagCmd::F;
  e.line = line;
  e.token = *slot;
  e.dirty = dirty;
  e.fill_sig = sig;
  if (stt_->enqueue(e) != EnqueueResult::Accepted) throw std::logic_error("tag queue full while staging a line");
}

Cycle Controller::stt_insert_blocking(LineAddr line, PcSignature sig, bool dirty, Cycle now) {
  const Cycle start = std::max(now, stt_busy_until_);
  stt_busy_until_ = start + config_.preset.timing.stt_write_cyc;
  const auto evicted = stt_->insert(line, sig, dirty);
  block_issue(start, stt_busy_until_, StallCause::SttWrite);
  if (evicted) leave_cache(*evicted, start);
  return stt_busy_until_;
}

void Controller::place_sram_victim(const EvictedLine &victim, Cycle now) {
  if (!victim_needs_stt(victim)) {
    leave_cache(victim, now);
    return;
  }
  ++counts_.migrations_sram_to_stt;
  if (nonblocking()) {
    stage_to_stt(victim.line, victim.fill_sig, victim.dirty);
  } else {
    stt_insert_blocking(victim.line, victim.fill_sig, victim.dirty, now);
  }
}

void Controller::migrate_to_sram(LineAddr line, Cycle now) {
  const auto st = stt_->line_state(line);
  if (!st) throw std::logic_error("migrating a line that is not in STT-MRAM");
  stt_->invalidate(line);
  ++counts_.migrations_stt_to_sram;
  ++counts_.bank_accesses.sram_writes;
  if (const auto victim = sram_->fill(line, st->fill_sig, st->dirty)) place_sram_victim(*victim, now);
}

bool Controller::resolve_miss(std::uint64_t id, Cycle now) {
  const TraceRecord &rec = requests_[id].record;
  const LineAddr line = rec.line();
  const TimingParams &tm = config_.preset.timing;
  if (sram_->contains(line)) {
    sram_->access(line, rec.op);
    if (rec.is_write()) {
      ++counts_.bank_accesses.sram_writes;
      note_write(line);
    } else {
      ++counts_.bank_accesses.sram_reads;
    }
    ++counts_.sram_hits;
    finish_request(id, now + (rec.is_write() ? tm.sram_write_cyc : tm.sram_read_cyc), ServedBy::Sram);
    return true;
  }
  if (stt_->contains(line) || in_swap(line)) {
    if (rec.is_write()) {
      write_via_drain(id, now);
      return true;
    }
    // Arrived in STT-MRAM behind our lookup; look again.
    TagQueueEntry e;
    e.cmd = TagCmd::Read;
    e.line = line;
    e.token = id;
    return stt_->enqueue(e) == EnqueueResult::Accepted;
  }
  if (auto it = mshr_.find(line); it != mshr_.end()) {
    merge(id, it->second);
    return true;
  }
  if (mshr_.size() >= config_.mshr_capacity) return false;
  allocate(id, now, destination_for(rec));
  return true;
}

void Controller::on_stt_event(const CompletionEvent &ev) {
  switch (ev.cmd) {
    case TagCmd::F:
      swap_[ev.token].occupied = false;
      if (ev.evicted) leave_cache(*ev.evicted, ev.done);
      break;
    case TagCmd::Read:
    case TagCmd::Write: {
      const std::uint64_t id = ev.token;
      const TraceRecord &rec = requests_[id].record;
      // A pipelined lookup can find its line already migrated by the entry ahead.
      if (!ev.hit || !stt_->contains(ev.line)) {
        if (!resolve_miss(id, ev.done)) pending_misses_.push_back(id);
        break;
      }
      ++counts_.stt_hits;
      if (ev.cmd == TagCmd::Write) note_write(ev.line);
      finish_request(id, ev.done, ServedBy::Stt);
      if (config_.preset.features.predictor && classify_pc(rec.pc) == Prediction::WM && can_place_victim_of(ev.line)) {
        migrate_to_sram(ev.line, ev.done);
      }
      break;
    }
  }
  after_event();
}

void Controller::write_via_drain(std::uint64_t id, Cycle now) {
  const TraceRecord &rec = requests_[id].record;
  const LineAddr line = rec.line();
  const TimingParams &tm = config_.preset.timing;
  const Cycle t = now + 1;
  const Cycle drained = t + stt_->drain(t, [&](const CompletionEvent &ev) {
    on_stt_event(ev);
    block_issue(std::max(ev.start, t), ev.done,
                ev.cmd == TagCmd::Read ? StallCause::TagSearch : StallCause::SttWrite);
  });
  if (!stt_->contains(line)) {
    // Pushed out by a fill or moved to SRAM while the queue drained.
    if (!resolve_miss(id, drained)) pending_misses_.push_back(id);
    return;
  }
  const Cycle t0 = std::max(drained, stt_->free_at());
  const SearchResult sr = stt_->search(line);
  const Cycle out = t0 + sr.search_cycles + tm.stt_read_cyc;
  block_issue(t0, out, StallCause::TagSearch);
  stt_->occupy_until(out);
  ++counts_.stt_hits;
  migrate_to_sram(line, out);
  sram_->mark_dirty(line);
  note_write(line);
  finish_request(id, out + tm.sram_write_cyc, ServedBy::Stt);
}

void Controller::handle_nonblocking(std::uint64_t id, Cycle now) {
  const TraceRecord &rec = requests_[id].record;
  const LineAddr line = rec.line();
  const TimingParams &tm = config_.preset.timing;
  if (rec.is_write()) {
    ++counts_.bank_accesses.sram_writes;
  } else {
    ++counts_.bank_accesses.sram_reads;
  }
  if (sram_->access(line, rec.op).hit) {
    ++counts_.sram_hits;
    if (rec.is_write()) note_write(line);
    finish_request(id, now + (rec.is_write() ? tm.sram_write_cyc : tm.sram_read_cyc), ServedBy::Sram);
    return;
  }
  if (!rec.is_write()) {
    if (auto it = mshr_.find(line); it != mshr_.end()) {
      merge(id, it->second);
      return;
    }
    TagQueueEntry e;
    e.cmd = TagCmd::Read;
    e.line = line;
    e.token = id;
    if (stt_->enqueue(e) != EnqueueResult::Accepted) pending_misses_.push_back(id);
    return;
  }
  if (stt_->contains(line) || in_swap(line)) {
    write_via_drain(id, now);
    return;
  }
  if (auto it = mshr_.find(line); it != mshr_.end()) {
    merge(id, it->second);
    return;
  }
  if (!resolve_miss(id, now)) pending_misses_.push_back(id);
}

void Controller::blocking_miss(std::uint64_t id, Cycle now) {
  const TraceRecord &rec = requests_[id].record;
  const LineAddr line = rec.line();
  if (auto it = mshr_.find(line); it != mshr_.end()) {
    merge(id, it->second);
    return;
  }
  const Destination dest = destination_for(rec);
  if (dest == Destination::Bypass && rec.is_write()) {
    // Posted write straight to memory.
    ++counts_.misses;
    ++counts_.bypasses;
    downstream_.request(line, true, now);
    prediction_log_.push_back({Prediction::WORO, 1, id});
    finish_request(id, now + 1, ServedBy::Bypass);
    return;
  }
  if (mshr_.size() >= config_.mshr_capacity) throw std::logic_error("request issued while the MSHR is full");
  allocate(id, now, dest);
}

void Controller::handle_blocking(std::uint64_t id, Cycle now) {
  const TraceRecord &rec = requests_[id].record;
  const LineAddr line = rec.line();
  const TimingParams &tm = config_.preset.timing;
  Cycle t = now;
  if (sram_) {
    if (rec.is_write()) {
      ++counts_.bank_accesses.sram_writes;
    } else {
      ++counts_.bank_accesses.sram_reads;
    }
    if (sram_->access(line, rec.op).hit) {
      ++counts_.sram_hits;
      if (rec.is_write()) note_write(line);
      finish_request(id, now + (rec.is_write() ? tm.sram_write_cyc : tm.sram_read_cyc), ServedBy::Sram);
      return;
    }
    t = now + 1;
  }
  if (stt_) {
    const Cycle start = std::max(t, stt_busy_until_);
    const SearchResult sr = stt_->search(line);
    const Cycle found = start + sr.search_cycles;
    if (sram_) block_issue(start, found, StallCause::TagSearch);
    if (sr.hit) {
      ++counts_.stt_hits;
      if (!rec.is_write()) {
        finish_request(id, found + tm.stt_read_cyc, ServedBy::Stt);
      } else if (sram_) {
        const Cycle out = found + tm.stt_read_cyc;
        block_issue(found, out, StallCause::TagSearch);
        migrate_to_sram(line, out);
        sram_->mark_dirty(line);
        note_write(line);
        finish_request(id, out + tm.sram_write_cyc, ServedBy::Stt);
      } else {
        const Cycle ws = std::max(found, stt_busy_until_);
        stt_busy_until_ = ws + tm.stt_write_cyc;
        stt_->mark_dirty(line);
        ++counts_.bank_accesses.stt_writes;
        block_issue(ws, stt_busy_until_, StallCause::SttWrite);
        note_write(line);
        finish_request(id, stt_busy_until_, ServedBy::Stt);
      }
      return;
    }
    t = found;
  }
  blocking_miss(id, t);
}

std::uint64_t Controller::handle(const TraceRecord &rec, Cycle now) {
  const std::uint64_t id = requests_.size();
  requests_.push_back(RequestState{rec, now, std::nullopt, ServedBy::Sram});
  if (predictor_) predictor_->observe(rec);
  ++counts_.accesses;
  if (rec.is_write()) {
    ++counts_.writes;
  } else {
    ++counts_.reads;
  }
  const LineAddr line = rec.line();
  status_.sram = sram_ && sram_->contains(line) ? BankStatus::Hit : BankStatus::Miss;
  if (!stt_) {
    status_.stt = BankStatus::Miss;
  } else if (nonblocking() ? !stt_->idle() : stt_busy_until_ > now) {
    status_.stt = BankStatus::Busy;
  } else {
    status_.stt = stt_->contains(line) ? BankStatus::Hit : BankStatus::Miss;
  }
  status_.approx = stt_ && config_.preset.features.approx_fa ? status_.stt : BankStatus::Miss;

  if (nonblocking()) {
    handle_nonblocking(id, now);
  } else {
    handle_blocking(id, now);
  }
  after_event();
  return id;
}

bool Controller::complete_fill(LineAddr line, Cycle now) {
  const auto it = mshr_.find(line);
  if (it == mshr_.end()) throw OrphanFill();
  MshrEntry &e = it->second;
  switch (e.destination) {
    case Destination::Bypass:
      if (predictor_) prediction_log_.push_back({e.prediction, e.writes, e.origin});
      break;
    case Destination::SramBank: {
      const auto victim = sram_->peek_victim(line);
      if (nonblocking() && victim && victim_needs_stt(*victim) && !can_stage(1)) return false;
      ++counts_.bank_accesses.sram_writes;
      if (const auto ev = sram_->fill(line, e.fill_sig, e.dirty)) place_sram_victim(*ev, now);
      start_residency(line, e);
      break;
    }
    case Destination::SttBank:
      if (nonblocking()) {
        if (!can_stage(1)) return false;
        stage_to_stt(line, e.fill_sig, e.dirty);
      } else {
        stt_insert_blocking(line, e.fill_sig, e.dirty, now);
      }
      start_residency(line, e);
      break;
  }
  const ServedBy by = e.destination == Destination::Bypass ? ServedBy::Bypass : ServedBy::Downstream;
  for (const std::uint64_t w : e.waiters) finish_request(w, now + 1, by);
  mshr_.erase(it);
  after_event();
  return true;
}

void Controller::step(Cycle now) {
  while (!blocks_.empty() && blocks_.front().until <= now) blocks_.pop_front();
  if (nonblocking()) {
    while (const auto ev = stt_->retire(now)) on_stt_event(*ev);
  }
  while (!stuck_fills_.empty() && complete_fill(stuck_fills_.front(), now)) stuck_fills_.pop_front();
  for (const DownstreamCompletion &c : downstream_.collect(now)) {
    if (!stuck_fills_.empty() || !complete_fill(c.line, now)) stuck_fills_.push_back(c.line);
  }
  while (!pending_misses_.empty() && resolve_miss(pending_misses_.front(), now)) pending_misses_.pop_front();
  if (nonblocking()) stt_->dispatch(now);
}

std::optional<StallCause> Controller::blocker(const TraceRecord &rec, Cycle now) const {
  for (const Block &b : blocks_) {
    if (b.from <= now && now < b.until) return b.cause;
  }
  const LineAddr line = rec.line();
  if (sram_ && sram_->contains(line)) return std::nullopt;
  const bool mshr_full = mshr_.size() >= config_.mshr_capacity;
  if (nonblocking()) {
    if (!stuck_fills_.empty()) return free_swap_slot() ? StallCause::TagQueueFull : StallCause::SwapFull;
    if (!pending_misses_.empty()) return StallCause::MshrFull;
    if (!rec.is_write()) {
      if (mshr_.contains(line) || !stt_->queue_full()) return std::nullopt;
      return StallCause::TagQueueFull;
    }
    if (stt_->contains(line) || in_swap(line) || mshr_.contains(line)) return std::nullopt;
    return mshr_full ? std::optional(StallCause::MshrFull) : std::nullopt;
  }
  if ((stt_ && stt_->contains(line)) || mshr_.contains(line)) return std::nullopt;
  return mshr_full ? std::optional(StallCause::MshrFull) : std::nullopt;
}

bool Controller::quiescent() const {
  return mshr_.empty() && stuck_fills_.empty() && pending_misses_.empty() && (!stt_ || stt_->idle()) &&
         downstream_.idle();
}

Cycle Controller::busy_until() const {
  Cycle c = stt_busy_until_;
  if (!blocks_.empty()) c = std::max(c, blocks_.back().until);
  if (stt_) c = std::max(c, stt_->free_at());
  return c;
}

std::optional<Cycle> Controller::next_event(Cycle now) const {
  std::optional<Cycle> best;
  const auto consider = [&](Cycle c) {
    if (c > now && (!best || c < *best)) best = c;
  };
  if (const auto c = downstream_.next_completion()) consider(std::max(*c, now + 1));
  if (nonblocking()) {
    if (const auto c = stt_->next_completion()) consider(*c);
    if (!stt_->queued().empty()) consider(std::max(now + 1, stt_->free_at()));
  }
  for (const Block &b : blocks_) {
    consider(b.from);
    consider(b.until);
  }
  return best;
}

bool Controller::check_single_copy() const {
  // Each bank holds a line at most once by construction, so a second copy can
  // only show up across structures.
  bool ok = true;
  if (sram_) {
    sram_->for_each_valid([&](LineAddr l, const CacheLine &) {
      if ((stt_ && stt_->contains(l)) || in_swap(l)) ok = false;
    });
  }
  for (std::size_t i = 0; i < swap_.size(); ++i) {
    if (!swap_[i].occupied) continue;
    if (stt_ && stt_->contains(swap_[i].line)) ok = false;
    for (std::size_t j = i + 1; j < swap_.size(); ++j) {
      if (swap_[j].occupied && swap_[j].line == swap_[i].line) ok = false;
    }
  }
  return ok;
}

bool Controller::swap_queue_paired() const {
  if (!stt_) return std::none_of(swap_.begin(), swap_.end(), [](const SwapSlot &s) { return s.occupied; });
  std::vector<int> refs(swap_.size(), 0);
  bool ok = true;
  const auto visit = [&](const TagQueueEntry &e) {
    if (e.cmd != TagCmd::F) return;
    if (e.token >= swap_.size() || !swap_[e.token].occupied || swap_[e.token].line != e.line) {
      ok = false;
      return;
    }
    ++refs[e.token];
  };
  for (const TagQueueEntry &e : stt_->in_flight()) visit(e);
  for (const TagQueueEntry &e : stt_->queued()) visit(e);
  for (std::size_t i = 0; i < swap_.size(); ++i) {
    if (refs[i] != (swap_[i].occupied ? 1 : 0)) ok = false;
  }
  return ok;
}

void Controller::finish() {
  for (const auto &[line, r] : residency_) prediction_log_.push_back({r.predicted, r.writes, r.origin});
  residency_.clear();
}

SimReport Controller::snapshot() const {
  SimReport r = counts_;
  r.preset = std::string(to_string(config_.preset.name));
  if (stt_) {
    const SttStats &s = stt_->stats();
    r.stt_searches = s.searches;
    r.stt_search_cycles = s.search_cycles;
    r.searches_at_full = s.searches_at_full;
    r.search_cycles_at_full = s.search_cycles_at_full;
    r.cbf_tests = s.cbf_tests;
    r.cbf_false_positives = s.cbf_false_positives;
    r.tag_queue_flushes = s.flushes;
    r.bank_accesses.stt_reads = s.searches;
    r.bank_accesses.stt_writes += s.writes;
  }
  r.offchip_requests = downstream_.requests();
  r.writebacks = downstream_.writebacks();
  r.predictions = score_predictions(prediction_log_);
  return r;
}

}  // namespace fusesim
