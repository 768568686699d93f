#include "fusesim/stt_bank.hpp"

#include <algorithm>
#include <array>

namespace fusesim {

namespace {
constexpr std::size_t kMaxHashes = 16;
}

SttBank::SttBank(const SttParams &params) : params_(params) {
  params_.geom.validate();
  if (params_.tag_queue_capacity == 0) throw std::invalid_argument("tag queue capacity must be positive");
  if (params_.approx_fa) {
    if (params_.geom.sets != 1) throw std::invalid_argument("approximate fully-associative mode needs one set");
    if (params_.slots_per_partition == 0 || params_.geom.ways % params_.slots_per_partition != 0) {
      throw std::invalid_argument("STT slots must divide evenly into partitions");
    }
    if (params_.cbf_hashes == 0 || params_.cbf_hashes > kMaxHashes) {
      throw std::invalid_argument("cbf hash count must be in [1,16]");
    }
    hashes_ = std::make_shared<HashFamily>(params_.cbf_hashes, params_.cbf_counters, params_.hash_seed);
    slots_.resize(params_.geom.ways);
    filters_.assign(params_.geom.ways / params_.slots_per_partition, CountingBloomFilter(hashes_));
  } else {
    sets_.emplace(params_.geom, Replacement::FIFO, params_.read_cycles, params_.write_cycles);
  }
}

SearchResult SttBank::search(LineAddr line) {
  SearchResult r;
  if (!params_.approx_fa) {
    const auto way = sets_->lookup(line);
    r.hit = way.has_value();
    r.slot = way.value_or(0);
    r.search_cycles = 1;
  } else {
    std::array<unsigned, kMaxHashes> key_buf{};
    const std::span<unsigned> keys(key_buf.data(), hashes_->size());
    hashes_->keys(line, keys);
    std::uint32_t polled = 0;
    bool found = false;
    for (std::uint32_t p = 0; p < filters_.size(); ++p) {
      ++r.filters_tested;
      if (filters_[p].test_keys(keys) == Membership::Negative) continue;
      ++r.positives;
      bool here = false;
      const std::uint32_t first = p * params_.slots_per_partition;
      for (std::uint32_t s = first; s < first + params_.slots_per_partition; ++s) {
        if (slots_[s].valid && slots_[s].line == line) {
          here = true;
          if (!found) r.slot = s;
          break;
        }
      }
      if (!here) ++r.false_positives;
      if (!found) {
        ++polled;
        found = here;
      }
    }
    r.hit = found;
    r.search_cycles = std::max<std::uint32_t>(1, polled);
  }
  // Full once the FIFO has wrapped; invalidated holes are not refilled.
  const bool full = inserts_ >= capacity_lines();
  ++stats_.searches;
  stats_.search_cycles += r.search_cycles;
  if (full) {
    ++stats_.searches_at_full;
    stats_.search_cycles_at_full += r.search_cycles;
  }
  stats_.cbf_tests += r.filters_tested;
  stats_.cbf_false_positives += r.false_positives;
  return r;
}

std::optional<EvictedLine> SttBank::insert(LineAddr line, PcSignature fill_sig, bool dirty) {
  if (resident_.contains(line)) throw DuplicateInsert();
  ++stats_.writes;
  ++inserts_;
  if (!params_.approx_fa) {
    auto evicted = sets_->fill(line, fill_sig, dirty);
    if (evicted) resident_.erase(evicted->line);
    resident_.emplace(line, 0);
    return evicted;
  }
  std::array<unsigned, kMaxHashes> key_buf{};
  const std::span<unsigned> keys(key_buf.data(), hashes_->size());
  const std::uint32_t slot = cursor_;
  cursor_ = (cursor_ + 1) % static_cast<std::uint32_t>(slots_.size());
  Slot &s = slots_[slot];
  std::optional<EvictedLine> evicted;
  if (s.valid) {
    evicted = EvictedLine{s.line, s.dirty, s.fill_sig};
    hashes_->keys(s.line, keys);
    filters_[partition_of(slot)].decrement_keys(keys);
    resident_.erase(s.line);
  }
  s = Slot{line, true, dirty, fill_sig};
  hashes_->keys(line, keys);
  filters_[partition_of(slot)].increment_keys(keys);
  resident_.emplace(line, slot);
  return evicted;
}

bool SttBank::invalidate(LineAddr line) {
  const auto it = resident_.find(line);
  if (it == resident_.end()) return false;
  if (!params_.approx_fa) {
    sets_->invalidate(line);
  } else {
    Slot &s = slots_[it->second];
    std::array<unsigned, kMaxHashes> key_buf{};
    const std::span<unsigned> keys(key_buf.data(), hashes_->size());
    hashes_->keys(line, keys);
    filters_[partition_of(it->second)].decrement_keys(keys);
    s.valid = false;
    s.dirty = false;
  }
  resident_.erase(it);
  return true;
}

bool SttBank::contains(LineAddr line) const { return resident_.contains(line); }

std::optional<CacheLine> SttBank::line_state(LineAddr line) const {
  if (!params_.approx_fa) return sets_->line_state(line);
  const auto it = resident_.find(line);
  if (it == resident_.end()) return std::nullopt;
  const Slot &s = slots_[it->second];
  CacheLine l;
  l.tag = s.line.value;
  l.valid = true;
  l.dirty = s.dirty;
  l.fill_sig = s.fill_sig;
  return l;
}

void SttBank::mark_dirty(LineAddr line) {
  if (!params_.approx_fa) {
    sets_->mark_dirty(line);
    return;
  }
  const auto it = resident_.find(line);
  if (it != resident_.end()) slots_[it->second].dirty = true;
}

void SttBank::for_each_valid(const std::function<void(LineAddr, const CacheLine &)> &fn) const {
  if (!params_.approx_fa) {
    sets_->for_each_valid(fn);
    return;
  }
  for (const Slot &s : slots_) {
    if (!s.valid) continue;
    CacheLine l;
    l.tag = s.line.value;
    l.valid = true;
    l.dirty = s.dirty;
    l.fill_sig = s.fill_sig;
    fn(s.line, l);
  }
}

bool SttBank::cbf_registration_consistent() const {
  if (!params_.approx_fa) return true;
  std::vector<unsigned> expected(hashes_->counters());
  std::vector<unsigned> keys(hashes_->size());
  for (std::uint32_t p = 0; p < filters_.size(); ++p) {
    std::fill(expected.begin(), expected.end(), 0u);
    const std::uint32_t first = p * params_.slots_per_partition;
    for (std::uint32_t s = first; s < first + params_.slots_per_partition; ++s) {
      if (!slots_[s].valid) continue;
      hashes_->keys(slots_[s].line, keys);
      for (unsigned k : keys) ++expected[k];
    }
    const auto &f = filters_[p];
    for (unsigned c = 0; c < f.size(); ++c) {
      if (f.sticky(c) ? f.counter(c) != CountingBloomFilter::kMax : f.counter(c) != expected[c]) return false;
    }
  }
  return true;
}

EnqueueResult SttBank::enqueue(const TagQueueEntry &entry) {
  if (queue_full()) return EnqueueResult::QueueFull;
  queue_.push_back(entry);
  return EnqueueResult::Accepted;
}

std::vector<TagQueueEntry> SttBank::in_flight() const {
  std::vector<TagQueueEntry> out;
  for (const Service &s : in_flight_) out.push_back(s.entry);
  return out;
}

std::optional<Cycle> SttBank::next_completion() const {
  if (in_flight_.empty()) return std::nullopt;
  return in_flight_.front().done;
}

SttBank::Timing SttBank::service(const TagQueueEntry &e, SearchResult &sr) {
  switch (e.cmd) {
    case TagCmd::Read:
      sr = search(e.line);
      ++stats_.reads;
      return {sr.search_cycles, sr.search_cycles + (sr.hit ? params_.read_cycles : 0)};
    case TagCmd::Write: {
      sr = search(e.line);
      const std::uint32_t c = sr.search_cycles + (sr.hit ? params_.write_cycles : 0);
      return {c, c};
    }
    case TagCmd::F:
      return {params_.write_cycles, params_.write_cycles};
  }
  return {};
}

CompletionEvent SttBank::complete(const TagQueueEntry &e, Cycle start, Cycle done, const SearchResult &sr) {
  CompletionEvent ev;
  ev.cmd = e.cmd;
  ev.line = e.line;
  ev.token = e.token;
  ev.start = start;
  ev.done = done;
  ev.hit = sr.hit;
  ev.search_cycles = sr.search_cycles;
  if (e.cmd == TagCmd::F) {
    ev.evicted = insert(e.line, e.fill_sig, e.dirty);
    ev.hit = true;
  } else if (e.cmd == TagCmd::Write && sr.hit) {
    ++stats_.writes;
    mark_dirty(e.line);
  }
  return ev;
}

std::optional<CompletionEvent> SttBank::retire(Cycle now) {
  if (in_flight_.empty() || in_flight_.front().done > now) return std::nullopt;
  const Service s = std::move(in_flight_.front());
  in_flight_.pop_front();
  return complete(s.entry, s.start, s.done, s.result);
}

void SttBank::dispatch(Cycle now) {
  if (queue_.empty() || now < free_at()) return;
  Service s;
  s.entry = queue_.front();
  queue_.pop_front();
  s.start = now;
  const Timing tm = service(s.entry, s.result);
  s.busy_until = now + tm.occupancy;
  s.done = now + tm.latency;
  in_flight_.push_back(std::move(s));
}

std::vector<CompletionEvent> SttBank::tick(Cycle now) {
  std::vector<CompletionEvent> events;
  while (auto ev = retire(now)) events.push_back(std::move(*ev));
  dispatch(now);
  return events;
}

std::uint64_t SttBank::drain(Cycle now, const std::function<void(const CompletionEvent &)> &on_complete) {
  if (idle()) return 0;
  ++stats_.flushes;
  Cycle t = std::max(now, free_at());
  Cycle end = t;
  while (!in_flight_.empty()) {
    const Cycle done = in_flight_.front().done;
    end = std::max(end, done);
    auto ev = retire(done);
    if (on_complete) on_complete(*ev);
  }
  while (!queue_.empty()) {
    const TagQueueEntry e = queue_.front();
    queue_.pop_front();
    SearchResult sr;
    const Cycle start = t;
    const Timing tm = service(e, sr);
    t += tm.occupancy;
    end = std::max(end, start + tm.latency);
    const auto ev = complete(e, start, start + tm.latency, sr);
    if (on_complete) on_complete(ev);
  }
  end = std::max(end, t);
  free_at_ = end;
  return end - now;
}

}  // namespace fusesim
