#include "fusesim/sram_bank.hpp"

#include <stdexcept>

namespace fusesim {

SetAssocCache::SetAssocCache(CacheGeometry geom, Replacement policy, std::uint32_t read_cycles,
                             std::uint32_t write_cycles)
    : geom_(geom), policy_(policy), read_cycles_(read_cycles), write_cycles_(write_cycles) {
  geom_.validate();
  lines_.resize(std::size_t{geom_.sets} * geom_.ways);
  for (std::uint32_t s = 0; s < geom_.sets; ++s) {
    for (std::uint32_t w = 0; w < geom_.ways; ++w) set_begin(s)[w].lru_rank = w;
  }
}

std::optional<std::uint32_t> SetAssocCache::lookup(LineAddr line) const {
  const std::uint32_t set = set_of(line, geom_);
  const std::uint32_t tag = tag_of(line, geom_);
  const CacheLine *base = set_begin(set);
  for (std::uint32_t w = 0; w < geom_.ways; ++w) {
    if (base[w].valid && base[w].tag == tag) return w;
  }
  return std::nullopt;
}

void SetAssocCache::touch(std::uint32_t set, std::uint32_t way) {
  if (policy_ != Replacement::LRU) return;
  CacheLine *base = set_begin(set);
  const std::uint32_t old = base[way].lru_rank;
  for (std::uint32_t w = 0; w < geom_.ways; ++w) {
    if (base[w].lru_rank < old) ++base[w].lru_rank;
  }
  base[way].lru_rank = 0;
}

AccessOutcome SetAssocCache::access(LineAddr line, Op op) {
  AccessOutcome out;
  out.latency_cycles = op == Op::Write ? write_cycles_ : read_cycles_;
  const auto way = lookup(line);
  if (!way) {
    out.latency_cycles = read_cycles_;
    return out;
  }
  const std::uint32_t set = set_of(line, geom_);
  out.hit = true;
  touch(set, *way);
  CacheLine &l = set_begin(set)[*way];
  if (op == Op::Write) l.dirty = true;
  out.dirty_set = l.dirty;
  return out;
}

std::uint32_t SetAssocCache::victim_way(std::uint32_t set) const {
  const CacheLine *base = set_begin(set);
  std::optional<std::uint32_t> best;
  for (std::uint32_t w = 0; w < geom_.ways; ++w) {
    if (base[w].valid) continue;
    // Among invalid ways prefer the least recently used one.
    if (!best || base[w].lru_rank > base[*best].lru_rank) best = w;
    if (policy_ == Replacement::FIFO) return w;
  }
  if (best) return *best;
  std::uint32_t victim = 0;
  for (std::uint32_t w = 1; w < geom_.ways; ++w) {
    if (policy_ == Replacement::LRU ? base[w].lru_rank > base[victim].lru_rank
                                    : base[w].insert_seq < base[victim].insert_seq) {
      victim = w;
    }
  }
  return victim;
}

std::optional<EvictedLine> SetAssocCache::peek_victim(LineAddr line) const {
  const std::uint32_t set = set_of(line, geom_);
  const CacheLine &v = set_begin(set)[victim_way(set)];
  if (!v.valid) return std::nullopt;
  return EvictedLine{line_from(v.tag, set, geom_), v.dirty, v.fill_sig};
}

std::optional<EvictedLine> SetAssocCache::fill(LineAddr line, PcSignature fill_sig, bool dirty) {
  if (lookup(line)) throw std::logic_error("line filled into a set that already holds it");
  const std::uint32_t set = set_of(line, geom_);
  const std::uint32_t w = victim_way(set);
  CacheLine &slot = set_begin(set)[w];
  std::optional<EvictedLine> evicted;
  if (slot.valid) evicted = EvictedLine{line_from(slot.tag, set, geom_), slot.dirty, slot.fill_sig};
  slot.tag = tag_of(line, geom_);
  slot.valid = true;
  slot.dirty = dirty;
  slot.fill_sig = fill_sig;
  slot.insert_seq = next_seq_++;
  if (policy_ == Replacement::LRU) {
    touch(set, w);
  }
  return evicted;
}

bool SetAssocCache::invalidate(LineAddr line) {
  const auto way = lookup(line);
  if (!way) return false;
  CacheLine &l = set_begin(set_of(line, geom_))[*way];
  l.valid = false;
  l.dirty = false;
  return true;
}

void SetAssocCache::mark_dirty(LineAddr line) {
  if (const auto way = lookup(line)) set_begin(set_of(line, geom_))[*way].dirty = true;
}

std::optional<CacheLine> SetAssocCache::line_state(LineAddr line) const {
  const auto way = lookup(line);
  if (!way) return std::nullopt;
  return set_begin(set_of(line, geom_))[*way];
}

std::size_t SetAssocCache::valid_count() const {
  std::size_t n = 0;
  for (const auto &l : lines_) n += l.valid ? 1 : 0;
  return n;
}

void SetAssocCache::for_each_valid(const std::function<void(LineAddr, const CacheLine &)> &fn) const {
  for (std::uint32_t s = 0; s < geom_.sets; ++s) {
    for (std::uint32_t w = 0; w < geom_.ways; ++w) {
      const CacheLine &l = set_begin(s)[w];
      if (l.valid) fn(line_from(l.tag, s, geom_), l);
    }
  }
}

}  // namespace fusesim
