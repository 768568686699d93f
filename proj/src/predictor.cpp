#include "fusesim/predictor.hpp"

#include <algorithm>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace fusesim {

std::string_view to_string(Prediction p) {
  switch (p) {
    case Prediction::WORO:
      return "WORO";
    case Prediction::WORM:
      return "WORM";
    case Prediction::WM:
      return "WM";
    case Prediction::Neutral:
      return "Neutral";
  }
  return "?";
}

ReadLevelPredictor::ReadLevelPredictor(const PredictorParams &params) : params_(params) {
  if (params_.history_entries == 0) throw std::invalid_argument("history table needs entries");
  if (params_.sampler_ways == 0 || params_.sampler_ways > 8) throw std::invalid_argument("sampler ways must be 1..8");
  if (params_.initial_counter > 15 || params_.unused_threshold > 15) {
    throw std::invalid_argument("history counters are 4-bit");
  }
  sampler_.resize(params_.sampled_warps.size() * params_.sampler_ways);
  for (std::size_t s = 0; s < params_.sampled_warps.size(); ++s) {
    for (std::uint32_t w = 0; w < params_.sampler_ways; ++w) {
      sampler_[s * params_.sampler_ways + w].lru = static_cast<std::uint8_t>(w);
    }
  }
  history_.assign(params_.history_entries,
                  HistoryEntry{RwStatus::R, static_cast<std::uint8_t>(params_.initial_counter)});
}

void ReadLevelPredictor::promote(std::uint32_t set, std::uint32_t way) {
  SamplerEntry *base = &sampler_[set * params_.sampler_ways];
  const std::uint8_t old = base[way].lru;
  for (std::uint32_t w = 0; w < params_.sampler_ways; ++w) {
    if (base[w].lru < old) ++base[w].lru;
  }
  base[way].lru = 0;
}

void ReadLevelPredictor::observe(const TraceRecord &rec) {
  const auto &warps = params_.sampled_warps;
  const auto it = std::find(warps.begin(), warps.end(), rec.warp_id);
  if (it == warps.end()) return;
  const auto set = static_cast<std::uint32_t>(it - warps.begin());
  const std::uint16_t tag = sampler_tag(rec.addr);
  const PcSignature sig = signature(rec.pc);
  SamplerEntry *base = &sampler_[set * params_.sampler_ways];

  for (std::uint32_t w = 0; w < params_.sampler_ways; ++w) {
    SamplerEntry &e = base[w];
    if (!e.valid || e.tag != tag) continue;
    e.used = true;
    HistoryEntry &h = history_mut(e.signature);
    if (h.counter > 0) --h.counter;
    h.status = rec.is_write() ? RwStatus::W : RwStatus::R;
    e.signature = sig;
    promote(set, w);
    return;
  }

  std::optional<std::uint32_t> invalid;
  std::uint32_t lru_way = 0;
  for (std::uint32_t w = 0; w < params_.sampler_ways; ++w) {
    if (!base[w].valid && (!invalid || base[w].lru > base[*invalid].lru)) invalid = w;
    if (base[w].lru > base[lru_way].lru) lru_way = w;
  }
  const std::uint32_t victim = invalid.value_or(lru_way);
  if (!invalid && !base[victim].used) {
    HistoryEntry &h = history_mut(base[victim].signature);
    if (h.counter < 15) ++h.counter;
  }
  base[victim] = SamplerEntry{true, false, base[victim].lru, tag, sig};
  promote(set, victim);
}

Prediction ReadLevelPredictor::classify_signature(PcSignature sig) const {
  const HistoryEntry &h = history(sig);
  if (h.counter > params_.unused_threshold) return Prediction::WORO;
  if (h.counter <= params_.reuse_threshold) return h.status == RwStatus::R ? Prediction::WORM : Prediction::WM;
  return Prediction::Neutral;
}

void ReadLevelPredictor::dump_csv(std::ostream &out) const {
  out << "signature,counter,status\n";
  for (std::size_t i = 0; i < history_.size(); ++i) {
    out << i << ',' << static_cast<unsigned>(history_[i].counter) << ','
        << (history_[i].status == RwStatus::R ? 'R' : 'W') << '\n';
  }
}

}  // namespace fusesim
