#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fusesim/sram_bank.hpp"
#include "fusesim/trace.hpp"

namespace fusesim {

enum class Prediction : std::uint8_t { WORO, WORM, WM, Neutral };

std::string_view to_string(Prediction p);

struct PredictorParams {
  std::uint32_t history_entries = 512;
  std::uint32_t unused_threshold = 14;  // counter > this => WORO
  std::uint32_t reuse_threshold = 1;    // counter <= this => WORM / WM
  std::uint32_t initial_counter = 8;
  std::uint32_t sampler_ways = 8;
  std::array<std::uint32_t, 4> sampled_warps{0, 12, 24, 36};
};

struct SamplerEntry {
  bool valid = false;
  bool used = false;
  std::uint8_t lru = 0;        // 3 bits, 0 = MRU
  std::uint16_t tag = 0;       // 15-bit partial line address
  std::uint16_t signature = 0; // 9-bit partial PC
};

enum class RwStatus : std::uint8_t { R, W };

struct HistoryEntry {
  RwStatus status = RwStatus::R;
  std::uint8_t counter = 8;  // 4-bit saturating
};

/// Sampling, PC-signature read-level predictor.
///
/// Four representative warps feed a 4-set x 8-way sampler. A sampler hit
/// lowers the history counter of the signature that brought the entry in;
/// an entry evicted without reuse raises it.
class ReadLevelPredictor {
 public:
  explicit ReadLevelPredictor(const PredictorParams &params = {});

  void observe(const TraceRecord &rec);
  Prediction classify(std::uint32_t pc) const { return classify_signature(signature(pc)); }
  Prediction classify_signature(PcSignature sig) const;

  static PcSignature signature(std::uint32_t pc) { return static_cast<PcSignature>((pc >> 2) & 0x1FF); }
  static std::uint16_t sampler_tag(std::uint32_t addr) { return static_cast<std::uint16_t>((addr >> 7) & 0x7FFF); }

  const HistoryEntry &history(PcSignature sig) const { return history_[sig % history_.size()]; }
  const SamplerEntry &sampler(std::uint32_t set, std::uint32_t way) const {
    return sampler_[set * params_.sampler_ways + way];
  }
  const PredictorParams &params() const { return params_; }

  /// signature,counter,status rows for every history entry.
  void dump_csv(std::ostream &out) const;

 private:
  HistoryEntry &history_mut(PcSignature sig) { return history_[sig % history_.size()]; }
  void promote(std::uint32_t set, std::uint32_t way);

  PredictorParams params_;
  std::vector<SamplerEntry> sampler_;
  std::vector<HistoryEntry> history_;
};

}  // namespace fusesim
