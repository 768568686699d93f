#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fusesim {

using Cycle = std::uint64_t;

inline constexpr std::uint32_t kLineBytes = 128;
inline constexpr std::uint32_t kOffsetBits = 7;
inline constexpr std::uint32_t kAddressBits = 32;

/// A 128-byte line address (byte address >> 7).
struct LineAddr {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const LineAddr &) const = default;

  static constexpr LineAddr from_byte(std::uint32_t addr) { return LineAddr{addr >> kOffsetBits}; }
  constexpr std::uint32_t byte_addr() const { return value << kOffsetBits; }
};

struct CacheGeometry {
  std::uint32_t sets = 1;
  std::uint32_t ways = 1;

  constexpr auto operator<=>(const CacheGeometry &) const = default;

  std::uint32_t lines() const { return sets * ways; }
  std::uint64_t capacity_bytes() const { return std::uint64_t{lines()} * kLineBytes; }
  std::uint32_t index_bits() const;
  std::uint32_t tag_bits() const { return kAddressBits - index_bits() - kOffsetBits; }

  /// Throws std::invalid_argument unless sets is a power of two and ways > 0.
  void validate() const;
};

struct AddressParts {
  std::uint32_t tag = 0;
  std::uint32_t set = 0;
  std::uint32_t offset = 0;

  constexpr auto operator<=>(const AddressParts &) const = default;
};

AddressParts decompose(std::uint32_t addr, const CacheGeometry &geom);
std::uint32_t recompose(const AddressParts &parts, const CacheGeometry &geom);

// Line-address variants used by the banks.
inline std::uint32_t set_of(LineAddr line, const CacheGeometry &geom) { return line.value & (geom.sets - 1); }
inline std::uint32_t tag_of(LineAddr line, const CacheGeometry &geom) { return line.value >> geom.index_bits(); }
inline LineAddr line_from(std::uint32_t tag, std::uint32_t set, const CacheGeometry &geom) {
  return LineAddr{(tag << geom.index_bits()) | set};
}

enum class PresetName { L1Sram, FaSram, ByNvm, Hybrid, BaseFuse, FaFuse, DyFuse };

std::string_view to_string(PresetName name);
std::optional<PresetName> parse_preset_name(std::string_view name);
const std::vector<PresetName> &all_presets();

class UnknownPreset : public std::invalid_argument {
 public:
  explicit UnknownPreset(const std::string &name) : std::invalid_argument("unknown preset: " + name) {}
};

struct Features {
  bool swap_buffer = false;
  bool tag_queue = false;
  bool approx_fa = false;
  bool predictor = false;
  bool deadwrite_bypass = false;

  constexpr auto operator<=>(const Features &) const = default;
};

struct TimingParams {
  std::uint32_t sram_read_cyc = 1;
  std::uint32_t sram_write_cyc = 1;
  std::uint32_t stt_read_cyc = 1;
  std::uint32_t stt_write_cyc = 5;

  constexpr auto operator<=>(const TimingParams &) const = default;
};

// Per-access dynamic energies in nJ, leakage in mW.
struct EnergyParams {
  double sram_read_nj = 0.0;
  double sram_write_nj = 0.0;
  double stt_read_nj = 0.0;
  double stt_write_nj = 0.0;
  double sram_leak_mw = 0.0;
  double stt_leak_mw = 0.0;
  double clock_hz = 700e6;

  constexpr auto operator<=>(const EnergyParams &) const = default;
};

struct ConfigPreset {
  PresetName name = PresetName::L1Sram;
  std::optional<CacheGeometry> sram;
  std::optional<CacheGeometry> stt;
  Features features;
  TimingParams timing;
  EnergyParams energy;

  std::uint64_t sram_bytes() const { return sram ? sram->capacity_bytes() : 0; }
  std::uint64_t stt_bytes() const { return stt ? stt->capacity_bytes() : 0; }
  /// SRAM-equivalent area, with STT-MRAM four times denser than SRAM.
  std::uint64_t area_equivalent_bytes() const { return sram_bytes() + stt_bytes() / 4; }
};

ConfigPreset preset(PresetName name);
/// Throws UnknownPreset.
ConfigPreset preset(std::string_view name);

/// Area budget every preset is built against (the L1-SRAM capacity).
inline constexpr std::uint64_t kAreaBudgetBytes = 32 * 1024;

}  // namespace fusesim

template <>
struct std::hash<fusesim::LineAddr> {
  std::size_t operator()(fusesim::LineAddr l) const noexcept { return std::hash<std::uint32_t>{}(l.value); }
};
