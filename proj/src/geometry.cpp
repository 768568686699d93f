#include "fusesim/geometry.hpp"

#include <array>
#include <bit>

namespace fusesim {

std::uint32_t CacheGeometry::index_bits() const { return static_cast<std::uint32_t>(std::countr_zero(sets)); }

void CacheGeometry::validate() const {
  if (sets == 0 || !std::has_single_bit(sets)) {
    throw std::invalid_argument("cache sets must be a power of two, got " + std::to_string(sets));
  }
  if (ways == 0) throw std::invalid_argument("cache ways must be positive");
  if (index_bits() + kOffsetBits > kAddressBits) throw std::invalid_argument("too many sets for 32-bit addresses");
}

AddressParts decompose(std::uint32_t addr, const CacheGeometry &geom) {
  const std::uint32_t line = addr >> kOffsetBits;
  return AddressParts{
      .tag = static_cast<std::uint32_t>(std::uint64_t{addr} >> (kOffsetBits + geom.index_bits())),
      .set = line & (geom.sets - 1),
      .offset = addr & (kLineBytes - 1),
  };
}

std::uint32_t recompose(const AddressParts &parts, const CacheGeometry &geom) {
  const std::uint64_t tag_part = std::uint64_t{parts.tag} << (kOffsetBits + geom.index_bits());
  return static_cast<std::uint32_t>(tag_part | (parts.set << kOffsetBits) | parts.offset);
}

namespace {

constexpr std::array<std::pair<PresetName, std::string_view>, 7> kNames{{
    {PresetName::L1Sram, "L1-SRAM"},
    {PresetName::FaSram, "FA-SRAM"},
    {PresetName::ByNvm, "By-NVM"},
    {PresetName::Hybrid, "Hybrid"},
    {PresetName::BaseFuse, "Base-FUSE"},
    {PresetName::FaFuse, "FA-FUSE"},
    {PresetName::DyFuse, "Dy-FUSE"},
}};

}  // namespace

std::string_view to_string(PresetName name) {
  for (const auto &[n, s] : kNames) {
    if (n == name) return s;
  }
  return "?";
}

std::optional<PresetName> parse_preset_name(std::string_view name) {
  for (const auto &[n, s] : kNames) {
    if (s == name) return n;
  }
  return std::nullopt;
}

const std::vector<PresetName> &all_presets() {
  static const std::vector<PresetName> names = [] {
    std::vector<PresetName> v;
    for (const auto &entry : kNames) v.push_back(entry.first);
    return v;
  }();
  return names;
}

ConfigPreset preset(PresetName name) {
  ConfigPreset p;
  p.name = name;
  // Shared by Hybrid and Base-FUSE.
  const EnergyParams hybrid_energy{0.09, 0.07, 0.26, 2.4, 36.0, 2.6, 700e6};
  switch (name) {
    case PresetName::L1Sram:
      p.sram = CacheGeometry{64, 4};
      p.energy = {0.15, 0.12, 0.0, 0.0, 58.0, 0.0, 700e6};
      break;
    case PresetName::FaSram:
      // Idealized reference: same capacity and energy as L1-SRAM, one set.
      p.sram = CacheGeometry{1, 256};
      p.energy = {0.15, 0.12, 0.0, 0.0, 58.0, 0.0, 700e6};
      break;
    case PresetName::ByNvm:
      p.stt = CacheGeometry{256, 4};
      p.features.deadwrite_bypass = true;
      p.energy = {0.0, 0.0, 1.2, 2.9, 0.0, 2.8, 700e6};
      break;
    case PresetName::Hybrid:
      p.sram = CacheGeometry{64, 2};
      p.stt = CacheGeometry{256, 2};
      p.energy = hybrid_energy;
      break;
    case PresetName::BaseFuse:
      p.sram = CacheGeometry{64, 2};
      p.stt = CacheGeometry{256, 2};
      p.features.swap_buffer = true;
      p.features.tag_queue = true;
      p.energy = hybrid_energy;
      break;
    case PresetName::FaFuse:
    case PresetName::DyFuse:
      p.sram = CacheGeometry{64, 2};
      p.stt = CacheGeometry{1, 512};
      p.features.swap_buffer = true;
      p.features.tag_queue = true;
      p.features.approx_fa = true;
      p.features.predictor = name == PresetName::DyFuse;
      p.energy = hybrid_energy;
      p.energy.stt_leak_mw = 2.4;
      break;
  }
  return p;
}

ConfigPreset preset(std::string_view name) {
  const auto parsed = parse_preset_name(name);
  if (!parsed) throw UnknownPreset(std::string(name));
  return preset(*parsed);
}

}  // namespace fusesim
