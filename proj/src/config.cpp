#include "fusesim/config.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fusesim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_uint(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("bad integer for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(std::string(value), &used);
    if (used != value.size()) throw ConfigError("");
    return d;
  } catch (const std::exception &) {
    throw ConfigError("bad number for " + std::string(key) + ": '" + std::string(value) + "'");
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw ConfigError("bad boolean for " + std::string(key) + ": '" + std::string(value) + "'");
}

CacheGeometry &require(std::optional<CacheGeometry> &g, std::string_view bank) {
  if (!g) throw ConfigError("preset has no " + std::string(bank) + " bank");
  return *g;
}

}  // namespace

void SimConfig::validate() const {
  try {
    if (!preset.sram && !preset.stt) throw ConfigError("configuration has no cache bank");
    if (preset.sram) preset.sram->validate();
    if (preset.stt) {
      preset.stt->validate();
      if (preset.features.approx_fa) {
        if (preset.stt->sets != 1) throw ConfigError("approximate fully-associative STT needs stt.sets=1");
        if (cbf_slots_per_partition == 0 || preset.stt->ways % cbf_slots_per_partition != 0) {
          throw ConfigError("stt.ways must be a multiple of cbf.slots_per_partition");
        }
      }
    }
    if (preset.features.approx_fa || preset.features.tag_queue || preset.features.swap_buffer) {
      if (!preset.stt || !preset.sram) throw ConfigError("FUSE features need both an SRAM and an STT-MRAM bank");
    }
    if (preset.features.tag_queue != preset.features.swap_buffer) {
      throw ConfigError("tag queue and swap buffer must be enabled together");
    }
    if (cbf_hashes == 0 || cbf_hashes > 16) throw ConfigError("cbf.hashes must be in [1,16]");
    if (cbf_counters < 2 || !std::has_single_bit(cbf_counters)) throw ConfigError("cbf.counters must be a power of two");
    if (tag_queue_capacity == 0) throw ConfigError("tag_queue.capacity must be positive");
    if (swap_slots == 0) throw ConfigError("swap_buffer.slots must be positive");
    if (mshr_capacity == 0) throw ConfigError("mshr.capacity must be positive");
    if (issue_width == 0) throw ConfigError("engine.issue_width must be positive");
    if (warps == 0) throw ConfigError("warps must be positive");
    if (downstream.l2_round_trip_cycles == 0 || downstream.dram_extra_cycles == 0) {
      throw ConfigError("downstream latencies must be positive");
    }
    if (preset.timing.stt_write_cyc == 0 || preset.timing.stt_read_cyc == 0 || preset.timing.sram_read_cyc == 0 ||
        preset.timing.sram_write_cyc == 0) {
      throw ConfigError("bank latencies must be positive");
    }
    if (preset.energy.clock_hz <= 0) throw ConfigError("energy.clock_hz must be positive");
  } catch (const ConfigError &) {
    throw;
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
}

SimConfig make_config(PresetName name) {
  SimConfig c;
  c.preset = preset(name);
  return c;
}

SimConfig make_config(std::string_view preset_name) {
  const auto name = parse_preset_name(preset_name);
  if (!name) throw UnknownPreset(std::string(preset_name));
  return make_config(*name);
}

void apply_override(SimConfig &c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  auto &f = c.preset.features;
  auto &t = c.preset.timing;
  auto &e = c.preset.energy;
  auto &d = c.downstream;
  auto &p = c.predictor;
  auto u32 = [&] { return parse_uint<std::uint32_t>(key, value); };

  if (key == "sram.sets") {
    require(c.preset.sram, "SRAM").sets = u32();
  } else if (key == "sram.ways") {
    require(c.preset.sram, "SRAM").ways = u32();
  } else if (key == "stt.sets") {
    require(c.preset.stt, "STT-MRAM").sets = u32();
  } else if (key == "stt.ways") {
    require(c.preset.stt, "STT-MRAM").ways = u32();
  } else if (key == "features.swap_buffer") {
    f.swap_buffer = parse_bool(key, value);
  } else if (key == "features.tag_queue") {
    f.tag_queue = parse_bool(key, value);
  } else if (key == "features.approx_fa") {
    f.approx_fa = parse_bool(key, value);
  } else if (key == "features.predictor") {
    f.predictor = parse_bool(key, value);
  } else if (key == "features.deadwrite_bypass") {
    f.deadwrite_bypass = parse_bool(key, value);
  } else if (key == "cbf.hashes") {
    c.cbf_hashes = u32();
  } else if (key == "cbf.counters") {
    c.cbf_counters = u32();
  } else if (key == "cbf.slots_per_partition") {
    c.cbf_slots_per_partition = u32();
  } else if (key == "tag_queue.capacity") {
    c.tag_queue_capacity = u32();
  } else if (key == "swap_buffer.slots") {
    c.swap_slots = u32();
  } else if (key == "mshr.capacity") {
    c.mshr_capacity = u32();
  } else if (key == "predictor.history_entries") {
    p.history_entries = u32();
  } else if (key == "predictor.unused_threshold") {
    p.unused_threshold = u32();
  } else if (key == "predictor.reuse_threshold") {
    p.reuse_threshold = u32();
  } else if (key == "predictor.initial_counter") {
    p.initial_counter = u32();
  } else if (key == "downstream.l2_enabled") {
    d.l2_enabled = parse_bool(key, value);
  } else if (key == "downstream.l2_capacity_bytes") {
    d.l2_capacity_bytes = parse_uint<std::uint64_t>(key, value);
  } else if (key == "downstream.l2_ways") {
    d.l2_ways = u32();
  } else if (key == "downstream.l2_round_trip_cycles") {
    d.l2_round_trip_cycles = u32();
  } else if (key == "downstream.dram_extra_cycles") {
    d.dram_extra_cycles = u32();
  } else if (key == "timing.sram_read_cycles") {
    t.sram_read_cyc = u32();
  } else if (key == "timing.sram_write_cycles") {
    t.sram_write_cyc = u32();
  } else if (key == "timing.stt_read_cycles") {
    t.stt_read_cyc = u32();
  } else if (key == "timing.stt_write_cycles") {
    t.stt_write_cyc = u32();
  } else if (key == "energy.sram_read_nj") {
    e.sram_read_nj = parse_double(key, value);
  } else if (key == "energy.sram_write_nj") {
    e.sram_write_nj = parse_double(key, value);
  } else if (key == "energy.stt_read_nj") {
    e.stt_read_nj = parse_double(key, value);
  } else if (key == "energy.stt_write_nj") {
    e.stt_write_nj = parse_double(key, value);
  } else if (key == "energy.sram_leak_mw") {
    e.sram_leak_mw = parse_double(key, value);
  } else if (key == "energy.stt_leak_mw") {
    e.stt_leak_mw = parse_double(key, value);
  } else if (key == "energy.clock_hz") {
    e.clock_hz = parse_double(key, value);
  } else if (key == "engine.issue_width") {
    c.issue_width = u32();
  } else if (key == "warps") {
    c.warps = u32();
  } else if (key == "seed") {
    c.seed = parse_uint<std::uint64_t>(key, value);
  } else if (key == "sram_ratio") {
    apply_sram_ratio(c, parse_double(key, value));
  } else {
    throw ConfigError("unknown config key: " + std::string(key));
  }
}

void apply_override(SimConfig &config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  apply_override(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

SimConfig parse_config_text(std::string_view text, SimConfig base) {
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    auto line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(line) + "'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "preset") {
      const auto name = parse_preset_name(value);
      if (!name) throw ConfigError("unknown preset: " + std::string(value));
      const bool checks = base.check_invariants;
      base = make_config(*name);
      base.check_invariants = checks;
    } else {
      apply_override(base, key, value);
    }
  }
  return base;
}

SimConfig load_config_file(const std::string &path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

void apply_sram_ratio(SimConfig &c, double sram_fraction) {
  if (!(sram_fraction > 0.0 && sram_fraction < 1.0)) throw ConfigError("sram ratio must be in (0,1)");
  if (!c.preset.sram || !c.preset.stt) throw ConfigError("sram ratio needs a hybrid preset");
  const std::uint32_t budget_lines = static_cast<std::uint32_t>(kAreaBudgetBytes / kLineBytes);
  const auto sram_lines = static_cast<std::uint32_t>(std::lround(sram_fraction * budget_lines));
  if (sram_lines < 2 || sram_lines >= budget_lines) throw ConfigError("sram ratio leaves an empty bank");
  const std::uint32_t stt_lines = (budget_lines - sram_lines) * 4;

  std::optional<CacheGeometry> sram;
  for (std::uint32_t ways = 2; ways <= sram_lines; ++ways) {
    if (sram_lines % ways == 0 && std::has_single_bit(sram_lines / ways)) {
      sram = CacheGeometry{sram_lines / ways, ways};
      break;
    }
  }
  if (!sram) throw ConfigError("no power-of-two SRAM geometry for " + std::to_string(sram_lines) + " lines");
  c.preset.sram = sram;

  if (c.preset.features.approx_fa) {
    c.preset.stt = CacheGeometry{1, stt_lines};
  } else {
    const std::uint32_t ways = c.preset.stt->ways;
    if (stt_lines % ways != 0 || !std::has_single_bit(stt_lines / ways)) {
      throw ConfigError("no power-of-two STT-MRAM geometry for " + std::to_string(stt_lines) + " lines");
    }
    c.preset.stt = CacheGeometry{stt_lines / ways, ways};
  }
}

}  // namespace fusesim
