#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fusesim/downstream.hpp"
#include "fusesim/geometry.hpp"
#include "fusesim/predictor.hpp"

namespace fusesim {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything a simulation run needs besides the trace.
struct SimConfig {
  ConfigPreset preset;
  unsigned cbf_hashes = 3;
  unsigned cbf_counters = 128;
  unsigned cbf_slots_per_partition = 4;
  std::uint32_t tag_queue_capacity = 16;
  std::uint32_t swap_slots = 3;
  std::uint32_t mshr_capacity = 32;
  PredictorParams predictor;
  DownstreamConfig downstream;
  std::uint32_t issue_width = 1;
  std::uint32_t warps = 48;
  std::uint64_t seed = 1;
  bool check_invariants = false;  // check the single-copy invariant after every event
  bool keep_request_log = false;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

SimConfig make_config(PresetName name);
SimConfig make_config(std::string_view preset_name);

/// Dotted-key override, e.g. "downstream.l2_round_trip_cycles", "cbf.hashes",
/// "stt.ways". Throws ConfigError for unknown keys or bad values.
void apply_override(SimConfig &config, std::string_view key, std::string_view value);
/// "key=value" form of apply_override.
void apply_override(SimConfig &config, std::string_view assignment);

/// key=value lines; a `preset=NAME` line (which must come first) resets the
/// config to that preset. `#` starts a comment.
SimConfig parse_config_text(std::string_view text, SimConfig base);
SimConfig load_config_file(const std::string &path, SimConfig base);

/// Re-splits the area budget so that `sram_fraction` of it is SRAM and the
/// rest is STT-MRAM at four times the density. Keeps the preset's STT mode.
void apply_sram_ratio(SimConfig &config, double sram_fraction);

}  // namespace fusesim
