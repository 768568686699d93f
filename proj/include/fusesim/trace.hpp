#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fusesim/geometry.hpp"

namespace fusesim {

enum class Op : std::uint8_t { Read, Write };

struct TraceRecord {
  Cycle cycle = 0;
  std::uint32_t warp_id = 0;
  std::uint32_t pc = 0;
  std::uint32_t addr = 0;
  Op op = Op::Read;

  bool operator==(const TraceRecord &) const = default;

  LineAddr line() const { return LineAddr::from_byte(addr); }
  bool is_write() const { return op == Op::Write; }
};

using Trace = std::vector<TraceRecord>;

class MalformedLine : public std::runtime_error {
 public:
  MalformedLine(std::size_t line_no, const std::string &why)
      : std::runtime_error("trace line " + std::to_string(line_no) + ": " + why), line_no_(line_no) {}
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

/// Parses `cycle,warp_id,pc_hex,addr_hex,R|W` records. Lines starting with
/// '#' and blank lines are skipped; line numbers in errors are 1-based.
/// Records must be ordered by non-decreasing cycle and have warp_id < max_warps.
Trace parse_trace(std::istream &in, std::uint32_t max_warps = 48);
Trace parse_trace_string(std::string_view text, std::uint32_t max_warps = 48);
Trace load_trace_file(const std::string &path, std::uint32_t max_warps = 48);

void write_trace(std::ostream &out, const Trace &trace);
std::string format_record(const TraceRecord &rec);

enum class ReadLevelLabel : std::uint8_t { WM, ReadIntensive, WORM, WORO };

std::string_view to_string(ReadLevelLabel label);

inline constexpr std::uint32_t kDefaultReadIntensiveFactor = 4;

/// Ground-truth read level of every line touched by the trace.
///
/// One write and no reads is WORO; one write and at least one read is WORM;
/// two or more writes with reads >= writes * read_intensive_factor is
/// ReadIntensive; any other multi-write line is WM. Lines that are only read
/// (written before the trace began) are labelled WORM.
std::map<LineAddr, ReadLevelLabel> label_trace(const Trace &trace,
                                               std::uint32_t read_intensive_factor = kDefaultReadIntensiveFactor);

struct LabelFractions {
  double wm = 0, read_intensive = 0, worm = 0, woro = 0;
};
LabelFractions label_fractions(const std::map<LineAddr, ReadLevelLabel> &labels);

class InvalidMix : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters of the synthetic trace generator.
///
/// Every line in the pool belongs to exactly one read-level class, chosen so
/// that class counts follow the fractions. Each class owns `pcs_per_class`
/// program counters and a line is touched only by one PC of its class and by
/// one warp, which gives a PC-indexed predictor something stationary to learn.
/// `window` lines are live at once; each step touches a random live line, so
/// reuse distances scale with the window.
struct MixSpec {
  double wm = 0.0;
  double read_intensive = 0.0;
  double worm = 1.0;
  double woro = 0.0;
  std::uint32_t pool_lines = 1000;
  std::uint64_t refs = 10000;
  std::uint32_t pcs_per_class = 4;
  std::uint32_t window = 64;           // lines live at once
  std::uint32_t issue_interval = 1;    // cycles between consecutive records
  std::uint32_t warps = 48;
  std::uint32_t base_line = 0x100000;
  std::uint32_t read_intensive_factor = kDefaultReadIntensiveFactor;

  /// Throws InvalidMix.
  void validate() const;
};

/// key=value lines (`#` comments); unknown keys throw InvalidMix.
MixSpec parse_mix_spec(std::string_view text);
MixSpec load_mix_spec_file(const std::string &path);
void apply_mix_key(MixSpec &spec, std::string_view key, std::string_view value);

/// Deterministic for a given (spec, seed).
Trace generate_synthetic(const MixSpec &spec, std::uint64_t seed);

/// PC used by the generator for a class; exposed for tests.
std::uint32_t synthetic_pc(ReadLevelLabel label, std::uint32_t index);

}  // namespace fusesim
