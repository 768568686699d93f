#include "fusesim/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace fusesim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, int base, T &out) {
  s = trim(s);
  if (base == 16 && s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(s.substr(start));
      return fields;
    }
    fields.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

Trace parse_trace(std::istream &in, std::uint32_t max_warps) {
  Trace out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split_commas(line);
    if (fields.size() != 5) {
      throw MalformedLine(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    }
    TraceRecord rec;
    if (!parse_number(fields[0], 10, rec.cycle)) throw MalformedLine(line_no, "bad cycle");
    if (!parse_number(fields[1], 10, rec.warp_id)) throw MalformedLine(line_no, "bad warp id");
    if (rec.warp_id >= max_warps) throw MalformedLine(line_no, "warp id out of range");
    if (!parse_number(fields[2], 16, rec.pc)) throw MalformedLine(line_no, "bad pc");
    if (!parse_number(fields[3], 16, rec.addr)) throw MalformedLine(line_no, "bad address");
    const auto op = trim(fields[4]);
    if (op == "R") {
      rec.op = Op::Read;
    } else if (op == "W") {
      rec.op = Op::Write;
    } else {
      throw MalformedLine(line_no, "unknown op '" + std::string(op) + "'");
    }
    if (!out.empty() && rec.cycle < out.back().cycle) throw MalformedLine(line_no, "cycle decreases");
    out.push_back(rec);
  }
  return out;
}

Trace parse_trace_string(std::string_view text, std::uint32_t max_warps) {
  std::istringstream in{std::string(text)};
  return parse_trace(in, max_warps);
}

Trace load_trace_file(const std::string &path, std::uint32_t max_warps) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path);
  return parse_trace(in, max_warps);
}

std::string format_record(const TraceRecord &rec) {
  std::ostringstream os;
  os << rec.cycle << ',' << rec.warp_id << ",0x" << std::hex << rec.pc << ",0x" << rec.addr << std::dec << ','
     << (rec.is_write() ? 'W' : 'R');
  return os.str();
}

void write_trace(std::ostream &out, const Trace &trace) {
  out << "# cycle,warp_id,pc,addr,op\n";
  for (const auto &rec : trace) out << format_record(rec) << '\n';
}

std::string_view to_string(ReadLevelLabel label) {
  switch (label) {
    case ReadLevelLabel::WM:
      return "WM";
    case ReadLevelLabel::ReadIntensive:
      return "ReadIntensive";
    case ReadLevelLabel::WORM:
      return "WORM";
    case ReadLevelLabel::WORO:
      return "WORO";
  }
  return "?";
}

std::map<LineAddr, ReadLevelLabel> label_trace(const Trace &trace, std::uint32_t read_intensive_factor) {
  struct Counts {
    std::uint64_t reads = 0, writes = 0;
  };
  std::map<LineAddr, Counts> counts;
  for (const auto &rec : trace) {
    auto &c = counts[rec.line()];
    (rec.is_write() ? c.writes : c.reads) += 1;
  }
  std::map<LineAddr, ReadLevelLabel> labels;
  for (const auto &[line, c] : counts) {
    ReadLevelLabel label;
    if (c.writes <= 1) {
      label = (c.writes == 1 && c.reads == 0) ? ReadLevelLabel::WORO : ReadLevelLabel::WORM;
    } else if (c.reads >= c.writes * read_intensive_factor) {
      label = ReadLevelLabel::ReadIntensive;
    } else {
      label = ReadLevelLabel::WM;
    }
    labels.emplace(line, label);
  }
  return labels;
}

LabelFractions label_fractions(const std::map<LineAddr, ReadLevelLabel> &labels) {
  LabelFractions f;
  if (labels.empty()) return f;
  for (const auto &[line, label] : labels) {
    switch (label) {
      case ReadLevelLabel::WM:
        f.wm += 1;
        break;
      case ReadLevelLabel::ReadIntensive:
        f.read_intensive += 1;
        break;
      case ReadLevelLabel::WORM:
        f.worm += 1;
        break;
      case ReadLevelLabel::WORO:
        f.woro += 1;
        break;
    }
  }
  const double n = static_cast<double>(labels.size());
  f.wm /= n;
  f.read_intensive /= n;
  f.worm /= n;
  f.woro /= n;
  return f;
}

void MixSpec::validate() const {
  const std::array<double, 4> fr{wm, read_intensive, worm, woro};
  for (double f : fr) {
    if (!(f >= 0.0)) throw InvalidMix("mix fractions must be non-negative");
  }
  const double sum = wm + read_intensive + worm + woro;
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidMix("mix fractions must sum to 1, got " + std::to_string(sum));
  if (pool_lines == 0) throw InvalidMix("pool_lines must be positive");
  if (pcs_per_class == 0 || pcs_per_class > 64) throw InvalidMix("pcs_per_class must be in [1,64]");
  if (window == 0) throw InvalidMix("window must be positive");
  if (issue_interval == 0) throw InvalidMix("issue_interval must be positive");
  if (warps == 0) throw InvalidMix("warps must be positive");
  if (read_intensive_factor == 0) throw InvalidMix("read_intensive_factor must be positive");
  if (std::uint64_t{base_line} + pool_lines > (std::uint64_t{1} << (kAddressBits - kOffsetBits))) {
    throw InvalidMix("line pool exceeds the 32-bit address space");
  }
}

void apply_mix_key(MixSpec &spec, std::string_view key, std::string_view value) {
  value = trim(value);
  auto as_double = [&](double &out) {
    try {
      std::size_t used = 0;
      out = std::stod(std::string(value), &used);
      if (used != value.size()) throw InvalidMix("bad number for " + std::string(key));
    } catch (const std::logic_error &) {
      throw InvalidMix("bad number for " + std::string(key));
    }
  };
  auto as_uint = [&](auto &out) {
    if (!parse_number(value, 10, out)) throw InvalidMix("bad integer for " + std::string(key));
  };
  if (key == "wm") {
    as_double(spec.wm);
  } else if (key == "read_intensive") {
    as_double(spec.read_intensive);
  } else if (key == "worm") {
    as_double(spec.worm);
  } else if (key == "woro") {
    as_double(spec.woro);
  } else if (key == "pool" || key == "pool_lines") {
    as_uint(spec.pool_lines);
  } else if (key == "refs") {
    as_uint(spec.refs);
  } else if (key == "pcs_per_class") {
    as_uint(spec.pcs_per_class);
  } else if (key == "window") {
    as_uint(spec.window);
  } else if (key == "issue_interval") {
    as_uint(spec.issue_interval);
  } else if (key == "warps") {
    as_uint(spec.warps);
  } else if (key == "base_line") {
    as_uint(spec.base_line);
  } else if (key == "read_intensive_factor") {
    as_uint(spec.read_intensive_factor);
  } else {
    throw InvalidMix("unknown mix key: " + std::string(key));
  }
}

MixSpec parse_mix_spec(std::string_view text) {
  MixSpec spec;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InvalidMix("expected key=value: " + std::string(line));
    apply_mix_key(spec, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return spec;
}

MixSpec load_mix_spec_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InvalidMix("cannot open mix spec " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mix_spec(ss.str());
}

std::uint32_t synthetic_pc(ReadLevelLabel label, std::uint32_t index) {
  return 0x1000u + (static_cast<std::uint32_t>(label) << 8) + index * 4u;
}

namespace {

struct LinePlan {
  ReadLevelLabel label = ReadLevelLabel::WORM;
  std::uint32_t writes = 1;
  std::uint32_t reads = 0;
  std::uint32_t pc = 0;
  std::uint32_t warp = 0;
};

std::vector<Op> script_for(const LinePlan &plan) {
  std::vector<Op> ops;
  ops.reserve(plan.writes + plan.reads);
  switch (plan.label) {
    case ReadLevelLabel::WORO:
    case ReadLevelLabel::WORM:
      ops.push_back(Op::Write);
      ops.insert(ops.end(), plan.reads, Op::Read);
      break;
    case ReadLevelLabel::ReadIntensive: {
      // Each write is followed by an even share of the reads.
      const std::uint32_t per = plan.reads / plan.writes;
      std::uint32_t left = plan.reads;
      for (std::uint32_t w = 0; w < plan.writes; ++w) {
        ops.push_back(Op::Write);
        const std::uint32_t n = (w + 1 == plan.writes) ? left : per;
        ops.insert(ops.end(), n, Op::Read);
        left -= n;
      }
      break;
    }
    case ReadLevelLabel::WM:
      ops.push_back(Op::Write);
      ops.insert(ops.end(), plan.reads, Op::Read);
      ops.insert(ops.end(), plan.writes - 1, Op::Write);
      break;
  }
  return ops;
}

// Largest-remainder apportionment of pool lines to classes.
std::array<std::uint32_t, 4> class_counts(const MixSpec &spec) {
  const std::array<double, 4> fr{spec.wm, spec.read_intensive, spec.worm, spec.woro};
  std::array<std::uint32_t, 4> counts{};
  std::array<double, 4> rem{};
  std::uint32_t assigned = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double exact = fr[i] * spec.pool_lines;
    counts[i] = static_cast<std::uint32_t>(std::floor(exact));
    rem[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < spec.pool_lines; ++k, ++assigned) counts[order[k % 4]] += 1;
  return counts;
}

}  // namespace

Trace generate_synthetic(const MixSpec &spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng); };

  const auto counts = class_counts(spec);
  const std::uint32_t f = spec.read_intensive_factor;
  std::vector<LinePlan> plans;
  plans.reserve(spec.pool_lines);
  std::uint64_t min_refs = 0;
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::uint32_t i = 0; i < counts[c]; ++i) {
      LinePlan p;
      p.label = static_cast<ReadLevelLabel>(c);
      switch (p.label) {
        case ReadLevelLabel::WM:
          p.writes = 2;
          break;
        case ReadLevelLabel::ReadIntensive:
          p.writes = 2;
          p.reads = 2 * f;
          break;
        case ReadLevelLabel::WORM:
          p.reads = 1;
          break;
        case ReadLevelLabel::WORO:
          break;
      }
      min_refs += p.writes + p.reads;
      plans.push_back(p);
    }
  }
  if (spec.refs < min_refs) {
    throw InvalidMix("refs=" + std::to_string(spec.refs) + " is below the " + std::to_string(min_refs) +
                     " references the mix needs");
  }
  std::shuffle(plans.begin(), plans.end(), rng);

  // Spread the remaining reference budget evenly over lines that can absorb it.
  std::vector<std::size_t> growable;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (plans[i].label != ReadLevelLabel::WORO) growable.push_back(i);
  }
  const std::uint64_t extra = spec.refs - min_refs;
  if (extra > 0 && growable.empty()) throw InvalidMix("an all-WORO mix needs refs == pool_lines");
  if (!growable.empty()) {
    const std::uint64_t each = extra / growable.size();
    const std::uint64_t remainder = extra % growable.size();
    for (std::size_t k = 0; k < growable.size(); ++k) {
      LinePlan &p = plans[growable[k]];
      const std::uint64_t add = each + (k < remainder ? 1 : 0);
      if (p.label == ReadLevelLabel::WM) {
        for (std::uint64_t u = 0; u < add; ++u) {
          if (u % 3 == 2 && p.reads + 1 < f * p.writes) {
            ++p.reads;
          } else {
            ++p.writes;
          }
        }
      } else {
        p.reads += static_cast<std::uint32_t>(add);
      }
    }
  }

  for (auto &p : plans) {
    p.pc = synthetic_pc(p.label, static_cast<std::uint32_t>(uniform(spec.pcs_per_class)));
    p.warp = static_cast<std::uint32_t>(uniform(spec.warps));
  }

  std::vector<std::uint32_t> order(plans.size());
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);

  struct Live {
    std::uint32_t line;
    std::vector<Op> script;
    std::size_t next = 0;
  };
  std::vector<Live> live;
  std::size_t feed = 0;
  auto admit = [&]() -> Live {
    const std::uint32_t idx = order[feed++];
    return Live{idx, script_for(plans[idx]), 0};
  };
  while (live.size() < spec.window && feed < order.size()) live.push_back(admit());

  Trace out;
  out.reserve(spec.refs);
  while (!live.empty()) {
    const std::size_t slot = uniform(live.size());
    Live &l = live[slot];
    const LinePlan &p = plans[l.line];
    TraceRecord rec;
    rec.cycle = out.size() * spec.issue_interval;
    rec.warp_id = p.warp;
    rec.pc = p.pc;
    rec.addr = (spec.base_line + l.line) << kOffsetBits;
    rec.op = l.script[l.next++];
    out.push_back(rec);
    if (l.next == l.script.size()) {
      if (feed < order.size()) {
        l = admit();
      } else {
        live[slot] = std::move(live.back());
        live.pop_back();
      }
    }
  }
  return out;
}

}  // namespace fusesim
