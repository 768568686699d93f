#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fusesim/trace.hpp"

using namespace fusesim;

TEST_SUITE("trace") {

TEST_CASE("parse_trace maps fields directly") {
  const Trace t = parse_trace_string("0,0,0x400,0x1000,R\n5,3,0x404,0x2080,W\n");
  REQUIRE(t.size() == 2);
  CHECK(t[0] == TraceRecord{0, 0, 0x400, 0x1000, Op::Read});
  CHECK(t[1] == TraceRecord{5, 3, 0x404, 0x2080, Op::Write});
}

TEST_CASE("parse_trace skips comments and blank lines") {
  const Trace t = parse_trace_string("# header\n\n0,1,0x10,0x80,R\n  \n# tail\n");
  REQUIRE(t.size() == 1);
  CHECK(t[0].warp_id == 1);
}

TEST_CASE("malformed lines report their 1-based line number") {
  auto line_of = [](const char *text) {
    try {
      parse_trace_string(text);
    } catch (const MalformedLine &e) {
      return e.line_no();
    }
    return std::size_t{0};
  };
  CHECK(line_of("0,0,0x400,GARBAGE,R") == 1);
  CHECK(line_of("0,0,0x400,0x1000,R\n1,0,0x400,0x1000,X") == 2);
  CHECK(line_of("0,0,0x400,0x1000") == 1);
  CHECK(line_of("0,0,0x400,0x1000,R,extra") == 1);
  CHECK(line_of("# c\n0,48,0x400,0x1000,R") == 2);
  CHECK(line_of("5,0,0x400,0x1000,R\n4,0,0x400,0x1000,R") == 2);
  CHECK(line_of("0,0,0x400,0x1FFFFFFFF,R") == 1);
}

TEST_CASE("write_trace round-trips") {
  MixSpec spec;
  spec.pool_lines = 50;
  spec.refs = 300;
  const Trace t = generate_synthetic(spec, 3);
  std::ostringstream os;
  write_trace(os, t);
  CHECK(parse_trace_string(os.str()) == t);
}

TEST_CASE("label_trace examples") {
  const LineAddr a = LineAddr::from_byte(0x1000);
  auto rec = [](Op op) { return TraceRecord{0, 0, 0x400, 0x1000, op}; };
  CHECK(label_trace({rec(Op::Write)}).at(a) == ReadLevelLabel::WORO);
  CHECK(label_trace({rec(Op::Write), rec(Op::Read), rec(Op::Read)}).at(a) == ReadLevelLabel::WORM);

  Trace ri{rec(Op::Write)};
  for (int i = 0; i < 8; ++i) ri.push_back(rec(Op::Read));
  ri.push_back(rec(Op::Write));
  CHECK(label_trace(ri).at(a) == ReadLevelLabel::ReadIntensive);

  Trace wm{rec(Op::Write), rec(Op::Read), rec(Op::Write), rec(Op::Write)};
  CHECK(label_trace(wm).at(a) == ReadLevelLabel::WM);
  // 2 writes, 7 reads: one read short of the factor-4 boundary.
  ri.erase(ri.begin() + 1);
  CHECK(label_trace(ri).at(a) == ReadLevelLabel::WM);
  CHECK(label_trace({rec(Op::Read)}).at(a) == ReadLevelLabel::WORM);
}

TEST_CASE("a line's label ignores how other lines are interleaved") {
  MixSpec spec;
  spec.wm = 0.3;
  spec.worm = 0.4;
  spec.woro = 0.2;
  spec.read_intensive = 0.1;
  spec.pool_lines = 200;
  spec.refs = 4000;
  Trace t = generate_synthetic(spec, 5);
  const auto before = label_trace(t);
  const LineAddr pinned = t[0].line();
  Trace mine, others;
  for (const auto &r : t) (r.line() == pinned ? mine : others).push_back(r);
  std::mt19937_64 rng(9);
  std::shuffle(others.begin(), others.end(), rng);
  Trace merged = others;
  for (std::size_t i = 0; i < mine.size(); ++i) merged.insert(merged.begin() + static_cast<long>(i * 3), mine[i]);
  CHECK(label_trace(merged).at(pinned) == before.at(pinned));
  CHECK(label_trace(merged) == before);
}

TEST_CASE("generate_synthetic with only WORM writes each line once, then reads it") {
  MixSpec spec;
  spec.worm = 1.0;
  spec.pool_lines = 100;
  spec.refs = 1000;
  const Trace t = generate_synthetic(spec, 1);
  CHECK(t.size() == 1000);
  std::map<LineAddr, std::vector<Op>> seq;
  for (const auto &r : t) seq[r.line()].push_back(r.op);
  CHECK(seq.size() == 100);
  for (const auto &[line, ops] : seq) {
    CHECK(ops.front() == Op::Write);
    CHECK(std::count(ops.begin(), ops.end(), Op::Write) == 1);
  }
}

TEST_CASE("generated label fractions follow the mix") {
  MixSpec spec;
  spec.wm = 0.5;
  spec.worm = 0.5;
  spec.pool_lines = 200;
  spec.refs = 5000;
  auto f = label_fractions(label_trace(generate_synthetic(spec, 7)));
  CHECK(std::abs(f.wm - 0.5) <= 0.02);
  CHECK(std::abs(f.worm - 0.5) <= 0.02);

  MixSpec worm_heavy;
  worm_heavy.worm = 0.8;
  worm_heavy.wm = 0.1;
  worm_heavy.read_intensive = 0.05;
  worm_heavy.woro = 0.05;
  worm_heavy.pool_lines = 2000;
  worm_heavy.refs = 20000;
  f = label_fractions(label_trace(generate_synthetic(worm_heavy, 11)));
  CHECK(std::abs(f.worm - 0.8) <= 0.02);
}

TEST_CASE("label fractions are within one point at a 10k pool") {
  MixSpec spec;
  spec.wm = 0.17;
  spec.read_intensive = 0.08;
  spec.worm = 0.6;
  spec.woro = 0.15;
  spec.pool_lines = 10000;
  spec.refs = 120000;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto f = label_fractions(label_trace(generate_synthetic(spec, seed)));
    CHECK(std::abs(f.wm - spec.wm) <= 0.01);
    CHECK(std::abs(f.read_intensive - spec.read_intensive) <= 0.01);
    CHECK(std::abs(f.worm - spec.worm) <= 0.01);
    CHECK(std::abs(f.woro - spec.woro) <= 0.01);
  }
}

TEST_CASE("generation is byte-identical for a fixed seed") {
  MixSpec spec;
  spec.wm = 0.25;
  spec.worm = 0.75;
  spec.pool_lines = 300;
  spec.refs = 3000;
  std::ostringstream a, b, c;
  write_trace(a, generate_synthetic(spec, 42));
  write_trace(b, generate_synthetic(spec, 42));
  write_trace(c, generate_synthetic(spec, 43));
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("each synthetic PC emits one class") {
  MixSpec spec;
  spec.wm = 0.25;
  spec.read_intensive = 0.25;
  spec.worm = 0.25;
  spec.woro = 0.25;
  spec.pool_lines = 400;
  spec.refs = 6000;
  const Trace t = generate_synthetic(spec, 8);
  const auto labels = label_trace(t);
  std::map<std::uint32_t, ReadLevelLabel> by_pc;
  for (const auto &r : t) {
    const auto [it, fresh] = by_pc.emplace(r.pc, labels.at(r.line()));
    CHECK(it->second == labels.at(r.line()));
  }
  for (const auto &[pc, label] : by_pc) CHECK(pc == synthetic_pc(label, (pc - synthetic_pc(label, 0)) / 4));
  CHECK(by_pc.size() <= 4 * spec.pcs_per_class);
}

TEST_CASE("invalid mixes are rejected") {
  MixSpec spec;
  spec.worm = 0.9;
  CHECK_THROWS_AS(generate_synthetic(spec, 1), InvalidMix);
  spec.worm = 1.1;
  spec.woro = -0.1;
  CHECK_THROWS_AS(generate_synthetic(spec, 1), InvalidMix);
  CHECK_THROWS_AS(parse_mix_spec("worm=1\nbogus=3\n"), InvalidMix);
}

TEST_CASE("mix spec text") {
  const MixSpec s = parse_mix_spec("# mix\nwm = 0.5\nworm=0.5\npool_lines=10\nrefs=99\nwindow=4\nissue_interval=3\n");
  CHECK(s.wm == 0.5);
  CHECK(s.pool_lines == 10);
  CHECK(s.refs == 99);
  CHECK(s.issue_interval == 3);
  const Trace t = generate_synthetic(s, 1);
  CHECK(t[1].cycle == 3);
}

}
