#include <random>

#include "doctest.h"
#include "fusesim/sram_bank.hpp"
#include "oracles.hpp"

using namespace fusesim;

namespace {
// Lines 0, 64, 128, ... all map to set 0 of a 64-set bank.
LineAddr in_set0(std::uint32_t i) { return LineAddr{i * 64}; }
}  // namespace

TEST_SUITE("sram_bank") {

TEST_CASE("lookup") {
  SramBank b({64, 4});
  CHECK(!b.lookup(LineAddr{7}));
  b.fill(LineAddr{7}, 0, false);
  CHECK(b.lookup(LineAddr{7}));
  for (std::uint32_t i = 0; i < 5; ++i) b.fill(in_set0(i), 0, false);
  CHECK(!b.contains(in_set0(0)));
  CHECK(b.contains(in_set0(1)));
}

TEST_CASE("lookup does not touch recency") {
  SramBank b({64, 4});
  for (std::uint32_t i = 0; i < 4; ++i) b.fill(in_set0(i), 0, false);
  CHECK(b.lookup(in_set0(0)));
  b.fill(in_set0(4), 0, false);
  CHECK(!b.contains(in_set0(0)));
}

TEST_CASE("access") {
  SramBank b({64, 4});
  b.fill(LineAddr{3}, 0, false);
  auto r = b.access(LineAddr{3}, Op::Read);
  CHECK(r.hit);
  CHECK(!r.dirty_set);
  CHECK(r.latency_cycles == 1);
  r = b.access(LineAddr{3}, Op::Write);
  CHECK(r.dirty_set);
  CHECK(b.line_state(LineAddr{3})->dirty);
  r = b.access(LineAddr{4}, Op::Write);
  CHECK(!r.hit);
  CHECK(r.latency_cycles == 1);
  CHECK(!b.contains(LineAddr{4}));
}

TEST_CASE("two hits reorder recency") {
  SramBank b({64, 4});
  for (std::uint32_t i = 0; i < 4; ++i) b.fill(in_set0(i), 0, false);
  b.access(in_set0(0), Op::Read);
  b.access(in_set0(1), Op::Read);
  // 1 is MRU, 0 second; the next two fills evict 2 and 3.
  CHECK(b.line_state(in_set0(1))->lru_rank == 0);
  CHECK(b.line_state(in_set0(0))->lru_rank == 1);
  b.fill(in_set0(4), 0, false);
  b.fill(in_set0(5), 0, false);
  CHECK(b.contains(in_set0(0)));
  CHECK(b.contains(in_set0(1)));
  CHECK(!b.contains(in_set0(2)));
  CHECK(!b.contains(in_set0(3)));
}

TEST_CASE("fill returns the LRU victim with its state") {
  SramBank b({64, 4});
  CHECK(!b.fill(in_set0(0), 0x11, true));
  for (std::uint32_t i = 1; i < 4; ++i) CHECK(!b.fill(in_set0(i), 0, false));
  CHECK(b.peek_victim(in_set0(9)) == EvictedLine{in_set0(0), true, 0x11});
  const auto v = b.fill(in_set0(4), 0, false);
  REQUIRE(v);
  CHECK(*v == EvictedLine{in_set0(0), true, 0x11});
  CHECK_THROWS(b.fill(in_set0(4), 0, false));
}

TEST_CASE("invalidate") {
  SramBank b({64, 4});
  CHECK(!b.invalidate(LineAddr{1}));
  b.fill(in_set0(0), 0, true);
  b.fill(in_set0(1), 0, false);
  CHECK(b.invalidate(in_set0(0)));
  CHECK(!b.contains(in_set0(0)));
  CHECK(b.contains(in_set0(1)));
  CHECK(b.valid_count() == 1);
  // The freed way is reused before anything is evicted.
  for (std::uint32_t i = 2; i < 5; ++i) CHECK(!b.fill(in_set0(i), 0, false));
}

TEST_CASE("lru ranks stay a permutation") {
  SramBank b({4, 4});
  std::mt19937 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const LineAddr l{static_cast<std::uint32_t>(rng() % 40)};
    if (!b.access(l, Op::Read).hit) b.fill(l, 0, false);
    for (std::uint32_t s = 0; s < 4; ++s) {
      std::vector<bool> seen(4, false);
      for (std::uint32_t w = 0; w < 4; ++w) seen.at(b.way(s, w).lru_rank) = true;
      REQUIRE(std::all_of(seen.begin(), seen.end(), [](bool x) { return x; }));
    }
  }
}

TEST_CASE("hit and miss sequence matches the LRU oracle") {
  for (const CacheGeometry g : {CacheGeometry{64, 4}, CacheGeometry{64, 2}, CacheGeometry{1, 256}}) {
    SramBank b(g);
    oracle::LruCache ref(g.sets, g.ways);
    std::mt19937_64 rng(g.sets * 31 + g.ways);
    for (int i = 0; i < 100000; ++i) {
      const auto v = static_cast<std::uint32_t>(rng() % (g.lines() * 3));
      const bool hit = b.access(LineAddr{v}, Op::Read).hit;
      REQUIRE(hit == ref.access(v));
      if (!hit) {
        const auto victim = b.fill(LineAddr{v}, 0, false);
        const auto ref_victim = ref.fill(v);
        REQUIRE(victim.has_value() == ref_victim.has_value());
        if (victim) REQUIRE(victim->line.value == *ref_victim);
      }
    }
  }
}

TEST_CASE("dirty is only set by writes and only cleared by leaving") {
  SramBank b({64, 4});
  std::mt19937_64 rng(5);
  std::map<std::uint32_t, bool> dirty;
  for (int i = 0; i < 20000; ++i) {
    const auto v = static_cast<std::uint32_t>(rng() % 600);
    const Op op = rng() % 3 == 0 ? Op::Write : Op::Read;
    if (b.access(LineAddr{v}, op).hit) {
      if (op == Op::Write) dirty[v] = true;
    } else {
      if (auto e = b.fill(LineAddr{v}, 0, op == Op::Write)) {
        REQUIRE(e->dirty == dirty[e->line.value]);
        dirty.erase(e->line.value);
      }
      dirty[v] = op == Op::Write;
    }
    REQUIRE(b.line_state(LineAddr{v})->dirty == dirty[v]);
  }
}

}
