#include <random>

#include "doctest.h"
#include "fusesim/stt_bank.hpp"
#include "oracles.hpp"

using namespace fusesim;

namespace {

SttParams small(unsigned counters = 128) {
  SttParams p;
  p.cbf_counters = counters;
  return p;
}

// Cycles a search should take given the filters, computed from the outside:
// positives are polled in order until the one holding the line.
std::uint32_t expected_search_cycles(const SttBank &b, LineAddr line, std::optional<std::uint32_t> home) {
  std::uint32_t polled = 0;
  for (std::uint32_t p = 0; p < b.partitions(); ++p) {
    if (b.filter(p).test(line) == Membership::Negative) continue;
    ++polled;
    if (home && *home == p) break;
  }
  return std::max<std::uint32_t>(1, polled);
}

}  // namespace

TEST_SUITE("stt_bank") {

TEST_CASE("empty bank search misses in one cycle") {
  SttBank b(small());
  const auto r = b.search(LineAddr{42});
  CHECK(!r.hit);
  CHECK(r.search_cycles == 1);
  CHECK(r.positives == 0);
  CHECK(r.filters_tested == 128);
}

TEST_CASE("resident line in the only positive partition") {
  SttBank b(small());
  b.insert(LineAddr{5}, 0, false);
  const auto r = b.search(LineAddr{5});
  CHECK(r.hit);
  CHECK(r.slot == 0);
  CHECK(r.search_cycles == 1);
  CHECK(r.false_positives == 0);
}

TEST_CASE("two false positive partitions before the hit cost three cycles") {
  // Small filters make false positives easy to find.
  for (std::uint32_t trial = 0; trial < 5000; ++trial) {
    SttBank b(small(16));
    for (std::uint32_t i = 0; i < 12; ++i) b.insert(LineAddr{trial * 1000 + i}, 0, false);
    const LineAddr target{trial * 1000 + 8};  // slot 8, partition 2
    if (b.filter(0).test(target) != Membership::Positive || b.filter(1).test(target) != Membership::Positive) continue;
    const auto r = b.search(target);
    CHECK(r.hit);
    CHECK(r.slot == 8);
    CHECK(r.search_cycles == 3);
    CHECK(r.false_positives == 2);
    CHECK(r.positives == 3);
    return;
  }
  FAIL("no adversarial layout found");
}

TEST_CASE("search cycles match the polling rule") {
  SttBank b(small(32));
  std::mt19937_64 rng(8);
  for (std::uint32_t i = 0; i < 2000; ++i) {
    const LineAddr l{static_cast<std::uint32_t>(rng() % 100000)};
    if (!b.contains(l)) b.insert(l, 0, false);
  }
  for (int i = 0; i < 3000; ++i) {
    const LineAddr l{static_cast<std::uint32_t>(rng() % 100000)};
    std::optional<std::uint32_t> home;
    b.for_each_valid([&](LineAddr x, const CacheLine &) {
      if (x == l) home = 0;
    });
    const bool resident = b.contains(l);
    const auto r = b.search(l);
    REQUIRE(r.hit == resident);
    if (resident) home = r.slot / b.params().slots_per_partition;
    REQUIRE(r.search_cycles == expected_search_cycles(b, l, home));
  }
}

TEST_CASE("513th insert evicts the first") {
  SttBank b(small());
  for (std::uint32_t i = 0; i < 512; ++i) CHECK(!b.insert(LineAddr{i + 1}, static_cast<PcSignature>(i), i == 0));
  CHECK(b.fifo_cursor() == 0);
  const auto v = b.insert(LineAddr{9999}, 0, false);
  REQUIRE(v);
  CHECK(*v == EvictedLine{LineAddr{1}, true, 0});
  CHECK(!b.contains(LineAddr{1}));
  CHECK(b.contains(LineAddr{9999}));
  CHECK(b.fifo_cursor() == 1);
  CHECK_THROWS_AS(b.insert(LineAddr{9999}, 0, false), DuplicateInsert);
}

TEST_CASE("contents match a fully-associative FIFO") {
  for (const bool approx : {true, false}) {
    SttParams p = small(64);
    if (!approx) {
      p.approx_fa = false;
      p.geom = {1, 512};
    }
    SttBank b(p);
    oracle::FifoCache ref(512);
    std::mt19937_64 rng(approx ? 1 : 2);
    for (int i = 0; i < 20000; ++i) {
      const auto v = static_cast<std::uint32_t>(rng() % 2000);
      const bool hit = b.search(LineAddr{v}).hit;
      REQUIRE(hit == ref.contains(v));
      if (!hit) {
        const auto e = b.insert(LineAddr{v}, 0, false);
        const auto re = ref.insert(v);
        REQUIRE(e.has_value() == re.has_value());
        if (e) REQUIRE(e->line.value == *re);
      }
    }
    CHECK(b.cbf_registration_consistent());
  }
}

TEST_CASE("invalidate keeps filters registered") {
  SttBank b(small(16));
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5000; ++i) {
    const LineAddr l{static_cast<std::uint32_t>(rng() % 3000)};
    if (rng() % 3 == 0) {
      b.invalidate(l);
    } else if (!b.contains(l)) {
      b.insert(l, 0, false);
    }
    REQUIRE(b.cbf_registration_consistent());
  }
  CHECK(!b.invalidate(LineAddr{123456}));
}

TEST_CASE("set-associative mode") {
  SttParams p;
  p.approx_fa = false;
  p.geom = {64, 8};
  SttBank b(p);
  for (std::uint32_t i = 0; i < 9; ++i) b.insert(LineAddr{i * 64}, 0, false);
  CHECK(!b.contains(LineAddr{0}));
  CHECK(b.search(LineAddr{64}).hit);
  CHECK(b.search(LineAddr{64}).search_cycles == 1);
  CHECK(b.search(LineAddr{1}).search_cycles == 1);
}

TEST_CASE("tag queue holds 16 entries") {
  SttBank b(small());
  for (std::uint64_t i = 0; i < 16; ++i) CHECK(b.enqueue({TagCmd::Read, LineAddr{1}, i}) == EnqueueResult::Accepted);
  CHECK(b.queue_full());
  CHECK(b.enqueue({TagCmd::Read, LineAddr{1}, 16}) == EnqueueResult::QueueFull);
  CHECK(b.queue_occupancy() == 16);
}

TEST_CASE("insert completes in five cycles, read hit in two") {
  SttBank b(small());
  b.enqueue({TagCmd::F, LineAddr{7}, 0, true, 3});
  CHECK(b.tick(10).empty());
  CHECK(b.next_completion() == 15);
  CHECK(b.free_at() == 15);
  CHECK(b.tick(14).empty());
  auto ev = b.tick(15);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].cmd == TagCmd::F);
  CHECK(ev[0].done == 15);
  CHECK(b.contains(LineAddr{7}));
  CHECK(b.line_state(LineAddr{7})->dirty);

  b.enqueue({TagCmd::Read, LineAddr{7}, 1});
  b.tick(20);
  // Server is released after the search; the data read overlaps.
  CHECK(b.free_at() == 21);
  CHECK(b.next_completion() == 22);
  ev = b.tick(22);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].hit);
  CHECK(ev[0].search_cycles == 1);
  CHECK(ev[0].token == 1);
}

TEST_CASE("read miss completes after the search") {
  SttBank b(small());
  b.enqueue({TagCmd::Read, LineAddr{3}, 9});
  b.tick(0);
  const auto ev = b.tick(1);
  REQUIRE(ev.size() == 1);
  CHECK(!ev[0].hit);
  CHECK(ev[0].done == 1);
}

TEST_CASE("pipelined reads overlap") {
  SttBank b(small());
  b.insert(LineAddr{1}, 0, false);
  b.insert(LineAddr{2}, 0, false);
  b.enqueue({TagCmd::Read, LineAddr{1}, 0});
  b.enqueue({TagCmd::Read, LineAddr{2}, 1});
  b.tick(0);
  auto ev = b.tick(1);
  CHECK(ev.empty());
  CHECK(b.in_flight().size() == 2);
  ev = b.tick(2);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].token == 0);
  ev = b.tick(3);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].token == 1);
  CHECK(b.idle());
}

TEST_CASE("write entry marks a resident line dirty") {
  SttBank b(small());
  b.insert(LineAddr{4}, 0, false);
  b.enqueue({TagCmd::Write, LineAddr{4}, 0});
  b.tick(0);
  CHECK(b.free_at() == 6);
  const auto ev = b.tick(6);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].hit);
  CHECK(b.line_state(LineAddr{4})->dirty);
}

TEST_CASE("drain") {
  SttBank b(small());
  CHECK(b.drain(0) == 0);
  CHECK(b.stats().flushes == 0);

  b.enqueue({TagCmd::F, LineAddr{1}, 0});
  b.enqueue({TagCmd::F, LineAddr{2}, 1});
  b.enqueue({TagCmd::Read, LineAddr{1}, 7});
  std::vector<CompletionEvent> seen;
  const auto cycles = b.drain(100, [&](const CompletionEvent &e) { seen.push_back(e); });
  // 5 + 5 for the inserts, then a one-cycle search and one-cycle read.
  CHECK(cycles == 12);
  REQUIRE(seen.size() == 3);
  CHECK(seen[0].done == 105);
  CHECK(seen[1].done == 110);
  CHECK(seen[2].hit);
  CHECK(seen[2].done == 112);
  CHECK(b.idle());
  CHECK(b.stats().flushes == 1);
  CHECK(b.free_at() == 112);
}

TEST_CASE("drain finishes an entry already in service") {
  SttBank b(small());
  b.enqueue({TagCmd::F, LineAddr{1}, 0});
  b.tick(10);
  b.enqueue({TagCmd::F, LineAddr{2}, 1});
  std::vector<Cycle> done;
  const auto cycles = b.drain(12, [&](const CompletionEvent &e) { done.push_back(e.done); });
  CHECK(done == std::vector<Cycle>{15, 20});
  CHECK(cycles == 8);
}

TEST_CASE("full-occupancy statistics start once the FIFO wraps") {
  SttBank b(small());
  for (std::uint32_t i = 0; i < 511; ++i) b.insert(LineAddr{i}, 0, false);
  b.search(LineAddr{0});
  CHECK(b.stats().searches_at_full == 0);
  b.insert(LineAddr{511}, 0, false);
  b.invalidate(LineAddr{3});
  b.search(LineAddr{0});
  CHECK(b.stats().searches_at_full == 1);
  CHECK(b.stats().searches == 2);
}

TEST_CASE("constructor validation") {
  SttParams p;
  p.geom = {2, 512};
  CHECK_THROWS(SttBank(p));
  p = {};
  p.slots_per_partition = 3;
  CHECK_THROWS(SttBank(p));
  p = {};
  p.tag_queue_capacity = 0;
  CHECK_THROWS(SttBank(p));
}

}
