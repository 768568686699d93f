#include <random>

#include "doctest.h"
#include "fusesim/geometry.hpp"

using namespace fusesim;

TEST_SUITE("geometry") {

TEST_CASE("decompose examples at 64 sets") {
  const CacheGeometry g{64, 4};
  CHECK(decompose(0x00000000, g) == AddressParts{0, 0, 0});
  CHECK(decompose(0x00001F80, g) == AddressParts{0, 63, 0});
  CHECK(decompose(0xFFFFFFFF, g) == AddressParts{0x7FFFF, 63, 127});
  CHECK(g.tag_bits() == 19);
  CHECK(g.index_bits() == 6);
}

TEST_CASE("decompose and recompose round-trip") {
  std::mt19937_64 rng(1);
  for (const CacheGeometry g : {CacheGeometry{1, 512}, CacheGeometry{64, 2}, CacheGeometry{64, 4}, CacheGeometry{256, 4},
                                CacheGeometry{512, 8}}) {
    for (int i = 0; i < 10000; ++i) {
      const auto addr = static_cast<std::uint32_t>(rng());
      const AddressParts p = decompose(addr, g);
      REQUIRE(recompose(p, g) == addr);
      REQUIRE(p.offset < kLineBytes);
      REQUIRE(p.set < g.sets);
      const LineAddr line = LineAddr::from_byte(addr);
      REQUIRE(line_from(tag_of(line, g), set_of(line, g), g) == line);
    }
  }
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(CacheGeometry({3, 4}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(CacheGeometry({4, 0}).validate(), std::invalid_argument);
  CHECK_NOTHROW(CacheGeometry({1, 7}).validate());
}

TEST_CASE("preset geometries and energies") {
  const auto l1 = preset("L1-SRAM");
  CHECK(l1.sram == CacheGeometry{64, 4});
  CHECK(!l1.stt);
  CHECK(l1.sram_bytes() == 32 * 1024);

  const auto dy = preset("Dy-FUSE");
  CHECK(dy.sram == CacheGeometry{64, 2});
  CHECK(dy.stt == CacheGeometry{1, 512});
  CHECK(dy.features == Features{true, true, true, true, false});
  CHECK(dy.energy.stt_read_nj == 0.26);
  CHECK(dy.energy.stt_write_nj == 2.4);
  CHECK(dy.energy.stt_leak_mw == 2.4);

  const auto nvm = preset("By-NVM");
  CHECK(!nvm.sram);
  CHECK(nvm.stt == CacheGeometry{256, 4});
  CHECK(nvm.features.deadwrite_bypass);
  CHECK(nvm.stt_bytes() == 128 * 1024);

  const auto hy = preset("Hybrid");
  CHECK(hy.sram == CacheGeometry{64, 2});
  CHECK(hy.stt == CacheGeometry{256, 2});
  CHECK(hy.features == Features{});
  const auto base = preset("Base-FUSE");
  CHECK(base.features == Features{true, true, false, false, false});
  const auto fa = preset("FA-FUSE");
  CHECK(fa.stt == CacheGeometry{1, 512});
  CHECK(fa.features == Features{true, true, true, false, false});

  const auto fasram = preset("FA-SRAM");
  CHECK(fasram.sram == CacheGeometry{1, 256});
  CHECK(!fasram.stt);

  for (const auto &p : {l1, dy, nvm, hy, base, fa, fasram}) {
    CHECK(p.timing == TimingParams{1, 1, 1, 5});
    CHECK(p.energy.clock_hz == 700e6);
  }
}

TEST_CASE("every preset fits the 32KB SRAM-equivalent area budget") {
  for (const PresetName n : all_presets()) {
    const auto p = preset(n);
    CHECK(p.area_equivalent_bytes() <= kAreaBudgetBytes);
    CHECK(parse_preset_name(to_string(n)) == n);
  }
  CHECK(all_presets().size() == 7);
}

TEST_CASE("unknown preset") {
  CHECK_THROWS_AS(preset("L3-SRAM"), UnknownPreset);
  CHECK(!parse_preset_name("dy-fuse-x"));
}

}
