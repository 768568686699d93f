#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "fusesim/config.hpp"

using namespace fusesim;

TEST_SUITE("config") {

TEST_CASE("every preset validates") {
  for (const auto name : all_presets()) CHECK_NOTHROW(make_config(name).validate());
  CHECK_THROWS_AS(make_config("L3-SRAM"), UnknownPreset);
}

TEST_CASE("overrides") {
  auto c = make_config("Dy-FUSE");
  apply_override(c, "cbf.counters=64");
  apply_override(c, " tag_queue.capacity = 8 ");
  apply_override(c, "downstream.l2_enabled", "true");
  apply_override(c, "energy.stt_write_nj", "2.5");
  apply_override(c, "features.predictor", "off");
  CHECK(c.cbf_counters == 64);
  CHECK(c.tag_queue_capacity == 8);
  CHECK(c.downstream.l2_enabled);
  CHECK(c.preset.energy.stt_write_nj == doctest::Approx(2.5));
  CHECK(!c.preset.features.predictor);

  CHECK_THROWS_AS(apply_override(c, "cbf.counters=lots"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "cbf.counters=-1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "nope=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "seed"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "features.tag_queue=maybe"), ConfigError);

  auto sram_only = make_config("L1-SRAM");
  CHECK_THROWS_AS(apply_override(sram_only, "stt.ways=4"), ConfigError);
}

TEST_CASE("validation") {
  auto c = make_config("FA-FUSE");
  c.cbf_counters = 100;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = make_config("FA-FUSE");
  c.preset.stt->ways = 510;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = make_config("Base-FUSE");
  c.preset.features.swap_buffer = false;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = make_config("L1-SRAM");
  c.preset.features.tag_queue = c.preset.features.swap_buffer = true;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = make_config("Hybrid");
  c.mshr_capacity = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = make_config("Hybrid");
  c.preset.sram->sets = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config text") {
  const auto c = parse_config_text(
      "# comment\n"
      "preset = FA-FUSE\n"
      "\n"
      "cbf.hashes = 1   # trailing\n"
      "mshr.capacity=8\r\n",
      make_config("L1-SRAM"));
  CHECK(c.preset.name == PresetName::FaFuse);
  CHECK(c.cbf_hashes == 1);
  CHECK(c.mshr_capacity == 8);
  CHECK_THROWS_AS(parse_config_text("preset = X\n", {}), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just words\n", {}), ConfigError);
}

TEST_CASE("config file") {
  const std::string path = "fusesim_test_config.txt";
  {
    std::ofstream out(path);
    out << "preset=Hybrid\nswap_buffer.slots=5\n";
  }
  const auto c = load_config_file(path, {});
  CHECK(c.preset.name == PresetName::Hybrid);
  CHECK(c.swap_slots == 5);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config_file("no/such/file", {}), ConfigError);
}

TEST_CASE("sram ratio") {
  auto c = make_config("FA-FUSE");
  apply_sram_ratio(c, 0.5);
  CHECK(*c.preset.sram == CacheGeometry{64, 2});
  CHECK(*c.preset.stt == CacheGeometry{1, 512});

  apply_sram_ratio(c, 0.25);
  CHECK(*c.preset.sram == CacheGeometry{32, 2});
  CHECK(*c.preset.stt == CacheGeometry{1, 768});
  CHECK(c.preset.area_equivalent_bytes() == kAreaBudgetBytes);
  CHECK_NOTHROW(c.validate());

  apply_override(c, "sram_ratio=0.75");
  CHECK(c.preset.sram->lines() == 192);
  CHECK(c.preset.stt->lines() == 256);
  CHECK(c.preset.area_equivalent_bytes() == kAreaBudgetBytes);

  auto h = make_config("Hybrid");
  apply_sram_ratio(h, 0.5);
  CHECK(*h.preset.stt == CacheGeometry{256, 2});
  CHECK_THROWS_AS(apply_sram_ratio(h, 0.25), ConfigError);

  CHECK_THROWS_AS(apply_sram_ratio(c, 0.0), ConfigError);
  CHECK_THROWS_AS(apply_sram_ratio(c, 1.0), ConfigError);
  auto s = make_config("L1-SRAM");
  CHECK_THROWS_AS(apply_sram_ratio(s, 0.5), ConfigError);
}

}
