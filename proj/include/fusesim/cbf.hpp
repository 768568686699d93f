#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "fusesim/geometry.hpp"

namespace fusesim {

/// k multiply-add-shift hash functions mapping a line address onto
/// [0, counters). counters must be a power of two.
class HashFamily {
 public:
  HashFamily(unsigned k, unsigned counters, std::uint64_t seed);

  unsigned size() const { return static_cast<unsigned>(mul_.size()); }
  unsigned counters() const { return counters_; }
  unsigned key(unsigned fn, LineAddr line) const;
  /// Writes size() keys into out.
  void keys(LineAddr line, std::span<unsigned> out) const;

 private:
  std::vector<std::uint64_t> mul_;
  std::vector<std::uint64_t> add_;
  unsigned counters_;
  unsigned shift_;
};

enum class Membership : std::uint8_t { Negative, Positive };

class CbfUnderflow : public std::logic_error {
 public:
  CbfUnderflow() : std::logic_error("counting bloom filter decrement below zero") {}
};

/// Counting bloom filter of 2-bit saturating counters.
///
/// A counter that reaches 3 becomes sticky and never changes again, so an
/// element that is still present can never be reported Negative.
class CountingBloomFilter {
 public:
  static constexpr std::uint8_t kMax = 3;

  explicit CountingBloomFilter(std::shared_ptr<const HashFamily> hashes);

  void increment(LineAddr elem);
  void decrement(LineAddr elem);
  Membership test(LineAddr elem) const;

  // Variants taking keys already computed by the shared hash family.
  void increment_keys(std::span<const unsigned> keys);
  void decrement_keys(std::span<const unsigned> keys);
  Membership test_keys(std::span<const unsigned> keys) const;

  std::uint8_t counter(unsigned i) const { return counters_[i]; }
  bool sticky(unsigned i) const { return sticky_[i] != 0; }
  unsigned size() const { return static_cast<unsigned>(counters_.size()); }
  unsigned sticky_count() const;
  const HashFamily &hashes() const { return *hashes_; }

 private:
  std::shared_ptr<const HashFamily> hashes_;
  std::vector<std::uint8_t> counters_;
  std::vector<std::uint8_t> sticky_;
};

}  // namespace fusesim
