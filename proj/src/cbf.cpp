#include "fusesim/cbf.hpp"

#include <bit>

namespace fusesim {

namespace {

std::uint64_t splitmix64(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

HashFamily::HashFamily(unsigned k, unsigned counters, std::uint64_t seed) : counters_(counters) {
  if (k == 0) throw std::invalid_argument("hash family needs at least one function");
  if (counters < 2 || !std::has_single_bit(counters)) {
    throw std::invalid_argument("counter array length must be a power of two >= 2");
  }
  shift_ = 64u - static_cast<unsigned>(std::countr_zero(counters));
  std::uint64_t state = seed;
  for (unsigned i = 0; i < k; ++i) {
    mul_.push_back(splitmix64(state) | 1u);
    add_.push_back(splitmix64(state));
  }
}

unsigned HashFamily::key(unsigned fn, LineAddr line) const {
  return static_cast<unsigned>((mul_[fn] * line.value + add_[fn]) >> shift_);
}

void HashFamily::keys(LineAddr line, std::span<unsigned> out) const {
  for (unsigned i = 0; i < size(); ++i) out[i] = key(i, line);
}

CountingBloomFilter::CountingBloomFilter(std::shared_ptr<const HashFamily> hashes)
    : hashes_(std::move(hashes)), counters_(hashes_->counters(), 0), sticky_(hashes_->counters(), 0) {}

void CountingBloomFilter::increment_keys(std::span<const unsigned> keys) {
  for (unsigned k : keys) {
    if (sticky_[k]) continue;
    if (++counters_[k] == kMax) sticky_[k] = 1;
  }
}

void CountingBloomFilter::decrement_keys(std::span<const unsigned> keys) {
  // A key may repeat when two hash functions collide on one element.
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const unsigned k = keys[i];
    if (sticky_[k]) continue;
    unsigned uses = 0;
    for (std::size_t j = 0; j <= i; ++j) uses += keys[j] == k ? 1u : 0u;
    if (counters_[k] < uses) throw CbfUnderflow();
  }
  for (unsigned k : keys) {
    if (!sticky_[k]) --counters_[k];
  }
}

Membership CountingBloomFilter::test_keys(std::span<const unsigned> keys) const {
  for (unsigned k : keys) {
    if (counters_[k] == 0) return Membership::Negative;
  }
  return Membership::Positive;
}

void CountingBloomFilter::increment(LineAddr elem) {
  std::vector<unsigned> keys(hashes_->size());
  hashes_->keys(elem, keys);
  increment_keys(keys);
}

void CountingBloomFilter::decrement(LineAddr elem) {
  std::vector<unsigned> keys(hashes_->size());
  hashes_->keys(elem, keys);
  decrement_keys(keys);
}

Membership CountingBloomFilter::test(LineAddr elem) const {
  std::vector<unsigned> keys(hashes_->size());
  hashes_->keys(elem, keys);
  return test_keys(keys);
}

unsigned CountingBloomFilter::sticky_count() const {
  unsigned n = 0;
  for (auto s : sticky_) n += s;
  return n;
}

}  // namespace fusesim
