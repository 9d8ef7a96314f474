#include "orthofuse/rng.hpp"

#include <cmath>
#include <numbers>

namespace orthofuse {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(RngHandle h) {
  // fold seed and stream into the starting counter with two mix rounds so
  // adjacent (seed, stream) pairs land far apart
  state_ = mix64(h.seed + kGolden);
  state_ = mix64(state_ ^ mix64(h.stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) return 0;
  // rejection sampling to avoid modulo bias
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::next_normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  // Box-Muller; u1 shifted away from 0 so log stays finite
  const double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(t);
  have_cached_ = true;
  return r * std::cos(t);
}

Vec standard_normal(Rng& rng, std::size_t count) {
  Vec out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = rng.next_normal();
  return out;
}

}  // namespace orthofuse
