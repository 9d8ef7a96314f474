#ifndef ORTHOFUSE_RNG_HPP_
#define ORTHOFUSE_RNG_HPP_

#include <cstdint>
#include <vector>

#include "orthofuse/linalg.hpp"

namespace orthofuse {

//! Identifies one reproducible random stream. Identical (seed, stream)
//! always replays the identical sequence within this implementation;
//! cross-implementation bit equality is not a goal.
struct RngHandle {
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
};

//! Counter-based generator built on the splitmix64 output mix: the state is
//! an affine counter, the output a strong bijective hash of it. Streams are
//! derived by hashing (seed, stream) into the initial counter, so any number
//! of per-task / per-replication streams can be split off without overlap
//! concerns at the lengths used here.
class Rng {
 public:
  explicit Rng(RngHandle h);
  Rng(std::uint64_t seed, std::uint64_t stream) : Rng(RngHandle{seed, stream}) {}

  std::uint64_t next_u64();
  //! Uniform on [0, 1) with 53 random bits.
  double next_double();
  //! Uniform integer on [0, n).
  std::uint64_t next_below(std::uint64_t n);
  //! Standard normal via Box-Muller (pairs cached).
  double next_normal();
  bool next_bernoulli(double p) { return next_double() < p; }

  //! Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

//! count i.i.d. N(0,1) draws; deterministic given the generator state.
Vec standard_normal(Rng& rng, std::size_t count);

}  // namespace orthofuse

#endif  // ORTHOFUSE_RNG_HPP_
