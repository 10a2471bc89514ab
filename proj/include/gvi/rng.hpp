#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace gvi {

// Deterministic stream RNG (xoshiro256++ seeded through splitmix64).
//
// Streams are value types: copying a Rng copies the stream position.
// fork(tag) derives a statistically disjoint child stream from the parent's
// seed lineage only, never from the parent's position, so a fixed
// (seed, tag path) always names the same stream regardless of how much the
// parent has been consumed or which thread owns it. No call reads the wall
// clock or any other environment entropy.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();  // [0, 1), 53-bit resolution
  double normal();   // standard normal, Marsaglia polar method
  Eigen::VectorXd normal_vector(int dim);

  Rng fork(std::uint64_t tag) const;
  std::uint64_t lineage() const { return lineage_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t lineage_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Seed of the child stream Rng(seed).fork(tag) would use.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace gvi
