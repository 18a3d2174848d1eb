#pragma once

// Seeded RNG streams and the replica-splitting rule used by every Monte
// Carlo loop in the library.
//
// Stream derivation: replica r of master seed s draws from an mt19937_64
// seeded with  splitmix64(s + (r + 1) * 0x9E3779B97F4A7C15).  The splitmix
// finalizer decorrelates nearby master seeds and replica indices, so
// replicas can run concurrently and be merged in index order with results
// independent of the worker count.

#include <cstdint>
#include <functional>
#include <random>

namespace selfsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ull);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  static RngStream replica(std::uint64_t master, std::uint64_t index) {
    return RngStream(derive_stream_seed(master, index));
  }
  /// Sub-stream for nested loops (probe index inside a sweep, etc).
  RngStream substream(std::uint64_t index) const {
    return RngStream(derive_stream_seed(base_seed_mix_, index));
  }

  double normal() { return normal_(gen_); }
  double uniform() { return uniform_(gen_); }  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::int64_t poisson(double mean) {
    std::poisson_distribution<std::int64_t> d(mean);
    return d(gen_);
  }
  std::uint64_t next_u64() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::uint64_t base_seed_mix_ = gen_();  // consumed once, keyed to the seed
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Worker cap: SIM_THREADS environment variable, else hardware concurrency.
int max_threads();

/// Runs body(i) for i in [0, count) on up to max_threads() workers.
/// Each body(i) must depend only on i (typically via a derived RNG stream),
/// so the result is deterministic and independent of scheduling.
void parallel_replicas(int count, const std::function<void(int)>& body);

}  // namespace selfsim
