#ifndef COURTQG_COMMON_HPP
#define COURTQG_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace courtqg {

// Shape/arity violations (wrong matrix dims, mismatched sequence lengths).
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inputs outside an operation's documented domain (empty softmax, empty utterance).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed files; carries a 1-based line number when known.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_number(line) {}
  long line_number;
};

// Bad run configuration (unknown keys, out-of-range values, too-small datasets).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic RNG. All randomness in the project flows through this type so
// that outputs are byte-identical across runs and platforms. std::mt19937_64
// is fully specified by the standard; the value mappings below are our own
// (the std distributions are implementation-defined and must not be used).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  uint64_t next_u64() {
    // splitmix64
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0. Modulo bias is negligible for
  // the small n used here and keeps the mapping trivially portable.
  size_t below(size_t n) { return static_cast<size_t>(next_u64() % n); }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream (for per-component seeding).
  Rng fork() { return Rng(next_u64()); }

 private:
  uint64_t state_;
};

}  // namespace courtqg

#endif  // COURTQG_COMMON_HPP
