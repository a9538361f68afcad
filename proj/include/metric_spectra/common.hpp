#ifndef METRIC_SPECTRA_COMMON_HPP
#define METRIC_SPECTRA_COMMON_HPP

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mspec {

// Counter-based 64-bit generator (splitmix64). Self-contained so that runs
// are reproducible across platforms, compilers and thread counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    if (hi <= lo) return lo;
    return lo + int(next_u64() % std::uint64_t(hi - lo + 1));
  }

  bool coin() { return (next_u64() & 1u) != 0; }

  // Independent stream for trial `stream` of a master seed.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream) {
    Rng r(master ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
    r.next_u64();
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Shortest-round-trip-ish decimal formatting used in CSV output.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  double back = std::strtod(buf, nullptr);
  if (back == x) {
    // try shorter representations
    for (int prec = 1; prec <= 16; ++prec) {
      char b2[40];
      std::snprintf(b2, sizeof(b2), "%.*g", prec, x);
      if (std::strtod(b2, nullptr) == x) return b2;
    }
  }
  return buf;
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mspec

#endif
