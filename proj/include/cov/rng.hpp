// Deterministic random streams. mt19937_64 is fully specified by the C++
// standard, and the Gaussian transform below is a fixed Box-Muller, so a
// given seed reproduces the same draw sequence on any conforming platform
// (up to libm rounding of log/cos/sin on the host).
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cov {

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    ++uniform_count_;
    return (gen_() >> 11) * 0x1.0p-53;
  }

  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; consumes two uniforms per pair and
  // caches the second value, so draw order is seed-determined.
  double normal() {
    ++normal_count_;
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t normals_drawn() const { return normal_count_; }
  std::uint64_t uniforms_drawn() const { return uniform_count_; }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
  std::uint64_t normal_count_ = 0;
  std::uint64_t uniform_count_ = 0;
};

}  // namespace cov
