#ifndef PARTLIK_RNG_HPP
#define PARTLIK_RNG_HPP

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace partlik {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable stream derivation: every noise draw in the protocol comes from a
// stream keyed by (run seed, eval id, node, tag), so draw values depend only
// on protocol position, never on transport timing.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t eval_id,
                                 std::uint64_t node, std::uint64_t tag) {
  std::uint64_t s = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  s = splitmix64(s ^ eval_id);
  s = splitmix64(s ^ (node << 32));
  return splitmix64(s ^ tag);
}

// mt19937_64 with an explicit uint->double mapping; avoids the
// implementation-defined behaviour of std::uniform_real_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform(-s, s)
  double uniform_sym(double s) { return s * (2.0 * unit() - 1.0); }

  Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double s) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform_sym(s);
    return m;
  }

  // Standard normal via Box-Muller (deterministic given the stream).
  double normal() {
    double u1 = unit(), u2 = unit();
    while (u1 <= 0.0) u1 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace partlik

#endif
