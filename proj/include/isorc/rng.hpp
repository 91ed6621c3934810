#ifndef ISORC_RNG_HPP
#define ISORC_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace isorc {

// splitmix64; used for seeding and for the replica seed-splitting rule.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Replica k of a run with master seed s draws its state from
// splitmix64 iterated at s + k.  Documented contract: replicas are
// reproducible individually, independent of scheduling.
inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) {
  std::uint64_t s = master + 0x632be59bd9b4e019ULL * (replica + 1);
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

// xoshiro256** with explicit, platform-independent draw helpers.
// std::random distributions are avoided on purpose: their output is
// implementation-defined and the CLI promises byte-identical reruns.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x9b1f8d2a7c3e5401ULL) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1) with 53 random bits
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // unbiased integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t threshold = (-n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // index drawn proportionally to weights[0..k)
  int discrete(const double* weights, int k) {
    double total = 0.0;
    for (int i = 0; i < k; ++i) total += weights[i];
    double u = uniform01() * total;
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return k - 1;
  }

  double exponential(double rate) {
    double u;
    do { u = uniform01(); } while (u <= 0.0);
    return -std::log(u) / rate;
  }

  // Knuth product method; means used in this project stay modest.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    int k = 0;
    double l = std::exp(-mean), p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > l);
    return k - 1;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace isorc

#endif
