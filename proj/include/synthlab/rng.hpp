#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace synthlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child stream seeds: independent for distinct (base, idx) pairs.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t idx) {
  return splitmix64(splitmix64(base) ^ splitmix64(idx * 0x9e3779b97f4a7c15ULL + 1));
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::mt19937_64& engine() { return eng_; }

  double uniform() { return unif_(eng_); }

  double normal(double mean = 0.0, double sd = 1.0) {
    return mean + sd * norm_(eng_);
  }

  double chisq(double df) {
    std::chi_squared_distribution<double> d(df);
    return d(eng_);
  }

  // index in [0, n)
  std::size_t uniform_index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(eng_);
  }

  // sample from unnormalized weights
  std::size_t categorical(const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return w.empty() ? 0 : w.size() - 1;
  }

  std::vector<std::size_t> bootstrap_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = uniform_index(n);
    return idx;
  }

 private:
  std::mt19937_64 eng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace synthlab
