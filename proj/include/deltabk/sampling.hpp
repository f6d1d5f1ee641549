#pragma once

// Deterministic low-discrepancy sampling shared by load-time system checks
// and region verification.

#include <cstdint>

#include <Eigen/Dense>

#include "deltabk/errors.hpp"

namespace deltabk {

inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
  const double inv = 1.0 / static_cast<double>(base);
  double value = 0.0, scale = inv;
  while (index > 0) {
    value += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv;
  }
  return value;
}

inline constexpr std::uint64_t kHaltonPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

// Unshifted Halton point; index 0 is the first point.
inline Eigen::VectorXd halton_point(std::uint64_t index, int dim) {
  if (dim < 1 || dim > 8)
    throw Error("sampling supports 1..8 dimensions");
  Eigen::VectorXd u(dim);
  for (int i = 0; i < dim; ++i)
    u[i] = radical_inverse(index + 1, kHaltonPrimes[i]);
  return u;
}

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Halton sequence with a seeded per-dimension rotation: different seeds give
// different point sets, the same seed always gives the same sequence.
class HaltonSampler {
 public:
  HaltonSampler(int dim, std::uint64_t seed) : dim_(dim), shift_(dim) {
    if (dim < 1 || dim > 8)
      throw Error("sampling supports 1..8 dimensions");
    std::uint64_t s = seed;
    for (int i = 0; i < dim; ++i)
      shift_[i] = static_cast<double>(detail::splitmix64(s) >> 11) *
                  0x1p-53;
  }

  // Next point in [0,1)^dim.
  Eigen::VectorXd next() {
    Eigen::VectorXd u = halton_point(index_++, dim_);
    for (int i = 0; i < dim_; ++i) {
      u[i] += shift_[i];
      if (u[i] >= 1.0) u[i] -= 1.0;
    }
    return u;
  }

 private:
  int dim_;
  std::uint64_t index_ = 0;
  Eigen::VectorXd shift_;
};

}  // namespace deltabk
