#pragma once

#include "hwlab/field.hpp"
#include "hwlab/fft.hpp"
#include "hwlab/random.hpp"

#include <Eigen/Core>

namespace hwlab::testing {

/// Random field with Fourier support in |m|_inf <= band and zero Nyquist content.
inline Field random_band_limited(const Grid& grid, std::uint64_t seed, int band = 6) {
  Rng rng(seed);
  Eigen::ArrayXcd spec = Eigen::ArrayXcd::Zero(grid.size());
  for (Eigen::Index flat = 0; flat < grid.size(); ++flat) {
    const auto idx = grid.unravel(flat);
    bool inside = true;
    for (int d = 0; d < grid.dim(); ++d) inside = inside && std::abs(grid.mode_index(idx[d])) <= band;
    if (inside) spec[flat] = complex(rng.normal(), rng.normal());
  }
  return Field(grid, fft::inverse(grid, spec));
}

inline double rel_diff(const Field& a, const Field& b) {
  return (a.values() - b.values()).matrix().norm() / b.values().matrix().norm();
}

}  // namespace hwlab::testing
