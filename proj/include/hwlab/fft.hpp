#pragma once

#include "hwlab/grid.hpp"

#include <Eigen/Core>

namespace hwlab::fft {

/// Unnormalised forward DFT over all axes of the grid (FFTW_FORWARD sign).
Eigen::ArrayXcd forward(const Grid& grid, const Eigen::ArrayXcd& values);

/// Inverse DFT including the 1/N^n factor, so inverse(forward(f)) == f.
Eigen::ArrayXcd inverse(const Grid& grid, const Eigen::ArrayXcd& spectrum);

}  // namespace hwlab::fft
