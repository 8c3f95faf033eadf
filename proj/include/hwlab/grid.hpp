#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>

namespace hwlab {

/// Periodic box [-L, L)^n sampled with N points per axis, row-major (last axis fastest).
///
/// The dual lattice is k = (pi/L) m with m in {-N/2, ..., N/2-1}; spectra are stored in
/// FFT order (m = 0, 1, ..., N/2-1, -N/2, ..., -1) along every axis.
class Grid {
 public:
  Grid(int dim, double half_length, int points_per_axis);

  int dim() const { return dim_; }
  double half_length() const { return half_length_; }
  int points_per_axis() const { return n_; }
  Eigen::Index size() const { return size_; }
  double spacing() const { return 2.0 * half_length_ / n_; }
  /// Volume element of the Riemann sum, h^n.
  double cell_volume() const;
  /// Fundamental wavenumber pi/L.
  double dk() const;

  /// Signed integer frequency index of FFT slot i along one axis.
  int mode_index(int i) const { return i < n_ / 2 ? i : i - n_; }
  double coordinate_1d(int i) const { return -half_length_ + i * spacing(); }

  /// Multi-index of a flat offset (axes beyond dim() are 0).
  std::array<int, 3> unravel(Eigen::Index flat) const;
  Eigen::Index ravel(const std::array<int, 3>& idx) const;

  Eigen::ArrayXd coordinate(int axis) const;
  Eigen::ArrayXd radius() const;
  Eigen::ArrayXd wavenumber(int axis) const;
  Eigen::ArrayXd wavenumber_magnitude() const;
  /// Integer frequency vectors |m|_inf per slot, used by the 2/3 dealiasing mask.
  Eigen::ArrayXi max_mode_index() const;

  /// Largest |k| on the lattice.
  double max_wavenumber() const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_length_ == b.half_length_;
  }
  friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }

 private:
  int dim_;
  double half_length_;
  int n_;
  Eigen::Index size_;
};

}  // namespace hwlab
