#pragma once

#include "hwlab/grid.hpp"

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <optional>

namespace hwlab {

using complex = std::complex<double>;

/// Complex samples on a Grid. Construction rejects NaN/Inf entries.
class Field {
 public:
  Field(Grid grid, Eigen::ArrayXcd values, std::optional<double> time = std::nullopt);

  static Field zeros(const Grid& grid);
  static Field constant(const Grid& grid, complex value);
  /// Samples f(x) at every grid point; x has grid.dim() meaningful entries.
  static Field sample(const Grid& grid, const std::function<complex(const Eigen::Vector3d&)>& f);
  /// Plane wave exp(i (pi/L) m . x) for an integer frequency vector m.
  static Field plane_wave(const Grid& grid, const Eigen::Vector3i& m);

  const Grid& grid() const { return grid_; }
  const Eigen::ArrayXcd& values() const { return values_; }
  std::optional<double> time() const { return time_; }
  Field with_time(double t) const;

  Field operator+(const Field& o) const;
  Field operator-(const Field& o) const;
  Field operator*(complex a) const;

  /// Arithmetic mean of the samples (the zero Fourier mode).
  complex mean() const;
  Field without_mean() const;

 private:
  Grid grid_;
  Eigen::ArrayXcd values_;
  std::optional<double> time_;
};

}  // namespace hwlab
