#include "hwlab/field.hpp"

#include "hwlab/error.hpp"

namespace hwlab {

Field::Field(Grid grid, Eigen::ArrayXcd values, std::optional<double> time)
    : grid_(grid), values_(std::move(values)), time_(time) {
  require(values_.size() == grid_.size(), ErrorCode::invalid_argument,
          "field length does not match grid size");
  require(values_.real().allFinite() && values_.imag().allFinite(), ErrorCode::non_finite,
          "field contains NaN or Inf samples");
}

Field Field::zeros(const Grid& grid) { return Field(grid, Eigen::ArrayXcd::Zero(grid.size())); }

Field Field::constant(const Grid& grid, complex value) {
  return Field(grid, Eigen::ArrayXcd::Constant(grid.size(), value));
}

Field Field::sample(const Grid& grid, const std::function<complex(const Eigen::Vector3d&)>& f) {
  Eigen::ArrayXcd v(grid.size());
  for (Eigen::Index flat = 0; flat < grid.size(); ++flat) {
    const auto idx = grid.unravel(flat);
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    for (int d = 0; d < grid.dim(); ++d) x[d] = grid.coordinate_1d(idx[d]);
    v[flat] = f(x);
  }
  return Field(grid, std::move(v));
}

Field Field::plane_wave(const Grid& grid, const Eigen::Vector3i& m) {
  const double dk = grid.dk();
  return sample(grid, [&](const Eigen::Vector3d& x) {
    double phase = 0.0;
    for (int d = 0; d < grid.dim(); ++d) phase += dk * m[d] * x[d];
    return std::polar(1.0, phase);
  });
}

Field Field::with_time(double t) const { return Field(grid_, values_, t); }

Field Field::operator+(const Field& o) const {
  require(grid_ == o.grid_, ErrorCode::invalid_argument, "grid mismatch");
  return Field(grid_, values_ + o.values_, time_);
}

Field Field::operator-(const Field& o) const {
  require(grid_ == o.grid_, ErrorCode::invalid_argument, "grid mismatch");
  return Field(grid_, values_ - o.values_, time_);
}

Field Field::operator*(complex a) const { return Field(grid_, values_ * a, time_); }

complex Field::mean() const { return values_.mean(); }

Field Field::without_mean() const { return Field(grid_, values_ - mean(), time_); }

}  // namespace hwlab
