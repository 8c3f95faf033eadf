#include "hwlab/grid.hpp"

#include "hwlab/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hwlab {

Grid::Grid(int dim, double half_length, int points_per_axis)
    : dim_(dim), half_length_(half_length), n_(points_per_axis), size_(1) {
  require(dim >= 1 && dim <= 3, ErrorCode::invalid_argument,
          "grid dimension must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
  require(half_length > 0.0 && std::isfinite(half_length), ErrorCode::invalid_argument,
          "grid half length must be positive");
  require(points_per_axis >= 8 && points_per_axis % 2 == 0, ErrorCode::invalid_argument,
          "points per axis must be even and >= 8 (got " + std::to_string(points_per_axis) + ")");
  for (int d = 0; d < dim_; ++d) size_ *= n_;
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }

double Grid::dk() const { return std::numbers::pi / half_length_; }

std::array<int, 3> Grid::unravel(Eigen::Index flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

Eigen::Index Grid::ravel(const std::array<int, 3>& idx) const {
  Eigen::Index flat = 0;
  for (int d = 0; d < dim_; ++d) flat = flat * n_ + idx[d];
  return flat;
}

namespace {

// Fills out[flat] = f(index along axis) without materialising multi-indices.
template <typename Fn>
Eigen::ArrayXd per_axis(const Grid& g, int axis, Fn&& f) {
  const Eigen::Index n = g.points_per_axis();
  Eigen::Index stride = 1;
  for (int d = g.dim() - 1; d > axis; --d) stride *= n;
  Eigen::ArrayXd out(g.size());
  for (Eigen::Index flat = 0; flat < g.size(); ++flat) {
    out[flat] = f(static_cast<int>((flat / stride) % n));
  }
  return out;
}

}  // namespace

Eigen::ArrayXd Grid::coordinate(int axis) const {
  return per_axis(*this, axis, [&](int i) { return coordinate_1d(i); });
}

Eigen::ArrayXd Grid::radius() const {
  Eigen::ArrayXd r2 = Eigen::ArrayXd::Zero(size_);
  for (int d = 0; d < dim_; ++d) r2 += coordinate(d).square();
  return r2.sqrt();
}

Eigen::ArrayXd Grid::wavenumber(int axis) const {
  const double base = dk();
  return per_axis(*this, axis, [&](int i) { return base * mode_index(i); });
}

Eigen::ArrayXd Grid::wavenumber_magnitude() const {
  Eigen::ArrayXd k2 = Eigen::ArrayXd::Zero(size_);
  for (int d = 0; d < dim_; ++d) k2 += wavenumber(d).square();
  return k2.sqrt();
}

Eigen::ArrayXi Grid::max_mode_index() const {
  Eigen::ArrayXi out = Eigen::ArrayXi::Zero(size_);
  for (int d = 0; d < dim_; ++d) {
    Eigen::ArrayXd m = per_axis(*this, d, [&](int i) { return std::abs(mode_index(i)); });
    out = out.max(m.cast<int>());
  }
  return out;
}

double Grid::max_wavenumber() const { return dk() * (n_ / 2) * std::sqrt(static_cast<double>(dim_)); }

}  // namespace hwlab
