#include "hwlab/spectral.hpp"

#include "hwlab/error.hpp"
#include "hwlab/fft.hpp"

#include <cmath>
#include <string>

namespace hwlab {

Multiplier::Multiplier(Grid grid, Eigen::ArrayXcd symbol, complex zero_mode_value)
    : grid_(grid), symbol_(std::move(symbol)) {
  require(symbol_.size() == grid_.size(), ErrorCode::invalid_argument,
          "multiplier symbol size does not match grid");
  symbol_[0] = zero_mode_value;
  require(symbol_.real().allFinite() && symbol_.imag().allFinite(), ErrorCode::non_finite,
          "multiplier symbol is not finite on the lattice");
}

Field Multiplier::apply(const Field& f) const {
  require(f.grid() == grid_, ErrorCode::invalid_argument, "multiplier/field grid mismatch");
  Eigen::ArrayXcd spec = fft::forward(grid_, f.values());
  spec *= symbol_;
  return Field(grid_, fft::inverse(grid_, spec), f.time());
}

Multiplier Multiplier::operator*(const Multiplier& o) const {
  require(grid_ == o.grid_, ErrorCode::invalid_argument, "multiplier grid mismatch");
  Eigen::ArrayXcd prod = symbol_ * o.symbol_;
  return Multiplier(grid_, prod, prod[0]);
}

Multiplier Multiplier::fractional_derivative(const Grid& grid, double s) {
  require(s >= 0.0, ErrorCode::unsupported_exponent,
          "negative-order derivatives are not supported (s = " + std::to_string(s) + ")");
  if (s == 0.0) return Multiplier(grid, Eigen::ArrayXcd::Ones(grid.size()), 1.0);
  Eigen::ArrayXd k = grid.wavenumber_magnitude();
  k[0] = 1.0;
  return Multiplier(grid, k.pow(s).cast<complex>(), 0.0);
}

Multiplier Multiplier::propagator(const Grid& grid, double t) {
  const Eigen::ArrayXd phase = -t * grid.wavenumber_magnitude();
  Eigen::ArrayXcd sym(grid.size());
  for (Eigen::Index i = 0; i < sym.size(); ++i) sym[i] = std::polar(1.0, phase[i]);
  return Multiplier(grid, sym, 1.0);
}

Multiplier Multiplier::riesz(const Grid& grid, int axis) {
  require(axis >= 1 && axis <= grid.dim(), ErrorCode::index_out_of_range,
          "Riesz transform axis " + std::to_string(axis) + " outside [1, n]");
  Eigen::ArrayXd k = grid.wavenumber_magnitude();
  k[0] = 1.0;
  const Eigen::ArrayXd ratio = grid.wavenumber(axis - 1) / k;
  return Multiplier(grid, ratio.cast<complex>() * complex(0.0, 1.0), 0.0);
}

Multiplier Multiplier::partial(const Grid& grid, int axis) {
  require(axis >= 1 && axis <= grid.dim(), ErrorCode::index_out_of_range,
          "derivative axis " + std::to_string(axis) + " outside [1, n]");
  return Multiplier(grid, grid.wavenumber(axis - 1).cast<complex>() * complex(0.0, 1.0), 0.0);
}

Multiplier Multiplier::bessel_potential(const Grid& grid, double s) {
  const Eigen::ArrayXd k2 = grid.wavenumber_magnitude().square();
  return Multiplier(grid, (1.0 + k2).pow(0.5 * s).cast<complex>(), 1.0);
}

Multiplier Multiplier::translation(const Grid& grid, const Eigen::Vector3d& y) {
  Eigen::ArrayXd phase = Eigen::ArrayXd::Zero(grid.size());
  for (int d = 0; d < grid.dim(); ++d) phase += y[d] * grid.wavenumber(d);
  Eigen::ArrayXcd sym(grid.size());
  for (Eigen::Index i = 0; i < sym.size(); ++i) sym[i] = std::polar(1.0, phase[i]);
  return Multiplier(grid, sym, 1.0);
}

Multiplier Multiplier::two_thirds_mask(const Grid& grid) {
  const int cutoff = grid.points_per_axis() / 3;
  const Eigen::ArrayXi m = grid.max_mode_index();
  Eigen::ArrayXcd sym = (m <= cutoff).cast<double>().cast<complex>();
  return Multiplier(grid, sym, 1.0);
}

Eigen::ArrayXcd to_spectrum(const Field& f) { return fft::forward(f.grid(), f.values()); }

Field from_spectrum(const Grid& grid, const Eigen::ArrayXcd& spectrum) {
  return Field(grid, fft::inverse(grid, spectrum));
}

Field fractional_derivative(const Field& f, double s) {
  if (s == 0.0) return f;
  return Multiplier::fractional_derivative(f.grid(), s).apply(f);
}

Field propagate(const Field& f, double t) {
  if (t == 0.0) return f;
  Field out = Multiplier::propagator(f.grid(), t).apply(f);
  if (f.time()) return out.with_time(*f.time() + t);
  return out;
}

Field riesz_transform(const Field& f, int axis) { return Multiplier::riesz(f.grid(), axis).apply(f); }

Field partial_derivative(const Field& f, int axis) {
  return Multiplier::partial(f.grid(), axis).apply(f);
}

double lebesgue_norm(const Field& f, double q) {
  require(q >= 1.0, ErrorCode::invalid_exponent,
          "Lebesgue exponent must lie in [1, inf] (got " + std::to_string(q) + ")");
  const Eigen::ArrayXd mod = f.values().abs();
  if (std::isinf(q)) return mod.maxCoeff();
  const double h_n = f.grid().cell_volume();
  if (q == 2.0) return std::sqrt(h_n * mod.square().sum());
  return std::pow(h_n * mod.pow(q).sum(), 1.0 / q);
}

double parseval_norm(const Grid& grid, const Eigen::ArrayXcd& spectrum) {
  // sum |f|^2 = (1/N^n) sum |f_hat|^2 for the unnormalised DFT.
  return std::sqrt(grid.cell_volume() * spectrum.abs2().sum() / static_cast<double>(grid.size()));
}

double parseval_norm(const Field& f) { return parseval_norm(f.grid(), to_spectrum(f)); }

complex inner_product(const Field& f, const Field& g) {
  require(f.grid() == g.grid(), ErrorCode::invalid_argument, "grid mismatch");
  return f.grid().cell_volume() * (f.values() * g.values().conjugate()).sum();
}

void check_wrap_guard(const Grid& grid, double t_end, double support_radius) {
  require(t_end + support_radius <= grid.half_length() * (1.0 + 1e-12), ErrorCode::wrap_guard,
          "wrap guard violated: t_end + support radius = " + std::to_string(t_end + support_radius) +
              " exceeds L = " + std::to_string(grid.half_length()));
}

double support_radius(const Field& f, double rel_tol) {
  const Eigen::ArrayXd mod = f.values().abs();
  const double cutoff = rel_tol * mod.maxCoeff();
  const Eigen::ArrayXd r = f.grid().radius();
  double out = 0.0;
  for (Eigen::Index i = 0; i < mod.size(); ++i) {
    if (mod[i] > cutoff) out = std::max(out, r[i]);
  }
  return out;
}

}  // namespace hwlab
