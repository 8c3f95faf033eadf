#pragma once

#include "hwlab/field.hpp"
#include "hwlab/grid.hpp"

#include <Eigen/Core>

#include <limits>

namespace hwlab {

/// Fourier multiplier sampled on the frequency lattice of one grid, in FFT slot order.
/// The value at k = 0 is stored explicitly as zero_mode_value and always overrides the symbol.
class Multiplier {
 public:
  Multiplier(Grid grid, Eigen::ArrayXcd symbol, complex zero_mode_value);

  const Grid& grid() const { return grid_; }
  const Eigen::ArrayXcd& symbol() const { return symbol_; }
  complex zero_mode_value() const { return symbol_[0]; }

  Field apply(const Field& f) const;
  /// Multiplies a spectrum in place (used by time steppers that stay in Fourier space).
  void apply_to_spectrum(Eigen::ArrayXcd& spectrum) const { spectrum *= symbol_; }

  Multiplier operator*(const Multiplier& o) const;

  /// |k|^s; zero mode 0 for s > 0 and 1 for s == 0.
  static Multiplier fractional_derivative(const Grid& grid, double s);
  /// exp(-i t |k|).
  static Multiplier propagator(const Grid& grid, double t);
  /// i k_j / |k| for axis j in [1, n]; zero mode 0.
  static Multiplier riesz(const Grid& grid, int axis);
  /// i k_j for axis j in [1, n].
  static Multiplier partial(const Grid& grid, int axis);
  /// (1 + |k|^2)^{s/2}.
  static Multiplier bessel_potential(const Grid& grid, double s);
  /// Translation f(x) -> f(x + y).
  static Multiplier translation(const Grid& grid, const Eigen::Vector3d& y);
  /// Indicator of |m_axis| <= N/3 on every axis.
  static Multiplier two_thirds_mask(const Grid& grid);

 private:
  Grid grid_;
  Eigen::ArrayXcd symbol_;
};

Eigen::ArrayXcd to_spectrum(const Field& f);
Field from_spectrum(const Grid& grid, const Eigen::ArrayXcd& spectrum);

/// D^s f for s >= 0.
Field fractional_derivative(const Field& f, double s);
/// U(t) f = exp(-i t D) f.
Field propagate(const Field& f, double t);
/// R_j f with 1-based axis index j.
Field riesz_transform(const Field& f, int axis);
/// d/dx_j f with 1-based axis index j.
Field partial_derivative(const Field& f, int axis);

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Riemann-sum L^q norm (h^n sum |f|^q)^{1/q}; q = infinity gives the max modulus.
double lebesgue_norm(const Field& f, double q);
/// L^2 norm computed from the spectrum by Parseval.
double parseval_norm(const Field& f);
double parseval_norm(const Grid& grid, const Eigen::ArrayXcd& spectrum);
/// (f, g)_{L^2} as a Riemann sum.
complex inner_product(const Field& f, const Field& g);

/// Throws ErrorCode::wrap_guard unless t_end + support_radius <= L.
void check_wrap_guard(const Grid& grid, double t_end, double support_radius);

/// Largest sample radius where |f| exceeds rel_tol * max|f|.
double support_radius(const Field& f, double rel_tol = 1e-12);

}  // namespace hwlab
