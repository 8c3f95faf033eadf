#pragma once

#include "hwlab/field.hpp"
#include "hwlab/spectral.hpp"

#include <utility>
#include <vector>

namespace hwlab {

/// Smoothness s, integrability q, summation r of a Besov norm; q, r in [1, inf].
struct BesovParams {
  double s = 0.0;
  double q = 2.0;
  double r = 2.0;
  bool homogeneous = true;

  void validate() const;
  /// s < n/q with any r, or s == n/q with r == 1.
  bool complete_homogeneous_regime(int dim) const;
};

/// Radial cutoff phi(xi) = chi(|xi|): 1 for |xi| <= 1, 0 for |xi| >= 2, smooth and
/// nonincreasing in between, chi(rho) = psi(2 - rho) / (psi(2 - rho) + psi(rho - 1)),
/// psi(t) = exp(-1/t) for t > 0.
struct DyadicBump {
  static double profile(double rho);
  /// phi(2^{-j} xi) evaluated on the lattice.
  static Eigen::ArrayXd partial_sum_symbol(const Grid& grid, int j);
  /// phi(2^{-j} xi) - phi(2^{-j+1} xi).
  static Eigen::ArrayXd annulus_symbol(const Grid& grid, int j);
};

enum class ProjectionKind { homogeneous, inhomogeneous, partial_sum };

/// Range [j_min, j_max] of dyadic bands that meet the lattice.
std::pair<int, int> dyadic_band_range(const Grid& grid);

struct LpProjection {
  Field field;
  bool in_band;
};

LpProjection lp_project(const Field& f, int j, ProjectionKind kind);

double besov_norm(const Field& f, const BesovParams& p);
/// ||f||_{H^s} with (1 + |k|^2)^{s/2}, or ||f||_{\dot H^s} with |k|^s.
double sobolev_norm(const Field& f, double s, bool homogeneous);

/// Finite-difference characterisation: t^{-s} sup_{|y| < t} ||(tau_y - I)^m f||_{L^q} in
/// L^r(dt/t). The sup over the ball samples 2n axis and 2^n diagonal directions at
/// radii {t, t/2}; dt/t is a dyadic sum with weight ln 2 over t = 2^{-j} t0.
struct DifferenceScheme {
  int order = 1;
  /// Largest t; zero means min(L/4, L/(2m)).
  double t_max = 0.0;
  /// Smallest t; zero means one grid spacing.
  double t_min = 0.0;

  std::vector<Eigen::Vector3d> directions(int dim) const;
  std::vector<double> radii(const Grid& grid) const;
};

double difference_besov_norm(const Field& f, const BesovParams& p, const DifferenceScheme& scheme);

/// ||(tau_y - I)^m f||_{L^q} for one displacement, computed spectrally.
double difference_norm(const Field& f, const Eigen::Vector3d& y, int order, double q);

}  // namespace hwlab
