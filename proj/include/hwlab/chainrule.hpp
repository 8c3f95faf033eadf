#pragma once

#include "hwlab/besov.hpp"
#include "hwlab/field.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hwlab {

enum class NonlinearityKind { power_gauge, power_abs, glassey, custom };

std::string to_string(NonlinearityKind kind);
NonlinearityKind nonlinearity_kind_from_string(const std::string& name);

/// Pointwise nonlinearity F viewed as a map R^2 -> R^2.
///   power_gauge: lambda |u|^{p-1} u
///   power_abs:   lambda |u|^p
///   glassey:     i |Re u|^p
///   custom:      user supplied callable
struct Nonlinearity {
  /// Directional derivative d^j/dt^j F(z + t e) at t = 0.
  using Jet = std::function<complex(complex z, complex e, int order)>;

  NonlinearityKind kind = NonlinearityKind::power_gauge;
  double p = 2.0;
  int k = 1;
  complex lambda = 1.0;
  std::function<complex(complex)> custom;
  /// Optional exact directional derivatives for custom kinds; finite differences otherwise.
  Jet custom_jet;
  /// Finite-difference step for custom kinds without a jet; zero means 1e-5 max(1, |z|).
  double fd_step = 0.0;
  /// Empirical C_j filled in by check_property_Fkp.
  std::vector<double> derivative_constants;

  static Nonlinearity power_gauge(double p, complex lambda = 1.0, std::optional<int> k = {});
  static Nonlinearity power_abs(double p, complex lambda = 1.0, std::optional<int> k = {});
  static Nonlinearity glassey(double p, std::optional<int> k = {});
  static Nonlinearity make_custom(std::function<complex(complex)> fn, double p, int k, Jet jet = {});

  void validate() const;
  complex operator()(complex z) const;
  /// j-th directional derivative along the unit direction e.
  complex directional_derivative(complex z, complex e, int order) const;
  /// C_0 with |F(u)| <= C_0 |u|^p, when known in closed form.
  std::optional<double> size_constant() const;
};

/// Pointwise F(f); with dealias the result is filtered by the 2/3 mask.
Field evaluate(const Nonlinearity& F, const Field& f, bool dealias = false);

struct FkpEntry {
  int j = 0;
  /// Empirical sup of |F^(j)(z1) - F^(j)(z2)| / RHS over all sampled pairs.
  double sup = 0.0;
  /// Same sup over the first half of the pairs.
  double sup_half = 0.0;
  bool finite = true;
  bool stable = true;
};

struct FkpReport {
  std::vector<FkpEntry> entries;
  /// Pairs with a point closer than 1e-3 radius to the axis Re z = 0.
  std::size_t near_axis_samples = 0;
  bool passed = true;
};

/// Samples 2 * samples pairs in the disk |z| <= radius (half independent, half clustered
/// at log-uniform separations) and measures the Hoelder constants for j = 0..k.
FkpReport check_property_Fkp(const Nonlinearity& F, std::size_t samples, double radius,
                             std::uint64_t seed = 0);

enum class EnsembleGenerator { band_limited, gaussian_bumps, radial };

std::string to_string(EnsembleGenerator g);
EnsembleGenerator ensemble_generator_from_string(const std::string& name);

/// Deterministic family of continuum functions; member(i, grid) samples the same function
/// on any grid over the same box, so refinement studies compare like with like.
struct Ensemble {
  Ensemble(Grid grid, EnsembleGenerator generator, int count, std::uint64_t seed)
      : grid(std::move(grid)), generator(generator), count(count), seed(seed) {}

  Grid grid;
  EnsembleGenerator generator;
  int count;
  std::uint64_t seed;
  /// Highest Fourier mode index for band_limited members.
  int max_band = 8;

  Field member(int i) const { return member(i, grid); }
  Field member(int i, const Grid& on) const;
  std::vector<Field> members() const;
};

/// ||F(f)||_B / (||f||_inf^{p-1} ||f||_B).
double chainrule_ratio(const Nonlinearity& F, const Field& f, const BesovParams& p, bool dealias = false);

/// ||fg||_{H^s} / (||f||_inf ||g||_{H^s} + ||f||_{H^s} ||g||_inf), homogeneous norms.
double leibniz_ratio(const Field& f, const Field& g, double s);

}  // namespace hwlab
