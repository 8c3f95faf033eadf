#pragma once

#include "hwlab/chainrule.hpp"
#include "hwlab/field.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hwlab {

enum class WeightForm { pure_power, kss, global };

std::string to_string(WeightForm f);
WeightForm weight_form_from_string(const std::string& name);

/// Radial weight w(r):
///   pure_power  r^{-(1-delta)/2}
///   kss         r^{-(1-delta)/2} <r>^{-delta/2}
///   global      r^{-(1-delta)/2} <r>^{-delta'/2}
/// with <r> = sqrt(1 + r^2). delta outside (0, 1] is allowed for control experiments and
/// simply fails admissible().
struct WeightSpec {
  double delta = 0.5;
  double delta_prime = 0.0;
  WeightForm form = WeightForm::pure_power;

  /// Exponent a with w^2 ~ r^{-a} near the origin.
  double origin_exponent() const { return 1.0 - delta; }
  /// Exponent b with w^2 ~ r^{-b} at infinity.
  double decay_exponent() const;
  /// 0 <= a <= b < n.
  bool admissible(int dim) const;

  double value(double r) const;
  double squared(double r) const { return value(r) * value(r); }
  /// w sampled at the grid radii with the origin sample moved to r = h/2.
  Eigen::ArrayXd sample(const Grid& grid) const;
};

struct EstimateReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::map<std::string, double> parameters;
};

struct EnsembleStatistics {
  double sup = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

EnsembleStatistics summarize(const std::vector<double>& ratios);
/// |fine - coarse| / coarse.
double refinement_drift(double coarse, double fine);

/// True when samples at equal lattice radius agree to rel_tol times the sup norm.
bool is_radial(const Field& f, double rel_tol = 1e-8);

struct StrichartzOptions {
  int time_samples = 64;
  bool radial = false;
  /// Data support radius for the wrap guard; skipped when absent.
  std::optional<double> support_radius;
};

/// ||U(t) f||_{L^q(0,T; L^inf)} / ||f||_{H^sigma-dot}, sigma = n/2 - 1/q.
EstimateReport strichartz_ratio(const Field& f, double q, double T, const StrichartzOptions& opt = {});

using Source = std::function<Field(double t)>;

struct LocalEnergyOptions {
  int steps = 256;
  bool enforce_wrap_guard = true;
  std::optional<double> support_radius;
};

/// Solves i u_t - D u = G by Strang splitting and compares the weighted local-energy sides.
EstimateReport local_energy_check(const Field& u0, const Source& G, const WeightSpec& w, double T,
                                  const LocalEnergyOptions& opt = {});

enum class ApClass { A1, A2 };

/// Sampled sup of the A1 quantity avg_B w^2 * sup_B w^{-2} (or the A2 quantity
/// avg_B w^2 * avg_B w^{-2}) over balls centred at 32 equispaced radii in [0, L/2] with
/// dyadic radii from L/2 down to the spacing h = 2L/resolution. Each coarser level of
/// resolution, down to 8 points, contributes its own ball family, with the weight frozen
/// at w(h/2) inside r < h/2.
double muckenhoupt_characteristic(const WeightSpec& w, int dim, ApClass cls, int resolution,
                                  double half_length = 8.0);

/// ||w D f||_{L^2} / sum_j ||w d_j f||_{L^2}.
double weighted_riesz_ratio(const Field& f, const WeightSpec& w);

enum class RadialSobolevForm { trace, pointwise };

/// trace:     ||r^{(n-1)/2} f||_inf / (||D^s f||^{1/2} ||D^{1-s} f||^{1/2}), s in (1/2, 1)
/// pointwise: ||r^{n/2-s} f||_inf / ||D^s f||, s in (1/2, n/2)
double radial_sobolev_ratio(const Field& f, double s, RadialSobolevForm form);

/// ||w^{-1} D^s F(f)||_{L^2} / (||w D^s f||_{L^2} ||w^{-2} |f|^{p-1}||_inf).
double weighted_chainrule_ratio(const Nonlinearity& F, const Field& f, double s, const WeightSpec& w);

}  // namespace hwlab
