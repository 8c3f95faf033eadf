#pragma once

#include "hwlab/field.hpp"
#include "hwlab/quadrature.hpp"
#include "hwlab/solver.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hwlab {

/// Radial bump g(x) = A exp(1 - 1/(1 - |x|^2/R^2)) on |x| < R; real, smooth, positive mean.
struct BumpProfile {
  double amplitude = 1.0;
  double radius = 1.0;

  double operator()(double r) const;
  Field sample(const Grid& grid, double eps = 1.0) const;
};

/// Auxiliary wave state v with i v_t + D v = i u, v(0) = 0, in Fourier space.
/// v_t is reconstructed as u + i D v, so v_t - Re u = i (D v + Im u).
struct ReductionState {
  double t = 0.0;
  Field u;
  Field v;
  Field v_t;
  /// ||v_t - Re u|| / ||u||.
  double residual_velocity = 0.0;
  /// ||D v + Im u|| / ||u||.
  double residual_dispersion = 0.0;
};

/// Exponential trapezoid for v in the interaction picture: the slowly varying part
/// e^{i|k|t} u(t) is interpolated linearly over each step, which is exact when u solves the
/// free half-wave equation.
class ReductionIntegrator {
 public:
  ReductionIntegrator(const Grid& grid, double dt);

  /// Feeds u at t0 + n dt for n = 0, 1, 2, ... in order.
  void push(const Eigen::ArrayXcd& u_spectrum);
  const Eigen::ArrayXcd& v_spectrum() const { return v_; }
  double time() const { return t_; }
  ReductionState state() const;

 private:
  Grid grid_;
  double dt_;
  double t_ = 0.0;
  int count_ = 0;
  Eigen::ArrayXcd v_;
  Eigen::ArrayXcd u_prev_;
  Eigen::ArrayXcd rotate_;
  Eigen::ArrayXcd weight_prev_;
  Eigen::ArrayXcd weight_next_;
  Eigen::ArrayXd k_;
};

struct ReductionHistory {
  std::vector<ReductionState> states;
  /// ||v_tt - Laplacian v - |v_t|^p|| / (||Laplacian v|| + ||v_t|^p||) at interior snapshots, with
  /// v_tt from central differences of the stored states.
  std::vector<double> wave_residual;
  double max_residual = 0.0;
  Trajectory trajectory;
};

/// Runs the half-wave solve (glassey, or F = 0 as a linear control) and integrates v alongside every step, keeping a state every
/// snapshot_every steps (and the last one). Residuals above 100 times the expected
/// dt^2 (1 + ||Du||^2/||u||^2) scale raise ErrorCode::reduction_failure, unless the
/// trajectory ended in blow-up, in which case states after 0.9 t* are exempt.
ReductionHistory run_reduction(const Field& u0, const SolveConfig& cfg, int snapshot_every = 1);

/// Same integration driven by stored snapshots, which must be equally spaced in time.
ReductionHistory reduce_to_wave(const Trajectory& traj);

/// phi(t, x) = integral over the unit sphere of exp(x.w - t) dw. The sphere rule is the
/// pair {+1, -1} for n = 1, the periodic trapezoid in angle for n = 2 and Gauss-Legendre in
/// cos(theta) times the trapezoid in azimuth for n = 3.
class TestFunction {
 public:
  /// order 0 doubles from 16 until the largest-radius value changes by less than 1e-8.
  TestFunction(const Grid& grid, int order = 0);

  int order() const { return order_; }
  const Grid& grid() const { return grid_; }
  /// phi(0, .) on the grid.
  const Eigen::ArrayXd& base() const { return base_; }
  Field at(double t) const;
  /// Sphere quadrature of exp(x.w) at one point.
  static double evaluate(int dim, const Eigen::Vector3d& x, int order);

 private:
  Grid grid_;
  int order_;
  Eigen::ArrayXd base_;
};

Field phi(double t, const Grid& grid, int order = 0);

/// Relative L^2 mismatch of the spectral Laplacian of (window phi) against phi on |x| <= L/2.
double eigenrelation_residual(const TestFunction& phi);

struct FunctionalSeries {
  std::vector<double> t;
  std::vector<double> F;
  std::vector<double> G;
  std::vector<double> H;
  /// Direct quadrature of phi |v_t|^p.
  std::vector<double> F_prime;
  /// |G + F - 2H| / (|F| + |H|).
  double identity_defect = 0.0;
  /// min_t G(t) e^{2t} / G(0).
  double envelope_ratio = 0.0;
  /// Snapshots where G <= 0.
  std::vector<double> anomalies;
  /// max |central difference of F - F_prime| / F_prime over interior samples.
  double derivative_mismatch = 0.0;
};

/// Functionals of the real parts of v and v_t over the fixed ball
/// |x| <= min(t_last + support_radius + margin, L), t_last being the final state time.
FunctionalSeries blowup_functionals(const ReductionHistory& history, const TestFunction& phi, double p,
                                    double support_radius, double margin = 1.0);

struct OdeReport {
  std::vector<double> c_emp;
  double inf_c = 0.0;
  /// sup over samples of F / (F'^{1/p} (t+R)^{(n-1)(1-1/p)/2}).
  double holder_sup = 0.0;
  /// Relative change of inf_c against a refined series, when supplied.
  std::optional<double> refinement_change;
  bool passed = false;
};

/// c_emp(t) = F'(t) (t+R)^{(n-1)(p-1)/2} / F(t)^p on samples with t <= t_max.
OdeReport ode_inequality_check(const FunctionalSeries& series, int n, double p, double R,
                               double t_max = std::numeric_limits<double>::infinity(),
                               const FunctionalSeries* refined = nullptr);

enum class LifespanBranch { subcritical_power, critical_exponential };
std::string to_string(LifespanBranch b);

struct ScanRecord {
  double epsilon = 0.0;
  double t_star = 0.0;
  /// t* at dt / 2.
  double t_star_refined = 0.0;
  bool censored = false;
  bool validated = false;
  double dt = 0.0;
  int N = 0;
  double L = 0.0;
  int steps = 0;
};

struct LifespanFit {
  std::vector<ScanRecord> records;
  LifespanBranch branch = LifespanBranch::subcritical_power;
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double residual = 0.0;
  /// Theoretical exponent: 2(p-1)/(2-(n-1)(p-1)), or 1 on the critical branch.
  double predicted = 0.0;
  std::size_t censored = 0;
};

struct ScanConfig {
  int n = 2;
  double p = 2.0;
  std::vector<double> epsilons;
  BumpProfile profile;
  int N = 256;
  double dt = 0.05;
  /// Blow-up threshold as a multiple of the initial sup norm.
  double threshold_factor = 1e6;
  /// L = box_margin (t*_pilot + R).
  double box_margin = 1.1;
  /// First guess of the half-length used by the pilot run; doubled while the pilot is censored.
  double pilot_L = 8.0;
  int pilot_attempts = 6;
  /// Pilot step as a multiple of dt.
  double pilot_dt_factor = 2.0;
  bool dealias = false;
  /// Relative dt-halving tolerance for validation.
  double validation_tolerance = 0.05;
};

/// One glassey run u0 = eps g on [-L, L)^n until blow-up or the wrap guard t = L - R.
ScanRecord lifespan_run(const ScanConfig& cfg, double eps, double L, double dt);

/// Pilot, production and dt/2 runs per epsilon, in decreasing order of epsilon. A censored
/// production run is repeated on a box 1.5 times larger, up to pilot_attempts times.
std::vector<ScanRecord> lifespan_records(const ScanConfig& cfg);

/// lifespan_records followed by fit_lifespan. Throws ErrorCode::censored_fit when more than
/// a quarter of the records are censored or unvalidated.
LifespanFit lifespan_scan(const ScanConfig& cfg);

/// Least-squares fit of log t* against log(1/eps) (subcritical) or eps^{-(p-1)} (critical).
LifespanFit fit_lifespan(std::vector<ScanRecord> records, int n, double p);

}  // namespace hwlab
