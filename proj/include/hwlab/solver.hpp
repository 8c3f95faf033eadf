#pragma once

#include "hwlab/chainrule.hpp"
#include "hwlab/field.hpp"
#include "hwlab/grid.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hwlab {

enum class SolveMethod { strang_split, picard };

struct MonitorSet {
  bool mass = true;
  bool energy = true;
  /// Orders s of inhomogeneous H^s norms to record.
  std::vector<double> hs_norms;
};

/// Settings for one run of i u_t - D u = F(u). A negative dt integrates backwards in time
/// (t_end must then be negative too).
struct SolveConfig {
  explicit SolveConfig(Grid grid, Nonlinearity F = Nonlinearity::power_gauge(3.0)) : grid(std::move(grid)), F(std::move(F)) {}

  Grid grid;
  Nonlinearity F;
  double dt = 1e-3;
  double t_end = 1.0;
  SolveMethod method = SolveMethod::strang_split;
  int picard_iters = 8;
  /// Sup-norm cutoff M; zero selects 1e6 times the initial sup norm.
  double blowup_threshold = 0.0;
  bool dealias = false;
  MonitorSet monitors;
  /// Record monitors every this many steps (the initial and final state are always recorded).
  int monitor_every = 1;
  /// Store full fields every this many steps; zero keeps only the initial and final state.
  int field_every = 0;
  bool enforce_wrap_guard = true;
  /// Support radius of the data for the wrap guard; measured from u0 when absent.
  std::optional<double> support_radius;

  int step_count() const;
  void validate() const;
};

enum class Termination { completed, blowup_detected, error };
std::string to_string(Termination t);

struct Trajectory {
  explicit Trajectory(Grid grid) : grid(std::move(grid)) {}

  Grid grid;
  Nonlinearity F = Nonlinearity::power_gauge(3.0);
  std::vector<double> times;
  std::vector<double> mass;
  /// Conserved energy; empty unless F is power_gauge with real lambda.
  std::vector<double> energy;
  std::vector<double> sup;
  std::vector<double> hs_orders;
  /// hs[i][n] = ||u(times[n])||_{H^{hs_orders[i]}}.
  std::vector<std::vector<double>> hs;
  std::vector<double> snapshot_times;
  std::vector<Field> snapshots;
  Termination termination = Termination::completed;
  std::optional<double> blowup_time;
  std::string message;
  /// Picard diagnostics d_m = sup_t ||u^(m+1) - u^(m)||_{L^2}.
  std::vector<double> contraction;
  bool contraction_warning = false;

  const Field& final_state() const { return snapshots.back(); }
  /// max_n |mass_n - mass_0| / mass_0.
  double mass_drift() const;
  /// max_n |E_n - E_0| / |E_0|.
  double energy_drift() const;
};

/// 1/2 ||D^{1/2} u||^2 + Re(lambda)/(p+1) ||u||_{p+1}^{p+1}.
double energy(const Field& u, const Nonlinearity& F);

/// Strang splitting on Fourier coefficients: U(dt/2), pointwise nonlinear flow over dt, U(dt/2).
/// The nonlinear flow is exact for power_gauge with real lambda and for glassey, and RK4 otherwise.
class StrangStepper {
 public:
  StrangStepper(const Grid& grid, const Nonlinearity& F, double dt, bool dealias);

  /// Advances the spectrum by dt. Returns the sup norm of the state after the nonlinear
  /// substep, or +inf when the pointwise flow leaves the reals.
  double advance(Eigen::ArrayXcd& spectrum) const;
  /// Sup norm after the nonlinear substep of a partial step of length tau from spectrum.
  double probe(const Eigen::ArrayXcd& spectrum, double tau) const;
  /// Pointwise nonlinear flow over time h, in place; returns false on pointwise blow-up.
  bool nonlinear_flow(Eigen::ArrayXcd& values, double h) const;

  double dt() const { return dt_; }

 private:
  Grid grid_;
  Nonlinearity F_;
  double dt_;
  bool dealias_;
  Eigen::ArrayXcd half_;
  Eigen::ArrayXcd mask_;
};

/// One Strang step; throws ErrorCode::numerical_failure when the sup norm exceeds the threshold.
Field step_strang(const Field& u, const SolveConfig& cfg);

using StepObserver = std::function<void(double t, const Eigen::ArrayXcd& spectrum)>;

/// Integrates to cfg.t_end; blow-up is recorded in the trajectory rather than thrown.
/// The observer, if any, sees the spectrum at t = 0 and after every completed step.
Trajectory solve(const Field& u0, const SolveConfig& cfg, const StepObserver& observer = {});

/// Picard iteration of the Duhamel map with trapezoid quadrature on the step grid.
Trajectory picard_solve(const Field& u0, const SolveConfig& cfg);

enum class ScatteringVerdict { decreasing, not_decreasing, inconclusive };
std::string to_string(ScatteringVerdict v);

struct ScatteringReport {
  double s_c = 0.0;
  std::vector<double> window_ends;
  /// ||w(t_{i+1}) - w(t_i)||_{H^{s_c}} with w(t) = U(-t) u(t).
  std::vector<double> increments;
  ScatteringVerdict verdict = ScatteringVerdict::inconclusive;
};

/// Needs at least five stored snapshots (four windows).
ScatteringReport scattering_check(const Trajectory& traj);

enum class PowerRegime { subcritical, critical, supercritical };
std::string to_string(PowerRegime r);

struct CriticalExponents {
  int n = 0;
  double p = 0.0;
  double s_c = 0.0;
  /// 1 + 2/(n-1); infinite for n = 1.
  double glassey_power = 0.0;
  /// 1 + 2/(n-2); infinite for n <= 2.
  double conformal_power = 0.0;
  /// 1 - (n-1)(p-1)/2, present when p < glassey_power.
  std::optional<double> delta;
  PowerRegime regime = PowerRegime::subcritical;
  /// 2(p-1)/(2-(n-1)(p-1)) for subcritical p.
  std::optional<double> lifespan_exponent;
  bool exponential_lifespan = false;
};

CriticalExponents critical_exponents(int n, double p);

/// n/2 - (1 - delta + delta')/(p - 1).
double regularity_threshold(int n, double p, double delta_prime);

/// Lambda = ||D^{s1} u0||^{1/2} ||D^{1-s1} u0||^{1/2}.
double lifespan_size(const Field& u0, double s1);
/// c Lambda^{-(p-1)/delta}.
double lifespan_lower_bound(double c, double Lambda, int n, double p);
/// eps with eps^2 = ||u0||_{H^s}^2 + ||u0||_{H^s} ||u0||_{H^{1-s}}, homogeneous norms.
double critical_size(const Field& u0, double s);
/// exp(c eps^{-(p-1)}).
double critical_lifespan_lower_bound(double c, double eps, double p);
/// C eps^{-2(p-1)/(2-(n-1)(p-1))} below the Glassey power, exp(C eps^{-(p-1)}) at it.
double lifespan_upper_bound(double C, double eps, int n, double p);

}  // namespace hwlab
