#include "hwlab/solver.hpp"

#include "hwlab/error.hpp"
#include "hwlab/fft.hpp"
#include "hwlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hwlab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Eigen::ArrayXcd propagator_symbol(const Grid& g, double t) { return Multiplier::propagator(g, t).symbol(); }

double sup_of(const Eigen::ArrayXcd& v) { return v.abs().maxCoeff(); }

bool all_finite(const Eigen::ArrayXcd& v) { return v.real().allFinite() && v.imag().allFinite(); }

bool has_energy(const Nonlinearity& F) {
  return F.kind == NonlinearityKind::power_gauge && F.lambda.imag() == 0.0;
}

int effective_steps(double t_end, double dt) {
  return std::max(1, static_cast<int>(std::ceil(std::abs(t_end / dt) - 1e-9)));
}

}  // namespace

int SolveConfig::step_count() const { return effective_steps(t_end, dt); }

void SolveConfig::validate() const {
  F.validate();
  require(dt != 0.0 && std::isfinite(dt), ErrorCode::invalid_argument, "time step must be nonzero and finite");
  require(std::isfinite(t_end) && t_end * dt > 0.0, ErrorCode::invalid_argument,
          "t_end must be nonzero with the same sign as dt");
  require(picard_iters >= 2 || method != SolveMethod::picard, ErrorCode::invalid_argument,
          "Picard iteration needs at least two iterations");
  require(monitor_every >= 1, ErrorCode::invalid_argument, "monitor_every must be positive");
  require(field_every >= 0, ErrorCode::invalid_argument, "field_every must be nonnegative");
  require(blowup_threshold >= 0.0, ErrorCode::invalid_argument, "blow-up threshold must be nonnegative");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::blowup_detected: return "blowup_detected";
    case Termination::error: return "error";
  }
  return "error";
}

double Trajectory::mass_drift() const {
  double d = 0.0;
  for (double m : mass) d = std::max(d, std::abs(m - mass.front()) / mass.front());
  return d;
}

double Trajectory::energy_drift() const {
  require(!energy.empty(), ErrorCode::precondition, "energy is not monitored for this nonlinearity");
  double d = 0.0;
  for (double e : energy) d = std::max(d, std::abs(e - energy.front()) / std::abs(energy.front()));
  return d;
}

double energy(const Field& u, const Nonlinearity& F) {
  const double kinetic = 0.5 * std::pow(parseval_norm(u.grid(), to_spectrum(u) * Multiplier::fractional_derivative(u.grid(), 0.5).symbol()), 2);
  const double potential = F.lambda.real() / (F.p + 1.0) * std::pow(lebesgue_norm(u, F.p + 1.0), F.p + 1.0);
  return kinetic + potential;
}

StrangStepper::StrangStepper(const Grid& grid, const Nonlinearity& F, double dt, bool dealias)
    : grid_(grid), F_(F), dt_(dt), dealias_(dealias), half_(propagator_symbol(grid, 0.5 * dt)) {
  if (dealias_) mask_ = Multiplier::two_thirds_mask(grid).symbol();
}

bool StrangStepper::nonlinear_flow(Eigen::ArrayXcd& v, double h) const {
  const double p = F_.p;
  if (F_.kind == NonlinearityKind::power_gauge && F_.lambda.imag() == 0.0) {
    const double lam = F_.lambda.real();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v[i] *= std::polar(1.0, -lam * std::pow(std::abs(v[i]), p - 1.0) * h);
    }
    return true;
  }
  if (F_.kind == NonlinearityKind::glassey) {
    // u_t = |Re u|^p leaves Im u fixed; b = |Re u| obeys b^{1-p}(t) = b^{1-p}(0) - sign(Re u)(p-1)t.
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double a = v[i].real();
      if (a == 0.0) continue;
      const double sigma = a > 0.0 ? 1.0 : -1.0;
      const double x = std::pow(std::abs(a), 1.0 - p) - sigma * (p - 1.0) * h;
      if (!(x > 0.0)) return false;
      v[i].real(sigma * std::pow(x, 1.0 / (1.0 - p)));
    }
    return true;
  }
  auto rhs = [this](complex z) { return complex(0.0, -1.0) * F_(z); };
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const complex z = v[i];
    const complex k1 = rhs(z);
    const complex k2 = rhs(z + 0.5 * h * k1);
    const complex k3 = rhs(z + 0.5 * h * k2);
    const complex k4 = rhs(z + h * k3);
    v[i] = z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return all_finite(v);
}

double StrangStepper::advance(Eigen::ArrayXcd& spectrum) const {
  spectrum *= half_;
  Eigen::ArrayXcd v = fft::inverse(grid_, spectrum);
  if (!nonlinear_flow(v, dt_)) return inf;
  const double sup = sup_of(v);
  if (!std::isfinite(sup)) return inf;
  spectrum = fft::forward(grid_, v);
  if (dealias_) spectrum *= mask_;
  spectrum *= half_;
  return sup;
}

double StrangStepper::probe(const Eigen::ArrayXcd& spectrum, double tau) const {
  Eigen::ArrayXcd s = spectrum * propagator_symbol(grid_, 0.5 * tau);
  Eigen::ArrayXcd v = fft::inverse(grid_, s);
  if (!nonlinear_flow(v, tau)) return inf;
  const double sup = sup_of(v);
  return std::isfinite(sup) ? sup : inf;
}

Field step_strang(const Field& u, const SolveConfig& cfg) {
  cfg.validate();
  require(u.grid() == cfg.grid, ErrorCode::invalid_argument, "field grid does not match config grid");
  const double sup0 = lebesgue_norm(u, infinity);
  const double M = cfg.blowup_threshold > 0.0 ? cfg.blowup_threshold : 1e6 * sup0;
  StrangStepper stepper(cfg.grid, cfg.F, cfg.dt, cfg.dealias);
  Eigen::ArrayXcd spec = to_spectrum(u);
  const double sup = stepper.advance(spec);
  if (!(sup <= M) && sup0 > 0.0) fail(ErrorCode::numerical_failure, "sup norm exceeded the blow-up threshold");
  Field out = from_spectrum(cfg.grid, spec);
  return u.time() ? out.with_time(*u.time() + cfg.dt) : out;
}

namespace {

struct Recorder {
  const SolveConfig& cfg;
  Trajectory& traj;
  std::vector<Eigen::ArrayXcd> hs_symbols;
  Eigen::ArrayXcd half_derivative;

  Recorder(const SolveConfig& c, Trajectory& t) : cfg(c), traj(t) {
    traj.hs_orders = cfg.monitors.hs_norms;
    traj.hs.assign(traj.hs_orders.size(), {});
    for (double s : traj.hs_orders) hs_symbols.push_back(Multiplier::bessel_potential(cfg.grid, s).symbol());
    half_derivative = Multiplier::fractional_derivative(cfg.grid, 0.5).symbol();
  }

  void monitors(double t, const Eigen::ArrayXcd& spec) {
    const Grid& g = cfg.grid;
    const Eigen::ArrayXcd v = fft::inverse(g, spec);
    traj.times.push_back(t);
    traj.mass.push_back(parseval_norm(g, spec));
    traj.sup.push_back(sup_of(v));
    if (cfg.monitors.energy && has_energy(cfg.F)) {
      const double kinetic = 0.5 * std::pow(parseval_norm(g, spec * half_derivative), 2);
      const double q = cfg.F.p + 1.0;
      const double potential = cfg.F.lambda.real() / q * v.abs().pow(q).sum() * g.cell_volume();
      traj.energy.push_back(kinetic + potential);
    }
    for (std::size_t i = 0; i < hs_symbols.size(); ++i) traj.hs[i].push_back(parseval_norm(g, spec * hs_symbols[i]));
  }

  void snapshot(double t, const Eigen::ArrayXcd& spec) {
    traj.snapshot_times.push_back(t);
    traj.snapshots.push_back(from_spectrum(cfg.grid, spec).with_time(t));
  }
};

double initial_checks(const Field& u0, const SolveConfig& cfg) {
  cfg.validate();
  require(u0.grid() == cfg.grid, ErrorCode::invalid_argument, "initial field grid does not match config grid");
  if (cfg.enforce_wrap_guard) {
    const double R = cfg.support_radius ? *cfg.support_radius : support_radius(u0, 1e-12);
    check_wrap_guard(cfg.grid, std::abs(cfg.t_end), R);
  }
  const double sup0 = lebesgue_norm(u0, infinity);
  if (cfg.blowup_threshold > 0.0) {
    require(cfg.blowup_threshold > 10.0 * sup0, ErrorCode::invalid_argument,
            "blow-up threshold must exceed ten times the initial sup norm");
    return cfg.blowup_threshold;
  }
  return sup0 > 0.0 ? 1e6 * sup0 : inf;
}

}  // namespace

Trajectory solve(const Field& u0, const SolveConfig& cfg, const StepObserver& observer) {
  const double M = initial_checks(u0, cfg);
  const int steps = cfg.step_count();
  const double dt = cfg.t_end / steps;
  Trajectory traj(cfg.grid);
  traj.F = cfg.F;
  Recorder rec(cfg, traj);
  StrangStepper stepper(cfg.grid, cfg.F, dt, cfg.dealias);

  Eigen::ArrayXcd spec = to_spectrum(u0);
  Eigen::ArrayXcd previous;
  rec.monitors(0.0, spec);
  rec.snapshot(0.0, spec);
  if (observer) observer(0.0, spec);

  for (int n = 1; n <= steps; ++n) {
    const double t_prev = (n - 1) * dt;
    const double t = n * dt;
    previous = spec;
    const double sup = stepper.advance(spec);
    if (!(sup <= M)) {
      double lo = 0.0;
      double hi = dt;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (stepper.probe(previous, mid) > M) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      traj.termination = Termination::blowup_detected;
      traj.blowup_time = t_prev + hi;
      traj.message = "sup norm crossed the blow-up threshold";
      if (traj.times.back() != t_prev) rec.monitors(t_prev, previous);
      if (traj.snapshot_times.back() != t_prev) rec.snapshot(t_prev, previous);
      return traj;
    }
    if (!all_finite(spec)) {
      traj.termination = Termination::error;
      traj.message = "non-finite state at t = " + std::to_string(t);
      if (traj.snapshot_times.back() != t_prev) rec.snapshot(t_prev, previous);
      return traj;
    }
    if (n % cfg.monitor_every == 0 || n == steps) rec.monitors(t, spec);
    if ((cfg.field_every > 0 && n % cfg.field_every == 0) || n == steps) rec.snapshot(t, spec);
    if (observer) observer(t, spec);
  }
  return traj;
}

Trajectory picard_solve(const Field& u0, const SolveConfig& cfg) {
  const double M = initial_checks(u0, cfg);
  const int steps = cfg.step_count();
  const double dt = cfg.t_end / steps;
  const Grid& g = cfg.grid;
  const Eigen::ArrayXcd c0 = to_spectrum(u0);
  const Eigen::ArrayXd k = g.wavenumber_magnitude();

  auto phase = [&](double t) {
    Eigen::ArrayXcd s(g.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = std::polar(1.0, -t * k[i]);
    return s;
  };

  // Interaction-picture coefficients a_n = U(-t_n) u(t_n) in Fourier space.
  std::vector<Eigen::ArrayXcd> a(static_cast<std::size_t>(steps) + 1, c0);
  Trajectory traj(g);
  traj.F = cfg.F;
  const double scale = parseval_norm(g, c0);
  int rising = 0;
  for (int m = 0; m < cfg.picard_iters; ++m) {
    std::vector<Eigen::ArrayXcd> next(a.size());
    Eigen::ArrayXcd integral = Eigen::ArrayXcd::Zero(g.size());
    Eigen::ArrayXcd g_prev;
    double d = 0.0;
    bool diverged = false;
    for (int n = 0; n <= steps; ++n) {
      const double t = n * dt;
      const Eigen::ArrayXcd forward_phase = phase(t);
      Eigen::ArrayXcd v = fft::inverse(g, a[n] * forward_phase);
      if (!(sup_of(v) <= M)) diverged = true;
      v = v.unaryExpr([&cfg](complex z) { return cfg.F(z); });
      Eigen::ArrayXcd gn = fft::forward(g, v);
      if (cfg.dealias) gn *= Multiplier::two_thirds_mask(g).symbol();
      gn *= forward_phase.conjugate();
      if (n > 0) integral += 0.5 * dt * (g_prev + gn);
      g_prev = std::move(gn);
      next[n] = c0 - complex(0.0, 1.0) * integral;
      d = std::max(d, parseval_norm(g, next[n] - a[n]));
    }
    a = std::move(next);
    traj.contraction.push_back(d);
    if (diverged || !std::isfinite(d)) {
      traj.termination = Termination::error;
      traj.message = "Picard iterate left the admissible range";
      break;
    }
    const std::size_t c = traj.contraction.size();
    rising = (c >= 2 && traj.contraction[c - 1] > traj.contraction[c - 2]) ? rising + 1 : 0;
    if (rising >= 3) traj.contraction_warning = true;
    if (d <= 1e-15 * scale) break;
  }
  if (traj.contraction_warning && traj.message.empty()) {
    traj.message = "Picard differences grew for three consecutive iterations; T is too large for contraction";
  }

  Recorder rec(cfg, traj);
  for (int n = 0; n <= steps; ++n) {
    const double t = n * dt;
    const Eigen::ArrayXcd spec = a[n] * phase(t);
    if (n % cfg.monitor_every == 0 || n == steps) rec.monitors(t, spec);
    if (n == 0 || n == steps || (cfg.field_every > 0 && n % cfg.field_every == 0)) rec.snapshot(t, spec);
  }
  return traj;
}

std::string to_string(ScatteringVerdict v) {
  switch (v) {
    case ScatteringVerdict::decreasing: return "decreasing";
    case ScatteringVerdict::not_decreasing: return "not_decreasing";
    case ScatteringVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

ScatteringReport scattering_check(const Trajectory& traj) {
  ScatteringReport report;
  report.s_c = critical_exponents(traj.grid.dim(), traj.F.p).s_c;
  if (traj.termination != Termination::completed || traj.snapshots.size() < 5) return report;
  std::vector<Field> w;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) w.push_back(propagate(traj.snapshots[i], -traj.snapshot_times[i]));
  const double scale = sobolev_norm(w.front(), report.s_c, false);
  bool constant = true;
  bool decreasing = true;
  for (std::size_t i = 1; i < w.size(); ++i) {
    report.window_ends.push_back(traj.snapshot_times[i]);
    report.increments.push_back(sobolev_norm(w[i] - w[i - 1], report.s_c, false));
    constant = constant && report.increments.back() <= 1e-12 * scale;
    if (i >= 2) decreasing = decreasing && report.increments[i - 1] < report.increments[i - 2];
  }
  report.verdict = (constant || decreasing) ? ScatteringVerdict::decreasing : ScatteringVerdict::not_decreasing;
  return report;
}

std::string to_string(PowerRegime r) {
  switch (r) {
    case PowerRegime::subcritical: return "subcritical";
    case PowerRegime::critical: return "critical";
    case PowerRegime::supercritical: return "supercritical";
  }
  return "subcritical";
}

CriticalExponents critical_exponents(int n, double p) {
  require(n >= 1, ErrorCode::invalid_argument, "dimension must be positive");
  require(p > 1.0 && std::isfinite(p), ErrorCode::invalid_exponent, "power must exceed 1");
  CriticalExponents c;
  c.n = n;
  c.p = p;
  c.s_c = 0.5 * n - 1.0 / (p - 1.0);
  c.glassey_power = n == 1 ? inf : 1.0 + 2.0 / (n - 1);
  c.conformal_power = n <= 2 ? inf : 1.0 + 2.0 / (n - 2);
  const double gap = 2.0 - (n - 1) * (p - 1.0);
  if (gap > 1e-12) {
    c.regime = PowerRegime::subcritical;
    c.delta = 0.5 * gap;
    c.lifespan_exponent = 2.0 * (p - 1.0) / gap;
  } else if (std::abs(gap) <= 1e-12) {
    c.regime = PowerRegime::critical;
    c.delta = 0.0;
    c.exponential_lifespan = true;
  } else {
    c.regime = PowerRegime::supercritical;
  }
  return c;
}

double regularity_threshold(int n, double p, double delta_prime) {
  const auto c = critical_exponents(n, p);
  require(c.delta.has_value(), ErrorCode::precondition, "regularity threshold needs p <= 1 + 2/(n-1)");
  return 0.5 * n - (1.0 - *c.delta + delta_prime) / (p - 1.0);
}

double lifespan_size(const Field& u0, double s1) {
  require(s1 >= 0.0 && s1 <= 1.0, ErrorCode::invalid_argument, "s1 must lie in [0, 1]");
  return std::sqrt(sobolev_norm(u0, s1, true)) * std::sqrt(sobolev_norm(u0, 1.0 - s1, true));
}

double lifespan_lower_bound(double c, double Lambda, int n, double p) {
  const auto ce = critical_exponents(n, p);
  require(ce.regime == PowerRegime::subcritical, ErrorCode::precondition, "power-law lifespan needs subcritical p");
  require(Lambda > 0.0, ErrorCode::degenerate_input, "size functional must be positive");
  return c * std::pow(Lambda, -(p - 1.0) / *ce.delta);
}

double critical_size(const Field& u0, double s) {
  require(s >= 0.0 && s <= 1.0, ErrorCode::invalid_argument, "s must lie in [0, 1]");
  const double a = sobolev_norm(u0, s, true);
  return std::sqrt(a * a + a * sobolev_norm(u0, 1.0 - s, true));
}

double critical_lifespan_lower_bound(double c, double eps, double p) {
  require(eps > 0.0, ErrorCode::degenerate_input, "data size must be positive");
  return std::exp(c * std::pow(eps, -(p - 1.0)));
}

double lifespan_upper_bound(double C, double eps, int n, double p) {
  const auto ce = critical_exponents(n, p);
  require(eps > 0.0, ErrorCode::degenerate_input, "data size must be positive");
  if (ce.regime == PowerRegime::critical) return std::exp(C * std::pow(eps, -(p - 1.0)));
  require(ce.regime == PowerRegime::subcritical, ErrorCode::precondition, "no blow-up bound above the Glassey power");
  return C * std::pow(eps, -*ce.lifespan_exponent);
}

}  // namespace hwlab
