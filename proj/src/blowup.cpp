#include "hwlab/blowup.hpp"

#include "hwlab/error.hpp"
#include "hwlab/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace hwlab {

namespace {

constexpr double pi = std::numbers::pi;

double l2(const Grid& g, const Eigen::ArrayXd& a) { return std::sqrt(a.square().sum() * g.cell_volume()); }

double l2(const Grid& g, const Eigen::ArrayXcd& a) { return std::sqrt(a.abs2().sum() * g.cell_volume()); }

}  // namespace

double BumpProfile::operator()(double r) const {
  const double x = r / radius;
  if (x >= 1.0) return 0.0;
  return amplitude * std::exp(1.0 - 1.0 / (1.0 - x * x));
}

Field BumpProfile::sample(const Grid& grid, double eps) const {
  require(radius > 0.0 && amplitude > 0.0, ErrorCode::invalid_argument, "bump profile needs positive amplitude and radius");
  const Eigen::ArrayXd r = grid.radius();
  Eigen::ArrayXcd v(grid.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = eps * (*this)(r[i]);
  return Field(grid, std::move(v));
}

ReductionIntegrator::ReductionIntegrator(const Grid& grid, double dt) : grid_(grid), dt_(dt) {
  require(dt != 0.0 && std::isfinite(dt), ErrorCode::invalid_argument, "reduction step must be finite and nonzero");
  k_ = grid.wavenumber_magnitude();
  const Eigen::Index n = k_.size();
  rotate_.resize(n);
  weight_prev_.resize(n);
  weight_next_.resize(n);
  const complex I(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = 2.0 * k_[i];
    const complex z = -I * a * dt;
    complex I0;
    complex I1;
    if (std::abs(a * dt) < 0.1) {
      complex term = 1.0;
      I0 = 0.0;
      I1 = 0.0;
      for (int m = 0; m < 14; ++m) {
        I0 += term / double(m + 1);
        I1 += term / double(m + 2);
        term *= z / double(m + 1);
      }
      I0 *= dt;
      I1 *= dt;
    } else {
      const complex e = std::exp(z);
      I0 = (1.0 - e) / (I * a);
      I1 = (I0 / dt - e) / (I * a);
    }
    rotate_[i] = std::exp(I * k_[i] * dt);
    weight_prev_[i] = rotate_[i] * (I0 - I1);
    weight_next_[i] = rotate_[i] * I1 * rotate_[i];
  }
  v_ = Eigen::ArrayXcd::Zero(n);
}

void ReductionIntegrator::push(const Eigen::ArrayXcd& u_spectrum) {
  require(u_spectrum.size() == v_.size(), ErrorCode::invalid_argument, "spectrum size does not match the grid");
  if (count_ > 0) {
    v_ = rotate_ * v_ + weight_prev_ * u_prev_ + weight_next_ * u_spectrum;
    t_ += dt_;
  }
  u_prev_ = u_spectrum;
  ++count_;
}

ReductionState ReductionIntegrator::state() const {
  require(count_ > 0, ErrorCode::precondition, "reduction integrator has no data yet");
  const complex I(0.0, 1.0);
  ReductionState s{t_, from_spectrum(grid_, u_prev_), from_spectrum(grid_, v_), Field::zeros(grid_), 0.0, 0.0};
  const Field Dv = from_spectrum(grid_, (k_ * v_).eval());
  s.v_t = Field(grid_, s.u.values() + I * Dv.values());
  const double nu = l2(grid_, s.u.values());
  const double scale = nu > 0.0 ? nu : 1.0;
  s.residual_velocity = l2(grid_, (s.v_t.values() - s.u.values().real().cast<complex>()).eval()) / scale;
  s.residual_dispersion = l2(grid_, (Dv.values().real() + s.u.values().imag()).eval()) / scale;
  const double dv_imag = l2(grid_, Dv.values().imag().eval()) / scale;
  s.residual_dispersion = std::hypot(s.residual_dispersion, dv_imag);
  return s;
}

namespace {

double expected_scale(const ReductionState& s, double dt) {
  const Field Du = fractional_derivative(s.u, 1.0);
  const double nu = parseval_norm(s.u);
  const double ratio = nu > 0.0 ? parseval_norm(Du) / nu : 0.0;
  return dt * dt * (1.0 + ratio * ratio) + 1e-12;
}

void finish_history(ReductionHistory& h, double p, double dt, std::optional<double> t_star) {
  const auto& st = h.states;
  h.max_residual = 0.0;
  for (const auto& s : st) {
    if (t_star && s.t > 0.9 * *t_star) continue;
    const double r = std::max(s.residual_velocity, s.residual_dispersion);
    h.max_residual = std::max(h.max_residual, r);
    if (r > 100.0 * expected_scale(s, dt)) {
      fail(ErrorCode::reduction_failure, "reduction residual " + std::to_string(r) + " at t = " + std::to_string(s.t) +
                                             " exceeds 100 times the expected discretization scale");
    }
  }
  h.wave_residual.clear();
  for (std::size_t i = 1; i + 1 < st.size(); ++i) {
    const double tau_m = st[i].t - st[i - 1].t;
    const double tau_p = st[i + 1].t - st[i].t;
    if (std::abs(tau_m - tau_p) > 1e-9 * std::abs(tau_p)) continue;
    const Grid& g = st[i].u.grid();
    const Eigen::ArrayXd vtt = (st[i + 1].v_t.values().real() - st[i - 1].v_t.values().real()) / (2.0 * tau_p);
    const Field lap = fractional_derivative(fractional_derivative(Field(g, st[i].v.values().real().cast<complex>()), 1.0), 1.0);
    const Eigen::ArrayXd src = p > 0.0 ? st[i].v_t.values().real().abs().pow(p).eval() : Eigen::ArrayXd::Zero(vtt.size()).eval();
    const double denom = l2(g, lap.values().real().eval()) + l2(g, src);
    if (denom <= 0.0) continue;
    h.wave_residual.push_back(l2(g, (vtt + lap.values().real() - src).eval()) / denom);
  }
}

/// The reduction needs F = i|Re u|^p, or F = 0 for the linear control run.
double reduction_power(const Nonlinearity& F) {
  if (F.kind == NonlinearityKind::glassey) return F.p;
  const bool zero = F.kind == NonlinearityKind::custom && F(complex(0.7, -0.4)) == 0.0 && F(complex(-1.3, 2.1)) == 0.0;
  require(zero, ErrorCode::precondition, "wave reduction needs the glassey nonlinearity or F = 0");
  return 0.0;
}

}  // namespace

ReductionHistory run_reduction(const Field& u0, const SolveConfig& cfg, int snapshot_every) {
  const double p = reduction_power(cfg.F);
  require(snapshot_every >= 1, ErrorCode::invalid_argument, "snapshot_every must be positive");
  const int steps = cfg.step_count();
  const double dt = cfg.t_end / steps;
  ReductionIntegrator integ(cfg.grid, dt);
  ReductionHistory h{{}, {}, 0.0, Trajectory(cfg.grid)};
  int n = 0;
  bool last_kept = false;
  auto observer = [&](double, const Eigen::ArrayXcd& spec) {
    integ.push(spec);
    last_kept = (n % snapshot_every == 0);
    if (last_kept) h.states.push_back(integ.state());
    ++n;
  };
  h.trajectory = solve(u0, cfg, observer);
  if (!last_kept && n > 0) h.states.push_back(integ.state());
  finish_history(h, p, dt, h.trajectory.blowup_time);
  return h;
}

ReductionHistory reduce_to_wave(const Trajectory& traj) {
  const double p = reduction_power(traj.F);
  const auto& ts = traj.snapshot_times;
  require(ts.size() >= 2, ErrorCode::precondition, "reduction needs at least two snapshots");
  require(ts.front() == 0.0, ErrorCode::precondition, "reduction starts from the t = 0 snapshot");
  const double dt = ts[1] - ts[0];
  for (std::size_t i = 1; i < ts.size(); ++i) {
    require(std::abs((ts[i] - ts[i - 1]) - dt) <= 1e-9 * std::abs(dt), ErrorCode::precondition,
            "reduction needs equally spaced snapshots");
  }
  ReductionIntegrator integ(traj.grid, dt);
  ReductionHistory h{{}, {}, 0.0, traj};
  for (const Field& f : traj.snapshots) {
    integ.push(to_spectrum(f));
    h.states.push_back(integ.state());
  }
  finish_history(h, p, dt, traj.blowup_time);
  return h;
}

double TestFunction::evaluate(int dim, const Eigen::Vector3d& x, int order) {
  switch (dim) {
    case 1: return std::exp(x[0]) + std::exp(-x[0]);
    case 2: {
      double sum = 0.0;
      for (int j = 0; j < order; ++j) {
        const double th = 2.0 * pi * j / order;
        sum += std::exp(x[0] * std::cos(th) + x[1] * std::sin(th));
      }
      return sum * 2.0 * pi / order;
    }
    case 3: {
      const QuadratureRule& gl = gauss_legendre(order);
      const int m = 2 * order;
      double sum = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double mu = gl.nodes[i];
        const double s = std::sqrt(1.0 - mu * mu);
        double ring = 0.0;
        for (int j = 0; j < m; ++j) {
          const double ph = 2.0 * pi * j / m;
          ring += std::exp(s * (x[0] * std::cos(ph) + x[1] * std::sin(ph)) + mu * x[2]);
        }
        sum += gl.weights[i] * ring * 2.0 * pi / m;
      }
      return sum;
    }
    default: fail(ErrorCode::invalid_argument, "test function supports dimensions 1 to 3");
  }
}

TestFunction::TestFunction(const Grid& grid, int order) : grid_(grid), order_(order) {
  const int dim = grid.dim();
  const double r_max = grid.half_length() * std::sqrt(double(dim));
  require(r_max < 700.0, ErrorCode::non_finite, "test function overflows on this box");
  const Eigen::Vector3d probe(r_max, 0.0, 0.0);
  if (order_ <= 0) {
    order_ = 16;
    while (true) {
      const double a = evaluate(dim, probe, order_);
      const double b = evaluate(dim, probe, 2 * order_);
      if (std::abs(a - b) <= 1e-8 * std::abs(b)) break;
      order_ *= 2;
      require(order_ <= 8192, ErrorCode::numerical_failure, "sphere quadrature did not converge");
    }
  }
  // phi(0, .) is radial, so it is tabulated on the distinct squared index radii.
  const int N = grid.points_per_axis();
  const double h = grid.spacing();
  std::map<long, double> table;
  base_.resize(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unravel(i);
    long key = 0;
    for (int a = 0; a < dim; ++a) {
      const long c = idx[a] - N / 2;
      key += c * c;
    }
    auto it = table.find(key);
    if (it == table.end()) {
      const double r = h * std::sqrt(double(key));
      it = table.emplace(key, evaluate(dim, Eigen::Vector3d(r, 0.0, 0.0), order_)).first;
    }
    base_[i] = it->second;
  }
}

Field TestFunction::at(double t) const { return Field(grid_, (base_ * std::exp(-t)).cast<complex>()); }

Field phi(double t, const Grid& grid, int order) { return TestFunction(grid, order).at(t); }

double eigenrelation_residual(const TestFunction& phi) {
  const Grid& g = phi.grid();
  const double L = g.half_length();
  const Eigen::ArrayXd r = g.radius();
  Eigen::ArrayXd windowed(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) windowed[i] = phi.base()[i] * 0.5 * std::erfc((r[i] - 0.75 * L) / (0.06 * L));
  const Field w(g, windowed.cast<complex>());
  const Eigen::ArrayXd k2 = g.wavenumber_magnitude().square();
  const Field lap = from_spectrum(g, (-(k2.cast<complex>()) * to_spectrum(w)).eval());
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (r[i] > 0.5 * L) continue;
    num += std::norm(lap.values()[i] - phi.base()[i]);
    den += phi.base()[i] * phi.base()[i];
  }
  return std::sqrt(num / den);
}

FunctionalSeries blowup_functionals(const ReductionHistory& history, const TestFunction& phi, double p,
                                    double support_radius, double margin) {
  require(!history.states.empty(), ErrorCode::precondition, "no reduction states");
  require(p > 1.0, ErrorCode::invalid_exponent, "blow-up functionals need p > 1");
  const Grid& g = phi.grid();
  require(history.states.front().u.grid() == g, ErrorCode::invalid_argument, "test function grid does not match");
  const Eigen::ArrayXd r = g.radius();
  const double dV = g.cell_volume();
  FunctionalSeries out;
  // One fixed domain for the whole series keeps F(t) smooth in t; it still contains the
  // support |x| <= t + R of every state because the wrap guard gives t + R <= L.
  const double cut = std::min(history.states.back().t + support_radius + margin, g.half_length());
  for (const auto& s : history.states) {
    const double decay = std::exp(-s.t);
    const Eigen::ArrayXd vr = s.v.values().real();
    const Eigen::ArrayXd vt = s.v_t.values().real();
    double F = 0.0, G = 0.0, H = 0.0, Fp = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (r[i] > cut) continue;
      const double w = phi.base()[i] * decay;
      F += w * (vt[i] + vr[i]);
      G += w * (vt[i] - vr[i]);
      H += w * vt[i];
      Fp += w * std::pow(std::abs(vt[i]), p);
    }
    out.t.push_back(s.t);
    out.F.push_back(F * dV);
    out.G.push_back(G * dV);
    out.H.push_back(H * dV);
    out.F_prime.push_back(Fp * dV);
  }
  const std::size_t m = out.t.size();
  out.envelope_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double scale = std::abs(out.F[i]) + std::abs(out.H[i]);
    if (scale > 0.0) out.identity_defect = std::max(out.identity_defect, std::abs(out.G[i] + out.F[i] - 2.0 * out.H[i]) / scale);
    if (out.G[i] <= 0.0) out.anomalies.push_back(out.t[i]);
    if (out.G[0] > 0.0) out.envelope_ratio = std::min(out.envelope_ratio, out.G[i] * std::exp(2.0 * out.t[i]) / out.G[0]);
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double dF = (out.F[i + 1] - out.F[i - 1]) / (out.t[i + 1] - out.t[i - 1]);
    if (out.F_prime[i] > 0.0) out.derivative_mismatch = std::max(out.derivative_mismatch, std::abs(dF - out.F_prime[i]) / out.F_prime[i]);
  }
  return out;
}

OdeReport ode_inequality_check(const FunctionalSeries& series, int n, double p, double R, double t_max,
                               const FunctionalSeries* refined) {
  require(n >= 1 && p > 1.0 && R > 0.0, ErrorCode::invalid_argument, "ode check needs n >= 1, p > 1, R > 0");
  auto inf_of = [&](const FunctionalSeries& s, std::vector<double>* c_out, double* holder) {
    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (s.t[i] > t_max) break;
      require(s.F[i] > 0.0, ErrorCode::precondition, "ode check needs F > 0 at t = " + std::to_string(s.t[i]));
      const double w = s.t[i] + R;
      const double c = s.F_prime[i] * std::pow(w, (n - 1) * (p - 1) / 2.0) / std::pow(s.F[i], p);
      inf = std::min(inf, c);
      if (c_out) c_out->push_back(c);
      if (holder && s.F_prime[i] > 0.0) {
        const double bound = std::pow(s.F_prime[i], 1.0 / p) * std::pow(w, (n - 1) * (1.0 - 1.0 / p) / 2.0);
        *holder = std::max(*holder, s.F[i] / bound);
      }
    }
    return inf;
  };
  OdeReport rep;
  rep.inf_c = inf_of(series, &rep.c_emp, &rep.holder_sup);
  require(!rep.c_emp.empty(), ErrorCode::precondition, "no samples below t_max");
  rep.passed = std::isfinite(rep.inf_c) && rep.inf_c > 0.0;
  if (refined) {
    const double other = inf_of(*refined, nullptr, nullptr);
    rep.refinement_change = std::abs(other - rep.inf_c) / std::max(std::abs(other), std::abs(rep.inf_c));
    rep.passed = rep.passed && *rep.refinement_change < 0.1;
  }
  return rep;
}

std::string to_string(LifespanBranch b) {
  return b == LifespanBranch::subcritical_power ? "subcritical_power" : "critical_exponential";
}

ScanRecord lifespan_run(const ScanConfig& cfg, double eps, double L, double dt) {
  const Grid grid(cfg.n, L, cfg.N);
  const double R = cfg.profile.radius;
  require(L > R, ErrorCode::invalid_argument, "box must contain the initial support");
  const Field u0 = cfg.profile.sample(grid, eps);
  SolveConfig sc(grid, Nonlinearity::glassey(cfg.p));
  sc.t_end = L - R;
  sc.dt = dt;
  sc.dealias = cfg.dealias;
  sc.support_radius = R;
  sc.monitors.mass = false;
  sc.monitors.energy = false;
  sc.monitor_every = std::max(1, sc.step_count());
  sc.blowup_threshold = cfg.threshold_factor * lebesgue_norm(u0, infinity);
  const Trajectory traj = solve(u0, sc);
  require(traj.termination != Termination::error, ErrorCode::numerical_failure, traj.message);
  ScanRecord rec;
  rec.epsilon = eps;
  rec.dt = sc.t_end / sc.step_count();
  rec.N = cfg.N;
  rec.L = L;
  rec.steps = sc.step_count();
  rec.censored = !traj.blowup_time.has_value();
  rec.t_star = traj.blowup_time.value_or(sc.t_end);
  return rec;
}

LifespanFit fit_lifespan(std::vector<ScanRecord> records, int n, double p) {
  const CriticalExponents ce = critical_exponents(n, p);
  require(ce.delta.has_value() || ce.exponential_lifespan, ErrorCode::precondition,
          "lifespan fits need p at or below the Glassey power");
  LifespanFit fit;
  fit.branch = ce.exponential_lifespan ? LifespanBranch::critical_exponential : LifespanBranch::subcritical_power;
  fit.predicted = ce.exponential_lifespan ? p - 1.0 : ce.lifespan_exponent.value_or(std::nan(""));
  std::vector<const ScanRecord*> usable;
  for (const auto& r : records) {
    if (r.censored || !r.validated) ++fit.censored;
    else usable.push_back(&r);
  }
  require(4 * fit.censored <= records.size(), ErrorCode::censored_fit,
          std::to_string(fit.censored) + " of " + std::to_string(records.size()) + " runs censored or unvalidated");
  require(usable.size() >= 2, ErrorCode::censored_fit, "fewer than two usable runs");
  const Eigen::Index m = Eigen::Index(usable.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double e = usable[i]->epsilon;
    A(i, 0) = fit.branch == LifespanBranch::subcritical_power ? std::log(1.0 / e) : std::pow(e, -(p - 1.0));
    A(i, 1) = 1.0;
    y[i] = std::log(usable[i]->t_star);
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
  fit.exponent = c[0];
  fit.intercept = c[1];
  const Eigen::VectorXd res = y - A * c;
  const double ss_res = res.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.residual = std::sqrt(ss_res / m);
  fit.records = std::move(records);
  return fit;
}

std::vector<ScanRecord> lifespan_records(const ScanConfig& cfg) {
  require(cfg.epsilons.size() >= 4, ErrorCode::invalid_argument, "lifespan scan needs at least four amplitudes");
  const auto [lo, hi] = std::minmax_element(cfg.epsilons.begin(), cfg.epsilons.end());
  require(*lo > 0.0, ErrorCode::invalid_argument, "amplitudes must be positive");
  require(*hi >= 4.0 * *lo, ErrorCode::invalid_argument, "amplitudes must span at least a factor of four");
  const CriticalExponents ce = critical_exponents(cfg.n, cfg.p);
  require(ce.delta.has_value() || ce.exponential_lifespan, ErrorCode::precondition,
          "lifespan scans need p at or below the Glassey power");
  const double R = cfg.profile.radius;

  std::vector<double> eps = cfg.epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<ScanRecord> records;
  double guess = cfg.pilot_L;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!records.empty() && !records.back().censored) {
      const ScanRecord& prev = records.back();
      const double growth = ce.lifespan_exponent ? std::pow(prev.epsilon / eps[i], *ce.lifespan_exponent)
                                                 : std::exp(std::pow(eps[i], 1.0 - cfg.p) - std::pow(prev.epsilon, 1.0 - cfg.p));
      guess = cfg.box_margin * (prev.t_star * std::min(growth, 1e3) + R);
    }
    ScanRecord pilot;
    double L = guess;
    for (int a = 0; a < cfg.pilot_attempts; ++a) {
      pilot = lifespan_run(cfg, eps[i], L, cfg.pilot_dt_factor * cfg.dt);
      if (!pilot.censored) break;
      L *= 2.0;
    }
    if (pilot.censored) {
      pilot.validated = false;
      records.push_back(pilot);
      continue;
    }
    L = cfg.box_margin * (pilot.t_star + R);
    ScanRecord rec = lifespan_run(cfg, eps[i], L, cfg.dt);
    for (int a = 1; rec.censored && a < cfg.pilot_attempts; ++a) {
      L *= 1.5;
      rec = lifespan_run(cfg, eps[i], L, cfg.dt);
    }
    const ScanRecord fine = lifespan_run(cfg, eps[i], L, 0.5 * cfg.dt);
    rec.t_star_refined = fine.t_star;
    rec.censored = rec.censored || fine.censored;
    rec.validated = !rec.censored && std::abs(rec.t_star - fine.t_star) <= cfg.validation_tolerance * fine.t_star;
    records.push_back(rec);
  }
  return records;
}

LifespanFit lifespan_scan(const ScanConfig& cfg) { return fit_lifespan(lifespan_records(cfg), cfg.n, cfg.p); }

}  // namespace hwlab
