#include "hwlab/blowup.hpp"
#include "hwlab/error.hpp"
#include "hwlab/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hwlab;

namespace {

const double pi = std::numbers::pi;

SolveConfig glassey_config(const Grid& g, double p, double dt, double t_end) {
  SolveConfig c(g, Nonlinearity::glassey(p));
  c.dt = dt;
  c.t_end = t_end;
  c.support_radius = 1.0;
  c.monitors.energy = false;
  return c;
}

ScanRecord record(double eps, double t_star, bool censored = false) {
  ScanRecord r;
  r.epsilon = eps;
  r.t_star = t_star;
  r.t_star_refined = t_star;
  r.censored = censored;
  r.validated = !censored;
  return r;
}

}  // namespace

TEST_CASE("bump profile") {
  const BumpProfile b{2.5, 1.5};
  CHECK(b(0.0) == doctest::Approx(2.5));
  CHECK(b(1.5) == 0.0);
  CHECK(b(0.75) > 0.0);
  const Field f = b.sample(Grid(2, 4.0, 32), 0.2);
  CHECK(f.values().real().maxCoeff() == doctest::Approx(0.5));
  CHECK(support_radius(f) < 1.5);
  CHECK_THROWS_AS(BumpProfile({1.0, 0.0}).sample(Grid(1, 4.0, 16)), Error);
}

TEST_CASE("free reduction reproduces sin(|k| t)/|k|") {
  const Grid g(2, 6.0, 32);
  const Field u0 = BumpProfile{1.0, 1.5}.sample(g);
  const double dt = 0.01;
  ReductionIntegrator integ(g, dt);
  for (int n = 0; n <= 100; ++n) integ.push(to_spectrum(propagate(u0, n * dt)));
  CHECK(integ.time() == doctest::Approx(1.0));
  const Eigen::ArrayXd k = g.wavenumber_magnitude();
  const Eigen::ArrayXcd c0 = to_spectrum(u0);
  Eigen::ArrayXcd exact(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) exact[i] = c0[i] * (k[i] > 0.0 ? std::sin(k[i]) / k[i] : 1.0);
  const double err = (integ.v_spectrum() - exact).matrix().norm() / exact.matrix().norm();
  CHECK(err < 1e-8);
  const ReductionState s = integ.state();
  CHECK(s.residual_dispersion < 1e-12);
}

TEST_CASE("linear control run") {
  const Grid g(2, 8.0, 64);
  const Field u0 = BumpProfile{1.0, 1.0}.sample(g, 0.5);
  SolveConfig c(g, Nonlinearity::make_custom([](complex) { return complex(0.0); }, 2.0, 1));
  c.dt = 0.01;
  c.t_end = 2.0;
  c.support_radius = 1.0;
  c.monitors.energy = false;
  const ReductionHistory h = run_reduction(u0, c, 10);
  CHECK(h.states.front().v.values().abs().maxCoeff() == 0.0);
  CHECK((h.states.front().v_t.values() - u0.values()).abs().maxCoeff() <= 1e-15);
  const Eigen::ArrayXd k = g.wavenumber_magnitude();
  const Eigen::ArrayXcd c0 = to_spectrum(u0);
  Eigen::ArrayXcd exact(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) exact[i] = c0[i] * (k[i] > 0.0 ? std::sin(2.0 * k[i]) / k[i] : 2.0);
  const Eigen::ArrayXcd got = to_spectrum(h.states.back().v);
  CHECK((got - exact).matrix().norm() <= 1e-8 * exact.matrix().norm());
  const FunctionalSeries fs = blowup_functionals(h, TestFunction(g), 2.0, 1.0);
  const OdeReport rep = ode_inequality_check(fs, 2, 2.0, 1.0);
  CHECK(std::isfinite(rep.inf_c));
  CHECK(rep.inf_c > 0.0);
}

TEST_CASE("reduction residuals are second order in dt") {
  const Grid g(2, 8.0, 64);
  const Field u0 = BumpProfile{2.5, 1.0}.sample(g, 0.4);
  std::vector<double> res;
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    const ReductionHistory h = run_reduction(u0, glassey_config(g, 2.0, dt, 0.5), int(std::lround(0.05 / dt)));
    REQUIRE(h.states.size() == 11);
    for (const auto& s : h.states) CHECK(s.residual_velocity == doctest::Approx(s.residual_dispersion).epsilon(1e-6));
    res.push_back(h.max_residual);
  }
  CHECK(res[1] < 1e-4);
  CHECK(std::log2(res[0] / res[1]) >= 1.7);
  CHECK(std::log2(res[1] / res[2]) >= 1.7);
}

TEST_CASE("snapshot reduction matches the in-line integration") {
  const Grid g(1, 8.0, 128);
  const Field u0 = BumpProfile{2.0, 1.0}.sample(g, 0.5);
  SolveConfig c = glassey_config(g, 2.0, 0.01, 1.0);
  c.field_every = 1;
  const ReductionHistory a = run_reduction(u0, c, 1);
  const ReductionHistory b = reduce_to_wave(solve(u0, c));
  REQUIRE(a.states.size() == b.states.size());
  const auto& va = a.states.back().v.values();
  const auto& vb = b.states.back().v.values();
  CHECK((va - vb).matrix().norm() <= 1e-13 * vb.matrix().norm());
  CHECK(!a.wave_residual.empty());

  SolveConfig uneven = c;
  uneven.field_every = 30;
  const Trajectory sparse = solve(u0, uneven);
  CHECK_THROWS_AS(reduce_to_wave(sparse), Error);
  SolveConfig wrong(g, Nonlinearity::power_gauge(2.0));
  CHECK_THROWS_AS(run_reduction(u0, wrong), Error);
}

TEST_CASE("sphere quadrature against closed forms") {
  for (double r : {0.5, 3.0, 12.0}) {
    const Eigen::Vector3d x(r, 0.0, 0.0);
    CHECK(TestFunction::evaluate(1, x, 1) == doctest::Approx(2.0 * std::cosh(r)).epsilon(1e-14));
    CHECK(TestFunction::evaluate(2, x, 64) == doctest::Approx(2.0 * pi * std::cyl_bessel_i(0.0, r)).epsilon(1e-12));
    CHECK(TestFunction::evaluate(3, x, 48) == doctest::Approx(4.0 * pi * std::sinh(r) / r).epsilon(1e-12));
    const Eigen::Vector3d y(r / std::sqrt(3.0), r / std::sqrt(3.0), r / std::sqrt(3.0));
    CHECK(TestFunction::evaluate(3, y, 48) == doctest::Approx(4.0 * pi * std::sinh(r) / r).epsilon(1e-12));
  }
  for (int dim : {2, 3}) {
    const TestFunction phi(Grid(dim, 6.0, 16));
    const double r = 6.0 * std::sqrt(double(dim));
    const double a = TestFunction::evaluate(dim, {r, 0.0, 0.0}, phi.order());
    const double b = TestFunction::evaluate(dim, {r, 0.0, 0.0}, 2 * phi.order());
    CHECK(std::abs(a - b) <= 1e-8 * b);
  }
  CHECK_THROWS_AS(TestFunction(Grid(2, 600.0, 16)), Error);
}

TEST_CASE("test function properties") {
  const Grid g(2, 8.0, 128);
  const TestFunction phi(g);
  CHECK((phi.base() > 0.0).all());
  const Field p0 = phi.at(0.0);
  const Field p1 = phi.at(1.7);
  CHECK((p1.values() - std::exp(-1.7) * p0.values()).abs().maxCoeff() <= 1e-14 * p1.values().abs().maxCoeff());
  CHECK(eigenrelation_residual(phi) <= 1e-6);

  for (int dim : {2, 3}) {
    for (double r : {5.0, 10.0, 20.0}) {
      const double v = TestFunction::evaluate(dim, {r, 0.0, 0.0}, 128);
      const double envelope = std::pow(2.0 * pi, 0.5 * (dim - 1)) * std::pow(r, -0.5 * (dim - 1)) * std::exp(r);
      CHECK(v / envelope > 0.9);
      CHECK(v / envelope < 1.15);
    }
  }
}

TEST_CASE("functionals satisfy the algebraic identities") {
  std::vector<double> mismatch;
  for (int N : {64, 128}) {
    const Grid g(2, 8.0, N);
    const Field u0 = BumpProfile{2.5, 2.0}.sample(g, 0.4);
    SolveConfig c = glassey_config(g, 2.0, 0.01, 2.0);
    c.support_radius = 2.0;
    const ReductionHistory h = run_reduction(u0, c, 1);
    const FunctionalSeries fs = blowup_functionals(h, TestFunction(g), 2.0, 2.0);
    CHECK(fs.identity_defect <= 1e-12);
    CHECK(fs.anomalies.empty());
    CHECK(fs.envelope_ratio >= 1.0 - 1e-6);
    CHECK(fs.F.front() > 0.0);
    mismatch.push_back(fs.derivative_mismatch);
  }
  // dF/dt against the direct quadrature of F' is limited by the spatial resolution of v.
  CHECK(mismatch[1] < 1e-3);
  CHECK(mismatch[0] > 3.0 * mismatch[1]);
}

TEST_CASE("ode inequality up to blow-up") {
  const Grid g(2, 8.0, 128);
  const Field u0 = BumpProfile{2.5, 1.0}.sample(g, 0.51);
  const TestFunction phi(g);
  std::vector<FunctionalSeries> series;
  double t_star = 0.0;
  for (double dt : {0.01, 0.005}) {
    const ReductionHistory h = run_reduction(u0, glassey_config(g, 2.0, dt, 7.0), int(std::lround(0.05 / dt)));
    REQUIRE(h.trajectory.termination == Termination::blowup_detected);
    t_star = *h.trajectory.blowup_time;
    series.push_back(blowup_functionals(h, phi, 2.0, 1.0));
    CHECK(series.back().anomalies.empty());
    CHECK(series.back().envelope_ratio >= 1.0 - 1e-6);
  }
  CHECK(t_star > 5.0);
  CHECK(t_star < 8.0);
  const OdeReport rep = ode_inequality_check(series[0], 2, 2.0, 1.0, 0.9 * t_star, &series[1]);
  CHECK(rep.passed);
  CHECK(rep.inf_c > 0.0);
  CHECK(*rep.refinement_change < 0.1);
  CHECK(std::isfinite(rep.holder_sup));

  FunctionalSeries bad = series[0];
  bad.F[0] = -1.0;
  CHECK_THROWS_AS(ode_inequality_check(bad, 2, 2.0, 1.0), Error);
}

TEST_CASE("lifespan fit on synthetic records") {
  std::vector<ScanRecord> recs;
  for (double e : {0.4, 0.28, 0.2, 0.14, 0.1}) recs.push_back(record(e, 3.0 * std::pow(e, -2.0)));
  LifespanFit fit = fit_lifespan(recs, 2, 2.0);
  CHECK(fit.branch == LifespanBranch::subcritical_power);
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.predicted == doctest::Approx(2.0));

  recs[0].censored = true;
  CHECK_NOTHROW(fit_lifespan(recs, 2, 2.0));
  recs[1].validated = false;
  try {
    fit_lifespan(recs, 2, 2.0);
    FAIL("expected a censored fit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::censored_fit);
  }

  std::vector<ScanRecord> crit;
  for (double e : {0.8, 0.6, 0.5, 0.4}) crit.push_back(record(e, 2.0 * std::exp(0.7 / (e * e))));
  fit = fit_lifespan(crit, 2, 3.0);
  CHECK(fit.branch == LifespanBranch::critical_exponential);
  CHECK(fit.exponent == doctest::Approx(0.7).epsilon(1e-10));

  ScanConfig cfg;
  cfg.epsilons = {0.4, 0.3, 0.2};
  CHECK_THROWS_AS(lifespan_scan(cfg), Error);
  cfg.epsilons = {0.4, 0.3, 0.2, 0.15};
  CHECK_THROWS_AS(lifespan_scan(cfg), Error);
  cfg.epsilons = {0.4, 0.28, 0.2, 0.1};
  cfg.p = 4.0;
  CHECK_THROWS_AS(lifespan_scan(cfg), Error);
}

TEST_CASE("lifespan runs and one-dimensional scan") {
  ScanConfig cfg;
  cfg.n = 1;
  cfg.p = 2.0;
  cfg.N = 1024;
  cfg.dt = 0.02;
  cfg.profile = BumpProfile{1.0, 1.0};
  cfg.epsilons = {0.4, 0.28, 0.2, 0.14, 0.1};
  const ScanRecord short_box = lifespan_run(cfg, 0.1, 3.0, cfg.dt);
  CHECK(short_box.censored);
  CHECK(short_box.t_star == doctest::Approx(2.0));
  const LifespanFit fit = lifespan_scan(cfg);
  CHECK(fit.censored == 0);
  CHECK(fit.predicted == doctest::Approx(1.0));
  CHECK(std::abs(fit.exponent - fit.predicted) < 0.3);
  CHECK(fit.r_squared > 0.99);
  for (const auto& r : fit.records) CHECK(r.validated);
  for (std::size_t i = 1; i < fit.records.size(); ++i) CHECK(fit.records[i].t_star >= fit.records[i - 1].t_star);
}
