#include "hwlab/error.hpp"
#include "hwlab/estimates.hpp"
#include "hwlab/spectral.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hwlab;

namespace {

const double pi = std::numbers::pi;

Field gaussian(const Grid& g, double width, complex amp = 1.0) {
  return Field::sample(g, [=](const Eigen::Vector3d& x) { return amp * std::exp(-x.squaredNorm() / (width * width)); });
}

const WeightSpec unit_weight{1.0, 0.0, WeightForm::pure_power};

}  // namespace

TEST_CASE("weight specification") {
  CHECK(unit_weight.admissible(1));
  CHECK(unit_weight.value(3.7) == 1.0);
  const WeightSpec kss{0.5, 0.0, WeightForm::kss};
  CHECK(kss.decay_exponent() == 1.0);
  CHECK(kss.admissible(2));
  CHECK_FALSE(kss.admissible(1));
  CHECK(kss.value(2.0) == doctest::Approx(std::pow(2.0, -0.25) * std::pow(5.0, -0.125)));
  CHECK_FALSE(WeightSpec{-1.0, 0.0, WeightForm::pure_power}.admissible(2));
  CHECK(WeightSpec{0.5, 0.3, WeightForm::global}.admissible(2));
  Grid g(2, 4.0, 16);
  const Eigen::ArrayXd w = WeightSpec{0.5, 0.0, WeightForm::pure_power}.sample(g);
  const Eigen::Index origin = g.ravel({8, 8, 0});
  CHECK(w[origin] == doctest::Approx(std::pow(0.5 * g.spacing(), -0.25)));
  CHECK(weight_form_from_string("global") == WeightForm::global);
}

TEST_CASE("radial detection") {
  Grid g(2, 4.0, 32);
  CHECK(is_radial(gaussian(g, 1.0)));
  const Field shifted = Field::sample(g, [](const Eigen::Vector3d& x) { return complex(std::exp(-(x[0] - 0.3) * (x[0] - 0.3) - x[1] * x[1])); });
  CHECK_FALSE(is_radial(shifted));
}

TEST_CASE("Strichartz ratio of a plane wave") {
  Grid g(2, pi, 32);
  const Eigen::Vector3i m(2, 1, 0);
  const Field e = Field::plane_wave(g, m);
  for (double q : {5.0, 8.0}) {
    for (double T : {0.5, 2.0}) {
      const auto rep = strichartz_ratio(e, q, T);
      const double sigma = 1.0 - 1.0 / q;
      const double expected = std::pow(T, 1.0 / q) / (std::pow(std::sqrt(5.0), sigma) * 2 * pi);
      CHECK(rep.ratio == doctest::Approx(expected).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(strichartz_ratio(e, 3.0, 1.0), Error);
  CHECK_THROWS_AS(strichartz_ratio(e, infinity, 1.0), Error);
  CHECK_THROWS_AS(strichartz_ratio(Field::plane_wave(Grid(1, pi, 16), m), 5.0, 1.0), Error);
  StrichartzOptions few;
  few.time_samples = 32;
  CHECK_THROWS_AS(strichartz_ratio(e, 5.0, 1.0, few), Error);
  StrichartzOptions guarded;
  guarded.support_radius = 3.0;
  CHECK_THROWS_AS(strichartz_ratio(e, 5.0, 1.0, guarded), Error);
}

TEST_CASE("Strichartz ensemble is stable in T") {
  Grid g(2, 16.0, 128);
  Ensemble ens(g, EnsembleGenerator::radial, 12, 5);
  StrichartzOptions opt;
  opt.support_radius = 8.0;
  std::vector<double> short_run, long_run;
  for (int i = 0; i < ens.count; ++i) {
    const Field f = ens.member(i);
    CHECK(support_radius(f, 1e-12) <= 8.0);
    short_run.push_back(strichartz_ratio(f, 5.0, 4.0, opt).ratio);
    long_run.push_back(strichartz_ratio(f, 5.0, 8.0, opt).ratio);
  }
  const double a = summarize(short_run).sup;
  const double b = summarize(long_run).sup;
  CHECK(std::isfinite(a));
  CHECK(b >= a);
  CHECK(b < 1.1 * a);

  Grid g3(3, 8.0, 32);
  StrichartzOptions radial;
  radial.radial = true;
  radial.support_radius = 3.0;
  std::vector<double> r3;
  for (double width : {0.6, 0.8, 1.0}) r3.push_back(strichartz_ratio(gaussian(g3, width), 2.0, 4.0, radial).ratio);
  CHECK(std::isfinite(summarize(r3).sup));
  CHECK_THROWS_AS(strichartz_ratio(hwlab::testing::random_band_limited(g3, 1, 3), 2.0, 1.0, radial), Error);
}

TEST_CASE("local energy: unweighted case reduces to mass conservation") {
  Grid g(2, 8.0, 64);
  const Field u0 = gaussian(g, 1.0);
  const auto rep = local_energy_check(u0, nullptr, unit_weight, 2.0);
  CHECK(rep.ratio == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("local energy ratio is refinement stable") {
  const WeightSpec w{0.5, 0.0, WeightForm::pure_power};
  double coarse = 0.0;
  double fine = 0.0;
  for (int N : {64, 128}) {
    Grid g(2, 8.0, N);
    const auto rep = local_energy_check(gaussian(g, 0.7), nullptr, w, 1.0);
    CHECK(std::isfinite(rep.ratio));
    (N == 64 ? coarse : fine) = rep.ratio;
  }
  CHECK(refinement_drift(coarse, fine) < 0.2);

  for (const WeightSpec& ws : {WeightSpec{0.5, 0.0, WeightForm::kss}, WeightSpec{0.5, 0.3, WeightForm::global}}) {
    Grid g(2, 8.0, 64);
    CHECK(std::isfinite(local_energy_check(gaussian(g, 0.7), nullptr, ws, 1.0).ratio));
  }
  Grid g(2, 8.0, 32);
  CHECK_THROWS_AS(local_energy_check(gaussian(g, 0.7), nullptr, WeightSpec{-1.0, 0.0, WeightForm::pure_power}, 1.0), Error);
}

TEST_CASE("forced local energy") {
  Grid g(2, 8.0, 64);
  const WeightSpec w{0.5, 0.0, WeightForm::pure_power};
  std::vector<double> ratios;
  for (double amp : {0.5, 1.0, 2.0, 4.0}) {
    const Field bump = gaussian(g, 0.8, amp);
    Source G = [bump](double t) { return bump * std::exp(-(t - 0.5) * (t - 0.5) / 0.02); };
    LocalEnergyOptions opt;
    opt.support_radius = 3.0;
    const auto rep = local_energy_check(gaussian(g, 0.7), G, w, 1.0, opt);
    CHECK(rep.lhs > 0.0);
    CHECK(std::isfinite(rep.rhs));
    ratios.push_back(rep.ratio);
  }
  const double C = summarize(ratios).sup;
  for (double r : ratios) CHECK(r <= C);
  CHECK(C < 10.0);
}

TEST_CASE("Muckenhoupt characteristics") {
  for (int dim : {1, 2, 3}) CHECK(muckenhoupt_characteristic(unit_weight, dim, ApClass::A1, 64) == 1.0);
  const WeightSpec w{0.5, 0.3, WeightForm::global};
  double prev = 0.0;
  for (int res : {32, 64, 128, 256, 512}) {
    const double a1 = muckenhoupt_characteristic(w, 2, ApClass::A1, res);
    const double a2 = muckenhoupt_characteristic(w, 2, ApClass::A2, res);
    CHECK(a1 >= prev);
    CHECK(a2 <= a1);
    if (prev > 0.0) CHECK(a1 < 1.1 * prev);
    prev = a1;
  }
}

TEST_CASE("inadmissible weight characteristic diverges logarithmically") {
  // For w^2 = r^{-n} frozen below h/2, the ball B(0, L/2) alone gives 1 + n ln(L/h).
  const WeightSpec w{-1.0, 0.0, WeightForm::pure_power};
  std::vector<double> values;
  for (int res : {64, 128, 256, 512, 1024}) {
    const double v = muckenhoupt_characteristic(w, 2, ApClass::A1, res);
    CHECK(v >= (1.0 + 2.0 * std::log(res / 2.0)) * (1 - 1e-6));
    values.push_back(v);
  }
  for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] - values[i - 1] > 2.0 * std::log(2.0));
}

TEST_CASE("weighted Riesz ratio") {
  Grid g(2, pi, 32);
  const Field e = Field::plane_wave(g, Eigen::Vector3i(3, -2, 0));
  const WeightSpec kss{0.5, 0.0, WeightForm::kss};
  CHECK(weighted_riesz_ratio(e, kss) == doctest::Approx(std::sqrt(13.0) / 5.0).epsilon(1e-10));
  CHECK_THROWS_AS(weighted_riesz_ratio(Field::constant(g, 1.0) + e, kss), Error);

  Grid coarse(2, 8.0, 64);
  Grid fine(2, 8.0, 128);
  Ensemble ens(coarse, EnsembleGenerator::gaussian_bumps, 30, 3);
  std::vector<double> plain, wc, wf;
  for (int i = 0; i < ens.count; ++i) {
    const Field f = ens.member(i).without_mean();
    const double r = weighted_riesz_ratio(f, unit_weight);
    CHECK(r >= 1.0 / std::sqrt(2.0) - 1e-12);
    CHECK(r <= 1.0 + 1e-12);
    wc.push_back(weighted_riesz_ratio(f, kss));
    wf.push_back(weighted_riesz_ratio(ens.member(i, fine).without_mean(), kss));
  }
  CHECK(refinement_drift(summarize(wc).sup, summarize(wf).sup) < 0.2);
}

TEST_CASE("radial Sobolev ratios") {
  for (auto form : {RadialSobolevForm::trace, RadialSobolevForm::pointwise}) {
    double base = 0.0;
    for (double sigma : {1.0, 0.5, 0.25, 0.125}) {
      Grid g(2, 4.0, 256);
      Grid gf(2, 4.0, 512);
      const double r = radial_sobolev_ratio(gaussian(g, sigma), 0.75, form);
      const double rf = radial_sobolev_ratio(gaussian(gf, sigma), 0.75, form);
      CHECK(std::isfinite(r));
      CHECK(refinement_drift(r, rf) < 0.2);
      CHECK(radial_sobolev_ratio(gaussian(g, sigma, 17.0), 0.75, form) == doctest::Approx(r).epsilon(1e-12));
      if (base == 0.0) base = r;
      CHECK(r < 2.0 * base);
    }
  }
  Grid g(2, 4.0, 64);
  CHECK_THROWS_AS(radial_sobolev_ratio(gaussian(g, 1.0), 0.4, RadialSobolevForm::trace), Error);
  CHECK_THROWS_AS(radial_sobolev_ratio(gaussian(g, 1.0), 1.0, RadialSobolevForm::pointwise), Error);
  const Field shifted = Field::sample(g, [](const Eigen::Vector3d& x) { return complex(std::exp(-(x[0] - 0.3) * (x[0] - 0.3) - x[1] * x[1])); });
  CHECK_THROWS_AS(radial_sobolev_ratio(shifted, 0.75, RadialSobolevForm::trace), Error);
}

TEST_CASE("weighted chain rule") {
  Grid g(2, 8.0, 64);
  const auto F = Nonlinearity::power_gauge(2.0);
  Ensemble ens(g, EnsembleGenerator::gaussian_bumps, 30, 8);
  for (int i = 0; i < ens.count; ++i) {
    const Field f = ens.member(i);
    const double oracle = lebesgue_norm(evaluate(F, f), 2.0) / (lebesgue_norm(f, 2.0) * lebesgue_norm(f, infinity));
    const double r = weighted_chainrule_ratio(F, f, 0.0, unit_weight);
    CHECK(r == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(r <= 1.0 + 1e-12);
  }
  const WeightSpec w{0.5, 0.0, WeightForm::pure_power};
  Grid fine(2, 8.0, 128);
  std::vector<double> rc, rf;
  for (int i = 0; i < ens.count; ++i) {
    const Field f = ens.member(i);
    const double r = weighted_chainrule_ratio(F, f, 1.0, w);
    CHECK(weighted_chainrule_ratio(F, f * 3.5, 1.0, w) == doctest::Approx(r).epsilon(1e-12));
    rc.push_back(r);
    rf.push_back(weighted_chainrule_ratio(F, ens.member(i, fine), 1.0, w));
  }
  CHECK(std::isfinite(summarize(rc).sup));
  CHECK(refinement_drift(summarize(rc).sup, summarize(rf).sup) < 0.2);
  CHECK_THROWS_AS(weighted_chainrule_ratio(F, ens.member(0), 1.5, w), Error);
}
