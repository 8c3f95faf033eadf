#include "hwlab/error.hpp"
#include "hwlab/field_io.hpp"
#include "hwlab/parallel.hpp"
#include "hwlab/spectral.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace hwlab;
using hwlab::testing::random_band_limited;
using hwlab::testing::rel_diff;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid(2, 1.0, 7), Error);
  CHECK_THROWS_AS(Grid(2, 1.0, 6), Error);
  CHECK_THROWS_AS(Grid(4, 1.0, 8), Error);
  CHECK_THROWS_AS(Grid(1, -1.0, 8), Error);
  Grid g(2, pi, 16);
  CHECK(g.size() == 256);
  CHECK(g.dk() == doctest::Approx(1.0));
  CHECK(g.mode_index(8) == -8);
  CHECK(g.coordinate_1d(0) == doctest::Approx(-pi));
  Field f = random_band_limited(g, 3);
  CHECK(rel_diff(from_spectrum(g, to_spectrum(f)), f) < 1e-14);
}

TEST_CASE("field rejects non-finite samples") {
  Grid g(1, 1.0, 8);
  Eigen::ArrayXcd v = Eigen::ArrayXcd::Zero(8);
  v[3] = complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(Field(g, v), Error);
  v[3] = complex(0.0, INFINITY);
  CHECK_THROWS_AS(Field(g, v), Error);
  CHECK_THROWS_AS(Field(g, Eigen::ArrayXcd::Zero(7)), Error);
}

TEST_CASE("fractional derivative") {
  Grid g(2, pi, 32);
  SUBCASE("plane wave eigenfunction, |k| = 2, s = 1/2") {
    Field f = Field::plane_wave(g, {2, 0, 0});
    CHECK(rel_diff(fractional_derivative(f, 0.5), f * std::sqrt(2.0)) < 1e-13);
  }
  SUBCASE("s = 0 is the identity") {
    Field f = random_band_limited(g, 5);
    CHECK(rel_diff(fractional_derivative(f, 0.0), f) == 0.0);
  }
  SUBCASE("negative order rejected") {
    Field f = random_band_limited(g, 5);
    try {
      fractional_derivative(f, -0.5);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::unsupported_exponent);
    }
  }
  SUBCASE("||D f|| equals ||grad f||") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Field f = random_band_limited(g, seed);
      const double d1 = lebesgue_norm(fractional_derivative(f, 1.0), 2.0);
      double grad2 = 0.0;
      for (int j = 1; j <= 2; ++j) grad2 += std::pow(lebesgue_norm(partial_derivative(f, j), 2.0), 2);
      CHECK(std::abs(d1 - std::sqrt(grad2)) / d1 < 1e-12);
    }
  }
  SUBCASE("semigroup D^a D^b = D^(a+b)") {
    Field f = random_band_limited(g, 11);
    for (double a : {0.25, 0.5, 1.0}) {
      for (double b : {0.25, 0.5, 1.0}) {
        CHECK(rel_diff(fractional_derivative(fractional_derivative(f, a), b),
                       fractional_derivative(f, a + b)) < 1e-12);
      }
    }
  }
}

TEST_CASE("propagator") {
  Grid g(2, pi, 32);
  Field f = random_band_limited(g, 1);
  CHECK(rel_diff(propagate(f, 0.0), f) == 0.0);
  SUBCASE("single mode phase, |k| = 1, t = pi") {
    Field e = Field::plane_wave(g, {0, 1, 0});
    CHECK(rel_diff(propagate(e, pi), e * -1.0) < 1e-14);
  }
  SUBCASE("unitarity and group law over random samples") {
    Rng rng(99);
    for (int i = 0; i < 100; ++i) {
      Field u = random_band_limited(g, 1000 + i);
      const double a = rng.uniform(-20.0, 20.0);
      const double b = rng.uniform(-20.0, 20.0);
      const double n0 = lebesgue_norm(u, 2.0);
      CHECK(std::abs(lebesgue_norm(propagate(u, a), 2.0) / n0 - 1.0) < 1e-12);
      CHECK(rel_diff(propagate(propagate(u, a), b), propagate(u, a + b)) < 1e-12);
    }
  }
  SUBCASE("time tag advances") {
    Field u = f.with_time(1.5);
    CHECK(*propagate(u, 0.25).time() == doctest::Approx(1.75));
  }
}

TEST_CASE("Riesz transforms") {
  Grid g(2, pi, 32);
  SUBCASE("axis-aligned mode picks up i") {
    Field e = Field::plane_wave(g, {0, 3, 0});
    CHECK(rel_diff(riesz_transform(e, 2), e * complex(0, 1)) < 1e-13);
  }
  SUBCASE("constant field maps to zero") {
    Field c = Field::constant(g, 2.5);
    CHECK(riesz_transform(c, 1).values().abs().maxCoeff() < 1e-15);
  }
  SUBCASE("axis out of range") {
    Field c = Field::constant(g, 1.0);
    CHECK_THROWS_AS(riesz_transform(c, 0), Error);
    CHECK_THROWS_AS(riesz_transform(c, 3), Error);
  }
  SUBCASE("sum_j R_j d_j f = -D f") {
    Field f = random_band_limited(g, 4);
    Field sum = riesz_transform(partial_derivative(f, 1), 1) + riesz_transform(partial_derivative(f, 2), 2);
    CHECK(rel_diff(sum, fractional_derivative(f, 1.0) * -1.0) < 1e-12);
  }
  SUBCASE("commutes with the propagator") {
    Field f = random_band_limited(g, 8);
    CHECK(rel_diff(riesz_transform(propagate(f, 0.7), 1), propagate(riesz_transform(f, 1), 0.7)) < 1e-12);
  }
}

TEST_CASE("Lebesgue norms") {
  SUBCASE("unit constant on [-pi, pi)") {
    Grid g(1, pi, 64);
    CHECK(lebesgue_norm(Field::constant(g, 1.0), 2.0) == doctest::Approx(std::sqrt(2 * pi)).epsilon(1e-14));
  }
  SUBCASE("plane wave sup norm") {
    Grid g(2, pi, 16);
    CHECK(lebesgue_norm(Field::plane_wave(g, {1, 2, 0}), infinity) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("Parseval on a Gaussian") {
    Grid g(2, 8.0, 64);
    Field gauss = Field::sample(g, [](const Eigen::Vector3d& x) { return std::exp(-x.squaredNorm()); });
    CHECK(std::abs(lebesgue_norm(gauss, 2.0) / parseval_norm(gauss) - 1.0) < 1e-12);
  }
  SUBCASE("exponent below one rejected") {
    Grid g(1, 1.0, 8);
    CHECK_THROWS_AS(lebesgue_norm(Field::zeros(g), 0.5), Error);
  }
}

TEST_CASE("wrap guard") {
  Grid g(2, 10.0, 16);
  CHECK_NOTHROW(check_wrap_guard(g, 7.0, 3.0));
  CHECK_THROWS_AS(check_wrap_guard(g, 7.5, 3.0), Error);
}

TEST_CASE("field container round trip") {
  Grid g(3, 2.0, 8);
  Field f = random_band_limited(g, 21, 2).with_time(0.125);
  const auto path = std::filesystem::temp_directory_path() / "hwlab_field_roundtrip.bin";
  io::write_field(path, f);
  Field back = io::read_field(path);
  CHECK(back.grid() == g);
  CHECK(*back.time() == 0.125);
  CHECK((back.values() == f.values()).all());
  CHECK(std::filesystem::exists(path.string() + ".json"));
  CHECK(std::filesystem::file_size(path) == 36 + 16 * 512);
}

TEST_CASE("parallel_for is deterministic and propagates errors") {
  set_thread_count(3);
  std::vector<double> out(50);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = std::sqrt(double(i)); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == std::sqrt(double(i)));
  CHECK_THROWS(parallel_for(10, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
  set_thread_count(1);
}
