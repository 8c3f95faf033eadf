#include "hwlab/chainrule.hpp"

#include "hwlab/error.hpp"
#include "hwlab/fft.hpp"
#include "hwlab/random.hpp"
#include "hwlab/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace hwlab {

namespace {

constexpr int max_jet_order = 6;
using Series = std::array<complex, max_jet_order + 1>;
using RealSeries = std::array<double, max_jet_order + 1>;

// Taylor coefficients of f^alpha for a series with f[0] > 0.
RealSeries power_series(const RealSeries& f, double alpha, int order) {
  RealSeries g{};
  g[0] = std::pow(f[0], alpha);
  for (int n = 1; n <= order; ++n) {
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += ((alpha + 1.0) * k - n) * f[k] * g[n - k];
    g[n] = acc / (n * f[0]);
  }
  return g;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// Derivative of a homogeneous map of degree p at its zero: 0 below the degree, undefined above.
complex at_zero(double p, int order) {
  return order < p ? complex(0.0) : complex(std::nan(""), 0.0);
}

}  // namespace

std::string to_string(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::power_gauge: return "power_gauge";
    case NonlinearityKind::power_abs: return "power_abs";
    case NonlinearityKind::glassey: return "glassey";
    case NonlinearityKind::custom: return "custom";
  }
  return "custom";
}

NonlinearityKind nonlinearity_kind_from_string(const std::string& name) {
  for (auto k : {NonlinearityKind::power_gauge, NonlinearityKind::power_abs, NonlinearityKind::glassey,
                 NonlinearityKind::custom}) {
    if (to_string(k) == name) return k;
  }
  fail(ErrorCode::invalid_argument, "unknown nonlinearity kind '" + name + "'");
}

Nonlinearity Nonlinearity::power_gauge(double p, complex lambda, std::optional<int> k) {
  Nonlinearity F;
  F.kind = NonlinearityKind::power_gauge;
  F.p = p;
  F.lambda = lambda;
  F.k = k.value_or(static_cast<int>(std::ceil(p)) - 1);
  F.validate();
  return F;
}

Nonlinearity Nonlinearity::power_abs(double p, complex lambda, std::optional<int> k) {
  Nonlinearity F = power_gauge(p, lambda, k);
  F.kind = NonlinearityKind::power_abs;
  return F;
}

Nonlinearity Nonlinearity::glassey(double p, std::optional<int> k) {
  Nonlinearity F = power_gauge(p, 1.0, k);
  F.kind = NonlinearityKind::glassey;
  return F;
}

Nonlinearity Nonlinearity::make_custom(std::function<complex(complex)> fn, double p, int k, Jet jet) {
  Nonlinearity F;
  F.kind = NonlinearityKind::custom;
  F.p = p;
  F.k = k;
  F.custom = std::move(fn);
  F.custom_jet = std::move(jet);
  F.validate();
  return F;
}

void Nonlinearity::validate() const {
  require(p > 1.0 && std::isfinite(p), ErrorCode::invalid_exponent, "nonlinearity power must exceed 1");
  require(k >= 1 && k <= p, ErrorCode::invalid_argument, "smoothness index k must satisfy 1 <= k <= p");
  require(k < max_jet_order, ErrorCode::invalid_argument, "smoothness index too large");
  if (kind != NonlinearityKind::custom && p != std::floor(p)) {
    require(k == static_cast<int>(std::ceil(p)) - 1, ErrorCode::invalid_argument,
            "power nonlinearities with non-integer p use k = ceil(p) - 1");
  }
  if (kind == NonlinearityKind::custom) {
    require(static_cast<bool>(custom), ErrorCode::invalid_argument, "custom nonlinearity needs a callable");
  }
}

complex Nonlinearity::operator()(complex z) const {
  switch (kind) {
    case NonlinearityKind::power_gauge: {
      const double a = std::abs(z);
      return a == 0.0 ? complex(0.0) : lambda * std::pow(a, p - 1.0) * z;
    }
    case NonlinearityKind::power_abs: return lambda * std::pow(std::abs(z), p);
    case NonlinearityKind::glassey: return complex(0.0, std::pow(std::abs(z.real()), p));
    case NonlinearityKind::custom: return custom(z);
  }
  return 0.0;
}

complex Nonlinearity::directional_derivative(complex z, complex e, int order) const {
  require(order >= 0 && order <= max_jet_order, ErrorCode::invalid_argument, "derivative order out of range");
  if (order == 0) return (*this)(z);
  switch (kind) {
    case NonlinearityKind::power_gauge:
    case NonlinearityKind::power_abs: {
      // |z + t e|^2 = |z|^2 + 2 t Re(z conj e) + t^2 |e|^2
      RealSeries rho{};
      rho[0] = std::norm(z);
      rho[1] = 2.0 * (z * std::conj(e)).real();
      rho[2] = std::norm(e);
      if (rho[0] == 0.0) return at_zero(p, order);
      if (kind == NonlinearityKind::power_abs) {
        return lambda * factorial(order) * power_series(rho, 0.5 * p, order)[order];
      }
      const RealSeries m = power_series(rho, 0.5 * (p - 1.0), order);
      // coefficient of t^order in m(t) (z + t e)
      const complex c = m[order] * z + m[order - 1] * e;
      return lambda * factorial(order) * c;
    }
    case NonlinearityKind::glassey: {
      if (z.real() == 0.0) return at_zero(p, order);
      const double sign = z.real() > 0 ? 1.0 : -1.0;
      RealSeries f{};
      f[0] = std::abs(z.real());
      f[1] = sign * e.real();
      return complex(0.0, factorial(order) * power_series(f, p, order)[order]);
    }
    case NonlinearityKind::custom: {
      if (custom_jet) return custom_jet(z, e, order);
      const double h = fd_step > 0.0 ? fd_step : 1e-5 * std::max(1.0, std::abs(z));
      complex acc = 0.0;
      for (int i = 0; i <= order; ++i) {
        const double offset = 0.5 * order - i;
        acc += (i % 2 == 0 ? 1.0 : -1.0) * binomial(order, i) * custom(z + offset * h * e);
      }
      return acc / std::pow(h, order);
    }
  }
  return 0.0;
}

std::optional<double> Nonlinearity::size_constant() const {
  switch (kind) {
    case NonlinearityKind::power_gauge:
    case NonlinearityKind::power_abs: return std::abs(lambda);
    case NonlinearityKind::glassey: return 1.0;
    case NonlinearityKind::custom: return std::nullopt;
  }
  return std::nullopt;
}

Field evaluate(const Nonlinearity& F, const Field& f, bool dealias) {
  Eigen::ArrayXcd out = f.values().unaryExpr([&F](complex z) { return F(z); });
  Field result(f.grid(), std::move(out), f.time());
  if (dealias) return Multiplier::two_thirds_mask(f.grid()).apply(result);
  return result;
}

FkpReport check_property_Fkp(const Nonlinearity& F_in, std::size_t samples, double radius, std::uint64_t seed) {
  F_in.validate();
  Nonlinearity F = F_in;
  if (F.fd_step == 0.0) F.fd_step = 1e-5 * radius;
  require(samples >= 2, ErrorCode::invalid_argument, "need at least two samples");
  require(radius > 0.0, ErrorCode::invalid_argument, "sampling radius must be positive");
  const std::size_t total = 2 * samples;
  Rng rng(seed, 0xF4);
  auto in_disk = [&] {
    const double r = radius * std::sqrt(rng.uniform());
    return std::polar(r, 2.0 * std::numbers::pi * rng.uniform());
  };
  std::vector<std::pair<complex, complex>> pairs;
  pairs.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const complex z1 = in_disk();
    if (i % 2 == 0) {
      pairs.emplace_back(z1, in_disk());
    } else {
      const double delta = radius * std::pow(10.0, -4.0 * rng.uniform());
      pairs.emplace_back(z1, z1 + std::polar(delta, 2.0 * std::numbers::pi * rng.uniform()));
    }
  }

  constexpr int angles = 48;
  std::vector<complex> dirs;
  for (int a = 0; a < angles; ++a) dirs.push_back(std::polar(1.0, std::numbers::pi * a / angles));

  FkpReport report;
  for (const auto& [z1, z2] : pairs) {
    if (std::min(std::abs(z1.real()), std::abs(z2.real())) < 1e-3 * radius) ++report.near_axis_samples;
  }
  const bool finite_differences = F.kind == NonlinearityKind::custom && !F.custom_jet;
  for (int j = 0; j <= F.k; ++j) {
    FkpEntry entry;
    entry.j = j;
    double scale = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      const auto [z1, z2] = pairs[i];
      const double dz = std::abs(z1 - z2);
      const double mx = std::max(std::abs(z1), std::abs(z2));
      const bool holder_top = j == F.k && F.p < F.k + 1;
      const double rhs = holder_top ? std::pow(dz, F.p - j) : dz * std::pow(mx, F.p - j - 1.0);
      if (!(rhs > 0.0) || !std::isfinite(rhs)) continue;
      double lhs = 0.0;
      if (j == 0) {
        lhs = std::abs(F(z1) - F(z2));
        scale = std::max(scale, std::abs(F(z1)));
      } else {
        for (complex e : dirs) {
          const complex d1 = F.directional_derivative(z1, e, j);
          const complex d2 = F.directional_derivative(z2, e, j);
          lhs = std::max(lhs, std::abs(d1 - d2));
          scale = std::max(scale, std::abs(d1));
        }
      }
      const double ratio = lhs / rhs;
      if (!std::isfinite(ratio)) {
        entry.finite = false;
        continue;
      }
      entry.sup = std::max(entry.sup, ratio);
      if (i < samples) entry.sup_half = entry.sup;
    }
    const double floor = (finite_differences ? 1e-5 : 1e-12) * std::max(1.0, scale);
    entry.stable = entry.sup <= floor || std::abs(entry.sup - entry.sup_half) < 0.1 * entry.sup;
    report.passed = report.passed && entry.finite && entry.stable;
    report.entries.push_back(entry);
  }
  return report;
}

std::string to_string(EnsembleGenerator g) {
  switch (g) {
    case EnsembleGenerator::band_limited: return "band_limited";
    case EnsembleGenerator::gaussian_bumps: return "gaussian_bumps";
    case EnsembleGenerator::radial: return "radial";
  }
  return "band_limited";
}

EnsembleGenerator ensemble_generator_from_string(const std::string& name) {
  for (auto g : {EnsembleGenerator::band_limited, EnsembleGenerator::gaussian_bumps, EnsembleGenerator::radial}) {
    if (to_string(g) == name) return g;
  }
  fail(ErrorCode::invalid_argument, "unknown ensemble generator '" + name + "'");
}

Field Ensemble::member(int i, const Grid& on) const {
  require(i >= 0 && i < count, ErrorCode::index_out_of_range, "ensemble member index out of range");
  require(on.dim() == grid.dim() && on.half_length() == grid.half_length(), ErrorCode::invalid_argument,
          "ensemble members can only be resampled on the same box");
  Rng rng(seed, static_cast<std::uint64_t>(i));
  const int n = grid.dim();
  const double L = grid.half_length();

  if (generator == EnsembleGenerator::band_limited) {
    const int band = rng.integer(2, max_band);
    const double decay = rng.uniform(0.5, 2.0);
    require(band < on.points_per_axis() / 2, ErrorCode::precondition, "grid too coarse for ensemble band");
    Eigen::ArrayXcd spec = Eigen::ArrayXcd::Zero(on.size());
    double energy = 0.0;
    const int side = 2 * band + 1;
    const int cells = n == 1 ? side : (n == 2 ? side * side : side * side * side);
    for (int c = 0; c < cells; ++c) {
      std::array<int, 3> m{0, 0, 0};
      std::array<int, 3> slot{0, 0, 0};
      int rest = c;
      double mag2 = 0.0;
      int parity = 0;
      for (int d = n - 1; d >= 0; --d) {
        m[d] = rest % side - band;
        rest /= side;
        mag2 += m[d] * m[d];
        parity += m[d];
        slot[d] = (m[d] + on.points_per_axis()) % on.points_per_axis();
      }
      const complex coef = complex(rng.normal(), rng.normal()) / std::pow(1.0 + std::sqrt(mag2), decay);
      energy += std::norm(coef);
      // samples start at x = -L, which shifts mode m by the phase (-1)^m
      spec[on.ravel(slot)] = (parity % 2 == 0 ? 1.0 : -1.0) * coef;
    }
    spec *= static_cast<double>(on.size()) / std::sqrt(energy);
    return Field(on, fft::inverse(on, spec));
  }

  const double h = grid.spacing();
  const double w_lo = std::max(2.5 * h, L / 40.0);
  if (generator == EnsembleGenerator::gaussian_bumps) {
    struct Bump {
      Eigen::Vector3d centre;
      double width;
      complex amplitude;
    };
    std::vector<Bump> bumps(static_cast<std::size_t>(rng.integer(1, 4)));
    for (auto& b : bumps) {
      b.width = rng.uniform(w_lo, 2.5 * w_lo);
      const double reach = std::max(0.0, L / 2.0 - 8.0 * b.width);
      b.centre = Eigen::Vector3d::Zero();
      for (int d = 0; d < n; ++d) b.centre[d] = rng.uniform(-reach, reach);
      b.amplitude = complex(rng.normal(), rng.normal());
    }
    return Field::sample(on, [&bumps](const Eigen::Vector3d& x) {
      complex acc = 0.0;
      for (const auto& b : bumps) acc += b.amplitude * std::exp(-(x - b.centre).squaredNorm() / (2 * b.width * b.width));
      return acc;
    });
  }

  const double w = rng.uniform(w_lo, std::max(w_lo, L / 16.0));
  const double kappa = rng.uniform(0.0, 1.0 / w);
  const complex amplitude(rng.normal(), rng.normal());
  return Field::sample(on, [=](const Eigen::Vector3d& x) {
    const double r2 = x.squaredNorm();
    return amplitude * std::exp(-r2 / (2 * w * w)) * std::cos(kappa * std::sqrt(r2));
  });
}

std::vector<Field> Ensemble::members() const {
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(member(i));
  return out;
}

double chainrule_ratio(const Nonlinearity& F, const Field& f, const BesovParams& p, bool dealias) {
  F.validate();
  require(p.s > 0.0 && p.s < std::min<double>(F.k + 1, F.p), ErrorCode::precondition,
          "chain rule needs 0 < s < min(k + 1, p)");
  const double sup = lebesgue_norm(f, infinity);
  const double base = besov_norm(f, p);
  require(sup > 0.0 && base > 0.0, ErrorCode::degenerate_input, "chain rule ratio of a degenerate field");
  return besov_norm(evaluate(F, f, dealias), p) / (std::pow(sup, F.p - 1.0) * base);
}

double leibniz_ratio(const Field& f, const Field& g, double s) {
  require(f.grid() == g.grid(), ErrorCode::invalid_argument, "Leibniz ratio needs fields on one grid");
  require(s > 0.0 && s < 0.5 * f.grid().dim(), ErrorCode::precondition, "Leibniz rule needs 0 < s < n/2");
  const Field fg(f.grid(), f.values() * g.values());
  const double denom = lebesgue_norm(f, infinity) * sobolev_norm(g, s, true) +
                       sobolev_norm(f, s, true) * lebesgue_norm(g, infinity);
  require(denom > 0.0, ErrorCode::degenerate_input, "Leibniz ratio with vanishing denominator");
  return sobolev_norm(fg, s, true) / denom;
}

}  // namespace hwlab
