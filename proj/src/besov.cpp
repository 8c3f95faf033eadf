#include "hwlab/besov.hpp"

#include "hwlab/error.hpp"
#include "hwlab/fft.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hwlab {

void BesovParams::validate() const {
  require(q >= 1.0, ErrorCode::invalid_exponent, "Besov integrability q must lie in [1, inf]");
  require(r >= 1.0, ErrorCode::invalid_exponent, "Besov summation r must lie in [1, inf]");
  require(std::isfinite(s), ErrorCode::invalid_exponent, "Besov smoothness must be finite");
}

bool BesovParams::complete_homogeneous_regime(int dim) const {
  const double critical = std::isinf(q) ? 0.0 : dim / q;
  return s < critical || (s == critical && r == 1.0);
}

double DyadicBump::profile(double rho) {
  if (rho <= 1.0) return 1.0;
  if (rho >= 2.0) return 0.0;
  const double a = std::exp(-1.0 / (2.0 - rho));
  const double b = std::exp(-1.0 / (rho - 1.0));
  return a / (a + b);
}

Eigen::ArrayXd DyadicBump::partial_sum_symbol(const Grid& grid, int j) {
  const double scale = std::ldexp(1.0, -j);
  return (grid.wavenumber_magnitude() * scale).unaryExpr([](double rho) { return profile(rho); });
}

Eigen::ArrayXd DyadicBump::annulus_symbol(const Grid& grid, int j) {
  return partial_sum_symbol(grid, j) - partial_sum_symbol(grid, j - 1);
}

std::pair<int, int> dyadic_band_range(const Grid& grid) {
  // P_j lives on 2^{j-1} < |k| < 2^{j+1}.
  const int j_min = static_cast<int>(std::floor(std::log2(grid.dk())));
  const int j_max = static_cast<int>(std::ceil(std::log2(grid.max_wavenumber())));
  return {j_min, j_max};
}

LpProjection lp_project(const Field& f, int j, ProjectionKind kind) {
  const Grid& g = f.grid();
  const auto [j_min, j_max] = dyadic_band_range(g);
  Eigen::ArrayXd sym;
  bool in_band = true;
  switch (kind) {
    case ProjectionKind::partial_sum:
      sym = DyadicBump::partial_sum_symbol(g, j);
      in_band = j >= j_min - 1 && j <= j_max;
      break;
    case ProjectionKind::homogeneous:
      in_band = j >= j_min && j <= j_max;
      sym = in_band ? DyadicBump::annulus_symbol(g, j) : Eigen::ArrayXd::Zero(g.size());
      break;
    case ProjectionKind::inhomogeneous:
      in_band = j >= 0 && j <= std::max(j_max, 0);
      if (!in_band) {
        sym = Eigen::ArrayXd::Zero(g.size());
      } else {
        sym = j == 0 ? DyadicBump::partial_sum_symbol(g, 0) : DyadicBump::annulus_symbol(g, j);
      }
      break;
  }
  if (kind == ProjectionKind::homogeneous) sym[0] = 0.0;
  Eigen::ArrayXcd spec = to_spectrum(f) * sym.cast<complex>();
  return {from_spectrum(g, spec), in_band};
}

namespace {

double lq_from_spectrum(const Grid& g, const Eigen::ArrayXcd& spec, double q) {
  if (q == 2.0) return parseval_norm(g, spec);
  return lebesgue_norm(from_spectrum(g, spec), q);
}

double lr_sum(const std::vector<double>& terms, double r) {
  double acc = 0.0;
  if (std::isinf(r)) {
    for (double t : terms) acc = std::max(acc, t);
    return acc;
  }
  for (double t : terms) acc += std::pow(t, r);
  return std::pow(acc, 1.0 / r);
}

}  // namespace

double besov_norm(const Field& f, const BesovParams& p) {
  p.validate();
  const Grid& g = f.grid();
  const auto [j_min, j_max] = dyadic_band_range(g);
  const Eigen::ArrayXcd spec = to_spectrum(f);
  std::vector<double> terms;
  const int j_lo = p.homogeneous ? j_min : 0;
  const int j_hi = std::max(j_max, j_lo);
  for (int j = j_lo; j <= j_hi; ++j) {
    Eigen::ArrayXd sym = (!p.homogeneous && j == 0) ? DyadicBump::partial_sum_symbol(g, 0)
                                                   : DyadicBump::annulus_symbol(g, j);
    if (p.homogeneous) sym[0] = 0.0;
    const Eigen::ArrayXcd band = spec * sym.cast<complex>();
    terms.push_back(std::pow(2.0, j * p.s) * lq_from_spectrum(g, band, p.q));
  }
  return lr_sum(terms, p.r);
}

double sobolev_norm(const Field& f, double s, bool homogeneous) {
  if (homogeneous) {
    require(s >= 0.0, ErrorCode::unsupported_exponent,
            "homogeneous Sobolev norms with s < 0 are not supported");
    if (s == 0.0) return lebesgue_norm(f, 2.0);
    return parseval_norm(f.grid(), to_spectrum(f) * Multiplier::fractional_derivative(f.grid(), s).symbol());
  }
  if (s == 0.0) return lebesgue_norm(f, 2.0);
  return parseval_norm(f.grid(), to_spectrum(f) * Multiplier::bessel_potential(f.grid(), s).symbol());
}

std::vector<Eigen::Vector3d> DifferenceScheme::directions(int dim) const {
  std::vector<Eigen::Vector3d> out;
  for (int d = 0; d < dim; ++d) {
    for (double sign : {1.0, -1.0}) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e[d] = sign;
      out.push_back(e);
    }
  }
  if (dim == 1) return out;  // the diagonals coincide with the axis in one dimension
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    for (int d = 0; d < dim; ++d) e[d] = (mask >> d) & 1 ? -1.0 : 1.0;
    out.push_back(e / std::sqrt(static_cast<double>(dim)));
  }
  return out;
}

std::vector<double> DifferenceScheme::radii(const Grid& grid) const {
  const double L = grid.half_length();
  const double top = t_max > 0.0 ? t_max : std::min(L / 4.0, L / (2.0 * order));
  const double bottom = t_min > 0.0 ? t_min : grid.spacing();
  std::vector<double> out;
  for (double t = top; t >= bottom * (1.0 - 1e-12); t *= 0.5) out.push_back(t);
  return out;
}

double difference_norm(const Field& f, const Eigen::Vector3d& y, int order, double q) {
  const Grid& g = f.grid();
  Eigen::ArrayXd phase = Eigen::ArrayXd::Zero(g.size());
  for (int d = 0; d < g.dim(); ++d) phase += y[d] * g.wavenumber(d);
  Eigen::ArrayXcd sym(g.size());
  for (Eigen::Index i = 0; i < sym.size(); ++i) sym[i] = std::pow(std::polar(1.0, phase[i]) - 1.0, order);
  return lq_from_spectrum(g, to_spectrum(f) * sym, q);
}

double difference_besov_norm(const Field& f, const BesovParams& p, const DifferenceScheme& scheme) {
  p.validate();
  require(scheme.order >= 1, ErrorCode::precondition, "difference order must be positive");
  require(p.s > 0.0 && p.s < scheme.order, ErrorCode::precondition,
          "difference characterisation needs 0 < s < m (s = " + std::to_string(p.s) +
              ", m = " + std::to_string(scheme.order) + ")");
  const Grid& g = f.grid();
  const Field u = p.homogeneous ? f.without_mean() : f;
  const Eigen::ArrayXcd spec = to_spectrum(u);
  const auto dirs = scheme.directions(g.dim());
  std::vector<Eigen::ArrayXd> phases;
  for (const auto& e : dirs) {
    Eigen::ArrayXd ph = Eigen::ArrayXd::Zero(g.size());
    for (int d = 0; d < g.dim(); ++d) ph += e[d] * g.wavenumber(d);
    phases.push_back(ph);
  }
  std::vector<double> terms;
  const double weight = std::log(2.0);
  for (double t : scheme.radii(g)) {
    double sup = 0.0;
    for (const auto& ph : phases) {
      for (double rho : {t, 0.5 * t}) {
        Eigen::ArrayXcd sym(g.size());
        for (Eigen::Index i = 0; i < sym.size(); ++i) {
          sym[i] = std::pow(std::polar(1.0, rho * ph[i]) - 1.0, scheme.order);
        }
        sup = std::max(sup, lq_from_spectrum(g, spec * sym, p.q));
      }
    }
    const double term = std::pow(t, -p.s) * sup;
    terms.push_back(std::isinf(p.r) ? term : term * std::pow(weight, 1.0 / p.r));
  }
  double value = lr_sum(terms, p.r);
  if (!p.homogeneous) value += lebesgue_norm(f, p.q);
  return value;
}

}  // namespace hwlab
