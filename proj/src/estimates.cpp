#include "hwlab/estimates.hpp"

#include "hwlab/error.hpp"
#include "hwlab/fft.hpp"
#include "hwlab/quadrature.hpp"
#include "hwlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace hwlab {

std::string to_string(WeightForm f) {
  switch (f) {
    case WeightForm::pure_power: return "pure_power";
    case WeightForm::kss: return "kss";
    case WeightForm::global: return "global";
  }
  return "pure_power";
}

WeightForm weight_form_from_string(const std::string& name) {
  for (auto f : {WeightForm::pure_power, WeightForm::kss, WeightForm::global}) {
    if (to_string(f) == name) return f;
  }
  fail(ErrorCode::invalid_argument, "unknown weight form '" + name + "'");
}

double WeightSpec::decay_exponent() const {
  switch (form) {
    case WeightForm::pure_power: return origin_exponent();
    case WeightForm::kss: return origin_exponent() + delta;
    case WeightForm::global: return origin_exponent() + delta_prime;
  }
  return origin_exponent();
}

bool WeightSpec::admissible(int dim) const {
  const double a = origin_exponent();
  const double b = decay_exponent();
  return 0.0 <= a && a <= b && b < dim;
}

double WeightSpec::value(double r) const {
  const double base = std::pow(r, -0.5 * origin_exponent());
  const double bracket = std::sqrt(1.0 + r * r);
  switch (form) {
    case WeightForm::pure_power: return base;
    case WeightForm::kss: return base * std::pow(bracket, -0.5 * delta);
    case WeightForm::global: return base * std::pow(bracket, -0.5 * delta_prime);
  }
  return base;
}

Eigen::ArrayXd WeightSpec::sample(const Grid& grid) const {
  const double floor = 0.5 * grid.spacing();
  return grid.radius().unaryExpr([&](double r) { return value(std::max(r, floor)); });
}

EnsembleStatistics summarize(const std::vector<double>& ratios) {
  EnsembleStatistics s;
  s.count = ratios.size();
  for (double r : ratios) {
    s.sup = std::max(s.sup, r);
    s.mean += r;
  }
  if (!ratios.empty()) s.mean /= static_cast<double>(ratios.size());
  return s;
}

double refinement_drift(double coarse, double fine) { return std::abs(fine - coarse) / coarse; }

bool is_radial(const Field& f, double rel_tol) {
  const Grid& g = f.grid();
  const int half = g.points_per_axis() / 2;
  std::unordered_map<long, complex> reference;
  const double tol = rel_tol * std::max(lebesgue_norm(f, infinity), 1e-300);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto idx = g.unravel(i);
    long key = 0;
    for (int d = 0; d < g.dim(); ++d) key += static_cast<long>(idx[d] - half) * (idx[d] - half);
    auto [it, inserted] = reference.try_emplace(key, f.values()[i]);
    if (!inserted && std::abs(it->second - f.values()[i]) > tol) return false;
  }
  return true;
}

EstimateReport strichartz_ratio(const Field& f, double q, double T, const StrichartzOptions& opt) {
  const Grid& g = f.grid();
  const int n = g.dim();
  require(T > 0.0, ErrorCode::invalid_argument, "time horizon must be positive");
  require(opt.time_samples >= 64, ErrorCode::invalid_argument, "Strichartz quadrature needs at least 64 samples");
  require(std::isfinite(q), ErrorCode::unsupported_exponent, "q = infinity is excluded");
  bool supported = false;
  if (n == 2) supported = q > 4.0 || (opt.radial && q > 2.0);
  if (n >= 3) supported = q > 2.0 || (opt.radial && q == 2.0 && n == 3);
  require(supported, ErrorCode::unsupported_exponent,
          "Strichartz exponent q = " + std::to_string(q) + " is not supported in dimension " + std::to_string(n));
  if (opt.radial) require(is_radial(f), ErrorCode::precondition, "data declared radial is not radial");
  if (opt.support_radius) check_wrap_guard(g, T, *opt.support_radius);

  const double sigma = 0.5 * n - 1.0 / q;
  const Eigen::ArrayXcd spec = to_spectrum(f);
  const Eigen::ArrayXd k = g.wavenumber_magnitude();
  const int S = opt.time_samples;
  const double dt = T / (S - 1);
  double integral = 0.0;
  for (int i = 0; i < S; ++i) {
    const double t = i * dt;
    Eigen::ArrayXcd s(g.size());
    for (Eigen::Index j = 0; j < s.size(); ++j) s[j] = spec[j] * std::polar(1.0, -t * k[j]);
    const double sup = fft::inverse(g, s).abs().maxCoeff();
    integral += (i == 0 || i == S - 1 ? 0.5 : 1.0) * dt * std::pow(sup, q);
  }
  EstimateReport rep;
  rep.lhs = std::pow(integral, 1.0 / q);
  rep.rhs = sobolev_norm(f, sigma, true);
  require(rep.rhs > 0.0, ErrorCode::degenerate_input, "data has vanishing homogeneous Sobolev norm");
  rep.ratio = rep.lhs / rep.rhs;
  rep.parameters = {{"q", q}, {"T", T}, {"sigma", sigma}, {"n", n}};
  return rep;
}

EstimateReport local_energy_check(const Field& u0, const Source& G, const WeightSpec& w, double T,
                                  const LocalEnergyOptions& opt) {
  const Grid& g = u0.grid();
  require(w.admissible(g.dim()), ErrorCode::precondition, "weight is outside the admissible range");
  require(T > 0.0 && opt.steps >= 2, ErrorCode::invalid_argument, "need T > 0 and at least two steps");
  if (opt.enforce_wrap_guard) {
    check_wrap_guard(g, T, opt.support_radius ? *opt.support_radius : support_radius(u0, 1e-12));
  }
  const Eigen::ArrayXd weight = w.sample(g);
  const Eigen::ArrayXd inverse_weight = weight.inverse();
  const Eigen::ArrayXcd half = Multiplier::propagator(g, 0.5 * T / opt.steps).symbol();
  const double dt = T / opt.steps;
  const double cell = g.cell_volume();

  auto weighted_sq = [&](const Eigen::ArrayXcd& v, const Eigen::ArrayXd& wt) { return (wt * v.abs()).square().sum() * cell; };

  Eigen::ArrayXcd spec = to_spectrum(u0);
  double sup_mass = parseval_norm(g, spec);
  double lhs_sq = 0.0;
  double rhs_sq = 0.0;
  double prev_lhs = weighted_sq(u0.values(), weight);
  double prev_rhs = G ? weighted_sq(G(0.0).values(), inverse_weight) : 0.0;
  for (int n = 1; n <= opt.steps; ++n) {
    const double t_mid = (n - 0.5) * dt;
    spec *= half;
    if (G) spec -= complex(0.0, dt) * to_spectrum(G(t_mid));
    spec *= half;
    sup_mass = std::max(sup_mass, parseval_norm(g, spec));
    const double cur_lhs = weighted_sq(fft::inverse(g, spec), weight);
    lhs_sq += 0.5 * dt * (prev_lhs + cur_lhs);
    prev_lhs = cur_lhs;
    if (G) {
      const double cur_rhs = weighted_sq(G(n * dt).values(), inverse_weight);
      rhs_sq += 0.5 * dt * (prev_rhs + cur_rhs);
      prev_rhs = cur_rhs;
    }
  }

  double lhs_factor = 1.0;
  double rhs_factor = 1.0;
  if (w.form == WeightForm::pure_power) {
    lhs_factor = std::pow(T, -0.5 * w.delta);
    rhs_factor = std::pow(T, 0.5 * w.delta);
  } else if (w.form == WeightForm::kss) {
    lhs_factor = 1.0 / std::sqrt(std::log(2.0 + T));
    rhs_factor = std::sqrt(std::log(2.0 + T));
  }
  EstimateReport rep;
  rep.lhs = sup_mass + lhs_factor * std::sqrt(lhs_sq);
  rep.rhs = lebesgue_norm(u0, 2.0) + rhs_factor * std::sqrt(rhs_sq);
  require(rep.rhs > 0.0, ErrorCode::degenerate_input, "local energy bound with vanishing right side");
  rep.ratio = rep.lhs / rep.rhs;
  rep.parameters = {{"T", T}, {"delta", w.delta}, {"delta_prime", w.delta_prime}, {"n", g.dim()}};
  return rep;
}

namespace {

// Measure of the sphere |x| = r inside the ball B(c e_1, rho).
double sphere_in_ball(int dim, double r, double c, double rho) {
  if (r + c <= rho) {
    if (dim == 1) return r == 0.0 ? 1.0 : 2.0;
    return dim == 2 ? 2.0 * std::numbers::pi * r : 4.0 * std::numbers::pi * r * r;
  }
  if (r > c + rho || r < c - rho) return 0.0;
  if (dim == 1) return 1.0;
  const double cos_theta = std::clamp((r * r + c * c - rho * rho) / (2.0 * r * c), -1.0, 1.0);
  if (dim == 2) return 2.0 * r * std::acos(cos_theta);
  return 2.0 * std::numbers::pi * r * r * (1.0 - cos_theta);
}

struct BallAverages {
  double w2 = 0.0;
  double inv_w2 = 0.0;
  double sup_inv_w2 = 0.0;
};

BallAverages ball_averages(const WeightSpec& w, int dim, double c, double rho, double clamp) {
  const double r_lo = std::max(0.0, c - rho);
  const double r_hi = c + rho;
  std::vector<double> cuts{r_lo, r_hi};
  if (std::abs(rho - c) > r_lo && std::abs(rho - c) < r_hi) cuts.push_back(std::abs(rho - c));
  if (clamp > r_lo && clamp < r_hi) cuts.push_back(clamp);
  std::sort(cuts.begin(), cuts.end());

  auto w2 = [&](double r) { return w.squared(std::max(r, clamp)); };
  BallAverages out;
  double volume = 0.0;
  out.sup_inv_w2 = std::max(1.0 / w2(r_lo), 1.0 / w2(r_hi));
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (b <= a) continue;
    const bool logarithmic = a > 0.0;
    const QuadratureRule rule = logarithmic ? gauss_legendre(48, std::log(a), std::log(b)) : gauss_legendre(48, a, b);
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double r = logarithmic ? std::exp(rule.nodes[j]) : rule.nodes[j];
      const double dr = logarithmic ? r * rule.weights[j] : rule.weights[j];
      const double m = sphere_in_ball(dim, r, c, rho) * dr;
      const double v = w2(r);
      volume += m;
      out.w2 += v * m;
      out.inv_w2 += m / v;
      if (m > 0.0) out.sup_inv_w2 = std::max(out.sup_inv_w2, 1.0 / v);
    }
  }
  out.w2 /= volume;
  out.inv_w2 /= volume;
  return out;
}

}  // namespace

double muckenhoupt_characteristic(const WeightSpec& w, int dim, ApClass cls, int resolution, double half_length) {
  require(dim >= 1 && dim <= 3, ErrorCode::invalid_argument, "dimension must be 1, 2 or 3");
  require(resolution >= 8, ErrorCode::invalid_argument, "resolution must be at least 8");
  const double L = half_length;
  double sup = 0.0;
  for (int level = resolution; level >= 8; level /= 2) {
    const double h = 2.0 * L / level;
    for (int i = 0; i < 32; ++i) {
      const double c = 0.5 * L * i / 31.0;
      for (double rho = 0.5 * L; rho >= h * (1.0 - 1e-12); rho *= 0.5) {
        const BallAverages avg = ball_averages(w, dim, c, rho, 0.5 * h);
        const double value = cls == ApClass::A1 ? avg.w2 * avg.sup_inv_w2 : avg.w2 * avg.inv_w2;
        sup = std::max(sup, value);
      }
    }
  }
  return sup;
}

double weighted_riesz_ratio(const Field& f, const WeightSpec& w) {
  const Grid& g = f.grid();
  require(std::abs(f.mean()) <= 1e-12 * std::max(lebesgue_norm(f, infinity), 1e-300), ErrorCode::precondition,
          "weighted Riesz ratio expects mean-free data");
  const Eigen::ArrayXd weight = w.sample(g);
  auto weighted = [&](const Field& h) { return std::sqrt((weight * h.values().abs()).square().sum() * g.cell_volume()); };
  double denom = 0.0;
  for (int j = 1; j <= g.dim(); ++j) denom += weighted(partial_derivative(f, j));
  require(denom > 0.0, ErrorCode::degenerate_input, "weighted Riesz ratio with vanishing gradient");
  return weighted(fractional_derivative(f, 1.0)) / denom;
}

double radial_sobolev_ratio(const Field& f, double s, RadialSobolevForm form) {
  const Grid& g = f.grid();
  const int n = g.dim();
  require(is_radial(f), ErrorCode::precondition, "radial Sobolev ratio needs radial data");
  double power = 0.0;
  double rhs = 0.0;
  if (form == RadialSobolevForm::trace) {
    require(s > 0.5 && s < 1.0, ErrorCode::invalid_exponent, "trace form needs s in (1/2, 1)");
    power = 0.5 * (n - 1);
    rhs = std::sqrt(sobolev_norm(f, s, true) * sobolev_norm(f, 1.0 - s, true));
  } else {
    require(s > 0.5 && s < 0.5 * n, ErrorCode::invalid_exponent, "pointwise form needs s in (1/2, n/2)");
    power = 0.5 * n - s;
    rhs = sobolev_norm(f, s, true);
  }
  require(rhs > 0.0, ErrorCode::degenerate_input, "radial Sobolev ratio with vanishing right side");
  const Eigen::ArrayXd r = g.radius();
  double lhs = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (r[i] > 0.0) lhs = std::max(lhs, std::pow(r[i], power) * std::abs(f.values()[i]));
  }
  return lhs / rhs;
}

double weighted_chainrule_ratio(const Nonlinearity& F, const Field& f, double s, const WeightSpec& w) {
  const Grid& g = f.grid();
  require(s >= 0.0 && s <= 1.0, ErrorCode::invalid_exponent, "weighted chain rule needs s in [0, 1]");
  require(w.admissible(g.dim()), ErrorCode::precondition, "weight is outside the admissible range");
  const Eigen::ArrayXd weight = w.sample(g);
  const Field Fu = evaluate(F, f);
  const double lhs = std::sqrt((fractional_derivative(Fu, s).values().abs() / weight).square().sum() * g.cell_volume());
  const double grad = std::sqrt((fractional_derivative(f, s).values().abs() * weight).square().sum() * g.cell_volume());
  const double gsup = (f.values().abs().pow(F.p - 1.0) / weight.square()).maxCoeff();
  require(grad > 0.0 && gsup > 0.0, ErrorCode::degenerate_input, "weighted chain rule with vanishing right side");
  return lhs / (grad * gsup);
}

}  // namespace hwlab
