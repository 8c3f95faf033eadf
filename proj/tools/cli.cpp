#include "cli.hpp"

#include "hwlab/besov.hpp"
#include "hwlab/blowup.hpp"
#include "hwlab/chainrule.hpp"
#include "hwlab/error.hpp"
#include "hwlab/estimates.hpp"
#include "hwlab/field_io.hpp"
#include "hwlab/parallel.hpp"
#include "hwlab/solver.hpp"
#include "hwlab/spectral.hpp"

#include <CLI11.hpp>
#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hwlab::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// CSV with a leading '#' line that names the units of every column.
class Table {
 public:
  Table(std::vector<std::string> columns, std::vector<std::string> units) : columns_(std::move(columns)), units_(std::move(units)) {}

  void row(const std::vector<std::string>& cells) { rows_.push_back(cells); }

  std::string str() const {
    std::ostringstream os;
    os << "# units:";
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? ", " : " ") << columns_[i] << " [" << units_[i] << "]";
    os << '\n';
    write_line(os, columns_);
    for (const auto& r : rows_) write_line(os, r);
    return os.str();
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }
  std::vector<std::string> columns_;
  std::vector<std::string> units_;
  std::vector<std::vector<std::string>> rows_;
};

const json nonlinearity_default = {{"kind", "power_gauge"}, {"p", 3.0}, {"k", 0}, {"lambda", {1.0, 0.0}}};
const json ensemble_default = {{"generator", "band_limited"}, {"count", 10}};
const json weight_default = {{"delta", 0.5}, {"delta_prime", 0.0}, {"form", "pure_power"}};
const json profile_default = {{"amplitude", 2.5}, {"radius", 1.0}};

const std::map<std::string, json>& defaults_table() {
  static const std::map<std::string, json> table = {
      {"solve",
       {{"n", 1}, {"N", 256}, {"L", 16.0}, {"dt", 1e-3}, {"t_end", 1.0}, {"method", "strang_split"}, {"picard_iters", 8},
        {"dealias", false}, {"nonlinearity", nonlinearity_default},
        {"data", {{"kind", "gaussian"}, {"amplitude", 1.0}, {"width", 1.0}, {"mode", {1, 0, 0}}}},
        {"hs_norms", json::array()}, {"monitor_every", 1}, {"write_final_field", false}, {"expect_blowup", false},
        {"enforce_wrap_guard", true}, {"blowup_threshold", 0.0}}},
      {"besov",
       {{"n", 1}, {"N", 256}, {"L", 8.0}, {"s", 0.5}, {"q", 2.0}, {"r", 2.0}, {"homogeneous", true}, {"difference_order", 1},
        {"ensemble", ensemble_default}}},
      {"chainrule",
       {{"n", 1}, {"N", 256}, {"L", 8.0}, {"s", 0.5}, {"q", 2.0}, {"r", 2.0}, {"homogeneous", true}, {"dealias", false},
        {"nonlinearity", {{"kind", "power_gauge"}, {"p", 2.0}, {"k", 0}, {"lambda", {1.0, 0.0}}}},
        {"ensemble", ensemble_default}, {"fkp", {{"samples", 2000}, {"radius", 2.0}}}}},
      {"bench",
       {{"estimate", "strichartz"}, {"n", 2}, {"N", 128}, {"L", 16.0}, {"T", 4.0}, {"q", 6.0}, {"time_samples", 64},
        {"radial", false}, {"steps", 256}, {"s", 0.75}, {"form", "trace"}, {"sigmas", {1.0, 0.5, 0.25, 0.125}},
        {"weight", weight_default}, {"ap_class", "A1"}, {"resolutions", {32, 64, 128, 256}}, {"half_length", 8.0},
        {"nonlinearity", {{"kind", "power_gauge"}, {"p", 3.0}, {"k", 0}, {"lambda", {1.0, 0.0}}}},
        {"ensemble", {{"generator", "radial"}, {"count", 10}}}}},
      {"lifespan",
       {{"n", 2}, {"p", 2.0}, {"epsilons", {0.4, 0.28, 0.2, 0.14, 0.1}}, {"profile", profile_default}, {"N", 256},
        {"dt", 0.05}, {"threshold_factor", 1e6}, {"box_margin", 1.1}, {"pilot_L", 16.0}, {"pilot_attempts", 6},
        {"pilot_dt_factor", 2.0}, {"dealias", false}, {"validation_tolerance", 0.05}}},
      {"blowup-diagnose",
       {{"n", 2}, {"p", 2.0}, {"N", 128}, {"L", 8.0}, {"epsilon", 0.51}, {"profile", profile_default}, {"dt", 0.01},
        {"t_end", 7.0}, {"snapshot_every", 5}, {"margin", 1.0}, {"quad_order", 0}}},
      {"exponents", {{"n", 3}, {"p", 3.0}}},
  };
  return table;
}

void merge_strict(json& base, const json& user, const std::string& where) {
  require(user.is_object(), ErrorCode::invalid_argument, where + " must be a JSON object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    require(base.contains(it.key()), ErrorCode::invalid_argument, "unknown parameter '" + key + "'");
    json& slot = base[it.key()];
    const json& v = it.value();
    if (slot.is_object()) {
      merge_strict(slot, v, key);
      continue;
    }
    const bool ok = (slot.is_number() && v.is_number()) || (slot.is_boolean() && v.is_boolean()) ||
                    (slot.is_string() && v.is_string()) || (slot.is_array() && v.is_array());
    require(ok, ErrorCode::invalid_argument, "parameter '" + key + "' has the wrong type");
    if (slot.is_number_integer() && !v.is_number_integer()) fail(ErrorCode::invalid_argument, "parameter '" + key + "' must be an integer");
    slot = v;
  }
}

Nonlinearity nonlinearity_from(const json& j) {
  const NonlinearityKind kind = nonlinearity_kind_from_string(j.at("kind").get<std::string>());
  const double p = j.at("p").get<double>();
  const int k = j.at("k").get<int>();
  const std::optional<int> kk = k > 0 ? std::optional<int>(k) : std::nullopt;
  const auto lam = j.at("lambda").get<std::vector<double>>();
  require(lam.size() == 2, ErrorCode::invalid_argument, "lambda must be [re, im]");
  switch (kind) {
    case NonlinearityKind::power_gauge: return Nonlinearity::power_gauge(p, complex(lam[0], lam[1]), kk);
    case NonlinearityKind::power_abs: return Nonlinearity::power_abs(p, complex(lam[0], lam[1]), kk);
    case NonlinearityKind::glassey: return Nonlinearity::glassey(p, kk);
    case NonlinearityKind::custom: break;
  }
  fail(ErrorCode::invalid_argument, "custom nonlinearities cannot be configured from JSON");
}

WeightSpec weight_from(const json& j) {
  return WeightSpec{j.at("delta").get<double>(), j.at("delta_prime").get<double>(), weight_form_from_string(j.at("form").get<std::string>())};
}

Grid grid_from(const json& p) { return Grid(p.at("n").get<int>(), p.at("L").get<double>(), p.at("N").get<int>()); }

Ensemble ensemble_from(const json& p, const Grid& g, std::uint64_t seed) {
  const json& e = p.at("ensemble");
  return Ensemble(g, ensemble_generator_from_string(e.at("generator").get<std::string>()), e.at("count").get<int>(), seed);
}

BesovParams besov_from(const json& p) {
  BesovParams b{p.at("s").get<double>(), p.at("q").get<double>(), p.at("r").get<double>(), p.at("homogeneous").get<bool>()};
  b.validate();
  return b;
}

Field initial_data(const json& d, const Grid& g, std::uint64_t seed) {
  const std::string kind = d.at("kind").get<std::string>();
  const double a = d.at("amplitude").get<double>();
  const double w = d.at("width").get<double>();
  if (kind == "gaussian") {
    return Field::sample(g, [=](const Eigen::Vector3d& x) { return complex(a * std::exp(-x.squaredNorm() / (w * w))); });
  }
  if (kind == "bump") return BumpProfile{a, w}.sample(g);
  if (kind == "plane_wave") {
    const auto m = d.at("mode").get<std::vector<int>>();
    require(m.size() == 3, ErrorCode::invalid_argument, "mode must have three entries");
    return Field::plane_wave(g, Eigen::Vector3i(m[0], m[1], m[2])) * a;
  }
  if (kind == "band_limited") return Ensemble(g, EnsembleGenerator::band_limited, 1, seed).member(0) * a;
  fail(ErrorCode::invalid_argument, "unknown data kind '" + kind + "'");
}

Bundle run_solve(const RunConfig& rc) {
  const json& p = rc.parameters;
  const Grid g = grid_from(p);
  SolveConfig cfg(g, nonlinearity_from(p.at("nonlinearity")));
  cfg.dt = p.at("dt").get<double>();
  cfg.t_end = p.at("t_end").get<double>();
  const std::string method = p.at("method").get<std::string>();
  require(method == "strang_split" || method == "picard", ErrorCode::invalid_argument, "method must be strang_split or picard");
  cfg.method = method == "picard" ? SolveMethod::picard : SolveMethod::strang_split;
  cfg.picard_iters = p.at("picard_iters").get<int>();
  cfg.dealias = p.at("dealias").get<bool>();
  cfg.monitors.hs_norms = p.at("hs_norms").get<std::vector<double>>();
  cfg.monitor_every = p.at("monitor_every").get<int>();
  cfg.enforce_wrap_guard = p.at("enforce_wrap_guard").get<bool>();
  cfg.blowup_threshold = p.at("blowup_threshold").get<double>();
  const Field u0 = initial_data(p.at("data"), g, rc.seed);
  const Trajectory traj = cfg.method == SolveMethod::picard ? picard_solve(u0, cfg) : solve(u0, cfg);

  std::vector<std::string> cols = {"t", "mass", "sup"};
  std::vector<std::string> units = {"time", "L2 norm squared", "amplitude"};
  const bool with_energy = !traj.energy.empty();
  if (with_energy) {
    cols.push_back("energy");
    units.push_back("energy");
  }
  for (double s : traj.hs_orders) {
    cols.push_back("hs_" + num(s));
    units.push_back("H^s norm");
  }
  Table t(cols, units);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::vector<std::string> r = {num(traj.times[i]), num(traj.mass[i]), num(traj.sup[i])};
    if (with_energy) r.push_back(num(traj.energy[i]));
    for (const auto& h : traj.hs) r.push_back(num(h[i]));
    t.row(r);
  }
  Bundle b;
  b.files["monitors.csv"] = t.str();
  if (!traj.contraction.empty()) {
    Table c({"iteration", "d"}, {"count", "L2 norm"});
    for (std::size_t i = 0; i < traj.contraction.size(); ++i) c.row({std::to_string(i), num(traj.contraction[i])});
    b.files["contraction.csv"] = c.str();
  }
  if (p.at("write_final_field").get<bool>()) {
    const fs::path tmp = fs::temp_directory_path() / ("hwlab_field_" + std::to_string(::getpid()));
    io::write_field(tmp, traj.final_state());
    for (const std::string suffix : {"", ".json"}) {
      std::ifstream in(tmp.string() + suffix, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      b.files["final_field.hwf" + suffix] = ss.str();
      fs::remove(tmp.string() + suffix);
    }
  }
  b.summary = {{"termination", to_string(traj.termination)}, {"steps", cfg.step_count()}, {"mass_drift", traj.mass_drift()},
               {"contraction_warning", traj.contraction_warning}, {"message", traj.message}};
  if (with_energy) b.summary["energy_drift"] = traj.energy_drift();
  if (traj.blowup_time) b.summary["blowup_time"] = *traj.blowup_time;
  if (traj.termination == Termination::error) {
    b.status = exit_numerical;
    b.status_message = traj.message;
  } else if (traj.termination == Termination::blowup_detected && !p.at("expect_blowup").get<bool>()) {
    b.status = exit_numerical;
    b.status_message = "unexpected blow-up at t = " + num(*traj.blowup_time);
  }
  return b;
}

Bundle run_besov(const RunConfig& rc) {
  const json& p = rc.parameters;
  const Grid g = grid_from(p);
  const BesovParams bp = besov_from(p);
  DifferenceScheme scheme;
  scheme.order = p.at("difference_order").get<int>();
  const bool with_diff = bp.s > 0.0 && bp.s < scheme.order;
  const Ensemble ens = ensemble_from(p, g, rc.seed);
  std::vector<std::array<double, 3>> rows(ens.count);
  parallel_for(ens.count, [&](std::size_t i) {
    const Field f = ens.member(int(i));
    const double lp = besov_norm(f, bp);
    const double sob = bp.q == 2.0 ? sobolev_norm(bp.homogeneous ? f.without_mean() : f, bp.s, bp.homogeneous) : std::nan("");
    const double diff = with_diff ? difference_besov_norm(f, bp, scheme) : std::nan("");
    rows[i] = {lp, sob, diff};
  });
  Table t({"member", "besov_lp", "sobolev", "lp_over_sobolev", "besov_difference", "lp_over_difference"},
          {"index", "norm", "norm", "ratio", "norm", "ratio"});
  for (int i = 0; i < ens.count; ++i) {
    const auto& r = rows[i];
    t.row({std::to_string(i), num(r[0]), num(r[1]), num(r[0] / r[1]), num(r[2]), num(r[0] / r[2])});
  }
  Bundle b;
  b.files["besov.csv"] = t.str();
  b.summary = {{"members", ens.count}, {"difference_norm", with_diff}};
  return b;
}

Bundle run_chainrule(const RunConfig& rc) {
  const json& p = rc.parameters;
  const Grid g = grid_from(p);
  const BesovParams bp = besov_from(p);
  const Nonlinearity F = nonlinearity_from(p.at("nonlinearity"));
  const bool dealias = p.at("dealias").get<bool>();
  const Ensemble ens = ensemble_from(p, g, rc.seed);
  std::vector<double> ratios(ens.count);
  parallel_for(ens.count, [&](std::size_t i) { ratios[i] = chainrule_ratio(F, ens.member(int(i)), bp, dealias); });
  Table t({"member", "ratio"}, {"index", "dimensionless"});
  for (int i = 0; i < ens.count; ++i) t.row({std::to_string(i), num(ratios[i])});
  const json& fk = p.at("fkp");
  const FkpReport rep = check_property_Fkp(F, fk.at("samples").get<std::size_t>(), fk.at("radius").get<double>(), rc.seed);
  Table f({"j", "sup", "sup_half", "finite", "stable"}, {"derivative order", "constant", "constant", "flag", "flag"});
  for (const auto& e : rep.entries) f.row({std::to_string(e.j), num(e.sup), num(e.sup_half), e.finite ? "1" : "0", e.stable ? "1" : "0"});
  Bundle b;
  b.files["chainrule.csv"] = t.str();
  b.files["fkp.csv"] = f.str();
  const EnsembleStatistics st = summarize(ratios);
  b.summary = {{"sup", st.sup}, {"mean", st.mean}, {"fkp_passed", rep.passed}, {"near_axis_samples", rep.near_axis_samples}};
  return b;
}

Bundle run_bench(const RunConfig& rc) {
  const json& p = rc.parameters;
  const std::string est = p.at("estimate").get<std::string>();
  const int n = p.at("n").get<int>();
  Bundle b;
  auto ensemble_table = [&](const std::string& file, const std::function<EstimateReport(const Field&)>& fn) {
    const Grid g = grid_from(p);
    const Ensemble ens = ensemble_from(p, g, rc.seed);
    std::vector<EstimateReport> reps(ens.count);
    parallel_for(ens.count, [&](std::size_t i) { reps[i] = fn(ens.member(int(i))); });
    Table t({"member", "lhs", "rhs", "ratio"}, {"index", "norm", "norm", "dimensionless"});
    std::vector<double> ratios;
    for (int i = 0; i < ens.count; ++i) {
      t.row({std::to_string(i), num(reps[i].lhs), num(reps[i].rhs), num(reps[i].ratio)});
      ratios.push_back(reps[i].ratio);
    }
    b.files[file] = t.str();
    const EnsembleStatistics st = summarize(ratios);
    b.summary = {{"estimate", est}, {"sup", st.sup}, {"mean", st.mean}};
  };
  if (est == "strichartz") {
    StrichartzOptions opt;
    opt.time_samples = p.at("time_samples").get<int>();
    opt.radial = p.at("radial").get<bool>();
    const double q = p.at("q").get<double>();
    const double T = p.at("T").get<double>();
    ensemble_table("strichartz.csv", [&](const Field& f) { return strichartz_ratio(f, q, T, opt); });
  } else if (est == "local-energy") {
    LocalEnergyOptions opt;
    opt.steps = p.at("steps").get<int>();
    opt.enforce_wrap_guard = false;
    const WeightSpec w = weight_from(p.at("weight"));
    const double T = p.at("T").get<double>();
    ensemble_table("local_energy.csv", [&](const Field& f) { return local_energy_check(f, Source{}, w, T, opt); });
  } else if (est == "weighted-chainrule") {
    const WeightSpec w = weight_from(p.at("weight"));
    const Nonlinearity F = nonlinearity_from(p.at("nonlinearity"));
    const double s = p.at("s").get<double>();
    const Grid g = grid_from(p);
    const Ensemble ens = ensemble_from(p, g, rc.seed);
    std::vector<double> ratios(ens.count);
    parallel_for(ens.count, [&](std::size_t i) { ratios[i] = weighted_chainrule_ratio(F, ens.member(int(i)), s, w); });
    Table t({"member", "ratio"}, {"index", "dimensionless"});
    for (int i = 0; i < ens.count; ++i) t.row({std::to_string(i), num(ratios[i])});
    b.files["weighted_chainrule.csv"] = t.str();
    const EnsembleStatistics st = summarize(ratios);
    b.summary = {{"estimate", est}, {"sup", st.sup}, {"mean", st.mean}};
  } else if (est == "weights") {
    const WeightSpec w = weight_from(p.at("weight"));
    const std::string cls = p.at("ap_class").get<std::string>();
    require(cls == "A1" || cls == "A2", ErrorCode::invalid_argument, "ap_class must be A1 or A2");
    const double half = p.at("half_length").get<double>();
    Table t({"resolution", "characteristic"}, {"points per axis", "dimensionless"});
    json values = json::array();
    for (int res : p.at("resolutions").get<std::vector<int>>()) {
      const double c = muckenhoupt_characteristic(w, n, cls == "A1" ? ApClass::A1 : ApClass::A2, res, half);
      t.row({std::to_string(res), num(c)});
      values.push_back(c);
    }
    b.files["weights.csv"] = t.str();
    b.summary = {{"estimate", est}, {"admissible", w.admissible(n)}, {"characteristics", values}};
  } else if (est == "radial-sobolev") {
    const Grid g = grid_from(p);
    const double s = p.at("s").get<double>();
    const std::string form = p.at("form").get<std::string>();
    require(form == "trace" || form == "pointwise", ErrorCode::invalid_argument, "form must be trace or pointwise");
    Table t({"sigma", "ratio"}, {"length", "dimensionless"});
    double sup = 0.0;
    for (double sigma : p.at("sigmas").get<std::vector<double>>()) {
      const Field f = Field::sample(g, [=](const Eigen::Vector3d& x) { return complex(std::exp(-x.squaredNorm() / (2.0 * sigma * sigma))); });
      const double r = radial_sobolev_ratio(f, s, form == "trace" ? RadialSobolevForm::trace : RadialSobolevForm::pointwise);
      t.row({num(sigma), num(r)});
      sup = std::max(sup, r);
    }
    b.files["radial_sobolev.csv"] = t.str();
    b.summary = {{"estimate", est}, {"sup", sup}};
  } else {
    fail(ErrorCode::invalid_argument, "unknown estimate '" + est + "'");
  }
  return b;
}

ScanConfig scan_from(const json& p) {
  ScanConfig c;
  c.n = p.at("n").get<int>();
  c.p = p.at("p").get<double>();
  c.epsilons = p.at("epsilons").get<std::vector<double>>();
  c.profile = BumpProfile{p.at("profile").at("amplitude").get<double>(), p.at("profile").at("radius").get<double>()};
  c.N = p.at("N").get<int>();
  c.dt = p.at("dt").get<double>();
  c.threshold_factor = p.at("threshold_factor").get<double>();
  c.box_margin = p.at("box_margin").get<double>();
  c.pilot_L = p.at("pilot_L").get<double>();
  c.pilot_attempts = p.at("pilot_attempts").get<int>();
  c.pilot_dt_factor = p.at("pilot_dt_factor").get<double>();
  c.dealias = p.at("dealias").get<bool>();
  c.validation_tolerance = p.at("validation_tolerance").get<double>();
  return c;
}

Bundle run_lifespan(const RunConfig& rc) {
  const ScanConfig cfg = scan_from(rc.parameters);
  const std::vector<ScanRecord> recs = lifespan_records(cfg);
  Table t({"epsilon", "t_star", "t_star_refined", "censored", "validated", "dt", "N", "L"},
          {"amplitude", "time", "time", "flag", "flag", "time", "points per axis", "length"});
  for (const auto& r : recs) {
    t.row({num(r.epsilon), num(r.t_star), num(r.t_star_refined), r.censored ? "1" : "0", r.validated ? "1" : "0", num(r.dt),
           std::to_string(r.N), num(r.L)});
  }
  Bundle b;
  b.files["lifespan_records.csv"] = t.str();
  try {
    const LifespanFit fit = fit_lifespan(recs, cfg.n, cfg.p);
    Table f({"branch", "exponent", "intercept", "r_squared", "residual", "predicted", "censored"},
            {"label", "dimensionless", "log time", "dimensionless", "log time", "dimensionless", "count"});
    f.row({to_string(fit.branch), num(fit.exponent), num(fit.intercept), num(fit.r_squared), num(fit.residual), num(fit.predicted),
           std::to_string(fit.censored)});
    b.files["lifespan_fit.csv"] = f.str();
    b.summary = {{"branch", to_string(fit.branch)}, {"exponent", fit.exponent}, {"r_squared", fit.r_squared},
                 {"predicted", fit.predicted}, {"censored", fit.censored}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::censored_fit) throw;
    b.status = exit_censored;
    b.status_message = e.what();
    b.summary = {{"fit", "refused"}, {"reason", e.what()}};
  }
  return b;
}

Bundle run_diagnose(const RunConfig& rc) {
  const json& p = rc.parameters;
  const Grid g = grid_from(p);
  const double pw = p.at("p").get<double>();
  const BumpProfile prof{p.at("profile").at("amplitude").get<double>(), p.at("profile").at("radius").get<double>()};
  SolveConfig cfg(g, Nonlinearity::glassey(pw));
  cfg.dt = p.at("dt").get<double>();
  cfg.t_end = p.at("t_end").get<double>();
  cfg.support_radius = prof.radius;
  cfg.monitors.energy = false;
  const int every = p.at("snapshot_every").get<int>();
  const ReductionHistory h = run_reduction(prof.sample(g, p.at("epsilon").get<double>()), cfg, every);
  const TestFunction phi(g, p.at("quad_order").get<int>());
  const FunctionalSeries fsr = blowup_functionals(h, phi, pw, prof.radius, p.at("margin").get<double>());
  const double t_max = h.trajectory.blowup_time ? 0.9 * *h.trajectory.blowup_time : std::numeric_limits<double>::infinity();
  const OdeReport ode = ode_inequality_check(fsr, g.dim(), pw, prof.radius, t_max);
  Table t({"t", "F", "G", "H", "F_prime", "c_emp", "residual"},
          {"time", "functional", "functional", "functional", "functional per time", "dimensionless", "relative L2"});
  for (std::size_t i = 0; i < fsr.t.size(); ++i) {
    const double c = i < ode.c_emp.size() ? ode.c_emp[i] : std::nan("");
    t.row({num(fsr.t[i]), num(fsr.F[i]), num(fsr.G[i]), num(fsr.H[i]), num(fsr.F_prime[i]), num(c),
           num(std::max(h.states[i].residual_velocity, h.states[i].residual_dispersion))});
  }
  Bundle b;
  b.files["functionals.csv"] = t.str();
  b.summary = {{"termination", to_string(h.trajectory.termination)}, {"quad_order", phi.order()},
               {"identity_defect", fsr.identity_defect}, {"envelope_ratio", fsr.envelope_ratio},
               {"anomalies", fsr.anomalies.size()}, {"derivative_mismatch", fsr.derivative_mismatch},
               {"max_residual", h.max_residual}, {"inf_c", ode.inf_c}, {"holder_sup", ode.holder_sup}, {"ode_passed", ode.passed}};
  if (h.trajectory.blowup_time) b.summary["blowup_time"] = *h.trajectory.blowup_time;
  return b;
}

json exponents_json(int n, double p) {
  const CriticalExponents c = critical_exponents(n, p);
  json j = {{"n", n}, {"p", p}, {"s_c", c.s_c}, {"regime", to_string(c.regime)}, {"exponential_lifespan", c.exponential_lifespan}};
  j["glassey_power"] = std::isinf(c.glassey_power) ? json("inf") : json(c.glassey_power);
  j["conformal_power"] = std::isinf(c.conformal_power) ? json("inf") : json(c.conformal_power);
  j["delta"] = c.delta ? json(*c.delta) : json(nullptr);
  j["lifespan_exponent"] = c.lifespan_exponent ? json(*c.lifespan_exponent) : json(nullptr);
  return j;
}

Bundle run_exponents(const RunConfig& rc) {
  Bundle b;
  b.summary = exponents_json(rc.parameters.at("n").get<int>(), rc.parameters.at("p").get<double>());
  b.files["exponents.json"] = b.summary.dump(2) + "\n";
  return b;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::non_finite:
    case ErrorCode::numerical_failure:
    case ErrorCode::reduction_failure: return exit_numerical;
    case ErrorCode::censored_fit: return exit_censored;
    default: return exit_validation;
  }
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  require(bool(in), ErrorCode::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::invalid_argument, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Line-level diff summary, capped at a few lines.
std::string diff_listing(const std::string& stored, const std::string& fresh) {
  std::istringstream a(stored), b(fresh);
  std::string la, lb;
  std::ostringstream out;
  int line = 0, shown = 0;
  while (true) {
    const bool ga = bool(std::getline(a, la));
    const bool gb = bool(std::getline(b, lb));
    if (!ga && !gb) break;
    ++line;
    if (ga && gb && la == lb) continue;
    if (shown++ < 5) {
      out << "    line " << line << ":\n      stored: " << (ga ? la : "<missing>") << "\n      fresh:  " << (gb ? lb : "<missing>") << "\n";
    }
  }
  if (shown > 5) out << "    ... " << shown - 5 << " more differing lines\n";
  return out.str();
}

int reproduce(const fs::path& manifest_path, std::optional<int> threads) {
  const json m = read_json_file(manifest_path);
  if (m.value("format", "") != "hwlab-manifest") fail(ErrorCode::invalid_argument, "not an hwlab manifest");
  const int fv = m.value("format_version", -1);
  const std::string tv = m.value("tool_version", "");
  if (fv != manifest_format_version || tv.substr(0, tv.find('.')) != std::string(tool_version).substr(0, 1)) {
    fail(ErrorCode::incompatible_version, "incompatible manifest: format " + std::to_string(fv) + ", tool " + tv + " (this is format " +
                                              std::to_string(manifest_format_version) + ", tool " + tool_version + ")");
  }
  RunConfig rc;
  rc.command = m.at("command").get<std::string>();
  rc.seed = m.at("seed").get<std::uint64_t>();
  rc.threads = threads.value_or(m.at("threads").get<int>());
  rc.parameters = resolve_parameters(rc.command, m.at("parameters"));
  bool ok = true;
  if (config_hash(rc) != m.value("config_hash", "")) {
    std::cout << "FAIL config hash: manifest records " << m.value("config_hash", "") << ", parameters hash to " << config_hash(rc) << "\n";
    ok = false;
  }
  set_thread_count(rc.threads);
  const Bundle fresh = execute(rc);
  const fs::path dir = manifest_path.parent_path();
  for (const auto& [name, content] : fresh.files) {
    if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
    if (!fs::exists(dir / name)) {
      std::cout << "FAIL " << name << ": missing from the stored bundle\n";
      ok = false;
      continue;
    }
    const std::string stored = read_file(dir / name);
    if (stored == content) {
      std::cout << "PASS " << name << "\n";
    } else {
      std::cout << "FAIL " << name << "\n" << diff_listing(stored, content);
      ok = false;
    }
  }
  return ok ? exit_ok : exit_mismatch;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"solve", "besov", "chainrule", "bench", "lifespan", "blowup-diagnose", "exponents"};
  return c;
}

json default_parameters(const std::string& command) {
  const auto& t = defaults_table();
  const auto it = t.find(command);
  require(it != t.end(), ErrorCode::invalid_argument, "unknown command '" + command + "'");
  return it->second;
}

json resolve_parameters(const std::string& command, const json& user) {
  json base = default_parameters(command);
  if (!user.is_null()) merge_strict(base, user, "");
  return base;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& cfg) {
  return fnv1a_hex(json{{"command", cfg.command}, {"parameters", cfg.parameters}, {"seed", cfg.seed}}.dump());
}

Bundle execute(const RunConfig& cfg) {
  if (cfg.command == "solve") return run_solve(cfg);
  if (cfg.command == "besov") return run_besov(cfg);
  if (cfg.command == "chainrule") return run_chainrule(cfg);
  if (cfg.command == "bench") return run_bench(cfg);
  if (cfg.command == "lifespan") return run_lifespan(cfg);
  if (cfg.command == "blowup-diagnose") return run_diagnose(cfg);
  if (cfg.command == "exponents") return run_exponents(cfg);
  fail(ErrorCode::invalid_argument, "unknown command '" + cfg.command + "'");
}

json make_manifest(const RunConfig& cfg, const Bundle& bundle) {
  json outputs = json::object();
  for (const auto& [name, content] : bundle.files) outputs[name] = fnv1a_hex(content);
  return {{"format", "hwlab-manifest"},
          {"format_version", manifest_format_version},
          {"tool_version", tool_version},
          {"libraries", {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                       std::to_string(EIGEN_MINOR_VERSION)},
                         {"fftw", std::string(fftw_version)}}},
          {"command", cfg.command},
          {"seed", cfg.seed},
          {"threads", cfg.threads},
          {"parameters", cfg.parameters},
          {"config_hash", config_hash(cfg)},
          {"outputs", outputs},
          {"status", bundle.status}};
}

void write_bundle(const fs::path& dir, const RunConfig& rc, const Bundle& b) {
  fs::create_directories(dir);
  for (const auto& [name, content] : b.files) {
    std::ofstream out(dir / name, std::ios::binary);
    require(bool(out), ErrorCode::io, "cannot write " + (dir / name).string());
    out << content;
  }
  std::ofstream(dir / "manifest.json") << make_manifest(rc, b).dump(2) << '\n';
  std::ostringstream md;
  md << "# hwlab " << rc.command << "\n\n";
  md << "- seed: " << rc.seed << "\n- threads: " << rc.threads << "\n- config hash: " << config_hash(rc) << "\n";
  if (!b.status_message.empty()) md << "- status: " << b.status_message << "\n";
  md << "\n## Results\n\n";
  for (auto it = b.summary.begin(); it != b.summary.end(); ++it) md << "- " << it.key() << ": " << it.value().dump() << "\n";
  md << "\n## Files\n\n";
  for (const auto& [name, content] : b.files) md << "- " << name << " (" << content.size() << " bytes)\n";
  std::ofstream(dir / "summary.md") << md.str();
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Pseudospectral lab for the nonlinear half-wave equation"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "hwlab-out";
  std::optional<int> threads;
  std::optional<int> n, N;
  std::optional<double> p, L, dt, t_end;
  std::string manifest_path;
  std::string estimate;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "seed for ensembles and random data");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (default from HALFWAVE_LAB_THREADS, else 1)");
    sub->add_option("--n", n, "spatial dimension");
    sub->add_option("--p", p, "power of the nonlinearity");
    sub->add_option("--N", N, "points per axis");
    sub->add_option("--L", L, "box half-length");
    sub->add_option("--dt", dt, "time step");
    sub->add_option("--t-end", t_end, "final time (T for bench)");
  };
  for (const auto& c : commands()) {
    CLI::App* sub = app.add_subcommand(c, "run the " + c + " command");
    add_common(sub);
    if (c == "bench") sub->add_option("--estimate", estimate, "strichartz, local-energy, weights, radial-sobolev or weighted-chainrule");
  }
  CLI::App* rep = app.add_subcommand("reproduce", "re-run a manifest and compare its tables");
  rep->add_option("manifest", manifest_path, "path to manifest.json")->required();
  rep->add_option("--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    if (!threads) {
      if (const char* env = std::getenv("HALFWAVE_LAB_THREADS")) {
        try {
          threads = std::stoi(env);
        } catch (const std::exception&) {
          fail(ErrorCode::invalid_argument, "HALFWAVE_LAB_THREADS must be an integer");
        }
      }
    }
    require(!threads || *threads >= 1, ErrorCode::invalid_argument, "thread count must be positive");
    if (rep->parsed()) return reproduce(manifest_path, threads);

    RunConfig rc;
    rc.command = app.get_subcommands().front()->get_name();
    rc.threads = threads.value_or(1);
    json user = json::object();
    if (!config_path.empty()) {
      const json file = read_json_file(config_path);
      require(file.is_object(), ErrorCode::invalid_argument, "config must be a JSON object");
      for (auto it = file.begin(); it != file.end(); ++it) {
        require(it.key() == "command" || it.key() == "seed" || it.key() == "parameters", ErrorCode::invalid_argument,
                "unknown top-level config key '" + it.key() + "'");
      }
      if (file.contains("command")) {
        require(file["command"] == rc.command, ErrorCode::invalid_argument, "config is for command " + file["command"].dump());
      }
      if (file.contains("seed")) {
        require(file["seed"].is_number_unsigned(), ErrorCode::invalid_argument, "seed must be a nonnegative integer");
        rc.seed = file["seed"].get<std::uint64_t>();
      }
      if (file.contains("parameters")) user = file["parameters"];
    }
    if (app.get_subcommands().front()->count("--seed")) rc.seed = seed;
    if (!estimate.empty()) user["estimate"] = estimate;
    rc.parameters = resolve_parameters(rc.command, user);
    json& P = rc.parameters;
    auto set = [&](const char* key, const json& v) {
      require(P.contains(key), ErrorCode::invalid_argument, std::string("--") + key + " does not apply to " + rc.command);
      P[key] = v;
    };
    if (n) set("n", *n);
    if (N) set("N", *N);
    if (L) set("L", *L);
    if (dt) set("dt", *dt);
    if (t_end) set(P.contains("t_end") ? "t_end" : "T", *t_end);
    if (p) {
      if (P.contains("p")) P["p"] = *p;
      else if (P.contains("nonlinearity")) P["nonlinearity"]["p"] = *p;
      else fail(ErrorCode::invalid_argument, "--p does not apply to " + rc.command);
    }
    set_thread_count(rc.threads);
    const Bundle b = execute(rc);
    if (rc.command == "exponents") std::cout << b.summary.dump(2) << "\n";
    write_bundle(out_dir, rc, b);
    if (b.status != exit_ok) std::cerr << "hwlab: " << b.status_message << "\n";
    return b.status;
  } catch (const Error& e) {
    std::cerr << "hwlab: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    std::cerr << "hwlab: invalid configuration: " << e.what() << "\n";
    return exit_validation;
  }
}

}  // namespace hwlab::cli
