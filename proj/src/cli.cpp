#include "hypoco/cli.hpp"

#include "hypoco/certify_kfp.hpp"
#include "hypoco/certify_telegraph.hpp"
#include "hypoco/envelope.hpp"
#include "hypoco/io.hpp"
#include "hypoco/oracle.hpp"
#include "hypoco/simulate.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

namespace hypoco::cli {

namespace {

std::string out_path(const std::string& dir, const char* name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

TelegraphRateSpec default_telegraph() {
  PotentialSpec pot =
      build_potential("cosine_torus", std::vector<real>{2.0 * std::numbers::pi, 0.0});
  const ScalarFn one = [](real) { return 1.0; };
  TelegraphRateSpec t = build_telegraph_spec(std::move(pot), one, one);
  t.rate_window_bound = [](real, real) { return 1.0; };
  return t;
}

TelegraphRateSpec telegraph_from_file(const std::string& path) {
  io::ConfigFile cfg = io::ConfigFile::parse_file(path);
  TelegraphRateSpec rates = io::telegraph_from_config(cfg);
  cfg.check_all_used();
  return rates;
}

real max_residual(const oracle::ResidualReport& rep) {
  real m = 0.0;
  for (const auto& [name, value] : rep) m = std::max(m, value);
  return m;
}

struct InitialForms {
  real f0 = 0.0, df0 = 0.0, d2f0 = 0.0, g0 = 0.0;
};

InitialForms forms_from(const Mat& K, const Mat& R, const Mat& Dx, const Vec& f) {
  InitialForms out;
  out.f0 = f.squaredNorm();
  out.df0 = 2.0 * f.dot(K * f);
  const Mat KR = K * R - R * K;
  out.d2f0 = f.dot((4.0 * K * K + 4.0 * KR) * f);
  out.g0 = (Dx * f).squaredNorm();
  return out;
}

struct CertifyKfpOpts {
  real v = 1.0, b = 1.0, c_u = 1.0, u2_min = 1.0, u2_max = 1.0;
  std::string variant = "generalized";
  real pin_A = 0.0, pin_beta = 0.0;
  bool has_pin_A = false, has_pin_beta = false;
  int grid_a = 0, grid_beta = 0;
  bool refine = true;
  std::string out_dir = ".";
};

int cmd_certify_kfp(const CertifyKfpOpts& o) {
  const PotentialSpec pot = PotentialSpec::from_bounds(o.c_u, o.u2_min, o.u2_max);
  const KfpParams par(o.v, o.b);
  kfp::PVariant variant = kfp::PVariant::Generalized;
  if (o.variant == "base")
    variant = kfp::PVariant::Base;
  else if (o.variant != "generalized")
    throw CLI::ValidationError("--variant must be 'generalized' or 'base'");

  OptimizerConfig cfg;
  if (o.grid_a > 0) cfg.grid_a = o.grid_a;
  if (o.grid_beta > 0) cfg.grid_beta = o.grid_beta;
  cfg.refine = o.refine;
  if (o.has_pin_A) cfg.pin_A = o.pin_A;
  if (o.has_pin_beta) cfg.pin_beta = o.pin_beta;

  std::vector<EvalRow> log;
  const RateCertificate cert = kfp::optimize(pot, par, cfg, variant, &log);
  io::write_text(out_path(o.out_dir, "certificate.txt"), io::certificate_text(cert));
  io::write_text(out_path(o.out_dir, "evals.csv"), io::evals_csv(log, false));
  std::cout << "model=kfp v=" << io::format_real(o.v) << " b=" << io::format_real(o.b)
            << " rate=" << io::format_real(cert.rate) << " feasible=" << (cert.feasible ? 1 : 0)
            << "\n";
  return cert.feasible && cert.rate > 0.0 ? 0 : 2;
}

struct CertifyTgOpts {
  std::string config;
  real pin_A = 0.0, pin_beta = 0.0, pin_alpha = 0.0;
  bool has_pin_A = false, has_pin_beta = false, has_pin_alpha = false;
  int grid_a = 0, grid_beta = 0;
  bool refine = true;
  std::string out_dir = ".";
};

int cmd_certify_telegraph(const CertifyTgOpts& o) {
  const TelegraphRateSpec spec = telegraph_from_file(o.config);
  OptimizerConfig cfg;
  if (o.grid_a > 0) cfg.grid_a = o.grid_a;
  if (o.grid_beta > 0) cfg.grid_beta = o.grid_beta;
  cfg.refine = o.refine;
  if (o.has_pin_A) cfg.pin_A = o.pin_A;
  if (o.has_pin_beta) cfg.pin_beta = o.pin_beta;
  if (o.has_pin_alpha) cfg.pin_alpha = o.pin_alpha;

  std::vector<EvalRow> log;
  const RateCertificate cert = telegraph::optimize(spec, cfg, &log);
  io::write_text(out_path(o.out_dir, "certificate.txt"), io::certificate_text(cert));
  io::write_text(out_path(o.out_dir, "evals.csv"), io::evals_csv(log, true));
  std::cout << "model=telegraph a_star=" << io::format_real(spec.a_star)
            << " rate=" << io::format_real(cert.rate) << " feasible=" << (cert.feasible ? 1 : 0)
            << "\n";
  return cert.feasible && cert.rate > 0.0 ? 0 : 2;
}

int cmd_table(const std::string& out_dir, bool refine) {
  const std::vector<real> vs{0.5, 1.0, 2.0, 10.0};
  const std::vector<real> bs{0.2, 0.5, 1.0, 3.0, 5.0};
  const PotentialSpec pot = build_potential("quadratic", std::vector<real>{1.0});
  std::vector<io::TableRow> rows;
  bool all_feasible = true;
  for (const real v : vs)
    for (const real b : bs) {
      const KfpParams par(v, b);
      OptimizerConfig cfg;
      cfg.refine = refine;
      const RateCertificate cert = kfp::optimize(pot, par, cfg);
      all_feasible = all_feasible && cert.feasible && cert.rate > 0.0;
      rows.push_back({v, b, cert.rate, oracle::r_theor(par, 1.0)});
    }
  const std::string csv = io::table_csv(rows);
  io::write_text(out_path(out_dir, "table.csv"), csv);
  std::cout << csv;
  return all_feasible ? 0 : 2;
}

int cmd_validate(const std::string& out_dir) {
  std::vector<io::CheckLine> checks;
  const auto add = [&](std::string name, real value, real threshold, bool pass) {
    checks.push_back({std::move(name), pass, value, threshold});
  };
  const auto add_le = [&](std::string name, real value, real threshold) {
    add(std::move(name), value, threshold, value <= threshold);
  };

  const oracle::OperatorSet ops = oracle::build_kfp_operators(1.0, KfpParams(1.0, 1.0), 12);
  add_le("kfp_bracket_residuals", max_residual(oracle::bracket_residuals(ops)), 1e-10);
  const oracle::OperatorSet ops_scaled =
      oracle::build_kfp_operators(1.0, KfpParams(2.0, 0.5), 12);
  add_le("kfp_bracket_residuals_scaled", max_residual(oracle::bracket_residuals(ops_scaled)),
         1e-10);
  const oracle::TelegraphOperatorSet tops = oracle::build_telegraph_operators(1.0, 16);
  add_le("telegraph_bracket_residuals", max_residual(oracle::bracket_residuals(tops)), 1e-10);

  const Vec f_xy = ops.centered(ops.monomial(1, 0) + ops.monomial(0, 1));
  const Vec f_prod = ops.centered(ops.monomial(1, 1));
  const Vec f_quad = ops.centered(ops.monomial(2, 0) + ops.monomial(0, 2));
  add_le("derivatives_x_plus_y", max_residual(oracle::derivative_checks(ops, f_xy)), 1e-6);
  add_le("derivatives_xy", max_residual(oracle::derivative_checks(ops, f_prod)), 1e-6);
  add_le("derivatives_x2_plus_y2", max_residual(oracle::derivative_checks(ops, f_quad)), 1e-6);

  const std::vector<real> grid = linspace(0.0, 10.0, 10001);

  const PotentialSpec pot = build_potential("quadratic", std::vector<real>{1.0});
  const RateCertificate kc = kfp::optimize(pot, KfpParams(1.0, 1.0), OptimizerConfig{});
  add("kfp_certificate_feasible", kc.rate, 0.0, kc.feasible && kc.rate > 0.0);
  const DecaySeries ks = oracle::evolve(ops, f_xy, grid);
  const auto krep = oracle::inequality_residual(ks, kc);
  add_le("kfp_inequality_residual", krep.max_residual, krep.tol);
  const real knu_tol = -1e-7 * (1.0 + std::abs(kc.nu_star));
  add("kfp_nu_margin", krep.min_nu_margin, knu_tol, krep.min_nu_margin >= knu_tol);

  const InitialForms kf = forms_from(ops.K, ops.R, ops.Dx, f_xy);
  const auto kspec_cl = envelope::from_certificate(kc, kf.f0, kf.df0, kf.d2f0, kf.g0, true);
  const auto kdom = envelope::check_domination(ks, kspec_cl);
  add_le("kfp_envelope_domination_clamped", kdom.max_violation, kdom.tol);
  add_le("kfp_envelope_rk4_selftest", envelope::rk4_deviation(kspec_cl), 1e-8);
  const auto kspec = envelope::from_certificate(kc, kf.f0, kf.df0, kf.d2f0, kf.g0, false);
  if (kspec.nu_star > 0.0) {
    const auto kdom2 = envelope::check_domination(ks, kspec);
    add_le("kfp_envelope_supcorrected", kdom2.max_violation, kdom2.tol);
    bool within = true;
    for (const auto& e : kdom2.excursions) within = within && e.within_sqrt;
    add("kfp_excursions_within_pi_over_sqrt_nu",
        static_cast<real>(kdom2.excursions.size()), kdom2.threshold_sqrt, within);
  }
  if (kc.feasible && kc.rate > 0.0) {
    const real erate = envelope::envelope_rate(kspec);
    const real slope = envelope::fitted_slope(kspec);
    add("kfp_envelope_slope_1pct", std::abs(-slope - erate), 0.01 * erate,
        std::abs(-slope - erate) <= 0.01 * erate);
  }

  const TelegraphRateSpec tspec = default_telegraph();
  const RateCertificate tc = telegraph::optimize(tspec, OptimizerConfig{});
  add("telegraph_certificate_feasible", tc.rate, 0.0, tc.feasible && tc.rate > 0.0);
  oracle::TorusInitial tinit;
  tinit.v = VecC::Zero(16);
  tinit.perp = VecC::Zero(16);
  tinit.v(0) = 1.0;
  tinit.perp(0) = 1.0;
  const oracle::TorusSeries tseries = oracle::telegraph_torus_series(1.0, 16, tinit, grid);
  const auto trep = oracle::inequality_residual(tseries.series, tc);
  add_le("telegraph_inequality_residual", trep.max_residual, trep.tol);
  const real tnu_tol = -1e-7 * (1.0 + std::abs(tc.nu_star));
  add("telegraph_nu_margin", trep.min_nu_margin, tnu_tol, trep.min_nu_margin >= tnu_tol);
  add_le("telegraph_soundness_vs_exact", tc.rate, tseries.exact_rate + 1e-6);

  Vec tf = Vec::Zero(tops.dim());
  tf[1] = std::sqrt(2.0);  // sqrt(2) cos x
  tf[3] = std::sqrt(2.0);  // sqrt(2) y cos x
  const InitialForms tfo = forms_from(tops.K, tops.R, tops.Dx, tf);
  const auto tspec_cl = envelope::from_certificate(tc, tfo.f0, tfo.df0, tfo.d2f0, tfo.g0, true);
  const auto tdom = envelope::check_domination(tseries.series, tspec_cl);
  add_le("telegraph_envelope_domination_clamped", tdom.max_violation, tdom.tol);
  add_le("telegraph_envelope_rk4_selftest", envelope::rk4_deviation(tspec_cl), 1e-8);

  const std::string report = io::validation_text(checks);
  io::write_text(out_path(out_dir, "validation.txt"), report);
  std::cout << report;
  for (const auto& c : checks)
    if (!c.pass) return 2;
  return 0;
}

struct SimOpts {
  std::string model = "kfp";
  std::string config;
  real v = 1.0, b = 1.0;
  real t_end = 2.0, dt = 1e-3;
  int n_outer = 200, n_inner = 16;
  std::uint64_t seed = 1;
  std::vector<real> snapshots;
  real x0 = 0.0, y0 = 1.0;
  std::string out_dir = ".";
};

sim::Model build_model(const SimOpts& o) {
  if (o.model == "kfp") {
    PotentialSpec pot;
    if (o.config.empty()) {
      pot = build_potential("quadratic", std::vector<real>{1.0});
    } else {
      io::ConfigFile cfg = io::ConfigFile::parse_file(o.config);
      pot = io::potential_from_config(cfg);
      cfg.check_all_used();
    }
    return sim::Model::kfp(std::move(pot), KfpParams(o.v, o.b));
  }
  if (o.model == "telegraph")
    return sim::Model::telegraph(o.config.empty() ? default_telegraph()
                                                  : telegraph_from_file(o.config));
  throw CLI::ValidationError("--model must be 'kfp' or 'telegraph'");
}

sim::SimConfig sim_config(const SimOpts& o) {
  sim::SimConfig cfg;
  cfg.dt = o.dt;
  cfg.t_end = o.t_end;
  cfg.n_outer = o.n_outer;
  cfg.n_inner = o.n_inner;
  cfg.seed = o.seed;
  cfg.snapshot_times = o.snapshots.empty() ? std::vector<real>{o.t_end} : o.snapshots;
  cfg.x0 = o.x0;
  cfg.y0 = o.y0;
  cfg.validate();
  return cfg;
}

int cmd_simulate(const SimOpts& o) {
  const sim::Model model = build_model(o);
  const sim::SimConfig cfg = sim_config(o);
  const auto est =
      sim::estimate_Ft([](real x, real y) { return x + y; }, model, cfg);
  const std::string csv = io::estimates_csv(est);
  io::write_text(out_path(o.out_dir, "estimates.csv"), csv);
  std::cout << csv;
  return 0;
}

int cmd_density(const SimOpts& o) {
  const sim::Model model = build_model(o);
  const sim::SimConfig cfg = sim_config(o);
  const auto hists = sim::density_snapshots(model, cfg);
  io::write_text(out_path(o.out_dir, "snapshots.csv"), io::snapshots_csv(hists));
  const real tv = sim::tv_to_equilibrium(hists.back(), model.potential());
  std::cout << "snapshots=" << hists.size() << " tv_to_equilibrium=" << io::format_real(tv)
            << "\n";
  return 0;
}

struct EnvelopeOpts {
  std::string model = "kfp";
  std::string config;
  real v = 1.0, b = 1.0;
  real t_end = 10.0, dt = 1e-3;
  bool clamp = false;
  std::string out_dir = ".";
};

int cmd_envelope(const EnvelopeOpts& o) {
  const int n = static_cast<int>(std::lround(o.t_end / o.dt)) + 1;
  const std::vector<real> grid = linspace(0.0, o.t_end, n);

  RateCertificate cert;
  DecaySeries series;
  InitialForms forms;
  if (o.model == "kfp") {
    const PotentialSpec pot = build_potential("quadratic", std::vector<real>{1.0});
    const KfpParams par(o.v, o.b);
    cert = kfp::optimize(pot, par, OptimizerConfig{});
    const oracle::OperatorSet ops = oracle::build_kfp_operators(1.0, par, 12);
    const Vec f = ops.centered(ops.monomial(1, 0) + ops.monomial(0, 1));
    series = oracle::evolve(ops, f, grid);
    forms = forms_from(ops.K, ops.R, ops.Dx, f);
  } else if (o.model == "telegraph") {
    const TelegraphRateSpec spec =
        o.config.empty() ? default_telegraph() : telegraph_from_file(o.config);
    cert = telegraph::optimize(spec, OptimizerConfig{});
    const oracle::TelegraphOperatorSet tops = oracle::build_telegraph_operators(1.0, 16);
    oracle::TorusInitial init;
    init.v = VecC::Zero(16);
    init.perp = VecC::Zero(16);
    init.v(0) = 1.0;
    init.perp(0) = 1.0;
    series = oracle::telegraph_torus_series(1.0, 16, init, grid).series;
    Vec f = Vec::Zero(tops.dim());
    f[1] = std::sqrt(2.0);
    f[3] = std::sqrt(2.0);
    forms = forms_from(tops.K, tops.R, tops.Dx, f);
  } else {
    throw CLI::ValidationError("--model must be 'kfp' or 'telegraph'");
  }
  if (!cert.feasible || cert.rate <= 0.0) {
    std::cout << "no feasible certificate; envelope not constructed\n";
    return 2;
  }

  const auto spec =
      envelope::from_certificate(cert, forms.f0, forms.df0, forms.d2f0, forms.g0, o.clamp);
  const auto rep = envelope::check_domination(series, spec);
  io::write_text(out_path(o.out_dir, "domination.csv"), io::domination_csv(rep));
  std::cout << "rate=" << io::format_real(cert.rate)
            << " envelope_rate=" << io::format_real(envelope::envelope_rate(spec))
            << " max_violation=" << io::format_real(rep.max_violation)
            << " tol=" << io::format_real(rep.tol) << " dominated=" << (rep.dominated ? 1 : 0)
            << " excursions=" << rep.excursions.size() << "\n";
  return rep.dominated ? 0 : 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Certified exponential decay rates for kinetic semigroups"};
  app.require_subcommand(1);
  int code = 0;

  CertifyKfpOpts ck;
  CLI::App* sck = app.add_subcommand(
      "certify-kfp", "Certify a kinetic Fokker-Planck decay rate from curvature bounds");
  sck->add_option("--v", ck.v, "Transport strength v > 0");
  sck->add_option("--b", ck.b, "Friction scale b > 0");
  sck->add_option("--c-u", ck.c_u, "Poincare constant of e^{-U}");
  sck->add_option("--u2-min", ck.u2_min, "inf U''");
  sck->add_option("--u2-max", ck.u2_max, "sup U''");
  sck->add_option("--variant", ck.variant, "P variant: generalized|base");
  CLI::Option* ck_A = sck->add_option("--A", ck.pin_A, "Pin the A parameter");
  CLI::Option* ck_beta = sck->add_option("--beta", ck.pin_beta, "Pin beta in (0,1]");
  sck->add_option("--grid-a", ck.grid_a, "A-grid size");
  sck->add_option("--grid-beta", ck.grid_beta, "beta-grid size");
  sck->add_flag("--refine,!--no-refine", ck.refine, "Nelder-Mead refinement");
  sck->add_option("--out-dir", ck.out_dir, "Output directory");
  sck->callback([&] {
    ck.has_pin_A = ck_A->count() > 0;
    ck.has_pin_beta = ck_beta->count() > 0;
    code = cmd_certify_kfp(ck);
  });

  CertifyTgOpts ct;
  CLI::App* sct = app.add_subcommand("certify-telegraph",
                                     "Certify a telegraph decay rate from a rate config");
  sct->add_option("--config", ct.config, "Rate/potential config file")->required();
  CLI::Option* ct_A = sct->add_option("--A", ct.pin_A, "Pin the A parameter");
  CLI::Option* ct_beta = sct->add_option("--beta", ct.pin_beta, "Pin beta in (0,1]");
  CLI::Option* ct_alpha = sct->add_option("--alpha", ct.pin_alpha, "Pin alpha in (0,1)");
  sct->add_option("--grid-a", ct.grid_a, "A-grid size");
  sct->add_option("--grid-beta", ct.grid_beta, "beta-grid size");
  sct->add_flag("--refine,!--no-refine", ct.refine, "Nelder-Mead refinement");
  sct->add_option("--out-dir", ct.out_dir, "Output directory");
  sct->callback([&] {
    ct.has_pin_A = ct_A->count() > 0;
    ct.has_pin_beta = ct_beta->count() > 0;
    ct.has_pin_alpha = ct_alpha->count() > 0;
    code = cmd_certify_telegraph(ct);
  });

  std::string table_out = ".";
  bool table_refine = true;
  CLI::App* stb = app.add_subcommand("table", "Certified vs theoretical rates on the (v,b) grid");
  stb->add_option("--out-dir", table_out, "Output directory");
  stb->add_flag("--refine,!--no-refine", table_refine, "Nelder-Mead refinement");
  stb->callback([&] { code = cmd_table(table_out, table_refine); });

  std::string validate_out = ".";
  CLI::App* sva = app.add_subcommand("validate", "Run the oracle validation pipeline");
  sva->add_option("--out-dir", validate_out, "Output directory");
  sva->callback([&] { code = cmd_validate(validate_out); });

  SimOpts sm;
  CLI::App* ssm = app.add_subcommand("simulate", "Monte Carlo F_t estimates for f = x + y");
  ssm->add_option("--model", sm.model, "kfp|telegraph");
  ssm->add_option("--config", sm.config, "Potential/rate config file");
  ssm->add_option("--v", sm.v, "kfp transport strength");
  ssm->add_option("--b", sm.b, "kfp friction scale");
  ssm->add_option("--t-end", sm.t_end, "Final time");
  ssm->add_option("--dt", sm.dt, "kfp Euler step");
  ssm->add_option("--n-outer", sm.n_outer, "Outer start points");
  ssm->add_option("--n-inner", sm.n_inner, "Trajectories per start");
  ssm->add_option("--seed", sm.seed, "RNG seed");
  ssm->add_option("--snapshots", sm.snapshots, "Estimate times")->delimiter(',');
  ssm->add_option("--out-dir", sm.out_dir, "Output directory");
  ssm->callback([&] { code = cmd_simulate(sm); });

  SimOpts dn;
  dn.n_outer = 1000;
  dn.n_inner = 1;
  CLI::App* sdn = app.add_subcommand("density", "Histogram snapshots of X_t");
  sdn->add_option("--model", dn.model, "kfp|telegraph");
  sdn->add_option("--config", dn.config, "Potential/rate config file");
  sdn->add_option("--v", dn.v, "kfp transport strength");
  sdn->add_option("--b", dn.b, "kfp friction scale");
  sdn->add_option("--t-end", dn.t_end, "Final time");
  sdn->add_option("--dt", dn.dt, "kfp Euler step");
  sdn->add_option("--n-outer", dn.n_outer, "Outer count");
  sdn->add_option("--n-inner", dn.n_inner, "Inner count");
  sdn->add_option("--seed", dn.seed, "RNG seed");
  sdn->add_option("--snapshots", dn.snapshots, "Snapshot times")->delimiter(',');
  sdn->add_option("--x0", dn.x0, "Start position");
  sdn->add_option("--y0", dn.y0, "Start velocity");
  sdn->add_option("--out-dir", dn.out_dir, "Output directory");
  sdn->callback([&] { code = cmd_density(dn); });

  EnvelopeOpts ev;
  CLI::App* sev = app.add_subcommand("envelope",
                                     "Certify, evolve the oracle, and check envelope domination");
  sev->add_option("--model", ev.model, "kfp|telegraph");
  sev->add_option("--config", ev.config, "Telegraph rate config file");
  sev->add_option("--v", ev.v, "kfp transport strength");
  sev->add_option("--b", ev.b, "kfp friction scale");
  sev->add_option("--t-end", ev.t_end, "Grid end time");
  sev->add_option("--dt", ev.dt, "Grid spacing");
  sev->add_flag("--clamp", ev.clamp, "Clamp nu_star to min(nu_star, 0)");
  sev->add_option("--out-dir", ev.out_dir, "Output directory");
  sev->callback([&] { code = cmd_envelope(ev); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int parse_code = app.exit(e);
    return parse_code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}

}  // namespace hypoco::cli
