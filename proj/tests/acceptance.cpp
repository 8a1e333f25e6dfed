// End-to-end acceptance checks. Each numbered criterion prints one PASS/FAIL
// line with the measured values; the exit status is the number of failures.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hypoco/certify_kfp.hpp"
#include "hypoco/certify_telegraph.hpp"
#include "hypoco/envelope.hpp"
#include "hypoco/io.hpp"
#include "hypoco/oracle.hpp"
#include "hypoco/simulate.hpp"

using namespace hypoco;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << num << "  " << name << "  " << detail
            << "\n";
  if (!pass) ++g_failures;
}

std::string fmt(real x) { return io::format_real(x); }

PotentialSpec unit_quadratic() {
  return build_potential("quadratic", std::vector<real>{1.0});
}

TelegraphRateSpec constant_telegraph(real a) {
  auto pot = build_potential("cosine_torus", std::vector<real>{2.0 * std::numbers::pi, 0.0});
  return build_telegraph_spec(
      pot, [a](real) { return a; }, [a](real) { return a; });
}

struct Forms {
  real f0, df0, d2f0, g0;
};

Forms forms_from(const Mat& K, const Mat& R, const Mat& Dx, const Vec& f) {
  const Mat KR = K * R - R * K;
  return {f.squaredNorm(), 2.0 * f.dot(K * f), f.dot((4.0 * K * K + 4.0 * KR) * f),
          (Dx * f).squaredNorm()};
}

// Published rates are printed to two decimals; accept either rounding or
// truncation of the computed value.
bool matches_two_decimals(real computed, real published, real tol) {
  const real truncated = std::floor(computed * 100.0) / 100.0;
  return std::abs(computed - published) <= tol || std::abs(truncated - published) <= 1e-12;
}

void criterion_1() {
  constexpr real kTol = 0.005;
  const struct {
    real v, b, published;
  } rows[] = {{0.5, 3.0, 0.18}, {0.5, 5.0, 0.10}, {1.0, 5.0, 0.55}};
  bool pass = true;
  std::ostringstream detail;
  for (const auto& r : rows) {
    const real got = oracle::r_theor(KfpParams(r.v, r.b), 1.0);
    const bool ok = matches_two_decimals(got, r.published, kTol);
    pass = pass && ok;
    detail << "(v=" << fmt(r.v) << ",b=" << fmt(r.b) << "): " << fmt(got) << " vs "
           << fmt(r.published) << (ok ? " ok; " : " MISMATCH; ");
  }
  report(1, "comparison-rate anchors", pass, detail.str());
}

void criterion_2() {
  constexpr real kAbs = 0.05, kRel = 0.25, kSmall = 0.01, kSmallFactor = 3.0;
  const struct {
    real v, b, published;
  } rows[] = {{10.0, 1.0, 0.56}, {2.0, 0.5, 0.26}, {0.5, 0.2, 0.11}, {1.0, 0.5, 0.21}};
  bool pass = true;
  std::ostringstream detail;
  const PotentialSpec pot = unit_quadratic();
  for (const auto& r : rows) {
    const RateCertificate c = kfp::optimize(pot, KfpParams(r.v, r.b), OptimizerConfig{});
    bool ok = c.feasible;
    if (r.published < kSmall) {
      ok = ok && c.rate >= r.published / kSmallFactor && c.rate <= r.published * kSmallFactor;
    } else {
      const real tol = std::max(kAbs, kRel * r.published);
      ok = ok && std::abs(c.rate - r.published) <= tol;
    }
    pass = pass && ok;
    detail << "(v=" << fmt(r.v) << ",b=" << fmt(r.b) << "): " << fmt(c.rate) << " vs "
           << fmt(r.published) << (ok ? " ok; " : " MISMATCH; ");
  }
  report(2, "published certified rates", pass, detail.str());
}

void criterion_3() {
  constexpr real kSlack = 1e-6;
  bool pass = true;
  real worst_gap = -1e30;
  int cells = 0, feasible = 0;
  const PotentialSpec pot = unit_quadratic();
  for (const real v : {0.5, 1.0, 2.0, 10.0})
    for (const real b : {0.2, 0.5, 1.0, 3.0, 5.0}) {
      const KfpParams par(v, b);
      const RateCertificate c = kfp::optimize(pot, par, OptimizerConfig{});
      const real bound = oracle::r_theor(par, 1.0);
      ++cells;
      if (c.feasible) ++feasible;
      pass = pass && c.feasible && c.rate <= bound + kSlack;
      worst_gap = std::max(worst_gap, c.rate - bound);
    }

  OptimizerConfig tg_cfg;
  tg_cfg.grid_a = 24;
  tg_cfg.grid_beta = 16;
  tg_cfg.sup_grid_n = 2001;
  std::ostringstream tg_detail;
  for (const real a : {0.25, 0.5, 1.0, 2.0}) {
    const RateCertificate c = telegraph::optimize(constant_telegraph(a), tg_cfg);
    const real exact = telegraph::exact_constant_rate(a, 16);
    const bool ok = c.feasible && c.rate > 0.0 && c.rate <= exact + kSlack;
    pass = pass && ok;
    tg_detail << "a=" << fmt(a) << ": " << fmt(c.rate) << " <= " << fmt(exact)
              << (ok ? " ok; " : " VIOLATION; ");
  }
  std::ostringstream detail;
  detail << "kfp cells feasible " << feasible << "/" << cells << ", worst rate-bound gap "
         << fmt(worst_gap) << "; telegraph " << tg_detail.str();
  report(3, "soundness against exact rates", pass, detail.str());
}

real max_entry(const oracle::ResidualReport& rep) {
  real m = 0.0;
  for (const auto& [k, v] : rep) m = std::max(m, v);
  return m;
}

void criterion_4() {
  constexpr real kTol = 1e-10;
  const real r1 = max_entry(oracle::bracket_residuals(oracle::build_kfp_operators(1.0, KfpParams(1.0, 1.0), 12)));
  const real r2 = max_entry(oracle::bracket_residuals(oracle::build_kfp_operators(1.0, KfpParams(2.0, 0.5), 12)));
  const real r3 = max_entry(oracle::bracket_residuals(oracle::build_telegraph_operators(1.0, 16)));
  const real r4 = max_entry(oracle::bracket_residuals(oracle::build_telegraph_operators(2.0, 16)));
  const bool pass = r1 <= kTol && r2 <= kTol && r3 <= kTol && r4 <= kTol;
  std::ostringstream detail;
  detail << "kfp " << fmt(r1) << ", " << fmt(r2) << "; telegraph " << fmt(r3) << ", " << fmt(r4)
         << " (tol " << fmt(kTol) << ")";
  report(4, "operator identity residuals", pass, detail.str());
}

void criterion_5() {
  constexpr real kTol = 1e-6;
  const auto ops = oracle::build_kfp_operators(1.0, KfpParams(1.0, 1.0), 12);
  const Vec data[3] = {ops.monomial(0, 1), ops.monomial(1, 0) + ops.monomial(0, 1),
                       ops.monomial(1, 1)};
  const char* names[3] = {"y", "x+y", "xy"};
  bool pass = true;
  std::ostringstream detail;
  for (int i = 0; i < 3; ++i) {
    const real worst = max_entry(oracle::derivative_checks(ops, data[i]));
    pass = pass && worst <= kTol;
    detail << names[i] << ": " << fmt(worst) << "; ";
  }
  detail << "(tol " << fmt(kTol) << ")";
  report(5, "derivative formulas vs finite differences", pass, detail.str());
}

void criterion_6() {
  const std::vector<real> grid = linspace(0.0, 10.0, 10001);

  const RateCertificate kc = kfp::optimize(unit_quadratic(), KfpParams(1.0, 1.0), OptimizerConfig{});
  const auto ops = oracle::build_kfp_operators(1.0, KfpParams(1.0, 1.0), 12);
  const Vec f = ops.monomial(1, 0) + ops.monomial(0, 1);
  const auto kseries = oracle::evolve(ops, f, grid);
  const auto krep = oracle::inequality_residual(kseries, kc);
  const real knu_tol = -1e-7 * (1.0 + std::abs(kc.nu_star));
  const bool kok = kc.feasible && krep.max_residual <= krep.tol && krep.min_nu_margin >= knu_tol;

  OptimizerConfig tg_cfg;
  tg_cfg.grid_a = 24;
  tg_cfg.grid_beta = 16;
  tg_cfg.sup_grid_n = 2001;
  const RateCertificate tc = telegraph::optimize(constant_telegraph(1.0), tg_cfg);
  oracle::TorusInitial init;
  init.v = VecC::Constant(16, complex(1.0, 0.0));
  init.perp = VecC::Constant(16, complex(1.0, 0.0));
  const auto tseries = oracle::telegraph_torus_series(1.0, 16, init, grid);
  const auto trep = oracle::inequality_residual(tseries.series, tc);
  const real tnu_tol = -1e-7 * (1.0 + std::abs(tc.nu_star));
  const bool tok = tc.feasible && trep.max_residual <= trep.tol && trep.min_nu_margin >= tnu_tol;

  std::ostringstream detail;
  detail << "kfp residual " << fmt(krep.max_residual) << " (tol " << fmt(krep.tol)
         << "), nu margin " << fmt(krep.min_nu_margin) << "; telegraph residual "
         << fmt(trep.max_residual) << " (tol " << fmt(trep.tol) << "), nu margin "
         << fmt(trep.min_nu_margin);
  report(6, "third-order differential inequality", kok && tok, detail.str());
}

void criterion_7() {
  const RateCertificate cert =
      kfp::optimize(unit_quadratic(), KfpParams(1.0, 1.0), OptimizerConfig{});
  const auto ops = oracle::build_kfp_operators(1.0, KfpParams(1.0, 1.0), 12);
  const Vec f = ops.monomial(1, 0) + ops.monomial(0, 1);
  const auto series = oracle::evolve(ops, f, linspace(0.0, 10.0, 10001));
  const Forms fo = forms_from(ops.K, ops.R, ops.Dx, f);

  bool pass = cert.feasible && cert.rate > 0.0;
  std::ostringstream detail;

  const auto clamped = envelope::from_certificate(cert, fo.f0, fo.df0, fo.d2f0, fo.g0, true);
  const auto crep = envelope::check_domination(series, clamped);
  pass = pass && crep.dominated;
  detail << "clamped max violation " << fmt(crep.max_violation) << " (tol " << fmt(crep.tol)
         << "); ";

  const auto raw = envelope::from_certificate(cert, fo.f0, fo.df0, fo.d2f0, fo.g0, false);
  if (raw.nu_star > 0.0) {
    const auto rrep = envelope::check_domination(series, raw);
    bool within = true;
    for (const auto& e : rrep.excursions) within = within && e.within_sqrt;
    pass = pass && rrep.max_violation <= rrep.tol && within;
    detail << "sup-corrected violation " << fmt(rrep.max_violation) << " (tol " << fmt(rrep.tol)
           << "), excursions " << rrep.excursions.size() << ", max length "
           << fmt(rrep.max_excursion_length) << " vs pi/sqrt(nu) " << fmt(rrep.threshold_sqrt)
           << " and pi/nu " << fmt(rrep.threshold_plain) << "; ";
  }

  const real erate = envelope::envelope_rate(raw);
  const real slope = envelope::fitted_slope(raw);
  const bool slope_ok = std::abs(-slope - erate) <= 0.01 * erate;
  pass = pass && slope_ok;
  detail << "fitted slope " << fmt(slope) << " vs envelope rate " << fmt(erate);
  report(7, "envelope domination and asymptotic slope", pass, detail.str());
}

void criterion_8() {
  const auto model = sim::Model::kfp(unit_quadratic(), KfpParams(1.0, 1.0));
  sim::SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 2.0;
  cfg.n_outer = 2000;
  cfg.n_inner = 64;
  cfg.seed = 1;
  cfg.snapshot_times = {0.5, 1.0, 2.0};
  const auto est = sim::estimate_Ft([](real x, real y) { return x + y; }, model, cfg);

  const auto ops = oracle::build_kfp_operators(1.0, KfpParams(1.0, 1.0), 12);
  const Vec f = ops.monomial(1, 0) + ops.monomial(0, 1);
  const auto exact = oracle::evolve(ops, f, cfg.snapshot_times);

  bool pass = true;
  std::ostringstream detail;
  for (size_t k = 0; k < est.size(); ++k) {
    const real err = std::abs(est[k].F_hat - exact.F[k]);
    const bool ok = err <= 3.0 * est[k].std_err;
    pass = pass && ok;
    detail << "t=" << fmt(est[k].t) << ": |" << fmt(est[k].F_hat) << " - " << fmt(exact.F[k])
           << "| = " << fmt(err) << " vs 3se " << fmt(3.0 * est[k].std_err)
           << (ok ? " ok; " : " MISMATCH; ");
  }
  report(8, "Monte Carlo decay matches the spectral oracle", pass, detail.str());
}

void criterion_9() {
  const char* base_cfg =
      "potential = double_well\n"
      "alpha = 0.008\n"
      "gamma = 0.2\n"
      "rate_plus = relu_dU\n"
      "rate_minus = relu_dU\n";
  const char* boost_cfg =
      "potential = double_well\n"
      "alpha = 0.008\n"
      "gamma = 0.2\n"
      "rate_plus = 1 + relu_dU\n"
      "rate_minus = 1 + relu_dU\n";

  const auto model_from = [](const char* text) {
    io::ConfigFile cfg = io::ConfigFile::parse_string(text);
    TelegraphRateSpec rates = io::telegraph_from_config(cfg);
    cfg.check_all_used();
    return sim::Model::telegraph(std::move(rates));
  };
  const auto base = model_from(base_cfg);
  const auto boost = model_from(boost_cfg);

  sim::SimConfig cfg;
  cfg.t_end = 600.0;
  cfg.n_outer = 100;
  cfg.n_inner = 100;
  cfg.x0 = 7.0;
  cfg.y0 = -1.0;
  for (real t = 2.0; t <= 600.0; t += 2.0) cfg.snapshot_times.push_back(t);

  bool pass = true;
  std::ostringstream detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    const real t_base = sim::mass_crossing_time(base, cfg, 0.0, 0.25);
    const real t_boost = sim::mass_crossing_time(boost, cfg, 0.0, 0.25);
    const bool ok = std::isfinite(t_base) && t_boost > t_base;
    pass = pass && ok;
    detail << "seed " << seed << ": " << fmt(t_base) << " -> " << fmt(t_boost)
           << (ok ? "; " : " NOT SLOWER; ");
  }
  report(9, "uniform flipping delays barrier crossing", pass, detail.str());
}

void criterion_10() {
  OptimizerConfig cfg;
  cfg.grid_a = 12;
  cfg.grid_beta = 10;
  cfg.refine = false;
  std::vector<EvalRow> log1, log2;
  kfp::optimize(unit_quadratic(), KfpParams(1.0, 1.0), cfg, kfp::PVariant::Generalized, &log1);
  kfp::optimize(unit_quadratic(), KfpParams(1.0, 1.0), cfg, kfp::PVariant::Generalized, &log2);
  const bool evals_ok = io::evals_csv(log1, false) == io::evals_csv(log2, false);

  const auto model = sim::Model::kfp(unit_quadratic(), KfpParams(1.0, 1.0));
  sim::SimConfig scfg;
  scfg.t_end = 0.5;
  scfg.n_outer = 50;
  scfg.n_inner = 4;
  scfg.seed = 9;
  scfg.snapshot_times = {0.25, 0.5};
  const auto e1 = sim::estimate_Ft([](real x, real y) { return x + y; }, model, scfg);
  const auto e2 = sim::estimate_Ft([](real x, real y) { return x + y; }, model, scfg);
  const bool est_ok = io::estimates_csv(e1) == io::estimates_csv(e2);

  const auto dom_csv = []() {
    const RateCertificate cert =
        kfp::optimize(unit_quadratic(), KfpParams(1.0, 1.0), OptimizerConfig{});
    const auto ops = oracle::build_kfp_operators(1.0, KfpParams(1.0, 1.0), 12);
    const Vec f = ops.monomial(1, 0) + ops.monomial(0, 1);
    const auto series = oracle::evolve(ops, f, linspace(0.0, 10.0, 1001));
    const Forms fo = forms_from(ops.K, ops.R, ops.Dx, f);
    const auto spec = envelope::from_certificate(cert, fo.f0, fo.df0, fo.d2f0, fo.g0, true);
    return io::domination_csv(envelope::check_domination(series, spec));
  };
  const bool dom_ok = dom_csv() == dom_csv();

  std::ostringstream detail;
  detail << "evals " << (evals_ok ? "identical" : "DIFFER") << ", estimates "
         << (est_ok ? "identical" : "DIFFER") << ", domination "
         << (dom_ok ? "identical" : "DIFFER");
  report(10, "repeated runs are byte-identical", evals_ok && est_ok && dom_ok, detail.str());
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::cout << (g_failures == 0 ? "ACCEPTANCE: all criteria passed"
                                : "ACCEPTANCE: " + std::to_string(g_failures) + " criteria failed")
            << "\n";
  return g_failures;
}
