#include "hypoco/certify_telegraph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace hypoco::telegraph {

using polyalg::Poly;

void CertInputs::validate() const {
  if (!(beta > 0.0) || beta > 1.0) throw std::invalid_argument("certify_telegraph: beta must lie in (0, 1]");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("certify_telegraph: alpha must lie in (0, 1)");
  if (!(spec.a_star > 0.0)) throw std::invalid_argument("certify_telegraph: a_star must be positive");
  if (!spec.smooth_rates)
    throw std::invalid_argument("certify_telegraph: rates must be continuously differentiable");
  if (!spec.potential.certifiable())
    throw std::invalid_argument("certify_telegraph: potential needs finite curvature bounds and c_u");
  if (sup_grid_n < 2) throw std::invalid_argument("certify_telegraph: sup grid too small");
}

HkLambdak hk_lambdak(real k, real beta, real alpha, real a_star, real c_u) {
  if (!(k >= 0.0)) throw std::invalid_argument("hk_lambdak: k must be nonnegative");
  real h = ((1.0 - beta) - k / (4.0 * a_star * c_u)) / (1.0 - alpha);
  if (h < -1e-12 * (1.0 + (1.0 - beta))) throw std::invalid_argument("hk_lambdak: k exceeds k_max");
  h = std::max(0.0, h);
  const real l = 2.0 * a_star * h * (1.0 - alpha) / (1.0 + h);
  return {h, l};
}

real eval_H(const CertInputs& in, real h, real x) {
  const real s = in.spec.s(x);
  const real ds = in.spec.ds(x);
  const real u2 = in.spec.potential.d2u(x);
  const real T = -3.0 * s * s + in.A * s + (1.0 + h) * u2;
  return -8.0 * s * s * s + 4.0 * in.A * s * s + T * T / (in.beta * s) + h * ds * ds / (in.alpha * s) +
         4.0 * (1.0 + h) * u2 * s;
}

namespace {

// Conservative Lipschitz budget for H assembled from the declared bounds.
// Curvature metadata (d2s_max, u3_max) is zero for constant rates, making the
// grid maximum exact there.
real lip_H(const CertInputs& in, real h) {
  const auto& sp = in.spec;
  const real smax = sp.s_max, astar = sp.a_star, dsm = sp.ds_max;
  const real u2a = std::max(std::abs(sp.potential.u2_min), std::abs(sp.potential.u2_max));
  const real u3 = sp.u3_max, d2s = sp.d2s_max;
  const real Aabs = std::abs(in.A);
  const real Tmax = 3.0 * smax * smax + Aabs * smax + (1.0 + h) * u2a;
  const real LT = (6.0 * smax + Aabs) * dsm + (1.0 + h) * u3;
  const real L1 = 24.0 * smax * smax * dsm;
  const real L2 = 8.0 * Aabs * smax * dsm;
  const real L3 = (2.0 * Tmax * LT) / (in.beta * astar) + Tmax * Tmax * dsm / (in.beta * astar * astar);
  const real L4 = h * (2.0 * dsm * d2s / astar + dsm * dsm * dsm / (astar * astar)) / in.alpha;
  const real L5 = 4.0 * (1.0 + h) * (u3 * smax + u2a * dsm);
  return L1 + L2 + L3 + L4 + L5;
}

real abs_H_bound(const CertInputs& in, real h) {
  const auto& sp = in.spec;
  const real smax = sp.s_max, astar = sp.a_star, dsm = sp.ds_max;
  const real u2a = std::max(std::abs(sp.potential.u2_min), std::abs(sp.potential.u2_max));
  const real Aabs = std::abs(in.A);
  const real Tmax = 3.0 * smax * smax + Aabs * smax + (1.0 + h) * u2a;
  return 8.0 * smax * smax * smax + 4.0 * Aabs * smax * smax + Tmax * Tmax / (in.beta * astar) +
         h * dsm * dsm / (in.alpha * astar) + 4.0 * (1.0 + h) * u2a * smax;
}

real q3_root_or_nan(const CertInputs& in, real tau, real k) {
  const auto r = polyalg::unique_nonpositive_real_root(Poly{k, tau, in.A, 1.0});
  return r ? *r : std::numeric_limits<real>::quiet_NaN();
}

}  // namespace

real build_H_sup(const CertInputs& in, real h) {
  in.validate();
  if (!(h >= 0.0)) throw std::invalid_argument("build_H_sup: h must be nonnegative");
  const auto [lo, hi] = in.spec.sample_window();
  return certified_sup([&](real x) { return eval_H(in, h, x); }, lo, hi, in.sup_grid_n, lip_H(in, h));
}

real tau_min_tg(const CertInputs& in, real h, real k) {
  in.validate();
  if (!(h >= 0.0)) throw std::invalid_argument("tau_min_tg: h must be nonnegative");
  if (!(k >= 0.0)) throw std::invalid_argument("tau_min_tg: k must be nonnegative");
  const auto [lo, hi] = in.spec.sample_window();
  const real astar = in.spec.a_star;
  const real lip = lip_H(in, h) / (2.0 * astar) +
                   (abs_H_bound(in, h) + k) * in.spec.ds_max / (2.0 * astar * astar);
  return certified_sup([&](real x) { return (eval_H(in, h, x) + k) / (2.0 * in.spec.s(x)); }, lo, hi,
                       in.sup_grid_n, lip);
}

std::optional<CommonRoot> common_root_k(const CertInputs& in, real tau) {
  in.validate();
  const real astar = in.spec.a_star, cu = *in.spec.potential.c_u;
  const real k_max = 4.0 * astar * cu * (1.0 - in.beta);
  if (k_max <= 0.0) return CommonRoot{0.0, 0.0};  // beta = 1

  for (int i = 0; i <= 32; ++i) {
    if (std::isnan(q3_root_or_nan(in, tau, k_max * i / 32.0))) return std::nullopt;
  }

  const auto g = [&](real k) -> real {
    const real r3 = q3_root_or_nan(in, tau, k);
    if (std::isnan(r3)) return r3;
    const real lk = hk_lambdak(k, in.beta, in.alpha, astar, cu).lambda_k;
    return r3 - (-lk);
  };

  const real gtol = 1e-11;
  real lo = 0.0, hi = k_max;
  const real glo = g(lo), ghi = g(hi);
  if (std::isnan(glo) || std::isnan(ghi)) return std::nullopt;
  if (glo < -gtol || ghi > gtol) return std::nullopt;

  real k = hi, gk = ghi;
  for (int it = 0; it < 200 && std::abs(gk) > gtol; ++it) {
    const real mid = 0.5 * (lo + hi);
    const real gm = g(mid);
    if (std::isnan(gm)) return std::nullopt;
    k = mid;
    gk = gm;
    if (gk > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-18 * (1.0 + k_max)) break;
  }
  if (std::abs(gk) > 1e-10) return std::nullopt;
  const real r3 = q3_root_or_nan(in, tau, k);
  if (std::isnan(r3)) return std::nullopt;
  return CommonRoot{k, std::max(0.0, -r3)};
}

RateCertificate certify(const CertInputs& in, real k, real tau, real lambda) {
  in.validate();
  const real astar = in.spec.a_star, cu = *in.spec.potential.c_u;
  const auto hl = hk_lambdak(k, in.beta, in.alpha, astar, cu);

  RateCertificate c;
  c.model = "telegraph";
  c.a_star = astar;
  c.c_u = cu;
  c.u2_min = in.spec.potential.u2_min;
  c.u2_max = in.spec.potential.u2_max;
  c.A = in.A;
  c.beta = in.beta;
  c.alpha = in.alpha;
  c.k = k;
  c.tau = tau;
  c.lambda = lambda;
  c.h_k = hl.h_k;
  c.lambda_k = hl.lambda_k;
  c.sup_h = build_H_sup(in, std::max(0.0, hl.h_k));

  c.w = 2.0 * (1.0 + hl.h_k);
  c.cu_div = cu / (2.0 * astar);
  detail::finish_rate_certificate(c, -hl.lambda_k);

  c.assumptions = {{"c_u", cu},
                   {"a_star", astar},
                   {"s_max", in.spec.s_max},
                   {"ds_max", in.spec.ds_max},
                   {"u2_min", c.u2_min},
                   {"u2_max", c.u2_max}};
  return c;
}

real exact_constant_rate(real a, int m_max) {
  if (!(a > 0.0)) throw std::invalid_argument("exact_constant_rate: a must be positive");
  if (m_max < 1) throw std::invalid_argument("exact_constant_rate: m_max must be >= 1");
  real best = 2.0 * a;  // pure velocity mode
  for (int m = 1; m <= m_max; ++m) {
    const complex root = -a + std::sqrt(complex(a * a - static_cast<real>(m) * m, 0.0));
    best = std::min(best, -root.real());
  }
  // Certificates bound the squared norm, which decays at twice the slowest
  // mode amplitude.
  return 2.0 * best;
}

std::optional<RateCertificate> evaluate_cell(const CertInputs& in) {
  const real astar = in.spec.a_star, cu = *in.spec.potential.c_u;
  const real k_max = 4.0 * astar * cu * (1.0 - in.beta);

  // tau_min_tg is convex in k (H is convex in h_k, h_k affine in k), so the
  // interval maximum sits at an endpoint.
  const real h0 = hk_lambdak(0.0, in.beta, in.alpha, astar, cu).h_k;
  real tau = std::max(tau_min_tg(in, std::max(0.0, h0), 0.0), tau_min_tg(in, 0.0, k_max));
  for (int attempt = 0; attempt <= 8; ++attempt) {
    const auto cr = common_root_k(in, tau);
    if (cr) {
      const real hk = std::max(0.0, hk_lambdak(cr->k, in.beta, in.alpha, astar, cu).h_k);
      if (tau >= tau_min_tg(in, hk, cr->k) - 1e-9 * (1.0 + std::abs(tau)))
        return certify(in, cr->k, tau, cr->lambda);
    }
    tau = (tau > 0.0) ? 2.0 * tau : 2.0 * std::abs(tau) + 1.0;
  }
  return std::nullopt;
}

namespace {

EvalRow row_from(const RateCertificate& c) {
  EvalRow r;
  r.A = c.A;
  r.beta = c.beta;
  r.alpha = c.alpha;
  r.k = c.k;
  r.tau = c.tau;
  r.lambda = c.lambda;
  r.eta = c.eta;
  r.nu_star = c.nu_star;
  r.h_k = c.h_k;
  r.lambda_k = c.lambda_k;
  r.sup_h = c.sup_h;
  r.rate = c.rate;
  r.feasible = c.feasible;
  return r;
}

void nelder_mead_2d(const std::function<real(real, real)>& fn, std::array<real, 2> x0,
                    std::array<real, 2> step, int max_eval) {
  struct Pt {
    std::array<real, 2> x;
    real f;
  };
  std::array<Pt, 3> simplex;
  int evals = 0;
  const auto eval = [&](std::array<real, 2> x) {
    ++evals;
    return fn(x[0], x[1]);
  };
  simplex[0] = {x0, eval(x0)};
  simplex[1] = {{x0[0] + step[0], x0[1]}, 0.0};
  simplex[1].f = eval(simplex[1].x);
  simplex[2] = {{x0[0], x0[1] + step[1]}, 0.0};
  simplex[2].f = eval(simplex[2].x);
  const auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(), [](const Pt& a, const Pt& b) { return a.f > b.f; });
  };
  order();
  while (evals < max_eval) {
    const real diam =
        std::max(std::abs(simplex[0].x[0] - simplex[2].x[0]) + std::abs(simplex[0].x[1] - simplex[2].x[1]),
                 std::abs(simplex[0].x[0] - simplex[1].x[0]) + std::abs(simplex[0].x[1] - simplex[1].x[1]));
    if (diam < 1e-8) break;
    const std::array<real, 2> centroid{0.5 * (simplex[0].x[0] + simplex[1].x[0]),
                                       0.5 * (simplex[0].x[1] + simplex[1].x[1])};
    const auto combine = [&](real t) {
      return std::array<real, 2>{centroid[0] + t * (simplex[2].x[0] - centroid[0]),
                                 centroid[1] + t * (simplex[2].x[1] - centroid[1])};
    };
    const auto xr = combine(-1.0);
    const real fr = eval(xr);
    if (fr > simplex[0].f) {
      const auto xe = combine(-2.0);
      const real fe = eval(xe);
      simplex[2] = (fe > fr) ? Pt{xe, fe} : Pt{xr, fr};
    } else if (fr > simplex[1].f) {
      simplex[2] = {xr, fr};
    } else {
      const auto xc = combine(0.5);
      const real fc = eval(xc);
      if (fc > simplex[2].f) {
        simplex[2] = {xc, fc};
      } else {
        for (int i = 1; i < 3; ++i) {
          simplex[i].x = {0.5 * (simplex[i].x[0] + simplex[0].x[0]),
                          0.5 * (simplex[i].x[1] + simplex[0].x[1])};
          simplex[i].f = eval(simplex[i].x);
        }
      }
    }
    order();
  }
}

}  // namespace

RateCertificate optimize(const TelegraphRateSpec& spec, const OptimizerConfig& cfg,
                         std::vector<EvalRow>* log) {
  if (!(spec.a_star > 0.0))
    throw std::invalid_argument("certify_telegraph: a_star must be positive for certification");
  if (!spec.potential.certifiable())
    throw std::invalid_argument("certify_telegraph: potential needs finite curvature bounds and c_u");

  const std::vector<real> As =
      cfg.pin_A ? std::vector<real>{*cfg.pin_A} : linspace(cfg.a_lo, cfg.a_hi, cfg.grid_a);
  const std::vector<real> betas =
      cfg.pin_beta ? std::vector<real>{*cfg.pin_beta} : linspace(cfg.beta_lo, cfg.beta_hi, cfg.grid_beta);
  const std::vector<real> alphas =
      cfg.pin_alpha ? std::vector<real>{*cfg.pin_alpha} : cfg.alpha_grid;

  bool have = false;
  RateCertificate best;
  const auto consider = [&](const RateCertificate& c) {
    if (!have) {
      best = c;
      have = true;
      return;
    }
    const real r0 = best.feasible ? best.rate : -1.0;
    const real r1 = c.feasible ? c.rate : -1.0;
    if (r1 > r0) best = c;
  };

  const auto run_cell = [&](real A, real beta, real alpha) -> real {
    if (!(beta > 1e-6) || beta > 1.0) return -2.0;
    CertInputs in{spec, A, beta, alpha, cfg.sup_grid_n};
    const auto cert = evaluate_cell(in);
    if (!cert) {
      if (log) {
        EvalRow r;
        r.A = A;
        r.beta = beta;
        r.alpha = alpha;
        r.feasible = false;
        log->push_back(r);
      }
      return -1.0;
    }
    if (log) log->push_back(row_from(*cert));
    consider(*cert);
    return cert->feasible ? cert->rate : -1.0;
  };

  for (real alpha : alphas)
    for (real A : As)
      for (real beta : betas) run_cell(A, beta, alpha);

  if (cfg.refine && have && !(cfg.pin_A && cfg.pin_beta)) {
    const real alpha = best.alpha;
    const real A0 = best.A;
    const real y0 = std::log(best.beta);
    const real dA = As.size() > 1 ? (cfg.a_hi - cfg.a_lo) / (cfg.grid_a - 1) : 0.5;
    const real dy =
        betas.size() > 1 ? (std::log(cfg.beta_hi) - std::log(cfg.beta_lo)) / (cfg.grid_beta - 1) : 0.1;
    nelder_mead_2d(
        [&](real A, real y) {
          if (y > 0.0 || y < -18.0) return -2.0;
          if (cfg.pin_A) A = *cfg.pin_A;
          real beta = std::exp(y);
          if (cfg.pin_beta) beta = *cfg.pin_beta;
          return run_cell(A, beta, alpha);
        },
        {A0, y0}, {dA, dy}, cfg.nm_max_iter);
  }

  if (!have) {
    RateCertificate c;
    c.model = "telegraph";
    c.a_star = spec.a_star;
    c.c_u = spec.potential.c_u.value_or(0.0);
    c.u2_min = spec.potential.u2_min;
    c.u2_max = spec.potential.u2_max;
    c.feasible = false;
    c.rate = 0.0;
    return c;
  }
  return best;
}

}  // namespace hypoco::telegraph
