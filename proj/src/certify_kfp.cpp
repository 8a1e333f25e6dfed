#include "hypoco/certify_kfp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace hypoco::kfp {

using polyalg::Poly;

void CertInputs::validate() const {
  if (!(beta > 0.0) || beta > 1.0) throw std::invalid_argument("certify_kfp: beta must lie in (0, 1]");
  if (!pot.certifiable())
    throw std::invalid_argument("certify_kfp: potential needs finite curvature bounds and c_u");
  if (variant == PVariant::Base && (par.v != 1.0 || par.b != 1.0))
    throw std::invalid_argument("certify_kfp: base variant requires v = b = 1");
}

Poly build_P(const CertInputs& in) {
  in.validate();
  const real A = in.A, beta = in.beta, v = in.par.v, b = in.par.b;
  const real u2min = in.pot.u2_min, u2max = in.pot.u2_max;
  const real u2abs = std::max(std::abs(u2min), std::abs(u2max));
  if (in.variant == PVariant::Base) {
    const real c2 = A + 9.0 / beta;
    const real c1 = (18.0 + 6.0 * A) / beta + 4.0 * u2min;
    const real m = std::max(std::abs(3.0 + A + beta * u2min), std::abs(3.0 + A + beta * u2max));
    const real c0 = m * m / beta;
    return Poly{c0, c1, c2, 1.0};
  }
  const real c2 = A + 9.0 * b * b / beta;
  const real lin = (6.0 * b - 4.0) * v * v;
  const real c1 = 6.0 * b * b * (3.0 * b + A) / beta + std::min(lin * u2min, lin * u2max);
  const real base = 3.0 * b * b + A * b + v * v * beta * u2abs;
  const real c0 = base * base / beta;
  return Poly{c0, c1, c2, 1.0};
}

real tau_min(const Poly& P, real k, real b) {
  if (P.degree() != 3) throw std::invalid_argument("tau_min: P must be cubic");
  if (!(b > 0.0)) throw std::invalid_argument("tau_min: b must be positive");
  if (!(k >= 0.0)) throw std::invalid_argument("tau_min: k must be nonnegative");
  const real c2 = P.c[2], c1 = P.c[1], c0 = P.c[0];
  // Beyond X <= -2bN the cubic term dominates and P(X) + k < 0, so the sup is
  // attained among n <= N.
  const real m = std::max({std::abs(c2), std::sqrt(std::abs(c1)), std::cbrt(std::abs(c0) + k)});
  const int N = std::max(1, static_cast<int>(std::ceil((1.0 + 3.0 * m) / (2.0 * b))) + 1);
  real best = -std::numeric_limits<real>::infinity();
  for (int n = 1; n <= N; ++n) {
    const real x = 2.0 * b * n;
    best = std::max(best, (P(-x) + k) / x);
  }
  return best;
}

namespace {

real q1_root(const CertInputs& in, real k) {
  const real v = in.par.v, b = in.par.b, beta = in.beta, cu = *in.pot.c_u;
  return -2.0 * b * (1.0 / beta - 1.0) + k / (2.0 * v * v * cu * beta);
}

Poly make_q3(const CertInputs& in, real tau, real k) { return Poly{k, tau, in.A, 1.0}; }

}  // namespace

std::optional<CommonRoot> common_root_k(const CertInputs& in, real tau) {
  in.validate();
  const real v = in.par.v, b = in.par.b, beta = in.beta, cu = *in.pot.c_u;
  const real k_max = 4.0 * v * v * cu * b * (1.0 - beta);
  if (k_max <= 0.0) return CommonRoot{0.0, 0.0};  // beta = 1

  const auto root3 = [&](real k) { return polyalg::unique_nonpositive_real_root(make_q3(in, tau, k)); };

  // Uniqueness must hold across the whole interval for the bisection to track
  // a continuous root branch.
  for (int i = 0; i <= 32; ++i) {
    if (!root3(k_max * i / 32.0)) return std::nullopt;
  }

  const auto g = [&](real k) -> std::optional<real> {
    const auto r = root3(k);
    if (!r) return std::nullopt;
    return *r - q1_root(in, k);
  };

  const real gtol = std::min(1e-10, 1e-9 / (v * v * beta));
  real lo = 0.0, hi = k_max;
  auto glo = g(lo), ghi = g(hi);
  if (!glo || !ghi) return std::nullopt;
  if (*glo < -gtol) return std::nullopt;  // no sign change to bracket
  if (*ghi > gtol) return std::nullopt;

  real k = hi;
  real gk = *ghi;
  for (int it = 0; it < 200 && std::abs(gk) > gtol; ++it) {
    const real mid = 0.5 * (lo + hi);
    const auto gm = g(mid);
    if (!gm) return std::nullopt;
    k = mid;
    gk = *gm;
    if (gk > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-18 * (1.0 + k_max)) break;
  }
  if (std::abs(gk) > 1e-10 * (1.0 + std::abs(q1_root(in, k)))) return std::nullopt;
  const auto r = root3(k);
  if (!r) return std::nullopt;
  return CommonRoot{k, std::max(0.0, -*r)};
}

RateCertificate certify(const CertInputs& in, real k, real tau, real lambda) {
  in.validate();
  const real v = in.par.v, b = in.par.b, beta = in.beta, cu = *in.pot.c_u, A = in.A;

  RateCertificate c;
  c.model = "kfp";
  c.v = v;
  c.b = b;
  c.c_u = cu;
  c.u2_min = in.pot.u2_min;
  c.u2_max = in.pot.u2_max;
  c.A = A;
  c.beta = beta;
  c.variant = variant_name(in.variant);
  c.k = k;
  c.tau = tau;
  c.lambda = lambda;

  c.w = v * v * beta;
  c.cu_div = cu / (2.0 * b);
  detail::finish_rate_certificate(c, q1_root(in, k));

  c.assumptions = {{"c_u", cu}, {"u2_min", c.u2_min}, {"u2_max", c.u2_max}};
  return c;
}

std::optional<RateCertificate> evaluate_cell(const CertInputs& in) {
  const Poly P = build_P(in);
  const real k_max = 4.0 * in.par.v * in.par.v * *in.pot.c_u * in.par.b * (1.0 - in.beta);
  real tau = tau_min(P, k_max, in.par.b);
  for (int attempt = 0; attempt <= 8; ++attempt) {
    const auto cr = common_root_k(in, tau);
    if (cr) return certify(in, cr->k, tau, cr->lambda);
    tau = (tau > 0.0) ? 2.0 * tau : 2.0 * std::abs(tau) + 1.0;
  }
  return std::nullopt;
}

namespace {

struct BestTracker {
  bool have = false;
  RateCertificate cert;

  void consider(const RateCertificate& c) {
    if (!have) {
      cert = c;
      have = true;
      return;
    }
    const real r0 = cert.feasible ? cert.rate : -1.0;
    const real r1 = c.feasible ? c.rate : -1.0;
    if (r1 > r0) cert = c;
  }
};

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

// Deterministic Nelder-Mead on R^2, maximizing fn. Standard reflection /
// expansion / contraction / shrink with stable ordering.
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
    const real diam = std::max(std::abs(simplex[0].x[0] - simplex[2].x[0]) + std::abs(simplex[0].x[1] - simplex[2].x[1]),
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
          simplex[i].x = {0.5 * (simplex[i].x[0] + simplex[0].x[0]), 0.5 * (simplex[i].x[1] + simplex[0].x[1])};
          simplex[i].f = eval(simplex[i].x);
        }
      }
    }
    order();
  }
}

}  // namespace

RateCertificate optimize(const PotentialSpec& pot, const KfpParams& par, const OptimizerConfig& cfg,
                         PVariant variant, std::vector<EvalRow>* log) {
  if (!pot.certifiable())
    throw std::invalid_argument("certify_kfp: potential needs finite curvature bounds and c_u");

  const std::vector<real> As = cfg.pin_A ? std::vector<real>{*cfg.pin_A}
                                         : linspace(cfg.a_lo, cfg.a_hi, cfg.grid_a);
  const std::vector<real> betas = cfg.pin_beta ? std::vector<real>{*cfg.pin_beta}
                                               : linspace(cfg.beta_lo, cfg.beta_hi, cfg.grid_beta);

  BestTracker best;
  const auto run_cell = [&](real A, real beta) -> real {
    if (!(beta > 1e-6) || beta > 1.0) return -1.0;
    CertInputs in{pot, par, A, beta, variant};
    const auto cert = evaluate_cell(in);
    if (!cert) {
      if (log) {
        EvalRow r;
        r.A = A;
        r.beta = beta;
        r.feasible = false;
        log->push_back(r);
      }
      return -1.0;
    }
    if (log) log->push_back(row_from(*cert));
    best.consider(*cert);
    return cert->feasible ? cert->rate : -1.0;
  };

  for (real A : As)
    for (real beta : betas) run_cell(A, beta);

  if (cfg.refine && best.have && !(cfg.pin_A && cfg.pin_beta)) {
    const real A0 = best.cert.A;
    const real y0 = std::log(best.cert.beta);
    const real dA = As.size() > 1 ? (cfg.a_hi - cfg.a_lo) / (cfg.grid_a - 1) : 0.5;
    const real dy = betas.size() > 1 ? (std::log(cfg.beta_hi) - std::log(cfg.beta_lo)) / (cfg.grid_beta - 1) : 0.1;
    nelder_mead_2d(
        [&](real A, real y) {
          if (y > 0.0 || y < -18.0) return -2.0;
          if (cfg.pin_A) A = *cfg.pin_A;
          real beta = std::exp(y);
          if (cfg.pin_beta) beta = *cfg.pin_beta;
          return run_cell(A, beta);
        },
        {A0, y0}, {dA, dy}, cfg.nm_max_iter);
  }

  if (!best.have) {
    // Nothing evaluated successfully; report an infeasible stub.
    RateCertificate c;
    c.model = "kfp";
    c.v = par.v;
    c.b = par.b;
    c.c_u = pot.c_u.value_or(0.0);
    c.u2_min = pot.u2_min;
    c.u2_max = pot.u2_max;
    c.variant = variant_name(variant);
    c.feasible = false;
    c.rate = 0.0;
    return c;
  }
  return best.cert;
}

}  // namespace hypoco::kfp
