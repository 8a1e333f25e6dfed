#pragma once

#include "hypoco/polyalg.hpp"
#include "hypoco/types.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hypoco {

// Certified exponential L^2 decay bound F_t <= envelope with asymptotic rate
// `rate`. Produced by the kinetic Fokker-Planck and telegraph certifiers; the
// shared fields drive the envelope construction and the validation backends.
struct RateCertificate {
  std::string model;  // "kfp" or "telegraph"

  // Echo of inputs.
  real v = 1.0, b = 1.0;        // kfp transport/friction scales
  real a_star = 0.0;            // telegraph inf s (0 for kfp)
  real c_u = 0.0;
  real u2_min = 0.0, u2_max = 0.0;
  real A = 0.0, beta = 1.0;
  real alpha = 0.0;             // telegraph splitting parameter (0 for kfp)
  std::string variant;          // kfp P-variant: "generalized" or "base"

  // Certified quantities.
  real k = 0.0, tau = 0.0, lambda = 0.0;
  real u = 0.0, v_hat = 0.0, w = 0.0;
  real eta = 0.0, nu_star = 0.0;
  real cu_div = 0.0;            // c_u/(2b) for kfp, c_u/(2 a_star) for telegraph
  polyalg::Poly q1, q3, pi;
  real rate = 0.0;
  bool feasible = false;

  // Telegraph extras.
  real h_k = 0.0, lambda_k = 0.0, sup_h = 0.0;

  std::vector<std::pair<std::string, real>> assumptions;
};

namespace detail {

// Common tail of certificate assembly. Expects model, inputs echo, k, tau,
// lambda, w, c_u and cu_div to be populated; fills the derived quantities,
// the three polynomials and the feasibility verdict.
inline void finish_rate_certificate(RateCertificate& c, real q1_root) {
  c.u = c.A - c.lambda;
  c.v_hat = c.tau - c.lambda * c.u;
  c.eta = 0.5 * (c.u + c.w * c.cu_div);
  c.nu_star = c.v_hat + c.w * c.c_u - c.eta * c.eta;
  c.q3 = polyalg::Poly{c.k, c.tau, c.A, 1.0};
  c.q1 = polyalg::Poly{-c.w * q1_root, c.w};
  c.pi = c.q3 + (c.q1 * c.c_u) + (c.q1.shift_up() * c.cu_div);
  const real absc = polyalg::spectral_abscissa(c.pi);
  const real tol =
      1e-10 * (1.0 + std::abs(c.lambda) + std::abs(c.eta) + std::sqrt(std::abs(c.nu_star)));
  c.feasible = absc <= tol;
  c.rate = c.feasible ? std::max(0.0, -absc) : 0.0;
}

}  // namespace detail

// One optimizer evaluation, logged for the evals CSV.
struct EvalRow {
  real A = 0.0, beta = 0.0, alpha = 0.0;
  real k = 0.0, tau = 0.0, lambda = 0.0, eta = 0.0, nu_star = 0.0;
  real h_k = 0.0, lambda_k = 0.0, sup_h = 0.0;
  real rate = 0.0;
  bool feasible = false;
};

struct OptimizerConfig {
  real a_lo = -5.0, a_hi = 50.0;
  int grid_a = 56;
  real beta_lo = 0.05, beta_hi = 1.0;
  int grid_beta = 40;
  bool refine = true;
  int nm_max_iter = 400;
  std::optional<real> pin_A;
  std::optional<real> pin_beta;
  std::optional<real> pin_alpha;      // telegraph only
  std::vector<real> alpha_grid{0.25, 0.5, 0.75, 0.9};  // telegraph only
  int sup_grid_n = 20001;             // telegraph certified-sup grid
};

}  // namespace hypoco
