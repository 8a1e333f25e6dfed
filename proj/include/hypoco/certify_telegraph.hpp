#pragma once

#include "hypoco/certificate.hpp"
#include "hypoco/model.hpp"

#include <optional>

namespace hypoco::telegraph {

struct CertInputs {
  TelegraphRateSpec spec;  // needs a_star > 0, finite u2 bounds and c_u
  real A = 0.0;
  real beta = 1.0;         // in (0, 1]
  real alpha = 0.5;        // in (0, 1)
  int sup_grid_n = 20001;

  void validate() const;
};

// Splitting weight h_k >= 0 and the matching drift lambda_k for a given k.
struct HkLambdak {
  real h_k = 0.0;
  real lambda_k = 0.0;
};
HkLambdak hk_lambdak(real k, real beta, real alpha, real a_star, real c_u);

// Pointwise H(x) for splitting weight h; the admissible tau is any certified
// upper bound of (H + k) / (2s).
real eval_H(const CertInputs& in, real h, real x);

// Certified sup of H over the sample window (grid max + Lipschitz margin).
real build_H_sup(const CertInputs& in, real h);

// Certified upper bound for sup_x (H(x) + k) / (2 s(x)).
real tau_min_tg(const CertInputs& in, real h, real k);

struct CommonRoot {
  real k = 0.0;
  real lambda = 0.0;
};

// Bisection over k in [0, k_max], k_max = 4 a_star c_u (1 - beta), matching
// the nonpositive root of Q3 with -lambda_k. tau stays fixed during the scan.
std::optional<CommonRoot> common_root_k(const CertInputs& in, real tau);

RateCertificate certify(const CertInputs& in, real k, real tau, real lambda);

// Exact decay rate of F_t = ||f_t||^2 for the constant-rate torus semigroup,
// from the mode blocks with |m| <= m_max. Twice the slowest mode amplitude,
// on the same scale as the certified rate.
real exact_constant_rate(real a, int m_max);

RateCertificate optimize(const TelegraphRateSpec& spec, const OptimizerConfig& cfg,
                         std::vector<EvalRow>* log = nullptr);

// One (A, beta, alpha) cell: tau from the endpoint maxima of tau_min_tg over
// [0, k_max] (convex in k), retry-doubling on common-root failure, final
// certificate re-verified against tau_min_tg at the accepted k.
std::optional<RateCertificate> evaluate_cell(const CertInputs& in);

}  // namespace hypoco::telegraph
