#pragma once

#include "hypoco/certificate.hpp"
#include "hypoco/model.hpp"

#include <optional>

namespace hypoco::kfp {

enum class PVariant { Generalized, Base };

inline const char* variant_name(PVariant v) { return v == PVariant::Base ? "base" : "generalized"; }

struct CertInputs {
  PotentialSpec pot;           // needs finite u2 bounds and c_u
  KfpParams par;
  real A = 0.0;
  real beta = 1.0;             // in (0, 1]
  PVariant variant = PVariant::Generalized;

  void validate() const;
};

// Cubic P whose values at -2bn control the admissible tau. Base variant only
// valid at v = b = 1.
polyalg::Poly build_P(const CertInputs& in);

// Smallest admissible tau: max over integers n >= 1 of (P(-2bn) + k) / (2bn).
real tau_min(const polyalg::Poly& P, real k, real b);

struct CommonRoot {
  real k = 0.0;
  real lambda = 0.0;
};

// Bisection for the k in [0, k_max] at which Q3(X) = X^3 + A X^2 + tau X + k
// and Q1 share their nonpositive root; k_max = 4 v^2 c_u b (1 - beta).
// Fails (nullopt) when Q3 loses root uniqueness anywhere on the interval.
std::optional<CommonRoot> common_root_k(const CertInputs& in, real tau);

// Assembles the certificate from a common-root triple.
RateCertificate certify(const CertInputs& in, real k, real tau, real lambda);

// Grid search over (A, beta) with optional Nelder-Mead refinement in
// (A, log beta). Deterministic; ties break toward smaller A, then smaller beta.
RateCertificate optimize(const PotentialSpec& pot, const KfpParams& par, const OptimizerConfig& cfg,
                         PVariant variant = PVariant::Generalized, std::vector<EvalRow>* log = nullptr);

// Single deterministic evaluation of one (A, beta) cell: tau from tau_min at
// k_max with retry-doubling (8 attempts) on common-root failure.
std::optional<RateCertificate> evaluate_cell(const CertInputs& in);

}  // namespace hypoco::kfp
