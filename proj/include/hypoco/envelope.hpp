#pragma once

#include "hypoco/certificate.hpp"
#include "hypoco/types.hpp"

#include <functional>
#include <vector>

namespace hypoco::envelope {

// Comparison function phi solving (d_t + lambda)[(d_t + eta)^2 + nu_star]phi = 0
// through the second-order reformulation
//   [(d_t + eta)^2 + nu_star] phi = c0 e^{-lambda t},  phi(0) = f0, phi'(0) = df0.
struct EnvelopeSpec {
  real lambda = 0.0;
  real eta = 0.0;
  real nu_star = 0.0;
  real c0 = 0.0;
  real f0 = 0.0;
  real df0 = 0.0;

  // Resonance guard: |(eta - lambda)^2 + nu_star| > 1e-12.
  void validate() const;
};

// nu_0 from the initial data, then C_0 = F''_0 + 2 eta F'_0 + (eta^2 + nu_0) F_0.
// Requires f0 > 0.
real c0_from_initial(real f0, real df0, real d2f0, real g0, const RateCertificate& cert);

// Builds the spec from a certificate and initial data. Nudges nu_star downward
// off resonance (any smaller nu_star still satisfies nu_t >= nu_star) and
// optionally clamps it to min(nu_star, 0) for unconditional domination.
EnvelopeSpec from_certificate(const RateCertificate& cert, real f0, real df0, real d2f0, real g0,
                              bool clamp_nonpositive = false);

// Closed-form solution: particular part p e^{-lambda t}, homogeneous part
// e^{-eta t} (a cos + c sin) / split exponentials / (a + c t) depending on the
// sign of nu_star, constants matched to phi(0) = f0, phi'(0) = df0.
std::function<real(real)> solve_envelope(const EnvelopeSpec& spec);

// Max |closed form - RK4| for the defining second-order equation on [0, t_end].
real rk4_deviation(const EnvelopeSpec& spec, real t_end = 20.0, int n_steps = 40000);

// min(lambda, Re(eta - sqrt(-nu_star)))
real envelope_rate(const EnvelopeSpec& spec);

// Asymptotic slope of log|phi| fitted by least squares on t in
// [10/rate, 20/rate]; when nu_star > 0 the fit uses the local maxima of |phi|
// so the oscillation dips do not skew it.
real fitted_slope(const EnvelopeSpec& spec);

// Maximal interval where F > phi on the grid, with its length compared to both
// published thresholds.
struct Excursion {
  real t_begin = 0.0;
  real t_end = 0.0;
  real length = 0.0;
  bool within_sqrt = false;   // length <= pi/sqrt(nu_star) + grid spacing
  bool within_plain = false;  // length <= pi/nu_star + grid spacing
};

struct DominationReport {
  std::vector<real> t, F, phi, corrected_bound, violation;
  real max_violation = 0.0;
  std::vector<Excursion> excursions;
  real max_excursion_length = 0.0;
  real threshold_sqrt = 0.0;   // pi/sqrt(nu_star); +inf when nu_star <= 0
  real threshold_plain = 0.0;  // pi/nu_star; +inf when nu_star <= 0
  real tol = 0.0;              // 1e-8 (1 + F_0)
  bool dominated = false;      // max_violation <= tol
};

// nu_star <= 0: pointwise check F <= phi. nu_star > 0: checks the
// sup-corrected bound F_t <= phi_t + e^{-eta t} sup_{s<=t} e^{eta s}(phi_s - F_s)
// and lists the excursions where F > phi. Requires grid spacing at most 1% of
// the oscillation period when nu_star > 0.
DominationReport check_domination(const DecaySeries& series, const EnvelopeSpec& spec);

struct InitialData {
  real f0 = 0.0, df0 = 0.0, d2f0 = 0.0, g0 = 0.0;
};

// Boundary difference stencils (4th/3rd order) on the five leading points of a
// measured series, for pipelines without exact quadratic-form initials.
InitialData initials_from_series(const DecaySeries& series);

}  // namespace hypoco::envelope
