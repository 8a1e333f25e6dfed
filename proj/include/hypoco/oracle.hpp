#pragma once

#include "hypoco/certificate.hpp"
#include "hypoco/model.hpp"
#include "hypoco/types.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace hypoco::oracle {

using ResidualReport = std::vector<std::pair<std::string, real>>;

// Dense operator matrices on the orthonormal Hermite tensor basis
// h_i(x) g_j(y), total degree i + j <= N, for the quadratic potential
// U = omega x^2 / 2. The generator preserves total degree, so evolution of
// polynomial data of degree <= N is truncation-exact. Adjoints are plain
// transposes (orthonormal basis).
struct OperatorSet {
  int N = 0;
  real omega = 1.0;
  KfpParams par;
  Mat L, K, R, Rstar, Dx, Dy;
  std::vector<std::pair<int, int>> degrees;  // (i, j) per basis index
  std::vector<int> interior;                 // indices with i + j <= N - 2

  int dim() const { return static_cast<int>(L.rows()); }
  int index(int i, int j) const;

  // Coefficient vector of x^px y^py (not centered).
  Vec monomial(int px, int py) const;
  // Removes the mean component (coefficient on the constant basis vector).
  Vec centered(Vec f) const;
};

OperatorSet build_kfp_operators(real omega, const KfpParams& par, int N = 12);

// Residual norms of the commutator and quadratic-form identities, measured on
// the sub-block of total degree <= N - 2 where truncation cannot reach.
ResidualReport bracket_residuals(const OperatorSet& ops);

// f_t = exp(t L) f0 with F_t = |f_t|^2, G_t = |Dx f_t|^2. f0 must have zero
// mean coefficient.
DecaySeries evolve(const OperatorSet& ops, const Vec& f0, const std::vector<real>& tgrid);

// Quadratic-form values of F', F'', F''', G' against Richardson finite
// differences of the evolved series (steps 1e-3 and 5e-4) at 20 sample times;
// reported residuals are normalized by the largest sampled magnitude of each
// derivative order. Finite differences run in extended precision so the
// third-difference quotient stays well above rounding noise.
ResidualReport derivative_checks(const OperatorSet& ops, const Vec& f0);

// Theoretical comparison rate 1 - sqrt((1 - 4 v^2 u2 / b)_+).
real r_theor(const KfpParams& par, real u2);

// One Fourier mode of the constant-rate torus telegraph semigroup on
// span{e^{imx}, y e^{imx}}.
struct ModeBlock {
  int m = 0;
  real a = 0.0;
  MatC block;  // [[0, i m], [i m, -2a]]

  // Roots of z^2 + 2 a z + m^2, computed from the assembled matrix.
  std::array<complex, 2> eigenvalues() const;
};

ModeBlock make_mode_block(real a, int m);

// Real operator matrices for the constant-rate torus telegraph on the
// mean-zero basis {sqrt(2) cos(mx), sqrt(2) sin(mx)} x {1, y} for m <= m_max,
// plus the pure y mode. Constant coefficients keep every mode block closed, so
// no truncation edge exists.
struct TelegraphOperatorSet {
  int m_max = 0;
  real a = 0.0;
  Mat L, K, R, Rstar, Dx, Dy, PiV, PiPerp;

  int dim() const { return static_cast<int>(L.rows()); }
};

TelegraphOperatorSet build_telegraph_operators(real a, int m_max = 16);

ResidualReport bracket_residuals(const TelegraphOperatorSet& ops);

// Initial mode data: coefficient v[m-1] on e^{imx}, perp[m-1] on y e^{imx}
// (conjugate modes implied; the function is real), y_mode on the plain y.
struct TorusInitial {
  real y_mode = 0.0;
  VecC v;
  VecC perp;
};

struct TorusSeries {
  DecaySeries series;
  real exact_rate = 0.0;
};

// Per-mode 2x2 evolution; exact rate = min(2a, min over modes of the slowest
// block eigenvalue decay).
TorusSeries telegraph_torus_series(real a, int m_max, const TorusInitial& f0,
                                   const std::vector<real>& tgrid);

struct InequalityReport {
  real max_residual = 0.0;   // max over interior grid of (d_t + lambda) W_t
  real tol = 0.0;            // 1e-6 (1 + F_0) (1 + rate)^3
  real min_nu_margin = 0.0;  // min over grid of nu_t - nu_star
  real min_coercivity = 0.0; // min over grid of (G - cu_div F') / F
  size_t n_checked = 0;
};

// Third-order inequality residual on a fine uniform grid: forms
// W = F'' + u F' + v_hat F + w G by centered differences and checks
// W' + lambda W <= tol, plus the pointwise coercivity nu_t >= nu_star.
// Stencils use stride 8 so the difference quotients sit far above rounding
// noise while truncation stays negligible.
InequalityReport inequality_residual(const DecaySeries& series, const RateCertificate& cert);

}  // namespace hypoco::oracle
