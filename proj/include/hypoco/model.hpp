#pragma once

#include "hypoco/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>

namespace hypoco {

using ScalarFn = std::function<real(real)>;

struct Domain {
  enum class Kind { Line, Torus };
  Kind kind = Kind::Line;
  real ell = 0.0;  // circumference, Torus only
};

// Confining potential with certified curvature bounds. Callables may be empty
// for bounds-only specs (certification never evaluates them pointwise).
struct PotentialSpec {
  std::string name;
  Domain domain;
  ScalarFn u, du, d2u;
  real u2_min = 0.0;                  // inf U''
  real u2_max = 0.0;                  // sup U'' (+inf allowed, simulation only)
  std::optional<real> c_u;            // Poincare constant of e^{-U} dx
  std::vector<real> params;

  bool has_callables() const { return static_cast<bool>(u); }
  bool certifiable() const { return c_u.has_value() && std::isfinite(u2_min) && std::isfinite(u2_max); }

  static PotentialSpec from_bounds(real c_u_, real u2_min_, real u2_max_);
};

// name in {quadratic, double_well, cosine_torus}; params as documented per
// built-in. c_u_override supplies the Poincare constant when no closed form
// exists; it is recorded as an assumption by downstream certificates.
PotentialSpec build_potential(const std::string& name, std::span<const real> params,
                              std::optional<real> c_u_override = {});

// Grid maximum plus Lipschitz safety margin lip * spacing / 2; an upper bound
// on sup f over [lo, hi] whenever lip bounds |f'|.
real certified_sup(const ScalarFn& f, real lo, real hi, int grid_n, real lip);

// Exact sup of |U'| over [lo, hi] for the built-in potentials (endpoints plus
// the critical points of U'). Throws for specs without a closed form.
real sup_abs_du(const PotentialSpec& p, real lo, real hi);

struct KfpParams {
  real v = 1.0;
  real b = 1.0;
  KfpParams() = default;
  KfpParams(real v_, real b_) : v(v_), b(b_) {
    if (!(v > 0.0) || !(b > 0.0)) throw std::invalid_argument("KfpParams: v and b must be positive");
  }
};

// Jump rates a(x, +1), a(x, -1) with s = a_plus + a_minus. Compatibility with
// the invariant measure requires U' = a_plus - a_minus, which build-time
// checks enforce on a sample grid. Curvature metadata d2s_max (sup |s''|) and
// u3_max (sup |U'''|) defaults to 0, exact for constant rates; certification
// folds both into the Lipschitz budget of its sup bound.
struct TelegraphRateSpec {
  PotentialSpec potential;
  ScalarFn a_plus, a_minus;
  real a_star = 0.0;   // inf s
  real s_max = 0.0;    // sup s
  real ds_max = 0.0;   // sup |s'|
  real d2s_max = 0.0;
  real u3_max = 0.0;
  bool smooth_rates = true;  // s is C^1; certification refuses kinked rates

  // Upper bound on each individual rate over [lo, hi]; empty means callers
  // fall back to the global s_max.
  std::function<real(real, real)> rate_window_bound;

  real s(real x) const { return a_plus(x) + a_minus(x); }
  real ds(real x) const;

  // Sampling window: one period on the torus, a fixed reference window on the line.
  std::pair<real, real> sample_window() const;
};

// Builds the spec from rate callables, filling s-bounds on a sample grid when
// not supplied. Validates a >= 0, a_plus - a_minus = U' and the declared
// bounds on a 10^4-point grid; violations raise.
TelegraphRateSpec build_telegraph_spec(PotentialSpec potential, ScalarFn a_plus, ScalarFn a_minus,
                                       std::optional<real> a_star = {}, std::optional<real> s_max = {},
                                       std::optional<real> ds_max = {});

}  // namespace hypoco
