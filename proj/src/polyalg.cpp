#include "hypoco/polyalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hypoco::polyalg {

std::string Poly::str() const {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (i) os << ", ";
    os << c[i];
  }
  return os.str();
}

namespace {

// One Newton step cannot leave the basin near a simple root; a handful of
// iterations tightens the closed-form seed to full precision.
complex polish(const Poly& p, complex r) {
  Poly dp;
  dp.c = Vec::Zero(std::max<Eigen::Index>(1, p.c.size() - 1));
  for (Eigen::Index i = 1; i < p.c.size(); ++i) dp.c[i - 1] = p.c[i] * static_cast<real>(i);
  for (int it = 0; it < 8; ++it) {
    const complex f = p(r);
    const complex d = dp(r);
    if (std::abs(d) < 1e-300) break;
    const complex step = f / d;
    r -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(r))) break;
  }
  return r;
}

std::array<complex, 2> quadratic_roots(real b, real c) {
  // Roots of X^2 + bX + c with the numerically stable q-formula.
  const real disc = b * b - 4.0 * c;
  if (disc >= 0.0) {
    const real sq = std::sqrt(disc);
    const real q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    real r1 = q;
    real r2 = (q != 0.0) ? c / q : -b - q;
    return {complex(r1, 0.0), complex(r2, 0.0)};
  }
  const real re = -0.5 * b;
  const real im = 0.5 * std::sqrt(-disc);
  return {complex(re, im), complex(re, -im)};
}

}  // namespace

std::array<complex, 3> cubic_roots(const Poly& p) {
  if (p.degree() != 3) throw std::invalid_argument("cubic_roots: degree must be 3");
  const real a3 = p.c[3], a2 = p.c[2], a1 = p.c[1], a0 = p.c[0];
  const real A = a2 / a3, B = a1 / a3, C = a0 / a3;

  if (C == 0.0) {
    // Exact zero root; the rest is a quadratic.
    const auto q = quadratic_roots(A, B);
    return {complex(0.0, 0.0), q[0], q[1]};
  }

  // Depressed form t^3 + pt + q with X = t - A/3.
  const real shift = A / 3.0;
  const real pp = B - A * A / 3.0;
  const real qq = 2.0 * A * A * A / 27.0 - A * B / 3.0 + C;

  real tr;  // one real root of the depressed cubic
  const real disc = -(4.0 * pp * pp * pp + 27.0 * qq * qq);
  if (disc > 0.0) {
    // Three distinct real roots: trigonometric form, pick any.
    const real m = 2.0 * std::sqrt(-pp / 3.0);
    const real arg = std::clamp(3.0 * qq / (pp * m), -1.0, 1.0);
    const real theta = std::acos(arg) / 3.0;
    tr = m * std::cos(theta);
  } else {
    // Cardano; |u| >= |v| branch keeps cancellation in check.
    const real rad = qq * qq / 4.0 + pp * pp * pp / 27.0;
    const real s = std::sqrt(std::max(rad, 0.0));
    const real u = std::cbrt(-qq / 2.0 + (qq <= 0.0 ? s : -s));
    const real v = (u != 0.0) ? -pp / (3.0 * u) : std::cbrt(-qq);
    tr = u + v;
  }

  complex r0 = polish(p, complex(tr - shift, 0.0));
  // A real cubic always has a real root; the polished value may carry a tiny
  // imaginary part from intermediate arithmetic.
  real x0 = r0.real();
  {
    // One more Newton in pure real arithmetic.
    for (int it = 0; it < 4; ++it) {
      const real f = p(x0);
      const real d = 3.0 * a3 * x0 * x0 + 2.0 * a2 * x0 + a1;
      if (std::abs(d) < 1e-300) break;
      x0 -= f / d;
    }
  }

  // Deflate by (X - x0): X^3+AX^2+BX+C = (X-x0)(X^2 + bX + c).
  const real b = A + x0;
  const real c = B + x0 * b;
  const auto q = quadratic_roots(b, c);
  complex r1 = q[0], r2 = q[1];
  if (r1.imag() == 0.0) {
    r1 = polish(p, r1);
    r2 = polish(p, r2);
    r1 = complex(r1.real(), 0.0);
    r2 = complex(r2.real(), 0.0);
  }
  return {complex(x0, 0.0), r1, r2};
}

real spectral_abscissa(const Poly& p) {
  const int deg = p.degree();
  if (deg < 1 || deg > 3) throw std::invalid_argument("spectral_abscissa: degree must be 1, 2 or 3");
  if (deg == 1) return -p.c[0] / p.c[1];
  if (deg == 2) {
    const auto r = quadratic_roots(p.c[1] / p.c[2], p.c[0] / p.c[2]);
    return std::max(r[0].real(), r[1].real());
  }
  const auto r = cubic_roots(p);
  return std::max({r[0].real(), r[1].real(), r[2].real()});
}

std::optional<real> unique_nonpositive_real_root(const Poly& p) {
  const int deg = p.degree();
  std::vector<complex> roots;
  if (deg == 1) {
    roots = {complex(-p.c[0] / p.c[1], 0.0)};
  } else if (deg == 2) {
    const auto r = quadratic_roots(p.c[1] / p.c[2], p.c[0] / p.c[2]);
    roots = {r[0], r[1]};
  } else if (deg == 3) {
    const auto r = cubic_roots(p);
    roots = {r[0], r[1], r[2]};
  } else {
    throw std::invalid_argument("unique_nonpositive_real_root: degree must be 1, 2 or 3");
  }

  std::vector<real> candidates;
  for (const complex& r : roots) {
    const real tol = 1e-10 * (1.0 + std::abs(r));
    if (std::abs(r.imag()) > tol) continue;
    if (r.real() > tol) continue;
    candidates.push_back(std::min(r.real(), 0.0));
  }
  if (candidates.empty()) return std::nullopt;
  std::sort(candidates.begin(), candidates.end());
  // Distinct up to clustering tolerance; a multiple root counts once.
  std::vector<real> distinct{candidates.front()};
  for (real r : candidates)
    if (std::abs(r - distinct.back()) > 1e-8 * (1.0 + std::abs(r))) distinct.push_back(r);
  if (distinct.size() != 1) return std::nullopt;
  return distinct.front();
}

}  // namespace hypoco::polyalg
