#pragma once

#include "hypoco/types.hpp"

#include <array>
#include <optional>
#include <string>

namespace hypoco::polyalg {

// Real polynomial with coefficients in ascending degree order, c[0] + c[1] X + ...
// Degree is deduced from the highest stored nonzero coefficient.
struct Poly {
  Vec c;

  Poly() : c(Vec::Zero(1)) {}
  explicit Poly(Vec coeffs) : c(std::move(coeffs)) {
    if (c.size() == 0) throw std::invalid_argument("Poly: empty coefficient vector");
  }
  Poly(std::initializer_list<real> coeffs) : c(Vec::Zero(static_cast<Eigen::Index>(coeffs.size()))) {
    Eigen::Index i = 0;
    for (real v : coeffs) c[i++] = v;
    if (c.size() == 0) throw std::invalid_argument("Poly: empty coefficient vector");
  }

  int degree() const {
    for (Eigen::Index i = c.size() - 1; i > 0; --i)
      if (c[i] != 0.0) return static_cast<int>(i);
    return 0;
  }

  real operator()(real x) const {
    real acc = 0.0;
    for (Eigen::Index i = c.size() - 1; i >= 0; --i) acc = acc * x + c[i];
    return acc;
  }

  complex operator()(complex x) const {
    complex acc = 0.0;
    for (Eigen::Index i = c.size() - 1; i >= 0; --i) acc = acc * x + c[i];
    return acc;
  }

  Poly operator+(const Poly& o) const {
    Vec out = Vec::Zero(std::max(c.size(), o.c.size()));
    out.head(c.size()) += c;
    out.head(o.c.size()) += o.c;
    return Poly(out);
  }

  Poly operator*(real s) const { return Poly(Vec(c * s)); }

  // Multiply by the monomial X.
  Poly shift_up() const {
    Vec out = Vec::Zero(c.size() + 1);
    out.tail(c.size()) = c;
    return Poly(out);
  }

  std::string str() const;
};

// All three roots of a degree-3 polynomial, conjugate pairs exact by construction.
// Residual contract: |p(r)| <= 1e-9 * (1 + max|c| * (1 + |r|)^3) for each root.
std::array<complex, 3> cubic_roots(const Poly& p);

// Largest real part over all roots; degree must be 1, 2 or 3.
real spectral_abscissa(const Poly& p);

// The unique real root r <= 0 (counted without multiplicity, classification
// tolerance 1e-10 * (1 + |r|)), or nullopt when no such root exists or it is
// not unique.
std::optional<real> unique_nonpositive_real_root(const Poly& p);

}  // namespace hypoco::polyalg
