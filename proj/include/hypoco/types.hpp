#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace hypoco {

using real = double;
using complex = std::complex<real>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

inline std::vector<real> linspace(real lo, real hi, int n) {
  if (n < 2) throw std::invalid_argument("linspace: need at least 2 points");
  std::vector<real> out(static_cast<size_t>(n));
  const real h = (hi - lo) / static_cast<real>(n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = lo + h * i;
  out.back() = hi;
  return out;
}

// Squared-norm decay data on a time grid: F_t = |f_t|^2, G_t = |d_x f_t|^2.
// G and se (standard errors) are optional; empty means absent.
struct DecaySeries {
  std::vector<real> t;
  std::vector<real> F;
  std::vector<real> G;
  std::vector<real> se;

  DecaySeries() = default;
  DecaySeries(std::vector<real> t_, std::vector<real> F_, std::vector<real> G_ = {})
      : t(std::move(t_)), F(std::move(F_)), G(std::move(G_)) {
    validate();
  }

  void validate() const {
    if (t.size() != F.size()) throw std::invalid_argument("DecaySeries: length mismatch");
    if (!G.empty() && G.size() != t.size())
      throw std::invalid_argument("DecaySeries: G length mismatch");
    if (!se.empty() && se.size() != t.size())
      throw std::invalid_argument("DecaySeries: se length mismatch");
    for (size_t i = 0; i + 1 < t.size(); ++i)
      if (!(t[i] < t[i + 1]))
        throw std::invalid_argument("DecaySeries: time grid not strictly increasing");
    for (real f : F)
      if (!(f >= 0.0)) throw std::invalid_argument("DecaySeries: F must be nonnegative");
  }

  size_t size() const { return t.size(); }
};

}  // namespace hypoco
