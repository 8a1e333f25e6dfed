#include "hypoco/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hypoco {

namespace {

constexpr real kPi = 3.14159265358979323846;

std::pair<real, real> check_window(const PotentialSpec& p) {
  if (p.domain.kind == Domain::Kind::Torus) return {0.0, p.domain.ell};
  return {-10.0, 10.0};
}

// Construction-time spot check: declared curvature bounds must hold on a
// 10^4-point grid and du/d2u must be consistent with u by central differences.
void spot_check(const PotentialSpec& p) {
  if (!p.has_callables()) return;
  const auto [lo, hi] = check_window(p);
  const int n = 10000;
  const real h = 1e-5;
  for (int i = 0; i < n; ++i) {
    const real x = lo + (hi - lo) * (i + 0.5) / n;
    const real d2 = p.d2u(x);
    if (d2 < p.u2_min - 1e-7 * (1.0 + std::abs(d2)) || d2 > p.u2_max + 1e-7 * (1.0 + std::abs(d2)))
      throw std::invalid_argument("PotentialSpec: curvature bound violated at x=" + std::to_string(x));
    if (i % 100 == 0) {
      const real fd1 = (p.u(x + h) - p.u(x - h)) / (2.0 * h);
      if (std::abs(fd1 - p.du(x)) > 1e-5 * (1.0 + std::abs(fd1)))
        throw std::invalid_argument("PotentialSpec: du inconsistent with u at x=" + std::to_string(x));
      const real fd2 = (p.du(x + h) - p.du(x - h)) / (2.0 * h);
      if (std::abs(fd2 - d2) > 1e-5 * (1.0 + std::abs(fd2)))
        throw std::invalid_argument("PotentialSpec: d2u inconsistent with du at x=" + std::to_string(x));
    }
  }
}

}  // namespace

PotentialSpec PotentialSpec::from_bounds(real c_u_, real u2_min_, real u2_max_) {
  if (!(c_u_ > 0.0)) throw std::invalid_argument("PotentialSpec: c_u must be positive");
  if (!(u2_min_ <= u2_max_)) throw std::invalid_argument("PotentialSpec: u2_min > u2_max");
  PotentialSpec p;
  p.name = "bounds_only";
  p.u2_min = u2_min_;
  p.u2_max = u2_max_;
  p.c_u = c_u_;
  return p;
}

PotentialSpec build_potential(const std::string& name, std::span<const real> params,
                              std::optional<real> c_u_override) {
  PotentialSpec p;
  p.name = name;
  p.params.assign(params.begin(), params.end());

  if (name == "quadratic") {
    if (params.size() != 1) throw std::invalid_argument("quadratic: expected params {omega}");
    const real omega = params[0];
    if (!(omega > 0.0)) throw std::invalid_argument("quadratic: omega must be positive");
    p.domain = {Domain::Kind::Line, 0.0};
    p.u = [omega](real x) { return 0.5 * omega * x * x; };
    p.du = [omega](real x) { return omega * x; };
    p.d2u = [omega](real) { return omega; };
    p.u2_min = p.u2_max = omega;
    p.c_u = c_u_override.value_or(omega);
  } else if (name == "double_well") {
    if (params.size() != 2) throw std::invalid_argument("double_well: expected params {alpha, gamma}");
    const real alpha = params[0], gamma = params[1];
    if (!(alpha > 0.0)) throw std::invalid_argument("double_well: alpha must be positive");
    p.domain = {Domain::Kind::Line, 0.0};
    p.u = [=](real x) { return 0.25 * alpha * x * x * x * x - 0.5 * gamma * x * x; };
    p.du = [=](real x) { return alpha * x * x * x - gamma * x; };
    p.d2u = [=](real x) { return 3.0 * alpha * x * x - gamma; };
    p.u2_min = -gamma;
    p.u2_max = std::numeric_limits<real>::infinity();
    p.c_u = c_u_override;  // no closed form; user-supplied if certification is wanted
  } else if (name == "cosine_torus") {
    if (params.size() != 2) throw std::invalid_argument("cosine_torus: expected params {ell, amplitude}");
    const real ell = params[0], amp = params[1];
    if (!(ell > 0.0)) throw std::invalid_argument("cosine_torus: ell must be positive");
    const real w = 2.0 * kPi / ell;
    p.domain = {Domain::Kind::Torus, ell};
    p.u = [=](real x) { return amp * std::cos(w * x); };
    p.du = [=](real x) { return -amp * w * std::sin(w * x); };
    p.d2u = [=](real x) { return -amp * w * w * std::cos(w * x); };
    p.u2_min = -std::abs(amp) * w * w;
    p.u2_max = std::abs(amp) * w * w;
    if (c_u_override)
      p.c_u = c_u_override;
    else if (amp == 0.0)
      p.c_u = w * w;  // spectral gap of the flat torus
    // else: left unset, certification requires an explicit value
  } else {
    throw std::invalid_argument("build_potential: unknown name '" + name + "'");
  }
  if (p.c_u && !(*p.c_u > 0.0)) throw std::invalid_argument("build_potential: c_u must be positive");
  spot_check(p);
  return p;
}

real certified_sup(const ScalarFn& f, real lo, real hi, int grid_n, real lip) {
  if (!(hi > lo)) throw std::invalid_argument("certified_sup: empty interval");
  if (grid_n < 2) throw std::invalid_argument("certified_sup: need at least 2 grid points");
  if (!(lip >= 0.0) || !std::isfinite(lip)) throw std::invalid_argument("certified_sup: invalid Lipschitz bound");
  const real h = (hi - lo) / static_cast<real>(grid_n);  // grid_n subintervals
  real m = -std::numeric_limits<real>::infinity();
  for (int i = 0; i <= grid_n; ++i) {
    const real x = (i == grid_n) ? hi : lo + h * i;
    m = std::max(m, f(x));
  }
  return m + 0.5 * lip * h;
}

real sup_abs_du(const PotentialSpec& p, real lo, real hi) {
  if (!(hi >= lo)) throw std::invalid_argument("sup_abs_du: empty interval");
  if (p.name == "quadratic") {
    const real omega = p.params[0];
    return omega * std::max(std::abs(lo), std::abs(hi));
  }
  if (p.name == "double_well") {
    const real alpha = p.params[0], gamma = p.params[1];
    const auto adu = [&](real x) { return std::abs(alpha * x * x * x - gamma * x); };
    real m = std::max(adu(lo), adu(hi));
    if (gamma > 0.0) {
      const real xc = std::sqrt(gamma / (3.0 * alpha));  // critical points of U'
      if (lo <= xc && xc <= hi) m = std::max(m, adu(xc));
      if (lo <= -xc && -xc <= hi) m = std::max(m, adu(-xc));
    }
    return m;
  }
  if (p.name == "cosine_torus") {
    const real ell = p.params[0], amp = p.params[1];
    return std::abs(amp) * 2.0 * kPi / ell;
  }
  throw std::invalid_argument("sup_abs_du: no closed form for '" + p.name + "'");
}

real TelegraphRateSpec::ds(real x) const {
  const real h = 1e-6;
  return (s(x + h) - s(x - h)) / (2.0 * h);
}

std::pair<real, real> TelegraphRateSpec::sample_window() const {
  if (potential.domain.kind == Domain::Kind::Torus) return {0.0, potential.domain.ell};
  return {-10.0, 10.0};
}

TelegraphRateSpec build_telegraph_spec(PotentialSpec potential, ScalarFn a_plus, ScalarFn a_minus,
                                       std::optional<real> a_star, std::optional<real> s_max,
                                       std::optional<real> ds_max) {
  if (!potential.has_callables())
    throw std::invalid_argument("build_telegraph_spec: potential needs callables");
  TelegraphRateSpec t;
  t.potential = std::move(potential);
  t.a_plus = std::move(a_plus);
  t.a_minus = std::move(a_minus);
  spot_check(t.potential);

  const auto [lo, hi] = t.sample_window();
  const int n = 10000;
  real smin = std::numeric_limits<real>::infinity();
  real smax = -smin, dsmax = 0.0;
  for (int i = 0; i <= n; ++i) {
    const real x = lo + (hi - lo) * i / n;
    const real ap = t.a_plus(x), am = t.a_minus(x);
    if (ap < -1e-12 || am < -1e-12)
      throw std::invalid_argument("build_telegraph_spec: rates must be nonnegative");
    const real diff = ap - am - t.potential.du(x);
    if (std::abs(diff) > 1e-8 * (1.0 + std::abs(ap) + std::abs(am)))
      throw std::invalid_argument("build_telegraph_spec: a_plus - a_minus != U' at x=" + std::to_string(x));
    smin = std::min(smin, ap + am);
    smax = std::max(smax, ap + am);
    dsmax = std::max(dsmax, std::abs(t.ds(x)));
  }
  t.a_star = a_star.value_or(smin);
  t.s_max = s_max.value_or(smax);
  t.ds_max = ds_max.value_or(dsmax);
  if (t.a_star > smin + 1e-9 * (1.0 + smin))
    throw std::invalid_argument("build_telegraph_spec: declared a_star exceeds sampled inf s");
  if (t.s_max < smax - 1e-9 * (1.0 + smax))
    throw std::invalid_argument("build_telegraph_spec: declared s_max below sampled sup s");
  if (t.potential.domain.kind == Domain::Kind::Line) {
    // Line trajectories can leave the sampled window, where s_max no longer
    // covers the rates; give the thinning loop a slice-local bound instead.
    // The accept-time guard in simulate_telegraph still enforces exactness.
    t.rate_window_bound = [ap = t.a_plus, am = t.a_minus](real lo_w, real hi_w) {
      real m = 0.0;
      constexpr int n = 64;
      for (int i = 0; i <= n; ++i) {
        const real x = lo_w + (hi_w - lo_w) * i / n;
        m = std::max({m, ap(x), am(x)});
      }
      return m == 0.0 ? 0.0 : 1.05 * m;
    };
  }
  return t;
}

}  // namespace hypoco
