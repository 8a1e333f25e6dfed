#include "hypoco/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hypoco::envelope {

namespace {

constexpr real kResonanceGuard = 1e-12;

real resonance_gap(const EnvelopeSpec& s) {
  const real d = s.eta - s.lambda;
  return d * d + s.nu_star;
}

}  // namespace

void EnvelopeSpec::validate() const {
  if (!(std::abs(resonance_gap(*this)) > kResonanceGuard))
    throw std::invalid_argument("envelope: resonant parameters, nudge nu_star first");
}

real c0_from_initial(real f0, real df0, real d2f0, real g0, const RateCertificate& cert) {
  if (!(f0 > 0.0)) throw std::invalid_argument("c0_from_initial: F_0 must be positive");
  const real nu0 =
      cert.v_hat + cert.w * (g0 - cert.cu_div * df0) / f0 - cert.eta * cert.eta;
  return d2f0 + 2.0 * cert.eta * df0 + (cert.eta * cert.eta + nu0) * f0;
}

EnvelopeSpec from_certificate(const RateCertificate& cert, real f0, real df0, real d2f0, real g0,
                              bool clamp_nonpositive) {
  EnvelopeSpec s;
  s.lambda = cert.lambda;
  s.eta = cert.eta;
  s.nu_star = clamp_nonpositive ? std::min(cert.nu_star, 0.0) : cert.nu_star;
  while (!(std::abs(resonance_gap(s)) > kResonanceGuard))
    s.nu_star -= 1e-9 * (1.0 + std::abs(s.nu_star));
  s.c0 = c0_from_initial(f0, df0, d2f0, g0, cert);
  s.f0 = f0;
  s.df0 = df0;
  return s;
}

std::function<real(real)> solve_envelope(const EnvelopeSpec& spec) {
  spec.validate();
  const real lambda = spec.lambda, eta = spec.eta, nu = spec.nu_star;
  const real p = spec.c0 / resonance_gap(spec);
  const real a = spec.f0 - p;
  const real slope0 = spec.df0 + lambda * p + eta * a;
  if (nu > 0.0) {
    const real w = std::sqrt(nu);
    const real c = slope0 / w;
    return [=](real t) {
      return p * std::exp(-lambda * t) +
             std::exp(-eta * t) * (a * std::cos(w * t) + c * std::sin(w * t));
    };
  }
  if (nu < 0.0) {
    // Split exponentials instead of cosh/sinh so e^{-eta t} cosh(kappa t)
    // cannot overflow at large t.
    const real kappa = std::sqrt(-nu);
    const real c = slope0 / kappa;
    const real up = 0.5 * (a + c), down = 0.5 * (a - c);
    return [=](real t) {
      return p * std::exp(-lambda * t) + up * std::exp(-(eta - kappa) * t) +
             down * std::exp(-(eta + kappa) * t);
    };
  }
  const real c = slope0;
  return [=](real t) { return p * std::exp(-lambda * t) + std::exp(-eta * t) * (a + c * t); };
}

real rk4_deviation(const EnvelopeSpec& spec, real t_end, int n_steps) {
  spec.validate();
  if (n_steps < 1 || !(t_end > 0.0)) throw std::invalid_argument("rk4_deviation: bad grid");
  const auto phi = solve_envelope(spec);
  const real h = t_end / n_steps;
  const auto acc = [&](real t, real y, real v) {
    return spec.c0 * std::exp(-spec.lambda * t) - 2.0 * spec.eta * v -
           (spec.eta * spec.eta + spec.nu_star) * y;
  };
  real y = spec.f0, v = spec.df0, worst = 0.0;
  for (int i = 0; i < n_steps; ++i) {
    const real t = h * i;
    const real k1y = v, k1v = acc(t, y, v);
    const real k2y = v + 0.5 * h * k1v, k2v = acc(t + 0.5 * h, y + 0.5 * h * k1y, v + 0.5 * h * k1v);
    const real k3y = v + 0.5 * h * k2v, k3v = acc(t + 0.5 * h, y + 0.5 * h * k2y, v + 0.5 * h * k2v);
    const real k4y = v + h * k3v, k4v = acc(t + h, y + h * k3y, v + h * k3v);
    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    worst = std::max(worst, std::abs(y - phi(h * (i + 1))));
  }
  return worst;
}

real envelope_rate(const EnvelopeSpec& spec) {
  const real re_sqrt = std::sqrt(std::complex<real>(-spec.nu_star, 0.0)).real();
  return std::min(spec.lambda, spec.eta - re_sqrt);
}

real fitted_slope(const EnvelopeSpec& spec) {
  const real rate = envelope_rate(spec);
  if (!(rate > 0.0)) throw std::invalid_argument("fitted_slope: envelope rate must be positive");
  const auto phi = solve_envelope(spec);
  const auto ts = linspace(10.0 / rate, 20.0 / rate, 200001);
  std::vector<real> av(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) av[i] = std::abs(phi(ts[i]));

  std::vector<std::pair<real, real>> pts;
  if (spec.nu_star > 0.0) {
    for (size_t i = 1; i + 1 < av.size(); ++i)
      if (av[i] > 0.0 && av[i] >= av[i - 1] && av[i] >= av[i + 1])
        pts.emplace_back(ts[i], std::log(av[i]));
  }
  if (pts.size() < 2) {
    pts.clear();
    for (size_t i = 0; i < av.size(); ++i)
      if (av[i] > 1e-280) pts.emplace_back(ts[i], std::log(av[i]));
  }
  if (pts.size() < 2) throw std::runtime_error("fitted_slope: envelope vanishes on the fit window");

  real st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (const auto& [x, yv] : pts) {
    st += x;
    sy += yv;
    stt += x * x;
    sty += x * yv;
  }
  const real m = static_cast<real>(pts.size());
  return (m * sty - st * sy) / (m * stt - st * st);
}

DominationReport check_domination(const DecaySeries& series, const EnvelopeSpec& spec) {
  spec.validate();
  series.validate();
  const size_t n = series.size();
  if (n < 2) throw std::invalid_argument("check_domination: need at least 2 grid points");
  const auto phi = solve_envelope(spec);

  real dt_max = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) dt_max = std::max(dt_max, series.t[i + 1] - series.t[i]);

  const real inf = std::numeric_limits<real>::infinity();
  DominationReport rep;
  rep.threshold_sqrt = spec.nu_star > 0.0 ? std::numbers::pi / std::sqrt(spec.nu_star) : inf;
  rep.threshold_plain = spec.nu_star > 0.0 ? std::numbers::pi / spec.nu_star : inf;
  if (spec.nu_star > 0.0) {
    const real period = 2.0 * std::numbers::pi / std::sqrt(spec.nu_star);
    if (dt_max > 0.01 * period)
      throw std::invalid_argument("check_domination: grid too coarse for the oscillation period");
  }

  rep.t = series.t;
  rep.F = series.F;
  rep.phi.resize(n);
  rep.corrected_bound.resize(n);
  rep.violation.resize(n);
  rep.max_violation = -inf;
  // run = sup_{s<=t} e^{eta (s-t)} (phi_s - F_s), updated by decay+max so no
  // large exponential is ever formed.
  real run = 0.0;
  for (size_t i = 0; i < n; ++i) {
    rep.phi[i] = phi(series.t[i]);
    const real d = rep.phi[i] - series.F[i];
    if (spec.nu_star > 0.0) {
      run = (i == 0) ? d
                     : std::max(d, std::exp(-spec.eta * (series.t[i] - series.t[i - 1])) * run);
      rep.corrected_bound[i] = rep.phi[i] + run;
    } else {
      rep.corrected_bound[i] = rep.phi[i];
    }
    rep.violation[i] = series.F[i] - rep.corrected_bound[i];
    rep.max_violation = std::max(rep.max_violation, rep.violation[i]);
  }

  if (spec.nu_star > 0.0) {
    size_t i = 0;
    while (i < n) {
      if (series.F[i] > rep.phi[i]) {
        size_t j = i;
        while (j + 1 < n && series.F[j + 1] > rep.phi[j + 1]) ++j;
        Excursion e;
        e.t_begin = series.t[i];
        e.t_end = series.t[j];
        e.length = e.t_end - e.t_begin;
        e.within_sqrt = e.length <= rep.threshold_sqrt + dt_max;
        e.within_plain = e.length <= rep.threshold_plain + dt_max;
        rep.excursions.push_back(e);
        rep.max_excursion_length = std::max(rep.max_excursion_length, e.length);
        i = j + 1;
      } else {
        ++i;
      }
    }
  }

  rep.tol = 1e-8 * (1.0 + series.F.front());
  rep.dominated = rep.max_violation <= rep.tol;
  return rep;
}

InitialData initials_from_series(const DecaySeries& series) {
  series.validate();
  if (series.size() < 5)
    throw std::invalid_argument("initials_from_series: need at least 5 points");
  const auto& t = series.t;
  const auto& F = series.F;
  const real h = t[1] - t[0];
  for (size_t i = 0; i < 4; ++i)
    if (std::abs((t[i + 1] - t[i]) - h) > 1e-9 * (1.0 + std::abs(h)))
      throw std::invalid_argument("initials_from_series: leading grid not uniform");
  InitialData d;
  d.f0 = F[0];
  d.df0 = (-25.0 * F[0] + 48.0 * F[1] - 36.0 * F[2] + 16.0 * F[3] - 3.0 * F[4]) / (12.0 * h);
  d.d2f0 = (35.0 * F[0] - 104.0 * F[1] + 114.0 * F[2] - 56.0 * F[3] + 11.0 * F[4]) /
           (12.0 * h * h);
  d.g0 = series.G.empty() ? 0.0 : series.G[0];
  return d;
}

}  // namespace hypoco::envelope
