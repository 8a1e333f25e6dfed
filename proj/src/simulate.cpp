#include "hypoco/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hypoco::sim {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t outer, std::uint64_t inner) {
  std::uint64_t k = mix(seed + kGamma);
  k = mix(k ^ (outer + kGamma));
  k = mix(k ^ (inner + kGamma));
  state_ = k;
}

std::uint64_t CounterRng::next_u64() {
  state_ += kGamma;
  return mix(state_);
}

real CounterRng::uniform() {
  return (static_cast<real>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

real CounterRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const real r = std::sqrt(-2.0 * std::log(uniform()));
  const real th = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(th);
  have_spare_ = true;
  return r * std::cos(th);
}

real CounterRng::exponential(real rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("CounterRng::exponential: rate must be positive");
  return -std::log(uniform()) / rate;
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || dt > 1e-2 * (1.0 + 1e-12))
    throw std::invalid_argument("SimConfig: dt must lie in (0, 1e-2]");
  if (!(t_end > 0.0)) throw std::invalid_argument("SimConfig: t_end must be positive");
  if (n_outer < 1 || n_inner < 1) throw std::invalid_argument("SimConfig: counts must be >= 1");
  for (size_t k = 0; k < snapshot_times.size(); ++k) {
    if (snapshot_times[k] < 0.0 || snapshot_times[k] > t_end * (1.0 + 1e-12))
      throw std::invalid_argument("SimConfig: snapshot time outside [0, t_end]");
    if (k > 0 && !(snapshot_times[k] > snapshot_times[k - 1]))
      throw std::invalid_argument("SimConfig: snapshot_times must be ascending");
  }
}

State step_kfp(State s, const PotentialSpec& pot, const KfpParams& par, real dt, real draw) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_kfp: dt must be positive");
  State n;
  n.x = s.x + par.v * par.b * s.y * dt;
  n.y = s.y + (-par.v * pot.du(s.x) - par.b * s.y) * dt + std::sqrt(2.0 * dt) * draw;
  return n;
}

std::pair<real, int> TelegraphPath::state_at(real t) const {
  t = std::clamp(t, 0.0, t_end);
  const auto it = std::upper_bound(events.begin(), events.end(), t,
                                   [](real tv, const JumpEvent& e) { return tv < e.t; });
  if (it == events.begin()) return {x0 + y0 * t, y0};
  const JumpEvent& e = *std::prev(it);
  return {e.x + e.y_after * (t - e.t), e.y_after};
}

TelegraphPath simulate_telegraph(const TelegraphRateSpec& rates, real x0, int y0, real t_end,
                                 CounterRng& rng) {
  if (y0 != 1 && y0 != -1) throw std::invalid_argument("simulate_telegraph: y0 must be +1 or -1");
  if (!(t_end > 0.0)) throw std::invalid_argument("simulate_telegraph: t_end must be positive");
  if (!rates.a_plus || !rates.a_minus)
    throw std::invalid_argument("simulate_telegraph: rate callables required");
  if (!rates.rate_window_bound && !std::isfinite(rates.s_max))
    throw std::invalid_argument("simulate_telegraph: no finite rate bound available");

  TelegraphPath path;
  path.x0 = x0;
  path.y0 = y0;
  path.t_end = t_end;
  real t = 0.0, x = x0;
  int y = y0;
  const real slice = 1.0;  // reachable window per slice is [x - slice, x + slice]
  while (t < t_end) {
    const real slice_end = std::min(t + slice, t_end);
    const real abar =
        rates.rate_window_bound ? rates.rate_window_bound(x - slice, x + slice) : rates.s_max;
    if (!(abar >= 0.0) || !std::isfinite(abar))
      throw std::runtime_error("simulate_telegraph: invalid rate bound");
    if (abar == 0.0) {
      x += y * (slice_end - t);
      t = slice_end;
      continue;
    }
    while (t < slice_end) {
      const real t_prop = t + rng.exponential(abar);
      if (t_prop >= slice_end) {
        x += y * (slice_end - t);
        t = slice_end;
        break;
      }
      x += y * (t_prop - t);
      t = t_prop;
      const real rate = y > 0 ? rates.a_plus(x) : rates.a_minus(x);
      if (rate > abar * (1.0 + 1e-9))
        throw std::runtime_error("simulate_telegraph: jump rate exceeded its window bound");
      if (rng.uniform() < rate / abar) {
        y = -y;
        path.events.push_back({t, x, y});
      }
    }
  }
  return path;
}

TelegraphPath simulate_telegraph(const TelegraphRateSpec& rates, real x0, int y0, real t_end,
                                 std::uint64_t seed) {
  CounterRng rng(seed, 0, 0);
  return simulate_telegraph(rates, x0, y0, t_end, rng);
}

MuSampler::MuSampler(const PotentialSpec& pot, YLaw ylaw, real b) : ylaw_(ylaw), b_(b) {
  if (!pot.has_callables()) throw std::invalid_argument("MuSampler: potential needs callables");
  if (!(b > 0.0)) throw std::invalid_argument("MuSampler: b must be positive");

  real lo = 0.0, hi = 0.0;
  if (pot.domain.kind == Domain::Kind::Torus) {
    hi = pot.domain.ell;
  } else {
    real L = 10.0;
    for (int iter = 0;; ++iter) {
      if (iter > 40)
        throw std::invalid_argument("MuSampler: e^{-U} not normalizable on the line");
      real umin = std::numeric_limits<real>::infinity();
      for (int i = 0; i <= 1024; ++i) umin = std::min(umin, pot.u(-L + 2.0 * L * i / 1024.0));
      const real edge = std::min(pot.u(-L), pot.u(L)) - umin;
      if (edge > -std::log(1e-16)) break;
      L *= 2.0;
    }
    lo = -L;
    hi = L;
  }

  const int n = 1 << 16;
  xgrid_.resize(n);
  cdf_.resize(n);
  std::vector<real> w(n);
  real umin = std::numeric_limits<real>::infinity();
  for (int i = 0; i < n; ++i) {
    xgrid_[i] = lo + (hi - lo) * i / (n - 1);
    w[i] = pot.u(xgrid_[i]);
    umin = std::min(umin, w[i]);
  }
  for (int i = 0; i < n; ++i) w[i] = std::exp(-(w[i] - umin));
  cdf_[0] = 0.0;
  for (int i = 1; i < n; ++i)
    cdf_[i] = cdf_[i - 1] + 0.5 * (w[i - 1] + w[i]) * (xgrid_[i] - xgrid_[i - 1]);
  if (!(cdf_.back() > 0.0)) throw std::invalid_argument("MuSampler: degenerate density");
  for (int i = 0; i < n; ++i) cdf_[i] /= cdf_.back();
}

State MuSampler::sample(CounterRng& rng) const {
  const real u = rng.uniform();
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  size_t i = static_cast<size_t>(it - cdf_.begin());
  i = std::clamp<size_t>(i, 1, cdf_.size() - 1);
  const real c0 = cdf_[i - 1], c1 = cdf_[i];
  const real frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
  State s;
  s.x = xgrid_[i - 1] + frac * (xgrid_[i] - xgrid_[i - 1]);
  s.y = ylaw_ == YLaw::Gaussian ? rng.normal() / std::sqrt(b_)
                                : (rng.uniform() < 0.5 ? -1.0 : 1.0);
  return s;
}

std::vector<State> sample_mu(const PotentialSpec& pot, MuSampler::YLaw ylaw, real b, int n,
                             std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_mu: n must be >= 1");
  MuSampler mu(pot, ylaw, b);
  std::vector<State> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i), 0);
    out[static_cast<size_t>(i)] = mu.sample(rng);
  }
  return out;
}

Model Model::kfp(PotentialSpec pot, KfpParams par) {
  if (!pot.has_callables()) throw std::invalid_argument("Model::kfp: potential needs callables");
  Model m;
  m.kind = Kind::kfp;
  m.pot = std::move(pot);
  m.par = par;
  return m;
}

Model Model::telegraph(TelegraphRateSpec rates) {
  if (!rates.a_plus || !rates.a_minus)
    throw std::invalid_argument("Model::telegraph: rate callables required");
  Model m;
  m.kind = Kind::telegraph;
  m.rates = std::move(rates);
  return m;
}

namespace {

constexpr std::uint64_t kMeanStream = ~std::uint64_t{0};
constexpr std::uint64_t kBootStream = ~std::uint64_t{0} - 1;

// Marches one kFP trajectory through the snapshot times, shrinking the final
// step of each leg so samples land exactly on the grid.
template <class Visit>
void march_kfp(const Model& model, const SimConfig& cfg, State s, CounterRng& rng,
               const std::vector<real>& times, Visit&& visit) {
  real t = 0.0;
  for (size_t k = 0; k < times.size(); ++k) {
    while (t < times[k] - 1e-12) {
      const real h = std::min(cfg.dt, times[k] - t);
      s = step_kfp(s, model.pot, model.par, h, rng.normal());
      t += h;
    }
    visit(k, s.x, s.y);
  }
}

template <class Visit>
void trajectory_snapshots(const Model& model, const SimConfig& cfg, State start, CounterRng& rng,
                          const std::vector<real>& times, Visit&& visit) {
  if (model.kind == Model::Kind::kfp) {
    march_kfp(model, cfg, start, rng, times, visit);
  } else {
    const int y0 = start.y >= 0.0 ? 1 : -1;
    const real horizon = std::max(times.back(), 1e-9);
    const TelegraphPath path = simulate_telegraph(model.rates, start.x, y0, horizon, rng);
    for (size_t k = 0; k < times.size(); ++k) {
      const auto [x, y] = path.state_at(times[k]);
      visit(k, x, static_cast<real>(y));
    }
  }
}

}  // namespace

std::vector<FtEstimate> estimate_Ft(const ObsFn& f, const Model& model, const SimConfig& cfg) {
  cfg.validate();
  if (!f) throw std::invalid_argument("estimate_Ft: observable required");
  if (cfg.n_inner < 2) throw std::invalid_argument("estimate_Ft: n_inner must be >= 2");
  const auto& times = cfg.snapshot_times;
  if (times.empty()) throw std::invalid_argument("estimate_Ft: snapshot_times required");
  const size_t T = times.size();
  const size_t n_outer = static_cast<size_t>(cfg.n_outer);

  const bool kfp = model.kind == Model::Kind::kfp;
  const MuSampler mu(model.potential(),
                     kfp ? MuSampler::YLaw::Gaussian : MuSampler::YLaw::Rademacher,
                     kfp ? model.par.b : 1.0);

  real mu_f = 0.0;
  {
    const int n_mean = 1000000;
    CounterRng rng(cfg.seed, kMeanStream, 0);
    for (int k = 0; k < n_mean; ++k) {
      const State s = mu.sample(rng);
      mu_f += f(s.x, s.y);
    }
    mu_f /= n_mean;
  }

  std::vector<std::vector<real>> d(n_outer, std::vector<real>(T, 0.0));
  std::vector<real> corr_sum(T, 0.0);
  for (size_t i = 0; i < n_outer; ++i) {
    CounterRng srng(cfg.seed, i, static_cast<std::uint64_t>(cfg.n_inner));
    const State start = mu.sample(srng);
    std::vector<real> sum(T, 0.0), sumsq(T, 0.0);
    for (int j = 0; j < cfg.n_inner; ++j) {
      CounterRng rng(cfg.seed, i, static_cast<std::uint64_t>(j));
      trajectory_snapshots(model, cfg, start, rng, times, [&](size_t k, real x, real y) {
        const real val = f(x, y);
        sum[k] += val;
        sumsq[k] += val * val;
      });
    }
    for (size_t k = 0; k < T; ++k) {
      const real m = sum[k] / cfg.n_inner;
      const real var = std::max(0.0, (sumsq[k] - cfg.n_inner * m * m) / (cfg.n_inner - 1));
      const real dm = m - mu_f;
      d[i][k] = dm * dm - var / cfg.n_inner;
      corr_sum[k] += var / cfg.n_inner;
    }
  }

  std::vector<FtEstimate> out(T);
  for (size_t k = 0; k < T; ++k) {
    real s = 0.0;
    for (size_t i = 0; i < n_outer; ++i) s += d[i][k];
    out[k].t = times[k];
    out[k].F_hat = s / static_cast<real>(n_outer);
    out[k].bias_correction = corr_sum[k] / static_cast<real>(n_outer);
  }

  const int n_boot = 200;
  std::vector<std::vector<real>> boot(static_cast<size_t>(n_boot), std::vector<real>(T, 0.0));
  for (int r = 0; r < n_boot; ++r) {
    CounterRng rng(cfg.seed, kBootStream, static_cast<std::uint64_t>(r));
    for (size_t i = 0; i < n_outer; ++i) {
      const size_t pick = std::min<size_t>(
          static_cast<size_t>(rng.uniform() * static_cast<real>(n_outer)), n_outer - 1);
      for (size_t k = 0; k < T; ++k) boot[static_cast<size_t>(r)][k] += d[pick][k];
    }
    for (size_t k = 0; k < T; ++k) boot[static_cast<size_t>(r)][k] /= static_cast<real>(n_outer);
  }
  for (size_t k = 0; k < T; ++k) {
    real m = 0.0;
    for (int r = 0; r < n_boot; ++r) m += boot[static_cast<size_t>(r)][k];
    m /= n_boot;
    real v = 0.0;
    for (int r = 0; r < n_boot; ++r) {
      const real e = boot[static_cast<size_t>(r)][k] - m;
      v += e * e;
    }
    out[k].std_err = std::sqrt(v / (n_boot - 1));
  }
  return out;
}

namespace {

std::pair<real, real> bin_window(const Model& model) {
  const PotentialSpec& pot = model.potential();
  if (pot.domain.kind == Domain::Kind::Torus) return {0.0, pot.domain.ell};
  const MuSampler mu(pot, MuSampler::YLaw::Rademacher, 1.0);
  return {mu.window_lo(), mu.window_hi()};
}

template <class Visit>
void sweep_point_starts(const Model& model, const SimConfig& cfg, Visit&& visit) {
  cfg.validate();
  if (cfg.snapshot_times.empty())
    throw std::invalid_argument("density_snapshots: snapshot_times required");
  const State start{cfg.x0, cfg.y0};
  for (int i = 0; i < cfg.n_outer; ++i)
    for (int j = 0; j < cfg.n_inner; ++j) {
      CounterRng rng(cfg.seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
      trajectory_snapshots(model, cfg, start, rng, cfg.snapshot_times, visit);
    }
}

}  // namespace

std::vector<Histogram> density_snapshots(const Model& model, const SimConfig& cfg) {
  const auto [lo, hi] = bin_window(model);
  const int nbins = 256;
  const real width = (hi - lo) / nbins;
  const bool torus = model.potential().domain.kind == Domain::Kind::Torus;
  const real ell = model.potential().domain.ell;

  const size_t T = cfg.snapshot_times.size();
  std::vector<std::vector<std::int64_t>> counts(T, std::vector<std::int64_t>(nbins, 0));
  sweep_point_starts(model, cfg, [&](size_t k, real x, real) {
    if (torus) x -= ell * std::floor(x / ell);
    const int bin = std::clamp(static_cast<int>((x - lo) / width), 0, nbins - 1);
    ++counts[k][static_cast<size_t>(bin)];
  });

  const real total = static_cast<real>(cfg.n_outer) * static_cast<real>(cfg.n_inner);
  std::vector<Histogram> out(T);
  for (size_t k = 0; k < T; ++k) {
    out[k].t = cfg.snapshot_times[k];
    out[k].centers.resize(nbins);
    out[k].density.resize(nbins);
    for (int bb = 0; bb < nbins; ++bb) {
      out[k].centers[static_cast<size_t>(bb)] = lo + (bb + 0.5) * width;
      out[k].density[static_cast<size_t>(bb)] =
          static_cast<real>(counts[k][static_cast<size_t>(bb)]) / (total * width);
    }
  }
  return out;
}

real tv_to_equilibrium(const Histogram& h, const PotentialSpec& pot) {
  if (h.centers.size() < 2) throw std::invalid_argument("tv_to_equilibrium: empty histogram");
  if (!pot.has_callables()) throw std::invalid_argument("tv_to_equilibrium: potential needs callables");
  const size_t nbins = h.centers.size();
  const real width = h.centers[1] - h.centers[0];
  const real lo = h.centers.front() - 0.5 * width;

  std::vector<real> q(nbins, 0.0);
  real z = 0.0;
  const int sub = 8;
  for (size_t i = 0; i < nbins; ++i) {
    for (int s = 0; s < sub; ++s) {
      const real x = lo + (static_cast<real>(i) + (s + 0.5) / sub) * width;
      q[i] += std::exp(-pot.u(x)) * (width / sub);
    }
    z += q[i];
  }
  if (!(z > 0.0)) throw std::invalid_argument("tv_to_equilibrium: degenerate equilibrium");

  real tv = 0.0;
  for (size_t i = 0; i < nbins; ++i) tv += std::abs(h.density[i] * width - q[i] / z);
  return 0.5 * tv;
}

real mass_crossing_time(const Model& model, const SimConfig& cfg, real threshold, real frac) {
  if (!(frac > 0.0) || !(frac <= 1.0))
    throw std::invalid_argument("mass_crossing_time: frac must lie in (0, 1]");
  const size_t T = cfg.snapshot_times.size();
  std::vector<std::int64_t> below(T, 0);
  sweep_point_starts(model, cfg, [&](size_t k, real x, real) {
    if (x < threshold) ++below[k];
  });
  const real total = static_cast<real>(cfg.n_outer) * static_cast<real>(cfg.n_inner);
  for (size_t k = 0; k < T; ++k)
    if (static_cast<real>(below[k]) / total >= frac) return cfg.snapshot_times[k];
  return std::numeric_limits<real>::infinity();
}

}  // namespace hypoco::sim
