#pragma once

#include "hypoco/model.hpp"
#include "hypoco/types.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace hypoco::sim {

// Counter-based stream: output k of stream (seed, outer, inner) is a pure
// function of the key and k, so identical seeds reproduce bit-identical
// results regardless of how work is split across workers.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t outer, std::uint64_t inner);

  std::uint64_t next_u64();
  real uniform();             // strictly inside (0, 1)
  real normal();              // standard Gaussian, Box-Muller pair cached
  real exponential(real rate);

 private:
  std::uint64_t state_ = 0;
  bool have_spare_ = false;
  real spare_ = 0.0;
};

struct SimConfig {
  real dt = 1e-3;  // kFP Euler step
  real t_end = 1.0;
  int n_outer = 1;   // start points
  int n_inner = 1;   // trajectories per start point
  std::uint64_t seed = 0;
  std::vector<real> snapshot_times;
  real x0 = 0.0;
  real y0 = 0.0;

  // dt in (0, 1e-2], t_end > 0, counts >= 1, snapshot_times ascending in
  // [0, t_end].
  void validate() const;
};

struct FtEstimate {
  real t = 0.0;
  real F_hat = 0.0;
  real std_err = 0.0;          // outer bootstrap, 200 resamples
  real bias_correction = 0.0;  // inner-variance debias subtracted from F_hat
};

struct State {
  real x = 0.0;
  real y = 0.0;
};

// One Euler-Maruyama step: x += v b y dt; y += (-v U'(x) - b y) dt +
// sqrt(2 dt) draw, both reading the pre-step state.
State step_kfp(State s, const PotentialSpec& pot, const KfpParams& par, real dt, real draw);

struct JumpEvent {
  real t = 0.0;
  real x = 0.0;
  int y_after = 0;  // velocity after the flip
};

// Piecewise-linear path of the telegraph process; x is kept on the real line
// (torus positions are folded only when binned).
struct TelegraphPath {
  real x0 = 0.0;
  int y0 = 1;
  real t_end = 0.0;
  std::vector<JumpEvent> events;

  std::pair<real, int> state_at(real t) const;
};

// Exact-in-law thinning. Proposals run at a per-slice bound on the jump rate
// over the positions reachable within the slice, so unbounded rates on the
// line stay integrable; constant rates are accepted with probability one.
TelegraphPath simulate_telegraph(const TelegraphRateSpec& rates, real x0, int y0, real t_end,
                                 CounterRng& rng);
TelegraphPath simulate_telegraph(const TelegraphRateSpec& rates, real x0, int y0, real t_end,
                                 std::uint64_t seed);

// Equilibrium sampler: x by inverse CDF of the normalized e^{-U} on a 2^16
// grid (one period on the torus, a certified tail-truncation window on the
// line); y Gaussian(0, 1/b) or uniform on {-1, +1}.
class MuSampler {
 public:
  enum class YLaw { Gaussian, Rademacher };

  MuSampler(const PotentialSpec& pot, YLaw ylaw, real b = 1.0);

  State sample(CounterRng& rng) const;
  real window_lo() const { return xgrid_.front(); }
  real window_hi() const { return xgrid_.back(); }

 private:
  std::vector<real> xgrid_, cdf_;
  YLaw ylaw_;
  real b_;
};

std::vector<State> sample_mu(const PotentialSpec& pot, MuSampler::YLaw ylaw, real b, int n,
                             std::uint64_t seed);

struct Model {
  enum class Kind { kfp, telegraph };
  Kind kind = Kind::kfp;
  PotentialSpec pot;  // kfp only; telegraph carries its own inside rates
  KfpParams par;
  TelegraphRateSpec rates;

  static Model kfp(PotentialSpec pot, KfpParams par);
  static Model telegraph(TelegraphRateSpec rates);

  const PotentialSpec& potential() const {
    return kind == Kind::kfp ? pot : rates.potential;
  }
};

using ObsFn = std::function<real(real x, real y)>;

// Nested estimator of F_t = ||P_t f - mu(f)||^2 at each snapshot time.
// Outer starts are drawn from mu; inner means estimate P_t f; the inner
// sample variance over n_inner debiases the squared mean. mu(f) comes from an
// independent 10^6-draw equilibrium sample. Streams are keyed by
// (seed, outer, inner); the mean sample and the bootstrap use reserved outer
// keys, so estimates never share a stream.
std::vector<FtEstimate> estimate_Ft(const ObsFn& f, const Model& model, const SimConfig& cfg);

struct Histogram {
  real t = 0.0;
  std::vector<real> centers;  // 256 uniform bins
  std::vector<real> density;  // integrates to one over the binned window
};

// Histograms of X_t at each snapshot time from n_outer * n_inner trajectories
// started at the fixed point (cfg.x0, cfg.y0).
std::vector<Histogram> density_snapshots(const Model& model, const SimConfig& cfg);

// Total-variation distance between the histogram and the normalized
// equilibrium marginal e^{-U}/Z on the same window.
real tv_to_equilibrium(const Histogram& h, const PotentialSpec& pot);

// First snapshot time at which the empirical mass in {x < threshold} reaches
// frac; +inf when it never does. Same trajectory streams as
// density_snapshots.
real mass_crossing_time(const Model& model, const SimConfig& cfg, real threshold, real frac);

}  // namespace hypoco::sim
