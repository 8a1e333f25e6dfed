#include "hypoco/oracle.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hypoco::oracle {

namespace {

using MatLd = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VecLd = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

real interior_norm(const Mat& E, const std::vector<int>& idx) {
  real s = 0.0;
  for (int r : idx)
    for (int c : idx) s += E(r, c) * E(r, c);
  return std::sqrt(s);
}

Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

bool uniform_spacing(const std::vector<real>& t, real& dt) {
  if (t.size() < 2) return false;
  dt = t[1] - t[0];
  for (size_t i = 0; i + 1 < t.size(); ++i)
    if (std::abs((t[i + 1] - t[i]) - dt) > 1e-12 * (1.0 + std::abs(dt))) return false;
  return true;
}

void check_time_grid(const std::vector<real>& t) {
  if (t.empty()) throw std::invalid_argument("oracle: empty time grid");
  if (t.front() < 0.0) throw std::invalid_argument("oracle: negative time");
  for (size_t i = 0; i + 1 < t.size(); ++i)
    if (!(t[i] < t[i + 1])) throw std::invalid_argument("oracle: time grid not increasing");
}

}  // namespace

int OperatorSet::index(int i, int j) const {
  if (i < 0 || j < 0 || i + j > N) throw std::out_of_range("OperatorSet::index");
  const int d = i + j;
  return d * (d + 1) / 2 + i;
}

Vec OperatorSet::monomial(int px, int py) const {
  if (px < 0 || py < 0 || px + py > N)
    throw std::invalid_argument("OperatorSet::monomial: degree exceeds basis");
  const Mat Xm = (Dx + Dx.transpose()) / omega;
  const Mat Ym = (Dy + Dy.transpose()) / par.b;
  Vec f = Vec::Zero(dim());
  f[index(0, 0)] = 1.0;
  for (int p = 0; p < px; ++p) f = Xm * f;
  for (int p = 0; p < py; ++p) f = Ym * f;
  return f;
}

Vec OperatorSet::centered(Vec f) const {
  f[index(0, 0)] = 0.0;
  return f;
}

OperatorSet build_kfp_operators(real omega, const KfpParams& par, int N) {
  if (N < 3) throw std::invalid_argument("build_kfp_operators: need N >= 3");
  if (!(omega > 0.0)) throw std::invalid_argument("build_kfp_operators: omega must be positive");

  OperatorSet ops;
  ops.N = N;
  ops.omega = omega;
  ops.par = par;
  const int D = (N + 1) * (N + 2) / 2;
  ops.degrees.reserve(static_cast<size_t>(D));
  for (int d = 0; d <= N; ++d)
    for (int i = 0; i <= d; ++i) ops.degrees.emplace_back(i, d - i);
  for (int idx = 0; idx < D; ++idx) {
    const auto [i, j] = ops.degrees[static_cast<size_t>(idx)];
    if (i + j <= N - 2) ops.interior.push_back(idx);
  }

  ops.Dx = Mat::Zero(D, D);
  ops.Dy = Mat::Zero(D, D);
  for (int idx = 0; idx < D; ++idx) {
    const auto [i, j] = ops.degrees[static_cast<size_t>(idx)];
    if (i >= 1) ops.Dx(ops.index(i - 1, j), idx) = std::sqrt(omega * i);
    if (j >= 1) ops.Dy(ops.index(i, j - 1), idx) = std::sqrt(par.b * j);
  }
  ops.K = -ops.Dy.transpose() * ops.Dy;
  ops.R = -par.v * ops.Dx.transpose() * ops.Dy;
  ops.Rstar = ops.R.transpose();
  ops.L = ops.K + ops.R - ops.Rstar;
  return ops;
}

ResidualReport bracket_residuals(const OperatorSet& ops) {
  const real b = ops.par.b, v = ops.par.v, om = ops.omega;
  const Mat& K = ops.K;
  const Mat& R = ops.R;
  const Mat& Rs = ops.Rstar;
  const Mat X = ops.Dx.transpose() * ops.Dx;
  const Mat I = Mat::Identity(ops.dim(), ops.dim());

  ResidualReport rep;
  rep.emplace_back("L_decomposition", (ops.L - (K + R - Rs)).norm());
  rep.emplace_back("ladder_y",
                   interior_norm(ops.Dy * ops.Dy.transpose() - ops.Dy.transpose() * ops.Dy - b * I,
                                 ops.interior));
  rep.emplace_back("ladder_x",
                   interior_norm(ops.Dx * ops.Dx.transpose() - ops.Dx.transpose() * ops.Dx - om * I,
                                 ops.interior));
  rep.emplace_back("bracket_K_R", interior_norm(K * R - R * K - b * R, ops.interior));
  rep.emplace_back("bracket_K2_R",
                   interior_norm(K * K * R - R * K * K - R * (b * b * I + 2.0 * b * K),
                                 ops.interior));
  rep.emplace_back("bracket_R_Rstar",
                   interior_norm(R * Rs - Rs * R - v * v * (om * K + b * X), ops.interior));
  rep.emplace_back("gprime_form",
                   interior_norm(sym(X * ops.L + ops.L.transpose() * X) -
                                     sym(-(2.0 / (v * v)) * R * Rs + 2.0 * om * R + 2.0 * b * X),
                                 ops.interior));
  return rep;
}

DecaySeries evolve(const OperatorSet& ops, const Vec& f0, const std::vector<real>& tgrid) {
  if (f0.size() != ops.dim()) throw std::invalid_argument("evolve: dimension mismatch");
  check_time_grid(tgrid);
  if (std::abs(f0[ops.index(0, 0)]) > 1e-12 * (1.0 + f0.norm()))
    throw std::invalid_argument("evolve: initial data must have zero mean coefficient");

  const size_t n = tgrid.size();
  std::vector<real> F(n), G(n);
  const auto record = [&](size_t i, const Vec& f) {
    F[i] = f.squaredNorm();
    G[i] = (ops.Dx * f).squaredNorm();
  };

  real dt = 0.0;
  if (uniform_spacing(tgrid, dt)) {
    const Mat E = (dt * ops.L).exp();
    Vec f = tgrid[0] == 0.0 ? f0 : Vec((tgrid[0] * ops.L).exp() * f0);
    record(0, f);
    for (size_t i = 1; i < n; ++i) {
      f = E * f;
      record(i, f);
    }
  } else {
    for (size_t i = 0; i < n; ++i) record(i, Vec((tgrid[i] * ops.L).exp() * f0));
  }
  return DecaySeries{tgrid, std::move(F), std::move(G)};
}

ResidualReport derivative_checks(const OperatorSet& ops, const Vec& f0) {
  if (f0.size() != ops.dim()) throw std::invalid_argument("derivative_checks: dimension mismatch");
  if (std::abs(f0[ops.index(0, 0)]) > 1e-12 * (1.0 + f0.norm()))
    throw std::invalid_argument("derivative_checks: initial data must have zero mean coefficient");

  const long double v2 = static_cast<long double>(ops.par.v) * ops.par.v;
  const long double b = ops.par.b, om = ops.omega;
  const MatLd Lld = ops.L.cast<long double>();
  const MatLd K = ops.K.cast<long double>();
  const MatLd R = ops.R.cast<long double>();
  const MatLd Rs = ops.Rstar.cast<long double>();
  const MatLd Dxld = ops.Dx.cast<long double>();
  const MatLd X = Dxld.transpose() * Dxld;

  const MatLd KR = K * R - R * K;
  const MatLd M1 = 2.0L * K;
  const MatLd M2 = 4.0L * K * K + 4.0L * KR;
  const MatLd M3 = 8.0L * K * K * K + 12.0L * (K * K * R - R * K * K) +
                   4.0L * (KR * (R - Rs) - (R - Rs) * KR);
  const MatLd MG = -(2.0L / v2) * R * Rs + 2.0L * om * R;

  const long double h = 1e-3L;
  const MatLd Ep = MatLd((h / 2.0L) * Lld).exp();
  const MatLd Em = MatLd((-h / 2.0L) * Lld).exp();
  const MatLd E0 = MatLd(0.1L * Lld).exp();

  const auto Fv = [](const VecLd& u) { return static_cast<long double>(u.squaredNorm()); };
  const auto Gv = [&](const VecLd& u) {
    return static_cast<long double>((Dxld * u).squaredNorm());
  };

  long double diff[4] = {0.0L, 0.0L, 0.0L, 0.0L};
  long double scale[4] = {0.0L, 0.0L, 0.0L, 0.0L};
  VecLd base = E0 * f0.cast<long double>();
  for (int k = 0; k < 20; ++k) {
    const VecLd p1 = Ep * base, p2 = Ep * p1, p4 = Ep * (Ep * p2);
    const VecLd m1 = Em * base, m2 = Em * m1, m4 = Em * (Em * m2);
    const long double F0 = Fv(base);
    const long double Fp1 = Fv(p1), Fp2 = Fv(p2), Fp4 = Fv(p4);
    const long double Fm1 = Fv(m1), Fm2 = Fv(m2), Fm4 = Fv(m4);
    const long double Gp1 = Gv(p1), Gp2 = Gv(p2), Gm1 = Gv(m1), Gm2 = Gv(m2);

    const long double fd1 = (4.0L * (Fp1 - Fm1) / h - (Fp2 - Fm2) / (2.0L * h)) / 3.0L;
    const long double S_h = (Fp2 - 2.0L * F0 + Fm2) / (h * h);
    const long double S_h2 = (Fp1 - 2.0L * F0 + Fm1) / (h * h / 4.0L);
    const long double fd2 = (4.0L * S_h2 - S_h) / 3.0L;
    const long double T_h = (Fp4 - 2.0L * Fp2 + 2.0L * Fm2 - Fm4) / (2.0L * h * h * h);
    const long double T_h2 = (Fp2 - 2.0L * Fp1 + 2.0L * Fm1 - Fm2) / (h * h * h / 4.0L);
    const long double fd3 = (4.0L * T_h2 - T_h) / 3.0L;
    const long double fdG = (4.0L * (Gp1 - Gm1) / h - (Gp2 - Gm2) / (2.0L * h)) / 3.0L;

    const long double exact[4] = {base.dot(M1 * base), base.dot(M2 * base), base.dot(M3 * base),
                                  base.dot(MG * base) + 2.0L * b * Gv(base)};
    const long double fd[4] = {fd1, fd2, fd3, fdG};
    for (int q = 0; q < 4; ++q) {
      diff[q] = std::max(diff[q], std::abs(exact[q] - fd[q]));
      scale[q] = std::max(scale[q], std::abs(exact[q]));
    }
    base = E0 * base;  // samples at t = 0.1 (k + 1)
  }

  ResidualReport rep;
  const char* names[4] = {"F1_form", "F2_form", "F3_form", "G1_form"};
  for (int q = 0; q < 4; ++q)
    rep.emplace_back(names[q], static_cast<real>(diff[q] / std::max(scale[q], 1e-30L)));
  return rep;
}

real r_theor(const KfpParams& par, real u2) {
  const real arg = 1.0 - 4.0 * par.v * par.v * u2 / par.b;
  return 1.0 - std::sqrt(std::max(0.0, arg));
}

ModeBlock make_mode_block(real a, int m) {
  if (!(a > 0.0)) throw std::invalid_argument("make_mode_block: a must be positive");
  if (m == 0) throw std::invalid_argument("make_mode_block: m must be nonzero");
  ModeBlock mb;
  mb.m = m;
  mb.a = a;
  mb.block = MatC::Zero(2, 2);
  mb.block(0, 1) = complex(0.0, static_cast<real>(m));
  mb.block(1, 0) = complex(0.0, static_cast<real>(m));
  mb.block(1, 1) = complex(-2.0 * a, 0.0);
  return mb;
}

std::array<complex, 2> ModeBlock::eigenvalues() const {
  Eigen::ComplexEigenSolver<MatC> es(block, false);
  return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

namespace {

// Basis layout: index 0 is the pure y mode; mode m >= 1 occupies the slots
// 1 + 4(m-1) + {0: cos, 1: sin, 2: y cos, 3: y sin}.
int vcos_of(int m) { return 1 + 4 * (m - 1); }
int vsin_of(int m) { return 2 + 4 * (m - 1); }
int pcos_of(int m) { return 3 + 4 * (m - 1); }
int psin_of(int m) { return 4 + 4 * (m - 1); }

}  // namespace

TelegraphOperatorSet build_telegraph_operators(real a, int m_max) {
  if (!(a > 0.0)) throw std::invalid_argument("build_telegraph_operators: a must be positive");
  if (m_max < 1) throw std::invalid_argument("build_telegraph_operators: m_max must be >= 1");

  TelegraphOperatorSet ops;
  ops.m_max = m_max;
  ops.a = a;
  const int D = 4 * m_max + 1;
  ops.Dx = Mat::Zero(D, D);
  ops.Dy = Mat::Zero(D, D);
  ops.PiV = Mat::Zero(D, D);
  ops.PiPerp = Mat::Zero(D, D);
  ops.PiPerp(0, 0) = 1.0;
  for (int m = 1; m <= m_max; ++m) {
    ops.Dx(vsin_of(m), vcos_of(m)) = -m;
    ops.Dx(vcos_of(m), vsin_of(m)) = m;
    ops.Dx(psin_of(m), pcos_of(m)) = -m;
    ops.Dx(pcos_of(m), psin_of(m)) = m;
    ops.Dy(vcos_of(m), pcos_of(m)) = 1.0;
    ops.Dy(vsin_of(m), psin_of(m)) = 1.0;
    ops.PiV(vcos_of(m), vcos_of(m)) = 1.0;
    ops.PiV(vsin_of(m), vsin_of(m)) = 1.0;
    ops.PiPerp(pcos_of(m), pcos_of(m)) = 1.0;
    ops.PiPerp(psin_of(m), psin_of(m)) = 1.0;
  }
  const real s = 2.0 * a;
  ops.K = -s * ops.PiPerp;
  ops.R = -ops.Dx.transpose() * ops.Dy;
  ops.Rstar = ops.R.transpose();
  ops.L = ops.K + ops.R - ops.Rstar;
  return ops;
}

ResidualReport bracket_residuals(const TelegraphOperatorSet& ops) {
  const real s = 2.0 * ops.a;
  const Mat& K = ops.K;
  const Mat& R = ops.R;
  const Mat& Rs = ops.Rstar;
  const Mat M = ops.Dx.transpose() * ops.Dx;
  const Mat KR = K * R - R * K;

  ResidualReport rep;
  rep.emplace_back("L_decomposition", (ops.L - (K + R - Rs)).norm());
  rep.emplace_back("bracket_K_R", (KR - s * R).norm());
  rep.emplace_back("bracket_K2_R", (K * K * R - R * K * K + s * s * R).norm());
  rep.emplace_back("double_bracket",
                   (KR * (R - Rs) - (R - Rs) * KR - s * (Rs * R - R * Rs)).norm());
  rep.emplace_back("RRstar_PiV", (R * Rs - M * ops.PiV).norm());
  rep.emplace_back("RstarR_PiPerp", (Rs * R - M * ops.PiPerp).norm());
  return rep;
}

TorusSeries telegraph_torus_series(real a, int m_max, const TorusInitial& f0,
                                   const std::vector<real>& tgrid) {
  if (!(a > 0.0)) throw std::invalid_argument("telegraph_torus_series: a must be positive");
  if (m_max < 1) throw std::invalid_argument("telegraph_torus_series: m_max must be >= 1");
  if (f0.v.size() != m_max || f0.perp.size() != m_max)
    throw std::invalid_argument("telegraph_torus_series: mode vectors must have length m_max");
  check_time_grid(tgrid);

  TorusSeries out;
  out.exact_rate = 2.0 * a;
  for (int m = 1; m <= m_max; ++m) {
    const auto ev = make_mode_block(a, m).eigenvalues();
    const real slowest = std::max(ev[0].real(), ev[1].real());
    out.exact_rate = std::min(out.exact_rate, -slowest);
  }

  const size_t n = tgrid.size();
  std::vector<real> F(n, 0.0), G(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const real y = f0.y_mode * std::exp(-2.0 * a * tgrid[i]);
    F[i] += y * y;
  }

  real dt = 0.0;
  const bool uniform = uniform_spacing(tgrid, dt);
  for (int m = 1; m <= m_max; ++m) {
    const MatC B = make_mode_block(a, m).block;
    Eigen::Vector2cd u;
    u << f0.v(m - 1), f0.perp(m - 1);
    const auto add = [&](size_t i, const Eigen::Vector2cd& w) {
      const real nrm = std::norm(w(0)) + std::norm(w(1));
      F[i] += 2.0 * nrm;
      G[i] += 2.0 * static_cast<real>(m) * m * nrm;
    };
    if (uniform) {
      const MatC E = (dt * B).exp();
      Eigen::Vector2cd w = tgrid[0] == 0.0 ? u : Eigen::Vector2cd(MatC((tgrid[0] * B).exp()) * u);
      add(0, w);
      for (size_t i = 1; i < n; ++i) {
        w = E * w;
        add(i, w);
      }
    } else {
      for (size_t i = 0; i < n; ++i) add(i, Eigen::Vector2cd(MatC((tgrid[i] * B).exp()) * u));
    }
  }
  out.series = DecaySeries{tgrid, std::move(F), std::move(G)};
  return out;
}

InequalityReport inequality_residual(const DecaySeries& series, const RateCertificate& cert) {
  series.validate();
  const size_t n = series.size();
  if (series.G.size() != n)
    throw std::invalid_argument("inequality_residual: G series required");
  constexpr size_t S = 8;  // stencil stride
  if (n < 8 * S + 2) throw std::invalid_argument("inequality_residual: grid too coarse");
  real dt = 0.0;
  if (!uniform_spacing(series.t, dt))
    throw std::invalid_argument("inequality_residual: grid must be uniform");
  if (dt > 1e-3 * (1.0 + 1e-9))
    throw std::invalid_argument("inequality_residual: grid too coarse");
  for (real f : series.F)
    if (!(f > 0.0)) throw std::invalid_argument("inequality_residual: F must stay positive");

  const auto& F = series.F;
  const auto& G = series.G;
  const real h = static_cast<real>(S) * dt;
  const auto d1 = [&](const std::vector<real>& f, size_t i) {
    return (-f[i + 2 * S] + 8.0 * f[i + S] - 8.0 * f[i - S] + f[i - 2 * S]) / (12.0 * h);
  };
  const auto d2 = [&](const std::vector<real>& f, size_t i) {
    return (-f[i + 2 * S] + 16.0 * f[i + S] - 30.0 * f[i] + 16.0 * f[i - S] - f[i - 2 * S]) /
           (12.0 * h * h);
  };

  const real inf = std::numeric_limits<real>::infinity();
  InequalityReport rep;
  rep.min_nu_margin = inf;
  rep.min_coercivity = inf;
  rep.max_residual = -inf;

  std::vector<real> W(n, 0.0);
  for (size_t i = 2 * S; i + 2 * S < n; ++i) {
    const real F1 = d1(F, i);
    W[i] = d2(F, i) + cert.u * F1 + cert.v_hat * F[i] + cert.w * G[i];
    const real coer = (G[i] - cert.cu_div * F1) / F[i];
    const real nu_t = cert.v_hat + cert.w * coer - cert.eta * cert.eta;
    rep.min_nu_margin = std::min(rep.min_nu_margin, nu_t - cert.nu_star);
    rep.min_coercivity = std::min(rep.min_coercivity, coer);
  }
  for (size_t i = 4 * S; i + 4 * S < n; ++i) {
    rep.max_residual = std::max(rep.max_residual, d1(W, i) + cert.lambda * W[i]);
    ++rep.n_checked;
  }
  rep.tol = 1e-6 * (1.0 + F[0]) * (1.0 + cert.rate) * (1.0 + cert.rate) * (1.0 + cert.rate);
  return rep;
}

}  // namespace hypoco::oracle
