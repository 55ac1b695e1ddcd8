#pragma once

// Entropies, fidelities, Husimi Q-functions and mutual information for the
// particle (A), auxiliary purifier (R) and cavity (L) subsystems. The emission
// reservoir P is never built: the global A R L P state is pure, so every
// reservoir entropy equals the entropy of a complementary A R L subsystem.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavity_entropy/dynamics.hpp"
#include "cavity_entropy/errors.hpp"
#include "cavity_entropy/hilbert.hpp"
#include "cavity_entropy/parallel.hpp"
#include "cavity_entropy/steady_state.hpp"

namespace cavity_entropy {

// Subsystem positions in the purified particle (x) auxiliary (x) cavity space.
inline constexpr int kSubsystemA = 0;
inline constexpr int kSubsystemR = 1;
inline constexpr int kSubsystemL = 2;

// ---------------------------------------------------------------------------
// Entropies (natural log)

// -sum lambda ln lambda. Eigenvalues in [-1e-8, 0) are roundoff and clipped to
// zero; anything more negative is a genuine positivity failure.
inline double entropy_from_spectrum(const Eigen::VectorXd& eigenvalues) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double l = eigenvalues(i);
    if (l < -tol::kNegativeEigenvalue) {
      throw PositivityError("entropy: eigenvalue " + detail::sci(l) + " below tolerance");
    }
    if (l > 1e-12) s -= l * std::log(l);
  }
  return s;
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_from_spectrum(hermitian_eigenvalues(rho.matrix()));
}

inline double shannon_entropy(std::span<const double> p) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw NormalizationError("shannon_entropy: negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-8) {
    throw NormalizationError("shannon_entropy: probabilities sum to " + detail::sci(total));
  }
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) s -= v * std::log(v);
  }
  return s;
}

inline double shannon_entropy(std::initializer_list<double> p) {
  return shannon_entropy(std::span<const double>(p.begin(), p.size()));
}

// S_0 = -x ln x - (1 - x) ln(1 - x), the entropy of the initial particle mixture.
inline double particle_entropy(double x) { return shannon_entropy({x, 1.0 - x}); }

inline double subsystem_entropy(const DensityMatrix& rho, std::span<const int> keep) {
  if (static_cast<std::size_t>(keep.size()) == rho.dims().size()) return von_neumann_entropy(rho);
  return von_neumann_entropy(partial_trace(rho, keep));
}

inline double subsystem_entropy(const DensityMatrix& rho, std::initializer_list<int> keep) {
  return subsystem_entropy(rho, std::span<const int>(keep.begin(), keep.size()));
}

// ---------------------------------------------------------------------------
// Fidelity

namespace detail {

inline Matrix hermitian_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  Eigen::VectorXd w = es.eigenvalues();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < -tol::kNegativeEigenvalue) {
      throw PositivityError("hermitian_sqrt: eigenvalue " + detail::sci(w(i)));
    }
    w(i) = std::sqrt(std::max(0.0, w(i)));
  }
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

// Dominant eigenvector when rho is pure to within 1e-10 in purity.
inline std::optional<Vector> pure_vector(const DensityMatrix& rho) {
  if (std::abs(rho.purity() - 1.0) > 1e-10) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  return Vector(es.eigenvectors().col(es.eigenvalues().size() - 1));
}

}  // namespace detail

// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, reducing to <psi|other|psi> when
// either argument is pure.
inline double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dims() != sigma.dims()) throw DimensionMismatch("uhlmann_fidelity: dims differ");
  if (auto psi = detail::pure_vector(rho)) {
    return std::clamp((psi->adjoint() * sigma.matrix() * *psi)(0, 0).real(), 0.0, 1.0);
  }
  if (auto psi = detail::pure_vector(sigma)) {
    return std::clamp((psi->adjoint() * rho.matrix() * *psi)(0, 0).real(), 0.0, 1.0);
  }
  const Matrix root = detail::hermitian_sqrt(rho.matrix());
  const Matrix inner = root * sigma.matrix() * root;
  const Eigen::VectorXd w = hermitian_eigenvalues(0.5 * (inner + inner.adjoint()));
  double tr = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < -tol::kNegativeEigenvalue) throw PositivityError("uhlmann_fidelity: negative spectrum");
    tr += std::sqrt(std::max(0.0, w(i)));
  }
  return std::clamp(tr * tr, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Husimi Q-function

struct GridSpec {
  double re_min = -1.0, re_max = 1.0;
  double im_min = -1.0, im_max = 1.0;
  int re_points = 401, im_points = 401;

  // Square grid [-half, half]^2.
  static GridSpec centered(double half_width, int points) {
    return {-half_width, half_width, -half_width, half_width, points, points};
  }
  // Default grid for a state near |alpha>: 401 x 401 over [-(|alpha|+5), |alpha|+5]^2.
  static GridSpec around(cplx alpha, int points = 401) { return centered(std::abs(alpha) + 5.0, points); }
};

struct QGrid {
  std::vector<double> re_axis;
  std::vector<double> im_axis;
  Eigen::MatrixXd values;  // values(i_re, i_im)
  double cell_area = 0.0;

  [[nodiscard]] double riemann_sum() const { return values.sum() * cell_area; }
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

// <n|beta> for n = 0..n_max by the stable upward recursion.
inline void coherent_amplitudes_into(cplx beta, Vector& out) {
  const double r2 = std::norm(beta);
  if (0.5 * r2 > 600.0) {
    out = coherent_amplitudes(beta, static_cast<int>(out.size()) - 1);
    return;
  }
  out(0) = std::exp(-0.5 * r2);
  for (Eigen::Index n = 1; n < out.size(); ++n) out(n) = out(n - 1) * beta / std::sqrt(static_cast<double>(n));
}

}  // namespace detail

// Q(beta) = <beta|rho|beta> / pi
inline double husimi_value(const DensityMatrix& rho, cplx beta) {
  if (rho.dims().size() != 1) throw DimensionMismatch("husimi: expects a single-mode cavity state");
  Vector v(rho.dim());
  detail::coherent_amplitudes_into(beta, v);
  return (v.adjoint() * rho.matrix() * v)(0, 0).real() / std::numbers::pi;
}

inline QGrid husimi_q(const DensityMatrix& rho, const GridSpec& grid, int jobs = 1) {
  if (rho.dims().size() != 1) throw DimensionMismatch("husimi_q: expects a single-mode cavity state");
  if (grid.re_points < 2 || grid.im_points < 2) throw InvariantViolation("husimi_q: grid needs >= 2 points per axis");
  QGrid q;
  q.re_axis = detail::linspace(grid.re_min, grid.re_max, grid.re_points);
  q.im_axis = detail::linspace(grid.im_min, grid.im_max, grid.im_points);
  q.cell_area = (q.re_axis[1] - q.re_axis[0]) * (q.im_axis[1] - q.im_axis[0]);
  q.values.resize(grid.re_points, grid.im_points);
  const Matrix& m = rho.matrix();
  parallel_for(static_cast<std::size_t>(grid.re_points), jobs, [&](std::size_t i) {
    Vector v(rho.dim());
    for (int j = 0; j < grid.im_points; ++j) {
      detail::coherent_amplitudes_into(cplx(q.re_axis[i], q.im_axis[j]), v);
      const double val = (v.adjoint() * m * v)(0, 0).real() / std::numbers::pi;
      q.values(static_cast<Eigen::Index>(i), j) = std::max(0.0, val);
    }
  });
  return q;
}

// Angular width (radians) of the set of grid points whose Q value is at least
// half the maximum. Computed as 2 pi minus the largest empty angular gap, so
// a ring that wraps all the way round reports 2 pi.
inline double half_max_phase_extent(const QGrid& q) {
  const double half = 0.5 * q.values.maxCoeff();
  std::vector<double> angles;
  for (Eigen::Index i = 0; i < q.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.values.cols(); ++j) {
      if (q.values(i, j) >= half) angles.push_back(std::atan2(q.im_axis[j], q.re_axis[i]));
    }
  }
  if (angles.size() < 2) return 0.0;
  std::sort(angles.begin(), angles.end());
  double largest_gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t k = 1; k < angles.size(); ++k) largest_gap = std::max(largest_gap, angles[k] - angles[k - 1]);
  return 2.0 * std::numbers::pi - largest_gap;
}

// ---------------------------------------------------------------------------
// Mutual information

// S(Y) + S(Z) - S(YZ), where Y lists subsystems and Z is the complement.
inline double quantum_mutual_information(const DensityMatrix& rho, std::span<const int> part_y) {
  const int k = static_cast<int>(rho.dims().size());
  std::vector<bool> in_y(k, false);
  for (int i : part_y) {
    if (i < 0 || i >= k) throw DimensionMismatch("quantum_mutual_information: subsystem index out of range");
    in_y[i] = true;
  }
  std::vector<int> y;
  std::vector<int> z;
  for (int i = 0; i < k; ++i) (in_y[i] ? y : z).push_back(i);
  if (y.empty() || z.empty()) throw DimensionMismatch("quantum_mutual_information: split must be a bipartition");
  return subsystem_entropy(rho, y) + subsystem_entropy(rho, z) - von_neumann_entropy(rho);
}

inline double quantum_mutual_information(const DensityMatrix& rho, std::initializer_list<int> part_y) {
  return quantum_mutual_information(rho, std::span<const int>(part_y.begin(), part_y.size()));
}

// S[A(0) | L(inf)] from the click / no-click measurement of the displaced
// cavity, for bright fraction x and no-click probability f given b.
inline double conditional_entropy_measurement(double x, double f) {
  if (!(x >= 0.0 && x <= 1.0) || !(f >= 0.0 && f <= 1.0)) {
    throw InvariantViolation("conditional_entropy_measurement: x and f must lie in [0, 1]");
  }
  const double no_click = 1.0 - x * (1.0 - f);
  double s = 0.0;
  if (x * f > 0.0) s -= x * f * std::log(x * f / no_click);
  if (1.0 - x > 0.0) s -= (1.0 - x) * std::log((1.0 - x) / no_click);
  return s;
}

inline double classical_mi_measurement(double x, double f) {
  return particle_entropy(x) - conditional_entropy_measurement(x, f);
}

struct MiThermoLimits {
  double strong = 0.0;  // S_0 - eps(x, m), for m << min[1, ((1-x)/x)^2 / (2 pi)]
  double weak = 0.0;    // -x ln x / (4 m), for m >> 1
  bool strong_valid = false;
  bool weak_valid = false;
};

// Strong and weak coupling asymptotes of the thermodynamic-limit mutual
// information. "<<" and ">>" are read as a factor of 100 and 10.
inline MiThermoLimits mi_thermo_limits(double x, double m) {
  if (!(x > 0.0 && x < 1.0)) throw InvariantViolation("mi_thermo_limits: x must lie in (0, 1)");
  if (!(m > 0.0)) throw InvariantViolation("mi_thermo_limits: m must be > 0");
  const double root = std::sqrt(2.0 * std::numbers::pi * m);
  const double eps = -root * (std::log(root) + std::log(x / (1.0 - x)) - 1.0);
  const double ratio = (1.0 - x) / x;
  const double strong_bound = std::min(1.0, ratio * ratio / (2.0 * std::numbers::pi));
  MiThermoLimits out;
  out.strong = particle_entropy(x) - eps;
  out.weak = -x * std::log(x) / (4.0 * m);
  out.strong_valid = m < 0.01 * strong_bound;
  out.weak_valid = m > 10.0;
  return out;
}

// ---------------------------------------------------------------------------
// Purified-system bookkeeping

struct EntropySnapshot {
  double S_A = 0, S_R = 0, S_L = 0, S_AR = 0, S_AL = 0, S_RL = 0, S_ARL = 0;
  [[nodiscard]] double S_P() const { return S_ARL; }
  [[nodiscard]] double I_RL() const { return S_R + S_L - S_RL; }
};

inline void require_arl(const DensityMatrix& rho, const char* what) {
  if (rho.dims().size() != 3 || rho.dims()[0] != kParticleDim || rho.dims()[1] != kParticleDim) {
    throw DimensionMismatch(std::string(what) + ": expects a [3, 3, n_max+1] state, got " + rho.dims().str());
  }
}

inline EntropySnapshot entropies(const DensityMatrix& arl) {
  require_arl(arl, "entropies");
  EntropySnapshot s;
  s.S_A = subsystem_entropy(arl, {kSubsystemA});
  s.S_R = subsystem_entropy(arl, {kSubsystemR});
  s.S_L = subsystem_entropy(arl, {kSubsystemL});
  s.S_AR = subsystem_entropy(arl, {kSubsystemA, kSubsystemR});
  s.S_AL = subsystem_entropy(arl, {kSubsystemA, kSubsystemL});
  s.S_RL = subsystem_entropy(arl, {kSubsystemR, kSubsystemL});
  s.S_ARL = von_neumann_entropy(arl);
  return s;
}

struct ReservoirEntropies {
  double S_P = 0;   // = S[ARL]
  double S_PR = 0;  // = S[AL]
  double S_PL = 0;  // = S[AR]
};

inline ReservoirEntropies reservoir_entropy(const DensityMatrix& arl) {
  require_arl(arl, "reservoir_entropy");
  return {von_neumann_entropy(arl), subsystem_entropy(arl, {kSubsystemA, kSubsystemL}),
          subsystem_entropy(arl, {kSubsystemA, kSubsystemR})};
}

struct EntanglementReport {
  double S_P = 0, S_R = 0, S_L = 0;
  double I_PR = 0, I_PL = 0;
  double margin_R = 0;  // I(P:R) - S(R)
  double margin_L = 0;  // I(P:L) - S(L)
  bool witness_R = false;
  bool witness_L = false;
  // The margins are only guaranteed positive when the final particle state is
  // close to pure (large photon numbers); this flags that regime.
  double particle_purity = 0;
  bool particle_nearly_pure = false;
};

inline EntanglementReport entanglement_inequalities(const DensityMatrix& arl) {
  require_arl(arl, "entanglement_inequalities");
  const ReservoirEntropies res = reservoir_entropy(arl);
  const DensityMatrix rho_a = partial_trace(arl, {kSubsystemA});
  EntanglementReport r;
  r.S_P = res.S_P;
  r.S_R = subsystem_entropy(arl, {kSubsystemR});
  r.S_L = subsystem_entropy(arl, {kSubsystemL});
  r.I_PR = r.S_P + r.S_R - res.S_PR;
  r.I_PL = r.S_P + r.S_L - res.S_PL;
  r.margin_R = r.I_PR - r.S_R;
  r.margin_L = r.I_PL - r.S_L;
  r.witness_R = r.margin_R > 0.0;
  r.witness_L = r.margin_L > 0.0;
  r.particle_purity = rho_a.purity();
  r.particle_nearly_pure = r.particle_purity > 0.99;
  return r;
}

struct EntropyTimeSeries {
  std::vector<double> times;
  std::map<std::string, std::vector<double>> series;  // A, R, L, RL, ARL, P, I_RL
  double S0 = 0.0;
  ode::StepStats stats;
};

inline EntropyTimeSeries entropy_time_series(const ModelParams& p, double t_end, const EvolveOptions& opts = {}) {
  EntropyTimeSeries out;
  out.S0 = particle_entropy(p.x);
  for (const char* key : {"A", "R", "L", "RL", "ARL", "P", "I_RL"}) out.series[key].reserve(opts.snapshots);
  out.stats = evolve_observed(purified_initial_state(p), p, t_end, opts, [&](std::size_t, double t, const DensityMatrix& rho) {
    const EntropySnapshot s = entropies(rho);
    out.times.push_back(t);
    out.series["A"].push_back(s.S_A);
    out.series["R"].push_back(s.S_R);
    out.series["L"].push_back(s.S_L);
    out.series["RL"].push_back(s.S_RL);
    out.series["ARL"].push_back(s.S_ARL);
    out.series["P"].push_back(s.S_P());
    out.series["I_RL"].push_back(s.I_RL());
  });
  return out;
}

// Equilibrium auxiliary + cavity state
//   x |b><b| (x) rho_c + (1 - x) |d><d| (x) |alpha><alpha|
// on [3, n_max+1], built from the closed forms.
inline DensityMatrix equilibrium_rl_state(const SteadyStateInputs& in, cplx alpha) {
  in.validate();
  const DensityMatrix coherent = DensityMatrix::projector(coherent_state(alpha, in.n_max));
  const DensityMatrix interacted = rho_c(alpha, in.m, in.n_max);
  Matrix pb = Matrix::Zero(kParticleDim, kParticleDim);
  Matrix pd = Matrix::Zero(kParticleDim, kParticleDim);
  pb(kBright, kBright) = 1.0;
  pd(kDark, kDark) = 1.0;
  Matrix rl = in.x * kron(pb, interacted.matrix()) + (1.0 - in.x) * kron(pd, coherent.matrix());
  return DensityMatrix::trusted(std::move(rl), HilbertDims{kParticleDim, in.n_max + 1});
}

// Equilibrium I(R:L) from the closed-form state.
inline double equilibrium_mutual_information(const SteadyStateInputs& in) {
  const DensityMatrix rl = equilibrium_rl_state(in, cplx(std::sqrt(in.n_bar0), 0.0));
  return quantum_mutual_information(rl, {0});
}

}  // namespace cavity_entropy
