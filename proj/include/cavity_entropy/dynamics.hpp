#pragma once

// Master-equation dynamics of a three-level particle (levels b, e, d) coupled
// to a lossless single-mode cavity on the b <-> e transition, with spontaneous
// emission e -> d at rate gamma. The same generator drives the purified
// particle + auxiliary + cavity system, where the auxiliary subsystem only
// carries identities.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "cavity_entropy/errors.hpp"
#include "cavity_entropy/hilbert.hpp"
#include "cavity_entropy/ode.hpp"

namespace cavity_entropy {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct ModelParams {
  double g = 1.0;      // particle-cavity coupling (units of gamma)
  double gamma = 1.0;  // spontaneous emission rate e -> d
  double x = 1.0;      // initial bright-state probability
  cplx alpha = 0.0;    // initial coherent amplitude of the cavity
  int n_max = 5;       // cavity Fock cutoff

  // Critical photon number (gamma/g)^2 / 2; infinite when g = 0.
  [[nodiscard]] double m() const {
    if (g == 0.0) return kInfinity;
    const double r = gamma / g;
    return 0.5 * r * r;
  }

  [[nodiscard]] double n_bar0() const { return std::norm(alpha); }

  void validate() const {
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvariantViolation("ModelParams: g must be finite and >= 0");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvariantViolation("ModelParams: gamma must be > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw InvariantViolation("ModelParams: x must lie in [0, 1]");
    if (n_max < 1) throw InvariantViolation("ModelParams: n_max must be >= 1");
  }

  // gamma = 1, g from m (m = +inf gives g = 0), real alpha = sqrt(n_bar0),
  // cutoff from truncation_dim.
  static ModelParams from_m(double m, double x, double n_bar0, double tail_tol = 1e-12) {
    if (!(m > 0.0)) throw InvariantViolation("ModelParams::from_m: m must be > 0");
    ModelParams p;
    p.gamma = 1.0;
    p.g = std::isinf(m) ? 0.0 : p.gamma / std::sqrt(2.0 * m);
    p.x = x;
    p.alpha = std::sqrt(n_bar0);
    p.n_max = truncation_dim(n_bar0, tail_tol);
    p.validate();
    return p;
  }
};

// Time after which the slowest bright-manifold mode (one photon) has decayed
// by e^-25 in population, and never less than 50 / gamma.
inline double equilibrium_horizon(const ModelParams& p) {
  const double base = 50.0 / p.gamma;
  if (p.g == 0.0) return base;
  // Population decay rate of the slow one-photon eigenmode.
  const cplx disc = std::sqrt(cplx(0.25 * p.gamma * p.gamma - p.g * p.g, 0.0));
  const double slow_rate = 0.5 * p.gamma - disc.real();
  return std::max(base, 25.0 / slow_rate);
}

// Jaynes-Cummings coupling (g/2)(|b><e| a^dag + |e><b| a) on particle (x) cavity.
inline OperatorMatrix jaynes_cummings_h(const ModelParams& p) {
  p.validate();
  const int nc = p.n_max + 1;
  Matrix h = Matrix::Zero(kParticleDim * nc, kParticleDim * nc);
  for (int n = 1; n < nc; ++n) {
    const double v = 0.5 * p.g * std::sqrt(static_cast<double>(n));
    h(kBright * nc + n, kExcited * nc + n - 1) = v;
    h(kExcited * nc + n - 1, kBright * nc + n) = v;
  }
  return OperatorMatrix(std::move(h), HilbertDims{kParticleDim, nc}, true);
}

// Sparse Lindblad generator on particle (x) [auxiliary...] (x) cavity. The
// particle is subsystem 0 and the cavity the last subsystem; anything in
// between is acted on by the identity.
class LindbladGenerator {
 public:
  using Sparse = Eigen::SparseMatrix<cplx>;

  LindbladGenerator(const ModelParams& p, const HilbertDims& dims, bool dissipation = true)
      : dims_(dims), gamma_(dissipation ? p.gamma : 0.0) {
    p.validate();
    if (dims.size() < 2 || dims[0] != kParticleDim || dims[dims.size() - 1] != p.n_max + 1) {
      throw DimensionMismatch("LindbladGenerator: dims " + dims.str() +
                              " must be [3, ..., n_max+1] with n_max = " + std::to_string(p.n_max));
    }
    const int nc = p.n_max + 1;
    int mid = 1;
    for (std::size_t i = 1; i + 1 < dims.size(); ++i) mid *= dims[i];
    const int d = dims.total();
    auto index = [&](int level, int r, int n) { return (level * mid + r) * nc + n; };

    std::vector<Eigen::Triplet<cplx>> h_trip;
    std::vector<Eigen::Triplet<cplx>> j_trip;
    for (int r = 0; r < mid; ++r) {
      for (int n = 1; n < nc; ++n) {
        const double v = 0.5 * p.g * std::sqrt(static_cast<double>(n));
        if (v != 0.0) {
          h_trip.emplace_back(index(kBright, r, n), index(kExcited, r, n - 1), v);
          h_trip.emplace_back(index(kExcited, r, n - 1), index(kBright, r, n), v);
        }
      }
      for (int n = 0; n < nc; ++n) {
        if (gamma_ != 0.0) h_trip.emplace_back(index(kExcited, r, n), index(kExcited, r, n), cplx(0.0, -0.5 * gamma_));
        j_trip.emplace_back(index(kDark, r, n), index(kExcited, r, n), 1.0);
      }
    }
    heff_.resize(d, d);
    heff_.setFromTriplets(h_trip.begin(), h_trip.end());
    heff_adj_ = heff_.adjoint();
    jump_.resize(d, d);
    jump_.setFromTriplets(j_trip.begin(), j_trip.end());
    jump_adj_ = jump_.adjoint();
  }

  [[nodiscard]] const HilbertDims& dims() const { return dims_; }

  // d rho / dt = -i (H_eff rho - rho H_eff^dag) + gamma J rho J^dag, which is
  // the Lindblad form with H_eff = H - (i gamma / 2) J^dag J.
  void apply(const Matrix& rho, Matrix& out) const {
    out.noalias() = heff_ * rho;
    out = cplx(0.0, -1.0) * out;
    out.noalias() += cplx(0.0, 1.0) * (rho * heff_adj_);
    if (gamma_ != 0.0) {
      Matrix jr = jump_ * rho;
      out.noalias() += gamma_ * (jr * jump_adj_);
    }
  }

  [[nodiscard]] Matrix operator()(const Matrix& rho) const {
    Matrix out;
    apply(rho, out);
    return out;
  }

 private:
  HilbertDims dims_;
  double gamma_;
  Sparse heff_, heff_adj_, jump_, jump_adj_;
};

inline Matrix lindblad_rhs(const DensityMatrix& rho, const ModelParams& p) {
  return LindbladGenerator(p, rho.dims())(rho.matrix());
}

// rho_A(0) (x) |alpha><alpha| with rho_A(0) = x |b><b| + (1 - x) |d><d|.
inline DensityMatrix initial_state(const ModelParams& p) {
  p.validate();
  Matrix particle = Matrix::Zero(kParticleDim, kParticleDim);
  particle(kBright, kBright) = p.x;
  particle(kDark, kDark) = 1.0 - p.x;
  const auto cavity = DensityMatrix::projector(coherent_state(p.alpha, p.n_max));
  return tensor(DensityMatrix::trusted(std::move(particle), HilbertDims{kParticleDim}), cavity);
}

// |u><u| (x) |alpha><alpha| on particle (x) auxiliary (x) cavity, with
// |u> = sqrt(x) |b,b> + sqrt(1 - x) |d,d>.
inline DensityMatrix purified_initial_state(const ModelParams& p) {
  p.validate();
  Vector u = Vector::Zero(kParticleDim * kParticleDim);
  u(kBright * kParticleDim + kBright) = std::sqrt(p.x);
  u(kDark * kParticleDim + kDark) = std::sqrt(1.0 - p.x);
  const Ket pair(std::move(u), HilbertDims{kParticleDim, kParticleDim});
  return DensityMatrix::projector(tensor(pair, coherent_state(p.alpha, p.n_max)));
}

struct EvolveOptions {
  ode::Tolerance tolerance{};
  int snapshots = 101;           // stored states, evenly spaced over [0, t_end]
  bool dissipation = true;       // false switches off the jump term (testing)
  double equilibrium_tol = 1e-6; // for Trajectory::converged_at
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::optional<std::size_t> converged_at;
  ode::StepStats stats;

  [[nodiscard]] std::size_t size() const { return states.size(); }
  [[nodiscard]] const DensityMatrix& back() const { return states.back(); }
};

inline double excited_population(const DensityMatrix& rho) {
  const int block = rho.dim() / rho.dims()[0];
  double pop = 0.0;
  for (int i = 0; i < block; ++i) pop += rho(kExcited * block + i, kExcited * block + i).real();
  return pop;
}

// First snapshot index i >= 1 at which both the trace-distance change rate
// |rho_i - rho_{i-1}|_tr / (t_i - t_{i-1}) and the excited population are
// strictly below tol.
inline std::optional<std::size_t> detect_equilibrium(const Trajectory& traj, double tol) {
  if (traj.states.empty()) throw InvariantViolation("detect_equilibrium: empty trajectory");
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    if (!(excited_population(traj.states[i]) < tol)) continue;
    const double dt = traj.times[i] - traj.times[i - 1];
    const double rate = trace_distance(traj.states[i], traj.states[i - 1]) / dt;
    if (rate < tol) return i;
  }
  return std::nullopt;
}

using SnapshotObserver = std::function<void(std::size_t, double, const DensityMatrix&)>;

// Propagates rho0 to t_end and hands each of `opts.snapshots` evenly spaced
// states (including t = 0) to the observer. Every snapshot is Hermitian by
// construction, has trace drift below 1e-6 and no eigenvalue below -1e-8.
inline ode::StepStats evolve_observed(const DensityMatrix& rho0, const ModelParams& p, double t_end,
                                      const EvolveOptions& opts, const SnapshotObserver& observer) {
  if (!(t_end > 0.0)) throw InvariantViolation("evolve: t_end must be > 0");
  if (opts.snapshots < 2) throw InvariantViolation("evolve: need at least two snapshots");
  const LindbladGenerator gen(p, rho0.dims(), opts.dissipation);

  std::vector<double> out_times(static_cast<std::size_t>(opts.snapshots));
  for (int i = 0; i < opts.snapshots; ++i) out_times[i] = t_end * i / (opts.snapshots - 1);
  out_times.back() = t_end;

  ode::DormandPrince<Matrix> solver(opts.tolerance);
  auto rhs = [&gen](double, const Matrix& y, Matrix& dy) { gen.apply(y, dy); };
  auto hermitize = [](Matrix& y, Matrix& dy) {
    y = 0.5 * (y + y.adjoint()).eval();
    dy = 0.5 * (dy + dy.adjoint()).eval();
  };
  auto on_output = [&](std::size_t idx, double t, const Matrix& y) {
    const double tr = y.trace().real();
    if (std::abs(tr - 1.0) > 1e-6) {
      throw IntegrationError("evolve: trace drifted to " + detail::sci(tr) + " at t = " + std::to_string(t));
    }
    const double lmin = hermitian_eigenvalues(y).minCoeff();
    if (lmin < -tol::kNegativeEigenvalue) {
      throw PositivityError("evolve: eigenvalue " + detail::sci(lmin) + " at t = " + std::to_string(t));
    }
    observer(idx, t, DensityMatrix::trusted(y, rho0.dims()));
  };
  return solver.integrate(rhs, 0.0, rho0.matrix(), out_times, on_output, hermitize);
}

inline Trajectory evolve(const DensityMatrix& rho0, const ModelParams& p, double t_end,
                         const EvolveOptions& opts = {}) {
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(opts.snapshots));
  traj.states.reserve(static_cast<std::size_t>(opts.snapshots));
  traj.stats = evolve_observed(rho0, p, t_end, opts, [&](std::size_t, double t, const DensityMatrix& rho) {
    traj.times.push_back(t);
    traj.states.push_back(rho);
  });
  if (opts.equilibrium_tol > 0.0) traj.converged_at = detect_equilibrium(traj, opts.equilibrium_tol);
  return traj;
}

inline Trajectory evolve(const ModelParams& p, double t_end, const EvolveOptions& opts = {}) {
  return evolve(initial_state(p), p, t_end, opts);
}

inline Trajectory evolve_purified(const ModelParams& p, double t_end, const EvolveOptions& opts = {}) {
  return evolve(purified_initial_state(p), p, t_end, opts);
}

}  // namespace cavity_entropy
