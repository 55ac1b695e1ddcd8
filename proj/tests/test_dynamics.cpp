#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cavity_entropy/dynamics.hpp"
#include "cavity_entropy/infotheory.hpp"
#include "cavity_entropy/steady_state.hpp"
#include "test_support.hpp"

using namespace cavity_entropy;

namespace {

ModelParams small_params(double g, double x, cplx alpha, int n_max) {
  ModelParams p;
  p.g = g;
  p.gamma = 1.0;
  p.x = x;
  p.alpha = alpha;
  p.n_max = n_max;
  return p;
}

int index_al(Level level, int n, int n_max) { return level * (n_max + 1) + n; }

}  // namespace

TEST(ModelParams, CriticalNumberAndValidation) {
  EXPECT_DOUBLE_EQ(small_params(1.0, 1.0, 0.0, 3).m(), 0.5);
  EXPECT_TRUE(std::isinf(small_params(0.0, 1.0, 0.0, 3).m()));
  const ModelParams p = ModelParams::from_m(2.0, 0.3, 4.0);
  EXPECT_NEAR(p.m(), 2.0, 1e-14);
  EXPECT_EQ(p.n_max, truncation_dim(4.0, 1e-12));
  EXPECT_EQ(ModelParams::from_m(kInfinity, 0.3, 4.0).g, 0.0);
  EXPECT_THROW(small_params(-1.0, 0.5, 0.0, 3).validate(), InvariantViolation);
  EXPECT_THROW(small_params(1.0, 1.5, 0.0, 3).validate(), InvariantViolation);
}

TEST(ModelParams, EquilibriumHorizon) {
  EXPECT_DOUBLE_EQ(equilibrium_horizon(ModelParams::from_m(0.1, 1.0, 1.0)), 50.0);
  EXPECT_DOUBLE_EQ(equilibrium_horizon(ModelParams::from_m(2.0, 1.0, 1.0)), 50.0);
  const double h10 = equilibrium_horizon(ModelParams::from_m(10.0, 1.0, 1.0));
  const double h100 = equilibrium_horizon(ModelParams::from_m(100.0, 1.0, 1.0));
  EXPECT_GT(h10, 50.0);
  EXPECT_GT(h100, 9.0 * h10);
}

TEST(JaynesCummings, MatrixElementsAndSpectrum) {
  const int n_max = 6;
  const double g = 0.8;
  const OperatorMatrix h = jaynes_cummings_h(small_params(g, 1.0, 0.0, n_max));
  EXPECT_TRUE(h.hermitian());
  EXPECT_NEAR(std::abs(h(index_al(kBright, 1, n_max), index_al(kExcited, 0, n_max)) - g / 2.0), 0.0, 1e-15);
  for (int n = 0; n <= n_max; ++n) {
    EXPECT_NEAR(h.matrix().row(index_al(kDark, n, n_max)).norm(), 0.0, 1e-15);
    EXPECT_NEAR(h.matrix().col(index_al(kDark, n, n_max)).norm(), 0.0, 1e-15);
  }
  // Doublet {|b,n>, |e,n-1>} has eigenvalues +-(g/2) sqrt(n).
  for (int n = 1; n <= n_max; ++n) {
    Matrix block(2, 2);
    const int i = index_al(kBright, n, n_max), j = index_al(kExcited, n - 1, n_max);
    block << h(i, i), h(i, j), h(j, i), h(j, j);
    const auto ev = hermitian_eigenvalues(block);
    EXPECT_NEAR(ev(0), -0.5 * g * std::sqrt(n), 1e-14);
    EXPECT_NEAR(ev(1), 0.5 * g * std::sqrt(n), 1e-14);
  }
}

TEST(LindbladRhs, TracelessHermitianOnRandomStates) {
  std::mt19937_64 rng(3);
  const ModelParams p = small_params(1.3, 0.5, 0.0, 4);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix r = test_support::random_density(15, rng);
    const DensityMatrix rho = DensityMatrix::trusted(r.matrix(), HilbertDims{3, 5});
    const Matrix d = lindblad_rhs(rho, p);
    EXPECT_LT(std::abs(d.trace()), 1e-12);
    EXPECT_LT((d - d.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LindbladRhs, MatchesDirectCommutatorForm) {
  // -i[H, rho] + gamma (J rho J^dag - {J^dag J, rho} / 2) built densely.
  std::mt19937_64 rng(5);
  const int n_max = 3;
  const ModelParams p = small_params(0.7, 0.5, 0.0, n_max);
  const DensityMatrix r = test_support::random_density(3 * (n_max + 1), rng);
  const DensityMatrix rho = DensityMatrix::trusted(r.matrix(), HilbertDims{3, n_max + 1});
  const Matrix h = jaynes_cummings_h(p).matrix();
  const Matrix j = kron(transition(kDark, kExcited, 3).matrix(), Matrix::Identity(n_max + 1, n_max + 1));
  const Matrix jdj = j.adjoint() * j;
  const cplx i(0.0, 1.0);
  const Matrix expected = -i * (h * rho.matrix() - rho.matrix() * h) + p.gamma * (j * rho.matrix() * j.adjoint()) -
                          0.5 * p.gamma * (jdj * rho.matrix() + rho.matrix() * jdj);
  EXPECT_LT((lindblad_rhs(rho, p) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(LindbladRhs, StationaryAndDecayingStates) {
  const int n_max = 4;
  const ModelParams p = small_params(0.0, 0.5, 0.0, n_max);
  Matrix diag = Matrix::Zero(15, 15);
  diag(index_al(kBright, 2, n_max), index_al(kBright, 2, n_max)) = 0.4;
  diag(index_al(kDark, 1, n_max), index_al(kDark, 1, n_max)) = 0.6;
  EXPECT_LT(lindblad_rhs(DensityMatrix(diag, HilbertDims{3, 5}), p).cwiseAbs().maxCoeff(), 1e-15);

  const DensityMatrix e0 = DensityMatrix::projector(basis_ket(index_al(kExcited, 0, n_max), HilbertDims{3, 5}));
  const Matrix d = lindblad_rhs(e0, p);
  EXPECT_NEAR(d(index_al(kExcited, 0, n_max), index_al(kExcited, 0, n_max)).real(), -1.0, 1e-15);
  EXPECT_NEAR(d(index_al(kDark, 0, n_max), index_al(kDark, 0, n_max)).real(), 1.0, 1e-15);
}

TEST(LindbladRhs, DimensionMismatch) {
  const ModelParams p = small_params(1.0, 0.5, 0.0, 4);
  const DensityMatrix wrong = DensityMatrix::projector(basis_ket(0, HilbertDims{3, 4}));
  EXPECT_THROW(lindblad_rhs(wrong, p), DimensionMismatch);
}

TEST(Evolve, MatchesMatrixExponentialOracle) {
  // scipy expm of the vectorised generator: n_bar0 = 1, cutoff 12, g = gamma = 1, t = 2.
  const ModelParams p = small_params(1.0, 1.0, 1.0, 12);
  EvolveOptions opts;
  opts.snapshots = 2;
  const Trajectory traj = evolve(p, 2.0, opts);
  const DensityMatrix a = partial_trace(traj.back(), {0});
  EXPECT_NEAR(a(kBright, kBright).real(), 0.5546599398858107, 1e-7);
  EXPECT_NEAR(a(kExcited, kExcited).real(), 0.20794820877910822, 1e-7);
  EXPECT_NEAR(a(kDark, kDark).real(), 0.23739185133508106, 1e-7);
  const DensityMatrix l = partial_trace(traj.back(), {1});
  EXPECT_NEAR(expectation(number_operator(12), l).real(), 0.5546599391177977, 1e-7);
  EXPECT_NEAR(std::abs(l(0, 1) - cplx(0.4239202590353424, 0.0)), 0.0, 1e-7);
}

TEST(Evolve, StationaryInitialStates) {
  for (const ModelParams& p : {small_params(1.0, 0.0, 1.5, 14), small_params(0.0, 1.0, 1.5, 14)}) {
    EvolveOptions opts;
    opts.snapshots = 6;
    const Trajectory traj = evolve(p, 10.0, opts);
    for (const auto& s : traj.states) {
      EXPECT_LT((s.matrix() - traj.states.front().matrix()).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Evolve, SnapshotInvariants) {
  const ModelParams p = ModelParams::from_m(0.3, 0.6, 2.0);
  EvolveOptions opts;
  opts.snapshots = 21;
  const Trajectory traj = evolve(p, 10.0, opts);
  ASSERT_EQ(traj.size(), 21u);
  EXPECT_DOUBLE_EQ(traj.times.back(), 10.0);
  for (const auto& s : traj.states) {
    EXPECT_NEAR(s.trace(), 1.0, 1e-6);
    EXPECT_LT((s.matrix() - s.matrix().adjoint()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GT(hermitian_eigenvalues(s.matrix()).minCoeff(), -1e-8);
  }
}

TEST(Evolve, EnergyConservedWithoutDissipation) {
  const ModelParams p = small_params(1.0, 1.0, 1.2, 16);
  EvolveOptions opts;
  opts.dissipation = false;
  opts.snapshots = 11;
  const Trajectory traj = evolve(p, 10.0, opts);
  const OperatorMatrix h = jaynes_cummings_h(p);
  const double e0 = expectation(h, traj.states.front()).real();
  for (const auto& s : traj.states) EXPECT_NEAR(expectation(h, s).real(), e0, 1e-8);
}

TEST(Evolve, LongTimeCavityMatchesClosedForm) {
  const ModelParams p = ModelParams::from_m(0.5, 1.0, 5.0);
  EvolveOptions opts;
  opts.snapshots = 51;
  const Trajectory traj = evolve(p, 50.0, opts);
  const DensityMatrix l = partial_trace(traj.back(), {1});
  EXPECT_LT(trace_distance(l, final_cavity_state({1.0, 5.0, 0.5, p.n_max}, p.alpha)), 1e-5);
  // Bright-vacuum remnant x e^{-n}.
  const int vac = index_al(kBright, 0, p.n_max);
  EXPECT_NEAR(traj.back()(vac, vac).real(), std::exp(-5.0), 1e-6);
  ASSERT_TRUE(traj.converged_at.has_value());
  EXPECT_LT(traj.times[*traj.converged_at], 50.0);
  const auto loose = detect_equilibrium(traj, 1e-3);
  ASSERT_TRUE(loose.has_value());
  EXPECT_LE(*loose, *traj.converged_at);
}

TEST(Evolve, Errors) {
  const ModelParams p = small_params(1.0, 1.0, 0.5, 8);
  EXPECT_THROW(evolve(p, 0.0), InvariantViolation);
  EvolveOptions opts;
  opts.snapshots = 1;
  EXPECT_THROW(evolve(p, 1.0, opts), InvariantViolation);
}

TEST(DetectEquilibrium, ConstantTrajectoryAndZeroTolerance) {
  Trajectory traj;
  const DensityMatrix d = DensityMatrix::projector(basis_ket(2 * 4, HilbertDims{3, 4}));
  for (int i = 0; i < 4; ++i) {
    traj.times.push_back(i);
    traj.states.push_back(d);
  }
  EXPECT_EQ(detect_equilibrium(traj, 1e-6), std::optional<std::size_t>(1));
  EXPECT_FALSE(detect_equilibrium(traj, 0.0).has_value());
  EXPECT_THROW(detect_equilibrium(Trajectory{}, 1e-6), InvariantViolation);
}

TEST(EvolvePurified, AuxiliaryEntropyConstant) {
  const ModelParams p = ModelParams::from_m(0.5, 0.3, 1.0);
  EvolveOptions opts;
  opts.snapshots = 11;
  const Trajectory traj = evolve_purified(p, 10.0, opts);
  const double s0 = particle_entropy(0.3);
  for (const auto& s : traj.states) {
    EXPECT_EQ(s.dims(), (HilbertDims{3, 3, p.n_max + 1}));
    EXPECT_NEAR(subsystem_entropy(s, {kSubsystemR}), s0, 1e-8);
  }
}

TEST(EvolvePurified, BrightOnlyKeepsAuxiliaryPure) {
  const ModelParams p = ModelParams::from_m(0.5, 1.0, 1.0);
  EvolveOptions opts;
  opts.snapshots = 3;
  const Trajectory traj = evolve_purified(p, 5.0, opts);
  for (const auto& s : traj.states) EXPECT_NEAR(subsystem_entropy(s, {kSubsystemR}), 0.0, 1e-8);
}
