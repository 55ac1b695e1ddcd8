#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "cavity_entropy/hilbert.hpp"
#include "cavity_entropy/steady_state.hpp"
#include "test_support.hpp"

using namespace cavity_entropy;

TEST(HilbertDims, RejectsEmptyAndNonPositive) {
  EXPECT_THROW(HilbertDims(std::vector<int>{}), DimensionMismatch);
  EXPECT_THROW((HilbertDims{3, 0}), DimensionMismatch);
  const HilbertDims d{3, 3, 11};
  EXPECT_EQ(d.total(), 99);
  EXPECT_EQ(d.str(), "[3,3,11]");
  EXPECT_EQ(d.concat(HilbertDims{2}), (HilbertDims{3, 3, 11, 2}));
}

TEST(DensityMatrix, ConstructorEnforcesInvariants) {
  Matrix good = Matrix::Zero(2, 2);
  good(0, 0) = 0.25;
  good(1, 1) = 0.75;
  EXPECT_NO_THROW(DensityMatrix(good, HilbertDims{2}));

  Matrix non_herm = good;
  non_herm(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix(non_herm, HilbertDims{2}), InvariantViolation);

  Matrix bad_trace = good * 1.1;
  EXPECT_THROW(DensityMatrix(bad_trace, HilbertDims{2}), InvariantViolation);

  Matrix negative = Matrix::Zero(2, 2);
  negative(0, 0) = 1.1;
  negative(1, 1) = -0.1;
  EXPECT_THROW(DensityMatrix(negative, HilbertDims{2}), PositivityError);

  EXPECT_THROW(DensityMatrix(good, HilbertDims{3}), DimensionMismatch);
}

TEST(Ket, RejectsUnnormalised) {
  Vector v = Vector::Zero(2);
  v(0) = 1.0;
  v(1) = 1e-3;
  EXPECT_THROW(Ket(v, HilbertDims{2}), InvariantViolation);
}

TEST(OperatorMatrix, HermitianFlagChecked) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(OperatorMatrix(m, HilbertDims{2}, true), InvariantViolation);
  EXPECT_NO_THROW(OperatorMatrix(m, HilbertDims{2}, false));
}

TEST(TruncationDim, FloorAndPoissonTail) {
  // Floor ceil(n + 10 sqrt(n)) + 5 and Poisson cut-offs from the mpmath oracle.
  EXPECT_EQ(truncation_dim(0.0, 1e-12), 5);
  EXPECT_GE(truncation_dim(100.0, 1e-12), 205);
  EXPECT_EQ(truncation_dim(100.0, 1e-12), 205);  // tail cut 178
  EXPECT_EQ(truncation_dim(10.0, 1e-12), 47);    // tail cut 39
  EXPECT_EQ(truncation_dim(0.1, 1e-12), 9);      // tail cut 7
  EXPECT_EQ(truncation_dim(1.0, 1e-30), 28);     // tail beats floor 16
  EXPECT_EQ(truncation_dim(4.0, 1e-40), 53);     // tail beats floor 29
  EXPECT_THROW(truncation_dim(-1.0, 1e-12), InvariantViolation);
  EXPECT_THROW(truncation_dim(1.0, 1.0), InvariantViolation);
}

TEST(CoherentState, VacuumAndMeanPhotonNumber) {
  const Ket vac = coherent_state(0.0, 5);
  EXPECT_NEAR(std::abs(vac.amplitudes()(0)), 1.0, 1e-15);
  EXPECT_NEAR(vac.amplitudes().tail(5).norm(), 0.0, 1e-15);

  const int n_max = truncation_dim(100.0, 1e-12);
  const Ket ten = coherent_state(10.0, n_max);
  const double mean = expectation(number_operator(n_max), DensityMatrix::projector(ten)).real();
  EXPECT_NEAR(mean, 100.0, 1e-8);
  EXPECT_NEAR(ten.renormalization(), 1.0, 1e-8);

  const Ket root5 = coherent_state(std::sqrt(5.0), truncation_dim(5.0, 1e-12));
  EXPECT_NEAR(std::norm(root5.amplitudes().dot(root5.amplitudes())), 1.0, 1e-10);
}

TEST(CoherentState, TruncationErrorWhenCutoffTooSmall) {
  EXPECT_THROW(coherent_state(3.0, 5), TruncationError);
}

TEST(CoherentState, PhaseOfComplexAmplitude) {
  const cplx alpha(1.0, 1.0);
  const Ket k = coherent_state(alpha, 30);
  const double norm0 = std::exp(-0.5 * std::norm(alpha));
  EXPECT_NEAR(std::abs(k.amplitudes()(1) - norm0 * alpha), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(k.amplitudes()(2) - norm0 * alpha * alpha / std::sqrt(2.0)), 0.0, 1e-12);
}

TEST(LadderOperators, ActionAndCommutator) {
  const int n_max = 12;
  const Matrix a = annihilation(n_max).matrix();
  const Vector one = fock_state(1, n_max).amplitudes();
  const Vector out = a * one;
  EXPECT_NEAR(std::abs(out(0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(out.tail(n_max).norm(), 0.0, 1e-15);

  const Matrix comm = commutator(annihilation(n_max), creation(n_max)).matrix();
  for (int n = 0; n < n_max - 1; ++n) {
    for (int k = 0; k < n_max - 1; ++k) EXPECT_NEAR(std::abs(comm(n, k) - (n == k ? 1.0 : 0.0)), 0.0, 1e-12);
  }
}

TEST(LadderOperators, CoherentEigenstate) {
  const cplx alpha(1.5, -0.5);
  const int n_max = truncation_dim(std::norm(alpha), 1e-12);
  const Ket k = coherent_state(alpha, n_max);
  const Vector lhs = apply(annihilation(n_max), k);
  const Vector rhs = alpha * k.amplitudes();
  for (int n = 0; n <= n_max - 3; ++n) EXPECT_LT(std::abs(lhs(n) - rhs(n)), 1e-6) << "n=" << n;
}

TEST(Tensor, DimensionsAndMismatch) {
  const auto op = tensor(identity(HilbertDims{3}), number_operator(4));
  EXPECT_EQ(op.dims(), (HilbertDims{3, 5}));
  EXPECT_THROW(matmul(identity(HilbertDims{3}), number_operator(4)), DimensionMismatch);
}

TEST(PartialTrace, PurifiedParticleGivesDiagonalMixture) {
  Vector u = Vector::Zero(9);
  u(kBright * 3 + kBright) = std::sqrt(0.5);
  u(kDark * 3 + kDark) = std::sqrt(0.5);
  const DensityMatrix ar = DensityMatrix::projector(Ket(u, HilbertDims{3, 3}));
  const DensityMatrix a = partial_trace(ar, {0});
  EXPECT_NEAR(a(kBright, kBright).real(), 0.5, 1e-15);
  EXPECT_NEAR(a(kExcited, kExcited).real(), 0.0, 1e-15);
  EXPECT_NEAR(a(kDark, kDark).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(a(kBright, kDark)), 0.0, 1e-15);
}

TEST(PartialTrace, ProductStatePropertyOnRandomFactors) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix a = test_support::random_density(3, rng);
    const DensityMatrix b = test_support::random_density(4, rng);
    const DensityMatrix ab = tensor(a, b);
    EXPECT_LT((partial_trace(ab, {0}).matrix() - a.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((partial_trace(ab, {1}).matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(partial_trace(ab, {1}).trace(), 1.0, 1e-10);
  }
}

TEST(PartialTrace, InitialPurifiedStateReducesToCoherentCavity) {
  const DensityMatrix rho_a = DensityMatrix::projector(coherent_state(cplx(1.2, 0.3), 20));
  Vector u = Vector::Zero(9);
  u(0) = std::sqrt(0.3);
  u(8) = std::sqrt(0.7);
  const DensityMatrix arl = tensor(DensityMatrix::projector(Ket(u, HilbertDims{3, 3})), rho_a);
  EXPECT_LT((partial_trace(arl, {2}).matrix() - rho_a.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  const DensityMatrix al = partial_trace(arl, {0, 2});
  EXPECT_EQ(al.dims(), (HilbertDims{3, 21}));
}

TEST(PartialTrace, RejectsBadIndices) {
  const DensityMatrix rho = DensityMatrix::projector(basis_ket(0, HilbertDims{2, 2}));
  EXPECT_THROW(partial_trace(rho, {2}), DimensionMismatch);
  EXPECT_THROW(partial_trace(rho, std::span<const int>{}), DimensionMismatch);
}

TEST(Displace, InvertsCoherentState) {
  const cplx alpha(2.0, -1.0);
  const int n_max = truncation_dim(std::norm(alpha), 1e-12);
  const DensityMatrix rho = DensityMatrix::projector(coherent_state(alpha, n_max));
  const DensityMatrix eta = displace(rho, alpha);
  EXPECT_NEAR(eta(0, 0).real(), 1.0, 1e-6);

  const DensityMatrix vac = DensityMatrix::projector(fock_state(0, 6));
  EXPECT_LT((displace(vac, 0.0).matrix() - vac.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Displace, RoundTripAndUnitarity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    // Random state supported on the low Fock levels of a 25-level space.
    const DensityMatrix small = test_support::random_density(4, rng);
    Matrix m = Matrix::Zero(25, 25);
    m.topLeftCorner(4, 4) = small.matrix();
    const DensityMatrix rho(m, HilbertDims{25});
    const cplx beta(0.6 * trial / 4.0, -0.4);
    const DensityMatrix out = displace(rho, beta);
    EXPECT_NEAR(out.trace(), 1.0, 1e-8);
    const auto ev_in = hermitian_eigenvalues(rho.matrix());
    const auto ev_out = hermitian_eigenvalues(out.matrix());
    EXPECT_LT((ev_in - ev_out).cwiseAbs().maxCoeff(), 1e-8);
    const DensityMatrix back = displace(out, -beta);
    EXPECT_LT((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Displace, VacuumPopulationEqualsFidelity) {
  const double n = 5.0;
  const SteadyStateInputs in = SteadyStateInputs::make(0.6, n, 0.7);
  const cplx alpha(std::sqrt(n), 0.0);
  const DensityMatrix eta = displace(final_cavity_state(in, alpha), alpha);
  EXPECT_NEAR(eta(0, 0).real(), fidelity_F(in), 1e-6);
}

TEST(Displace, ThrowsWhenPushedIntoCutoff) {
  const DensityMatrix rho = DensityMatrix::projector(fock_state(0, 4));
  EXPECT_THROW(displace(rho, 3.0), TruncationError);
}

TEST(TraceDistance, BasicValues) {
  const DensityMatrix zero = DensityMatrix::projector(fock_state(0, 1));
  const DensityMatrix one = DensityMatrix::projector(fock_state(1, 1));
  EXPECT_NEAR(trace_distance(zero, one), 1.0, 1e-14);
  EXPECT_NEAR(trace_distance(zero, zero), 0.0, 1e-14);
}
