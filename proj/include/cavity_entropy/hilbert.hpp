#pragma once

// Truncated Fock-space linear algebra: composite dimensions, kets, density
// matrices, ladder operators, Kronecker products, partial traces, coherent
// states and the displacement operator. Everything is dense and complex.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cavity_entropy/errors.hpp"

namespace cavity_entropy {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Particle levels, in basis order. The auxiliary purifying particle R reuses
// the same three-level labelling.
enum Level : int { kBright = 0, kExcited = 1, kDark = 2 };
inline constexpr int kParticleDim = 3;

namespace tol {
inline constexpr double kKetNorm = 1e-10;
inline constexpr double kHermitian = 1e-10;
inline constexpr double kTrace = 1e-8;
inline constexpr double kNegativeEigenvalue = 1e-8;
inline constexpr double kCoherentDeficit = 1e-6;
inline constexpr double kDisplacedEdge = 1e-6;
}  // namespace tol

class HilbertDims {
 public:
  HilbertDims() = default;
  HilbertDims(std::initializer_list<int> dims) : HilbertDims(std::vector<int>(dims)) {}
  explicit HilbertDims(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw DimensionMismatch("HilbertDims: empty dimension list");
    for (int d : dims_) {
      if (d < 1) throw DimensionMismatch("HilbertDims: subsystem dimension must be >= 1");
    }
  }

  [[nodiscard]] std::size_t size() const { return dims_.size(); }
  [[nodiscard]] int operator[](std::size_t i) const { return dims_.at(i); }
  [[nodiscard]] const std::vector<int>& values() const { return dims_; }

  [[nodiscard]] int total() const {
    return std::accumulate(dims_.begin(), dims_.end(), 1, std::multiplies<>());
  }

  [[nodiscard]] HilbertDims concat(const HilbertDims& other) const {
    std::vector<int> out = dims_;
    out.insert(out.end(), other.dims_.begin(), other.dims_.end());
    return HilbertDims(std::move(out));
  }

  [[nodiscard]] std::string str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
    os << ']';
    return os.str();
  }

  bool operator==(const HilbertDims&) const = default;

 private:
  std::vector<int> dims_;
};

namespace detail {

inline std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

inline void require_square(const Matrix& m, const HilbertDims& dims, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(what) + ": matrix is not square");
  }
  if (m.rows() != dims.total()) {
    throw DimensionMismatch(std::string(what) + ": matrix size " + std::to_string(m.rows()) +
                            " does not match dims " + dims.str());
  }
}

inline double hermitian_deviation(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace detail

// Eigenvalues of a Hermitian matrix (only the lower triangle is read).
inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

class Ket {
 public:
  Ket(Vector amplitudes, HilbertDims dims, double renormalization = 1.0)
      : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)), renormalization_(renormalization) {
    if (amplitudes_.size() != dims_.total()) {
      throw DimensionMismatch("Ket: amplitude count does not match dims " + dims_.str());
    }
    const double n2 = amplitudes_.squaredNorm();
    if (std::abs(n2 - 1.0) > tol::kKetNorm) {
      throw InvariantViolation("Ket: squared norm " + detail::sci(n2) + " is not 1");
    }
  }

  [[nodiscard]] const Vector& amplitudes() const { return amplitudes_; }
  [[nodiscard]] const HilbertDims& dims() const { return dims_; }
  // Factor the raw amplitudes were multiplied by to reach unit norm.
  [[nodiscard]] double renormalization() const { return renormalization_; }

 private:
  Vector amplitudes_;
  HilbertDims dims_;
  double renormalization_;
};

class DensityMatrix {
 public:
  // Validating constructor: Hermitian, unit trace, positive semidefinite.
  DensityMatrix(Matrix m, HilbertDims dims) : matrix_(std::move(m)), dims_(std::move(dims)) {
    detail::require_square(matrix_, dims_, "DensityMatrix");
    const double herm = detail::hermitian_deviation(matrix_);
    if (herm > tol::kHermitian) {
      throw InvariantViolation("DensityMatrix: not Hermitian (deviation " + detail::sci(herm) + ")");
    }
    const double tr = matrix_.trace().real();
    if (std::abs(tr - 1.0) > tol::kTrace) {
      throw InvariantViolation("DensityMatrix: trace " + detail::sci(tr) + " is not 1");
    }
    const double lmin = hermitian_eigenvalues(matrix_).minCoeff();
    if (lmin < -tol::kNegativeEigenvalue) {
      throw PositivityError("DensityMatrix: eigenvalue " + detail::sci(lmin) + " below tolerance");
    }
  }

  // Skips the invariant checks; for results that are valid by construction
  // (partial traces, unitary conjugations, projectors).
  static DensityMatrix trusted(Matrix m, HilbertDims dims) {
    detail::require_square(m, dims, "DensityMatrix");
    return DensityMatrix(std::move(m), std::move(dims), Unchecked{});
  }

  static DensityMatrix projector(const Ket& psi) {
    const Vector& v = psi.amplitudes();
    return trusted(v * v.adjoint(), psi.dims());
  }

  [[nodiscard]] const Matrix& matrix() const { return matrix_; }
  [[nodiscard]] const HilbertDims& dims() const { return dims_; }
  [[nodiscard]] int dim() const { return static_cast<int>(matrix_.rows()); }
  [[nodiscard]] double trace() const { return matrix_.trace().real(); }
  [[nodiscard]] double purity() const { return (matrix_ * matrix_).trace().real(); }
  [[nodiscard]] cplx operator()(int r, int c) const { return matrix_(r, c); }

 private:
  struct Unchecked {};
  DensityMatrix(Matrix m, HilbertDims dims, Unchecked) : matrix_(std::move(m)), dims_(std::move(dims)) {}

  Matrix matrix_;
  HilbertDims dims_;
};

class OperatorMatrix {
 public:
  OperatorMatrix(Matrix m, HilbertDims dims, bool hermitian = false)
      : matrix_(std::move(m)), dims_(std::move(dims)), hermitian_(hermitian) {
    detail::require_square(matrix_, dims_, "OperatorMatrix");
    if (hermitian_ && detail::hermitian_deviation(matrix_) > tol::kHermitian) {
      throw InvariantViolation("OperatorMatrix: flagged Hermitian but is not");
    }
  }

  [[nodiscard]] const Matrix& matrix() const { return matrix_; }
  [[nodiscard]] const HilbertDims& dims() const { return dims_; }
  [[nodiscard]] bool hermitian() const { return hermitian_; }
  [[nodiscard]] cplx operator()(int r, int c) const { return matrix_(r, c); }

 private:
  Matrix matrix_;
  HilbertDims dims_;
  bool hermitian_;
};

// ---------------------------------------------------------------------------
// Truncation

// Smallest cutoff whose Poisson(n_bar0) tail above it is below tail_tol, but
// never less than ceil(n_bar0 + 10 sqrt(n_bar0)) + 5.
inline int truncation_dim(double n_bar0, double tail_tol) {
  if (!(n_bar0 >= 0.0) || !std::isfinite(n_bar0)) {
    throw InvariantViolation("truncation_dim: n_bar0 must be finite and >= 0");
  }
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
    throw InvariantViolation("truncation_dim: tail_tol must lie in (0, 1)");
  }
  const int floor_cut = static_cast<int>(std::ceil(n_bar0 + 10.0 * std::sqrt(n_bar0))) + 5;
  if (n_bar0 == 0.0) return floor_cut;

  const double log_mean = std::log(n_bar0);
  auto log_pmf = [&](int k) { return -n_bar0 + k * log_mean - std::lgamma(k + 1.0); };
  auto tail_above = [&](int n) {
    double sum = 0.0;
    for (int k = n + 1;; ++k) {
      const double p = std::exp(log_pmf(k));
      sum += p;
      if (k > n_bar0 && p < 1e-3 * tail_tol * 1e-6) break;
    }
    return sum;
  };
  int n = 0;
  while (tail_above(n) >= tail_tol) ++n;
  return std::max(n, floor_cut);
}

// ---------------------------------------------------------------------------
// States

// Exact coherent-state amplitudes <n|alpha> for n = 0..n_max without
// renormalisation. Computed through log-factorials so n_bar0 ~ 100 is safe.
inline Vector coherent_amplitudes(cplx alpha, int n_max) {
  if (n_max < 0) throw DimensionMismatch("coherent_amplitudes: n_max must be >= 0");
  Vector c = Vector::Zero(n_max + 1);
  const double r = std::abs(alpha);
  if (r == 0.0) {
    c(0) = 1.0;
    return c;
  }
  const double phase = std::arg(alpha);
  const double log_r = std::log(r);
  for (int n = 0; n <= n_max; ++n) {
    const double log_mag = -0.5 * r * r + n * log_r - 0.5 * std::lgamma(n + 1.0);
    c(n) = std::polar(std::exp(log_mag), n * phase);
  }
  return c;
}

inline Ket coherent_state(cplx alpha, int n_max) {
  Vector c = coherent_amplitudes(alpha, n_max);
  const double norm2 = c.squaredNorm();
  if (1.0 - norm2 > tol::kCoherentDeficit) {
    throw TruncationError("coherent_state: cutoff " + std::to_string(n_max) +
                          " loses norm " + detail::sci(1.0 - norm2) + " for |alpha|^2 = " +
                          std::to_string(std::norm(alpha)));
  }
  const double factor = 1.0 / std::sqrt(norm2);
  c *= factor;
  return Ket(std::move(c), HilbertDims{n_max + 1}, factor);
}

inline Ket basis_ket(int index, HilbertDims dims) {
  if (index < 0 || index >= dims.total()) throw DimensionMismatch("basis_ket: index out of range");
  Vector v = Vector::Zero(dims.total());
  v(index) = 1.0;
  return Ket(std::move(v), std::move(dims));
}

inline Ket fock_state(int n, int n_max) { return basis_ket(n, HilbertDims{n_max + 1}); }

// ---------------------------------------------------------------------------
// Operators

inline OperatorMatrix identity(const HilbertDims& dims) {
  return OperatorMatrix(Matrix::Identity(dims.total(), dims.total()), dims, true);
}

inline OperatorMatrix annihilation(int n_max) {
  Matrix a = Matrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return OperatorMatrix(std::move(a), HilbertDims{n_max + 1});
}

inline OperatorMatrix creation(int n_max) {
  Matrix ad = annihilation(n_max).matrix().adjoint();
  return OperatorMatrix(std::move(ad), HilbertDims{n_max + 1});
}

inline OperatorMatrix number_operator(int n_max) {
  Matrix n = Matrix::Zero(n_max + 1, n_max + 1);
  for (int k = 0; k <= n_max; ++k) n(k, k) = static_cast<double>(k);
  return OperatorMatrix(std::move(n), HilbertDims{n_max + 1}, true);
}

// |row><col| on a single subsystem of dimension dim.
inline OperatorMatrix transition(int row, int col, int dim) {
  if (row < 0 || col < 0 || row >= dim || col >= dim) {
    throw DimensionMismatch("transition: level out of range");
  }
  Matrix m = Matrix::Zero(dim, dim);
  m(row, col) = 1.0;
  return OperatorMatrix(std::move(m), HilbertDims{dim}, row == col);
}

inline OperatorMatrix dagger(const OperatorMatrix& op) {
  return OperatorMatrix(op.matrix().adjoint(), op.dims(), op.hermitian());
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b) {
  return OperatorMatrix(kron(a.matrix(), b.matrix()), a.dims().concat(b.dims()),
                        a.hermitian() && b.hermitian());
}

inline Ket tensor(const Ket& a, const Ket& b) {
  Vector v(a.amplitudes().size() * b.amplitudes().size());
  for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i) {
    v.segment(i * b.amplitudes().size(), b.amplitudes().size()) = a.amplitudes()(i) * b.amplitudes();
  }
  return Ket(std::move(v), a.dims().concat(b.dims()));
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::trusted(kron(a.matrix(), b.matrix()), a.dims().concat(b.dims()));
}

inline OperatorMatrix matmul(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dims() != b.dims()) {
    throw DimensionMismatch("matmul: dims " + a.dims().str() + " vs " + b.dims().str());
  }
  return OperatorMatrix(a.matrix() * b.matrix(), a.dims());
}

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dims() != b.dims()) {
    throw DimensionMismatch("commutator: dims " + a.dims().str() + " vs " + b.dims().str());
  }
  return OperatorMatrix(a.matrix() * b.matrix() - b.matrix() * a.matrix(), a.dims());
}

inline Vector apply(const OperatorMatrix& op, const Ket& psi) {
  if (op.dims() != psi.dims()) throw DimensionMismatch("apply: dims differ");
  return op.matrix() * psi.amplitudes();
}

// Tr[op rho]
inline cplx expectation(const OperatorMatrix& op, const DensityMatrix& rho) {
  if (op.dims() != rho.dims()) throw DimensionMismatch("expectation: dims differ");
  return (op.matrix() * rho.matrix()).trace();
}

// ---------------------------------------------------------------------------
// Partial trace

// Keeps the listed subsystems (in their original order) and traces the rest.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const HilbertDims& dims = rho.dims();
  const int k = static_cast<int>(dims.size());
  if (keep.empty()) throw DimensionMismatch("partial_trace: nothing to keep");
  std::vector<bool> kept(k, false);
  for (int idx : keep) {
    if (idx < 0 || idx >= k) throw DimensionMismatch("partial_trace: subsystem index out of range");
    if (kept[idx]) throw DimensionMismatch("partial_trace: duplicate subsystem index");
    kept[idx] = true;
  }

  std::vector<int> kept_dims;
  int traced_total = 1;
  for (int i = 0; i < k; ++i) {
    if (kept[i]) {
      kept_dims.push_back(dims[i]);
    } else {
      traced_total *= dims[i];
    }
  }
  HilbertDims out_dims(kept_dims);
  const int kept_total = out_dims.total();

  // full_index[kidx * traced_total + tidx]
  std::vector<int> full_index(static_cast<std::size_t>(dims.total()));
  std::vector<int> stride(k, 1);
  for (int i = k - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];
  for (int full = 0; full < dims.total(); ++full) {
    int kidx = 0;
    int tidx = 0;
    for (int i = 0; i < k; ++i) {
      const int digit = (full / stride[i]) % dims[i];
      if (kept[i]) {
        kidx = kidx * dims[i] + digit;
      } else {
        tidx = tidx * dims[i] + digit;
      }
    }
    full_index[static_cast<std::size_t>(kidx) * traced_total + tidx] = full;
  }

  const Matrix& m = rho.matrix();
  Matrix out = Matrix::Zero(kept_total, kept_total);
  for (int c = 0; c < kept_total; ++c) {
    for (int r = 0; r < kept_total; ++r) {
      cplx acc = 0.0;
      for (int t = 0; t < traced_total; ++t) {
        acc += m(full_index[static_cast<std::size_t>(r) * traced_total + t],
                 full_index[static_cast<std::size_t>(c) * traced_total + t]);
      }
      out(r, c) = acc;
    }
  }
  return DensityMatrix::trusted(std::move(out), std::move(out_dims));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

// ---------------------------------------------------------------------------
// Distances

inline double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("trace_distance: sizes differ");
  const Matrix diff = a - b;
  const Matrix herm = 0.5 * (diff + diff.adjoint());
  return 0.5 * hermitian_eigenvalues(herm).cwiseAbs().sum();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dims() != b.dims()) throw DimensionMismatch("trace_distance: dims differ");
  return trace_distance(a.matrix(), b.matrix());
}

// ---------------------------------------------------------------------------
// Displacement

// Unitary exp(beta a^dag - beta^* a) on Fock levels 0..n_max. The generator is
// anti-Hermitian, so the exponential goes through the eigendecomposition of
// the Hermitian matrix i * generator.
inline OperatorMatrix displacement_operator(cplx beta, int n_max) {
  const Matrix a = annihilation(n_max).matrix();
  const Matrix gen = beta * a.adjoint() - std::conj(beta) * a;
  const Matrix herm = cplx(0.0, 1.0) * gen;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (herm + herm.adjoint()));
  const Eigen::VectorXd& w = es.eigenvalues();
  Vector phases(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) phases(i) = std::polar(1.0, -w(i));
  Matrix d = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return OperatorMatrix(std::move(d), HilbertDims{n_max + 1});
}

// eta = D(-alpha) rho D(-alpha)^dag for a single-mode cavity state. The
// unitary is built on an enlarged Fock space so the result on levels
// 0..n_max is free of cutoff artefacts; a state pushed into the cutoff raises
// TruncationError.
inline DensityMatrix displace(const DensityMatrix& rho, cplx alpha) {
  if (rho.dims().size() != 1) throw DimensionMismatch("displace: expects a single-mode cavity state");
  const int n_max = rho.dim() - 1;
  if (alpha == cplx(0.0, 0.0)) return rho;
  const double reach = std::sqrt(static_cast<double>(n_max)) + std::abs(alpha);
  const int big = std::max(n_max, static_cast<int>(std::ceil(reach * reach + 10.0 * reach)) + 10);

  const Matrix d = displacement_operator(-alpha, big).matrix();
  const Matrix d_cols = d.leftCols(n_max + 1);
  Matrix eta_big = d_cols * rho.matrix() * d_cols.adjoint();
  Matrix eta = eta_big.topLeftCorner(n_max + 1, n_max + 1);
  eta = 0.5 * (eta + eta.adjoint()).eval();

  const double edge = eta(n_max, n_max).real();
  const double lost = rho.trace() - eta.trace().real();
  if (edge > tol::kDisplacedEdge || lost > tol::kDisplacedEdge) {
    throw TruncationError("displace: displaced state reaches the cutoff (edge population " +
                          detail::sci(edge) + ", lost trace " + detail::sci(lost) + ")");
  }
  return DensityMatrix::trusted(std::move(eta), rho.dims());
}

}  // namespace cavity_entropy
