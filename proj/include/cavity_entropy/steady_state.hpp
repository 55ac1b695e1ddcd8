#pragma once

// Closed-form equilibrium of the particle-cavity system: interaction kernel,
// the interaction-branch cavity state rho_c, the final cavity state, the
// conditional fidelity (finite photon number and thermodynamic limit), the
// critical-number thresholds, final intensity and the phase-scrambling
// estimate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "cavity_entropy/dynamics.hpp"
#include "cavity_entropy/errors.hpp"
#include "cavity_entropy/hilbert.hpp"
#include "cavity_entropy/numerics.hpp"

namespace cavity_entropy {

struct SteadyStateInputs {
  double x = 1.0;
  double n_bar0 = 0.0;  // |alpha|^2; +inf selects the thermodynamic limit
  double m = 1.0;       // +inf encodes g = 0
  int n_max = 5;

  void validate() const {
    if (!(x >= 0.0 && x <= 1.0)) throw InvariantViolation("SteadyStateInputs: x must lie in [0, 1]");
    if (!(n_bar0 >= 0.0)) throw InvariantViolation("SteadyStateInputs: n_bar0 must be >= 0");
    if (!(m > 0.0)) throw InvariantViolation("SteadyStateInputs: m must be > 0");
    if (n_max < 1) throw InvariantViolation("SteadyStateInputs: n_max must be >= 1");
  }

  static SteadyStateInputs make(double x, double n_bar0, double m, double tail_tol = 1e-12) {
    SteadyStateInputs in{x, n_bar0, m, std::isinf(n_bar0) ? 1 : truncation_dim(n_bar0, tail_tol)};
    in.validate();
    return in;
  }
};

// K_{l,l'} = (1 + (l + l')/2 + (l - l')^2 / (8 m))^-1
inline double kernel_K(int l, int lp, double m) {
  if (l < 0 || lp < 0) throw InvariantViolation("kernel_K: indices must be >= 0");
  if (!(m > 0.0)) throw InvariantViolation("kernel_K: m must be > 0");
  const double diff = static_cast<double>(l - lp);
  const double spread = std::isinf(m) ? 0.0 : diff * diff / (8.0 * m);
  return 1.0 / (1.0 + 0.5 * (l + lp) + spread);
}

// rho_c = e^{-|alpha|^2} |0><0| + |alpha|^2 sum_{l,l'} K_{l,l'} <l'|alpha><alpha|l> |l'><l|,
// the cavity state left behind when the particle starts bright. m = +inf
// (no coupling) leaves the coherent state untouched.
inline DensityMatrix rho_c(cplx alpha, double m, int n_max) {
  if (!(m > 0.0)) throw InvariantViolation("rho_c: m must be > 0");
  if (std::isinf(m)) return DensityMatrix::projector(coherent_state(alpha, n_max));

  const Vector c = coherent_amplitudes(alpha, n_max);
  const double n_bar0 = std::norm(alpha);
  const int dim = n_max + 1;
  Matrix rho(dim, dim);
  for (int l = 0; l < dim; ++l) {
    for (int lp = 0; lp < dim; ++lp) {
      rho(lp, l) = n_bar0 * kernel_K(l, lp, m) * c(lp) * std::conj(c(l));
    }
  }
  rho(0, 0) += std::exp(-n_bar0);

  const double deficit = 1.0 - rho.trace().real();
  if (deficit > 1e-5) {
    throw TruncationError("rho_c: cutoff " + std::to_string(n_max) + " loses trace " + detail::sci(deficit));
  }
  const double lmin = hermitian_eigenvalues(rho).minCoeff();
  if (lmin < -tol::kNegativeEigenvalue) {
    throw PositivityError("rho_c: eigenvalue " + detail::sci(lmin));
  }
  return DensityMatrix::trusted(std::move(rho), HilbertDims{dim});
}

// rho_L(inf) = (1 - x) |alpha><alpha| + x rho_c
inline DensityMatrix final_cavity_state(const SteadyStateInputs& in, cplx alpha) {
  in.validate();
  if (std::abs(std::norm(alpha) - in.n_bar0) > 1e-12 * std::max(1.0, in.n_bar0)) {
    throw InvariantViolation("final_cavity_state: |alpha|^2 does not match n_bar0");
  }
  const DensityMatrix coherent = DensityMatrix::projector(coherent_state(alpha, in.n_max));
  const DensityMatrix interacted = rho_c(alpha, in.m, in.n_max);
  Matrix mix = (1.0 - in.x) * coherent.matrix() + in.x * interacted.matrix();
  return DensityMatrix::trusted(std::move(mix), HilbertDims{in.n_max + 1});
}

// f = e^{-2 n} (1 + n sum_{l,l'} K_{l,l'} n^{l+l'} / (l! l'!)), summed in log
// space over l, l' <= n_max.
inline double conditional_fidelity_sum(double n_bar0, double m, int n_max) {
  if (!(n_bar0 >= 0.0) || !std::isfinite(n_bar0)) {
    throw InvariantViolation("conditional_fidelity_sum: n_bar0 must be finite and >= 0");
  }
  if (!(m > 0.0)) throw InvariantViolation("conditional_fidelity_sum: m must be > 0");
  if (n_bar0 == 0.0 || std::isinf(m)) return 1.0;

  const double log_n = std::log(n_bar0);
  std::vector<double> log_fact(static_cast<std::size_t>(n_max) + 1);
  for (int l = 0; l <= n_max; ++l) log_fact[l] = std::lgamma(l + 1.0);

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n_max + 1) * (n_max + 1) + 1);
  terms.push_back(std::exp(-2.0 * n_bar0));
  const double lead = -2.0 * n_bar0 + log_n;
  for (int l = 0; l <= n_max; ++l) {
    for (int lp = 0; lp <= n_max; ++lp) {
      const double log_term =
          lead + (l + lp) * log_n - log_fact[l] - log_fact[lp] + std::log(kernel_K(l, lp, m));
      terms.push_back(std::exp(log_term));
    }
  }
  return numerics::pairwise_sum(terms);
}

// sqrt(2 pi m) e^{2m} erfc(sqrt(2m)), the n_bar0 -> inf limit of f.
inline double conditional_fidelity_thermo(double m) {
  if (!(m > 0.0)) throw InvariantViolation("conditional_fidelity_thermo: m must be > 0");
  if (std::isinf(m)) return 1.0;
  return std::sqrt(2.0 * std::numbers::pi * m) * numerics::erfcx(std::sqrt(2.0 * m));
}

// F = <alpha| rho_L(inf) |alpha> = 1 - x (1 - f)
inline double fidelity_F(const SteadyStateInputs& in) {
  in.validate();
  const double f = std::isinf(in.n_bar0) ? conditional_fidelity_thermo(in.m)
                                         : conditional_fidelity_sum(in.n_bar0, in.m, in.n_max);
  return 1.0 - in.x * (1.0 - f);
}

// Below this m the thermodynamic-limit fidelity stops describing a cavity
// holding n_bar0 photons.
inline double m_min(double n_bar0) {
  if (!(n_bar0 > 0.0)) throw InvariantViolation("m_min: n_bar0 must be > 0");
  return 1.0 / (8.0 * std::numbers::pi * std::numbers::pi * n_bar0);
}

// Critical number at which the thermodynamic conditional fidelity is 1/2.
inline double m_half() {
  return numerics::bisect([](double m) { return conditional_fidelity_thermo(m) - 0.5; }, 0.01, 1.0, 1e-10);
}

// Relative phase picked up between Fock states n and n + dn over one
// excited-state lifetime: (g / 2 gamma)(sqrt(n + dn) - sqrt(n)).
inline double phase_spread(double n, double dn, double g_over_gamma) {
  if (!(n >= 0.0) || !(n + dn >= 0.0)) throw InvariantViolation("phase_spread: photon numbers must be >= 0");
  if (!(g_over_gamma > 0.0)) throw InvariantViolation("phase_spread: g/gamma must be > 0");
  return 0.5 * g_over_gamma * (std::sqrt(n + dn) - std::sqrt(n));
}

// |phase_spread(n_bar0, sqrt(n_bar0))|, which tends to g / (4 gamma).
inline double coherent_phase_spread(double n_bar0, double g_over_gamma) {
  return std::abs(phase_spread(n_bar0, std::sqrt(n_bar0), g_over_gamma));
}

// <a^dag a>(inf) = n_bar0 - x (1 - e^{-n_bar0})
inline double final_intensity(double x, double n_bar0) { return n_bar0 - x * (1.0 - std::exp(-n_bar0)); }

}  // namespace cavity_entropy
