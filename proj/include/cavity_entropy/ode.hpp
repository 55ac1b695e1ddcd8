#pragma once

// Embedded Dormand-Prince 5(4) integrator for Eigen-valued states.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "cavity_entropy/errors.hpp"

namespace cavity_entropy::ode {

struct Tolerance {
  double rel = 1e-8;
  double abs = 1e-12;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

namespace dopri {
// Butcher tableau (Hairer, Norsett & Wanner).
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b_hat
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dopri

// Integrates dy/dt = rhs(t, y) and stops exactly at each requested output
// time. `on_output(index, t, y)` is called for every entry of `outputs`
// (which must be non-decreasing and start at or after t0). `post_step(y, dy)`
// may project the accepted state together with its derivative; the projection
// must commute with the right-hand side so first-same-as-last still holds.
template <class State>
class DormandPrince {
 public:
  using Rhs = std::function<void(double, const State&, State&)>;
  using Output = std::function<void(std::size_t, double, const State&)>;
  using PostStep = std::function<void(State&, State&)>;

  explicit DormandPrince(Tolerance tol, std::size_t max_steps = 5'000'000)
      : tol_(tol), max_steps_(max_steps) {}

  StepStats integrate(const Rhs& rhs, double t0, State y, std::span<const double> outputs,
                      const Output& on_output, const PostStep& post_step = {}) {
    using namespace dopri;
    StepStats stats;
    double t = t0;
    State k1, k2, k3, k4, k5, k6, k7, tmp, y_new, err;
    rhs(t, y, k1);
    ++stats.rhs_evaluations;

    double h = initial_step(y, k1);
    for (std::size_t idx = 0; idx < outputs.size(); ++idx) {
      const double target = outputs[idx];
      if (target < t) throw IntegrationError("DormandPrince: output times must be non-decreasing");
      while (t < target) {
        if (stats.accepted + stats.rejected >= max_steps_) {
          throw IntegrationError("DormandPrince: step budget exhausted at t = " + std::to_string(t));
        }
        const bool clipped = t + h >= target;
        const double step = clipped ? target - t : h;
        if (step < 1e-14 * std::max(1.0, std::abs(t))) {
          throw IntegrationError("DormandPrince: step size underflow at t = " + std::to_string(t));
        }

        tmp = y + step * (a21 * k1);
        rhs(t + c2 * step, tmp, k2);
        tmp = y + step * (a31 * k1 + a32 * k2);
        rhs(t + c3 * step, tmp, k3);
        tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * step, tmp, k4);
        tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * step, tmp, k5);
        tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + step, tmp, k6);
        y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + step, y_new, k7);
        stats.rhs_evaluations += 6;

        err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double scale_floor = tol_.abs;
        const auto scale =
            (scale_floor + tol_.rel * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array()).eval();
        // Max norm: density matrices are mostly tiny entries, which an RMS
        // norm would let through with large relative error.
        const double err_norm = (err.cwiseAbs().array() / scale).maxCoeff();

        if (std::isfinite(err_norm) && err_norm <= 1.0) {
          t = clipped ? target : t + step;
          y = y_new;
          k1 = k7;
          if (post_step) post_step(y, k1);
          ++stats.accepted;
          const double grow =
              err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
          // A step shortened to land on an output time says little about h.
          if (!clipped || step >= h) h = step * grow;
          continue;
        }
        if (!std::isfinite(err_norm)) {
          h = 0.1 * step;
        } else {
          h = step * std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 1.0);
        }
        ++stats.rejected;
      }
      on_output(idx, t, y);
    }
    return stats;
  }

 private:
  double initial_step(const State& y, const State& f0) const {
    const double d0 = y.cwiseAbs().maxCoeff();
    const double d1 = f0.cwiseAbs().maxCoeff();
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::min(h, 1e-2);
  }

  Tolerance tol_;
  std::size_t max_steps_;
};

}  // namespace cavity_entropy::ode
