#pragma once

// Click / no-click inference of the initial particle level from a photon
// count on the displaced final cavity state.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "cavity_entropy/errors.hpp"

namespace cavity_entropy::bayes {

enum class Outcome { click, no_click };
enum class Start { bright, dark };

// How a guess is made from the posterior row.
//  - sample_posterior: draw the guess from the posterior. This is the rule
//    behind P(correct) = 1 / (1 + f) at x = 1/2.
//  - map: pick the more probable level; ties go to "dark".
enum class DecisionRule { sample_posterior, map };

inline void require_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvariantViolation(std::string(what) + " must lie in [0, 1]");
}

// P(outcome | start): P(no click | d) = 1, P(no click | b) = f.
inline double likelihood(Outcome outcome, Start start, double f) {
  require_probability(f, "likelihood: f");
  const double no_click = start == Start::dark ? 1.0 : f;
  return outcome == Outcome::no_click ? no_click : 1.0 - no_click;
}

struct PosteriorRow {
  Outcome outcome = Outcome::no_click;
  double evidence = 0.0;  // P(outcome) under the prior
  double p_bright = 0.0;
  double p_dark = 0.0;
};

inline PosteriorRow posterior(Outcome outcome, double x, double f) {
  require_probability(x, "posterior: x");
  require_probability(f, "posterior: f");
  const double joint_b = likelihood(outcome, Start::bright, f) * x;
  const double joint_d = likelihood(outcome, Start::dark, f) * (1.0 - x);
  const double evidence = joint_b + joint_d;
  if (!(evidence > 0.0)) {
    throw DegenerateEvidence(std::string("posterior: outcome '") +
                             (outcome == Outcome::click ? "click" : "no click") + "' has zero probability");
  }
  PosteriorRow row;
  row.outcome = outcome;
  row.evidence = evidence;
  row.p_bright = joint_b / evidence;
  row.p_dark = joint_d == 0.0 ? 0.0 : 1.0 - row.p_bright;
  return row;
}

// P(correct) when guesses are sampled from the posterior at x = 1/2.
inline double p_correct(double f) {
  require_probability(f, "p_correct: f");
  return 1.0 / (1.0 + f);
}

struct PCorrectLimits {
  double strong = 0.0;  // 1 - sqrt(2 pi m), m << 1
  double weak = 0.0;    // (1 + 1/(8m)) / 2, m >> 1
};

inline PCorrectLimits p_correct_limits(double m) {
  if (!(m > 0.0)) throw InvariantViolation("p_correct_limits: m must be > 0");
  return {1.0 - std::sqrt(2.0 * std::numbers::pi * m), 0.5 * (1.0 + 1.0 / (8.0 * m))};
}

// Exact success probability of a decision rule for any prior x.
inline double expected_success(double x, double f, DecisionRule rule) {
  require_probability(x, "expected_success: x");
  require_probability(f, "expected_success: f");
  double total = 0.0;
  for (Outcome c : {Outcome::click, Outcome::no_click}) {
    const double jb = likelihood(c, Start::bright, f) * x;
    const double jd = likelihood(c, Start::dark, f) * (1.0 - x);
    const double ev = jb + jd;
    if (ev == 0.0) continue;
    if (rule == DecisionRule::map) {
      total += jb > jd ? jb : jd;
    } else {
      total += (jb * jb + jd * jd) / ev;
    }
  }
  return total;
}

struct MeasurementPosterior {
  double prior_b = 0.0;
  double likelihood_no_click_given_b = 0.0;  // f
  PosteriorRow click;
  PosteriorRow no_click;
  bool click_possible = false;  // false when x = 0 or f = 1
  double p_correct = 0.0;       // posterior-sampling success probability
};

inline MeasurementPosterior measurement_posterior(double x, double f) {
  require_probability(x, "measurement_posterior: x");
  require_probability(f, "measurement_posterior: f");
  MeasurementPosterior mp;
  mp.prior_b = x;
  mp.likelihood_no_click_given_b = f;
  mp.no_click = posterior(Outcome::no_click, x, f);
  mp.click_possible = x * (1.0 - f) > 0.0;
  if (mp.click_possible) mp.click = posterior(Outcome::click, x, f);
  mp.p_correct = expected_success(x, f, DecisionRule::sample_posterior);
  return mp;
}

struct MonteCarloResult {
  std::uint64_t seed = 0;
  long trials = 0;
  long successes = 0;
  [[nodiscard]] double rate() const { return static_cast<double>(successes) / static_cast<double>(trials); }
  // Binomial standard error of rate().
  [[nodiscard]] double standard_error() const {
    const double p = rate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }
};

// Draws the start level from the prior, the click from the likelihood, then
// guesses with `rule`.
inline MonteCarloResult simulate(double x, double f, long trials, std::uint64_t seed, DecisionRule rule) {
  require_probability(x, "simulate: x");
  require_probability(f, "simulate: f");
  if (trials < 1) throw InvariantViolation("simulate: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  MonteCarloResult res;
  res.seed = seed;
  res.trials = trials;
  for (long k = 0; k < trials; ++k) {
    const Start truth = unif(rng) < x ? Start::bright : Start::dark;
    const Outcome c = unif(rng) < likelihood(Outcome::no_click, truth, f) ? Outcome::no_click : Outcome::click;
    const PosteriorRow row = posterior(c, x, f);
    Start guess;
    if (rule == DecisionRule::map) {
      guess = row.p_bright > row.p_dark ? Start::bright : Start::dark;
    } else {
      guess = unif(rng) < row.p_bright ? Start::bright : Start::dark;
    }
    if (guess == truth) ++res.successes;
  }
  return res;
}

}  // namespace cavity_entropy::bayes
