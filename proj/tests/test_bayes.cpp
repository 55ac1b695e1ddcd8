#include <gtest/gtest.h>

#include <cmath>

#include "cavity_entropy/bayes.hpp"
#include "cavity_entropy/steady_state.hpp"

using namespace cavity_entropy;
using namespace cavity_entropy::bayes;

namespace {

// Four-cell joint table P(start, outcome) normalised per outcome.
double joint_posterior_bright(Outcome c, double x, double f) {
  const double table[2][2] = {{x * (1.0 - f), x * f}, {0.0, 1.0 - x}};  // [start][click, no click]
  const int col = c == Outcome::click ? 0 : 1;
  return table[0][col] / (table[0][col] + table[1][col]);
}

}  // namespace

TEST(Likelihood, Rows) {
  for (double f : {0.0, 0.3, 1.0}) {
    EXPECT_DOUBLE_EQ(likelihood(Outcome::no_click, Start::dark, f), 1.0);
    EXPECT_DOUBLE_EQ(likelihood(Outcome::click, Start::dark, f), 0.0);
  }
  EXPECT_DOUBLE_EQ(likelihood(Outcome::no_click, Start::bright, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(likelihood(Outcome::click, Start::bright, 0.3), 0.7);
  EXPECT_THROW(likelihood(Outcome::click, Start::bright, 1.2), InvariantViolation);
}

TEST(Posterior, HalfPriorClosedForm) {
  for (double f : {0.0, 0.2, 0.6, 1.0}) {
    const PosteriorRow nc = posterior(Outcome::no_click, 0.5, f);
    EXPECT_NEAR(nc.p_dark, 1.0 / (1.0 + f), 1e-15);
    EXPECT_NEAR(nc.p_bright, f / (1.0 + f), 1e-15);
    EXPECT_NEAR(nc.p_bright + nc.p_dark, 1.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(posterior(Outcome::no_click, 0.5, 0.0).p_bright, 0.0);
  const PosteriorRow flat = posterior(Outcome::no_click, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(flat.p_bright, 0.5);
  EXPECT_DOUBLE_EQ(flat.p_dark, 0.5);
}

TEST(Posterior, ClickExcludesDarkExactly) {
  for (double x : {0.1, 0.5, 0.9}) {
    const PosteriorRow c = posterior(Outcome::click, x, 0.4);
    EXPECT_EQ(c.p_dark, 0.0);
    EXPECT_EQ(c.p_bright, 1.0);
  }
}

TEST(Posterior, MatchesJointTable) {
  for (double x : {0.3, 0.5, 0.8}) {
    for (double f : {0.1, 0.5, 0.9}) {
      for (Outcome c : {Outcome::click, Outcome::no_click}) {
        const PosteriorRow row = posterior(c, x, f);
        EXPECT_NEAR(row.p_bright, joint_posterior_bright(c, x, f), 1e-14);
        EXPECT_NEAR(row.p_bright + row.p_dark, 1.0, 1e-12);
      }
    }
  }
}

TEST(Posterior, DegenerateEvidence) {
  EXPECT_THROW(posterior(Outcome::click, 0.0, 0.5), DegenerateEvidence);
  EXPECT_THROW(posterior(Outcome::click, 0.5, 1.0), DegenerateEvidence);
  EXPECT_THROW(posterior(Outcome::no_click, 1.0, 0.0), DegenerateEvidence);
}

TEST(PCorrect, ValuesAndShape) {
  EXPECT_DOUBLE_EQ(p_correct(1.0), 0.5);
  EXPECT_DOUBLE_EQ(p_correct(0.0), 1.0);
  EXPECT_NEAR(p_correct(conditional_fidelity_thermo(0.09)), 0.669, 1e-3);
  double prev = 2.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = p_correct(i / 100.0);
    EXPECT_GE(v, 0.5);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(PCorrect, SamplingRuleIsTheClosedForm) {
  for (double f : {0.0, 0.25, 0.5, 1.0}) {
    EXPECT_NEAR(expected_success(0.5, f, DecisionRule::sample_posterior), p_correct(f), 1e-15);
    // Picking the more likely level does better: 1 - f/2.
    EXPECT_NEAR(expected_success(0.5, f, DecisionRule::map), 1.0 - 0.5 * f, 1e-15);
  }
}

TEST(PCorrect, Limits) {
  const double small = 1e-4, large = 100.0;
  EXPECT_NEAR(p_correct_limits(small).strong, p_correct(conditional_fidelity_thermo(small)),
              0.05 * p_correct(conditional_fidelity_thermo(small)));
  EXPECT_NEAR(p_correct_limits(large).weak, p_correct(conditional_fidelity_thermo(large)),
              0.05 * p_correct(conditional_fidelity_thermo(large)));
  EXPECT_THROW(p_correct_limits(0.0), InvariantViolation);
}

TEST(MeasurementPosterior, RowsAndFlags) {
  const MeasurementPosterior mp = measurement_posterior(0.5, 0.4);
  EXPECT_TRUE(mp.click_possible);
  EXPECT_DOUBLE_EQ(mp.likelihood_no_click_given_b, 0.4);
  EXPECT_NEAR(mp.p_correct, p_correct(0.4), 1e-15);
  EXPECT_EQ(mp.click.p_dark, 0.0);
  EXPECT_FALSE(measurement_posterior(0.0, 0.4).click_possible);
  EXPECT_FALSE(measurement_posterior(0.5, 1.0).click_possible);
}

TEST(MonteCarlo, ReproducesExactSuccessForBothRules) {
  std::uint64_t seed = 99;
  for (double x : {0.5, 0.3}) {
    for (double f : {0.1, 0.5, 0.9}) {
      for (DecisionRule rule : {DecisionRule::sample_posterior, DecisionRule::map}) {
        const MonteCarloResult r = simulate(x, f, 100000, seed++, rule);
        EXPECT_LT(std::abs(r.rate() - expected_success(x, f, rule)), 3.0 * r.standard_error() + 1e-12)
            << "x=" << x << " f=" << f;
      }
    }
  }
}

TEST(MonteCarlo, SeedDeterminesResult) {
  const auto a = simulate(0.5, 0.3, 5000, 42, DecisionRule::sample_posterior);
  const auto b = simulate(0.5, 0.3, 5000, 42, DecisionRule::sample_posterior);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_EQ(a.seed, 42u);
  EXPECT_THROW(simulate(0.5, 0.3, 0, 1, DecisionRule::map), InvariantViolation);
}

TEST(MonteCarlo, MapTiesGoDark) {
  // f = 1 gives a flat no-click posterior at x = 1/2; every guess is "dark".
  const auto r = simulate(0.5, 1.0, 20000, 5, DecisionRule::map);
  const auto all_dark = simulate(0.0, 1.0, 1, 5, DecisionRule::map);
  EXPECT_EQ(all_dark.successes, 1);
  EXPECT_NEAR(r.rate(), 0.5, 4.0 * r.standard_error());
}
