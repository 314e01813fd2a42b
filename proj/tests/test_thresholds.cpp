#include "support.hpp"

using namespace nlslab;
using nlslab::testing::ground_state;
using nlslab::testing::rel;

namespace {

// Trigonometric / hyperbolic closed form of 2 l^3 - 3 l^2 + m = 0 via l = 1/2 + y,
// y^3 - 3y/4 + (m - 1/2)/2 = 0.
std::pair<double, double> cubic_roots(double m) {
  if (m >= 0.0) {
    const double phi = std::acos(1.0 - 2.0 * m) / 3.0;
    return {0.5 + std::cos(phi - 2.0 * kPi / 3.0), 0.5 + std::cos(phi)};
  }
  return {std::nan(""), 0.5 + std::cosh(std::acosh(1.0 - 2.0 * m) / 3.0)};
}

Field scaled_q(double a, const Grid& g) {
  Field f = sample_soliton(ground_state(), g, 1.0, {}, 0.0, 1.0);
  for (auto& v : f.values) v *= a;
  return f;
}

}  // namespace

TEST(SolveLambda, ClosedFormCases) {
  auto r0 = solve_lambda(0.0);
  ASSERT_TRUE(r0.lambda_minus && r0.lambda);
  EXPECT_NEAR(*r0.lambda_minus, 0.0, 1e-12);
  EXPECT_NEAR(*r0.lambda, 1.5, 1e-12);

  auto r5 = solve_lambda(0.5);
  EXPECT_NEAR(*r5.lambda_minus, 0.5, 1e-12);
  EXPECT_NEAR(*r5.lambda, (1.0 + std::sqrt(3.0)) / 2.0, 1e-12);

  auto rm = solve_lambda(-1.0);
  EXPECT_FALSE(rm.lambda_minus);
  EXPECT_NEAR(*rm.lambda, 1.6777, 1e-4);
  EXPECT_NEAR(*rm.lambda, cubic_roots(-1.0).second, 1e-12);
}

TEST(SolveLambda, AgreesWithTrigonometricRoots) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 0.999);
  for (int k = 0; k < 100; ++k) {
    const double m = u(rng);
    const auto roots = solve_lambda(m);
    const auto [lm, l] = cubic_roots(m);
    EXPECT_NEAR(*roots.lambda, l, 1e-11) << m;
    if (m >= 0.0) {
      ASSERT_TRUE(roots.lambda_minus);
      EXPECT_NEAR(*roots.lambda_minus, lm, 1e-11) << m;
      EXPECT_GE(*roots.lambda_minus, 0.0);
      EXPECT_LT(*roots.lambda_minus, 1.0);
      EXPECT_LE(std::abs(threshold_cubic(*roots.lambda_minus) - m), 1e-11);
    } else {
      EXPECT_FALSE(roots.lambda_minus);
      EXPECT_GT(*roots.lambda, 1.5);
    }
    EXPECT_GT(*roots.lambda, 1.0);
    EXPECT_LE(std::abs(threshold_cubic(*roots.lambda) - m), 1e-11);
  }
}

TEST(SolveLambda, Monotonicity) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 0.999);
  std::vector<double> ms(100);
  for (auto& m : ms) m = u(rng);
  std::sort(ms.begin(), ms.end());
  for (std::size_t i = 1; i < ms.size(); ++i) {
    const auto a = solve_lambda(ms[i - 1]), b = solve_lambda(ms[i]);
    EXPECT_GT(*a.lambda, *b.lambda);
    if (a.lambda_minus && b.lambda_minus) {
      EXPECT_LT(*a.lambda_minus, *b.lambda_minus);
    }
  }
}

TEST(SolveLambda, ThresholdIsExcluded) {
  for (double m : {1.0, 1.0 - 1e-13, 2.0}) {
    try {
      solve_lambda(m);
      FAIL() << m;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::boundary_excluded);
    }
  }
  EXPECT_NO_THROW(solve_lambda(1.0 - 1e-9));
  EXPECT_THROW(solve_lambda(std::nan("")), Error);
}

TEST(Classify, ScaledGroundStateAboveThreshold) {
  const auto& q = ground_state();
  const double a = 1.1;
  const auto c = classify(scaled_q(a, Grid::periodic(128, 16.0)), q, false);
  EXPECT_NEAR(c.me_ratio, 3 * std::pow(a, 4) - 2 * std::pow(a, 6), 1e-3);
  EXPECT_NEAR(c.eta0, a * a, 1e-3);
  EXPECT_NEAR(*c.lambda, a * a, 1e-3);
  EXPECT_EQ(c.dichotomy, DichotomyCase::above_threshold);
}

TEST(Classify, ScaledGroundStateGlobalBounded) {
  const auto& q = ground_state();
  const double a = 0.9;
  const auto c = classify(scaled_q(a, Grid::periodic(128, 16.0)), q, false);
  EXPECT_NEAR(c.me_ratio, 0.905293, 1e-3);
  EXPECT_NEAR(c.eta0, 0.81, 1e-3);
  EXPECT_NEAR(*c.lambda_minus, 0.81, 1e-3);
  EXPECT_EQ(c.dichotomy, DichotomyCase::global_bounded);
}

TEST(Classify, RadialGridResolvesTheEqualityCase) {
  const auto& q = ground_state();
  const auto c = classify(scaled_q(1.2, Grid::radial(16384, 20.0)), q, false);
  EXPECT_NEAR(c.eta0, 1.44, 1e-5);
  EXPECT_NEAR(*c.lambda, 1.44, 1e-5);
  EXPECT_EQ(c.dichotomy, DichotomyCase::above_threshold);
}

TEST(Classify, GroundStateIsBoundaryExcluded) {
  const auto& q = ground_state();
  for (const Grid& g : {Grid::periodic(128, 16.0), Grid::radial(16384, 20.0)}) {
    try {
      classify(scaled_q(1.0, g), q, false);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::boundary_excluded);
    }
  }
}

TEST(Classify, CaseMatchesRootsForGaussians) {
  const auto& q = ground_state();
  const Grid g = Grid::periodic(64, 8.0);
  for (double A : {0.5, 1.0, 1.5, 3.0}) {
    const auto c = classify(nlslab::testing::gaussian(g, A, 1.0), q, false);
    if (c.dichotomy == DichotomyCase::global_bounded) {
      EXPECT_LE(c.eta0, *c.lambda_minus + kBoundaryTol);
    } else {
      EXPECT_GE(c.eta0, *c.lambda - kBoundaryTol);
    }
    EXPECT_NE(c.dichotomy, DichotomyCase::not_covered) << A;
  }
}

TEST(Galilean, RealFieldIsUnchanged) {
  const Field f = nlslab::testing::gaussian(Grid::periodic(32, 8.0), 1.0, 1.0);
  const auto red = galilean_reduce(f);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(red.xi0[j], 0.0, 1e-14);
  double diff = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) diff = std::max(diff, std::abs(red.field[i] - f[i]));
  EXPECT_LT(diff, 1e-13);
}

TEST(Galilean, RemovesImposedPhase) {
  const Grid g = Grid::periodic(64, 8.0);
  const Vec3 xi{0.7, -0.3, 0.2};
  const Field f = nlslab::testing::gaussian(g, 1.0, 1.0, {}, xi);
  const auto red = galilean_reduce(f);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(red.xi0[j], -xi[j], 1e-10);
  const Field plain = nlslab::testing::gaussian(g, 1.0, 1.0);
  double diff = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) diff = std::max(diff, std::abs(red.field[i] - plain[i]));
  EXPECT_LT(diff, 1e-9);
}

TEST(Galilean, MasslessFieldIsRejected) {
  try {
    galilean_reduce(Field(Grid::periodic(16, 4.0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::undefined_transform);
  }
}

TEST(Galilean, IdentitiesOnRandomFields) {
  const auto& q = ground_state();
  const Grid g = Grid::periodic(64, 12.0);
  std::mt19937_64 rng(99);
  for (int k = 0; k < 20; ++k) {
    const Field f = nlslab::testing::random_smooth(g, rng);
    const auto before = compute_invariants(f, q);
    const auto after = compute_invariants(galilean_reduce(f).field, q);
    const double p2 = before.momentum_sq();
    EXPECT_LT(rel(after.mass, before.mass), 1e-12);
    EXPECT_LT(rel(after.energy, before.energy - 0.5 * p2 / before.mass), 1e-8);
    EXPECT_LT(rel(after.grad_sq, before.grad_sq - p2 / before.mass), 1e-8);
    EXPECT_LT(std::sqrt(after.momentum_sq()), 1e-10);
  }
}

TEST(Galilean, CaseOneSurvivesReduction) {
  const auto& q = ground_state();
  const Grid g = Grid::periodic(64, 8.0);
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int k = 0; k < 200 && checked < 20; ++k) {
    Field f = nlslab::testing::random_smooth(g, rng);
    for (auto& v : f.values) v *= 0.8;
    Classification pre;
    try {
      pre = classify(f, q, false);
    } catch (const Error&) {
      continue;
    }
    if (pre.dichotomy != DichotomyCase::global_bounded) continue;
    const auto post = classify(f, q, true);
    EXPECT_EQ(post.dichotomy, DichotomyCase::global_bounded);
    ASSERT_TRUE(post.galilean_consistent);
    EXPECT_TRUE(*post.galilean_consistent) << post.diagnostic;
    EXPECT_LE(post.eta0, pre.eta0 + 1e-12);
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}
