#include <catch2/catch_amalgamated.hpp>

#include <blockshrink/moments.hpp>

using namespace blockshrink;

TEST_CASE("big integer helpers") {
  CHECK(big_factorial(0) == 1);
  CHECK(big_factorial(5) == 120);
  CHECK(big_binomial(10, 3) == 120);
  CHECK(big_binomial(4, 7) == 0);
  CHECK(big_pow(Rational(2), 10) == 1024);
  CHECK(big_pow(Rational(3), -2) == Rational(1, 9));
}

TEST_CASE("3x3 gap moments: normalization and trace identity are exact") {
  for (int dof : {4, 6, 8, 10, 12}) {
    CHECK(f3_exact(DeltaExponent{0, 0, 0}, dof) == 1);
    // tr W = d1 + d2 + d3 = Delta1 + 2 Delta2 + 3 Delta3, E[tr W] = 3 dof.
    const Rational tr = f3_exact(DeltaExponent{1, 0, 0}, dof) +
                        2 * f3_exact(DeltaExponent{0, 1, 0}, dof) +
                        3 * f3_exact(DeltaExponent{0, 0, 1}, dof);
    CHECK(tr == 3 * dof);
  }
  CHECK_THROWS_AS(f3_exact(DeltaExponent{1, 0, 0}, 5), ParityUnsupported);
  CHECK_THROWS_AS(f3_exact(DeltaExponent{1, 0, 0}, 3), ParityUnsupported);
  CHECK_THROWS_AS(f3_exact(DeltaExponent{-1, 0, 0}, 4), DomainError);
}

TEST_CASE("2x2 gap moments: normalization and trace identity are exact") {
  for (int dof : {3, 5, 7, 9, 11}) {
    CHECK(f2_exact(0, 0, dof) == 1);
    // tr W = Delta1 + 2 Delta2, E[tr W] = 2 dof.
    CHECK(f2_exact(1, 0, dof) + 2 * f2_exact(0, 1, dof) == 2 * dof);
  }
  CHECK_THROWS_AS(f2_exact(1, 0, 4), ParityUnsupported);
}

TEST_CASE("exact availability rules") {
  CHECK(exact_moments_available(1, 2));
  CHECK(exact_moments_available(2, 9));
  CHECK_FALSE(exact_moments_available(2, 8));
  CHECK(exact_moments_available(3, 8));
  CHECK_FALSE(exact_moments_available(3, 7));
  CHECK_FALSE(exact_moments_available(4, 10));
}

TEST_CASE("ordered_moments: size-1 closed form") {
  const BlockMoments b = ordered_moments(1, 10, {1, 0});
  CHECK(b.e1[0] == 10.0);
  CHECK(b.e2[0] == 120.0);
  CHECK(b.stderr1[0] == 0.0);
  CHECK(b.method == MomentMethod::Exact);
}

TEST_CASE("ordered_moments: exact block sums and ordering") {
  // q=2, dof=9 (p=3, m=1, n=10 second block): E[d2] + E[d3] = 18 exactly,
  // and the reciprocals reproduce the published shrinkage coefficients.
  const BlockMoments b2 = ordered_moments(2, 9, {1, 0});
  CHECK(b2.method == MomentMethod::Exact);
  CHECK(b2.e1[0] + b2.e1[1] == Catch::Approx(18.0).margin(1e-12));
  CHECK(b2.e1[0] > b2.e1[1]);
  CHECK(1.0 / b2.e1[0] == Catch::Approx(0.0790).margin(5e-5));
  CHECK(1.0 / b2.e1[1] == Catch::Approx(0.1872).margin(5e-5));
  // Second moments dominate squared means.
  CHECK(b2.e2[0] > b2.e1[0] * b2.e1[0]);
  CHECK(b2.e2[1] > b2.e1[1] * b2.e1[1]);

  // q=3, dof=10 (p=4, m=1, n=11 second block): reciprocals give the
  // published MA1 tail coefficients.
  const BlockMoments b3 = ordered_moments(3, 10, {1, 0});
  CHECK(b3.method == MomentMethod::Exact);
  CHECK(b3.e1.sum() == Catch::Approx(30.0).margin(1e-12));
  CHECK(1.0 / b3.e1[0] == Catch::Approx(0.0593).margin(5e-5));
  CHECK(1.0 / b3.e1[1] == Catch::Approx(0.1111).margin(5e-5));
  CHECK(1.0 / b3.e1[2] == Catch::Approx(0.2413).margin(5e-5));
}

TEST_CASE("Monte Carlo moments agree with the exact path") {
  const std::int64_t reps = 200000;
  const BlockMoments ex = ordered_moments(2, 9, {1, 0});
  const BlockMoments mc = detail::mc_block_moments(2, 9, {2024, 5}, reps, 1);
  CHECK(mc.method == MomentMethod::MonteCarlo);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(mc.e1[i] - ex.e1[i]) < 5.0 * mc.stderr1[i]);
    CHECK(std::abs(mc.e2[i] - ex.e2[i]) < 5.0 * mc.stderr2[i]);
    CHECK(mc.stderr1[i] > 0.0);
  }
  // Trace constraint holds for the MC estimate up to correlated MC noise.
  CHECK(std::abs(mc.e1.sum() - 18.0) <
        5.0 * (mc.stderr1[0] + mc.stderr1[1]));
}

TEST_CASE("moment_table concatenates the two limit blocks") {
  const MomentTable t = moment_table(3, 1, 10, {1, 0});
  CHECK(t.p == 3);
  CHECK(t.e1[0] == 10.0);  // W_1(10, 1)
  CHECK(t.e1[1] + t.e1[2] == Catch::Approx(18.0).margin(1e-12));
  CHECK(t.e1[1] == Catch::Approx(12.658).margin(5e-3));
  CHECK(t.e1[2] == Catch::Approx(5.342).margin(5e-3));
  for (int i = 0; i < 3; ++i) CHECK(t.method[i] == MomentMethod::Exact);

  CHECK_THROWS_AS(moment_table(3, 3, 10, {1, 0}), DimensionMismatch);
  CHECK_THROWS_AS(moment_table(3, 1, 2, {1, 0}), InsufficientDof);
}

TEST_CASE("exact_only honors parity, mc_only forces sampling") {
  // (p, m, n) = (4, 1, 5): block sizes (1, 3) with dofs (5, 4) -> exact.
  CHECK_NOTHROW(moment_table(4, 1, 5, {1, 0}, 1000, 1, true));
  // (p, m, n) = (4, 1, 6): second block dof 5 breaks the parity rule.
  CHECK_THROWS_AS(moment_table(4, 1, 6, {1, 0}, 1000, 1, true),
                  ParityUnsupported);
  const MomentTable mc = moment_table(3, 1, 10, {1, 0}, 20000, 1, false, true);
  for (int i = 0; i < 3; ++i) CHECK(mc.method[i] == MomentMethod::MonteCarlo);
  CHECK(std::abs(mc.e1[0] - 10.0) < 5.0 * mc.stderr1[0]);
}
