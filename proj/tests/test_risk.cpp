#include <catch2/catch_amalgamated.hpp>

#include <blockshrink/risk.hpp>

#include "reference_tables.hpp"

using namespace blockshrink;

TEST_CASE("scalar losses match the closed form") {
  const SymMatrix two(Eigen::MatrixXd::Constant(1, 1, 2.0));
  const SymMatrix one(Eigen::MatrixXd::Constant(1, 1, 1.0));
  CHECK(loss(LossKind::Stein, two, one) ==
        Catch::Approx(2.0 - std::log(2.0) - 1.0).epsilon(1e-14));
  CHECK(loss(LossKind::Quadratic, two, one) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(loss(LossKind::Stein, one, one) == Catch::Approx(0.0).margin(1e-14));
  CHECK(loss(LossKind::Quadratic, one, one) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("losses are invariant under congruence transforms") {
  auto eng = make_engine({10, 0});
  const SymMatrix sigma_hat = sample_wishart_identity(3, 8, eng);
  Eigen::VectorXd lam(3);
  lam << 4.0, 2.0, 0.5;
  const SymMatrix sigma(Eigen::MatrixXd(lam.asDiagonal()));

  Eigen::MatrixXd a(3, 3);
  a << 1.0, 0.2, -0.1, 0.0, 1.5, 0.3, 0.0, 0.0, 0.8;  // invertible
  const SymMatrix hat2(a * sigma_hat.mat() * a.transpose());
  const SymMatrix sig2(a * sigma.mat() * a.transpose());
  for (LossKind k : {LossKind::Stein, LossKind::Quadratic})
    CHECK(loss(k, hat2, sig2) ==
          Catch::Approx(loss(k, sigma_hat, sigma)).epsilon(1e-9));
}

TEST_CASE("expected log chi-square values") {
  const double gamma = 0.5772156649015329;
  CHECK(elog_chi2(2) == Catch::Approx(-gamma + std::log(2.0)).epsilon(1e-12));
  CHECK(elog_chi2(4) == Catch::Approx(1.0 - gamma + std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(elog_chi2(0.5), DomainError);
}

TEST_CASE("analytic asymptotic risks reproduce the published quadratic table") {
  for (const auto& blk : reftab::blocks()) {
    const MomentTable mt =
        moment_table(blk.p, blk.m, blk.n, RandomStream{1, 0});
    const RiskReport u2 = asymptotic_risk_identity_blocks(
        LossKind::Quadratic, coeffs_u(blk.p, blk.n), mt);
    const RiskReport kg2 = asymptotic_risk_identity_blocks(
        LossKind::Quadratic, coeffs_kg(blk.p, blk.n), mt);
    const RiskReport ma2 = asymptotic_risk_identity_blocks(
        LossKind::Quadratic, coeffs_ma2(blk.p, blk.m, blk.n, mt), mt);
    INFO("p=" << blk.p << " m=" << blk.m << " n=" << blk.n);
    CHECK(u2.value == Catch::Approx(blk.risk2_u).margin(5e-4));
    CHECK(kg2.value == Catch::Approx(blk.risk2_kg).margin(5e-4));
    CHECK(ma2.value == Catch::Approx(blk.risk2_ma2).margin(5e-4));
    CHECK(rrr(kg2, u2) == Catch::Approx(blk.rrr2_kg).margin(0.05));
    CHECK(rrr(ma2, u2) == Catch::Approx(blk.rrr2_ma2).margin(0.05));
  }
}

TEST_CASE("Stein asymptotic risk matches a spot value") {
  const MomentTable mt = moment_table(3, 1, 10, RandomStream{1, 0});
  const RiskReport u1 =
      asymptotic_risk_identity_blocks(LossKind::Stein, coeffs_u(3, 10), mt);
  // The published value carries ~1e-3 Monte Carlo noise on E[log chi2];
  // the exact-digamma evaluation sits within 0.005 of it.
  CHECK(u1.value == Catch::Approx(0.6765).margin(5e-3));
  const RiskReport ma1 = asymptotic_risk_identity_blocks(
      LossKind::Stein, coeffs_ma1(3, 1, 10, mt), mt);
  CHECK(ma1.value == Catch::Approx(0.4676).margin(5e-3));
  CHECK(rrr(ma1, u1) == Catch::Approx(30.88).margin(0.1));
}

TEST_CASE("p=1 closed-form Stein risk") {
  // For p=1, m irrelevant: R = n c - log c - E[log chi2_n] - 1.
  const int n = 6;
  const double c = 0.2;
  const double expect = n * c - std::log(c) - elog_chi2(n) - 1.0;
  // Direct Monte Carlo cross-check.
  const std::int64_t reps = 200000;
  double sum = 0.0, sum2 = 0.0;
  auto eng = make_engine({31, 0});
  for (std::int64_t i = 0; i < reps; ++i) {
    const double l = sample_chi2(n, eng);
    const double lv = c * l - std::log(c * l) - 1.0;
    sum += lv;
    sum2 += lv * lv;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - expect) < 5.0 * se);
}

TEST_CASE("finite-separation Monte Carlo approaches the asymptotic risk") {
  const int p = 3, m = 1, n = 10;
  const MomentTable mt = moment_table(p, m, n, RandomStream{1, 0});
  const EigenSpec spec = EigenSpec::two_block_unit(p, m, 1.0, 1e-6);
  const OrthoMatrix gamma = OrthoMatrix::identity(p);
  const std::int64_t reps = 20000;
  for (LossKind kind : {LossKind::Stein, LossKind::Quadratic}) {
    for (const CoefficientVector& c :
         {coeffs_u(p, n), coeffs_ma2(p, m, n, mt)}) {
      const RiskReport asy = asymptotic_risk_identity_blocks(kind, c, mt);
      const RiskReport mc =
          risk_mc_finite(kind, c, spec, gamma, n, reps, {17, 3});
      INFO("loss " << (kind == LossKind::Stein ? "stein" : "quad")
                   << " estimator " << estimator_name(c.kind));
      CHECK(std::abs(mc.value - asy.value) < 5.0 * mc.stderr_value);
    }
  }
}

TEST_CASE("limit-distribution decomposition agrees with the analytic risk") {
  const int p = 3, m = 1, n = 10;
  const MomentTable mt = moment_table(p, m, n, RandomStream{1, 0});
  const Eigen::VectorXd xi1 = Eigen::VectorXd::Ones(m);
  const Eigen::VectorXd xi2 = Eigen::VectorXd::Ones(p - m);
  const std::int64_t reps = 40000;
  for (LossKind kind : {LossKind::Stein, LossKind::Quadratic}) {
    const CoefficientVector c = coeffs_sds(p, n);
    const RiskReport asy = asymptotic_risk_identity_blocks(kind, c, mt);
    const RiskDecomposition dec = asymptotic_risk_limitdist_mc(
        kind, c, p, m, n, xi1, xi2, reps, {23, 1});
    INFO("loss " << (kind == LossKind::Stein ? "stein" : "quad"));
    CHECK(std::abs(dec.total - asy.value) < 5.0 * dec.stderr_value);
    CHECK(dec.total ==
          Catch::Approx(dec.r1d + dec.r2d + dec.r3d).epsilon(1e-12));
  }
  // Stein residual is exact: (p - m) * sum_{i <= m} c_i.
  const RiskDecomposition d = asymptotic_risk_limitdist_mc(
      LossKind::Stein, coeffs_u(4, 5), 4, 1, 5, Eigen::VectorXd::Ones(1),
      Eigen::VectorXd::Ones(3), 16, {5, 5});
  CHECK(d.r3d == Catch::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("risk reduction rate guards contexts") {
  const MomentTable mt = moment_table(3, 1, 10, RandomStream{1, 0});
  const RiskReport a =
      asymptotic_risk_identity_blocks(LossKind::Stein, coeffs_u(3, 10), mt);
  const RiskReport b =
      asymptotic_risk_identity_blocks(LossKind::Quadratic, coeffs_u(3, 10), mt);
  CHECK_THROWS_AS(rrr(a, b), DomainError);
  CHECK(rrr(a, a) == Catch::Approx(0.0).margin(1e-14));
}
