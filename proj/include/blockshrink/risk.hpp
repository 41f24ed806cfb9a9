#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>

#include "errors.hpp"
#include "estimators.hpp"
#include "matrix.hpp"
#include "moments.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "special.hpp"

namespace blockshrink {

enum class LossKind { Stein, Quadratic };

enum class RiskMethod { AnalyticAsymptotic, MCFinite, MCLimitDist };

struct RiskReport {
  LossKind loss = LossKind::Stein;
  EstimatorKind estimator = EstimatorKind::Custom;
  double value = 0.0;
  RiskMethod method = RiskMethod::AnalyticAsymptotic;
  double stderr_value = 0.0;  // 0 for fully analytic results
  double rrr_vs_u = std::numeric_limits<double>::quiet_NaN();
  int p = 0;
  int m = 0;
  int n = 0;
};

namespace detail {

// M = L^-1 SigmaHat L^-T where Sigma = L L'; shares the eigenvalues of
// SigmaHat Sigma^-1 but stays symmetric, which is the better-conditioned
// route for spectra with condition numbers around 1e6.
inline Eigen::MatrixXd whiten(const SymMatrix& sigma_hat, const SymMatrix& sigma) {
  if (sigma_hat.dim() != sigma.dim())
    throw DimensionMismatch("loss requires matrices of equal dimension");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.mat());
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("sigma is not positive definite in loss");
  const Eigen::MatrixXd half = llt.matrixL().solve(sigma_hat.mat());
  return llt.matrixL().solve(half.transpose());
}

}  // namespace detail

// Stein: tr(M) - log det(M) - p.  Quadratic: tr((M - I)^2).
inline double loss(LossKind kind, const SymMatrix& sigma_hat,
                   const SymMatrix& sigma) {
  const int p = sigma.dim();
  const Eigen::MatrixXd M = detail::whiten(sigma_hat, sigma);
  if (kind == LossKind::Quadratic)
    return (M - Eigen::MatrixXd::Identity(p, p)).squaredNorm();
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("sigma_hat is not positive definite in loss");
  double logdet = 0.0;
  for (int i = 0; i < p; ++i)
    logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return M.trace() - logdet - p;
}

// Asymptotic risks for identity blocks:
//   Stein:     sum_i (b_i c_i - log c_i) - sum_i E[log chi2_{n-i+1}] - p
//   Quadratic: c' A c - 2 b' c + p
// Standard errors are propagated to first order from Monte Carlo moment
// entries (zero when the moment table is exact).
inline RiskReport asymptotic_risk_identity_blocks(LossKind kind,
                                                  const CoefficientVector& c,
                                                  const MomentTable& moments) {
  const int p = moments.p, m = moments.m, n = moments.n;
  if (c.c.size() != p)
    throw DimensionMismatch("coefficient vector does not match moment table");
  auto [A, b] = theorem_system(moments);

  RiskReport out;
  out.loss = kind;
  out.estimator = c.kind;
  out.method = RiskMethod::AnalyticAsymptotic;
  out.p = p;
  out.m = m;
  out.n = n;

  if (kind == LossKind::Stein) {
    double r = -p;
    for (int i = 0; i < p; ++i)
      r += b[i] * c.c[i] - std::log(c.c[i]) - elog_chi2(n - i);
    out.value = r;
    double var = 0.0;
    for (int i = 0; i < p; ++i) {
      const double g = c.c[i] * moments.stderr1[i];  // dR/db_i = c_i
      var += g * g;
    }
    out.stderr_value = std::sqrt(var);
    return out;
  }

  out.value = c.c.dot(A * c.c) - 2.0 * b.dot(c.c) + p;
  double var = 0.0;
  const double pm = p - m;
  for (int i = 0; i < p; ++i) {
    // dR/de2_i = c_i^2.
    const double g2 = c.c[i] * c.c[i] * moments.stderr2[i];
    // dR/de1_i: diagonal/off-diagonal A terms plus the b term.
    double g1;
    if (i < m) {
      g1 = 2.0 * pm * c.c[i] * c.c[i] - 2.0 * c.c[i];
    } else {
      double cross = 0.0;
      for (int j = 0; j < m; ++j) cross += c.c[j];
      g1 = 2.0 * cross * c.c[i] - 2.0 * c.c[i];
    }
    g1 *= moments.stderr1[i];
    var += g2 * g2 + g1 * g1;
  }
  out.stderr_value = std::sqrt(var);
  return out;
}

// Monte Carlo risk at finite scale separation: average loss over draws
// S ~ W_p(n, Sigma) with Sigma built from the spectrum spec.
inline RiskReport risk_mc_finite(LossKind kind, const CoefficientVector& c,
                                 const EigenSpec& spec, const OrthoMatrix& gamma,
                                 int n, std::int64_t reps,
                                 const RandomStream& stream, int threads = 1) {
  if (reps < 1) throw DomainError("risk_mc_finite requires reps >= 1");
  const SymMatrix sigma = build_sigma(spec, gamma);
  const Eigen::VectorXd sums = mc_accumulate(
      reps, threads, 2,
      [&](std::int64_t rep, Eigen::VectorXd& acc) {
        auto eng = make_engine(split_stream(stream, static_cast<std::uint64_t>(rep)));
        const SymMatrix s = sample_wishart(n, sigma, eng);
        const double l = loss(kind, apply_estimator(s, c, &gamma), sigma);
        acc[0] += l;
        acc[1] += l * l;
      });
  const double r = static_cast<double>(reps);
  RiskReport out;
  out.loss = kind;
  out.estimator = c.kind;
  out.method = RiskMethod::MCFinite;
  out.value = sums[0] / r;
  out.stderr_value =
      std::sqrt(std::max(0.0, sums[1] / r - out.value * out.value) / r);
  out.p = spec.dim();
  out.m = spec.partition().blocks() > 1 ? spec.partition().size(1) : spec.dim();
  out.n = n;
  return out;
}

struct RiskDecomposition {
  double r1d = 0.0;
  double r2d = 0.0;
  double r3d = 0.0;
  double total = 0.0;
  LossKind loss = LossKind::Stein;
  double stderr_value = 0.0;
};

// Monte Carlo over the limit laws W11 ~ W_m(n, Xi1), W22 ~ W_{p-m}(n-m, Xi2)
// for general diagonal Xi blocks: R1d and R2d are MC block risks; the Stein
// residual R31 is exact; the quadratic residual R32 combines two MC
// expectation terms (shared draws) with exact combinatorial terms.
inline RiskDecomposition asymptotic_risk_limitdist_mc(
    LossKind kind, const CoefficientVector& c, int p, int m, int n,
    const Eigen::VectorXd& xi1, const Eigen::VectorXd& xi2, std::int64_t reps,
    const RandomStream& stream, int threads = 1) {
  if (xi1.size() != m || xi2.size() != p - m)
    throw DimensionMismatch("xi block sizes must be (m, p - m)");
  if (c.c.size() != p)
    throw DimensionMismatch("coefficient vector must have length p");
  if (reps < 1) throw DomainError("reps >= 1 required");
  for (Eigen::Index i = 0; i < xi1.size(); ++i)
    if (!(xi1[i] > 0)) throw DomainError("xi entries must be positive");
  for (Eigen::Index i = 0; i < xi2.size(); ++i)
    if (!(xi2[i] > 0)) throw DomainError("xi entries must be positive");

  const int q = p - m;
  const SymMatrix Xi1(Eigen::MatrixXd(xi1.asDiagonal()));
  const SymMatrix Xi2(Eigen::MatrixXd(xi2.asDiagonal()));
  const Eigen::VectorXd c1 = c.c.head(m);
  const Eigen::VectorXd c2 = c.c.tail(q);

  // Per replicate: loss1, loss2, t1, t2 and their squares for a joint
  // standard error on the total.
  const Eigen::VectorXd sums = mc_accumulate(
      reps, threads, 6,
      [&](std::int64_t rep, Eigen::VectorXd& acc) {
        auto eng = make_engine(split_stream(stream, static_cast<std::uint64_t>(rep)));
        const SymMatrix w11 = sample_wishart(n, Xi1, eng);
        const SymMatrix w22 = sample_wishart(n - m, Xi2, eng);
        const SpectralDecomp d1 = spectral_decompose(w11);
        const SpectralDecomp d2 = spectral_decompose(w22);
        const SymMatrix xi1_hat = apply_coefficients(d1, c1);
        const SymMatrix xi2_hat = apply_coefficients(d2, c2);
        const double l1 = loss(kind, xi1_hat, Xi1);
        const double l2 = loss(kind, xi2_hat, Xi2);
        acc[0] += l1;
        acc[1] += l2;
        double extra = 0.0;
        if (kind == LossKind::Quadratic) {
          // t1 = tr(C1^2 D1^{1/2} G1' Xi1^{-1} G1 D1^{1/2})
          const Eigen::VectorXd invxi1 = xi1.cwiseInverse();
          double t1 = 0.0;
          for (int i = 0; i < m; ++i) {
            const double g = d1.vectors.col(i).dot(
                invxi1.asDiagonal() * d1.vectors.col(i));
            t1 += c1[i] * c1[i] * d1.values[i] * g;
          }
          // t2 = tr(Xi2^{-1} G2 D2^{1/2} C2 D2^{1/2} G2')
          const Eigen::VectorXd invxi2 = xi2.cwiseInverse();
          double t2 = 0.0;
          for (int i = 0; i < q; ++i) {
            const double g = d2.vectors.col(i).dot(
                invxi2.asDiagonal() * d2.vectors.col(i));
            t2 += c2[i] * d2.values[i] * g;
          }
          extra = 2.0 * q * t1 + 2.0 * c1.sum() * t2;
          acc[2] += extra;
        }
        const double tot = l1 + l2 + extra;
        acc[3] += tot;
        acc[4] += tot * tot;
        acc[5] += 1.0;
      });

  const double r = static_cast<double>(reps);
  RiskDecomposition out;
  out.loss = kind;
  out.r1d = sums[0] / r;
  out.r2d = sums[1] / r;
  if (kind == LossKind::Stein) {
    out.r3d = q * c1.sum();
  } else {
    const double exact_terms = q * (q + 2.0) * c1.squaredNorm() - 2.0 * q * c1.sum();
    double cross = 0.0;
    for (int i = 0; i < m; ++i)
      for (int s = i + 1; s < m; ++s) cross += c1[i] * c1[s];
    out.r3d = sums[2] / r + exact_terms + 2.0 * q * cross;
  }
  out.total = out.r1d + out.r2d + out.r3d;
  const double mc_mean = sums[3] / r;
  out.stderr_value =
      std::sqrt(std::max(0.0, sums[4] / r - mc_mean * mc_mean) / r);
  return out;
}

inline double rrr(const RiskReport& report, const RiskReport& r_u) {
  if (report.loss != r_u.loss)
    throw DomainError("risk reduction rate requires matching loss kinds");
  if (report.p != r_u.p || report.n != r_u.n)
    throw DomainError("risk reduction rate requires matching context");
  return 100.0 * (r_u.value - report.value) / r_u.value;
}

}  // namespace blockshrink
