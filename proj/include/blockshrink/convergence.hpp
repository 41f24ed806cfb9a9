#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "estimators.hpp"
#include "matrix.hpp"
#include "moments.hpp"
#include "parallel.hpp"
#include "risk.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "special.hpp"

namespace blockshrink {

// Transformed eigen-statistics: d_i = l_i / alpha_[i], Gtilde = Gamma' G,
// Wtilde_ss = Gtilde_ss D_s Gtilde_ss', and for t < s
// Ztilde_st = (alpha_t / alpha_s)^{1/2} Xi_s^{-1/2} Gtilde_st D_t^{1/2}.
struct TransformedStats {
  std::vector<Eigen::MatrixXd> w;               // w[s-1] = Wtilde_ss
  std::vector<std::vector<Eigen::MatrixXd>> z;  // z[s-1][t-1] for t < s
  Eigen::MatrixXd g_tilde;
  Eigen::VectorXd d;
};

inline TransformedStats transformed_stats(const SymMatrix& S,
                                          const OrthoMatrix& gamma,
                                          const EigenSpec& spec) {
  if (S.dim() != spec.dim() || gamma.dim() != spec.dim())
    throw DimensionMismatch("dimension mismatch in transformed_stats");
  const SpectralDecomp dec = spectral_decompose(S, &gamma);
  const BlockPartition& part = spec.partition();
  const int k = part.blocks();

  TransformedStats out;
  out.g_tilde = gamma.mat().transpose() * dec.vectors;
  out.d.resize(spec.dim());
  for (int i = 0; i < spec.dim(); ++i)
    out.d[i] = dec.values[i] / spec.scales()[part.block_of(i) - 1];

  out.w.resize(k);
  out.z.assign(k, {});
  for (int s = 1; s <= k; ++s) {
    const Eigen::MatrixXd gss = block_view(out.g_tilde, part, s, s);
    const Eigen::VectorXd ds = out.d.segment(part.begin(s), part.size(s));
    out.w[s - 1] = gss * ds.asDiagonal() * gss.transpose();
    out.z[s - 1].resize(s - 1);
    for (int t = 1; t < s; ++t) {
      const Eigen::MatrixXd gst = block_view(out.g_tilde, part, s, t);
      const Eigen::VectorXd dt = out.d.segment(part.begin(t), part.size(t));
      const Eigen::VectorXd xis_invsqrt =
          spec.xi().segment(part.begin(s), part.size(s)).cwiseSqrt().cwiseInverse();
      const double scale =
          std::sqrt(spec.scales()[t - 1] / spec.scales()[s - 1]);
      out.z[s - 1][t - 1] = scale * xis_invsqrt.asDiagonal() * gst *
                            dt.cwiseSqrt().asDiagonal();
    }
  }
  return out;
}

// Named probability statistics of the two-block sweep, in table row order:
// 1a..5a then 1b..5b.
inline std::array<std::string, 10> prob_stat_names() {
  return {"Prob 1a", "Prob 2a", "Prob 3a", "Prob 4a", "Prob 5a",
          "Prob 1b", "Prob 2b", "Prob 3b", "Prob 4b", "Prob 5b"};
}

struct ConvergenceRow {
  double beta = 0.0;
  std::array<double, 10> probs{};  // named per prob_stat_names()
  double g21_exceed = 0.0;         // P(max |Gtilde_21| > 0.1)
  // risks[e][0] = Stein, risks[e][1] = quadratic; stderr parallel.
  std::vector<std::array<double, 2>> risks;
  std::vector<std::array<double, 2>> risk_stderr;
};

struct ConvergenceReport {
  int p = 0;
  int m = 0;
  int n = 0;
  std::int64_t reps = 0;
  RandomStream stream;
  std::vector<EstimatorKind> estimators;
  std::vector<ConvergenceRow> rows;
  std::array<double, 10> asymp{};  // nominal limits of the probabilities
};

inline std::vector<double> default_beta_grid() {
  return {1.0, 0.8, 0.6, 0.4, 0.2, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
}

// Two-block sweep with xi = 1: empirical limit-law probabilities plus Monte
// Carlo risks of the standard estimators, sharing one set of draws per beta.
inline ConvergenceReport convergence_sweep(int p, int m, int n,
                                           const std::vector<double>& beta_grid,
                                           std::int64_t reps,
                                           const RandomStream& stream,
                                           int threads = 1,
                                           bool random_gamma = false) {
  if (!(1 <= m && m < p)) throw DimensionMismatch("1 <= m < p required");
  if (n < p) throw InsufficientDof("n >= p required");

  ConvergenceReport rep;
  rep.p = p;
  rep.m = m;
  rep.n = n;
  rep.reps = reps;
  rep.stream = stream;
  rep.estimators = {EstimatorKind::U, EstimatorKind::SDS, EstimatorKind::KG,
                    EstimatorKind::MA1, EstimatorKind::MA2};
  for (int i = 0; i < 5; ++i) rep.asymp[i] = 0.05;
  for (int i = 5; i < 10; ++i) rep.asymp[i] = 0.95;

  // Coefficient vectors (moment table exact where parity allows).
  const MomentTable mt = moment_table(p, m, n, split_stream(stream, 0xC0));
  const std::vector<CoefficientVector> coeffs = {
      coeffs_u(p, n), coeffs_sds(p, n), coeffs_kg(p, n),
      coeffs_ma1(p, m, n, mt), coeffs_ma2(p, m, n, mt)};
  const int ne = static_cast<int>(coeffs.size());

  // Thresholds: Wtilde11 vs chi2_n, last/first diagonal of Wtilde22 vs
  // chi2_{n-m}, Ztilde21 entries vs standard normal.
  const double chi_lo1 = chi2_quantile(n, 0.05), chi_hi1 = chi2_quantile(n, 0.95);
  const double chi_lo2 = chi2_quantile(n - m, 0.05),
               chi_hi2 = chi2_quantile(n - m, 0.95);
  const double z_lo = normal_quantile(0.05), z_hi = normal_quantile(0.95);
  const int q = p - m;

  OrthoMatrix gamma = OrthoMatrix::identity(p);
  if (random_gamma) {
    auto eng = make_engine(split_stream(stream, 0xC1));
    const Eigen::MatrixXd zm = sample_gaussian_matrix(p, p, eng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(zm);
    Eigen::MatrixXd qmat = qr.householderQ();
    // Fix signs so the factorization is unique given the draw.
    const Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < p; ++j)
      if (rmat(j, j) < 0) qmat.col(j) = -qmat.col(j);
    gamma = OrthoMatrix(qmat);
  }

  const int width = 11 + 4 * ne;  // 10 indicators + g21 + (loss, loss^2) x 2 x ne
  for (std::size_t bi = 0; bi < beta_grid.size(); ++bi) {
    const double beta = beta_grid[bi];
    const EigenSpec spec = EigenSpec::two_block_unit(p, m, 1.0, beta);
    const SymMatrix sigma = build_sigma(spec, gamma);
    const RandomStream row_stream =
        split_stream(stream, 0xBE7A0000ULL + static_cast<std::uint64_t>(bi));
    const Eigen::VectorXd sums = mc_accumulate(
        reps, threads, width,
        [&](std::int64_t r, Eigen::VectorXd& acc) {
          auto eng = make_engine(split_stream(row_stream, static_cast<std::uint64_t>(r)));
          const SymMatrix s = sample_wishart(n, sigma, eng);
          const TransformedStats ts = transformed_stats(s, gamma, spec);
          const Eigen::MatrixXd& w11 = ts.w[0];
          const Eigen::MatrixXd& w22 = ts.w[1];
          const Eigen::MatrixXd& z21 = ts.z[1][0];
          const double stats_a[5] = {w11(0, 0), w22(0, 0), w22(q - 1, q - 1),
                                     z21(0, 0), z21(q - 1, 0)};
          const double lo[5] = {chi_lo1, chi_lo2, chi_lo2, z_lo, z_lo};
          const double hi[5] = {chi_hi1, chi_hi2, chi_hi2, z_hi, z_hi};
          for (int i = 0; i < 5; ++i) {
            if (stats_a[i] <= lo[i]) acc[i] += 1.0;
            if (stats_a[i] <= hi[i]) acc[5 + i] += 1.0;
          }
          const Eigen::MatrixXd g21 =
              block_view(ts.g_tilde, spec.partition(), 2, 1);
          if (g21.cwiseAbs().maxCoeff() > 0.1) acc[10] += 1.0;

          // Shared-draw risks for every estimator and both losses, reusing
          // the decomposition already inside the transformed statistics:
          // G = Gamma Gtilde and l_i = d_i alpha_[i].
          Eigen::VectorXd lvals(p);
          for (int i = 0; i < p; ++i)
            lvals[i] = ts.d[i] * spec.scales()[spec.partition().block_of(i) - 1];
          const Eigen::MatrixXd gmat = gamma.mat() * ts.g_tilde;
          for (int e = 0; e < ne; ++e) {
            const Eigen::VectorXd psi = coeffs[e].c.cwiseProduct(lvals);
            const SymMatrix hat(gmat * psi.asDiagonal() * gmat.transpose());
            const double l1 = loss(LossKind::Stein, hat, sigma);
            const double l2 = loss(LossKind::Quadratic, hat, sigma);
            acc[11 + 4 * e] += l1;
            acc[11 + 4 * e + 1] += l1 * l1;
            acc[11 + 4 * e + 2] += l2;
            acc[11 + 4 * e + 3] += l2 * l2;
          }
        });

    ConvergenceRow row;
    row.beta = beta;
    const double r = static_cast<double>(reps);
    for (int i = 0; i < 10; ++i) row.probs[i] = sums[i] / r;
    row.g21_exceed = sums[10] / r;
    row.risks.resize(ne);
    row.risk_stderr.resize(ne);
    for (int e = 0; e < ne; ++e) {
      for (int d = 0; d < 2; ++d) {
        const double mean = sums[11 + 4 * e + 2 * d] / r;
        const double mean2 = sums[11 + 4 * e + 2 * d + 1] / r;
        row.risks[e][d] = mean;
        row.risk_stderr[e][d] =
            std::sqrt(std::max(0.0, mean2 - mean * mean) / r);
      }
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

struct MultiblockReport {
  std::int64_t reps = 0;
  // Per block s (1-based index s-1): max |mean(Wtilde_ss) - (n - m_{s-1}) Xi_s|
  // in MC standard error units.
  std::vector<double> w_mean_dev_sigmas;
  std::vector<Eigen::MatrixXd> w_mean;
  // Over all Z blocks: worst |mean| and |variance - 1| in stderr units.
  double z_mean_dev_sigmas = 0.0;
  double z_var_dev_sigmas = 0.0;
  // Worst absolute pairwise sample correlation (in 1/sqrt(reps) units)
  // between the block traces and the first entry of each Z block.
  double cross_corr_sigmas = 0.0;
};

// Empirical check of the multi-block limits: Wtilde_ss -> W(n - m_{s-1}, Xi_s),
// Ztilde_st entries -> iid N(0,1), all mutually independent.
inline MultiblockReport multiblock_limit_check(const EigenSpec& spec, int n,
                                               std::int64_t reps,
                                               const RandomStream& stream,
                                               int threads = 1) {
  const BlockPartition& part = spec.partition();
  const int k = part.blocks();
  const int p = part.dim();
  if (n < p) throw InsufficientDof("n >= p required");

  const OrthoMatrix gamma = OrthoMatrix::identity(p);
  const SymMatrix sigma = build_sigma(spec, gamma);

  // Layout: per block s, the entries of Wtilde_ss and their squares; then all
  // Z entries and their squares; then the scalar tracking set (traces and
  // first Z entries) with sums, squares, and pairwise products.
  std::vector<int> w_off(k), z_off;
  int off = 0;
  for (int s = 0; s < k; ++s) {
    w_off[s] = off;
    off += 2 * part.size(s + 1) * part.size(s + 1);
  }
  int z_entries = 0;
  for (int s = 2; s <= k; ++s)
    for (int t = 1; t < s; ++t) z_entries += part.size(s) * part.size(t);
  const int z_base = off;
  off += 2 * z_entries;
  const int nz_blocks = k * (k - 1) / 2;
  const int ns = k + nz_blocks;  // tracked scalars
  const int s_base = off;
  off += 2 * ns + ns * ns;

  const Eigen::VectorXd sums = mc_accumulate(
      reps, threads, off,
      [&](std::int64_t r, Eigen::VectorXd& acc) {
        auto eng = make_engine(split_stream(stream, static_cast<std::uint64_t>(r)));
        const SymMatrix s_draw = sample_wishart(n, sigma, eng);
        const TransformedStats ts = transformed_stats(s_draw, gamma, spec);
        Eigen::VectorXd scalars(ns);
        for (int s = 0; s < k; ++s) {
          const Eigen::MatrixXd& w = ts.w[s];
          const int q = part.size(s + 1);
          int base = w_off[s];
          for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j) {
              acc[base] += w(i, j);
              acc[base + 1] += w(i, j) * w(i, j);
              base += 2;
            }
          scalars[s] = w.trace();
        }
        int zi = 0, zslot = k;
        for (int s = 2; s <= k; ++s)
          for (int t = 1; t < s; ++t) {
            const Eigen::MatrixXd& z = ts.z[s - 1][t - 1];
            for (int i = 0; i < z.rows(); ++i)
              for (int j = 0; j < z.cols(); ++j) {
                acc[z_base + 2 * zi] += z(i, j);
                acc[z_base + 2 * zi + 1] += z(i, j) * z(i, j);
                ++zi;
              }
            scalars[zslot++] = z(0, 0);
          }
        for (int a = 0; a < ns; ++a) {
          acc[s_base + 2 * a] += scalars[a];
          acc[s_base + 2 * a + 1] += scalars[a] * scalars[a];
        }
        int pair = s_base + 2 * ns;
        for (int a = 0; a < ns; ++a)
          for (int b = 0; b < ns; ++b) acc[pair++] += scalars[a] * scalars[b];
      });

  const double r = static_cast<double>(reps);
  MultiblockReport out;
  out.reps = reps;
  out.w_mean.resize(k);
  out.w_mean_dev_sigmas.resize(k);
  for (int s = 0; s < k; ++s) {
    const int q = part.size(s + 1);
    const double dof = n - part.cut_points()[s];
    Eigen::MatrixXd mean(q, q);
    double worst = 0.0;
    int base = w_off[s];
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) {
        const double m1 = sums[base] / r;
        const double m2 = sums[base + 1] / r;
        const double se = std::sqrt(std::max(0.0, m2 - m1 * m1) / r);
        mean(i, j) = m1;
        const double target =
            i == j ? dof * spec.xi()[part.begin(s + 1) + i] : 0.0;
        if (se > 0) worst = std::max(worst, std::abs(m1 - target) / se);
        base += 2;
      }
    out.w_mean[s] = mean;
    out.w_mean_dev_sigmas[s] = worst;
  }
  for (int zi = 0; zi < z_entries; ++zi) {
    const double m1 = sums[z_base + 2 * zi] / r;
    const double m2 = sums[z_base + 2 * zi + 1] / r;
    const double var = std::max(0.0, m2 - m1 * m1);
    const double se_mean = std::sqrt(var / r);
    // Var(sample variance) ~ 2 var^2 / reps for near-normal entries.
    const double se_var = std::sqrt(2.0 * var * var / r);
    if (se_mean > 0)
      out.z_mean_dev_sigmas =
          std::max(out.z_mean_dev_sigmas, std::abs(m1) / se_mean);
    if (se_var > 0)
      out.z_var_dev_sigmas =
          std::max(out.z_var_dev_sigmas, std::abs(var - 1.0) / se_var);
  }
  for (int a = 0; a < ns; ++a)
    for (int b = a + 1; b < ns; ++b) {
      const double ma = sums[s_base + 2 * a] / r;
      const double mb = sums[s_base + 2 * b] / r;
      const double va = std::max(1e-300, sums[s_base + 2 * a + 1] / r - ma * ma);
      const double vb = std::max(1e-300, sums[s_base + 2 * b + 1] / r - mb * mb);
      const double cov = sums[s_base + 2 * ns + a * ns + b] / r - ma * mb;
      const double corr = cov / std::sqrt(va * vb);
      out.cross_corr_sigmas =
          std::max(out.cross_corr_sigmas, std::abs(corr) * std::sqrt(r));
    }
  return out;
}

}  // namespace blockshrink
