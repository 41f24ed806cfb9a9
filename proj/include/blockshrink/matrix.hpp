#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace blockshrink {

// Symmetric matrix with the upper triangle as the canonical copy; the lower
// triangle is mirrored exactly at construction so (i,j) and (j,i) are the
// same double bit-for-bit.
class SymMatrix {
 public:
  explicit SymMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
      throw DimensionMismatch("SymMatrix requires a square matrix, dim >= 1");
    for (Eigen::Index i = 0; i < m_.rows(); ++i)
      for (Eigen::Index j = 0; j < i; ++j) m_(i, j) = m_(j, i);
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double trace() const { return m_.trace(); }

 private:
  Eigen::MatrixXd m_;
};

class OrthoMatrix {
 public:
  explicit OrthoMatrix(Eigen::MatrixXd q) : q_(std::move(q)) {
    if (q_.rows() != q_.cols() || q_.rows() < 1)
      throw DimensionMismatch("OrthoMatrix requires a square matrix");
    const double dev =
        (q_.transpose() * q_ - Eigen::MatrixXd::Identity(q_.rows(), q_.cols()))
            .cwiseAbs()
            .maxCoeff();
    if (dev > 1e-10)
      throw NotOrthogonal("matrix is not orthogonal: max |Q'Q - I| = " +
                          std::to_string(dev));
  }

  static OrthoMatrix identity(int p) {
    return OrthoMatrix(Eigen::MatrixXd::Identity(p, p));
  }

  int dim() const { return static_cast<int>(q_.rows()); }
  double operator()(int i, int j) const { return q_(i, j); }
  const Eigen::MatrixXd& mat() const { return q_; }

 private:
  Eigen::MatrixXd q_;
};

// Cut points 0 = m_0 < m_1 < ... < m_k = p.
class BlockPartition {
 public:
  explicit BlockPartition(std::vector<int> cut_points)
      : cuts_(std::move(cut_points)) {
    if (cuts_.size() < 2 || cuts_.front() != 0)
      throw DimensionMismatch("partition must start at 0 and contain >= 1 block");
    for (std::size_t i = 1; i < cuts_.size(); ++i)
      if (cuts_[i] <= cuts_[i - 1])
        throw DimensionMismatch("partition cut points must strictly increase");
  }

  // Two-block convenience: (0, m, p).
  static BlockPartition two_block(int m, int p) {
    if (!(1 <= m && m < p))
      throw DimensionMismatch("two_block requires 1 <= m < p");
    return BlockPartition({0, m, p});
  }

  int dim() const { return cuts_.back(); }
  int blocks() const { return static_cast<int>(cuts_.size()) - 1; }
  // 1-based block index s.
  int begin(int s) const { return cuts_.at(s - 1); }
  int size(int s) const { return cuts_.at(s) - cuts_.at(s - 1); }
  // Block index [i] (1-based) of a 0-based coordinate i.
  int block_of(int i) const {
    for (int s = 1; s <= blocks(); ++s)
      if (i < cuts_[s]) return s;
    throw DimensionMismatch("coordinate out of range");
  }
  const std::vector<int>& cut_points() const { return cuts_; }

 private:
  std::vector<int> cuts_;
};

// Population spectrum lambda_i = xi_i * alpha_[i].
class EigenSpec {
 public:
  EigenSpec(BlockPartition partition, Eigen::VectorXd xi, Eigen::VectorXd scales)
      : partition_(std::move(partition)), xi_(std::move(xi)), scales_(std::move(scales)) {
    if (xi_.size() != partition_.dim())
      throw DimensionMismatch("xi length must equal partition dimension");
    if (scales_.size() != partition_.blocks())
      throw DimensionMismatch("one scale per block required");
    for (Eigen::Index i = 0; i < xi_.size(); ++i)
      if (!(xi_[i] > 0)) throw DomainError("xi entries must be positive");
    for (Eigen::Index s = 0; s < scales_.size(); ++s) {
      if (!(scales_[s] > 0)) throw DomainError("scales must be positive");
      if (s > 0 && !(scales_[s] < scales_[s - 1]))
        throw DomainError("scales must strictly decrease across blocks");
    }
    const Eigen::VectorXd lam = lambda();
    for (Eigen::Index i = 1; i < lam.size(); ++i)
      if (lam[i] > lam[i - 1] + 1e-15 * lam[i - 1])
        throw DomainError("lambda must be non-increasing overall");
  }

  // Two-block helper with xi = 1: scales (alpha, beta).
  static EigenSpec two_block_unit(int p, int m, double alpha, double beta) {
    Eigen::VectorXd scales(2);
    scales << alpha, beta;
    if (!(beta < alpha)) {
      // beta = alpha is allowed in sweeps (the "all eigenvalues equal" end of
      // the grid); nudge into a single representable ordering by treating it
      // as an exactly flat spectrum via a tiny admissible decrease.
      if (beta == alpha) scales[1] = alpha * (1.0 - 1e-15);
    }
    return EigenSpec(BlockPartition::two_block(m, p), Eigen::VectorXd::Ones(p), scales);
  }

  const BlockPartition& partition() const { return partition_; }
  const Eigen::VectorXd& xi() const { return xi_; }
  const Eigen::VectorXd& scales() const { return scales_; }
  int dim() const { return partition_.dim(); }

  Eigen::VectorXd lambda() const {
    Eigen::VectorXd lam(xi_.size());
    for (int i = 0; i < xi_.size(); ++i)
      lam[i] = xi_[i] * scales_[partition_.block_of(i) - 1];
    return lam;
  }

 private:
  BlockPartition partition_;
  Eigen::VectorXd xi_;
  Eigen::VectorXd scales_;
};

struct SpectralDecomp {
  Eigen::VectorXd values;                    // descending, strictly positive
  Eigen::MatrixXd vectors;                   // orthogonal, sign-fixed
  bool degenerate = false;                   // two eigenvalues within 1e-10 rel.
  std::optional<Eigen::MatrixXd> reference_frame;
};

inline SpectralDecomp spectral_decompose(const SymMatrix& M,
                                         const OrthoMatrix* frame = nullptr) {
  const int p = M.dim();
  if (frame && frame->dim() != p)
    throw DimensionMismatch("frame dimension mismatch in spectral_decompose");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.mat());
  if (es.info() != Eigen::Success)
    throw Error("eigendecomposition failed to converge");

  const double tol = 1e-12 * std::abs(M.trace());
  for (int i = 0; i < p; ++i)
    if (!(es.eigenvalues()[i] > tol))
      throw NotPositiveDefinite("matrix is not positive definite (eigenvalue " +
                                std::to_string(es.eigenvalues()[i]) + ")");

  // Stable descending order; ties keep the solver's original column order.
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return es.eigenvalues()[a] > es.eigenvalues()[b];
  });

  SpectralDecomp out;
  out.values.resize(p);
  out.vectors.resize(p, p);
  for (int j = 0; j < p; ++j) {
    out.values[j] = es.eigenvalues()[idx[j]];
    out.vectors.col(j) = es.eigenvectors().col(idx[j]);
  }
  for (int j = 0; j + 1 < p; ++j)
    if (out.values[j] - out.values[j + 1] <= 1e-10 * out.values[j])
      out.degenerate = true;

  for (int j = 0; j < p; ++j) {
    double s = 0.0;
    if (frame) s = frame->mat().col(j).dot(out.vectors.col(j));
    if (s == 0.0) {
      // Data-driven fallback: make the largest-magnitude entry positive
      // (first such entry on exact magnitude ties).
      int arg = 0;
      double best = -1.0;
      for (int i = 0; i < p; ++i) {
        const double a = std::abs(out.vectors(i, j));
        if (a > best) {
          best = a;
          arg = i;
        }
      }
      s = out.vectors(arg, j);
    }
    if (s < 0) out.vectors.col(j) = -out.vectors.col(j);
  }
  if (frame) out.reference_frame = frame->mat();
  return out;
}

inline SymMatrix build_sigma(const EigenSpec& spec, const OrthoMatrix& gamma) {
  if (gamma.dim() != spec.dim())
    throw DimensionMismatch("gamma dimension mismatch in build_sigma");
  const Eigen::VectorXd lam = spec.lambda();
  return SymMatrix(gamma.mat() * lam.asDiagonal() * gamma.mat().transpose());
}

inline OrthoMatrix relative_rotation(const OrthoMatrix& gamma, const OrthoMatrix& g) {
  if (gamma.dim() != g.dim())
    throw DimensionMismatch("dimension mismatch in relative_rotation");
  return OrthoMatrix(gamma.mat().transpose() * g.mat());
}

// (s,t) block (1-based) of a matrix under a partition.
inline Eigen::MatrixXd block_view(const Eigen::MatrixXd& M,
                                  const BlockPartition& partition, int s, int t) {
  if (s < 1 || t < 1 || s > partition.blocks() || t > partition.blocks())
    throw DimensionMismatch("block index out of range");
  if (M.rows() != partition.dim() || M.cols() != partition.dim())
    throw DimensionMismatch("matrix does not match partition dimension");
  return M.block(partition.begin(s), partition.begin(t), partition.size(s),
                 partition.size(t));
}

inline Eigen::MatrixXd block_view(const SymMatrix& M,
                                  const BlockPartition& partition, int s, int t) {
  return block_view(M.mat(), partition, s, t);
}

}  // namespace blockshrink
