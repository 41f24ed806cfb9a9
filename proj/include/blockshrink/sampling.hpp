#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <random>

#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace blockshrink {

inline double sample_chi2(double k, std::mt19937_64& eng) {
  std::gamma_distribution<double> g(k / 2.0, 2.0);
  return g(eng);
}

inline double sample_chi2(double k, const RandomStream& stream) {
  if (k < 1) throw DomainError("sample_chi2 requires k >= 1");
  auto eng = make_engine(stream);
  return sample_chi2(k, eng);
}

inline Eigen::MatrixXd sample_gaussian_matrix(int rows, int cols,
                                              std::mt19937_64& eng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd z(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) z(i, j) = nd(eng);
  return z;
}

inline Eigen::MatrixXd sample_gaussian_matrix(int rows, int cols,
                                              const RandomStream& stream) {
  if (rows < 1 || cols < 1)
    throw DimensionMismatch("sample_gaussian_matrix requires rows, cols >= 1");
  auto eng = make_engine(stream);
  return sample_gaussian_matrix(rows, cols, eng);
}

// Lower-triangular Bartlett factor: T_ii = sqrt(chi2_{n-i+1}), strictly lower
// entries standard normal.  Then T T' ~ W_p(n, I).
inline Eigen::MatrixXd bartlett_factor(int p, int n, std::mt19937_64& eng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    t(i, i) = std::sqrt(sample_chi2(static_cast<double>(n - i), eng));
    for (int j = 0; j < i; ++j) t(i, j) = nd(eng);
  }
  return t;
}

inline SymMatrix sample_wishart(int n, const SymMatrix& sigma,
                                std::mt19937_64& eng) {
  const int p = sigma.dim();
  if (n < p) throw InsufficientDof("sample_wishart requires n >= p");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.mat());
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("sigma is not positive definite in sample_wishart");
  const Eigen::MatrixXd lt = llt.matrixL() * bartlett_factor(p, n, eng);
  return SymMatrix(lt * lt.transpose());
}

inline SymMatrix sample_wishart(int n, const SymMatrix& sigma,
                                const RandomStream& stream) {
  auto eng = make_engine(stream);
  return sample_wishart(n, sigma, eng);
}

// Identity-covariance fast path used by moment and limit-law Monte Carlo.
inline SymMatrix sample_wishart_identity(int p, int n, std::mt19937_64& eng) {
  if (n < p) throw InsufficientDof("sample_wishart requires n >= p");
  const Eigen::MatrixXd t = bartlett_factor(p, n, eng);
  return SymMatrix(t * t.transpose());
}

}  // namespace blockshrink
