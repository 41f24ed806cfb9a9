#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "errors.hpp"
#include "matrix.hpp"
#include "moments.hpp"

namespace blockshrink {

enum class EstimatorKind { U, SDS, KG, MA1, MA2, Custom };

inline const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::U: return "U";
    case EstimatorKind::SDS: return "SDS";
    case EstimatorKind::KG: return "KG";
    case EstimatorKind::MA1: return "MA1";
    case EstimatorKind::MA2: return "MA2";
    default: return "custom";
  }
}

struct CoefficientVector {
  Eigen::VectorXd c;
  EstimatorKind kind = EstimatorKind::Custom;
  int p = 0;
  int m = 0;  // 0 when the rule does not depend on a block split
  int n = 0;

  void validate() const {
    for (Eigen::Index i = 0; i < c.size(); ++i)
      if (!(c[i] > 0)) throw NegativeCoefficient("coefficients must be positive");
  }
};

inline CoefficientVector coeffs_u(int p, int n) {
  if (n < 1) throw InsufficientDof("coeffs_u requires n >= 1");
  CoefficientVector out;
  out.c = Eigen::VectorXd::Constant(p, 1.0 / n);
  out.kind = EstimatorKind::U;
  out.p = p;
  out.n = n;
  return out;
}

// c_i = 1 / (n + p + 1 - 2i).
inline CoefficientVector coeffs_sds(int p, int n) {
  if (n < p) throw InsufficientDof("coeffs_sds requires n >= p");
  CoefficientVector out;
  out.c.resize(p);
  for (int i = 1; i <= p; ++i) out.c[i - 1] = 1.0 / (n + p + 1 - 2 * i);
  out.kind = EstimatorKind::SDS;
  out.p = p;
  out.n = n;
  return out;
}

namespace detail {

// Direct solve with one step of iterative refinement and a residual guard.
inline Eigen::VectorXd solve_spd_system(const Eigen::MatrixXd& A,
                                        const Eigen::VectorXd& b) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd x = lu.solve(b);
  x += lu.solve(b - A * x);
  const double resid = (A * x - b).cwiseAbs().maxCoeff();
  if (!(resid <= 1e-8 * b.cwiseAbs().maxCoeff()))
    throw SingularSystem("linear system solve failed (residual " +
                         std::to_string(resid) + ")");
  return x;
}

}  // namespace detail

// Haff-style system: a_ii = (n+p-2i+1)(n+p-2i+3), a_ij = n+p-2*max(i,j)+1
// for i != j, b_i = n+p+1-2i.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> kg_system(int p, int n) {
  Eigen::MatrixXd A(p, p);
  Eigen::VectorXd b(p);
  for (int i = 1; i <= p; ++i) {
    b[i - 1] = n + p + 1 - 2 * i;
    for (int j = 1; j <= p; ++j) {
      if (i == j)
        A(i - 1, j - 1) = static_cast<double>(n + p - 2 * i + 1) * (n + p - 2 * i + 3);
      else
        A(i - 1, j - 1) = n + p - 2 * std::max(i, j) + 1;
    }
  }
  return {A, b};
}

inline CoefficientVector coeffs_kg(int p, int n) {
  if (n < p) throw InsufficientDof("coeffs_kg requires n >= p");
  auto [A, b] = kg_system(p, n);
  CoefficientVector out;
  out.c = detail::solve_spd_system(A, b);
  out.kind = EstimatorKind::KG;
  out.p = p;
  out.n = n;
  out.validate();
  return out;
}

// b and A of the identity-block asymptotic risk expressions, assembled from a
// moment table: b_i = E[d_i] + (p - m) for i <= m, E[d_i] for i > m;
// a_ii = E[d_i^2] + 2(p-m)E[d_i] + (p-m)(p-m+2) for i <= m, E[d_i^2] for
// i > m; a_ij = p - m for i != j <= m; E[d_max(i,j)] when exactly one index
// is in the first block; 0 otherwise.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> theorem_system(
    const MomentTable& t) {
  const int p = t.p, m = t.m;
  const double pm = p - m;
  Eigen::VectorXd b(p);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    b[i] = t.e1[i] + (i < m ? pm : 0.0);
    A(i, i) = i < m ? t.e2[i] + 2.0 * pm * t.e1[i] + pm * (pm + 2.0) : t.e2[i];
  }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < i; ++j) {
      double a = 0.0;
      if (i < m && j < m)
        a = pm;
      else if (j < m && i >= m)
        a = t.e1[i];  // E[d_max(i,j)]
      A(i, j) = A(j, i) = a;
    }
  return {A, b};
}

inline CoefficientVector coeffs_ma1(int p, int m, int n, const MomentTable& moments) {
  if (moments.p != p || moments.m != m || moments.n != n)
    throw DimensionMismatch("moment table context does not match (p, m, n)");
  auto [A, b] = theorem_system(moments);
  (void)A;
  CoefficientVector out;
  out.c = b.cwiseInverse();
  out.kind = EstimatorKind::MA1;
  out.p = p;
  out.m = m;
  out.n = n;
  out.validate();
  return out;
}

inline CoefficientVector coeffs_ma2(int p, int m, int n, const MomentTable& moments) {
  if (moments.p != p || moments.m != m || moments.n != n)
    throw DimensionMismatch("moment table context does not match (p, m, n)");
  auto [A, b] = theorem_system(moments);
  CoefficientVector out;
  out.c = detail::solve_spd_system(A, b);
  out.kind = EstimatorKind::MA2;
  out.p = p;
  out.m = m;
  out.n = n;
  out.validate();
  return out;
}

inline SymMatrix apply_estimator(const SymMatrix& S, const CoefficientVector& c,
                                 const OrthoMatrix* frame = nullptr) {
  if (S.dim() != c.c.size())
    throw DimensionMismatch("coefficient vector dimension mismatch");
  const SpectralDecomp d = spectral_decompose(S, frame);
  const Eigen::VectorXd psi = c.c.cwiseProduct(d.values);
  return SymMatrix(d.vectors * psi.asDiagonal() * d.vectors.transpose());
}

// Reassembly from an existing decomposition; used by Monte Carlo loops that
// evaluate several estimators on one draw.
inline SymMatrix apply_coefficients(const SpectralDecomp& d,
                                    const Eigen::VectorXd& c) {
  const Eigen::VectorXd psi = c.cwiseProduct(d.values);
  return SymMatrix(d.vectors * psi.asDiagonal() * d.vectors.transpose());
}

}  // namespace blockshrink
