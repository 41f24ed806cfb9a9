#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sampling.hpp"

namespace blockshrink {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt big_factorial(int n) {
  if (n < 0) throw DomainError("factorial of negative integer");
  BigInt r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline BigInt big_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 0; i < k; ++i) {
    r *= (n - i);
    r /= (i + 1);
  }
  return r;
}

inline Rational big_pow(const Rational& base, int e) {
  Rational r = 1;
  Rational b = base;
  int n = e;
  if (n < 0) {
    b = 1 / b;
    n = -n;
  }
  while (n > 0) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

struct DeltaExponent {
  int x1 = 0;
  int x2 = 0;
  int x3 = 0;
};

enum class MomentMethod { Exact, MonteCarlo };

struct BlockMoments {
  Eigen::VectorXd e1;       // E[d_i], descending
  Eigen::VectorXd e2;       // E[d_i^2]
  Eigen::VectorXd stderr1;  // 0 for exact entries
  Eigen::VectorXd stderr2;
  MomentMethod method = MomentMethod::Exact;
};

namespace detail {

// Un-normalized quadruple sum for the 3x3 block: proportional to
// E[Delta1^x1 Delta2^x2 Delta3^x3] with the density's normalizing constant
// K3 left out.  Computing the ratio sum(x)/sum(0,0,0) cancels K3 (including
// its pi factor) exactly.
inline Rational f3_sum(const DeltaExponent& x, int u) {
  Rational total = 0;
  for (int i = 0; i <= u; ++i)
    for (int j = 0; j <= 1; ++j)
      for (int s = 0; s <= u; ++s)
        for (int t = 0; t <= u - s; ++t) {
          Rational term = Rational(big_binomial(u, i) * big_binomial(u, s) *
                                   big_binomial(u - s, t));
          term *= big_pow(Rational(2), 3 * u - i + j - t + x.x1 + x.x3 + 3);
          term *= big_pow(Rational(3), -(3 * u - i - s - t + x.x3 + 1));
          term *= Rational(big_factorial(j + s + x.x1 + 1));
          term *= Rational(big_factorial(i - j + t + 2 + x.x2));
          term *= Rational(big_factorial(3 * u - i - s - t + x.x3));
          total += term;
        }
  return total;
}

// Analogous single sum for the 2x2 block.  Ordered-eigenvalue density of
// W_2(dof, I): K2 (l1 l2)^v (l1 - l2) exp(-(l1+l2)/2) with v = (dof-3)/2.
// With Delta1 = l1 - l2, Delta2 = l2 the binomial expansion gives
// sum(x1,x2) = sum_i C(v,i) 2^(i+x1+2) (i+1+x1)! (2v-i+x2)!.
inline Rational f2_sum(int x1, int x2, int v) {
  Rational total = 0;
  for (int i = 0; i <= v; ++i) {
    Rational term = Rational(big_binomial(v, i));
    term *= big_pow(Rational(2), i + x1 + 2);
    term *= Rational(big_factorial(i + 1 + x1));
    term *= Rational(big_factorial(2 * v - i + x2));
    total += term;
  }
  return total;
}

// Monte Carlo moments of the ordered eigenvalues of W_q(dof, I); accumulates
// d, d^2, d^4 per coordinate for means and standard errors.
inline BlockMoments mc_block_moments(int q, int dof, const RandomStream& stream,
                                     std::int64_t reps, int threads) {
  BlockMoments out;
  out.method = MomentMethod::MonteCarlo;
  Eigen::VectorXd sums = mc_accumulate(
      reps, threads, 3 * q, [q, dof, stream](std::int64_t rep, Eigen::VectorXd& acc) {
        auto eng = make_engine(split_stream(stream, static_cast<std::uint64_t>(rep)));
        const SymMatrix w = sample_wishart_identity(q, dof, eng);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.mat(),
                                                          Eigen::EigenvaluesOnly);
        for (int i = 0; i < q; ++i) {
          const double d = es.eigenvalues()[q - 1 - i];  // descending
          const double d2 = d * d;
          acc[3 * i] += d;
          acc[3 * i + 1] += d2;
          acc[3 * i + 2] += d2 * d2;
        }
      });
  out.e1.resize(q);
  out.e2.resize(q);
  out.stderr1.resize(q);
  out.stderr2.resize(q);
  const double r = static_cast<double>(reps);
  for (int i = 0; i < q; ++i) {
    const double m1 = sums[3 * i] / r;
    const double m2 = sums[3 * i + 1] / r;
    const double m4 = sums[3 * i + 2] / r;
    out.e1[i] = m1;
    out.e2[i] = m2;
    out.stderr1[i] = std::sqrt(std::max(0.0, m2 - m1 * m1) / r);
    out.stderr2[i] = std::sqrt(std::max(0.0, m4 - m2 * m2) / r);
  }
  return out;
}

}  // namespace detail

// Exact E[Delta1^x1 Delta2^x2 Delta3^x3] for the eigenvalue gaps of
// W_3(dof, I), dof >= 4 with (dof - 4) even.
inline Rational f3_exact(const DeltaExponent& x, int dof) {
  if (dof < 4 || (dof - 4) % 2 != 0)
    throw ParityUnsupported("f3_exact requires dof >= 4 with (dof - 4) even");
  if (x.x1 < 0 || x.x2 < 0 || x.x3 < 0)
    throw DomainError("f3_exact exponents must be nonnegative");
  const int u = (dof - 4) / 2;
  return detail::f3_sum(x, u) / detail::f3_sum(DeltaExponent{0, 0, 0}, u);
}

// Exact E[Delta1^x1 Delta2^x2] for the 2x2 block, dof >= 3 with (dof-3) even.
inline Rational f2_exact(int x1, int x2, int dof) {
  if (dof < 3 || (dof - 3) % 2 != 0)
    throw ParityUnsupported("f2_exact requires dof >= 3 with (dof - 3) even");
  if (x1 < 0 || x2 < 0)
    throw DomainError("f2_exact exponents must be nonnegative");
  const int v = (dof - 3) / 2;
  return detail::f2_sum(x1, x2, v) / detail::f2_sum(0, 0, v);
}

inline bool exact_moments_available(int block_size, int dof) {
  if (block_size == 1) return true;
  if (block_size == 2) return dof >= 3 && (dof - 3) % 2 == 0;
  if (block_size == 3) return dof >= 4 && (dof - 4) % 2 == 0;
  return false;
}

// First and second moments of the ordered eigenvalues of W_q(dof, I).
// Exact where the closed-form expansions apply, Monte Carlo otherwise.
inline BlockMoments ordered_moments(int block_size, int dof,
                                    const RandomStream& stream,
                                    std::int64_t reps = 1000000,
                                    int threads = 1) {
  if (dof < block_size)
    throw InsufficientDof("ordered_moments requires dof >= block_size");
  const int q = block_size;

  if (q == 1) {
    BlockMoments out;
    out.e1 = Eigen::VectorXd::Constant(1, dof);
    out.e2 = Eigen::VectorXd::Constant(1, static_cast<double>(dof) * (dof + 2));
    out.stderr1 = Eigen::VectorXd::Zero(1);
    out.stderr2 = Eigen::VectorXd::Zero(1);
    return out;
  }
  if (q == 2 && exact_moments_available(2, dof)) {
    // d1 = Delta1 + Delta2, d2 = Delta2.
    BlockMoments out;
    out.e1.resize(2);
    out.e2.resize(2);
    out.stderr1 = Eigen::VectorXd::Zero(2);
    out.stderr2 = Eigen::VectorXd::Zero(2);
    const Rational f10 = f2_exact(1, 0, dof), f01 = f2_exact(0, 1, dof);
    const Rational f20 = f2_exact(2, 0, dof), f11 = f2_exact(1, 1, dof),
                   f02 = f2_exact(0, 2, dof);
    out.e1[0] = static_cast<double>(f10 + f01);
    out.e1[1] = static_cast<double>(f01);
    out.e2[0] = static_cast<double>(f20 + 2 * f11 + f02);
    out.e2[1] = static_cast<double>(f02);
    return out;
  }
  if (q == 3 && exact_moments_available(3, dof)) {
    // d1 = Delta1 + Delta2 + Delta3, d2 = Delta2 + Delta3, d3 = Delta3.
    BlockMoments out;
    out.e1.resize(3);
    out.e2.resize(3);
    out.stderr1 = Eigen::VectorXd::Zero(3);
    out.stderr2 = Eigen::VectorXd::Zero(3);
    auto F = [&](int a, int b, int c) {
      return f3_exact(DeltaExponent{a, b, c}, dof);
    };
    const Rational f100 = F(1, 0, 0), f010 = F(0, 1, 0), f001 = F(0, 0, 1);
    const Rational f200 = F(2, 0, 0), f020 = F(0, 2, 0), f002 = F(0, 0, 2);
    const Rational f110 = F(1, 1, 0), f101 = F(1, 0, 1), f011 = F(0, 1, 1);
    out.e1[0] = static_cast<double>(f100 + f010 + f001);
    out.e1[1] = static_cast<double>(f010 + f001);
    out.e1[2] = static_cast<double>(f001);
    out.e2[0] = static_cast<double>(f200 + f020 + f002 + 2 * (f110 + f101 + f011));
    out.e2[1] = static_cast<double>(f020 + f002 + 2 * f011);
    out.e2[2] = static_cast<double>(f002);
    return out;
  }
  return detail::mc_block_moments(q, dof, stream, reps, threads);
}

struct MomentTable {
  int p = 0;
  int m = 0;
  int n = 0;
  Eigen::VectorXd e1;
  Eigen::VectorXd e2;
  Eigen::VectorXd stderr1;
  Eigen::VectorXd stderr2;
  std::vector<MomentMethod> method;  // per entry
};

// Concatenated moments of the two limit blocks: d_1..d_m from W_m(n, I) and
// d_{m+1}..d_p from W_{p-m}(n-m, I).
inline MomentTable moment_table(int p, int m, int n, const RandomStream& stream,
                                std::int64_t reps = 1000000, int threads = 1,
                                bool exact_only = false, bool mc_only = false) {
  if (!(1 <= m && m < p)) throw DimensionMismatch("moment_table requires 1 <= m < p");
  if (n < p) throw InsufficientDof("moment_table requires n >= p");
  if (exact_only &&
      (!exact_moments_available(m, n) || !exact_moments_available(p - m, n - m)))
    throw ParityUnsupported(
        "exact moment path unavailable for this (p, m, n) configuration");

  auto block = [&](int size, int dof, std::uint64_t sub) {
    if (mc_only)
      return detail::mc_block_moments(size, dof, split_stream(stream, sub), reps,
                                      threads);
    return ordered_moments(size, dof, split_stream(stream, sub), reps, threads);
  };

  const BlockMoments b1 = block(m, n, 1);
  const BlockMoments b2 = block(p - m, n - m, 2);

  MomentTable t;
  t.p = p;
  t.m = m;
  t.n = n;
  t.e1.resize(p);
  t.e2.resize(p);
  t.stderr1.resize(p);
  t.stderr2.resize(p);
  t.method.resize(p);
  for (int i = 0; i < m; ++i) {
    t.e1[i] = b1.e1[i];
    t.e2[i] = b1.e2[i];
    t.stderr1[i] = b1.stderr1[i];
    t.stderr2[i] = b1.stderr2[i];
    t.method[i] = b1.method;
  }
  for (int i = 0; i < p - m; ++i) {
    t.e1[m + i] = b2.e1[i];
    t.e2[m + i] = b2.e2[i];
    t.stderr1[m + i] = b2.stderr1[i];
    t.stderr2[m + i] = b2.stderr2[i];
    t.method[m + i] = b2.method;
  }
  return t;
}

}  // namespace blockshrink
