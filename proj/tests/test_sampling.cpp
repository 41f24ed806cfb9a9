#include <catch2/catch_amalgamated.hpp>

#include <blockshrink/parallel.hpp>
#include <blockshrink/rng.hpp>
#include <blockshrink/sampling.hpp>
#include <set>

using namespace blockshrink;

TEST_CASE("split_stream is stable and collision-free over a large range") {
  const RandomStream root{7, 0};
  CHECK(split_stream(root, 5) == split_stream(root, 5));
  CHECK_FALSE(split_stream(root, 5) == split_stream(root, 6));
  // Quick collision scan on the derived stream ids.
  std::set<std::uint64_t> ids;
  for (std::uint64_t i = 0; i < 10000; ++i)
    ids.insert(split_stream(root, i).stream_id);
  CHECK(ids.size() == 10000);
}

TEST_CASE("chi-square sampler matches mean and variance") {
  const double k = 7.0;
  const std::int64_t reps = 200000;
  auto eng = make_engine({11, 1});
  double s1 = 0.0, s2 = 0.0;
  for (std::int64_t i = 0; i < reps; ++i) {
    const double x = sample_chi2(k, eng);
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / reps;
  const double var = s2 / reps - mean * mean;
  // mean k, variance 2k; 5 sigma bands.
  CHECK(std::abs(mean - k) < 5.0 * std::sqrt(2.0 * k / reps));
  CHECK(std::abs(var - 2.0 * k) < 5.0 * std::sqrt(8.0 * k * (k + 3) / reps));
  CHECK_THROWS_AS(sample_chi2(0.5, RandomStream{1, 0}), DomainError);
}

TEST_CASE("bartlett factor is lower triangular with chi diagonals") {
  auto eng = make_engine({3, 9});
  const Eigen::MatrixXd t = bartlett_factor(4, 10, eng);
  for (int i = 0; i < 4; ++i) {
    CHECK(t(i, i) > 0.0);
    for (int j = i + 1; j < 4; ++j) CHECK(t(i, j) == 0.0);
  }
}

TEST_CASE("wishart mean is n * Sigma") {
  Eigen::MatrixXd sig(2, 2);
  sig << 2.0, 0.5, 0.5, 1.0;
  const SymMatrix sigma(sig);
  const int n = 8;
  const std::int64_t reps = 100000;
  auto eng = make_engine({21, 4});
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
  for (std::int64_t i = 0; i < reps; ++i)
    sum += sample_wishart(n, sigma, eng).mat();
  const Eigen::MatrixXd mean = sum / static_cast<double>(reps);
  // Var(W_ij) = n (sigma_ij^2 + sigma_ii sigma_jj); 5 sigma bands.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double v = n * (sig(i, j) * sig(i, j) + sig(i, i) * sig(j, j));
      CHECK(std::abs(mean(i, j) - n * sig(i, j)) < 5.0 * std::sqrt(v / reps));
    }
  CHECK_THROWS_AS(sample_wishart(1, sigma, RandomStream{1, 0}),
                  InsufficientDof);
}

TEST_CASE("identity fast path agrees in distribution with the general path") {
  const int p = 3, n = 9;
  const std::int64_t reps = 50000;
  auto e1 = make_engine({5, 0});
  auto e2 = make_engine({5, 1});
  double tr_fast = 0.0, tr_gen = 0.0;
  const SymMatrix eye(Eigen::MatrixXd::Identity(p, p));
  for (std::int64_t i = 0; i < reps; ++i) {
    tr_fast += sample_wishart_identity(p, n, e1).trace();
    tr_gen += sample_wishart(n, eye, e2).trace();
  }
  // Both traces are chi2_{np}: mean np, var 2np.
  const double se = std::sqrt(2.0 * n * p / static_cast<double>(reps));
  CHECK(std::abs(tr_fast / reps - n * p) < 5.0 * se);
  CHECK(std::abs(tr_gen / reps - n * p) < 5.0 * se);
}

TEST_CASE("mc_accumulate is worker-count independent to the bit") {
  const RandomStream root{99, 7};
  auto body = [&](std::int64_t rep, Eigen::VectorXd& acc) {
    auto eng = make_engine(split_stream(root, static_cast<std::uint64_t>(rep)));
    const double x = sample_chi2(5.0, eng);
    acc[0] += x;
    acc[1] += x * x;
  };
  const Eigen::VectorXd a = mc_accumulate(20001, 1, 2, body);
  const Eigen::VectorXd b = mc_accumulate(20001, 3, 2, body);
  const Eigen::VectorXd c = mc_accumulate(20001, 8, 2, body);
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
  CHECK(a[0] == c[0]);
  CHECK(a[1] == c[1]);
}

TEST_CASE("samplers are reproducible from the stream handle") {
  const RandomStream s{123, 456};
  const SymMatrix eye(Eigen::MatrixXd::Identity(3, 3));
  const SymMatrix w1 = sample_wishart(7, eye, s);
  const SymMatrix w2 = sample_wishart(7, eye, s);
  CHECK((w1.mat() - w2.mat()).cwiseAbs().maxCoeff() == 0.0);
}
