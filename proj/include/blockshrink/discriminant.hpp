#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "estimators.hpp"
#include "matrix.hpp"
#include "moments.hpp"
#include "risk.hpp"

namespace blockshrink {

struct LabeledDataset {
  struct Group {
    std::string label;
    std::vector<Eigen::VectorXd> samples;
  };
  std::vector<Group> groups;  // in order of first appearance
  int dim = 0;
  std::string source;
};

// Comma-separated file with a header row; groups keep file row order because
// cross-validation fold definitions depend on it.
inline LabeledDataset load_csv(const std::string& path,
                               const std::string& label_column,
                               const std::vector<std::string>& feature_columns) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path, 0, 0);

  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file: " + path, 0, 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line);

  auto col_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<long>(i);
    throw ParseError("column not found: " + name, 1, 0);
  };
  const long label_idx = col_index(label_column);
  std::vector<long> feat_idx;
  for (const auto& f : feature_columns) feat_idx.push_back(col_index(f));

  LabeledDataset ds;
  ds.dim = static_cast<int>(feat_idx.size());
  ds.source = path;
  std::map<std::string, std::size_t> group_of;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (static_cast<long>(cells.size()) <= label_idx)
      throw ParseError("missing label cell", row, label_idx + 1);
    Eigen::VectorXd x(ds.dim);
    for (int j = 0; j < ds.dim; ++j) {
      if (static_cast<long>(cells.size()) <= feat_idx[j])
        throw ParseError("missing feature cell", row, feat_idx[j] + 1);
      try {
        std::size_t pos = 0;
        x[j] = std::stod(cells[feat_idx[j]], &pos);
        if (pos != cells[feat_idx[j]].size())
          throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ParseError("cannot parse number '" + cells[feat_idx[j]] + "'", row,
                         feat_idx[j] + 1);
      }
    }
    const std::string& label = cells[label_idx];
    auto it = group_of.find(label);
    if (it == group_of.end()) {
      group_of.emplace(label, ds.groups.size());
      ds.groups.push_back({label, {}});
      it = group_of.find(label);
    }
    ds.groups[it->second].samples.push_back(std::move(x));
  }
  if (ds.groups.empty()) throw ParseError("no data rows in " + path, row, 0);
  return ds;
}

enum class DofConvention { NMinus1, N };

struct GroupModel {
  std::string label;
  Eigen::VectorXd mean;
  SymMatrix sigma_hat;
  EstimatorKind estimator = EstimatorKind::U;
  int n_learn = 0;
};

namespace detail {

// Moment tables for the MA rules are cached per (p, m, n); the Monte Carlo
// fallback (needed when parity rules out the closed form, e.g. very small
// folds) uses a fixed internal stream so classification stays deterministic.
inline const MomentTable& cached_moment_table(int p, int m, int n) {
  static std::map<std::tuple<int, int, int>, MomentTable> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_tuple(p, m, n);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const RandomStream stream{0xB10C5EEDULL, 0};
    it = cache.emplace(key, moment_table(p, m, n, stream, 1000000)).first;
  }
  return it->second;
}

}  // namespace detail

inline CoefficientVector make_coefficients(EstimatorKind kind, int p, int m, int n) {
  switch (kind) {
    case EstimatorKind::U: return coeffs_u(p, n);
    case EstimatorKind::SDS: return coeffs_sds(p, n);
    case EstimatorKind::KG: return coeffs_kg(p, n);
    case EstimatorKind::MA1:
      return coeffs_ma1(p, m, n, detail::cached_moment_table(p, m, n));
    case EstimatorKind::MA2:
      return coeffs_ma2(p, m, n, detail::cached_moment_table(p, m, n));
    default:
      throw DomainError("custom coefficient vectors need explicit values");
  }
}

inline GroupModel fit_group(const std::vector<Eigen::VectorXd>& samples,
                            const std::string& label, EstimatorKind kind, int m,
                            DofConvention dof = DofConvention::NMinus1) {
  const int N = static_cast<int>(samples.size());
  if (N < 2) throw DomainError("fit_group requires at least 2 samples");
  const int p = static_cast<int>(samples.front().size());
  const int n = dof == DofConvention::NMinus1 ? N - 1 : N;
  if (n < p)
    throw InsufficientDof("fold too small: scatter dof " + std::to_string(n) +
                          " < dimension " + std::to_string(p));

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  for (const auto& x : samples) {
    if (x.size() != p) throw InconsistentDim("sample dimension mismatch");
    mean += x;
  }
  mean /= N;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  for (const auto& x : samples) {
    const Eigen::VectorXd d = x - mean;
    A += d * d.transpose();
  }

  const CoefficientVector c = make_coefficients(kind, p, m, n);
  try {
    GroupModel model{label, mean, apply_estimator(SymMatrix(A), c), kind, N};
    return model;
  } catch (const NotPositiveDefinite&) {
    throw SingularScatter("scatter matrix of group '" + label +
                          "' is singular (N = " + std::to_string(N) + ")");
  }
}

// Index of the model with the smallest Mahalanobis distance
// (x - mean)' SigmaHat^{-1} (x - mean); ties go to the lowest group index.
inline int classify(const Eigen::VectorXd& x,
                    const std::vector<GroupModel>& models) {
  if (models.empty()) throw DomainError("classify requires at least one model");
  int best = 0;
  double best_md = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const GroupModel& g = models[i];
    if (g.mean.size() != x.size()) throw InconsistentDim("dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(g.sigma_hat.mat());
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite("model covariance is not positive definite");
    const Eigen::VectorXd d = x - g.mean;
    const double md = d.dot(llt.solve(d));
    if (md < best_md) {
      best_md = md;
      best = static_cast<int>(i);
    }
  }
  return best;
}

enum class CvScheme { LeaveOneOut, KSampleSet };

struct CvReport {
  CvScheme scheme = CvScheme::LeaveOneOut;
  int k = 0;  // samples per group per learning fold (KSampleSet)
  std::vector<double> fold_ccp;  // percentage per fold
  double average = 0.0;          // mean of fold percentages
  long trials = 0;
  long correct = 0;
  // (group index, sample index within group) of misclassified test points.
  std::vector<std::pair<int, int>> misclassified;
};

inline CvReport cross_validate(const LabeledDataset& ds, CvScheme scheme, int k,
                               EstimatorKind kind, int m,
                               DofConvention dof = DofConvention::NMinus1) {
  const int ng = static_cast<int>(ds.groups.size());
  CvReport rep;
  rep.scheme = scheme;
  rep.k = k;

  if (scheme == CvScheme::LeaveOneOut) {
    long correct = 0, trials = 0;
    for (int g = 0; g < ng; ++g) {
      for (std::size_t j = 0; j < ds.groups[g].samples.size(); ++j) {
        std::vector<GroupModel> models;
        models.reserve(ng);
        for (int h = 0; h < ng; ++h) {
          if (h == g) {
            std::vector<Eigen::VectorXd> rest;
            rest.reserve(ds.groups[h].samples.size() - 1);
            for (std::size_t t = 0; t < ds.groups[h].samples.size(); ++t)
              if (t != j) rest.push_back(ds.groups[h].samples[t]);
            models.push_back(fit_group(rest, ds.groups[h].label, kind, m, dof));
          } else {
            models.push_back(
                fit_group(ds.groups[h].samples, ds.groups[h].label, kind, m, dof));
          }
        }
        const int pred = classify(ds.groups[g].samples[j], models);
        ++trials;
        if (pred == g)
          ++correct;
        else
          rep.misclassified.emplace_back(g, static_cast<int>(j));
      }
    }
    rep.trials = trials;
    rep.correct = correct;
    rep.fold_ccp = {100.0 * correct / trials};
    rep.average = rep.fold_ccp[0];
    return rep;
  }

  // KSampleSet: consecutive blocks of k samples per group form the learning
  // set; everything else is tested.  Folds advance until every sample has
  // been in a learning set exactly once.
  if (k < 2) throw DomainError("KSampleSet requires k >= 2");
  const std::size_t gsize = ds.groups.front().samples.size();
  for (const auto& g : ds.groups)
    if (g.samples.size() != gsize)
      throw DomainError("KSampleSet requires equal group sizes");
  if (gsize % k != 0)
    throw DomainError("group size must be divisible by k");
  const int folds = static_cast<int>(gsize) / k;

  long total_correct = 0, total_trials = 0;
  for (int f = 0; f < folds; ++f) {
    std::vector<GroupModel> models;
    models.reserve(ng);
    for (int h = 0; h < ng; ++h) {
      std::vector<Eigen::VectorXd> learn(
          ds.groups[h].samples.begin() + static_cast<long>(f) * k,
          ds.groups[h].samples.begin() + static_cast<long>(f + 1) * k);
      models.push_back(fit_group(learn, ds.groups[h].label, kind, m, dof));
    }
    long correct = 0, trials = 0;
    for (int g = 0; g < ng; ++g)
      for (std::size_t j = 0; j < gsize; ++j) {
        if (static_cast<long>(j) >= static_cast<long>(f) * k &&
            static_cast<long>(j) < static_cast<long>(f + 1) * k)
          continue;  // learning sample
        const int pred = classify(ds.groups[g].samples[j], models);
        ++trials;
        if (pred == g)
          ++correct;
        else
          rep.misclassified.emplace_back(g, static_cast<int>(j));
      }
    rep.fold_ccp.push_back(100.0 * correct / trials);
    total_correct += correct;
    total_trials += trials;
  }
  rep.trials = total_trials;
  rep.correct = total_correct;
  double sum = 0.0;
  for (double v : rep.fold_ccp) sum += v;
  rep.average = sum / rep.fold_ccp.size();
  return rep;
}

}  // namespace blockshrink
