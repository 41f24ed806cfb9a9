#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>

#include "errors.hpp"

namespace blockshrink {

// E[log chi2_k] = psi(k/2) + log 2.
inline double elog_chi2(double k) {
  if (!(k >= 1)) throw DomainError("elog_chi2 requires k >= 1");
  return boost::math::digamma(k / 2.0) + std::log(2.0);
}

inline double chi2_quantile(double k, double q) {
  if (!(k > 0)) throw DomainError("chi2_quantile requires k > 0");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile requires 0 < q < 1");
  boost::math::chi_squared_distribution<double> dist(k);
  return boost::math::quantile(dist, q);
}

inline double chi2_cdf(double k, double x) {
  if (!(k > 0)) throw DomainError("chi2_cdf requires k > 0");
  boost::math::chi_squared_distribution<double> dist(k);
  return boost::math::cdf(dist, x);
}

inline double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile requires 0 < q < 1");
  boost::math::normal_distribution<double> dist(0.0, 1.0);
  return boost::math::quantile(dist, q);
}

inline double normal_cdf(double x) {
  boost::math::normal_distribution<double> dist(0.0, 1.0);
  return boost::math::cdf(dist, x);
}

}  // namespace blockshrink
