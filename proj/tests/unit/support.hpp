#pragma once

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "flowcorr/error.hpp"

#define CHECK_ERROR_CODE(expr, expected)                    \
  do {                                                      \
    bool thrown_ = false;                                   \
    try {                                                   \
      (void)(expr);                                         \
    } catch (const flowcorr::Error& e_) {                   \
      thrown_ = true;                                       \
      CHECK(e_.code() == (expected));                       \
    }                                                       \
    CHECK_MESSAGE(thrown_, "expected an error from " #expr); \
  } while (false)

namespace testing {

inline double integrate(const std::function<double(double)>& f, double lo, double hi) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-12, &err);
}

/// Two-sided Kolmogorov-Smirnov statistic of `data` against `cdf`.
inline double ks_statistic(std::vector<double> data, const std::function<double(double)>& cdf) {
  std::sort(data.begin(), data.end());
  const double n = static_cast<double>(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = cdf(data[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Asymptotic KS critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

/// Relative error |a - b| / |b|.
inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testing
