#include "flowcorr/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "flowcorr/divergence.hpp"
#include "flowcorr/error.hpp"

namespace flowcorr {

namespace {

void require_size(std::span<const double> data, std::size_t n) {
  if (data.size() < n) {
    throw Error(ErrorCode::InvalidArgument,
                "need at least " + std::to_string(n) + " data points");
  }
  for (double x : data) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "data must be finite");
  }
}

void require_positive(std::span<const double> data) {
  for (double x : data) {
    if (!(x > 0.0)) throw Error(ErrorCode::NonPositiveData, "data must be strictly positive");
  }
}

// MAD of the standard Gumbel: solve F(m + c) - F(m - c) = 1/2 about the
// median m = -log(log 2).
double gumbel_mad_constant() {
  static const double c = [] {
    const double m = -std::log(std::numbers::ln2);
    auto mass = [m](double c) {
      return std::exp(-std::exp(-(m + c))) - std::exp(-std::exp(-(m - c)));
    };
    double lo = 0.0;
    double hi = 5.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (mass(mid) < 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return c;
}

DistSpec fit_exponential(std::span<const double> data) {
  double sum = 0.0;
  for (double x : data) sum += x;
  const double mean = sum / static_cast<double>(data.size());
  return DistSpec::exponential(1.0 / mean);
}

DistSpec fit_pareto(std::span<const double> data, std::optional<double> fixed_x_m) {
  const double x_min = *std::min_element(data.begin(), data.end());
  double x_m = x_min;
  if (fixed_x_m) {
    x_m = *fixed_x_m;
    if (!(x_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "fixed x_m must be positive");
    if (x_min < x_m) {
      throw Error(ErrorCode::InvalidSupport, "data contain values below the fixed x_m");
    }
  }
  double log_sum = 0.0;
  for (double x : data) log_sum += std::log(x / x_m);
  if (!(log_sum > 0.0)) throw Error(ErrorCode::DegenerateData, "all data equal to x_m");
  return DistSpec::pareto(static_cast<double>(data.size()) / log_sum, x_m);
}

DistSpec fit_lognormal(std::span<const double> data) {
  const double n = static_cast<double>(data.size());
  double mu = 0.0;
  for (double x : data) mu += std::log(x);
  mu /= n;
  double var = 0.0;
  for (double x : data) {
    const double d = std::log(x) - mu;
    var += d * d;
  }
  var /= n;
  if (!(var > 0.0)) throw Error(ErrorCode::DegenerateData, "zero variance of log data");
  return DistSpec::lognormal(mu, var);
}

// Log-logistic MLE through y = log x, which is Logistic(log alpha, 1 / beta);
// the Jacobian term does not depend on the parameters. Damped Newton in
// (mu, log s) with a backtracking line search.
DistSpec fit_loglogistic(std::span<const double> data, const MleOptions& opt) {
  std::vector<double> y(data.size());
  std::transform(data.begin(), data.end(), y.begin(), [](double x) { return std::log(x); });
  const double n = static_cast<double>(y.size());

  const double mad = median_absolute_deviation(y);
  if (!(mad > 0.0)) throw Error(ErrorCode::DegenerateData, "log data have zero MAD");
  double mu = median(y);
  double theta = std::log(mad / std::log(3.0));

  auto loglik = [&](double m, double th) {
    const double s = std::exp(th);
    double l = 0.0;
    for (double v : y) {
      const double az = std::abs((v - m) / s);
      l += -az - 2.0 * std::log1p(std::exp(-az));
    }
    return l / n - th;
  };

  double current = loglik(mu, theta);
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    const double s = std::exp(theta);
    double g_mu = 0.0, g_th = 0.0, h_mm = 0.0, h_mt = 0.0, h_tt = 0.0;
    for (double v : y) {
      const double z = (v - mu) / s;
      const double t = std::tanh(0.5 * z);
      const double h = 0.5 * (1.0 - t * t);
      g_mu += t;
      g_th += z * t;
      h_mm += h;
      h_mt += t + z * h;
      h_tt += z * t + z * z * h;
    }
    g_mu /= n * s;
    g_th = g_th / n - 1.0;
    h_mm = -h_mm / (n * s * s);
    h_mt = -h_mt / (n * s);
    h_tt = -h_tt / n;

    if (std::hypot(g_mu, g_th) < opt.gradient_tolerance) {
      return DistSpec::loglogistic(std::exp(mu), 1.0 / s);
    }

    // Newton direction when the Hessian is negative definite, otherwise
    // plain gradient ascent.
    double d_mu = g_mu;
    double d_th = g_th;
    const double det = h_mm * h_tt - h_mt * h_mt;
    if (h_mm < 0.0 && det > 0.0) {
      d_mu = -(h_tt * g_mu - h_mt * g_th) / det;
      d_th = -(-h_mt * g_mu + h_mm * g_th) / det;
    }
    double step = 1.0;
    bool improved = false;
    for (int k = 0; k < 60; ++k) {
      const double cand = loglik(mu + step * d_mu, theta + step * d_th);
      if (cand >= current) {
        mu += step * d_mu;
        theta += step * d_th;
        current = cand;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  throw Error(ErrorCode::ConvergenceFailure, "log-logistic MLE did not converge");
}

// Weibull MLE. For fixed shape k the MLE of beta is mean(x^k); the profile
// score in k is g(k) = sum z^k log z / sum z^k - 1/k with z = x / geomean(x),
// increasing in k. Newton with bisection fallback inside a bracket.
DistSpec fit_weibull(std::span<const double> data, const MleOptions& opt) {
  const double n = static_cast<double>(data.size());
  double mean_log = 0.0;
  for (double x : data) mean_log += std::log(x);
  mean_log /= n;
  std::vector<double> lz(data.size());
  std::transform(data.begin(), data.end(), lz.begin(),
                 [&](double x) { return std::log(x) - mean_log; });
  const double lz_max = *std::max_element(lz.begin(), lz.end());
  if (!(lz_max > 0.0)) throw Error(ErrorCode::DegenerateData, "all data equal");

  struct Eval {
    double g, dg, log_s0;  // log_s0 = log(sum z^k)
  };
  auto eval = [&](double k) {
    const double shift = k * lz_max;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (double l : lz) {
      const double w = std::exp(k * l - shift);
      s0 += w;
      s1 += w * l;
      s2 += w * l * l;
    }
    const double r1 = s1 / s0;
    return Eval{r1 - 1.0 / k, s2 / s0 - r1 * r1 + 1.0 / (k * k), std::log(s0) + shift};
  };

  double lo = 1e-3, hi = 1.0;
  while (eval(lo).g > 0.0) lo *= 0.5;
  for (int i = 0; eval(hi).g < 0.0; ++i) {
    if (i > 60) throw Error(ErrorCode::ConvergenceFailure, "weibull shape not bracketed");
    lo = hi;
    hi *= 2.0;
  }
  double var_log = 0.0;
  for (double l : lz) var_log += l * l;
  var_log /= n;
  double k = std::clamp(1.2 / std::sqrt(var_log), lo, hi);
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    const Eval e = eval(k);
    if (std::abs(e.g) < opt.gradient_tolerance) {
      const double log_beta = k * mean_log + e.log_s0 - std::log(n);
      return DistSpec::weibull(k, std::exp(log_beta));
    }
    (e.g < 0.0 ? lo : hi) = k;
    double next = k - e.g / e.dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    k = next;
  }
  throw Error(ErrorCode::ConvergenceFailure, "weibull MLE did not converge");
}

}  // namespace

std::string_view to_string(Estimator e) {
  return e == Estimator::Robust ? "robust" : "mle";
}

double median(std::span<const double> data) {
  if (data.empty()) throw Error(ErrorCode::InvalidArgument, "median of empty data");
  std::vector<double> v(data.begin(), data.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + 0.5 * (upper - lower);
}

double median_absolute_deviation(std::span<const double> data) {
  const double m = median(data);
  std::vector<double> dev(data.size());
  std::transform(data.begin(), data.end(), dev.begin(), [m](double x) { return std::abs(x - m); });
  return median(dev);
}

double mad_consistency_constant(Family family) {
  switch (family) {
    case Family::Cauchy: return 1.0;
    case Family::Normal: return 0.6744897501960817;  // Phi^-1(3/4)
    case Family::Laplace: return std::numbers::ln2;
    case Family::Logistic: return std::log(3.0);
    case Family::Gumbel: return gumbel_mad_constant();
    default:
      throw Error(ErrorCode::InvalidArgument,
                  "robust estimation only covers location-scale families, not " +
                      std::string(to_string(family)));
  }
}

DistSpec fit_robust(std::span<const double> data, Family family) {
  require_size(data, 2);
  const double c = mad_consistency_constant(family);
  const double loc = median(data);
  const double mad = median_absolute_deviation(data);
  if (!(mad > 0.0)) throw Error(ErrorCode::DegenerateData, "median absolute deviation is zero");
  const double sigma = mad / c;
  double mu = loc;
  if (family == Family::Gumbel) mu = loc + sigma * std::log(std::numbers::ln2);
  return DistSpec::make(family, {{"mu", mu}, {"sigma", sigma}});
}

DistSpec fit_mle(std::span<const double> data, Family family, const MleOptions& options) {
  require_size(data, 2);
  require_positive(data);
  switch (family) {
    case Family::Exponential: return fit_exponential(data);
    case Family::Pareto: return fit_pareto(data, options.fixed_x_m);
    case Family::LogNormal: return fit_lognormal(data);
    case Family::LogLogistic: return fit_loglogistic(data, options);
    case Family::Weibull: return fit_weibull(data, options);
    default:
      throw Error(ErrorCode::InvalidArgument,
                  "MLE fitting only covers positive-support families, not " +
                      std::string(to_string(family)));
  }
}

DistSpec fit(std::span<const double> data, Family family, Estimator estimator,
             const MleOptions& options) {
  return estimator == Estimator::Robust ? fit_robust(data, family)
                                        : fit_mle(data, family, options);
}

std::optional<Family> GoodnessTable::best() const {
  std::optional<Family> out;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& [family, s] : scores) {
    if (s.jsd_sqrt < best_score) {
      best_score = s.jsd_sqrt;
      out = family;
    }
  }
  return out;
}

double goodness_of_fit(std::span<const double> data, const DistSpec& model) {
  if (data.size() < kMinGoodnessSamples) {
    throw Error(ErrorCode::InvalidArgument, "goodness of fit needs at least " +
                                                std::to_string(kMinGoodnessSamples) + " samples");
  }
  auto edges = equal_mass_edges(data);
  const Histogram observed = histogram_of(data, edges);
  const Histogram expected = histogram_of(model, std::move(edges));
  return jsd_sqrt(observed, expected);
}

GoodnessTable goodness_table(std::span<const double> data, std::span<const Family> families,
                             Estimator estimator, const MleOptions& options) {
  GoodnessTable table;
  if (families.empty()) return table;
  if (data.size() < kMinGoodnessSamples) {
    throw Error(ErrorCode::InvalidArgument, "goodness table needs at least " +
                                                std::to_string(kMinGoodnessSamples) + " samples");
  }
  auto edges = equal_mass_edges(data);
  const Histogram observed = histogram_of(data, edges);
  for (Family f : families) {
    try {
      DistSpec model = fit(data, f, estimator, options);
      const double score = jsd_sqrt(observed, histogram_of(model, edges));
      table.scores.emplace(f, FitScore{model, score});
    } catch (const Error& e) {
      table.failures.emplace(f, std::string(to_string(e.code())) + ": " + e.what());
    }
  }
  return table;
}

}  // namespace flowcorr
