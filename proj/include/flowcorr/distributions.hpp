#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flowcorr/random.hpp"

namespace flowcorr {

enum class Family {
  Cauchy,
  Gumbel,
  Laplace,
  Logistic,
  Normal,
  Exponential,
  Pareto,
  LogNormal,
  LogLogistic,
  Weibull,
};

inline constexpr std::array<Family, 10> kAllFamilies = {
    Family::Cauchy,      Family::Gumbel,    Family::Laplace, Family::Logistic,
    Family::Normal,      Family::Exponential, Family::Pareto, Family::LogNormal,
    Family::LogLogistic, Family::Weibull};

/// Families with support on the whole real line (PDV candidates).
inline constexpr std::array<Family, 5> kPdvFamilies = {
    Family::Cauchy, Family::Gumbel, Family::Laplace, Family::Logistic, Family::Normal};

/// Positive-support families (IPD candidates).
inline constexpr std::array<Family, 5> kIpdFamilies = {
    Family::Exponential, Family::Pareto, Family::LogNormal, Family::LogLogistic,
    Family::Weibull};

std::string_view to_string(Family f);
/// Case-insensitive; accepts "lognormal", "log-normal", "loglogistic", ...
std::optional<Family> parse_family(std::string_view name);

/// A distribution family with its parameters.
///
/// Parameter names and meaning per family:
///   Cauchy, Gumbel, Laplace, Logistic, Normal: mu, sigma
///   Exponential: lambda (rate)
///   Pareto: alpha (tail index), x_m (lower bound of the support)
///   LogNormal: mu, sigma2 (mean and variance of log x)
///   LogLogistic: alpha (scale), beta (shape)
///   Weibull: weibull_shape, beta; density (k/beta) x^(k-1) exp(-x^k / beta)
///
/// Construct through the named factories, which validate.
class DistSpec {
public:
  static DistSpec cauchy(double mu, double sigma);
  static DistSpec gumbel(double mu, double sigma);
  static DistSpec laplace(double mu, double sigma);
  static DistSpec logistic(double mu, double sigma);
  static DistSpec normal(double mu, double sigma);
  static DistSpec exponential(double lambda);
  static DistSpec pareto(double alpha, double x_m);
  static DistSpec lognormal(double mu, double sigma2);
  static DistSpec loglogistic(double alpha, double beta);
  static DistSpec weibull(double shape, double beta);

  /// Generic constructor from (name, value) pairs; names must match the
  /// family's parameter list exactly.
  static DistSpec make(Family family,
                       const std::vector<std::pair<std::string, double>>& params);

  Family family() const noexcept { return family_; }
  /// Parameter names in canonical order.
  std::vector<std::string_view> param_names() const;
  std::vector<std::pair<std::string, double>> params() const;
  /// Throws InvalidArgument for a name the family does not have.
  double param(std::string_view name) const;

  /// Raw slots in canonical order (second slot unused for Exponential).
  double p0() const noexcept { return p_[0]; }
  double p1() const noexcept { return p_[1]; }

  /// Location-scale families only: same family with new location/scale.
  DistSpec with_location_scale(double mu, double sigma) const;

  friend bool operator==(const DistSpec&, const DistSpec&) = default;

private:
  DistSpec(Family f, double a, double b) : family_(f), p_{a, b} {}
  Family family_;
  std::array<double, 2> p_;
};

bool is_location_scale(Family f);

/// Density. Zero outside the support.
double pdf(const DistSpec& spec, double x);
/// log pdf; -infinity outside the support.
double log_pdf(const DistSpec& spec, double x);
double cdf(const DistSpec& spec, double x);
/// Inverse CDF for u in (0, 1).
double quantile(const DistSpec& spec, double u);
double sample(const DistSpec& spec, Rng& rng);
std::vector<double> sample_n(const DistSpec& spec, std::size_t n, Rng& rng);

/// Support interval [lo, hi] (infinite ends allowed).
std::pair<double, double> support(const DistSpec& spec);

}  // namespace flowcorr
