#include "flowcorr/distributions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "flowcorr/error.hpp"

namespace flowcorr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

std::string lower_alnum(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

double std_normal_quantile(double u) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Cauchy: return "cauchy";
    case Family::Gumbel: return "gumbel";
    case Family::Laplace: return "laplace";
    case Family::Logistic: return "logistic";
    case Family::Normal: return "normal";
    case Family::Exponential: return "exponential";
    case Family::Pareto: return "pareto";
    case Family::LogNormal: return "lognormal";
    case Family::LogLogistic: return "loglogistic";
    case Family::Weibull: return "weibull";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  const std::string key = lower_alnum(name);
  for (Family f : kAllFamilies) {
    if (key == to_string(f)) return f;
  }
  if (key == "exp") return Family::Exponential;
  if (key == "gaussian") return Family::Normal;
  return std::nullopt;
}

bool is_location_scale(Family f) {
  return f == Family::Cauchy || f == Family::Gumbel || f == Family::Laplace ||
         f == Family::Logistic || f == Family::Normal;
}

DistSpec DistSpec::cauchy(double mu, double sigma) {
  require(std::isfinite(mu) && finite_positive(sigma), "cauchy: need finite mu, sigma > 0");
  return {Family::Cauchy, mu, sigma};
}
DistSpec DistSpec::gumbel(double mu, double sigma) {
  require(std::isfinite(mu) && finite_positive(sigma), "gumbel: need finite mu, sigma > 0");
  return {Family::Gumbel, mu, sigma};
}
DistSpec DistSpec::laplace(double mu, double sigma) {
  require(std::isfinite(mu) && finite_positive(sigma), "laplace: need finite mu, sigma > 0");
  return {Family::Laplace, mu, sigma};
}
DistSpec DistSpec::logistic(double mu, double sigma) {
  require(std::isfinite(mu) && finite_positive(sigma), "logistic: need finite mu, sigma > 0");
  return {Family::Logistic, mu, sigma};
}
DistSpec DistSpec::normal(double mu, double sigma) {
  require(std::isfinite(mu) && finite_positive(sigma), "normal: need finite mu, sigma > 0");
  return {Family::Normal, mu, sigma};
}
DistSpec DistSpec::exponential(double lambda) {
  require(finite_positive(lambda), "exponential: need lambda > 0");
  return {Family::Exponential, lambda, 0.0};
}
DistSpec DistSpec::pareto(double alpha, double x_m) {
  require(finite_positive(alpha) && finite_positive(x_m), "pareto: need alpha > 0, x_m > 0");
  return {Family::Pareto, alpha, x_m};
}
DistSpec DistSpec::lognormal(double mu, double sigma2) {
  require(std::isfinite(mu) && finite_positive(sigma2), "lognormal: need finite mu, sigma2 > 0");
  return {Family::LogNormal, mu, sigma2};
}
DistSpec DistSpec::loglogistic(double alpha, double beta) {
  require(finite_positive(alpha) && finite_positive(beta), "loglogistic: need alpha > 0, beta > 0");
  return {Family::LogLogistic, alpha, beta};
}
DistSpec DistSpec::weibull(double shape, double beta) {
  require(finite_positive(shape) && finite_positive(beta), "weibull: need shape > 0, beta > 0");
  return {Family::Weibull, shape, beta};
}

std::vector<std::string_view> DistSpec::param_names() const {
  switch (family_) {
    case Family::Cauchy:
    case Family::Gumbel:
    case Family::Laplace:
    case Family::Logistic:
    case Family::Normal: return {"mu", "sigma"};
    case Family::Exponential: return {"lambda"};
    case Family::Pareto: return {"alpha", "x_m"};
    case Family::LogNormal: return {"mu", "sigma2"};
    case Family::LogLogistic: return {"alpha", "beta"};
    case Family::Weibull: return {"weibull_shape", "beta"};
  }
  return {};
}

std::vector<std::pair<std::string, double>> DistSpec::params() const {
  std::vector<std::pair<std::string, double>> out;
  const auto names = param_names();
  for (std::size_t i = 0; i < names.size(); ++i) out.emplace_back(std::string(names[i]), p_[i]);
  return out;
}

double DistSpec::param(std::string_view name) const {
  const auto names = param_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return p_[i];
  }
  throw Error(ErrorCode::InvalidArgument,
              std::string(to_string(family_)) + " has no parameter '" + std::string(name) + "'");
}

DistSpec DistSpec::make(Family family,
                        const std::vector<std::pair<std::string, double>>& params) {
  DistSpec probe(family, 1.0, 1.0);
  const auto names = probe.param_names();
  if (params.size() != names.size()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(to_string(family)) + ": wrong number of parameters");
  }
  std::array<double, 2> v{0.0, 0.0};
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto it = std::find_if(params.begin(), params.end(),
                           [&](const auto& kv) { return kv.first == names[i]; });
    if (it == params.end()) {
      throw Error(ErrorCode::InvalidArgument, std::string(to_string(family)) +
                                                  ": missing parameter '" +
                                                  std::string(names[i]) + "'");
    }
    v[i] = it->second;
  }
  switch (family) {
    case Family::Cauchy: return cauchy(v[0], v[1]);
    case Family::Gumbel: return gumbel(v[0], v[1]);
    case Family::Laplace: return laplace(v[0], v[1]);
    case Family::Logistic: return logistic(v[0], v[1]);
    case Family::Normal: return normal(v[0], v[1]);
    case Family::Exponential: return exponential(v[0]);
    case Family::Pareto: return pareto(v[0], v[1]);
    case Family::LogNormal: return lognormal(v[0], v[1]);
    case Family::LogLogistic: return loglogistic(v[0], v[1]);
    case Family::Weibull: return weibull(v[0], v[1]);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown family");
}

DistSpec DistSpec::with_location_scale(double mu, double sigma) const {
  if (!is_location_scale(family_)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(to_string(family_)) + " is not a location-scale family");
  }
  return make(family_, {{"mu", mu}, {"sigma", sigma}});
}

std::pair<double, double> support(const DistSpec& spec) {
  switch (spec.family()) {
    case Family::Exponential:
    case Family::LogNormal:
    case Family::LogLogistic:
    case Family::Weibull: return {0.0, kInf};
    case Family::Pareto: return {spec.p1(), kInf};
    default: return {-kInf, kInf};
  }
}

double pdf(const DistSpec& spec, double x) {
  const double a = spec.p0();
  const double b = spec.p1();
  switch (spec.family()) {
    case Family::Cauchy: {
      const double z = (x - a) / b;
      return 1.0 / (kPi * b * (1.0 + z * z));
    }
    case Family::Gumbel: {
      const double z = (x - a) / b;
      return std::exp(-z - std::exp(-z)) / b;
    }
    case Family::Laplace: return std::exp(-std::abs(x - a) / b) / (2.0 * b);
    case Family::Logistic: {
      const double e = std::exp(-std::abs(x - a) / b);
      return e / (b * (1.0 + e) * (1.0 + e));
    }
    case Family::Normal: {
      const double z = (x - a) / b;
      return std::exp(-0.5 * z * z) / (b * std::sqrt(2.0 * kPi));
    }
    case Family::Exponential: return x < 0.0 ? 0.0 : a * std::exp(-a * x);
    case Family::Pareto: return x < b ? 0.0 : a * std::pow(b, a) / std::pow(x, a + 1.0);
    case Family::LogNormal: {
      if (x <= 0.0) return 0.0;
      const double l = std::log(x) - a;
      return std::exp(-l * l / (2.0 * b)) / (x * std::sqrt(2.0 * kPi * b));
    }
    case Family::LogLogistic: {
      if (x < 0.0) return 0.0;
      const double r = x / a;
      const double rb = std::pow(r, b);
      if (std::isinf(rb)) return std::exp(log_pdf(spec, x));
      return (b / a) * std::pow(r, b - 1.0) / ((1.0 + rb) * (1.0 + rb));
    }
    case Family::Weibull: {
      if (x < 0.0) return 0.0;
      return (a / b) * std::pow(x, a - 1.0) * std::exp(-std::pow(x, a) / b);
    }
  }
  return 0.0;
}

double log_pdf(const DistSpec& spec, double x) {
  const double a = spec.p0();
  const double b = spec.p1();
  switch (spec.family()) {
    case Family::Cauchy: {
      const double z = (x - a) / b;
      return -std::log(kPi * b) - std::log1p(z * z);
    }
    case Family::Gumbel: {
      const double z = (x - a) / b;
      return -std::log(b) - z - std::exp(-z);
    }
    case Family::Laplace: return -std::log(2.0 * b) - std::abs(x - a) / b;
    case Family::Logistic: {
      const double az = std::abs(x - a) / b;
      return -std::log(b) - az - 2.0 * std::log1p(std::exp(-az));
    }
    case Family::Normal: {
      const double z = (x - a) / b;
      return -std::log(b) - 0.5 * std::log(2.0 * kPi) - 0.5 * z * z;
    }
    case Family::Exponential: return x < 0.0 ? -kInf : std::log(a) - a * x;
    case Family::Pareto:
      return x < b ? -kInf : std::log(a) + a * std::log(b) - (a + 1.0) * std::log(x);
    case Family::LogNormal: {
      if (x <= 0.0) return -kInf;
      const double lx = std::log(x);
      const double l = lx - a;
      return -lx - 0.5 * std::log(2.0 * kPi * b) - l * l / (2.0 * b);
    }
    case Family::LogLogistic: {
      if (x < 0.0) return -kInf;
      if (x == 0.0) return std::log(pdf(spec, x));
      const double lr = std::log(x / a);
      // log1p((x/a)^b) without overflow for large arguments
      const double t = b * lr;
      const double log1p_rb = t > 30.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
      return std::log(b / a) + (b - 1.0) * lr - 2.0 * log1p_rb;
    }
    case Family::Weibull: {
      if (x < 0.0) return -kInf;
      if (x == 0.0) return std::log(pdf(spec, x));
      return std::log(a / b) + (a - 1.0) * std::log(x) - std::pow(x, a) / b;
    }
  }
  return -kInf;
}

double cdf(const DistSpec& spec, double x) {
  const double a = spec.p0();
  const double b = spec.p1();
  switch (spec.family()) {
    case Family::Cauchy: return 0.5 + std::atan((x - a) / b) / kPi;
    case Family::Gumbel: return std::exp(-std::exp(-(x - a) / b));
    case Family::Laplace: {
      const double z = (x - a) / b;
      return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
    }
    case Family::Logistic: return 1.0 / (1.0 + std::exp(-(x - a) / b));
    case Family::Normal: return 0.5 * std::erfc(-(x - a) / (b * std::numbers::sqrt2));
    case Family::Exponential: return x <= 0.0 ? 0.0 : -std::expm1(-a * x);
    case Family::Pareto: return x <= b ? 0.0 : 1.0 - std::pow(b / x, a);
    case Family::LogNormal:
      return x <= 0.0 ? 0.0 : 0.5 * std::erfc(-(std::log(x) - a) / std::sqrt(2.0 * b));
    case Family::LogLogistic: return x <= 0.0 ? 0.0 : 1.0 / (1.0 + std::pow(x / a, -b));
    case Family::Weibull: return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x, a) / b);
  }
  return 0.0;
}

double quantile(const DistSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quantile level must be in (0, 1)");
  }
  const double a = spec.p0();
  const double b = spec.p1();
  switch (spec.family()) {
    case Family::Cauchy: return a + b * std::tan(kPi * (u - 0.5));
    case Family::Gumbel: return a - b * std::log(-std::log(u));
    case Family::Laplace:
      return u < 0.5 ? a + b * std::log(2.0 * u) : a - b * std::log(2.0 * (1.0 - u));
    case Family::Logistic: return a + b * std::log(u / (1.0 - u));
    case Family::Normal: return a + b * std_normal_quantile(u);
    case Family::Exponential: return -std::log1p(-u) / a;
    case Family::Pareto: return b * std::exp(-std::log1p(-u) / a);
    case Family::LogNormal: return std::exp(a + std::sqrt(b) * std_normal_quantile(u));
    case Family::LogLogistic: return a * std::pow(u / (1.0 - u), 1.0 / b);
    case Family::Weibull: return std::pow(-b * std::log1p(-u), 1.0 / a);
  }
  return 0.0;
}

double sample(const DistSpec& spec, Rng& rng) { return quantile(spec, rng.uniform()); }

std::vector<double> sample_n(const DistSpec& spec, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (auto& v : out) v = sample(spec, rng);
  return out;
}

}  // namespace flowcorr
