#include "flowcorr/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "flowcorr/error.hpp"
#include "flowcorr/matching.hpp"

namespace flowcorr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) with -inf allowed on either side.
double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

LlrVerdict loss_robust(const MatchResult& match, std::size_t original_length,
                       const DetectorConfig& cfg, bool attack_aware) {
  cfg.validate();
  const std::size_t m = match.survivor_ipds();
  if (m < 1) {
    throw Error(ErrorCode::LengthMismatch, "need at least two matched packets");
  }
  if (m > original_length) {
    throw Error(ErrorCode::LengthMismatch, "more survivors than creator IPDs");
  }
  const double p_l = loss_probability(cfg.loss);
  const double log_pl = p_l > 0.0 ? std::log(p_l) : kNegInf;
  const double log_keep = std::log1p(-p_l);
  const PacketRatio ratio(cfg, attack_aware);

  double total = 0.0;
  const std::size_t lost = original_length - m;
  if (lost > 0) total = log_pl == kNegInf ? kNegInf : static_cast<double>(lost) * log_pl;

  const auto& xs = match.creator_survivors;
  const auto& ys = match.detector_survivors;
  for (std::size_t i = 0; i < m; ++i) {
    const double c = xs[i + 1] - xs[i];
    const double d = ys[i + 1] - ys[i];
    total += log_add_exp(log_pl, log_keep + ratio.log_ratio(c, d));
  }
  return decide(total, cfg.log_eta);
}

}  // namespace

void LossModel::validate() const {
  if (!(p_nl >= 0.0 && p_nl < 1.0) || !(p_m >= 0.0 && p_m < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "loss probabilities must lie in [0, 1)");
  }
  if (subflows < 1) throw Error(ErrorCode::InvalidArgument, "subflows must be >= 1");
}

double loss_probability(const LossModel& loss) {
  loss.validate();
  const double s = static_cast<double>(loss.subflows);
  return (s - 1.0 + loss.p_nl + loss.p_m - loss.p_nl * loss.p_m) / s;
}

double default_miss_probability(const DistSpec& jitter, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  return 2.0 * cdf(jitter, -gamma);
}

void DetectorConfig::validate() const {
  if (jitter.family() != Family::Cauchy && jitter.family() != Family::Laplace) {
    throw Error(ErrorCode::UnsupportedJitterFamily,
                "detector jitter must be cauchy or laplace, got " +
                    std::string(to_string(jitter.family())));
  }
  if (jitter.p0() != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "detector jitter must be centred at 0");
  }
  if (ipd_model.family() != Family::Pareto) {
    throw Error(ErrorCode::InvalidArgument, "detector IPD model must be pareto");
  }
  if (std::isnan(log_eta)) throw Error(ErrorCode::InvalidArgument, "log_eta is NaN");
  if (!(attack_bound >= 0.0) || !std::isfinite(attack_bound)) {
    throw Error(ErrorCode::InvalidArgument, "attack bound must be finite and >= 0");
  }
  loss.validate();
}

std::string_view to_string(Hypothesis h) { return h == Hypothesis::H1 ? "H1" : "H0"; }

LlrVerdict decide(double log_lambda, double log_eta) {
  return {log_lambda, log_eta, log_lambda > log_eta ? Hypothesis::H1 : Hypothesis::H0};
}

double uniform_cauchy_density(double j, double sigma, double a_max) {
  // atan(u) - atan(v) = atan2(u - v, 1 + u v), scaled by sigma^2; avoids the
  // cancellation of the two arctangents when a_max is small.
  const double angle = std::atan2(2.0 * a_max * sigma, sigma * sigma + j * j - a_max * a_max);
  return angle / (2.0 * a_max * std::numbers::pi);
}

PacketRatio::PacketRatio(const DetectorConfig& cfg, bool attack_aware)
    : jitter_family_(cfg.jitter.family()),
      sigma_(cfg.jitter.p1()),
      alpha_plus_one_(cfg.ipd_model.p0() + 1.0),
      x_m_(cfg.ipd_model.p1()),
      a_max_(cfg.attack_bound),
      attack_aware_(attack_aware),
      clamp_(cfg.clamp_support) {
  const double alpha = cfg.ipd_model.p0();
  log_norm_ = -std::log(alpha) - alpha * std::log(x_m_);
  if (attack_aware_) {
    if (jitter_family_ != Family::Cauchy) {
      throw Error(ErrorCode::UnsupportedJitterFamily,
                  "attack-aware detection is only defined for cauchy jitter");
    }
    if (!(a_max_ > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "attack-aware detection needs attack_bound > 0");
    }
  } else if (jitter_family_ == Family::Cauchy) {
    log_norm_ -= std::log(std::numbers::pi * sigma_);
  } else {
    log_norm_ -= std::log(2.0 * sigma_);
  }
}

double PacketRatio::log_ratio(double c, double d) const {
  if (!(d >= x_m_) && !clamp_) {
    throw Error(ErrorCode::InvalidSupport, "detector IPD below x_m has zero H0 density");
  }
  const double j = d - c;
  double log_jitter;
  if (attack_aware_) {
    log_jitter = std::log(uniform_cauchy_density(j, sigma_, a_max_));
  } else if (jitter_family_ == Family::Cauchy) {
    const double z = j / sigma_;
    log_jitter = -std::log1p(z * z);
  } else {
    log_jitter = -std::abs(j) / sigma_;
  }
  return log_norm_ + alpha_plus_one_ * std::log(std::max(d, x_m_)) + log_jitter;
}

LlrVerdict basic_llr(const IpdSequence& creator, const IpdSequence& detector,
                     const DetectorConfig& cfg) {
  cfg.validate();
  if (creator.size() != detector.size() || creator.size() == 0) {
    throw Error(ErrorCode::LengthMismatch, "creator and detector IPD counts differ or are zero");
  }
  const PacketRatio ratio(cfg, false);
  double total = 0.0;
  for (std::size_t i = 0; i < creator.size(); ++i) total += ratio.log_ratio(creator[i], detector[i]);
  return decide(total, cfg.log_eta);
}

LlrVerdict robust_llr(const MatchResult& match, std::size_t original_length,
                      const DetectorConfig& cfg) {
  return loss_robust(match, original_length, cfg, false);
}

LlrVerdict attack_llr(const MatchResult& match, std::size_t original_length,
                      const DetectorConfig& cfg) {
  return loss_robust(match, original_length, cfg, true);
}

}  // namespace flowcorr
