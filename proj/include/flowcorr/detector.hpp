#pragma once

#include <cstddef>
#include <string_view>

#include "flowcorr/distributions.hpp"
#include "flowcorr/trace.hpp"

namespace flowcorr {

struct MatchResult;

/// Sources of unmatched creator packets.
struct LossModel {
  double p_nl = 0.0;  ///< network loss
  double p_m = 0.0;   ///< true partner farther than the loss threshold
  int subflows = 1;   ///< flow split into this many Bernoulli-thinned subflows

  void validate() const;
};

/// Probability that a creator packet has no partner at the detector:
/// (S - 1 + p_nl + p_m - p_nl * p_m) / S, evaluated exactly.
double loss_probability(const LossModel& loss);

/// 2 * F_J(-gamma): chance that a linked packet lands outside the loss
/// threshold under a symmetric jitter model.
double default_miss_probability(const DistSpec& jitter, double gamma);

struct DetectorConfig {
  DistSpec jitter = DistSpec::cauchy(0.0, 0.004);
  DistSpec ipd_model = DistSpec::pareto(0.86, 0.01);
  double log_eta = 0.0;
  LossModel loss;
  /// Largest per-packet delay an attacker may add (seconds); 0 means none.
  double attack_bound = 0.0;
  /// Evaluate the IPD density at max(d, x_m) instead of rejecting d < x_m.
  /// The jitter term still uses the observed d.
  bool clamp_support = false;

  /// Jitter must be Cauchy or Laplace centred at 0; the IPD model Pareto.
  void validate() const;
};

enum class Hypothesis { H0, H1 };

std::string_view to_string(Hypothesis h);

struct LlrVerdict {
  double log_lambda = 0.0;
  double log_eta = 0.0;
  Hypothesis decision = Hypothesis::H0;
};

/// Applies the threshold: H1 iff log_lambda > log_eta.
LlrVerdict decide(double log_lambda, double log_eta);

/// Density of Cauchy(0, sigma) jitter plus an unknown attack delay difference
/// taken as Uniform(-a_max, a_max):
/// [atan((j + a_max)/sigma) - atan((j - a_max)/sigma)] / (2 a_max pi).
double uniform_cauchy_density(double j, double sigma, double a_max);

/// Per-packet log likelihood ratio log f_J(d - c) - log f_D(d).
/// With attack_bound > 0 (Cauchy only) f_J is replaced by the uniform-
/// smeared density above.
class PacketRatio {
public:
  PacketRatio(const DetectorConfig& cfg, bool attack_aware);

  /// Throws InvalidSupport when d < x_m unless clamping.
  double log_ratio(double c, double d) const;

private:
  Family jitter_family_;
  double sigma_;
  double alpha_plus_one_;
  double x_m_;
  double log_norm_;  ///< -log(alpha x_m^alpha) plus the jitter normalizer
  double a_max_;
  bool attack_aware_;
  bool clamp_;
};

/// Likelihood ratio without packet matching: creator and detector IPDs are
/// paired index by index.
LlrVerdict basic_llr(const IpdSequence& creator, const IpdSequence& detector,
                     const DetectorConfig& cfg);

/// Loss-robust ratio over matched survivors:
/// log Lambda = (L - M) log P_L + sum_i log(P_L + (1 - P_L) r_i),
/// where L is the creator's IPD count and M the survivor IPD count.
LlrVerdict robust_llr(const MatchResult& match, std::size_t original_length,
                      const DetectorConfig& cfg);

/// robust_llr with the attack-aware jitter density. Requires Cauchy jitter
/// and attack_bound > 0.
LlrVerdict attack_llr(const MatchResult& match, std::size_t original_length,
                      const DetectorConfig& cfg);

}  // namespace flowcorr
