#include "flowcorr/sync.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "flowcorr/error.hpp"

namespace flowcorr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double score_pairs(const FlowTrace& creator, const FlowTrace& detector,
                   std::vector<MatchedPair> pairs, const DetectorConfig& cfg,
                   std::optional<Error>& last_error) {
  if (pairs.size() < 2) return kNegInf;
  const MatchResult match = make_match_result(creator, detector, std::move(pairs));
  try {
    const std::size_t original = creator.size() - 1;
    const LlrVerdict v = cfg.attack_bound > 0.0 ? attack_llr(match, original, cfg)
                                                : robust_llr(match, original, cfg);
    return v.log_lambda;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidSupport) throw;
    last_error = e;
    return kNegInf;
  }
}

}  // namespace

std::vector<double> SyncGrid::points() const {
  if (!(step > 0.0) || !(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::EmptyGrid, "synchronization grid needs lo <= hi and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> pts(count);
  for (std::size_t k = 0; k < count; ++k) pts[k] = lo + static_cast<double>(k) * step;
  return pts;
}

SyncResult synchronize(const FlowTrace& creator, const FlowTrace& detector,
                       const DetectorConfig& cfg, double gamma, const SyncGrid& grid,
                       const ParallelFor& parallel_for) {
  cfg.validate();
  if (creator.size() < 2) throw Error(ErrorCode::EmptyFlow, "creator trace has fewer than 2 packets");
  const std::vector<double> rhos = grid.points();
  std::vector<double> profile(rhos.size(), kNegInf);
  std::optional<Error> last_error;

  // Mean detector-minus-creator offset of each grid point's pairing; breaks
  // ties between grid points that share the best score.
  std::vector<double> offsets(rhos.size(), 0.0);
  auto mean_offset = [&](const std::vector<MatchedPair>& pairs) {
    double sum = 0.0;
    for (const auto& p : pairs) sum += detector[p.detector] - creator[p.creator];
    return pairs.empty() ? 0.0 : sum / static_cast<double>(pairs.size());
  };

  if (parallel_for) {
    std::vector<std::optional<Error>> errors(rhos.size());
    parallel_for(rhos.size(), [&](std::size_t k) {
      std::vector<MatchedPair> pairs;
      match_pairs(creator, detector, {rhos[k], gamma}, pairs);
      offsets[k] = mean_offset(pairs);
      profile[k] = score_pairs(creator, detector, std::move(pairs), cfg, errors[k]);
    });
    for (auto& e : errors) {
      if (e) last_error = e;
    }
  } else {
    // Neighbouring grid points usually produce the same pairing; reuse the
    // score when they do.
    std::vector<MatchedPair> pairs;
    std::vector<MatchedPair> prev_pairs;
    double prev_score = kNegInf;
    double prev_offset = 0.0;
    bool have_prev = false;
    for (std::size_t k = 0; k < rhos.size(); ++k) {
      match_pairs(creator, detector, {rhos[k], gamma}, pairs);
      if (!have_prev || pairs != prev_pairs) {
        prev_pairs = pairs;
        prev_offset = mean_offset(pairs);
        prev_score = score_pairs(creator, detector, pairs, cfg, last_error);
        have_prev = true;
      }
      profile[k] = prev_score;
      offsets[k] = prev_offset;
    }
  }

  double best = kNegInf;
  for (double s : profile) best = std::max(best, s);
  if (best == kNegInf) {
    if (last_error) throw *last_error;
    throw Error(ErrorCode::LengthMismatch, "no grid point matched at least two packets");
  }

  std::size_t k_star = rhos.size();
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < profile.size(); ++k) {
    if (profile[k] != best) continue;
    const double gap = std::abs(rhos[k] - offsets[k]);
    if (gap < best_gap) {
      best_gap = gap;
      k_star = k;
    }
  }

  SyncResult out;
  out.rho_star = rhos[k_star];
  out.match = match_packets(creator, detector, {out.rho_star, gamma});
  out.verdict = decide(best, cfg.log_eta);
  out.profile = std::move(profile);
  return out;
}

SyncResult correlate_at(const FlowTrace& creator, const FlowTrace& detector,
                        const DetectorConfig& cfg, const MatchConfig& mc) {
  return synchronize(creator, detector, cfg, mc.gamma, SyncGrid{mc.rho, mc.rho, 1.0});
}

}  // namespace flowcorr
