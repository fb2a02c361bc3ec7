#pragma once

#include <cstddef>
#include <vector>

#include "flowcorr/trace.hpp"

namespace flowcorr {

struct MatchConfig {
  double rho = 0.0;     ///< detector clock shift (seconds)
  double gamma = 0.075; ///< loss threshold (seconds)
};

struct MatchedPair {
  std::size_t creator;
  std::size_t detector;
  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct MatchResult {
  /// Sorted by creator index; detector indices strictly increase too.
  std::vector<MatchedPair> pairs;
  FlowTrace creator_survivors;
  FlowTrace detector_survivors;
  /// Creator packets without a partner: creator.size() - pairs.size().
  std::size_t lost_count = 0;

  /// Survivor IPD count M (0 when fewer than two pairs).
  std::size_t survivor_ipds() const noexcept { return pairs.size() < 2 ? 0 : pairs.size() - 1; }
};

/// Pairs each creator packet x_i with a detector packet y_j such that
/// |x_i - (y_j - rho)| < gamma.
///
/// Candidates are accepted greedily in increasing (distance, i, j) order; a
/// candidate is taken when neither packet is used yet and it does not cross
/// an accepted pair. Without conflicts this is each creator packet's nearest
/// detector packet.
MatchResult match_packets(const FlowTrace& creator, const FlowTrace& detector,
                          const MatchConfig& mc);

/// Same as match_packets but only computes the pairs (written into `out`).
/// Used by the synchronizer's inner loop.
void match_pairs(const FlowTrace& creator, const FlowTrace& detector, const MatchConfig& mc,
                 std::vector<MatchedPair>& out);

/// Builds survivor traces from pairs.
MatchResult make_match_result(const FlowTrace& creator, const FlowTrace& detector,
                              std::vector<MatchedPair> pairs);

}  // namespace flowcorr
