#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "flowcorr/detector.hpp"
#include "flowcorr/matching.hpp"

namespace flowcorr {

/// Grid lo, lo + step, ..., up to hi inclusive.
struct SyncGrid {
  double lo = 0.0;
  double hi = 0.5;
  double step = 0.001;

  /// Throws EmptyGrid unless lo <= hi and step > 0.
  std::vector<double> points() const;
};

/// Runs body(k) for k in [0, count); implementations may run iterations
/// concurrently. Each call is independent.
using ParallelFor = std::function<void(std::size_t count, const std::function<void(std::size_t)>& body)>;

struct SyncResult {
  double rho_star = 0.0;
  LlrVerdict verdict;
  MatchResult match;
  /// log Lambda at every grid point (-inf where no score was computable).
  std::vector<double> profile;
};

/// Exhaustive search of the clock shift rho maximizing the loss-robust
/// score (attack-aware when cfg.attack_bound > 0).
///
/// The score is flat wherever the matching does not change, so the maximum
/// is usually a plateau of grid points. Among maximizing points rho_star
/// is the one closest to the mean offset of its own pairing, the smallest
/// such rho on ties.
///
/// Grid points where fewer than two packets match, or survivors violate the
/// IPD support, score -inf. Throws LengthMismatch when every point does.
SyncResult synchronize(const FlowTrace& creator, const FlowTrace& detector,
                       const DetectorConfig& cfg, double gamma, const SyncGrid& grid,
                       const ParallelFor& parallel_for = {});

/// Scores one fixed rho (the single-point case of synchronize).
SyncResult correlate_at(const FlowTrace& creator, const FlowTrace& detector,
                        const DetectorConfig& cfg, const MatchConfig& mc);

}  // namespace flowcorr
