#include "flowcorr/matching.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "flowcorr/error.hpp"

namespace flowcorr {

namespace {

struct Candidate {
  double distance;
  std::size_t creator;
  std::size_t detector;
  bool left;
};

bool later(const Candidate& a, const Candidate& b) {
  return std::tie(a.distance, a.creator, a.detector) > std::tie(b.distance, b.creator, b.detector);
}

}  // namespace

void match_pairs(const FlowTrace& creator, const FlowTrace& detector, const MatchConfig& mc,
                 std::vector<MatchedPair>& out) {
  if (!(mc.gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  out.clear();
  const auto xs = creator.timestamps();
  const auto ys = detector.timestamps();
  if (xs.empty() || ys.empty()) return;

  auto dist = [&](std::size_t i, std::size_t j) { return std::abs(xs[i] - (ys[j] - mc.rho)); };

  // Candidates are accepted greedily in ascending (distance, creator,
  // detector) order. Each creator's candidates already come in distance
  // order when walking outward from x_i + rho, so a heap over those walks
  // replaces a full sort. Rejections are final, which lets a creator's walk
  // simply advance. Called once per grid point; the scratch space is kept.
  thread_local std::vector<Candidate> heap;
  thread_local std::vector<std::size_t> partner;
  thread_local std::vector<std::size_t> left_next;
  thread_local std::vector<std::size_t> right_next;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  heap.clear();
  partner.assign(xs.size(), kNone);
  left_next.assign(xs.size(), kNone);
  right_next.assign(xs.size(), kNone);

  auto push = [&](std::size_t i, std::size_t j, bool left) {
    heap.push_back({dist(i, j), i, j, left});
    std::push_heap(heap.begin(), heap.end(), later);
  };
  // Next feasible detector packet on one side of creator i, or kNone.
  auto advance_left = [&](std::size_t i) {
    const std::size_t j = left_next[i];
    if (j == kNone) return;
    left_next[i] = j == 0 ? kNone : j - 1;
    if (dist(i, j) < mc.gamma) {
      push(i, j, true);
    } else {
      left_next[i] = kNone;
    }
  };
  auto advance_right = [&](std::size_t i) {
    const std::size_t j = right_next[i];
    if (j == kNone) return;
    right_next[i] = j + 1 < ys.size() ? j + 1 : kNone;
    if (dist(i, j) < mc.gamma) {
      push(i, j, false);
    } else {
      right_next[i] = kNone;
    }
  };

  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto split =
        static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), xs[i] + mc.rho) - ys.begin());
    if (split > 0) left_next[i] = split - 1;
    if (split < ys.size()) right_next[i] = split;
    advance_left(i);
    advance_right(i);
  }

  std::size_t accepted = 0;
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), later);
    const Candidate c = heap.back();
    heap.pop_back();
    if (partner[c.creator] != kNone) continue;
    // A used detector packet belongs to the nearest accepted creator on one
    // side, so the strict neighbour checks also reject it.
    bool ok = true;
    for (std::size_t k = c.creator; ok && k-- > 0;) {
      if (partner[k] != kNone) {
        ok = partner[k] < c.detector;
        break;
      }
    }
    for (std::size_t k = c.creator + 1; ok && k < xs.size(); ++k) {
      if (partner[k] != kNone) {
        ok = partner[k] > c.detector;
        break;
      }
    }
    if (ok) {
      partner[c.creator] = c.detector;
      if (++accepted == xs.size()) break;
    } else if (c.left) {
      advance_left(c.creator);
    } else {
      advance_right(c.creator);
    }
  }
  out.reserve(accepted);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (partner[i] != kNone) out.push_back({i, partner[i]});
  }
}

MatchResult make_match_result(const FlowTrace& creator, const FlowTrace& detector,
                              std::vector<MatchedPair> pairs) {
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(pairs.size());
  ys.reserve(pairs.size());
  for (const auto& p : pairs) {
    xs.push_back(creator[p.creator]);
    ys.push_back(detector[p.detector]);
  }
  MatchResult r;
  r.lost_count = creator.size() - pairs.size();
  r.pairs = std::move(pairs);
  r.creator_survivors = FlowTrace(std::move(xs), creator.label());
  r.detector_survivors = FlowTrace(std::move(ys), detector.label());
  return r;
}

MatchResult match_packets(const FlowTrace& creator, const FlowTrace& detector,
                          const MatchConfig& mc) {
  std::vector<MatchedPair> pairs;
  match_pairs(creator, detector, mc, pairs);
  return make_match_result(creator, detector, std::move(pairs));
}

}  // namespace flowcorr
