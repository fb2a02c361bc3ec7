#include "flowcorr/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "flowcorr/error.hpp"

namespace flowcorr {

FlowTrace::FlowTrace(std::vector<double> timestamps, std::string label)
    : timestamps_(std::move(timestamps)), label_(std::move(label)) {
  for (std::size_t i = 0; i < timestamps_.size(); ++i) {
    const double t = timestamps_[i];
    if (!std::isfinite(t) || t < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "timestamp " + std::to_string(i) + " is negative or not finite");
    }
    if (i > 0 && !(t > timestamps_[i - 1])) {
      throw Error(ErrorCode::MonotonicityError,
                  "timestamps must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

FlowTrace FlowTrace::from_unsorted(std::vector<double> timestamps,
                                   std::size_t* reordered, std::string label) {
  std::vector<std::size_t> order(timestamps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return timestamps[a] < timestamps[b];
  });
  std::size_t moved = 0;
  std::vector<double> sorted(timestamps.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] != k) ++moved;
    sorted[k] = timestamps[order[k]];
    if (k > 0 && !(sorted[k] > sorted[k - 1])) {
      sorted[k] = std::nextafter(sorted[k - 1], std::numeric_limits<double>::infinity());
    }
  }
  if (reordered) *reordered = moved;
  return FlowTrace(std::move(sorted), std::move(label));
}

IpdSequence::IpdSequence(std::vector<double> ipds) : ipds_(std::move(ipds)) {
  for (double d : ipds_) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::InvalidArgument, "IPDs must be positive and finite");
    }
  }
}

DelayTrace::DelayTrace(std::vector<double> samples, double sample_period)
    : samples_(std::move(samples)), period_(sample_period) {
  if (samples_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "delay trace needs at least 2 samples");
  }
  if (!(period_ > 0.0) || !std::isfinite(period_)) {
    throw Error(ErrorCode::InvalidArgument, "delay sample period must be positive");
  }
}

double DelayTrace::delay_at(std::size_t start, double t, bool* wrapped) const {
  const std::size_t n = samples_.size();
  const double pos = t / period_;
  const double base = std::floor(pos);
  const double frac = pos - base;
  const auto offset = static_cast<std::size_t>(base);
  if (wrapped && start % n + offset + 1 >= n) *wrapped = true;
  const std::size_t i0 = (start + offset) % n;
  const std::size_t i1 = (i0 + 1) % n;
  return samples_[i0] + frac * (samples_[i1] - samples_[i0]);
}

FlowTrace merge_packets(const FlowTrace& trace, double merge_window) {
  if (!(merge_window >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "merge window must be non-negative");
  }
  if (merge_window == 0.0 || trace.empty()) return trace;
  std::vector<double> kept;
  kept.reserve(trace.size());
  for (double t : trace.timestamps()) {
    if (kept.empty() || t - kept.back() >= merge_window) kept.push_back(t);
  }
  return FlowTrace(std::move(kept), trace.label());
}

IpdSequence to_ipds(const FlowTrace& trace, double merge_window) {
  const FlowTrace merged = merge_packets(trace, merge_window);
  if (merged.size() < 2) {
    throw Error(ErrorCode::EmptyFlow, "fewer than two packets survive merging");
  }
  const auto ts = merged.timestamps();
  std::vector<double> ipds(ts.size() - 1);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) ipds[i] = ts[i + 1] - ts[i];
  return IpdSequence(std::move(ipds));
}

}  // namespace flowcorr
