#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flowcorr {

/// Absolute packet timestamps (seconds) seen at one vantage point.
/// Timestamps are non-negative and strictly increasing. Short traces
/// (fewer than two packets) are valid values; operations that need IPDs
/// reject them.
class FlowTrace {
public:
  FlowTrace() = default;
  explicit FlowTrace(std::vector<double> timestamps, std::string label = {});

  /// Sorts, then nudges exact ties upward by one ulp. Returns the number of
  /// positions whose order changed relative to the input.
  static FlowTrace from_unsorted(std::vector<double> timestamps,
                                 std::size_t* reordered = nullptr,
                                 std::string label = {});

  std::span<const double> timestamps() const noexcept { return timestamps_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return timestamps_.size(); }
  bool empty() const noexcept { return timestamps_.empty(); }
  double operator[](std::size_t i) const { return timestamps_[i]; }
  double front() const { return timestamps_.front(); }
  double back() const { return timestamps_.back(); }
  double duration() const {
    return timestamps_.size() < 2 ? 0.0 : timestamps_.back() - timestamps_.front();
  }

  friend bool operator==(const FlowTrace& a, const FlowTrace& b) {
    return a.timestamps_ == b.timestamps_;
  }

private:
  std::vector<double> timestamps_;
  std::string label_;
};

/// Consecutive differences of a FlowTrace; every entry is positive.
class IpdSequence {
public:
  IpdSequence() = default;
  explicit IpdSequence(std::vector<double> ipds);

  std::span<const double> values() const noexcept { return ipds_; }
  std::size_t size() const noexcept { return ipds_.size(); }
  double operator[](std::size_t i) const { return ipds_[i]; }

private:
  std::vector<double> ipds_;
};

/// Network delay sampled on a regular grid.
class DelayTrace {
public:
  DelayTrace(std::vector<double> samples, double sample_period = 0.05);

  std::span<const double> samples() const noexcept { return samples_; }
  double sample_period() const noexcept { return period_; }
  std::size_t size() const noexcept { return samples_.size(); }
  /// Time spanned before wrapping around: size() * sample_period().
  double cycle() const noexcept { return period_ * static_cast<double>(samples_.size()); }

  /// Linear interpolation at time t after sample `start`; the sample list is
  /// treated circularly. Sets *wrapped when t runs past the last sample.
  double delay_at(std::size_t start, double t, bool* wrapped = nullptr) const;

private:
  std::vector<double> samples_;
  double period_;
};

/// Drops every packet that arrives less than merge_window after the last
/// kept packet (the kept packet's timestamp is retained).
FlowTrace merge_packets(const FlowTrace& trace, double merge_window);

/// IPDs after merging sub-packets closer than merge_window.
/// Throws EmptyFlow when fewer than two packets survive.
IpdSequence to_ipds(const FlowTrace& trace, double merge_window = 0.0);

}  // namespace flowcorr
