#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flowcorr/detector.hpp"
#include "flowcorr/distributions.hpp"
#include "flowcorr/random.hpp"
#include "flowcorr/trace.hpp"

namespace flowcorr {

// ---------------------------------------------------------------------------
// Flow sources

struct ParetoSource {
  double alpha = 0.86;
  double x_m = 0.01;
};

/// Replays an order-preserving IPD list from a random (or fixed) start,
/// wrapping around at the end.
struct ReplaySource {
  std::vector<double> ipds;
  std::optional<std::size_t> start;
};

struct FlowSource {
  std::variant<ParetoSource, ReplaySource> kind = ParetoSource{};
  /// Sub-packet rule of the traffic model; the detector merges packets
  /// closer than this before matching.
  double merge_window = 0.01;

  void validate() const;
};

/// Flow of `packets` timestamps starting at 0.
FlowTrace generate_flow(const FlowSource& src, std::size_t packets, Rng& rng);

// ---------------------------------------------------------------------------
// Channels

/// Network delay n_i = mean_delay + z_i with z_i i.i.d.
///
/// `jitter` describes the PDV j_i = n_{i+1} - n_i, so z_i is drawn from the
/// same family at a reduced scale: sigma / 2 for Cauchy (then the PDV is
/// exactly Cauchy(0, sigma)) and sigma / sqrt(2) otherwise (PDV variance
/// matches; exact in law for Normal).
struct IidChannel {
  DistSpec jitter = DistSpec::cauchy(0.0, 0.004);
  double mean_delay = 0.0631;
};

/// Measured delay trace with linear interpolation between samples.
struct TraceChannel {
  DelayTrace delays;
  std::optional<std::size_t> start;
};

using ChannelSpec = std::variant<IidChannel, TraceChannel>;

/// Per-packet delay scale used by the i.i.d. channel for a PDV scale.
double iid_delay_scale(const DistSpec& jitter);

/// Side effects a perturbation reports instead of hiding.
struct SimStats {
  std::size_t reordered = 0;   ///< packets whose position changed after re-sorting
  std::size_t truncated = 0;   ///< negative i.i.d. delays clamped to 0
  std::size_t wrapped = 0;     ///< packets delayed past the end of a delay trace

  SimStats& operator+=(const SimStats& o) {
    reordered += o.reordered;
    truncated += o.truncated;
    wrapped += o.wrapped;
    return *this;
  }
};

struct Simulated {
  FlowTrace trace;
  SimStats stats;
};

/// y_i = x_i + n_i, re-sorted. Throws NegativeDelay when a delay trace
/// yields a negative delay.
Simulated apply_channel(const FlowTrace& flow, const ChannelSpec& channel, Rng& rng);

// ---------------------------------------------------------------------------
// Attacks

struct NoDelay {};
struct UniformDelay {
  double a_max = 0.05;
};
/// Each packet's delay is picked on a 1 ms grid in [0, a_max] to minimize
/// its own factor of the loss-robust ratio, given the delays already chosen
/// for earlier packets (greedy, packet by packet).
struct AdversarialDelay {
  double a_max = 0.05;
  DetectorConfig knowledge;
};

using DelayStrategy = std::variant<NoDelay, UniformDelay, AdversarialDelay>;

struct AttackSpec {
  double chaff_ratio = 0.0;
  int subflows = 1;
  DelayStrategy delay = NoDelay{};

  void validate() const;
  bool empty() const;
  /// Upper bound on per-packet attack delay (0 when none).
  double delay_bound() const;
};

/// Poisson(ratio * packets) chaff arrivals spread uniformly over the flow's span.
FlowTrace add_chaff(const FlowTrace& flow, double ratio, Rng& rng);

/// Keeps each packet independently with probability 1/S.
FlowTrace split_flow(const FlowTrace& flow, int subflows, Rng& rng);

Simulated delay_attack(const FlowTrace& flow, const DelayStrategy& delay, Rng& rng);

/// Delay, then chaff, then split.
Simulated apply_attack_pipeline(const FlowTrace& flow, const AttackSpec& attack, Rng& rng);

/// Named presets: none, attack1, attack2, attack3a, attack3b, attack4a,
/// attack4b, attack5a, attack5b. The "b" variants use `knowledge` as the
/// attacker's copy of the detector configuration.
std::optional<AttackSpec> attack_preset(std::string_view name,
                                        const DetectorConfig& knowledge = {});

/// Preset name, or comma-separated spec: "chaff=5,split=2,delay=uniform:0.05"
/// (delay also accepts "adversarial:<a_max>" and "none").
AttackSpec parse_attack(std::string_view text, const DetectorConfig& knowledge = {});

std::string describe(const AttackSpec& attack);

// ---------------------------------------------------------------------------
// Watermark

struct WatermarkSpec {
  double w_max = 0.002;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Delays each packet by an independent U[0, w_max] drawn from the
/// watermark key. Deterministic given the key.
Simulated embed_watermark(const FlowTrace& flow, const WatermarkSpec& wm);

}  // namespace flowcorr
