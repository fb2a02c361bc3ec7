#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowcorr/detector.hpp"
#include "flowcorr/error.hpp"
#include "flowcorr/matching.hpp"
#include "flowcorr/simulator.hpp"
#include "flowcorr/sync.hpp"

namespace flowcorr {

enum class DetectorMode {
  Basic,   ///< index-by-index IPD pairing; only meaningful without loss or chaff
  Robust,  ///< matching + loss-robust (or attack-aware) ratio
};

std::string_view to_string(DetectorMode m);

struct ExperimentPlan {
  std::size_t trials = 10000;
  std::size_t flow_length = 20;  ///< creator IPD count L
  FlowSource source;
  ChannelSpec channel = IidChannel{};
  AttackSpec attack;  ///< applied to the linked flow only unless attack_unlinked
  /// Clamps by default; without clamping the detector side merges packets
  /// closer than the source's merge window before matching.
  DetectorConfig detector = [] {
    DetectorConfig d;
    d.clamp_support = true;
    return d;
  }();
  MatchConfig match;                  ///< rho is used only when sync_grid is empty
  std::optional<SyncGrid> sync_grid = SyncGrid{};
  std::optional<WatermarkSpec> watermark;
  DetectorMode mode = DetectorMode::Robust;
  /// Also pass the unlinked flow through the attack pipeline.
  bool attack_unlinked = true;
  std::uint64_t master_seed = 1;
  std::vector<double> pf_targets{0.1, 0.01, 0.001};

  void validate() const;
};

/// Gives the detector the loss and attack knowledge implied by the plan:
/// subflows and attack bound from the attack, p_m = 2 F_J(-gamma).
void align_detector(ExperimentPlan& plan);

/// Scenario-A defaults (Pareto 0.86 / 0.01 source, i.i.d. Cauchy PDV with
/// sigma 4 ms, gamma 75 ms, grid 0:0.5:0.001) for the given length and
/// attack preset, detector aligned.
ExperimentPlan scenario_a(std::size_t flow_length, std::string_view attack = "none",
                          std::size_t trials = 10000, std::uint64_t master_seed = 1);

struct ScorePair {
  double h1_score = 0.0;
  double h0_score = 0.0;
  double rho_h1 = 0.0;
  double rho_h0 = 0.0;
  std::size_t m_h1 = 0;
  std::size_t m_h0 = 0;
  bool h0_failed = false;  ///< excluded from the ROC
};

struct TrialFailure {
  std::size_t trial;
  Hypothesis hypothesis;
  ErrorCode code;
  std::string message;
};

struct ExperimentResult {
  std::vector<ScorePair> scores;  ///< in trial order
  std::vector<TrialFailure> failures;
  SimStats stats;

  std::size_t failures_under(Hypothesis h) const;
};

/// Seed streams per trial t: derive_seed(master_seed, t, salt) with salts
/// 1 creator flow, 2 linked perturbations, 3 unlinked flow, 4 unlinked
/// perturbations, 5 watermark key.
ScorePair run_trial(const ExperimentPlan& plan, std::size_t trial, SimStats* stats = nullptr,
                    std::vector<TrialFailure>* failures = nullptr);

ExperimentResult run_experiment(const ExperimentPlan& plan, const ParallelFor& parallel_for = {});

struct RocPoint {
  double p_f;
  double p_d;
};

struct RocCurve {
  std::vector<RocPoint> points;  ///< from (0, 0) to (1, 1)
  double auc = 0.0;
  double auc_std_err = 0.0;
  std::size_t n_h1 = 0;
  std::size_t n_h0 = 0;
};

/// Rank-statistic AUC (ties count half).
double auc_rank(std::span<const double> h1, std::span<const double> h0);
/// Trapezoid area under the points.
double auc_trapezoid(std::span<const RocPoint> points);
/// Hanley-McNeil standard error.
double auc_std_error(double auc, std::size_t n_h1, std::size_t n_h0);

/// Curve over all distinct thresholds v: (fraction h0 >= v, fraction h1 >= v).
/// Throws DegenerateScores when every score is identical.
RocCurve roc(std::span<const double> h1, std::span<const double> h0);
RocCurve roc(std::span<const ScorePair> scores);

struct PdAtPf {
  double p_f_target = 0.0;
  double p_d = 0.0;
  double p_d_std_err = 0.0;
  double p_f_achieved = 0.0;
  double log_eta = 0.0;
};

/// log_eta is the "higher" (1 - p_f) quantile of the h0 scores; p_d the
/// fraction of h1 scores above it. Throws UnmeasurableTarget when
/// p_f_target < 1 / |h0|.
PdAtPf pd_at_pf(std::span<const double> h1, std::span<const double> h0, double p_f_target);
PdAtPf pd_at_pf(std::span<const ScorePair> scores, double p_f_target);

/// D(J || J + W) with W = U1 - U2, U ~ U[0, w_max], on equal-mass bins of
/// the pooled sample. Jitter must be Cauchy or Laplace.
double detectability(const DistSpec& jitter, const WatermarkSpec& wm, std::size_t samples);

/// Plan file: "key = value" per line, '#' comments. Relative paths resolve
/// against `base_dir`; `default_seed` applies when master_seed is absent.
/// Throws ParseError with the line number.
ExperimentPlan parse_plan(const std::string& text, const std::filesystem::path& base_dir = {},
                          std::optional<std::uint64_t> default_seed = std::nullopt);
ExperimentPlan read_plan(const std::filesystem::path& path,
                         std::optional<std::uint64_t> default_seed = std::nullopt);

}  // namespace flowcorr
