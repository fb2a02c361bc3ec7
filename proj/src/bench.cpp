#include "flowcorr/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "flowcorr/divergence.hpp"
#include "flowcorr/io.hpp"

namespace flowcorr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum Salt : std::uint64_t {
  kCreatorFlow = 1,
  kLinkedPerturb = 2,
  kUnlinkedFlow = 3,
  kUnlinkedPerturb = 4,
  kWatermarkKey = 5,
};

struct Scored {
  double score;
  double rho;
  std::size_t m;
};

Scored score_flow(const ExperimentPlan& plan, const FlowTrace& reference, const FlowTrace& observed) {
  const FlowTrace merged = plan.detector.clamp_support
      ? observed
      : merge_packets(observed, plan.source.merge_window);
  if (plan.mode == DetectorMode::Basic) {
    const IpdSequence c = to_ipds(reference);
    const IpdSequence d = to_ipds(merged);
    if (c.size() != d.size()) {
      throw Error(ErrorCode::LengthMismatch, "basic detector needs equal IPD counts");
    }
    return {basic_llr(c, d, plan.detector).log_lambda, 0.0, c.size()};
  }
  const SyncResult s = plan.sync_grid
      ? synchronize(reference, merged, plan.detector, plan.match.gamma, *plan.sync_grid)
      : correlate_at(reference, merged, plan.detector, plan.match);
  return {s.verdict.log_lambda, s.rho_star, s.match.survivor_ipds()};
}

FlowTrace perturb(const ExperimentPlan& plan, const FlowTrace& flow, bool attacked_flow, Rng& rng,
                  SimStats& stats) {
  Simulated attacked{flow, {}};
  if (attacked_flow) attacked = apply_attack_pipeline(flow, plan.attack, rng);
  stats += attacked.stats;
  Simulated received = apply_channel(attacked.trace, plan.channel, rng);
  stats += received.stats;
  return std::move(received.trace);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::string_view to_string(DetectorMode m) {
  return m == DetectorMode::Basic ? "basic" : "robust";
}

void ExperimentPlan::validate() const {
  if (trials < 100) throw Error(ErrorCode::InvalidArgument, "trials must be at least 100");
  if (flow_length < 1) throw Error(ErrorCode::InvalidArgument, "flow_length must be at least 1");
  source.validate();
  attack.validate();
  detector.validate();
  if (!(match.gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  if (sync_grid) (void)sync_grid->points();
  if (watermark) watermark->validate();
  for (double p : pf_targets) {
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "pf targets must lie in (0, 1]");
  }
}

void align_detector(ExperimentPlan& plan) {
  plan.detector.loss.subflows = plan.attack.subflows;
  plan.detector.loss.p_m = default_miss_probability(plan.detector.jitter, plan.match.gamma);
  plan.detector.attack_bound = plan.attack.delay_bound();
}

ExperimentPlan scenario_a(std::size_t flow_length, std::string_view attack, std::size_t trials,
                          std::uint64_t master_seed) {
  ExperimentPlan plan;
  plan.flow_length = flow_length;
  plan.trials = trials;
  plan.master_seed = master_seed;
  auto preset = attack_preset(attack, plan.detector);
  if (!preset) throw Error(ErrorCode::InvalidArgument, "unknown attack preset '" + std::string(attack) + "'");
  plan.attack = *preset;
  align_detector(plan);
  return plan;
}

std::size_t ExperimentResult::failures_under(Hypothesis h) const {
  return static_cast<std::size_t>(std::count_if(failures.begin(), failures.end(),
                                                [h](const TrialFailure& f) { return f.hypothesis == h; }));
}

ScorePair run_trial(const ExperimentPlan& plan, std::size_t trial, SimStats* stats,
                    std::vector<TrialFailure>* failures) {
  const std::uint64_t m = plan.master_seed;
  const std::size_t packets = plan.flow_length + 1;
  SimStats local;
  ScorePair out;

  Rng flow_rng(derive_seed(m, trial, kCreatorFlow));
  FlowTrace reference = generate_flow(plan.source, packets, flow_rng);
  if (plan.watermark) {
    WatermarkSpec key = *plan.watermark;
    key.seed = mix64(derive_seed(m, trial, kWatermarkKey) ^ plan.watermark->seed);
    Simulated marked = embed_watermark(reference, key);
    local += marked.stats;
    reference = std::move(marked.trace);
  }

  auto record = [&](Hypothesis h, const Error& e) {
    if (failures) failures->push_back({trial, h, e.code(), e.what()});
  };

  try {
    Rng rng(derive_seed(m, trial, kLinkedPerturb));
    const FlowTrace linked = perturb(plan, reference, true, rng, local);
    const Scored s = score_flow(plan, reference, linked);
    out.h1_score = s.score;
    out.rho_h1 = s.rho;
    out.m_h1 = s.m;
  } catch (const Error& e) {
    out.h1_score = kNegInf;
    record(Hypothesis::H1, e);
  }

  try {
    Rng flow0_rng(derive_seed(m, trial, kUnlinkedFlow));
    const FlowTrace other = generate_flow(plan.source, packets, flow0_rng);
    Rng rng(derive_seed(m, trial, kUnlinkedPerturb));
    const FlowTrace unlinked = perturb(plan, other, plan.attack_unlinked, rng, local);
    const Scored s = score_flow(plan, reference, unlinked);
    out.h0_score = s.score;
    out.rho_h0 = s.rho;
    out.m_h0 = s.m;
  } catch (const Error& e) {
    out.h0_score = kNegInf;
    out.h0_failed = true;
    record(Hypothesis::H0, e);
  }

  if (stats) *stats += local;
  return out;
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const ParallelFor& parallel_for) {
  plan.validate();
  const std::size_t n = plan.trials;
  std::vector<ScorePair> scores(n);
  std::vector<SimStats> stats(n);
  std::vector<std::vector<TrialFailure>> failures(n);
  auto body = [&](std::size_t t) { scores[t] = run_trial(plan, t, &stats[t], &failures[t]); };
  if (parallel_for) {
    parallel_for(n, body);
  } else {
    for (std::size_t t = 0; t < n; ++t) body(t);
  }
  ExperimentResult result;
  result.scores = std::move(scores);
  for (std::size_t t = 0; t < n; ++t) {
    result.stats += stats[t];
    for (auto& f : failures[t]) result.failures.push_back(std::move(f));
  }
  return result;
}

double auc_rank(std::span<const double> h1, std::span<const double> h0) {
  if (h1.empty() || h0.empty()) throw Error(ErrorCode::InvalidArgument, "AUC needs scores under both hypotheses");
  std::vector<double> sorted(h0.begin(), h0.end());
  std::sort(sorted.begin(), sorted.end());
  // Twice the win count, kept integral so ties add exactly one half.
  unsigned long long twice_wins = 0;
  for (double a : h1) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), a);
    const auto hi = std::upper_bound(lo, sorted.end(), a);
    twice_wins += 2ULL * static_cast<unsigned long long>(lo - sorted.begin()) +
                  static_cast<unsigned long long>(hi - lo);
  }
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(h1.size()) * static_cast<double>(h0.size()));
}

double auc_trapezoid(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    area += (points[k].p_f - points[k - 1].p_f) * (points[k].p_d + points[k - 1].p_d) * 0.5;
  }
  return area;
}

double auc_std_error(double auc, std::size_t n_h1, std::size_t n_h0) {
  const double a = auc;
  const double q1 = a / (2.0 - a);
  const double q2 = 2.0 * a * a / (1.0 + a);
  const double n1 = static_cast<double>(n_h1);
  const double n0 = static_cast<double>(n_h0);
  const double var = (a * (1.0 - a) + (n1 - 1.0) * (q1 - a * a) + (n0 - 1.0) * (q2 - a * a)) / (n1 * n0);
  return std::sqrt(std::max(var, 0.0));
}

RocCurve roc(std::span<const double> h1, std::span<const double> h0) {
  if (h1.empty() || h0.empty() || h1.size() + h0.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "ROC needs scores under both hypotheses");
  }
  std::vector<double> s1(h1.begin(), h1.end());
  std::vector<double> s0(h0.begin(), h0.end());
  std::sort(s1.begin(), s1.end(), std::greater<>());
  std::sort(s0.begin(), s0.end(), std::greater<>());
  if (s1.front() == s1.back() && s0.front() == s0.back() && s1.front() == s0.front()) {
    throw Error(ErrorCode::DegenerateScores, "all scores are identical");
  }
  const double n1 = static_cast<double>(s1.size());
  const double n0 = static_cast<double>(s0.size());

  RocCurve curve;
  curve.n_h1 = s1.size();
  curve.n_h0 = s0.size();
  curve.points.push_back({0.0, 0.0});
  std::size_t i1 = 0;
  std::size_t i0 = 0;
  while (i1 < s1.size() || i0 < s0.size()) {
    const double v = i1 == s1.size() ? s0[i0]
                   : i0 == s0.size() ? s1[i1]
                                     : std::max(s1[i1], s0[i0]);
    while (i1 < s1.size() && s1[i1] >= v) ++i1;
    while (i0 < s0.size() && s0[i0] >= v) ++i0;
    curve.points.push_back({static_cast<double>(i0) / n0, static_cast<double>(i1) / n1});
  }
  curve.auc = auc_rank(h1, h0);
  curve.auc_std_err = auc_std_error(curve.auc, curve.n_h1, curve.n_h0);
  return curve;
}

namespace {

void split_scores(std::span<const ScorePair> scores, std::vector<double>& h1, std::vector<double>& h0) {
  h1.reserve(scores.size());
  h0.reserve(scores.size());
  for (const auto& s : scores) {
    h1.push_back(s.h1_score);
    if (!s.h0_failed) h0.push_back(s.h0_score);
  }
}

}  // namespace

RocCurve roc(std::span<const ScorePair> scores) {
  if (scores.size() < 2) throw Error(ErrorCode::InvalidArgument, "ROC needs at least two score pairs");
  std::vector<double> h1, h0;
  split_scores(scores, h1, h0);
  return roc(h1, h0);
}

PdAtPf pd_at_pf(std::span<const double> h1, std::span<const double> h0, double p_f_target) {
  if (h1.empty() || h0.empty()) throw Error(ErrorCode::InvalidArgument, "need scores under both hypotheses");
  if (!(p_f_target > 0.0 && p_f_target <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "p_f target must lie in (0, 1]");
  }
  const std::size_t n0 = h0.size();
  if (p_f_target * static_cast<double>(n0) < 1.0 - 1e-12) {
    throw Error(ErrorCode::UnmeasurableTarget,
                "p_f target " + fmt(p_f_target) + " is below 1/" + std::to_string(n0));
  }
  std::vector<double> sorted(h0.begin(), h0.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = (1.0 - p_f_target) * static_cast<double>(n0 - 1);
  const auto idx = std::min(n0 - 1, static_cast<std::size_t>(std::ceil(pos - 1e-9)));

  PdAtPf r;
  r.p_f_target = p_f_target;
  r.log_eta = sorted[idx];
  const auto above1 = std::count_if(h1.begin(), h1.end(), [&](double s) { return s > r.log_eta; });
  const auto above0 = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), r.log_eta);
  const double n1 = static_cast<double>(h1.size());
  r.p_d = static_cast<double>(above1) / n1;
  r.p_d_std_err = std::sqrt(r.p_d * (1.0 - r.p_d) / n1);
  r.p_f_achieved = static_cast<double>(above0) / static_cast<double>(n0);
  return r;
}

PdAtPf pd_at_pf(std::span<const ScorePair> scores, double p_f_target) {
  std::vector<double> h1, h0;
  split_scores(scores, h1, h0);
  return pd_at_pf(h1, h0, p_f_target);
}

double detectability(const DistSpec& jitter, const WatermarkSpec& wm, std::size_t samples) {
  if (jitter.family() != Family::Cauchy && jitter.family() != Family::Laplace) {
    throw Error(ErrorCode::UnsupportedJitterFamily, "detectability needs Cauchy or Laplace jitter");
  }
  if (samples < 10000) throw Error(ErrorCode::InvalidArgument, "detectability needs at least 10^4 samples");
  wm.validate();
  Rng rng(wm.seed);
  std::vector<double> clean(samples);
  std::vector<double> marked(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    clean[i] = sample(jitter, rng);
    marked[i] = clean[i] + wm.w_max * (rng.uniform() - rng.uniform());
  }
  std::vector<double> pooled;
  pooled.reserve(2 * samples);
  pooled.insert(pooled.end(), clean.begin(), clean.end());
  pooled.insert(pooled.end(), marked.begin(), marked.end());
  std::vector<double> edges = equal_mass_edges(pooled);
  const Histogram p = histogram_of(clean, edges);
  const Histogram q = histogram_of(marked, std::move(edges));
  return std::max(0.0, kld(p, q));
}

// ---------------------------------------------------------------------------
// Plan files

namespace {

struct Entry {
  std::string value;
  std::size_t line;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

class PlanReader {
public:
  PlanReader(const std::string& text, std::filesystem::path base) : base_(std::move(base)) {
    static const char* const kKeys[] = {
        "trials", "flow_length", "master_seed", "mode", "source", "merge_window", "channel",
        "attack", "jitter", "sigma", "alpha", "xm", "log_eta", "pnl", "pm", "subflows",
        "amax", "gamma", "rho", "sync", "watermark", "pf_targets", "attack_unlinked", "clamp"};
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const std::string s = trim(raw);
      if (s.empty() || s.front() == '#') continue;
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "expected 'key = value'", line);
      const std::string key = trim(std::string_view(s).substr(0, eq));
      if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
        throw Error(ErrorCode::ParseError, "unknown key '" + key + "'", line);
      }
      if (entries_.count(key)) throw Error(ErrorCode::ParseError, "duplicate key '" + key + "'", line);
      entries_[key] = {trim(std::string_view(s).substr(eq + 1)), line};
    }
  }

  const Entry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  double number(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    return e ? to_number(e->value, e->line) : fallback;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    const Entry* e = find(key);
    return e ? to_integer(e->value, e->line) : fallback;
  }

  static double to_number(const std::string& text, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw Error(ErrorCode::ParseError, "not a number: '" + text + "'", line);
    }
    return v;
  }

  static std::uint64_t to_integer(const std::string& text, std::size_t line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw Error(ErrorCode::ParseError, "not a non-negative integer: '" + text + "'", line);
    }
    return v;
  }

  std::filesystem::path path(const std::string& p) const {
    const std::filesystem::path fp(p);
    return fp.is_absolute() || base_.empty() ? fp : base_ / fp;
  }

private:
  std::map<std::string, Entry> entries_;
  std::filesystem::path base_;
};

// Re-throws errors from a value's interpretation with the value's line.
template <typename F>
auto at_line(std::size_t line, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.line()) throw;
    throw Error(ErrorCode::ParseError, e.what(), line);
  }
}

}  // namespace

ExperimentPlan parse_plan(const std::string& text, const std::filesystem::path& base_dir,
                          std::optional<std::uint64_t> default_seed) {
  const PlanReader r(text, base_dir);
  ExperimentPlan plan;
  plan.trials = r.integer("trials", plan.trials);
  plan.flow_length = r.integer("flow_length", plan.flow_length);
  plan.master_seed = r.integer("master_seed", default_seed.value_or(plan.master_seed));
  plan.source.merge_window = r.number("merge_window", plan.source.merge_window);

  if (const Entry* e = r.find("mode")) {
    if (e->value == "basic") plan.mode = DetectorMode::Basic;
    else if (e->value == "robust") plan.mode = DetectorMode::Robust;
    else throw Error(ErrorCode::ParseError, "mode must be basic or robust", e->line);
  }

  auto on_off = [&](const char* key, bool& target) {
    if (const Entry* e = r.find(key)) {
      if (e->value == "on") target = true;
      else if (e->value == "off") target = false;
      else throw Error(ErrorCode::ParseError, std::string(key) + " must be on or off", e->line);
    }
  };
  on_off("attack_unlinked", plan.attack_unlinked);

  if (const Entry* e = r.find("source")) {
    const auto parts = split(e->value, ':');
    if (parts.size() == 3 && parts[0] == "pareto") {
      plan.source.kind = ParetoSource{PlanReader::to_number(parts[1], e->line),
                                      PlanReader::to_number(parts[2], e->line)};
    } else if (parts.size() >= 2 && parts[0] == "replay") {
      const std::string file = e->value.substr(e->value.find(':') + 1);
      const IpdSequence ipds = at_line(e->line, [&] {
        return to_ipds(read_trace(r.path(file)), plan.source.merge_window);
      });
      plan.source.kind = ReplaySource{{ipds.values().begin(), ipds.values().end()}, std::nullopt};
    } else {
      throw Error(ErrorCode::ParseError, "source must be pareto:<alpha>:<xm> or replay:<file>", e->line);
    }
  }

  std::optional<DistSpec> channel_jitter = IidChannel{}.jitter;
  if (const Entry* e = r.find("channel")) {
    const auto parts = split(e->value, ':');
    if (parts.size() == 4 && parts[0] == "iid") {
      const auto fam = parse_family(parts[1]);
      if (!fam || !is_location_scale(*fam)) {
        throw Error(ErrorCode::ParseError, "channel family must be location-scale", e->line);
      }
      const double sigma = PlanReader::to_number(parts[2], e->line);
      const double mean = PlanReader::to_number(parts[3], e->line);
      const DistSpec jitter = at_line(e->line, [&] {
        return DistSpec::make(*fam, {{"mu", 0.0}, {"sigma", sigma}});
      });
      plan.channel = IidChannel{jitter, mean};
      channel_jitter = jitter;
    } else if (parts.size() >= 2 && parts[0] == "trace") {
      const std::string file = e->value.substr(e->value.find(':') + 1);
      plan.channel = at_line(e->line, [&] { return TraceChannel{read_delays(r.path(file)), std::nullopt}; });
      channel_jitter.reset();
    } else {
      throw Error(ErrorCode::ParseError, "channel must be iid:<family>:<sigma>:<mean> or trace:<file>", e->line);
    }
  }

  // Detector jitter follows the channel's PDV model unless given.
  Family jitter_family = Family::Cauchy;
  double sigma = 0.004;
  if (channel_jitter && (channel_jitter->family() == Family::Cauchy ||
                         channel_jitter->family() == Family::Laplace)) {
    jitter_family = channel_jitter->family();
    sigma = channel_jitter->p1();
  }
  if (const Entry* e = r.find("jitter")) {
    const auto fam = parse_family(e->value);
    if (!fam || (*fam != Family::Cauchy && *fam != Family::Laplace)) {
      throw Error(ErrorCode::ParseError, "jitter must be cauchy or laplace", e->line);
    }
    jitter_family = *fam;
  }
  sigma = r.number("sigma", sigma);
  const double alpha = r.number("alpha", 0.86);
  const double xm = r.number("xm", 0.01);
  plan.detector.jitter = at_line(r.find("sigma") ? r.find("sigma")->line : 0, [&] {
    return DistSpec::make(jitter_family, {{"mu", 0.0}, {"sigma", sigma}});
  });
  plan.detector.ipd_model = at_line(r.find("alpha") ? r.find("alpha")->line : 0,
                                    [&] { return DistSpec::pareto(alpha, xm); });
  plan.detector.log_eta = r.number("log_eta", 0.0);
  on_off("clamp", plan.detector.clamp_support);
  plan.detector.loss.p_nl = r.number("pnl", 0.0);
  plan.match.gamma = r.number("gamma", plan.match.gamma);
  plan.match.rho = r.number("rho", plan.match.rho);

  if (const Entry* e = r.find("attack")) {
    plan.attack = at_line(e->line, [&] { return parse_attack(e->value, plan.detector); });
  }
  align_detector(plan);
  auto auto_or = [&](const char* key, auto apply) {
    if (const Entry* e = r.find(key); e && e->value != "auto") apply(*e);
  };
  auto_or("pm", [&](const Entry& e) { plan.detector.loss.p_m = PlanReader::to_number(e.value, e.line); });
  auto_or("amax", [&](const Entry& e) { plan.detector.attack_bound = PlanReader::to_number(e.value, e.line); });
  auto_or("subflows", [&](const Entry& e) {
    plan.detector.loss.subflows = static_cast<int>(PlanReader::to_integer(e.value, e.line));
  });

  if (const Entry* e = r.find("sync")) {
    if (e->value == "off") {
      plan.sync_grid.reset();
    } else {
      const auto parts = split(e->value, ':');
      if (parts.size() != 3) throw Error(ErrorCode::ParseError, "sync must be lo:hi:step or off", e->line);
      plan.sync_grid = SyncGrid{PlanReader::to_number(parts[0], e->line), PlanReader::to_number(parts[1], e->line),
                                PlanReader::to_number(parts[2], e->line)};
    }
  }

  if (const Entry* e = r.find("watermark"); e && e->value != "off") {
    const auto parts = split(e->value, ':');
    if (parts.empty() || parts.size() > 2) {
      throw Error(ErrorCode::ParseError, "watermark must be off, <wmax> or <wmax>:<seed>", e->line);
    }
    WatermarkSpec wm;
    wm.w_max = PlanReader::to_number(parts[0], e->line);
    if (parts.size() == 2) wm.seed = PlanReader::to_integer(parts[1], e->line);
    plan.watermark = wm;
  }

  if (const Entry* e = r.find("pf_targets")) {
    plan.pf_targets.clear();
    for (const auto& p : split(e->value, ',')) plan.pf_targets.push_back(PlanReader::to_number(p, e->line));
  }

  plan.validate();
  return plan;
}

ExperimentPlan read_plan(const std::filesystem::path& path, std::optional<std::uint64_t> default_seed) {
  return parse_plan(read_file(path), path.parent_path(), default_seed);
}

}  // namespace flowcorr
