#include "flowcorr/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "flowcorr/bench.hpp"
#include "flowcorr/fitting.hpp"
#include "flowcorr/io.hpp"
#include "flowcorr/simulator.hpp"
#include "flowcorr/sync.hpp"
#include "flowcorr/version.hpp"

namespace flowcorr {

namespace {

using nlohmann::json;

// Bad flag value; reported as a usage error naming the flag.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename F>
auto flag_value(const std::string& flag, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError || e.code() == ErrorCode::ParseError ||
        e.code() == ErrorCode::MonotonicityError) {
      throw;
    }
    throw UsageError(flag + ": " + e.what());
  }
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("FLOWCORR_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("FLOWCORR_SEED: not an unsigned integer: '") + env + "'");
  }
  return 1;
}

json envelope(std::uint64_t seed, json config) {
  return json{{"version", std::string(kVersion)}, {"seed", seed}, {"config", std::move(config)}};
}

json dist_json(const DistSpec& d) {
  json params = json::object();
  for (const auto& [name, value] : d.params()) params[name] = value;
  return json{{"family", std::string(to_string(d.family()))}, {"params", params}};
}

json stats_json(const SimStats& s) {
  return json{{"reordered", s.reordered}, {"truncated", s.truncated}, {"wrapped", s.wrapped}};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorCode::InvalidArgument, "not a number: '" + text + "'");
  return v;
}

SyncGrid parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw Error(ErrorCode::InvalidArgument, "expected lo:hi:step");
  SyncGrid g{number(parts[0]), number(parts[1]), number(parts[2])};
  (void)g.points();
  return g;
}

FlowSource parse_source(const std::string& text, double merge_window) {
  FlowSource src;
  src.merge_window = merge_window;
  const auto parts = split(text, ':');
  if (parts.size() == 3 && parts[0] == "pareto") {
    src.kind = ParetoSource{number(parts[1]), number(parts[2])};
  } else if (parts.size() >= 2 && parts[0] == "replay") {
    const IpdSequence ipds = to_ipds(read_trace(text.substr(7)), merge_window);
    src.kind = ReplaySource{{ipds.values().begin(), ipds.values().end()}, std::nullopt};
  } else {
    throw Error(ErrorCode::InvalidArgument, "expected pareto:<alpha>:<xm> or replay:<file>");
  }
  src.validate();
  return src;
}

std::optional<ChannelSpec> parse_channel(const std::string& text) {
  if (text == "none") return std::nullopt;
  const auto parts = split(text, ':');
  if (parts.size() == 4 && parts[0] == "iid") {
    const auto fam = parse_family(parts[1]);
    if (!fam || !is_location_scale(*fam)) {
      throw Error(ErrorCode::InvalidArgument, "channel family must be location-scale");
    }
    return IidChannel{DistSpec::make(*fam, {{"mu", 0.0}, {"sigma", number(parts[2])}}), number(parts[3])};
  }
  if (parts.size() >= 2 && parts[0] == "trace") {
    return TraceChannel{read_delays(text.substr(6)), std::nullopt};
  }
  throw Error(ErrorCode::InvalidArgument, "expected iid:<family>:<sigma>:<mean>, trace:<file> or none");
}

json plan_json(const ExperimentPlan& p) {
  json source;
  if (const auto* par = std::get_if<ParetoSource>(&p.source.kind)) {
    source = {{"kind", "pareto"}, {"alpha", par->alpha}, {"x_m", par->x_m}};
  } else {
    source = {{"kind", "replay"}, {"ipds", std::get<ReplaySource>(p.source.kind).ipds.size()}};
  }
  source["merge_window"] = p.source.merge_window;
  json channel;
  if (const auto* iid = std::get_if<IidChannel>(&p.channel)) {
    channel = {{"kind", "iid"}, {"jitter", dist_json(iid->jitter)}, {"mean_delay", iid->mean_delay}};
  } else {
    const auto& tr = std::get<TraceChannel>(p.channel);
    channel = {{"kind", "trace"}, {"samples", tr.delays.size()}, {"period", tr.delays.sample_period()}};
  }
  const DetectorConfig& d = p.detector;
  json cfg = {
      {"trials", p.trials},
      {"flow_length", p.flow_length},
      {"master_seed", p.master_seed},
      {"mode", std::string(to_string(p.mode))},
      {"source", source},
      {"channel", channel},
      {"attack", describe(p.attack)},
      {"attack_unlinked", p.attack_unlinked},
      {"detector",
       {{"jitter", dist_json(d.jitter)},
        {"ipd_model", dist_json(d.ipd_model)},
        {"log_eta", d.log_eta},
        {"p_nl", d.loss.p_nl},
        {"p_m", d.loss.p_m},
        {"subflows", d.loss.subflows},
        {"attack_bound", d.attack_bound},
        {"clamp_support", d.clamp_support}}},
      {"gamma", p.match.gamma},
      {"pf_targets", p.pf_targets},
  };
  if (p.sync_grid) {
    cfg["sync"] = {{"lo", p.sync_grid->lo}, {"hi", p.sync_grid->hi}, {"step", p.sync_grid->step}};
  } else {
    cfg["sync"] = nullptr;
    cfg["rho"] = p.match.rho;
  }
  cfg["watermark"] = p.watermark ? json{{"w_max", p.watermark->w_max}, {"seed", p.watermark->seed}} : json(nullptr);
  return cfg;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string family = "all";
  std::string estimator = "auto";
  std::optional<double> xm;
  std::string format = "json";
};

Estimator estimator_for(Family f, const std::string& choice) {
  if (choice == "robust") return Estimator::Robust;
  if (choice == "mle") return Estimator::Mle;
  return is_location_scale(f) ? Estimator::Robust : Estimator::Mle;
}

int run_fit(const FitArgs& a, std::uint64_t seed, std::ostream& out) {
  const std::vector<double> data = read_values(a.data);
  MleOptions options;
  options.fixed_x_m = a.xm;
  std::vector<Family> families;
  if (a.family == "all") {
    families.assign(kAllFamilies.begin(), kAllFamilies.end());
  } else {
    const auto f = parse_family(a.family);
    if (!f) throw UsageError("--family: unknown family '" + a.family + "'");
    families.push_back(*f);
  }

  json rows = json::array();
  for (Family f : families) {
    json row = {{"family", std::string(to_string(f))}};
    try {
      const DistSpec model = fit(data, f, estimator_for(f, a.estimator), options);
      json params = json::object();
      for (const auto& [name, value] : model.params()) {
        params[name] = value;
        row[name] = value;
      }
      row["params"] = params;
      row["jsd_sqrt"] = data.size() >= kMinGoodnessSamples ? json(goodness_of_fit(data, model)) : json(nullptr);
    } catch (const Error& e) {
      if (families.size() == 1) throw;
      row["error"] = std::string(to_string(e.code()));
      row["message"] = e.what();
    }
    rows.push_back(std::move(row));
  }

  if (a.format == "csv") {
    out << "family,jsd_sqrt,params\n";
    for (const auto& r : rows) {
      out << r["family"].get<std::string>() << ',';
      if (r.contains("jsd_sqrt") && !r["jsd_sqrt"].is_null()) out << r["jsd_sqrt"].get<double>();
      out << ',';
      if (r.contains("params")) {
        bool first = true;
        for (const auto& [k, v] : r["params"].items()) {
          out << (first ? "" : ";") << k << '=' << v.get<double>();
          first = false;
        }
      } else {
        out << "error=" << r["error"].get<std::string>();
      }
      out << '\n';
    }
    return 0;
  }

  json config = {{"data", a.data}, {"family", a.family}, {"estimator", a.estimator},
                 {"samples", data.size()}, {"fixed_x_m", a.xm ? json(*a.xm) : json(nullptr)}};
  json doc = envelope(seed, std::move(config));
  if (families.size() == 1) {
    doc.update(rows[0]);
  } else {
    std::stable_sort(rows.begin(), rows.end(), [](const json& x, const json& y) {
      const bool xs = x.contains("jsd_sqrt") && !x["jsd_sqrt"].is_null();
      const bool ys = y.contains("jsd_sqrt") && !y["jsd_sqrt"].is_null();
      if (xs != ys) return xs;
      return xs && x["jsd_sqrt"].get<double>() < y["jsd_sqrt"].get<double>();
    });
    doc["fits"] = rows;
  }
  out << doc.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string source = "pareto:0.86:0.01";
  std::size_t length = 20;
  std::string channel = "iid:cauchy:0.004:0.0631";
  std::string attack = "none";
  std::optional<std::string> watermark;
  std::string out;
  std::optional<std::string> creator_out;
  double merge_window = 0.01;
};

int run_simulate(const SimulateArgs& a, std::uint64_t seed, std::ostream& out) {
  const FlowSource src = flag_value("--source", [&] { return parse_source(a.source, a.merge_window); });
  const auto channel = flag_value("--channel", [&] { return parse_channel(a.channel); });
  const AttackSpec attack = flag_value("--attack", [&] { return parse_attack(a.attack); });
  std::optional<WatermarkSpec> wm;
  if (a.watermark) {
    wm = flag_value("--watermark", [&] {
      const auto parts = split(*a.watermark, ':');
      if (parts.size() != 2) throw Error(ErrorCode::InvalidArgument, "expected wmax:seed");
      WatermarkSpec w{number(parts[0]), static_cast<std::uint64_t>(number(parts[1]))};
      w.validate();
      return w;
    });
  }

  Rng rng(seed);
  SimStats stats;
  FlowTrace flow = generate_flow(src, a.length + 1, rng);
  if (wm) {
    Simulated marked = embed_watermark(flow, *wm);
    stats += marked.stats;
    flow = std::move(marked.trace);
  }
  Simulated attacked = apply_attack_pipeline(flow, attack, rng);
  stats += attacked.stats;
  FlowTrace received = std::move(attacked.trace);
  if (channel) {
    Simulated ch = apply_channel(received, *channel, rng);
    stats += ch.stats;
    received = std::move(ch.trace);
  }
  write_trace(a.out, received);
  if (a.creator_out) write_trace(*a.creator_out, flow);

  json config = {{"source", a.source},   {"length", a.length},   {"channel", a.channel},
                 {"attack", describe(attack)}, {"merge_window", a.merge_window},
                 {"watermark", wm ? json{{"w_max", wm->w_max}, {"seed", wm->seed}} : json(nullptr)},
                 {"out", a.out},
                 {"creator_out", a.creator_out ? json(*a.creator_out) : json(nullptr)}};
  json doc = envelope(seed, std::move(config));
  doc["creator_packets"] = flow.size();
  doc["detector_packets"] = received.size();
  doc["stats"] = stats_json(stats);
  out << doc.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct CorrelateArgs {
  std::string creator;
  std::string detector;
  std::string jitter = "cauchy";
  double sigma = 0.004;
  double alpha = 0.86;
  double xm = 0.01;
  double gamma = 0.075;
  std::string rho_grid = "0:0.5:0.001";
  std::optional<double> rho;
  double amax = 0.0;
  double pnl = 0.0;
  std::optional<double> pm;
  int subflows = 1;
  double log_eta = 0.0;
  bool no_clamp = false;
  std::optional<std::string> profile_out;
};

int run_correlate(const CorrelateArgs& a, std::uint64_t seed, std::ostream& out) {
  const FlowTrace creator = read_trace(a.creator);
  const FlowTrace detector = read_trace(a.detector);
  DetectorConfig cfg;
  cfg.jitter = flag_value("--sigma", [&] {
    return DistSpec::make(*parse_family(a.jitter), {{"mu", 0.0}, {"sigma", a.sigma}});
  });
  cfg.ipd_model = flag_value("--alpha", [&] { return DistSpec::pareto(a.alpha, a.xm); });
  cfg.log_eta = a.log_eta;
  cfg.loss.p_nl = a.pnl;
  cfg.loss.subflows = a.subflows;
  cfg.loss.p_m = a.pm ? *a.pm : default_miss_probability(cfg.jitter, a.gamma);
  cfg.attack_bound = a.amax;
  cfg.clamp_support = !a.no_clamp;
  flag_value("--pnl", [&] {
    cfg.validate();
    return 0;
  });

  SyncResult r;
  json sync_cfg;
  if (a.rho) {
    r = correlate_at(creator, detector, cfg, MatchConfig{*a.rho, a.gamma});
    sync_cfg = {{"rho", *a.rho}};
  } else {
    const SyncGrid grid = flag_value("--rho-grid", [&] { return parse_grid(a.rho_grid); });
    r = synchronize(creator, detector, cfg, a.gamma, grid);
    sync_cfg = {{"lo", grid.lo}, {"hi", grid.hi}, {"step", grid.step}};
    if (a.profile_out) {
      std::string csv = "rho,log_lambda\n";
      const auto pts = grid.points();
      for (std::size_t k = 0; k < pts.size(); ++k) {
        std::ostringstream row;
        row.precision(12);
        row << pts[k] << ',' << r.profile[k] << '\n';
        csv += row.str();
      }
      write_file_atomic(*a.profile_out, csv);
    }
  }

  json config = {{"creator", a.creator},
                 {"detector", a.detector},
                 {"jitter", dist_json(cfg.jitter)},
                 {"ipd_model", dist_json(cfg.ipd_model)},
                 {"gamma", a.gamma},
                 {"sync", sync_cfg},
                 {"attack_bound", cfg.attack_bound},
                 {"p_nl", cfg.loss.p_nl},
                 {"p_m", cfg.loss.p_m},
                 {"subflows", cfg.loss.subflows},
                 {"log_eta", cfg.log_eta},
                 {"clamp_support", cfg.clamp_support}};
  json doc = envelope(seed, std::move(config));
  doc["log_lambda"] = r.verdict.log_lambda;
  doc["log_eta"] = r.verdict.log_eta;
  doc["decision"] = std::string(to_string(r.verdict.decision));
  doc["rho_star"] = r.rho_star;
  doc["M"] = r.match.survivor_ipds();
  doc["L"] = creator.size() - 1;
  doc["lost"] = r.match.lost_count;
  out << doc.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string plan;
  std::string out;
  std::string format = "json";
};

int run_bench(const BenchArgs& a, std::optional<std::uint64_t> seed_flag, std::ostream& out) {
  ExperimentPlan plan = read_plan(a.plan, seed_flag ? seed_flag : std::optional(default_seed()));
  if (seed_flag) plan.master_seed = *seed_flag;
  const ExperimentResult result = run_experiment(plan);
  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);

  std::ostringstream scores;
  scores.precision(17);
  scores << "trial,h1_score,h0_score,rho_h1,rho_h0,m_h1,m_h0,h0_failed\n";
  for (std::size_t t = 0; t < result.scores.size(); ++t) {
    const ScorePair& s = result.scores[t];
    scores << t << ',' << s.h1_score << ',' << s.h0_score << ',' << s.rho_h1 << ',' << s.rho_h0 << ','
           << s.m_h1 << ',' << s.m_h0 << ',' << (s.h0_failed ? 1 : 0) << '\n';
  }
  write_file_atomic(dir / "scores.csv", scores.str());

  json summary = envelope(plan.master_seed, plan_json(plan));
  summary["failures"] = {{"h1", result.failures_under(Hypothesis::H1)},
                         {"h0", result.failures_under(Hypothesis::H0)}};
  json codes = json::object();
  for (const auto& f : result.failures) {
    const std::string key = std::string(to_string(f.hypothesis)) + ":" + std::string(to_string(f.code));
    codes[key] = codes.value(key, 0) + 1;
  }
  summary["failure_codes"] = codes;
  summary["sim_stats"] = stats_json(result.stats);

  try {
    const RocCurve curve = roc(result.scores);
    std::ostringstream csv;
    csv.precision(17);
    csv << "p_f,p_d\n";
    for (const auto& p : curve.points) csv << p.p_f << ',' << p.p_d << '\n';
    write_file_atomic(dir / "roc.csv", csv.str());
    summary["auc"] = curve.auc;
    summary["auc_std_err"] = curve.auc_std_err;
    summary["auc_std_err_method"] = "hanley-mcneil";
    summary["n_h1"] = curve.n_h1;
    summary["n_h0"] = curve.n_h0;
    json table = json::array();
    for (double pf : plan.pf_targets) {
      try {
        const PdAtPf r = pd_at_pf(result.scores, pf);
        table.push_back({{"p_f_target", pf},
                         {"p_d", r.p_d},
                         {"p_d_std_err", r.p_d_std_err},
                         {"p_f_achieved", r.p_f_achieved},
                         {"log_eta", r.log_eta}});
      } catch (const Error& e) {
        table.push_back({{"p_f_target", pf}, {"error", std::string(to_string(e.code()))}});
      }
    }
    summary["pd_at_pf"] = table;
    summary["p_d_std_err_method"] = "normal approximation of a Bernoulli rate";
  } catch (const Error& e) {
    summary["auc"] = nullptr;
    summary["roc_error"] = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  }
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");

  if (a.format == "csv") {
    out << "key,value\n";
    out << "auc," << (summary["auc"].is_null() ? std::string() : std::to_string(summary["auc"].get<double>()))
        << '\n';
    for (const auto& row : summary.value("pd_at_pf", json::array())) {
      out << "pd_at_" << row["p_f_target"].get<double>() << ','
          << (row.contains("p_d") ? std::to_string(row["p_d"].get<double>()) : row["error"].get<std::string>())
          << '\n';
    }
  } else {
    out << summary.dump(2) << '\n';
  }
  return 0;
}

json error_json(const std::string& code, const std::string& message, std::optional<std::size_t> line = {}) {
  json j = {{"error", code}, {"message", message}, {"version", std::string(kVersion)}};
  if (line) j["line"] = *line;
  return j;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flow correlation from inter-packet delays", "flowcorr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::optional<std::uint64_t> seed_flag;

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit distribution families to a list of values");
  fit_cmd->add_option("--data", fa.data, "File with one value per line (required)");
  fit_cmd->add_option("--family", fa.family, "Family name or 'all'")->capture_default_str();
  fit_cmd->add_option("--estimator", fa.estimator, "auto, robust or mle")
      ->check(CLI::IsMember({"auto", "robust", "mle"}))
      ->capture_default_str();
  fit_cmd->add_option("--xm", fa.xm, "Fixed Pareto x_m");
  fit_cmd->add_option("--format", fa.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  fit_cmd->add_option("--seed", seed_flag, "Recorded only; fitting is deterministic");

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a flow and pass it through attack and channel");
  sim_cmd->add_option("--source", sa.source, "pareto:<alpha>:<xm> or replay:<file>")->capture_default_str();
  sim_cmd->add_option("--length", sa.length, "Creator IPD count L (L+1 packets)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cmd->add_option("--channel", sa.channel, "iid:<family>:<sigma>:<mean>, trace:<file> or none")
      ->capture_default_str();
  sim_cmd->add_option("--attack", sa.attack, "Preset name or chaff=..,split=..,delay=..")->capture_default_str();
  sim_cmd->add_option("--watermark", sa.watermark, "<wmax>:<seed>");
  sim_cmd->add_option("--merge-window", sa.merge_window)->capture_default_str();
  sim_cmd->add_option("--seed", seed_flag);
  sim_cmd->add_option("--out", sa.out, "Detector-side trace (required)");
  sim_cmd->add_option("--creator-out", sa.creator_out, "Creator-side trace");

  CorrelateArgs ca;
  auto* cor_cmd = app.add_subcommand("correlate", "Score a creator/detector trace pair");
  cor_cmd->add_option("--creator", ca.creator, "Creator trace (required)");
  cor_cmd->add_option("--detector", ca.detector, "Detector trace (required)");
  cor_cmd->add_option("--jitter", ca.jitter)->check(CLI::IsMember({"cauchy", "laplace"}))->capture_default_str();
  cor_cmd->add_option("--sigma", ca.sigma)->capture_default_str();
  cor_cmd->add_option("--alpha", ca.alpha)->capture_default_str();
  cor_cmd->add_option("--xm", ca.xm)->capture_default_str();
  cor_cmd->add_option("--gamma", ca.gamma)->capture_default_str();
  auto* grid_opt = cor_cmd->add_option("--rho-grid", ca.rho_grid, "lo:hi:step")->capture_default_str();
  cor_cmd->add_option("--rho", ca.rho, "Fixed shift instead of a grid search")->excludes(grid_opt);
  cor_cmd->add_option("--amax", ca.amax)->capture_default_str();
  cor_cmd->add_option("--pnl", ca.pnl)->capture_default_str();
  cor_cmd->add_option("--pm", ca.pm, "Default: 2 F_J(-gamma)");
  cor_cmd->add_option("--subflows", ca.subflows)->check(CLI::PositiveNumber)->capture_default_str();
  cor_cmd->add_option("--log-eta", ca.log_eta)->capture_default_str();
  cor_cmd->add_flag("--no-clamp", ca.no_clamp, "Reject detector IPDs below x_m");
  cor_cmd->add_option("--profile-out", ca.profile_out, "CSV of log_lambda over the grid");
  cor_cmd->add_option("--seed", seed_flag, "Recorded only; correlation is deterministic");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Run a Monte-Carlo experiment plan");
  bench_cmd->add_option("--plan", ba.plan, "Plan file (required)");
  bench_cmd->add_option("--out", ba.out, "Output directory (required)");
  bench_cmd->add_option("--seed", seed_flag, "Overrides master_seed");
  bench_cmd->add_option("--format", ba.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  // Checked after parsing so that unknown flags are reported first.
  auto missing = [&](CLI::App* cmd, std::initializer_list<const char*> names) -> const char* {
    for (const char* n : names) {
      if (cmd->count(n) == 0) return n;
    }
    return nullptr;
  };
  const char* absent = *fit_cmd     ? missing(fit_cmd, {"--data"})
                     : *sim_cmd     ? missing(sim_cmd, {"--out"})
                     : *cor_cmd     ? missing(cor_cmd, {"--creator", "--detector"})
                                    : missing(bench_cmd, {"--plan", "--out"});
  if (absent) {
    err << "usage error: " << absent << " is required\n";
    return 2;
  }

  try {
    if (*fit_cmd) return run_fit(fa, seed_flag.value_or(default_seed()), out);
    if (*sim_cmd) return run_simulate(sa, seed_flag.value_or(default_seed()), out);
    if (*cor_cmd) return run_correlate(ca, seed_flag.value_or(default_seed()), out);
    return run_bench(ba, seed_flag, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << error_json(std::string(to_string(e.code())), e.what(), e.line()).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << error_json("IoError", e.what()).dump() << '\n';
    return 1;
  }
}

}  // namespace flowcorr
