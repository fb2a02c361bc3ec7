#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flowcorr/bench.hpp"
#include "support.hpp"

using namespace flowcorr;

namespace {

// D(J || J + W) by quadrature, W triangular on [-w, w]. The outer integral
// uses x = sigma tan(theta), so the Cauchy weight becomes 1 / pi.
double cauchy_triangular_kl(double sigma, double w) {
  const auto f = [&](double x) { return 1.0 / (std::numbers::pi * sigma * (1.0 + (x / sigma) * (x / sigma))); };
  const auto marked = [&](double x) {
    const auto g = [&](double t) { return (1.0 - std::abs(t) / w) / w * f(x - t); };
    double total = testing::integrate(g, -w, 0.0) + testing::integrate(g, 0.0, w);
    return total;
  };
  const auto integrand = [&](double theta) {
    const double x = sigma * std::tan(theta);
    return std::log(f(x) / marked(x)) / std::numbers::pi;
  };
  const double h = std::numbers::pi / 2.0;
  return testing::integrate(integrand, -h, 0.0) + testing::integrate(integrand, 0.0, h);
}

ExperimentPlan noiseless_plan() {
  ExperimentPlan plan = scenario_a(5, "none", 100, 3);
  plan.channel = TraceChannel{DelayTrace({0.08, 0.08}), 0};
  return plan;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("roc examples") {
  const std::vector<double> h1{2.0, 0.0}, h0{1.0, -1.0};
  CHECK(auc_rank(h1, h0) == 0.75);
  const RocCurve r = roc(h1, h0);
  CHECK(r.auc == 0.75);
  CHECK(r.points.front().p_f == 0.0);
  CHECK(r.points.front().p_d == 0.0);
  CHECK(r.points.back().p_f == 1.0);
  CHECK(r.points.back().p_d == 1.0);

  const std::vector<double> hi{3.0, 4.0, 5.0}, lo{0.0, 1.0};
  const RocCurve perfect = roc(hi, lo);
  CHECK(perfect.auc == 1.0);
  bool corner = false;
  for (const auto& p : perfect.points) corner |= p.p_f == 0.0 && p.p_d == 1.0;
  CHECK(corner);

  const std::vector<double> same{1.0, 1.0};
  CHECK_ERROR_CODE(roc(same, same), ErrorCode::DegenerateScores);
}

TEST_CASE("rank and trapezoid areas agree") {
  Rng rng(21);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> h1, h0;
    const std::size_t n1 = 1 + rng.index(60), n0 = 1 + rng.index(60);
    // Coarse rounding forces ties inside and across groups.
    for (std::size_t i = 0; i < n1; ++i) h1.push_back(std::round(rng.normal() * 4.0 + 1.0));
    for (std::size_t i = 0; i < n0; ++i) h0.push_back(std::round(rng.normal() * 4.0));
    if (t % 5 == 0) h1.push_back(-std::numeric_limits<double>::infinity());
    const RocCurve r = roc(h1, h0);
    CHECK(std::abs(r.auc - auc_trapezoid(r.points)) < 1e-9);
    CHECK(r.auc == auc_rank(h1, h0));
  }
}

TEST_CASE("same distribution gives one half") {
  int inside = 0;
  for (int t = 0; t < 20; ++t) {
    Rng rng(derive_seed(5, static_cast<std::uint64_t>(t)));
    std::vector<double> h1, h0;
    for (int i = 0; i < 2000; ++i) {
      h1.push_back(rng.normal());
      h0.push_back(rng.normal());
    }
    const RocCurve r = roc(h1, h0);
    if (std::abs(r.auc - 0.5) <= 3.0 * r.auc_std_err) ++inside;
  }
  CHECK(inside >= 19);
}

TEST_CASE("Hanley-McNeil standard error") {
  const double a = 0.9;
  const double q1 = a / (2 - a), q2 = 2 * a * a / (1 + a);
  const double expected = std::sqrt((a * (1 - a) + 99 * (q1 - a * a) + 199 * (q2 - a * a)) / (100.0 * 200.0));
  CHECK(auc_std_error(a, 100, 200) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pd_at_pf") {
  std::vector<double> h1, h0;
  for (int i = 0; i < 100; ++i) {
    h1.push_back(200.0 + i);
    h0.push_back(static_cast<double>(i));
  }
  const PdAtPf p = pd_at_pf(h1, h0, 0.01);
  CHECK(p.p_d == 1.0);
  CHECK(p.p_f_achieved <= 0.01);
  // Quantile of 0..99 at 0.9 with the higher rule: ceil(0.9 * 99) = 90.
  const PdAtPf q = pd_at_pf(h0, h0, 0.1);
  CHECK(q.log_eta == 90.0);
  CHECK(q.p_f_achieved == doctest::Approx(0.09));
  CHECK_ERROR_CODE(pd_at_pf(h1, h0, 1e-6), ErrorCode::UnmeasurableTarget);
  std::vector<double> big(10000, 0.0);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<double>(i);
  CHECK_ERROR_CODE(pd_at_pf(big, big, 1e-6), ErrorCode::UnmeasurableTarget);
}

TEST_CASE("experiments are deterministic") {
  ExperimentPlan plan = scenario_a(5, "attack5a", 100, 9);
  const ExperimentResult a = run_experiment(plan);
  const ExperimentResult b = run_experiment(plan);
  REQUIRE(a.scores.size() == 100);
  for (std::size_t i = 0; i < a.scores.size(); ++i) {
    CHECK(a.scores[i].h1_score == b.scores[i].h1_score);
    CHECK(a.scores[i].h0_score == b.scores[i].h0_score);
    CHECK(a.scores[i].rho_h1 == b.scores[i].rho_h1);
  }
  plan.master_seed = 10;
  const ExperimentResult c = run_experiment(plan);
  CHECK(c.scores[0].h1_score != a.scores[0].h1_score);

  // Out-of-order evaluation through the parallel contract changes nothing.
  plan.master_seed = 9;
  const ParallelFor reverse = [](std::size_t n, const std::function<void(std::size_t)>& body) {
    for (std::size_t k = n; k-- > 0;) body(k);
  };
  const ExperimentResult d = run_experiment(plan, reverse);
  for (std::size_t i = 0; i < a.scores.size(); ++i) CHECK(d.scores[i].h1_score == a.scores[i].h1_score);
}

TEST_CASE("noiseless channel separates perfectly") {
  const ExperimentResult r = run_experiment(noiseless_plan());
  double min_h1 = std::numeric_limits<double>::infinity();
  double max_h0 = -std::numeric_limits<double>::infinity();
  for (const auto& s : r.scores) {
    min_h1 = std::min(min_h1, s.h1_score);
    if (!s.h0_failed) max_h0 = std::max(max_h0, s.h0_score);
    CHECK(std::abs(s.rho_h1 - 0.08) <= 0.0005 + 1e-12);
  }
  CHECK(min_h1 > max_h0);
  CHECK(roc(r.scores).auc == 1.0);
  CHECK(pd_at_pf(r.scores, 0.1).p_d == 1.0);
}

TEST_CASE("basic mode on a lossless channel") {
  ExperimentPlan plan = noiseless_plan();
  plan.mode = DetectorMode::Basic;
  const ExperimentResult r = run_experiment(plan);
  CHECK(r.failures_under(Hypothesis::H1) == 0);
  CHECK(roc(r.scores).auc > 0.99);
}

TEST_CASE("plan validation") {
  ExperimentPlan plan = scenario_a(5);
  plan.trials = 10;
  CHECK_ERROR_CODE(plan.validate(), ErrorCode::InvalidArgument);
  plan = scenario_a(0);
  CHECK_ERROR_CODE(plan.validate(), ErrorCode::InvalidArgument);
}

TEST_CASE("align_detector") {
  ExperimentPlan plan = scenario_a(20, "attack5a");
  CHECK(plan.detector.loss.subflows == 2);
  CHECK(plan.detector.attack_bound == 0.05);
  CHECK(plan.detector.loss.p_m == doctest::Approx(default_miss_probability(plan.detector.jitter, 0.075)));
  CHECK(scenario_a(20).detector.attack_bound == 0.0);
}

TEST_CASE("plan files") {
  const ExperimentPlan p = parse_plan(
      "# comment\n"
      "trials = 500\n"
      "flow_length = 5\n"
      "attack = attack4a\n"
      "channel = iid:laplace:0.003:0.05\n"
      "sync = 0:0.2:0.002\n"
      "pf_targets = 0.1, 0.05\n"
      "watermark = 0.002:9\n");
  CHECK(p.trials == 500);
  CHECK(p.flow_length == 5);
  CHECK(p.attack.chaff_ratio == 5.0);
  CHECK(p.detector.jitter.family() == Family::Laplace);
  CHECK(p.detector.jitter.p1() == 0.003);
  REQUIRE(p.sync_grid);
  CHECK(p.sync_grid->hi == 0.2);
  CHECK(p.pf_targets == std::vector<double>{0.1, 0.05});
  REQUIRE(p.watermark);
  CHECK(p.watermark->seed == 9);
  CHECK(p.master_seed == 1);
  CHECK(parse_plan("trials = 200\n", {}, 77).master_seed == 77);
  CHECK(parse_plan("master_seed = 5\n", {}, 77).master_seed == 5);

  const auto line_of = [](const std::string& text) {
    try {
      parse_plan(text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      return e.line().value_or(0);
    }
    return std::size_t{0};
  };
  CHECK(line_of("trials = 200\nbogus = 1\n") == 2);
  CHECK(line_of("trials = 200\n\ntrials = 300\n") == 3);
  CHECK(line_of("trials = many\n") == 1);
  CHECK(line_of("just text\n") == 1);
}

TEST_CASE("watermark detectability") {
  CHECK(detectability(DistSpec::cauchy(0.0, 0.004), {1e-9, 1}, 100000) < 0.01);
  CHECK_ERROR_CODE(detectability(DistSpec::normal(0.0, 0.004), {0.002, 1}, 100000),
                   ErrorCode::UnsupportedJitterFamily);
  CHECK_ERROR_CODE(detectability(DistSpec::cauchy(0.0, 0.004), {0.002, 1}, 100), ErrorCode::InvalidArgument);

  const double exact = cauchy_triangular_kl(0.0002, 0.002);
  CHECK(exact == doctest::Approx(0.4496).epsilon(2e-3));
  const double estimate = detectability(DistSpec::cauchy(0.0, 0.0002), {0.002, 1}, 100000);
  CHECK(testing::rel(estimate, exact) < 0.15);
}

}  // TEST_SUITE
