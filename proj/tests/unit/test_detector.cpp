#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flowcorr/detector.hpp"
#include "flowcorr/matching.hpp"
#include "flowcorr/sync.hpp"
#include "../oracles.hpp"
#include "support.hpp"

using namespace flowcorr;

namespace {

DetectorConfig scenario_cfg() {
  DetectorConfig cfg;
  cfg.jitter = DistSpec::cauchy(0.0, 0.004);
  cfg.ipd_model = DistSpec::pareto(0.86, 0.01);
  return cfg;
}

// Random linked pair: creator flow with Pareto IPDs and the same flow with
// small delays, all IPDs comfortably above x_m.
std::pair<FlowTrace, FlowTrace> linked_pair(Rng& rng, std::size_t packets, double shift) {
  std::vector<double> x{0.0}, y{shift};
  for (std::size_t i = 1; i < packets; ++i) {
    const double ipd = 0.05 + rng.uniform(0.0, 0.3);
    x.push_back(x.back() + ipd);
    y.push_back(x.back() + shift + rng.uniform(-0.002, 0.002));
  }
  return {FlowTrace(x), FlowTrace(y)};
}

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("loss_probability examples") {
  CHECK(loss_probability({0.0, 0.0, 4}) == 0.75);
  CHECK(loss_probability({0.005, 1e-6, 1}) == doctest::Approx(0.005 + 1e-6 - 5e-9).epsilon(1e-15));
  CHECK(loss_probability({0.005, 1e-6, 1}) == 0.005 + 1e-6 - 0.005 * 1e-6);
  CHECK(loss_probability({0.16, 0.0, 2}) == doctest::Approx(0.58).epsilon(1e-15));
  CHECK_ERROR_CODE(loss_probability({1.0, 0.0, 1}), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(loss_probability({0.0, 0.0, 0}), ErrorCode::InvalidArgument);
}

TEST_CASE("default miss probability") {
  const double pm = default_miss_probability(DistSpec::cauchy(0, 0.004), 0.075);
  CHECK(pm == doctest::Approx(1.0 - 2.0 / std::numbers::pi * std::atan(0.075 / 0.004)).epsilon(1e-12));
}

TEST_CASE("basic_llr hand evaluation") {
  const DetectorConfig cfg = scenario_cfg();
  const LlrVerdict v = basic_llr(IpdSequence({0.05}), IpdSequence({0.05}), cfg);
  const double expected = 1.86 * std::log(0.05) - std::log(std::numbers::pi * 0.004 * 0.86 * std::pow(0.01, 0.86));
  CHECK(v.log_lambda == doctest::Approx(expected).epsilon(1e-13));
  CHECK(v.decision == Hypothesis::H1);
  CHECK_ERROR_CODE(basic_llr(IpdSequence({0.02}), IpdSequence({0.005}), cfg), ErrorCode::InvalidSupport);
  CHECK_ERROR_CODE(basic_llr(IpdSequence({0.02}), IpdSequence({0.02, 0.03}), cfg), ErrorCode::LengthMismatch);
}

TEST_CASE("basic_llr Laplace form") {
  DetectorConfig cfg = scenario_cfg();
  cfg.jitter = DistSpec::laplace(0.0, 0.003);
  const std::vector<double> c{0.02, 0.5, 0.07}, d{0.021, 0.49, 0.075};
  double sum_abs = 0, prod = 1;
  for (int i = 0; i < 3; ++i) {
    sum_abs += std::abs(d[i] - c[i]);
    prod *= d[i];
  }
  const double expected = -sum_abs / 0.003 + 1.86 * std::log(prod) - 3.0 * std::log(2 * 0.003 * 0.86 * std::pow(0.01, 0.86));
  CHECK(basic_llr(IpdSequence(c), IpdSequence(d), cfg).log_lambda == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("basic_llr tail rules out H1") {
  const DetectorConfig cfg = scenario_cfg();
  double prev = basic_llr(IpdSequence({0.05}), IpdSequence({0.05}), cfg).log_lambda;
  for (double d : {0.5, 5.0, 50.0, 5e3, 5e6}) {
    // d grows with c fixed: the Cauchy tail beats the Pareto growth.
    const double s = basic_llr(IpdSequence({0.05}), IpdSequence({d}), cfg).log_lambda;
    CHECK(s < prev);
    prev = s;
  }
  CHECK(prev < 0.0);
}

TEST_CASE("basic_llr is permutation covariant") {
  const DetectorConfig cfg = scenario_cfg();
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> c, d;
    for (int i = 0; i < 6; ++i) {
      c.push_back(0.01 + rng.uniform(0.0, 1.0));
      d.push_back(c.back() + rng.uniform(0.0, 0.01));
    }
    const double a = basic_llr(IpdSequence(c), IpdSequence(d), cfg).log_lambda;
    std::vector<std::size_t> perm{5, 2, 0, 4, 1, 3};
    std::vector<double> cp, dp;
    for (auto k : perm) {
      cp.push_back(c[k]);
      dp.push_back(d[k]);
    }
    CHECK(basic_llr(IpdSequence(cp), IpdSequence(dp), cfg).log_lambda == doctest::Approx(a).epsilon(1e-13));
  }
}

TEST_CASE("decisions are monotone in the threshold") {
  for (double s : {-3.0, 0.0, 2.5}) {
    bool seen_h0 = false;
    for (double eta = -10.0; eta <= 10.0; eta += 0.25) {
      const auto v = decide(s, eta);
      CHECK((v.decision == Hypothesis::H1) == (s > eta));
      if (v.decision == Hypothesis::H0) seen_h0 = true;
      if (seen_h0) CHECK(v.decision == Hypothesis::H0);
    }
  }
}

TEST_CASE("robust_llr reduces to basic_llr without loss") {
  const DetectorConfig cfg = scenario_cfg();
  Rng rng(12);
  for (int t = 0; t < 1000; ++t) {
    auto [x, y] = linked_pair(rng, 2 + rng.index(9), 0.0631);
    const MatchResult m = match_packets(x, y, {0.0631, 0.075});
    REQUIRE(m.pairs.size() == x.size());
    const double robust = robust_llr(m, x.size() - 1, cfg).log_lambda;
    const double basic = basic_llr(to_ipds(x), to_ipds(y), cfg).log_lambda;
    CHECK(std::abs(robust - basic) <= 1e-12 * std::max(1.0, std::abs(basic)));
  }
}

TEST_CASE("robust_llr closed-form plug-in") {
  // L = 4, M = 3, P_L = 0.25, all ratios 1: log Lambda = log 0.25.
  // Ratio 1 at c = d needs d^(a+1) = pi sigma a x_m^a; pick sigma accordingly.
  const double alpha = 0.86, xm = 0.01, d = 0.05;
  const double sigma = std::pow(d, alpha + 1.0) / (std::numbers::pi * alpha * std::pow(xm, alpha));
  DetectorConfig cfg;
  cfg.jitter = DistSpec::cauchy(0.0, sigma);
  cfg.ipd_model = DistSpec::pareto(alpha, xm);
  cfg.loss = {0.0, 0.0, 4};
  cfg.loss.subflows = 4;
  cfg.loss.p_m = 0.0;
  // P_L = 3/4 with S = 4; use p_nl to reach 0.25 with S = 1 instead.
  cfg.loss = {0.25, 0.0, 1};
  const FlowTrace x({0.0, 0.05, 0.10, 0.15, 0.20});
  const FlowTrace y({0.0, 0.05, 0.10, 0.15});
  const MatchResult m = make_match_result(x, y, {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  CHECK(robust_llr(m, 4, cfg).log_lambda == doctest::Approx(std::log(0.25)).epsilon(1e-12));
}

TEST_CASE("robust_llr matches the product-form oracle") {
  Rng rng(99);
  for (int t = 0; t < 500; ++t) {
    DetectorConfig cfg = scenario_cfg();
    cfg.loss = {rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.1), 1 + static_cast<int>(rng.index(3))};
    auto [x, y] = linked_pair(rng, 3 + rng.index(4), 0.0);
    // Drop one detector packet at random to force a loss.
    std::vector<double> ys(y.timestamps().begin(), y.timestamps().end());
    ys.erase(ys.begin() + static_cast<long>(rng.index(ys.size())));
    const MatchResult m = match_packets(x, FlowTrace(ys), {0.0, 0.075});
    if (m.survivor_ipds() < 1) continue;
    const double got = robust_llr(m, x.size() - 1, cfg).log_lambda;
    CHECK(got == doctest::Approx(oracle::product_form(m, x.size() - 1, cfg)).epsilon(1e-10));
  }
}

TEST_CASE("robust_llr errors") {
  const DetectorConfig cfg = scenario_cfg();
  const FlowTrace x({0.0, 0.05, 0.10});
  const MatchResult one = make_match_result(x, x, {{0, 0}});
  CHECK_ERROR_CODE(robust_llr(one, 2, cfg), ErrorCode::LengthMismatch);
  const MatchResult full = make_match_result(x, x, {{0, 0}, {1, 1}, {2, 2}});
  CHECK_ERROR_CODE(robust_llr(full, 1, cfg), ErrorCode::LengthMismatch);
  const FlowTrace close({0.0, 0.005, 0.10});
  const MatchResult bad = make_match_result(x, close, {{0, 0}, {1, 1}, {2, 2}});
  CHECK_ERROR_CODE(robust_llr(bad, 2, cfg), ErrorCode::InvalidSupport);
  DetectorConfig clamped = cfg;
  clamped.clamp_support = true;
  CHECK(std::isfinite(robust_llr(bad, 2, clamped).log_lambda));
}

TEST_CASE("clamping evaluates the IPD density at x_m") {
  DetectorConfig cfg = scenario_cfg();
  cfg.clamp_support = true;
  const PacketRatio r(cfg, false);
  const double below = r.log_ratio(0.006, 0.005);
  const double z = 0.001 / 0.004;
  const double expected = 1.86 * std::log(0.01) - std::log(std::numbers::pi * 0.004 * 0.86 * std::pow(0.01, 0.86)) - std::log1p(z * z);
  CHECK(below == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("attack density closed form and symmetry") {
  const double f0 = uniform_cauchy_density(0.0, 0.004, 0.05);
  CHECK(f0 == doctest::Approx(std::atan(12.5) / (0.05 * std::numbers::pi)).epsilon(1e-13));
  CHECK(f0 == doctest::Approx(9.4918).epsilon(1e-4));
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const double j = rng.uniform(-0.3, 0.3);
    CHECK(uniform_cauchy_density(j, 0.004, 0.05) == uniform_cauchy_density(-j, 0.004, 0.05));
  }
  CHECK(uniform_cauchy_density(0.05, 0.004, 0.05) == uniform_cauchy_density(-0.05, 0.004, 0.05));
}

TEST_CASE("attack density equals the numerical convolution") {
  Rng rng(13);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double sigma = rng.uniform(0.001, 0.05);
    const double a = rng.uniform(0.001, 0.2);
    const double j = rng.uniform(-0.5, 0.5);
    const double conv = oracle::cauchy_uniform_convolution(j, sigma, a);
    worst = std::max(worst, std::abs(conv - uniform_cauchy_density(j, sigma, a)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("attack_llr limits and errors") {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    DetectorConfig cfg = scenario_cfg();
    cfg.loss.p_m = 0.01;
    auto [x, y] = linked_pair(rng, 3 + rng.index(6), 0.0);
    const MatchResult m = match_packets(x, y, {0.0, 0.075});
    const double robust = robust_llr(m, x.size() - 1, cfg).log_lambda;
    cfg.attack_bound = 1e-9;
    CHECK(std::abs(attack_llr(m, x.size() - 1, cfg).log_lambda - robust) < 1e-4);
  }
  DetectorConfig lap = scenario_cfg();
  lap.jitter = DistSpec::laplace(0.0, 0.004);
  lap.attack_bound = 0.05;
  const FlowTrace x({0.0, 0.05, 0.10});
  const MatchResult m = make_match_result(x, x, {{0, 0}, {1, 1}, {2, 2}});
  CHECK_ERROR_CODE(attack_llr(m, 2, lap), ErrorCode::UnsupportedJitterFamily);
  CHECK_ERROR_CODE(attack_llr(m, 2, scenario_cfg()), ErrorCode::InvalidArgument);
}

TEST_CASE("config validation") {
  DetectorConfig cfg = scenario_cfg();
  cfg.jitter = DistSpec::normal(0.0, 0.004);
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::UnsupportedJitterFamily);
  cfg = scenario_cfg();
  cfg.jitter = DistSpec::cauchy(0.001, 0.004);
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::InvalidArgument);
  cfg = scenario_cfg();
  cfg.ipd_model = DistSpec::exponential(5.0);
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::InvalidArgument);
}

}  // TEST_SUITE

TEST_SUITE("matching") {

TEST_CASE("matching examples") {
  std::vector<double> xs{0.0, 0.1, 0.25, 0.4}, ys;
  for (double x : xs) ys.push_back(x + 0.063);
  const MatchResult m = match_packets(FlowTrace(xs), FlowTrace(ys), {0.063, 0.075});
  REQUIRE(m.pairs.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(m.pairs[i] == MatchedPair{i, i});
  CHECK(m.lost_count == 0);

  const MatchResult none = match_packets(FlowTrace(xs), FlowTrace({10.0, 11.0}), {0.063, 0.075});
  CHECK(none.pairs.empty());
  CHECK(none.lost_count == 4);
  CHECK(none.survivor_ipds() == 0);

  const MatchResult gap = match_packets(FlowTrace({0, 1, 2}), FlowTrace({0, 2}), {0.0, 0.5});
  REQUIRE(gap.pairs.size() == 2);
  CHECK(gap.pairs[0] == MatchedPair{0, 0});
  CHECK(gap.pairs[1] == MatchedPair{2, 1});
  CHECK(gap.lost_count == 1);
}

TEST_CASE("matching equals the brute-force oracle") {
  Rng rng(2718);
  for (int t = 0; t < 1000; ++t) {
    const auto [x, y, mc] = oracle::matching_instance(rng, t);
    const MatchResult got = match_packets(x, y, mc);
    CHECK(got.pairs == oracle::brute_force_match(x, y, mc));
    for (std::size_t k = 0; k < got.pairs.size(); ++k) {
      CHECK(std::abs(x[got.pairs[k].creator] - (y[got.pairs[k].detector] - mc.rho)) < mc.gamma);
      if (k > 0) {
        CHECK(got.pairs[k].creator > got.pairs[k - 1].creator);
        CHECK(got.pairs[k].detector > got.pairs[k - 1].detector);
      }
    }
    CHECK(got.creator_survivors.size() == got.detector_survivors.size());
    CHECK(got.lost_count == x.size() - got.pairs.size());
  }
}

}  // TEST_SUITE

TEST_SUITE("sync") {

TEST_CASE("grid validation") {
  CHECK_ERROR_CODE(SyncGrid({0.5, 0.0, 0.001}).points(), ErrorCode::EmptyGrid);
  CHECK_ERROR_CODE(SyncGrid({0.0, 0.5, 0.0}).points(), ErrorCode::EmptyGrid);
  CHECK(SyncGrid({0.0, 0.5, 0.001}).points().size() == 501);
  CHECK(SyncGrid({0.2, 0.2, 0.001}).points().size() == 1);
}

TEST_CASE("noiseless constant delay is recovered within one step") {
  Rng rng(31);
  const DetectorConfig cfg = scenario_cfg();
  for (int t = 0; t < 200; ++t) {
    const double delay = rng.uniform(0.0, 0.5);
    std::vector<double> x{0.0};
    for (int i = 0; i < 20; ++i) x.push_back(x.back() + sample(DistSpec::pareto(0.86, 0.01), rng));
    std::vector<double> y;
    for (double v : x) y.push_back(v + delay);
    const SyncResult r = synchronize(FlowTrace(x), FlowTrace(y), cfg, 0.075, SyncGrid{});
    CHECK(std::abs(r.rho_star - delay) <= 0.0005 + 1e-12);
    CHECK(r.match.pairs.size() == x.size());
  }
}

TEST_CASE("example delay 0.1") {
  const FlowTrace x({0.0, 0.03, 0.2, 0.23, 0.5, 0.9});
  std::vector<double> y;
  for (double v : x.timestamps()) y.push_back(v + 0.1);
  const SyncResult r = synchronize(x, FlowTrace(y), scenario_cfg(), 0.075, SyncGrid{});
  CHECK(std::abs(r.rho_star - 0.1) <= 0.0005 + 1e-12);
}

TEST_CASE("parallel contract gives the same result") {
  Rng rng(8);
  const DetectorConfig cfg = scenario_cfg();
  auto [x, y] = linked_pair(rng, 12, 0.0631);
  const ParallelFor serial = [](std::size_t n, const std::function<void(std::size_t)>& body) {
    for (std::size_t k = n; k-- > 0;) body(k);
  };
  const SyncResult a = synchronize(x, y, cfg, 0.075, SyncGrid{});
  const SyncResult b = synchronize(x, y, cfg, 0.075, SyncGrid{}, serial);
  CHECK(a.rho_star == b.rho_star);
  CHECK(a.verdict.log_lambda == b.verdict.log_lambda);
  CHECK(a.profile == b.profile);
}

TEST_CASE("failures") {
  const DetectorConfig cfg = scenario_cfg();
  CHECK_ERROR_CODE(synchronize(FlowTrace({0.0, 0.1}), FlowTrace({50.0, 60.0}), cfg, 0.075, SyncGrid{}),
                   ErrorCode::LengthMismatch);
  CHECK_ERROR_CODE(synchronize(FlowTrace({0.0, 0.1}), FlowTrace({0.0, 0.1}), cfg, 0.075, SyncGrid{1, 0, 0.1}),
                   ErrorCode::EmptyGrid);
}

TEST_CASE("correlate_at scores one shift") {
  const FlowTrace x({0.0, 0.05, 0.2, 0.31});
  const SyncResult r = correlate_at(x, x, scenario_cfg(), {0.0, 0.075});
  CHECK(r.rho_star == 0.0);
  CHECK(r.verdict.decision == Hypothesis::H1);
  CHECK(r.profile.size() == 1);
}

TEST_CASE("linked flows outscore unlinked ones on average") {
  Rng rng(44);
  const DetectorConfig cfg = scenario_cfg();
  double linked = 0.0, unlinked = 0.0;
  int n = 0;
  for (int t = 0; t < 100; ++t) {
    auto [x, y] = linked_pair(rng, 8, 0.0631);
    auto [u, v] = linked_pair(rng, 8, 0.0631);
    const double a = synchronize(x, y, cfg, 0.075, SyncGrid{}).verdict.log_lambda;
    double b = -50.0;
    try {
      b = synchronize(x, v, cfg, 0.075, SyncGrid{}).verdict.log_lambda;
    } catch (const Error&) {
    }
    linked += a;
    unlinked += b;
    ++n;
  }
  CHECK(linked / n > unlinked / n);
}

}  // TEST_SUITE
