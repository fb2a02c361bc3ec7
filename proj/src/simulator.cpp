#include "flowcorr/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "flowcorr/error.hpp"

namespace flowcorr {

namespace {

constexpr double kAttackGrid = 0.001;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Simulated resort(std::vector<double> times, const std::string& label, SimStats stats = {}) {
  std::size_t moved = 0;
  FlowTrace trace = FlowTrace::from_unsorted(std::move(times), &moved, label);
  stats.reordered += moved;
  return {std::move(trace), stats};
}

std::vector<double> copy_times(const FlowTrace& flow) {
  return {flow.timestamps().begin(), flow.timestamps().end()};
}

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::InvalidArgument,
                "bad number for " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void FlowSource::validate() const {
  if (!(merge_window >= 0.0)) throw Error(ErrorCode::InvalidArgument, "merge window must be >= 0");
  std::visit(Overloaded{
                 [](const ParetoSource& p) { (void)DistSpec::pareto(p.alpha, p.x_m); },
                 [](const ReplaySource& r) {
                   if (r.ipds.empty()) {
                     throw Error(ErrorCode::InvalidArgument, "replay IPD list is empty");
                   }
                   for (double d : r.ipds) {
                     if (!(d > 0.0) || !std::isfinite(d)) {
                       throw Error(ErrorCode::InvalidArgument, "replay IPDs must be positive");
                     }
                   }
                 },
             },
             kind);
}

FlowTrace generate_flow(const FlowSource& src, std::size_t packets, Rng& rng) {
  src.validate();
  if (packets < 2) throw Error(ErrorCode::InvalidArgument, "a flow needs at least 2 packets");
  std::vector<double> ts(packets, 0.0);
  std::visit(Overloaded{
                 [&](const ParetoSource& p) {
                   const DistSpec model = DistSpec::pareto(p.alpha, p.x_m);
                   for (std::size_t i = 1; i < packets; ++i) ts[i] = ts[i - 1] + sample(model, rng);
                 },
                 [&](const ReplaySource& r) {
                   const std::size_t n = r.ipds.size();
                   const std::size_t start = r.start ? *r.start % n : rng.index(n);
                   for (std::size_t i = 1; i < packets; ++i) {
                     ts[i] = ts[i - 1] + r.ipds[(start + i - 1) % n];
                   }
                 },
             },
             src.kind);
  return FlowTrace(std::move(ts));
}

double iid_delay_scale(const DistSpec& jitter) {
  if (!is_location_scale(jitter.family())) {
    throw Error(ErrorCode::InvalidArgument, "i.i.d. channel jitter must be a location-scale family");
  }
  const double sigma = jitter.p1();
  return jitter.family() == Family::Cauchy ? 0.5 * sigma : sigma / std::numbers::sqrt2;
}

Simulated apply_channel(const FlowTrace& flow, const ChannelSpec& channel, Rng& rng) {
  std::vector<double> ys = copy_times(flow);
  SimStats stats;
  std::visit(Overloaded{
                 [&](const IidChannel& ch) {
                   if (!(ch.mean_delay >= 0.0)) {
                     throw Error(ErrorCode::InvalidArgument, "mean delay must be >= 0");
                   }
                   const DistSpec z = ch.jitter.with_location_scale(0.0, iid_delay_scale(ch.jitter));
                   for (double& y : ys) {
                     double n = ch.mean_delay + sample(z, rng);
                     if (n < 0.0) {
                       n = 0.0;
                       ++stats.truncated;
                     }
                     y += n;
                   }
                 },
                 [&](const TraceChannel& ch) {
                   const std::size_t start = ch.start ? *ch.start : rng.index(ch.delays.size());
                   const double t0 = flow.empty() ? 0.0 : flow.front();
                   for (double& y : ys) {
                     bool wrapped = false;
                     const double n = ch.delays.delay_at(start, y - t0, &wrapped);
                     if (wrapped) ++stats.wrapped;
                     if (n < 0.0) {
                       throw Error(ErrorCode::NegativeDelay, "delay trace yields a negative delay");
                     }
                     y += n;
                   }
                 },
             },
             channel);
  return resort(std::move(ys), flow.label(), stats);
}

void AttackSpec::validate() const {
  if (!(chaff_ratio >= 0.0) || !std::isfinite(chaff_ratio)) {
    throw Error(ErrorCode::InvalidArgument, "chaff ratio must be >= 0");
  }
  if (subflows < 1) throw Error(ErrorCode::InvalidArgument, "subflows must be >= 1");
  if (!(delay_bound() >= 0.0)) throw Error(ErrorCode::InvalidArgument, "a_max must be >= 0");
}

bool AttackSpec::empty() const {
  return chaff_ratio == 0.0 && subflows == 1 && delay_bound() == 0.0;
}

double AttackSpec::delay_bound() const {
  return std::visit(Overloaded{
                        [](const NoDelay&) { return 0.0; },
                        [](const UniformDelay& d) { return d.a_max; },
                        [](const AdversarialDelay& d) { return d.a_max; },
                    },
                    delay);
}

FlowTrace add_chaff(const FlowTrace& flow, double ratio, Rng& rng) {
  if (!(ratio >= 0.0)) throw Error(ErrorCode::InvalidArgument, "chaff ratio must be >= 0");
  if (ratio == 0.0 || flow.size() < 2) return flow;
  const double lo = flow.front();
  const double hi = flow.back();
  const std::uint64_t count = rng.poisson(ratio * static_cast<double>(flow.size()));
  std::vector<double> ts = copy_times(flow);
  ts.reserve(ts.size() + count);
  for (std::uint64_t k = 0; k < count; ++k) ts.push_back(rng.uniform(lo, hi));
  return FlowTrace::from_unsorted(std::move(ts), nullptr, flow.label());
}

FlowTrace split_flow(const FlowTrace& flow, int subflows, Rng& rng) {
  if (subflows < 1) throw Error(ErrorCode::InvalidArgument, "subflows must be >= 1");
  if (subflows == 1) return flow;
  const double keep = 1.0 / static_cast<double>(subflows);
  std::vector<double> kept;
  kept.reserve(flow.size() / static_cast<std::size_t>(subflows) + 1);
  for (double t : flow.timestamps()) {
    if (rng.bernoulli(keep)) kept.push_back(t);
  }
  return FlowTrace(std::move(kept), flow.label());
}

Simulated delay_attack(const FlowTrace& flow, const DelayStrategy& delay, Rng& rng) {
  return std::visit(
      Overloaded{
          [&](const NoDelay&) { return Simulated{flow, {}}; },
          [&](const UniformDelay& d) {
            if (!(d.a_max >= 0.0)) throw Error(ErrorCode::InvalidArgument, "a_max must be >= 0");
            if (d.a_max == 0.0) return Simulated{flow, {}};
            std::vector<double> ts = copy_times(flow);
            for (double& t : ts) t += rng.uniform(0.0, d.a_max);
            return resort(std::move(ts), flow.label());
          },
          [&](const AdversarialDelay& d) {
            if (!(d.a_max >= 0.0)) throw Error(ErrorCode::InvalidArgument, "a_max must be >= 0");
            if (d.a_max == 0.0 || flow.size() < 2) return Simulated{flow, {}};
            d.knowledge.validate();
            // The factor P_L + (1 - P_L) r is increasing in r, so minimizing
            // the log ratio minimizes the factor.
            const PacketRatio ratio(d.knowledge, false);
            const double x_m = d.knowledge.ipd_model.p1();
            const auto steps = static_cast<std::size_t>(std::floor(d.a_max / kAttackGrid + 1e-9));
            std::vector<double> ts = copy_times(flow);
            std::vector<double> added(ts.size(), 0.0);
            for (std::size_t i = 1; i < ts.size(); ++i) {
              const double c = ts[i] - ts[i - 1];
              double best_delay = d.a_max;
              double best = std::numeric_limits<double>::infinity();
              for (std::size_t k = 0; k <= steps; ++k) {
                const double a = std::min(static_cast<double>(k) * kAttackGrid, d.a_max);
                const double dd = c + a - added[i - 1];
                if (dd < x_m) continue;
                const double r = ratio.log_ratio(c, dd);
                if (r < best) {
                  best = r;
                  best_delay = a;
                }
              }
              added[i] = best_delay;
            }
            for (std::size_t i = 0; i < ts.size(); ++i) ts[i] += added[i];
            return resort(std::move(ts), flow.label());
          },
      },
      delay);
}

Simulated apply_attack_pipeline(const FlowTrace& flow, const AttackSpec& attack, Rng& rng) {
  attack.validate();
  Simulated out = delay_attack(flow, attack.delay, rng);
  out.trace = add_chaff(out.trace, attack.chaff_ratio, rng);
  out.trace = split_flow(out.trace, attack.subflows, rng);
  return out;
}

std::optional<AttackSpec> attack_preset(std::string_view name, const DetectorConfig& knowledge) {
  constexpr double kChaff = 5.0;
  constexpr double kAmax = 0.05;
  const AdversarialDelay adversarial{kAmax, knowledge};
  if (name == "none") return AttackSpec{};
  if (name == "attack1") return AttackSpec{kChaff, 1, NoDelay{}};
  if (name == "attack2") return AttackSpec{0.0, 4, NoDelay{}};
  if (name == "attack3a") return AttackSpec{0.0, 1, UniformDelay{kAmax}};
  if (name == "attack3b") return AttackSpec{0.0, 1, adversarial};
  if (name == "attack4a") return AttackSpec{kChaff, 1, UniformDelay{kAmax}};
  if (name == "attack4b") return AttackSpec{kChaff, 1, adversarial};
  if (name == "attack5a") return AttackSpec{kChaff, 2, UniformDelay{kAmax}};
  if (name == "attack5b") return AttackSpec{kChaff, 2, adversarial};
  return std::nullopt;
}

AttackSpec parse_attack(std::string_view text, const DetectorConfig& knowledge) {
  const std::string t = trim(text);
  if (t.empty()) return AttackSpec{};
  if (auto preset = attack_preset(t, knowledge)) return *preset;
  AttackSpec spec;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "attack item '" + item + "' is not key=value");
    }
    const std::string key = trim(std::string_view(item).substr(0, eq));
    const std::string value = trim(std::string_view(item).substr(eq + 1));
    if (key == "chaff") {
      spec.chaff_ratio = parse_number(value, "chaff");
    } else if (key == "split" || key == "subflows") {
      const double s = parse_number(value, key);
      if (s != std::floor(s) || s < 1.0) {
        throw Error(ErrorCode::InvalidArgument, "subflows must be a positive integer");
      }
      spec.subflows = static_cast<int>(s);
    } else if (key == "delay") {
      const auto colon = value.find(':');
      const std::string kind = value.substr(0, colon);
      if (kind == "none") {
        spec.delay = NoDelay{};
      } else if (colon == std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "delay needs '<kind>:<a_max>'");
      } else if (kind == "uniform") {
        spec.delay = UniformDelay{parse_number(value.substr(colon + 1), "a_max")};
      } else if (kind == "adversarial") {
        spec.delay = AdversarialDelay{parse_number(value.substr(colon + 1), "a_max"), knowledge};
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown delay kind '" + kind + "'");
      }
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown attack key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

std::string describe(const AttackSpec& attack) {
  std::ostringstream os;
  os << "chaff=" << attack.chaff_ratio << ",split=" << attack.subflows << ",delay=";
  std::visit(Overloaded{
                 [&](const NoDelay&) { os << "none"; },
                 [&](const UniformDelay& d) { os << "uniform:" << d.a_max; },
                 [&](const AdversarialDelay& d) { os << "adversarial:" << d.a_max; },
             },
             attack.delay);
  return os.str();
}

void WatermarkSpec::validate() const {
  if (!(w_max > 0.0) || !std::isfinite(w_max)) {
    throw Error(ErrorCode::InvalidArgument, "w_max must be positive");
  }
}

Simulated embed_watermark(const FlowTrace& flow, const WatermarkSpec& wm) {
  wm.validate();
  Rng key(wm.seed);
  std::vector<double> ts = copy_times(flow);
  for (double& t : ts) t += key.uniform(0.0, wm.w_max);
  return resort(std::move(ts), flow.label());
}

}  // namespace flowcorr
