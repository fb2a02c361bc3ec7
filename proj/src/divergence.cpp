#include "flowcorr/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowcorr/error.hpp"

namespace flowcorr {

Histogram::Histogram(std::vector<double> bin_edges, std::vector<double> masses)
    : edges_(std::move(bin_edges)), masses_(std::move(masses)) {
  if (masses_.empty() || edges_.size() != masses_.size() + 1) {
    throw Error(ErrorCode::InvalidArgument, "histogram needs len(edges) = len(masses) + 1 >= 2");
  }
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "histogram edges must be strictly increasing");
    }
  }
  double total = 0.0;
  for (double m : masses_) {
    if (!(m >= 0.0)) throw Error(ErrorCode::InvalidArgument, "histogram masses must be >= 0");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "histogram masses must sum to 1");
  }
}

std::vector<double> equal_mass_edges(std::span<const double> pooled, std::size_t bins) {
  if (pooled.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least two points to bin");
  }
  std::vector<double> sorted(pooled.begin(), pooled.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (bins == 0) bins = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  bins = std::max<std::size_t>(bins, 1);

  std::vector<double> edges;
  edges.reserve(bins + 1);
  edges.push_back(sorted.front());
  for (std::size_t k = 1; k < bins; ++k) {
    const double e = sorted[(k * n) / bins];
    if (e > edges.back()) edges.push_back(e);
  }
  if (sorted.back() > edges.back()) {
    edges.push_back(sorted.back());
  } else if (edges.size() == 1) {
    throw Error(ErrorCode::DegenerateData, "all pooled values are identical");
  }
  return edges;
}

namespace {

std::size_t bin_index(std::span<const double> edges, double x) {
  // Interior edges split bins; values beyond either end fall in the end bins.
  const auto interior_begin = edges.begin() + 1;
  const auto interior_end = edges.end() - 1;
  return static_cast<std::size_t>(std::upper_bound(interior_begin, interior_end, x) -
                                  interior_begin);
}

void require_same_edges(const Histogram& p, const Histogram& q) {
  const auto a = p.bin_edges();
  const auto b = q.bin_edges();
  if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) {
    throw Error(ErrorCode::InvalidArgument, "histograms have different bin edges");
  }
}

}  // namespace

Histogram histogram_of(std::span<const double> data, std::vector<double> edges,
                       double smoothing) {
  if (edges.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least one bin");
  std::vector<double> counts(edges.size() - 1, smoothing);
  for (double x : data) counts[bin_index(edges, x)] += 1.0;
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "empty histogram");
  for (auto& c : counts) c /= total;
  return Histogram(std::move(edges), std::move(counts));
}

Histogram histogram_of(const DistSpec& model, std::vector<double> edges) {
  if (edges.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least one bin");
  const std::size_t k = edges.size() - 1;
  std::vector<double> masses(k);
  double prev = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double next = (i + 1 == k) ? 1.0 : cdf(model, edges[i + 1]);
    masses[i] = std::max(0.0, next - prev);
    prev = std::max(prev, next);
  }
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  for (auto& m : masses) m /= total;
  return Histogram(std::move(edges), std::move(masses));
}

double kld(const Histogram& p, const Histogram& q) {
  require_same_edges(p, q);
  const auto pm = p.masses();
  const auto qm = q.masses();
  double d = 0.0;
  for (std::size_t i = 0; i < pm.size(); ++i) {
    if (pm[i] == 0.0) continue;
    if (qm[i] == 0.0) {
      throw Error(ErrorCode::SupportMismatch,
                  "p has mass in bin " + std::to_string(i) + " where q has none");
    }
    d += pm[i] * std::log(pm[i] / qm[i]);
  }
  return std::max(d, 0.0);
}

double jsd_sqrt(const Histogram& p, const Histogram& q) {
  require_same_edges(p, q);
  const auto pm = p.masses();
  const auto qm = q.masses();
  double js = 0.0;
  for (std::size_t i = 0; i < pm.size(); ++i) {
    const double m = 0.5 * (pm[i] + qm[i]);
    const double a = pm[i] > 0.0 ? pm[i] * std::log(pm[i] / m) : 0.0;
    const double b = qm[i] > 0.0 ? qm[i] * std::log(qm[i] / m) : 0.0;
    js += 0.5 * (a + b);
  }
  return std::sqrt(std::max(js, 0.0));
}

}  // namespace flowcorr
