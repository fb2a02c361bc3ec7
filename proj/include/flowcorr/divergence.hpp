#pragma once

#include <span>
#include <vector>

#include "flowcorr/distributions.hpp"

namespace flowcorr {

/// Discretized distribution: masses[i] covers [bin_edges[i], bin_edges[i+1]).
/// The outer bins absorb everything below the first / above the last edge.
class Histogram {
public:
  Histogram(std::vector<double> bin_edges, std::vector<double> masses);

  std::span<const double> bin_edges() const noexcept { return edges_; }
  std::span<const double> masses() const noexcept { return masses_; }
  std::size_t bins() const noexcept { return masses_.size(); }

private:
  std::vector<double> edges_;
  std::vector<double> masses_;
};

/// Add-half smoothing applied to bin counts before normalizing.
inline constexpr double kCountSmoothing = 0.5;

/// Equal-mass bin edges from the empirical quantiles of `pooled`:
/// ceil(sqrt(n)) bins unless `bins` is given. Duplicate quantiles (ties in
/// the sample) are collapsed, so fewer bins may result.
std::vector<double> equal_mass_edges(std::span<const double> pooled, std::size_t bins = 0);

/// Empirical histogram on the given edges with count smoothing.
Histogram histogram_of(std::span<const double> data, std::vector<double> edges,
                       double smoothing = kCountSmoothing);

/// Model masses on the given edges; the first and last bins extend to the
/// ends of the support.
Histogram histogram_of(const DistSpec& model, std::vector<double> edges);

/// Kullback-Leibler divergence D(p || q) in nats. Throws SupportMismatch
/// if p has mass in a bin where q has none, InvalidArgument when the edges
/// differ.
double kld(const Histogram& p, const Histogram& q);

/// Square root of the Jensen-Shannon divergence (nats), in [0, sqrt(log 2)].
double jsd_sqrt(const Histogram& p, const Histogram& q);

}  // namespace flowcorr
