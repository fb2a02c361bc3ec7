#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowcorr/distributions.hpp"

namespace flowcorr {

enum class Estimator { Robust, Mle };

std::string_view to_string(Estimator e);

double median(std::span<const double> data);
/// Median absolute deviation about the median (unscaled).
double median_absolute_deviation(std::span<const double> data);

/// MAD of the standard (mu = 0, sigma = 1) member of a location-scale
/// family; scale = MAD / constant.
double mad_consistency_constant(Family family);

/// Median/MAD estimates for Cauchy, Gumbel, Laplace, Logistic and Normal.
/// Location is the sample median (for the skewed Gumbel, mu is shifted from
/// the median by sigma * log(log 2) so that it is the mode parameter).
/// Throws DegenerateData when the MAD is zero.
DistSpec fit_robust(std::span<const double> data, Family family);

struct MleOptions {
  /// Pareto only: use this lower bound instead of min(data).
  std::optional<double> fixed_x_m;
  /// Convergence threshold on the per-sample log-likelihood gradient.
  double gradient_tolerance = 1e-8;
  int max_iterations = 200;
};

/// Maximum-likelihood fit for Exponential, Pareto, LogNormal, LogLogistic and
/// Weibull. Closed form where one exists; damped Newton otherwise.
DistSpec fit_mle(std::span<const double> data, Family family, const MleOptions& options = {});

/// Routes to fit_robust or fit_mle.
DistSpec fit(std::span<const double> data, Family family, Estimator estimator,
             const MleOptions& options = {});

struct FitScore {
  DistSpec fitted;
  double jsd_sqrt;
};

/// Per-family goodness of fit (lower is better). Families whose fit fails
/// are listed in `failures` instead of aborting the whole table.
struct GoodnessTable {
  std::map<Family, FitScore> scores;
  std::map<Family, std::string> failures;

  std::optional<Family> best() const;
};

/// Minimum sample size for histogram-based scoring.
inline constexpr std::size_t kMinGoodnessSamples = 100;

/// Fits each family to `data` and scores it by jsd_sqrt between the data
/// histogram and the model's masses on equal-mass bins of the data.
GoodnessTable goodness_table(std::span<const double> data, std::span<const Family> families,
                             Estimator estimator, const MleOptions& options = {});

/// Score of an already-fitted model against data (same binning as above).
double goodness_of_fit(std::span<const double> data, const DistSpec& model);

}  // namespace flowcorr
