#pragma once

#include <utility>
#include <vector>

namespace amfem::cli {

/// Least-squares line log(value) = intercept + slope * log(N).
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Root mean square of the log-log residuals.
    double residual = 0.0;
    int points = 0;
};

/// Requires at least 3 points with positive N and values (ValidationError otherwise).
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

/// Fits the last max(3, ceil(n/2)) points.
RateFit fit_tail_rate(const std::vector<std::pair<double, double>>& points);

}  // namespace amfem::cli
