#include "amfem/cli/rates.hpp"

#include "amfem/error.hpp"

#include <cmath>
#include <string>

namespace amfem::cli {

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw ValidationError("rate fit needs at least 3 points, got " + std::to_string(points.size()));
    const double n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw ValidationError("rate fit needs positive finite values");
        sx += std::log(x);
        sy += std::log(y);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    if (sxx <= 0.0) throw ValidationError("rate fit needs at least two distinct N");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (const auto& [x, y] : points) {
        const double r = std::log(y) - (fit.intercept + fit.slope * std::log(x));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.points = static_cast<int>(points.size());
    return fit;
}

RateFit fit_tail_rate(const std::vector<std::pair<double, double>>& points) {
    const std::size_t n = points.size();
    const std::size_t take = std::max<std::size_t>(3, (n + 1) / 2);
    if (n < take) return fit_rate(points);
    return fit_rate({points.end() - static_cast<std::ptrdiff_t>(take), points.end()});
}

}  // namespace amfem::cli
