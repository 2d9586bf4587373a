#include "amfem/quadrature.hpp"

#include "amfem/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <string>

namespace amfem {

namespace {

template <unsigned N>
LineRule gauss_on_unit_interval() {
    using G = boost::math::quadrature::gauss<double, N>;
    LineRule rule;
    // Boost stores the nonnegative abscissae of the symmetric rule on [-1, 1].
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            rule.points.push_back(0.5);
            rule.weights.push_back(0.5 * w[i]);
            continue;
        }
        rule.points.push_back(0.5 * (1.0 - x[i]));
        rule.weights.push_back(0.5 * w[i]);
        rule.points.push_back(0.5 * (1.0 + x[i]));
        rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
}

LineRule gauss_points(int n) {
    switch (n) {
        case 1: return gauss_on_unit_interval<1>();
        case 2: return gauss_on_unit_interval<2>();
        case 3: return gauss_on_unit_interval<3>();
        case 4: return gauss_on_unit_interval<4>();
        case 5: return gauss_on_unit_interval<5>();
        default: throw ValidationError("unsupported Gauss point count " + std::to_string(n));
    }
}

}  // namespace

std::array<double, 3> QuadratureRule::barycentric(std::size_t q) const {
    const auto& p = points[q];
    return {1.0 - p.x() - p.y(), p.x(), p.y()};
}

LineRule line_quadrature(int degree) {
    if (degree < 0 || degree > 9) throw ValidationError("line quadrature degree must be in [0, 9]");
    return gauss_points(degree / 2 + 1);
}

QuadratureRule triangle_quadrature(int degree) {
    if (degree < 0 || degree > 6)
        throw ValidationError("triangle quadrature degree must be in [0, 6], got " + std::to_string(degree));
    // x = u, y = v (1 - u): the Jacobian (1 - u) raises the degree in u by one.
    const LineRule g = gauss_points((degree + 1) / 2 + 1);
    QuadratureRule rule;
    rule.degree = degree;
    for (std::size_t i = 0; i < g.points.size(); ++i)
        for (std::size_t j = 0; j < g.points.size(); ++j) {
            const double u = g.points[i];
            const double v = g.points[j];
            rule.points.emplace_back(u, v * (1.0 - u));
            rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
        }
    return rule;
}

}  // namespace amfem
