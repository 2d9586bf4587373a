#include "amfem/problem.hpp"

#include "amfem/error.hpp"

#include <cmath>
#include <numbers>

namespace amfem {

std::string to_string(ProblemKind kind) { return kind == ProblemKind::Poisson ? "poisson" : "stokes"; }

Eigen::Matrix2d apply_material(ProblemKind kind, const Eigen::Matrix2d& value) {
    if (kind == ProblemKind::Poisson) return value;
    return value - 0.5 * value.trace() * Eigen::Matrix2d::Identity();
}

ProblemSpec manufactured_poisson(ElementFamily element) {
    using std::numbers::pi;
    ProblemSpec spec;
    spec.kind = ProblemKind::Poisson;
    spec.element = element;
    spec.source_name = "manufactured";
    spec.source = [](const Point& p) {
        return Eigen::Vector2d(-2.0 * pi * pi * std::sin(pi * p.x()) * std::sin(pi * p.y()), 0.0);
    };
    spec.exact_stress = [](const Point& p) {
        Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
        s(0, 0) = pi * std::cos(pi * p.x()) * std::sin(pi * p.y());
        s(0, 1) = pi * std::sin(pi * p.x()) * std::cos(pi * p.y());
        return s;
    };
    return spec;
}

namespace {

// g(s) = s^2 (1 - s)^2 and its derivatives.
struct Bump {
    double g, d1, d2, d3;
    explicit Bump(double s)
        : g(s * s * (1 - s) * (1 - s)),
          d1(2 * s - 6 * s * s + 4 * s * s * s),
          d2(2 - 12 * s + 12 * s * s),
          d3(-12 + 24 * s) {}
};

}  // namespace

ProblemSpec manufactured_stokes(ElementFamily element) {
    ProblemSpec spec;
    spec.kind = ProblemKind::Stokes;
    spec.element = element;
    spec.source_name = "manufactured";
    spec.source = [](const Point& p) {
        const Bump gx(p.x()), gy(p.y());
        const double px = 3 * p.x() * p.x();
        const double py = 3 * p.y() * p.y();
        return Eigen::Vector2d(gx.d2 * gy.d1 + gx.g * gy.d3 - px, -gx.d3 * gy.g - gx.d1 * gy.d2 - py);
    };
    spec.exact_stress = [](const Point& p) {
        const Bump gx(p.x()), gy(p.y());
        const double pressure = p.x() * p.x() * p.x() + p.y() * p.y() * p.y() - 0.5;
        Eigen::Matrix2d s;
        s << gx.d1 * gy.d1 - pressure, gx.g * gy.d2,  //
            -gx.d2 * gy.g, -gx.d1 * gy.d1 - pressure;
        return s;
    };
    return spec;
}

ProblemSpec constant_source(ProblemKind kind, ElementFamily element, double value) {
    ProblemSpec spec;
    spec.kind = kind;
    spec.element = element;
    spec.source_name = "constant";
    const bool stokes = kind == ProblemKind::Stokes;
    spec.source = [value, stokes](const Point&) { return Eigen::Vector2d(value, stokes ? value : 0.0); };
    return spec;
}

ProblemSpec builtin_problem(ProblemKind kind, ElementFamily element, const std::string& source,
                            double value) {
    element.validate();
    if (source == "manufactured")
        return kind == ProblemKind::Poisson ? manufactured_poisson(element) : manufactured_stokes(element);
    if (source == "constant") return constant_source(kind, element, value);
    ProblemSpec spec;
    spec.kind = kind;
    spec.element = element;
    spec.source_name = source;
    const bool stokes = kind == ProblemKind::Stokes;
    if (source == "linear_x") {
        spec.source = [stokes](const Point& p) { return Eigen::Vector2d(p.x(), stokes ? p.x() : 0.0); };
    } else if (source == "peak") {
        // Smooth bump centred at (0.3, 0.4).
        spec.source = [stokes](const Point& p) {
            const double r2 = (p - Point(0.3, 0.4)).squaredNorm();
            const double v = std::exp(-100.0 * r2);
            return Eigen::Vector2d(v, stokes ? v : 0.0);
        };
    } else {
        throw ValidationError("unknown source '" + source + "'");
    }
    return spec;
}

}  // namespace amfem
