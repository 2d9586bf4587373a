#pragma once

#include "amfem/elements.hpp"
#include "amfem/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>

namespace amfem {

/// Poisson: stress is a vector field, A = identity.
/// Stokes: stress is a 2x2 pseudostress (rows are H(div) fields),
/// A = deviatoric part, with the constraint int tr(sigma) = 0.
enum class ProblemKind { Poisson, Stokes };

inline int components(ProblemKind kind) { return kind == ProblemKind::Poisson ? 1 : 2; }
std::string to_string(ProblemKind kind);

/// Source term; component c of the result is f_c (Poisson reads x() only).
using Source = std::function<Eigen::Vector2d(const Point&)>;

/// Stress field with one row per component (Poisson uses row 0).
using StressField = std::function<Eigen::Matrix2d(const Point&)>;

/// Material operator applied to a stress value with `rows` active rows.
Eigen::Matrix2d apply_material(ProblemKind kind, const Eigen::Matrix2d& value);

struct ProblemSpec {
    ProblemKind kind = ProblemKind::Poisson;
    ElementFamily element{};
    Source source;
    /// Exact stress when known; empty otherwise.
    StressField exact_stress;
    std::string source_name;
};

/// Poisson on the unit square with u = sin(pi x) sin(pi y), sigma = grad u,
/// f = div sigma = -2 pi^2 sin(pi x) sin(pi y).
ProblemSpec manufactured_poisson(ElementFamily element);

/// Stokes on the unit square: velocity u = curl(g(x) g(y)) with
/// g(s) = s^2 (1-s)^2, pressure p = x^3 + y^3 - 1/2, pseudostress
/// sigma = grad u - p I, f = div sigma (rowwise).
ProblemSpec manufactured_stokes(ElementFamily element);

/// Constant source f = value (every component), no exact solution.
ProblemSpec constant_source(ProblemKind kind, ElementFamily element, double value = 1.0);

/// Named sources: "manufactured", "constant", "linear_x", "peak".
ProblemSpec builtin_problem(ProblemKind kind, ElementFamily element, const std::string& source,
                            double value = 1.0);

}  // namespace amfem
