#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

namespace amfem {

/// Quadrature on the reference triangle with vertices (0,0), (1,0), (0,1).
struct QuadratureRule {
    int degree = 0;
    std::vector<Eigen::Vector2d> points;  ///< reference coordinates
    std::vector<double> weights;          ///< sum to 1/2

    std::size_t size() const noexcept { return points.size(); }
    /// Barycentric coordinates (1 - x - y, x, y) of point q.
    std::array<double, 3> barycentric(std::size_t q) const;
};

/// Rule exact for polynomials of total degree <= `degree` (0..6). Built as a
/// collapsed (Duffy) product of Gauss-Legendre rules.
QuadratureRule triangle_quadrature(int degree);

/// Gauss-Legendre rule on [0,1] exact up to `degree`.
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;  ///< sum to 1
};

LineRule line_quadrature(int degree);

}  // namespace amfem
