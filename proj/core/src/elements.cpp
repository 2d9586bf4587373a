#include "amfem/elements.hpp"

#include "amfem/error.hpp"
#include "amfem/quadrature.hpp"

#include <Eigen/LU>

#include <cmath>

namespace amfem {

namespace {

Eigen::Matrix<double, 6, 1> monomials(const Eigen::Vector2d& p) {
    const double x = p.x(), y = p.y();
    Eigen::Matrix<double, 6, 1> m;
    m << 1.0, x, y, x * x, x * y, y * y;
    return m;
}

Eigen::Matrix<double, 6, 2> monomial_gradients(const Eigen::Vector2d& p) {
    const double x = p.x(), y = p.y();
    Eigen::Matrix<double, 6, 2> g;
    g << 0, 0,  //
        1, 0,   //
        0, 1,   //
        2 * x, 0,  //
        y, x,   //
        0, 2 * y;
    return g;
}

double legendre01(int m, double t) { return m == 0 ? 1.0 : 2.0 * t - 1.0; }

VectorPolynomial component(int c, int monomial) {
    VectorPolynomial p;
    p.coeff(c, monomial) = 1.0;
    return p;
}

// Ansatz space spanned by monomial vector fields.
std::vector<VectorPolynomial> ansatz(const ElementFamily& family) {
    std::vector<VectorPolynomial> out;
    if (family.family == Family::RaviartThomas && family.order == 0) {
        out.push_back(component(0, 0));
        out.push_back(component(1, 0));
        VectorPolynomial xvec;  // (x, y)
        xvec.coeff(0, 1) = 1.0;
        xvec.coeff(1, 2) = 1.0;
        out.push_back(xvec);
        return out;
    }
    // P_1^2
    for (int c = 0; c < 2; ++c)
        for (int m = 0; m < 3; ++m) out.push_back(component(c, m));
    if (family.family == Family::RaviartThomas) {
        VectorPolynomial xx;  // x * (x, y)
        xx.coeff(0, 3) = 1.0;
        xx.coeff(1, 4) = 1.0;
        VectorPolynomial xy;  // y * (x, y)
        xy.coeff(0, 4) = 1.0;
        xy.coeff(1, 5) = 1.0;
        out.push_back(xx);
        out.push_back(xy);
    }
    return out;
}

}  // namespace

void ElementFamily::validate() const {
    if (order < 0 || order > 1)
        throw ValidationError("element order must be 0 or 1, got " + std::to_string(order));
}

std::string ElementFamily::name() const {
    return (family == Family::RaviartThomas ? "RT" : "BDM") + std::to_string(order);
}

Eigen::Vector2d VectorPolynomial::value(const Eigen::Vector2d& p) const { return coeff * monomials(p); }

Eigen::Matrix2d VectorPolynomial::jacobian(const Eigen::Vector2d& p) const {
    return coeff * monomial_gradients(p);
}

double VectorPolynomial::divergence(const Eigen::Vector2d& p) const { return jacobian(p).trace(); }

const std::array<Eigen::Vector2d, 3>& reference_vertices() {
    static const std::array<Eigen::Vector2d, 3> v{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0),
                                                  Eigen::Vector2d(0, 1)};
    return v;
}

StressElement::StressElement(ElementFamily family) : family_(family) {
    family_.validate();
    if (family_.family == Family::RaviartThomas) {
        edge_dofs_ = family_.order + 1;
        interior_dofs_ = family_.order == 1 ? 2 : 0;
    } else {
        if (family_.order != 0)
            throw ValidationError("BDM is supported for order 0 (P1 stresses) only");
        edge_dofs_ = 2;
        interior_dofs_ = 0;
    }
    const auto space = ansatz(family_);
    const auto n = static_cast<Eigen::Index>(space.size());
    if (n != 3 * edge_dofs_ + interior_dofs_) throw Error("internal: ansatz/DOF count mismatch");
    Eigen::MatrixXd vandermonde(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& p = space[static_cast<std::size_t>(j)];
        vandermonde.col(j) = apply_dofs([&p](const Eigen::Vector2d& x) { return p.value(x); });
    }
    const Eigen::MatrixXd coeffs = vandermonde.inverse();
    basis_.resize(space.size());
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l)
            basis_[static_cast<std::size_t>(j)].coeff += coeffs(l, j) * space[static_cast<std::size_t>(l)].coeff;
}

int StressElement::degree() const noexcept { return family_.order + 1; }

std::pair<int, int> StressElement::dof_kind(int i) const {
    if (i < 3 * edge_dofs_) return {i / edge_dofs_, i % edge_dofs_};
    return {-1, i - 3 * edge_dofs_};
}

Eigen::VectorXd StressElement::apply_dofs(
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& field) const {
    Eigen::VectorXd dofs(3 * edge_dofs_ + interior_dofs_);
    const auto& v = reference_vertices();
    const LineRule line = line_quadrature(7);
    for (int e = 0; e < 3; ++e) {
        const Eigen::Vector2d& a = v[static_cast<std::size_t>((e + 1) % 3)];
        const Eigen::Vector2d& b = v[static_cast<std::size_t>((e + 2) % 3)];
        const Eigen::Vector2d d = b - a;
        const Eigen::Vector2d scaled_normal(d.y(), -d.x());  // outward normal times |E|
        for (int m = 0; m < edge_dofs_; ++m) {
            double sum = 0.0;
            for (std::size_t q = 0; q < line.points.size(); ++q) {
                const double t = line.points[q];
                sum += line.weights[q] * field(a + t * d).dot(scaled_normal) * legendre01(m, t);
            }
            dofs(e * edge_dofs_ + m) = sum;
        }
    }
    if (interior_dofs_ > 0) {
        const QuadratureRule rule = triangle_quadrature(6);
        Eigen::Vector2d moment = Eigen::Vector2d::Zero();
        for (std::size_t q = 0; q < rule.size(); ++q) moment += rule.weights[q] * field(rule.points[q]);
        dofs(3 * edge_dofs_) = moment.x();
        dofs(3 * edge_dofs_ + 1) = moment.y();
    }
    return dofs;
}

DisplacementElement::DisplacementElement(int order) : order_(order) {
    if (order < 0 || order > 1)
        throw ValidationError("displacement order must be 0 or 1, got " + std::to_string(order));
}

double DisplacementElement::value(int i, const Eigen::Vector2d& p) const {
    switch (i) {
        case 0: return 1.0;
        case 1: return p.x();
        default: return p.y();
    }
}

Eigen::Vector2d DisplacementElement::gradient(int i, const Eigen::Vector2d&) const {
    switch (i) {
        case 0: return Eigen::Vector2d::Zero();
        case 1: return Eigen::Vector2d::UnitX();
        default: return Eigen::Vector2d::UnitY();
    }
}

AffineMap::AffineMap(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
    : origin(a) {
    jacobian.col(0) = b - a;
    jacobian.col(1) = c - a;
    det = jacobian.determinant();
    const double scale = std::max((b - a).squaredNorm(), (c - a).squaredNorm());
    if (!(std::abs(det) > 1e-14 * scale)) throw ValidationError("degenerate (zero-area) triangle");
    inverse = jacobian.inverse();
}

Eigen::Vector2d piola_value(const AffineMap& map, const Eigen::Vector2d& reference_value) {
    return map.jacobian * reference_value / map.det;
}

Eigen::Matrix2d piola_jacobian(const AffineMap& map, const Eigen::Matrix2d& reference_jacobian) {
    return map.jacobian * reference_jacobian * map.inverse / map.det;
}

double piola_divergence(const AffineMap& map, double reference_divergence) {
    return reference_divergence / map.det;
}

Eigen::Vector2d piola_pullback(const AffineMap& map, const Eigen::Vector2d& physical_value) {
    return map.det * (map.inverse * physical_value);
}

}  // namespace amfem
