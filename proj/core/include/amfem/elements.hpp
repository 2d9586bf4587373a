#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace amfem {

enum class Family { RaviartThomas, BrezziDouglasMarini };

/// RT_k uses P_k^2 + x P_k; BDM_k uses P_{k+1}^2. Both pair with
/// discontinuous P_k displacements.
struct ElementFamily {
    Family family = Family::RaviartThomas;
    int order = 0;

    /// Throws ValidationError unless order is 0 or 1.
    void validate() const;
    std::string name() const;

    friend bool operator==(const ElementFamily&, const ElementFamily&) = default;
};

/// Vector-valued polynomial of total degree <= 2 on the reference triangle,
/// stored as coefficients of {1, x, y, x^2, xy, y^2} per component.
struct VectorPolynomial {
    Eigen::Matrix<double, 2, 6> coeff = Eigen::Matrix<double, 2, 6>::Zero();

    Eigen::Vector2d value(const Eigen::Vector2d& p) const;
    /// Row i holds the gradient of component i.
    Eigen::Matrix2d jacobian(const Eigen::Vector2d& p) const;
    double divergence(const Eigen::Vector2d& p) const;
};

/// Local H(div) basis on the reference triangle.
///
/// Degrees of freedom, in local order: for each local edge i = 0, 1, 2 (the
/// edge opposite vertex i, traversed counterclockwise) the moments
/// int_E (phi . n) q_m(t) ds for m = 0 .. edge_dofs()-1, where n is the outward
/// normal, t in [0,1] the counterclockwise edge parameter and q_m the
/// Legendre polynomials on [0,1] (1, 2t - 1); then the interior moments
/// int_K phi . e_c for the RT_1 element. The basis is the dual of these
/// functionals, computed by inverting the local Vandermonde matrix.
class StressElement {
public:
    explicit StressElement(ElementFamily family);

    const ElementFamily& family() const noexcept { return family_; }
    int size() const noexcept { return static_cast<int>(basis_.size()); }
    int edge_dofs() const noexcept { return edge_dofs_; }
    int interior_dofs() const noexcept { return interior_dofs_; }
    /// Polynomial degree of the basis functions.
    int degree() const noexcept;

    const VectorPolynomial& basis(int i) const { return basis_[static_cast<std::size_t>(i)]; }

    /// Applies the local degrees of freedom to a reference field given
    /// pointwise.
    Eigen::VectorXd apply_dofs(const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& field) const;

    /// Local edge and Legendre degree of an edge DOF; (-1, c) for interior
    /// DOF with direction c.
    std::pair<int, int> dof_kind(int i) const;

private:
    ElementFamily family_;
    int edge_dofs_ = 0;
    int interior_dofs_ = 0;
    std::vector<VectorPolynomial> basis_;
};

/// Scalar P_k basis on the reference triangle: {1} or {1, x, y}.
class DisplacementElement {
public:
    explicit DisplacementElement(int order);

    int order() const noexcept { return order_; }
    int size() const noexcept { return (order_ + 1) * (order_ + 2) / 2; }
    double value(int i, const Eigen::Vector2d& p) const;
    Eigen::Vector2d gradient(int i, const Eigen::Vector2d& p) const;

private:
    int order_;
};

/// Affine map x = origin + J xhat from the reference triangle onto a
/// physical triangle (a, b, c) with a -> (0,0), b -> (1,0), c -> (0,1).
struct AffineMap {
    Eigen::Vector2d origin;
    Eigen::Matrix2d jacobian;
    Eigen::Matrix2d inverse;
    double det = 0.0;

    /// Throws ValidationError for a degenerate triangle.
    AffineMap(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

    Eigen::Vector2d to_physical(const Eigen::Vector2d& xhat) const { return origin + jacobian * xhat; }
    Eigen::Vector2d to_reference(const Eigen::Vector2d& x) const { return inverse * (x - origin); }
};

/// Contravariant Piola transform: phi(x) = J phihat(xhat) / det J.
Eigen::Vector2d piola_value(const AffineMap& map, const Eigen::Vector2d& reference_value);
/// Physical Jacobian J Dphihat J^{-1} / det J of a Piola-mapped field.
Eigen::Matrix2d piola_jacobian(const AffineMap& map, const Eigen::Matrix2d& reference_jacobian);
/// div phi = div phihat / det J.
double piola_divergence(const AffineMap& map, double reference_divergence);
/// Pulls a physical field value back: det J J^{-1} phi.
Eigen::Vector2d piola_pullback(const AffineMap& map, const Eigen::Vector2d& physical_value);

/// Reference triangle vertices (0,0), (1,0), (0,1).
const std::array<Eigen::Vector2d, 3>& reference_vertices();

}  // namespace amfem
