#pragma once

#include "amfem/elements.hpp"
#include "amfem/mesh.hpp"
#include "amfem/problem.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <optional>
#include <vector>

namespace amfem {

/// Global numbering of the stress space Sigma_h and the displacement space
/// U_h on one mesh.
///
/// Scalar stress layout: edge DOFs first (edges in edge-table order, the m-th
/// Legendre moment of edge e at e * edge_dofs + m), then interior DOFs per
/// triangle. Global edge moments use the lo -> hi edge direction and the
/// normal (t_y, -t_x). Stokes stacks one scalar layout per stress row (and per
/// displacement component) and adds a single multiplier for int tr(tau) = 0.
class DofMap {
public:
    DofMap(const Mesh& mesh, ElementFamily family, ProblemKind kind);

    ProblemKind kind() const noexcept { return kind_; }
    const ElementFamily& family() const noexcept { return family_; }
    int components() const noexcept { return amfem::components(kind_); }
    const EdgeTable& edges() const noexcept { return edges_; }

    /// Stress DOFs over all rows (multiplier excluded).
    int n_sigma() const noexcept { return components() * n_sigma_row_; }
    int n_sigma_row() const noexcept { return n_sigma_row_; }
    int n_u() const noexcept { return components() * n_u_scalar_; }
    int n_u_scalar() const noexcept { return n_u_scalar_; }
    bool has_constraint() const noexcept { return kind_ == ProblemKind::Stokes; }
    int n_multiplier() const noexcept { return has_constraint() ? 1 : 0; }
    /// Size of the saddle-point system: [sigma, u, multiplier].
    int n_total() const noexcept { return n_sigma() + n_u() + n_multiplier(); }
    /// Index of the trace-constraint row in the saddle-point system, or -1.
    int constraint_index() const noexcept { return has_constraint() ? n_sigma() + n_u() : -1; }

    int stress_local_size() const noexcept { return stress_local_; }
    int displacement_local_size() const noexcept { return disp_local_; }

    /// Global stress index of local basis i of triangle t, stress row c.
    int stress_index(int t, int i, int c = 0) const {
        return c * n_sigma_row_ + stress_index_[static_cast<std::size_t>(t * stress_local_ + i)];
    }
    double stress_sign(int t, int i) const { return stress_sign_[static_cast<std::size_t>(t * stress_local_ + i)]; }
    int displacement_index(int t, int j, int c = 0) const { return c * n_u_scalar_ + t * disp_local_ + j; }

private:
    ProblemKind kind_;
    ElementFamily family_;
    EdgeTable edges_;
    int stress_local_ = 0;
    int disp_local_ = 0;
    int n_sigma_row_ = 0;
    int n_u_scalar_ = 0;
    std::vector<int> stress_index_;
    std::vector<double> stress_sign_;
};

DofMap build_dofmap(const Mesh& mesh, ElementFamily family, ProblemKind kind);

/// Discrete solution pair (sigma_h, u_h) plus the trace multiplier.
struct FieldPair {
    Eigen::VectorXd sigma;
    Eigen::VectorXd u;
    double multiplier = 0.0;
};

/// Stress value and derivatives of a discrete field at a point.
struct StressSample {
    Eigen::Matrix2d value = Eigen::Matrix2d::Zero();    ///< row c = stress row c
    std::array<Eigen::Matrix2d, 2> gradient{Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
    Eigen::Vector2d divergence = Eigen::Vector2d::Zero();  ///< per row
};

/// Physical basis values of one triangle at a point (orientation signs applied).
struct LocalStressBasis {
    std::vector<Eigen::Vector2d> value;
    std::vector<Eigen::Matrix2d> jacobian;
    std::vector<double> divergence;
};

/// Evaluates basis functions and discrete fields on the triangles of a mesh.
class FieldEvaluator {
public:
    FieldEvaluator(const Mesh& mesh, const DofMap& dofs);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const DofMap& dofs() const noexcept { return *dofs_; }
    const AffineMap& map(int t) const { return maps_[static_cast<std::size_t>(t)]; }
    const StressElement& stress_element() const noexcept { return stress_; }
    const DisplacementElement& displacement_element() const noexcept { return disp_; }

    void stress_basis(int t, const Eigen::Vector2d& xhat, LocalStressBasis& out) const;
    StressSample stress(int t, const Eigen::Vector2d& xhat, const Eigen::VectorXd& sigma) const;
    /// Displacement value per component.
    Eigen::Vector2d displacement(int t, const Eigen::Vector2d& xhat, const Eigen::VectorXd& u) const;
    /// Row c = physical gradient of displacement component c.
    Eigen::Matrix2d displacement_gradient(int t, const Eigen::Vector2d& xhat, const Eigen::VectorXd& u) const;

private:
    const Mesh* mesh_;
    const DofMap* dofs_;
    StressElement stress_;
    DisplacementElement disp_;
    std::vector<AffineMap> maps_;
};

/// Default quadrature degree for order-k integrals: 2k + 4.
inline int default_quadrature_degree(int order) { return 2 * order + 4; }

/// Elementwise L2 projection Q_h f onto P_k (per component), in the
/// displacement layout of `dofs`.
Eigen::VectorXd project_source(const Mesh& mesh, const DofMap& dofs, const Source& f);

/// Block-diagonal displacement mass matrix (n_u x n_u).
Eigen::SparseMatrix<double> displacement_mass(const Mesh& mesh, const DofMap& dofs);

/// B with (B sigma)_j = (div sigma_h, v_j); n_u x n_sigma.
Eigen::SparseMatrix<double> divergence_matrix(const Mesh& mesh, const DofMap& dofs);

/// Mesh-dependent discrete H1 norm: broken gradients on the triangles of G
/// plus h_E^{-1} ||[v]||^2 on every edge of a triangle of G, each edge once.
/// Boundary edges use the one-sided trace. G = all triangles when omitted.
double discrete_h1_norm(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& u,
                        const std::optional<std::vector<int>>& subset = std::nullopt);

/// Gram matrix of the discrete H1 norm over the whole mesh (n_u x n_u).
Eigen::SparseMatrix<double> discrete_h1_gram(const Mesh& mesh, const DofMap& dofs);

/// Canonical interpolant: applies the degrees of freedom of Sigma_h to a
/// stress field. Reproduces members of Sigma_h exactly.
Eigen::VectorXd interpolate_stress(const Mesh& mesh, const DofMap& dofs, const StressField& field);

/// Represents a coarse discrete stress on a refinement of its mesh. Exact
/// because the spaces are nested.
Eigen::VectorXd prolong_stress(const Mesh& coarse, const DofMap& coarse_dofs, const Eigen::VectorXd& sigma,
                               const Mesh& fine, const DofMap& fine_dofs);

/// Same, with a precomputed fine -> coarse triangle map.
Eigen::VectorXd prolong_stress(const Mesh& coarse, const DofMap& coarse_dofs, const Eigen::VectorXd& sigma,
                               const Mesh& fine, const DofMap& fine_dofs, const std::vector<int>& owner);

/// ||div sigma_h - fh||_{L2} where fh is given in displacement layout.
double divergence_residual(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma,
                           const Eigen::VectorXd& fh);

/// L2 norm of a displacement-layout field.
double displacement_l2_norm(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& u);

}  // namespace amfem
