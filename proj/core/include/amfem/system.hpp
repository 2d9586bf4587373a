#pragma once

#include "amfem/mesh.hpp"
#include "amfem/problem.hpp"
#include "amfem/spaces.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <functional>
#include <memory>

namespace amfem {

/// Source evaluated on a given triangle (lets piecewise data follow the mesh).
using LocalSource = std::function<Eigen::Vector2d(int triangle, const Point& x)>;

/// Discrete saddle-point problem
///   (A sigma, tau) - (div tau, u) = 0,   (div sigma, v) = (f, v)
/// plus, for Stokes, one multiplier enforcing int tr(sigma) = 0.
struct SaddleSystem {
    ProblemKind kind = ProblemKind::Poisson;
    Eigen::SparseMatrix<double> mass;        ///< M_ij = (A phi_j, phi_i)
    Eigen::SparseMatrix<double> divergence;  ///< B, n_u x n_sigma
    Eigen::VectorXd trace;                   ///< g_i = int tr(phi_i); empty for Poisson
    Eigen::VectorXd load;                    ///< F_j = (f, v_j)

    int n_sigma() const { return static_cast<int>(mass.rows()); }
    int n_u() const { return static_cast<int>(divergence.rows()); }
    bool constrained() const { return trace.size() > 0; }
    int size() const { return n_sigma() + n_u() + (constrained() ? 1 : 0); }

    /// Symmetric block matrix [[M, -B^T, g^T], [-B, 0, 0], [g, 0, 0]].
    Eigen::SparseMatrix<double> matrix() const;
    /// Right-hand side [0, -F, 0] matching matrix().
    Eigen::VectorXd rhs() const;
};

/// Stress mass matrix, A-weighted when `material` is Stokes.
Eigen::SparseMatrix<double> stress_mass(const Mesh& mesh, const DofMap& dofs, ProblemKind material);

/// g_i = int tr(phi_i) over the domain (Stokes layout).
Eigen::VectorXd trace_row(const Mesh& mesh, const DofMap& dofs);

/// F_j = (f, v_j) by quadrature of degree 2k + 4.
Eigen::VectorXd load_vector(const Mesh& mesh, const DofMap& dofs, const LocalSource& f);

SaddleSystem assemble(const Mesh& mesh, const DofMap& dofs, const ProblemSpec& problem);
SaddleSystem assemble(const Mesh& mesh, const DofMap& dofs, ProblemKind kind, const LocalSource& f);

/// Sparse LU factorization of the saddle-point matrix, reusable for several
/// right-hand sides.
class SaddleSolver {
public:
    /// Throws SingularSystemError when the factorization fails.
    explicit SaddleSolver(const SaddleSystem& system);

    /// Solves with the system's own load vector.
    FieldPair solve() const;
    /// Solves with a different load vector F.
    FieldPair solve(const Eigen::VectorXd& load) const;

    /// Relative residual of the last solve.
    double last_residual() const noexcept { return residual_; }

private:
    const SaddleSystem* system_;
    Eigen::SparseMatrix<double> matrix_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>> lu_;
    mutable double residual_ = 0.0;
};

/// Relative residual tolerance for accepting a solve.
inline constexpr double kSolveTolerance = 1e-10;

FieldPair solve(const SaddleSystem& system);

/// Assembles and solves on one mesh.
struct Solution {
    DofMap dofs;
    FieldPair field;
};
Solution solve_problem(const Mesh& mesh, const ProblemSpec& problem);

/// ||sigma_h||_A = (A sigma_h, sigma_h)^{1/2}, by elementwise quadrature.
double energy_norm(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma);

/// ||sigma - sigma_h||_A against a given stress field.
double energy_error(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma, const StressField& exact);

/// Plain L2 norm of a discrete stress (all rows).
double stress_l2_norm(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma);

}  // namespace amfem
