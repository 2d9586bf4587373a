#include "amfem/system.hpp"

#include "amfem/error.hpp"
#include "amfem/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

namespace amfem {

namespace {

// Pointwise (A tau_b, tau_a) for tau_a = e_a (x) phi_i, tau_b = e_b (x) phi_j.
double material_product(ProblemKind kind, int a, const Eigen::Vector2d& phi_i, int b, const Eigen::Vector2d& phi_j) {
    double v = a == b ? phi_i.dot(phi_j) : 0.0;
    if (kind == ProblemKind::Stokes) v -= 0.5 * phi_i(a) * phi_j(b);
    return v;
}

double material_energy(ProblemKind kind, const Eigen::Matrix2d& value) {
    if (kind == ProblemKind::Poisson) return value.row(0).squaredNorm();
    const Eigen::Matrix2d dev = value - 0.5 * value.trace() * Eigen::Matrix2d::Identity();
    return dev.squaredNorm();
}

}  // namespace

Eigen::SparseMatrix<double> stress_mass(const Mesh& mesh, const DofMap& dofs, ProblemKind material) {
    const FieldEvaluator eval(mesh, dofs);
    const QuadratureRule rule = triangle_quadrature(default_quadrature_degree(dofs.family().order));
    const int ns = dofs.stress_local_size();
    const int nc = dofs.components();
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(mesh.num_triangles() * static_cast<std::size_t>(ns * ns * nc * nc));
    LocalStressBasis basis;
    Eigen::MatrixXd local(ns * nc, ns * nc);
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        local.setZero();
        const double jw = std::abs(eval.map(t).det);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            eval.stress_basis(t, rule.points[q], basis);
            const double w = rule.weights[q] * jw;
            for (int a = 0; a < nc; ++a)
                for (int i = 0; i < ns; ++i)
                    for (int b = 0; b < nc; ++b)
                        for (int j = 0; j < ns; ++j)
                            local(a * ns + i, b * ns + j) +=
                                w * material_product(material, a, basis.value[static_cast<std::size_t>(i)], b,
                                                     basis.value[static_cast<std::size_t>(j)]);
        }
        for (int a = 0; a < nc; ++a)
            for (int i = 0; i < ns; ++i)
                for (int b = 0; b < nc; ++b)
                    for (int j = 0; j < ns; ++j)
                        entries.emplace_back(dofs.stress_index(t, i, a), dofs.stress_index(t, j, b),
                                             local(a * ns + i, b * ns + j));
    }
    Eigen::SparseMatrix<double> out(dofs.n_sigma(), dofs.n_sigma());
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

Eigen::VectorXd trace_row(const Mesh& mesh, const DofMap& dofs) {
    const FieldEvaluator eval(mesh, dofs);
    const QuadratureRule rule = triangle_quadrature(default_quadrature_degree(dofs.family().order));
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dofs.n_sigma());
    LocalStressBasis basis;
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const double jw = std::abs(eval.map(t).det);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            eval.stress_basis(t, rule.points[q], basis);
            for (int c = 0; c < dofs.components(); ++c)
                for (int i = 0; i < dofs.stress_local_size(); ++i)
                    g(dofs.stress_index(t, i, c)) += rule.weights[q] * jw * basis.value[static_cast<std::size_t>(i)](c);
        }
    }
    return g;
}

Eigen::VectorXd load_vector(const Mesh& mesh, const DofMap& dofs, const LocalSource& f) {
    const DisplacementElement disp(dofs.family().order);
    const QuadratureRule rule = triangle_quadrature(default_quadrature_degree(dofs.family().order));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs.n_u());
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const auto& tri = mesh.triangle(t);
        const AffineMap map(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Eigen::Vector2d fx = f(t, map.to_physical(rule.points[q]));
            const double w = rule.weights[q] * std::abs(map.det);
            for (int c = 0; c < dofs.components(); ++c)
                for (int j = 0; j < disp.size(); ++j)
                    out(dofs.displacement_index(t, j, c)) += w * fx(c) * disp.value(j, rule.points[q]);
        }
    }
    return out;
}

SaddleSystem assemble(const Mesh& mesh, const DofMap& dofs, ProblemKind kind, const LocalSource& f) {
    if (dofs.kind() != kind) throw ValidationError("DofMap was built for a different problem");
    SaddleSystem sys;
    sys.kind = kind;
    sys.mass = stress_mass(mesh, dofs, kind);
    sys.divergence = divergence_matrix(mesh, dofs);
    if (dofs.has_constraint()) sys.trace = trace_row(mesh, dofs);
    sys.load = load_vector(mesh, dofs, f);
    return sys;
}

SaddleSystem assemble(const Mesh& mesh, const DofMap& dofs, const ProblemSpec& problem) {
    const Source& f = problem.source;
    return assemble(mesh, dofs, problem.kind, [&f](int, const Point& x) { return f(x); });
}

Eigen::SparseMatrix<double> SaddleSystem::matrix() const {
    const int ns = n_sigma();
    const int nu = n_u();
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(mass.nonZeros() + 2 * divergence.nonZeros() + 2 * trace.size()));
    for (int k = 0; k < mass.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(mass, k); it; ++it)
            entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < divergence.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(divergence, k); it; ++it) {
            entries.emplace_back(ns + static_cast<int>(it.row()), static_cast<int>(it.col()), -it.value());
            entries.emplace_back(static_cast<int>(it.col()), ns + static_cast<int>(it.row()), -it.value());
        }
    if (constrained()) {
        const int row = ns + nu;
        for (int i = 0; i < ns; ++i)
            if (trace(i) != 0.0) {
                entries.emplace_back(row, i, trace(i));
                entries.emplace_back(i, row, trace(i));
            }
    }
    Eigen::SparseMatrix<double> out(size(), size());
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

Eigen::VectorXd SaddleSystem::rhs() const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(size());
    b.segment(n_sigma(), n_u()) = -load;
    return b;
}

SaddleSolver::SaddleSolver(const SaddleSystem& system)
    : system_(&system),
      matrix_(system.matrix()),
      lu_(std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>()) {
    matrix_.makeCompressed();
    lu_->analyzePattern(matrix_);
    lu_->factorize(matrix_);
    if (lu_->info() != Eigen::Success) {
        std::vector<double> near_null;
        if (matrix_.rows() <= 2000) {
            const Eigen::MatrixXd dense(matrix_);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeFullV);
            const Eigen::VectorXd v = svd.matrixV().col(svd.matrixV().cols() - 1);
            near_null.assign(v.data(), v.data() + v.size());
        }
        throw SingularSystemError("singular saddle-point system: " + lu_->lastErrorMessage(), std::move(near_null));
    }
}

FieldPair SaddleSolver::solve() const { return solve(system_->load); }

FieldPair SaddleSolver::solve(const Eigen::VectorXd& load) const {
    const SaddleSystem& sys = *system_;
    if (load.size() != sys.n_u()) throw ValidationError("load vector has the wrong size");
    Eigen::VectorXd b = Eigen::VectorXd::Zero(sys.size());
    b.segment(sys.n_sigma(), sys.n_u()) = -load;
    Eigen::VectorXd x = lu_->solve(b);
    const double bnorm = std::max(b.norm(), 1e-300);
    Eigen::VectorXd r = b - matrix_ * x;
    // One step of iterative refinement.
    if (r.norm() > 1e-14 * bnorm) {
        x += lu_->solve(r);
        r = b - matrix_ * x;
    }
    residual_ = b.norm() > 0.0 ? r.norm() / bnorm : r.norm();
    if (!std::isfinite(residual_) || residual_ > kSolveTolerance)
        throw SolverError("saddle-point solve did not reach the residual tolerance (relative residual " +
                          std::to_string(residual_) + ")");
    FieldPair out;
    out.sigma = x.head(sys.n_sigma());
    out.u = x.segment(sys.n_sigma(), sys.n_u());
    if (sys.constrained()) out.multiplier = x(sys.size() - 1);
    return out;
}

FieldPair solve(const SaddleSystem& system) { return SaddleSolver(system).solve(); }

Solution solve_problem(const Mesh& mesh, const ProblemSpec& problem) {
    DofMap dofs(mesh, problem.element, problem.kind);
    const SaddleSystem sys = assemble(mesh, dofs, problem);
    FieldPair field = solve(sys);
    return {std::move(dofs), std::move(field)};
}

double energy_norm(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma) {
    return energy_error(mesh, dofs, sigma, [](const Point&) { return Eigen::Matrix2d::Zero().eval(); });
}

double energy_error(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma, const StressField& exact) {
    if (sigma.size() != dofs.n_sigma()) throw ValidationError("stress vector does not match the DofMap");
    const FieldEvaluator eval(mesh, dofs);
    const QuadratureRule rule = triangle_quadrature(6);
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const AffineMap& map = eval.map(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Eigen::Matrix2d e = eval.stress(t, rule.points[q], sigma).value - exact(map.to_physical(rule.points[q]));
            sum += rule.weights[q] * std::abs(map.det) * material_energy(dofs.kind(), e);
        }
    }
    return std::sqrt(std::max(0.0, sum));
}

double stress_l2_norm(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma) {
    const FieldEvaluator eval(mesh, dofs);
    const QuadratureRule rule = triangle_quadrature(6);
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t)
        for (std::size_t q = 0; q < rule.size(); ++q)
            sum += rule.weights[q] * std::abs(eval.map(t).det) * eval.stress(t, rule.points[q], sigma).value.squaredNorm();
    return std::sqrt(sum);
}

}  // namespace amfem
