#include "amfem/spaces.hpp"

#include "amfem/error.hpp"
#include "amfem/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>

namespace amfem {

DofMap::DofMap(const Mesh& mesh, ElementFamily family, ProblemKind kind)
    : kind_(kind), family_(family), edges_(edge_tables(mesh)) {
    const StressElement element(family_);
    stress_local_ = element.size();
    disp_local_ = DisplacementElement(family_.order).size();
    const int edge_dofs = element.edge_dofs();
    const int interior = element.interior_dofs();
    const auto nt = static_cast<int>(mesh.num_triangles());
    const auto ne = static_cast<int>(edges_.edges.size());
    n_sigma_row_ = ne * edge_dofs + nt * interior;
    n_u_scalar_ = nt * disp_local_;
    stress_index_.resize(static_cast<std::size_t>(nt * stress_local_));
    stress_sign_.resize(stress_index_.size());
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangle(t);
        for (int i = 0; i < stress_local_; ++i) {
            const auto slot = static_cast<std::size_t>(t * stress_local_ + i);
            const auto [local_edge, m] = element.dof_kind(i);
            if (local_edge < 0) {
                stress_index_[slot] = ne * edge_dofs + t * interior + m;
                stress_sign_[slot] = 1.0;
                continue;
            }
            const int g = edges_.local[static_cast<std::size_t>(t)][static_cast<std::size_t>(local_edge)];
            const int start = tri[static_cast<std::size_t>((local_edge + 1) % 3)];
            const double same = start == edges_.edges[static_cast<std::size_t>(g)].vertices[0] ? 1.0 : -1.0;
            stress_index_[slot] = g * edge_dofs + m;
            // Normal flips with the direction; odd Legendre moments flip again.
            stress_sign_[slot] = (m % 2 == 0) ? same : 1.0;
        }
    }
}

DofMap build_dofmap(const Mesh& mesh, ElementFamily family, ProblemKind kind) {
    return DofMap(mesh, family, kind);
}

FieldEvaluator::FieldEvaluator(const Mesh& mesh, const DofMap& dofs)
    : mesh_(&mesh), dofs_(&dofs), stress_(dofs.family()), disp_(dofs.family().order) {
    maps_.reserve(mesh.num_triangles());
    for (const auto& tri : mesh.triangles())
        maps_.emplace_back(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
}

void FieldEvaluator::stress_basis(int t, const Eigen::Vector2d& xhat, LocalStressBasis& out) const {
    const auto n = static_cast<std::size_t>(stress_.size());
    out.value.resize(n);
    out.jacobian.resize(n);
    out.divergence.resize(n);
    const AffineMap& m = map(t);
    for (int i = 0; i < stress_.size(); ++i) {
        const auto& p = stress_.basis(i);
        const double s = dofs_->stress_sign(t, i);
        const Eigen::Matrix2d jac = p.jacobian(xhat);
        out.value[static_cast<std::size_t>(i)] = s * piola_value(m, p.value(xhat));
        out.jacobian[static_cast<std::size_t>(i)] = s * piola_jacobian(m, jac);
        out.divergence[static_cast<std::size_t>(i)] = s * piola_divergence(m, jac.trace());
    }
}

StressSample FieldEvaluator::stress(int t, const Eigen::Vector2d& xhat, const Eigen::VectorXd& sigma) const {
    LocalStressBasis basis;
    stress_basis(t, xhat, basis);
    StressSample out;
    for (int c = 0; c < dofs_->components(); ++c)
        for (int i = 0; i < stress_.size(); ++i) {
            const double coef = sigma(dofs_->stress_index(t, i, c));
            const auto k = static_cast<std::size_t>(i);
            out.value.row(c) += coef * basis.value[k].transpose();
            out.gradient[static_cast<std::size_t>(c)] += coef * basis.jacobian[k];
            out.divergence(c) += coef * basis.divergence[k];
        }
    return out;
}

Eigen::Vector2d FieldEvaluator::displacement(int t, const Eigen::Vector2d& xhat, const Eigen::VectorXd& u) const {
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    for (int c = 0; c < dofs_->components(); ++c)
        for (int j = 0; j < disp_.size(); ++j) out(c) += u(dofs_->displacement_index(t, j, c)) * disp_.value(j, xhat);
    return out;
}

Eigen::Matrix2d FieldEvaluator::displacement_gradient(int t, const Eigen::Vector2d& xhat,
                                                      const Eigen::VectorXd& u) const {
    Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
    const Eigen::Matrix2d inv_t = map(t).inverse.transpose();
    for (int c = 0; c < dofs_->components(); ++c)
        for (int j = 0; j < disp_.size(); ++j)
            out.row(c) += u(dofs_->displacement_index(t, j, c)) * (inv_t * disp_.gradient(j, xhat)).transpose();
    return out;
}

namespace {

Eigen::MatrixXd local_mass(const DisplacementElement& disp, const QuadratureRule& rule, double det) {
    const int n = disp.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < rule.size(); ++q)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i, j) += rule.weights[q] * std::abs(det) * disp.value(i, rule.points[q]) * disp.value(j, rule.points[q]);
    return m;
}

}  // namespace

Eigen::VectorXd project_source(const Mesh& mesh, const DofMap& dofs, const Source& f) {
    const DisplacementElement disp(dofs.family().order);
    const QuadratureRule rule = triangle_quadrature(default_quadrature_degree(dofs.family().order));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs.n_u());
    const int n = disp.size();
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const auto& tri = mesh.triangle(t);
        const AffineMap map(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
        const Eigen::MatrixXd m = local_mass(disp, rule, map.det);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, dofs.components());
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Eigen::Vector2d fx = f(map.to_physical(rule.points[q]));
            for (int j = 0; j < n; ++j)
                for (int c = 0; c < dofs.components(); ++c)
                    rhs(j, c) += rule.weights[q] * std::abs(map.det) * fx(c) * disp.value(j, rule.points[q]);
        }
        const Eigen::MatrixXd coef = m.ldlt().solve(rhs);
        for (int c = 0; c < dofs.components(); ++c)
            for (int j = 0; j < n; ++j) out(dofs.displacement_index(t, j, c)) = coef(j, c);
    }
    return out;
}

Eigen::SparseMatrix<double> displacement_mass(const Mesh& mesh, const DofMap& dofs) {
    const DisplacementElement disp(dofs.family().order);
    const QuadratureRule rule = triangle_quadrature(default_quadrature_degree(dofs.family().order));
    std::vector<Eigen::Triplet<double>> entries;
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const auto& tri = mesh.triangle(t);
        const AffineMap map(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
        const Eigen::MatrixXd m = local_mass(disp, rule, map.det);
        for (int c = 0; c < dofs.components(); ++c)
            for (int i = 0; i < disp.size(); ++i)
                for (int j = 0; j < disp.size(); ++j)
                    entries.emplace_back(dofs.displacement_index(t, i, c), dofs.displacement_index(t, j, c), m(i, j));
    }
    Eigen::SparseMatrix<double> out(dofs.n_u(), dofs.n_u());
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

Eigen::SparseMatrix<double> divergence_matrix(const Mesh& mesh, const DofMap& dofs) {
    const FieldEvaluator eval(mesh, dofs);
    const auto& disp = eval.displacement_element();
    const QuadratureRule rule = triangle_quadrature(default_quadrature_degree(dofs.family().order));
    std::vector<Eigen::Triplet<double>> entries;
    LocalStressBasis basis;
    const int ns = dofs.stress_local_size();
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(disp.size(), ns);
        const double jw = std::abs(eval.map(t).det);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            eval.stress_basis(t, rule.points[q], basis);
            for (int j = 0; j < disp.size(); ++j)
                for (int i = 0; i < ns; ++i)
                    local(j, i) += rule.weights[q] * jw * basis.divergence[static_cast<std::size_t>(i)] *
                                   disp.value(j, rule.points[q]);
        }
        for (int c = 0; c < dofs.components(); ++c)
            for (int j = 0; j < disp.size(); ++j)
                for (int i = 0; i < ns; ++i)
                    entries.emplace_back(dofs.displacement_index(t, j, c), dofs.stress_index(t, i, c), local(j, i));
    }
    Eigen::SparseMatrix<double> out(dofs.n_u(), dofs.n_sigma());
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

namespace {

Eigen::SparseMatrix<double> h1_gram(const Mesh& mesh, const DofMap& dofs, const std::vector<char>& in_subset) {
    const FieldEvaluator eval(mesh, dofs);
    const auto& disp = eval.displacement_element();
    const int n = disp.size();
    const int order = dofs.family().order;
    const QuadratureRule rule = triangle_quadrature(std::max(2 * order, 1));
    const LineRule line = line_quadrature(2 * order + 2);
    std::vector<Eigen::Triplet<double>> entries;
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        if (!in_subset[static_cast<std::size_t>(t)] || order == 0) continue;
        const AffineMap& map = eval.map(t);
        const Eigen::Matrix2d inv_t = map.inverse.transpose();
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t q = 0; q < rule.size(); ++q)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    local(i, j) += rule.weights[q] * std::abs(map.det) *
                                   (inv_t * disp.gradient(i, rule.points[q])).dot(inv_t * disp.gradient(j, rule.points[q]));
        for (int c = 0; c < dofs.components(); ++c)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    entries.emplace_back(dofs.displacement_index(t, i, c), dofs.displacement_index(t, j, c), local(i, j));
    }
    for (const auto& e : dofs.edges().edges) {
        const bool touches = in_subset[static_cast<std::size_t>(e.plus)] ||
                             (e.minus >= 0 && in_subset[static_cast<std::size_t>(e.minus)]);
        if (!touches) continue;
        const Point a = mesh.vertex(e.vertices[0]);
        const Point b = mesh.vertex(e.vertices[1]);
        // Local unknowns: n from K+, then n from K- (jump = v+ - v-).
        const int sides = e.boundary ? 1 : 2;
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(sides * n, sides * n);
        for (std::size_t q = 0; q < line.points.size(); ++q) {
            const Point x = a + line.points[q] * (b - a);
            Eigen::VectorXd phi(sides * n);
            const Eigen::Vector2d xp = eval.map(e.plus).to_reference(x);
            for (int j = 0; j < n; ++j) phi(j) = disp.value(j, xp);
            if (!e.boundary) {
                const Eigen::Vector2d xm = eval.map(e.minus).to_reference(x);
                for (int j = 0; j < n; ++j) phi(n + j) = -disp.value(j, xm);
            }
            // h_E^{-1} * |E| * weight = weight.
            local += line.weights[q] * phi * phi.transpose();
        }
        auto global = [&](int slot, int c) {
            return slot < n ? dofs.displacement_index(e.plus, slot, c) : dofs.displacement_index(e.minus, slot - n, c);
        };
        for (int c = 0; c < dofs.components(); ++c)
            for (int i = 0; i < sides * n; ++i)
                for (int j = 0; j < sides * n; ++j) entries.emplace_back(global(i, c), global(j, c), local(i, j));
    }
    Eigen::SparseMatrix<double> out(dofs.n_u(), dofs.n_u());
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

}  // namespace

Eigen::SparseMatrix<double> discrete_h1_gram(const Mesh& mesh, const DofMap& dofs) {
    return h1_gram(mesh, dofs, std::vector<char>(mesh.num_triangles(), 1));
}

double discrete_h1_norm(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& u,
                        const std::optional<std::vector<int>>& subset) {
    if (u.size() != dofs.n_u()) throw ValidationError("displacement vector does not match the DofMap");
    std::vector<char> in_subset(mesh.num_triangles(), subset ? 0 : 1);
    if (subset)
        for (int t : *subset) {
            if (t < 0 || t >= static_cast<int>(mesh.num_triangles()))
                throw ValidationError("subset index out of range");
            in_subset[static_cast<std::size_t>(t)] = 1;
        }
    const Eigen::SparseMatrix<double> gram = h1_gram(mesh, dofs, in_subset);
    return std::sqrt(std::max(0.0, u.dot(gram * u)));
}

namespace {

using LocalStressField = std::function<Eigen::Matrix2d(int, const Point&)>;

Eigen::VectorXd interpolate_local(const Mesh& mesh, const DofMap& dofs, const LocalStressField& field) {
    const FieldEvaluator eval(mesh, dofs);
    const auto& element = eval.stress_element();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs.n_sigma());
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const AffineMap& map = eval.map(t);
        for (int c = 0; c < dofs.components(); ++c) {
            const Eigen::VectorXd local = element.apply_dofs([&](const Eigen::Vector2d& xhat) -> Eigen::Vector2d {
                const Eigen::Matrix2d v = field(t, map.to_physical(xhat));
                return piola_pullback(map, v.row(c).transpose());
            });
            for (int i = 0; i < element.size(); ++i)
                out(dofs.stress_index(t, i, c)) = dofs.stress_sign(t, i) * local(i);
        }
    }
    return out;
}

}  // namespace

Eigen::VectorXd interpolate_stress(const Mesh& mesh, const DofMap& dofs, const StressField& field) {
    return interpolate_local(mesh, dofs, [&field](int, const Point& x) { return field(x); });
}

Eigen::VectorXd prolong_stress(const Mesh& coarse, const DofMap& coarse_dofs, const Eigen::VectorXd& sigma,
                               const Mesh& fine, const DofMap& fine_dofs, const std::vector<int>& owner) {
    if (coarse_dofs.kind() != fine_dofs.kind() || !(coarse_dofs.family() == fine_dofs.family()))
        throw ValidationError("prolongation requires matching element families and problems");
    if (sigma.size() != coarse_dofs.n_sigma()) throw ValidationError("stress vector does not match the coarse DofMap");
    const FieldEvaluator coarse_eval(coarse, coarse_dofs);
    return interpolate_local(fine, fine_dofs, [&](int t, const Point& x) {
        const int k = owner[static_cast<std::size_t>(t)];
        return coarse_eval.stress(k, coarse_eval.map(k).to_reference(x), sigma).value;
    });
}

Eigen::VectorXd prolong_stress(const Mesh& coarse, const DofMap& coarse_dofs, const Eigen::VectorXd& sigma,
                               const Mesh& fine, const DofMap& fine_dofs) {
    return prolong_stress(coarse, coarse_dofs, sigma, fine, fine_dofs, locate_in_coarse(coarse, fine));
}

double divergence_residual(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma,
                           const Eigen::VectorXd& fh) {
    const FieldEvaluator eval(mesh, dofs);
    const QuadratureRule rule = triangle_quadrature(default_quadrature_degree(dofs.family().order));
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t)
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const StressSample s = eval.stress(t, rule.points[q], sigma);
            const Eigen::Vector2d d = s.divergence - eval.displacement(t, rule.points[q], fh);
            sum += rule.weights[q] * std::abs(eval.map(t).det) * d.squaredNorm();
        }
    return std::sqrt(sum);
}

double displacement_l2_norm(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& u) {
    const Eigen::SparseMatrix<double> m = displacement_mass(mesh, dofs);
    return std::sqrt(std::max(0.0, u.dot(m * u)));
}

}  // namespace amfem
