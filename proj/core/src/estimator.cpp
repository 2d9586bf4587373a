#include "amfem/estimator.hpp"

#include "amfem/error.hpp"
#include "amfem/quadrature.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace amfem {

std::vector<double> IndicatorSet::combined() const {
    std::vector<double> out(eta2.size());
    for (std::size_t k = 0; k < eta2.size(); ++k) out[k] = eta2[k] + (k < osc2.size() ? osc2[k] : 0.0);
    return out;
}

IndicatorSet estimate(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma) {
    if (sigma.size() != dofs.n_sigma()) throw ValidationError("stress vector does not match the mesh/DofMap");
    const FieldEvaluator eval(mesh, dofs);
    const ProblemKind kind = dofs.kind();
    const int nc = dofs.components();
    const int order = dofs.family().order;
    const QuadratureRule rule = triangle_quadrature(default_quadrature_degree(order));
    const LineRule line = line_quadrature(default_quadrature_degree(order));
    const auto nt = mesh.num_triangles();
    IndicatorSet out;
    out.eta2.assign(nt, 0.0);
    out.osc2.assign(nt, 0.0);

    for (int t = 0; t < static_cast<int>(nt); ++t) {
        double volume = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const StressSample s = eval.stress(t, rule.points[q], sigma);
            // d(A sigma)_{cj}/dx_l; the deviatoric part subtracts half the trace gradient.
            std::array<Eigen::Matrix2d, 2> g = s.gradient;
            if (kind == ProblemKind::Stokes) {
                const Eigen::RowVector2d trace_grad = s.gradient[0].row(0) + s.gradient[1].row(1);
                g[0].row(0) -= 0.5 * trace_grad;
                g[1].row(1) -= 0.5 * trace_grad;
            }
            double rot2 = 0.0;
            for (int c = 0; c < nc; ++c) {
                const auto& gc = g[static_cast<std::size_t>(c)];
                const double rot = gc(0, 1) - gc(1, 0);
                rot2 += rot * rot;
            }
            volume += rule.weights[q] * std::abs(eval.map(t).det) * rot2;
        }
        out.eta2[static_cast<std::size_t>(t)] = mesh.area(t) * volume;
    }

    for (const auto& e : dofs.edges().edges) {
        const Point a = mesh.vertex(e.vertices[0]);
        const Point b = mesh.vertex(e.vertices[1]);
        double jump2 = 0.0;
        for (std::size_t q = 0; q < line.points.size(); ++q) {
            const Point x = a + line.points[q] * (b - a);
            Eigen::Matrix2d v = apply_material(kind, eval.stress(e.plus, eval.map(e.plus).to_reference(x), sigma).value);
            if (!e.boundary)
                v -= apply_material(kind, eval.stress(e.minus, eval.map(e.minus).to_reference(x), sigma).value);
            const Eigen::Vector2d tangential = v * e.tangent;
            jump2 += line.weights[q] * e.length * tangential.head(nc).squaredNorm();
        }
        const double contribution = e.length * jump2;
        out.eta2[static_cast<std::size_t>(e.plus)] += contribution;
        if (!e.boundary) out.eta2[static_cast<std::size_t>(e.minus)] += contribution;
    }
    return out;
}

std::vector<double> oscillation(const Mesh& mesh, const DofMap& dofs, const Source& f) {
    const Eigen::VectorXd fh = project_source(mesh, dofs, f);
    const FieldEvaluator eval(mesh, dofs);
    const QuadratureRule rule = triangle_quadrature(default_quadrature_degree(dofs.family().order));
    const int nc = dofs.components();
    std::vector<double> out(mesh.num_triangles(), 0.0);
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const AffineMap& map = eval.map(t);
        double sum = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Eigen::Vector2d d = f(map.to_physical(rule.points[q])) - eval.displacement(t, rule.points[q], fh);
            sum += rule.weights[q] * std::abs(map.det) * d.head(nc).squaredNorm();
        }
        out[static_cast<std::size_t>(t)] = mesh.area(t) * sum;
    }
    return out;
}

IndicatorSet indicators(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma, const Source& f) {
    IndicatorSet ind = estimate(mesh, dofs, sigma);
    ind.osc2 = oscillation(mesh, dofs, f);
    return ind;
}

double subset_sum(const std::vector<double>& values, const std::vector<int>& subset) {
    double sum = 0.0;
    for (int k : subset) {
        if (k < 0 || static_cast<std::size_t>(k) >= values.size())
            throw ValidationError("element index " + std::to_string(k) + " out of range");
        sum += values[static_cast<std::size_t>(k)];
    }
    return sum;
}

IndicatorTotals total(const IndicatorSet& ind, const std::vector<int>& subset) {
    return {subset_sum(ind.eta2, subset), subset_sum(ind.osc2, subset)};
}

IndicatorTotals total(const IndicatorSet& ind) {
    IndicatorTotals out;
    for (double v : ind.eta2) out.eta2 += v;
    for (double v : ind.osc2) out.osc2 += v;
    return out;
}

void write_indicators_csv(const IndicatorSet& ind, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << "element_id,eta2,osc2\n" << std::setprecision(17);
    for (std::size_t k = 0; k < ind.size(); ++k)
        out << k << ',' << ind.eta2[k] << ',' << (k < ind.osc2.size() ? ind.osc2[k] : 0.0) << '\n';
}

}  // namespace amfem
