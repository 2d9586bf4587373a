#include "amfem/verify.hpp"

#include "amfem/error.hpp"
#include "amfem/estimator.hpp"
#include "amfem/quadrature.hpp"
#include "amfem/system.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace amfem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Orthonormal basis of the orthogonal complement of g.
Eigen::MatrixXd complement_of(const Eigen::VectorXd& g) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ();
    return q.rightCols(g.size() - 1);
}

// Q_H f as a function on the fine triangles.
struct CoarseDatum {
    const Mesh& coarse;
    DofMap dofs;
    Eigen::VectorXd fh;
    FieldEvaluator eval;
    std::vector<int> owner;

    CoarseDatum(const Mesh& c, const Mesh& fine, const ProblemSpec& problem)
        : coarse(c),
          dofs(c, problem.element, problem.kind),
          fh(project_source(c, dofs, problem.source)),
          eval(c, dofs),
          owner(locate_in_coarse(c, fine)) {}

    Eigen::Vector2d operator()(int t, const Point& x) const {
        const int k = owner[static_cast<std::size_t>(t)];
        return eval.displacement(k, eval.map(k).to_reference(x), fh);
    }
};

// ||div sigma - g|| / ||g|| on `mesh` for a per-triangle datum g.
double relative_load_residual(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma,
                              const LocalSource& g) {
    const FieldEvaluator eval(mesh, dofs);
    const QuadratureRule rule = triangle_quadrature(default_quadrature_degree(dofs.family().order));
    const int nc = dofs.components();
    double res = 0.0;
    double ref = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const AffineMap& map = eval.map(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double w = rule.weights[q] * std::abs(map.det);
            const Eigen::Vector2d gx = g(t, map.to_physical(rule.points[q]));
            const Eigen::Vector2d d = eval.stress(t, rule.points[q], sigma).divergence - gx;
            res += w * d.head(nc).squaredNorm();
            ref += w * gx.head(nc).squaredNorm();
        }
    }
    return std::sqrt(res) / std::max(std::sqrt(ref), 1e-300);
}

double spread(const std::vector<double>& values) {
    double lo = kInf;
    double hi = 0.0;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return lo > 0.0 ? hi / lo : kInf;
}

}  // namespace

Eigen::MatrixXd stress_kernel_basis(const Mesh& mesh, const DofMap& dofs) {
    if (dofs.n_sigma() > kMaxOrthogonalityDofs)
        throw ValidationError("kernel oracle limited to " + std::to_string(kMaxOrthogonalityDofs) + " stress DOFs");
    const Eigen::MatrixXd b(divergence_matrix(mesh, dofs));
    Eigen::MatrixXd c(b.rows() + dofs.n_multiplier(), b.cols());
    c.topRows(b.rows()) = b;
    if (dofs.has_constraint()) c.row(b.rows()) = trace_row(mesh, dofs).transpose();
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double cutoff = 1e-10 * (s.size() > 0 ? s(0) : 1.0);
    int rank = 0;
    while (rank < s.size() && s(rank) > cutoff) ++rank;
    return svd.matrixV().rightCols(c.cols() - rank);
}

double check_orthogonality(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma) {
    if (sigma.size() != dofs.n_sigma()) throw ValidationError("stress vector does not match the DofMap");
    const Eigen::MatrixXd z = stress_kernel_basis(mesh, dofs);
    if (z.cols() == 0) return 0.0;
    const Eigen::VectorXd m_sigma = stress_mass(mesh, dofs, dofs.kind()) * sigma;
    return (z.transpose() * m_sigma).cwiseAbs().maxCoeff();
}

QuasiOrthogonalityReport check_quasi_orthogonality(const Mesh& coarse, const Mesh& fine, const ProblemSpec& problem) {
    QuasiOrthogonalityReport rep;
    rep.coarse_ntri = static_cast<int>(coarse.num_triangles());
    rep.fine_ntri = static_cast<int>(fine.num_triangles());

    const CoarseDatum datum(coarse, fine, problem);
    const FieldPair coarse_sol = solve(assemble(coarse, datum.dofs, problem));
    const DofMap fine_dofs(fine, problem.element, problem.kind);
    const FieldPair fine_sol = solve(assemble(fine, fine_dofs, problem));
    const LocalSource coarse_source = [&datum](int t, const Point& x) { return datum(t, x); };
    const FieldPair tilde = solve(assemble(fine, fine_dofs, problem.kind, coarse_source));

    rep.difference = energy_norm(fine, fine_dofs, fine_sol.sigma - tilde.sigma);
    rep.osc_refined = std::sqrt(subset_sum(oscillation(coarse, datum.dofs, problem.source), refined_elements(coarse, fine)));
    rep.load_identity = relative_load_residual(fine, fine_dofs, tilde.sigma, coarse_source);

    const double scale = std::max(energy_norm(fine, fine_dofs, fine_sol.sigma), 1.0);
    if (rep.osc_refined > 0.0) {
        rep.r1 = rep.difference / rep.osc_refined;
    } else if (rep.difference <= 1e-10 * scale) {
        rep.r1 = 0.0;
    } else {
        rep.r1 = kInf;
    }

    // Pythagoras with remainder against a reference solution.
    const Mesh ref_mesh = refine_uniform(fine, 2);
    const Solution ref = solve_problem(ref_mesh, problem);
    const Eigen::VectorXd fine_on_ref = prolong_stress(fine, fine_dofs, fine_sol.sigma, ref_mesh, ref.dofs);
    const Eigen::VectorXd coarse_on_ref = prolong_stress(coarse, datum.dofs, coarse_sol.sigma, ref_mesh, ref.dofs);
    const double err_fine = std::pow(energy_norm(ref_mesh, ref.dofs, ref.field.sigma - fine_on_ref), 2);
    const double err_coarse = std::pow(energy_norm(ref_mesh, ref.dofs, ref.field.sigma - coarse_on_ref), 2);
    const double gap = std::pow(energy_norm(ref_mesh, ref.dofs, fine_on_ref - coarse_on_ref), 2);
    constexpr double delta = 0.5;
    const double c0 = std::isfinite(rep.r1) ? rep.r1 * rep.r1 : 0.0;
    rep.pythagoras_lhs = (1.0 - delta) * err_fine;
    rep.pythagoras_rhs = err_coarse - gap + c0 / delta * rep.osc_refined * rep.osc_refined;
    const double tol = 1e-9 * (err_coarse + gap) + 1e-14;

    rep.passed = std::isfinite(rep.r1) && rep.load_identity <= 1e-10 && rep.pythagoras_lhs <= rep.pythagoras_rhs + tol;
    return rep;
}

DiscreteReliabilityReport check_discrete_reliability(const Mesh& coarse, const Mesh& fine, const ProblemSpec& problem) {
    DiscreteReliabilityReport rep;
    rep.coarse_ntri = static_cast<int>(coarse.num_triangles());
    rep.fine_ntri = static_cast<int>(fine.num_triangles());
    const std::vector<int> owner = locate_in_coarse(coarse, fine);
    const Solution coarse_sol = solve_problem(coarse, problem);
    const Solution fine_sol = solve_problem(fine, problem);
    const Eigen::VectorXd lifted =
        prolong_stress(coarse, coarse_sol.dofs, coarse_sol.field.sigma, fine, fine_sol.dofs, owner);
    rep.numerator = std::pow(energy_norm(fine, fine_sol.dofs, fine_sol.field.sigma - lifted), 2);

    const IndicatorSet ind = indicators(coarse, coarse_sol.dofs, coarse_sol.field.sigma, problem.source);
    rep.denominator = subset_sum(ind.eta2, refined_neighborhood(coarse, fine)) +
                      subset_sum(ind.osc2, refined_elements(coarse, fine));
    const double scale = std::max(std::pow(energy_norm(fine, fine_sol.dofs, fine_sol.field.sigma), 2), 1.0);
    if (rep.denominator > 0.0) {
        rep.ratio = rep.numerator / rep.denominator;
    } else if (rep.numerator <= 1e-20 * scale) {
        rep.ratio = 0.0;
    } else {
        rep.ratio = kInf;
    }
    rep.passed = std::isfinite(rep.ratio);
    return rep;
}

double estimate_infsup(const Mesh& mesh, const DofMap& dofs) {
    if (dofs.n_total() > kMaxInfSupDofs)
        throw ValidationError("inf-sup oracle limited to " + std::to_string(kMaxInfSupDofs) + " DOFs");
    Eigen::MatrixXd m(stress_mass(mesh, dofs, ProblemKind::Poisson));
    Eigen::MatrixXd b(divergence_matrix(mesh, dofs));
    if (dofs.has_constraint()) {
        const Eigen::MatrixXd z = complement_of(trace_row(mesh, dofs));
        m = z.transpose() * m * z;
        b = b * z;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw SolverError("stress mass matrix is not positive definite");
    Eigen::MatrixXd s = b * llt.solve(b.transpose());
    s = 0.5 * (s + s.transpose()).eval();
    const Eigen::MatrixXd n(discrete_h1_gram(mesh, dofs));
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(s, n, Eigen::EigenvaluesOnly);
    if (ges.info() != Eigen::Success) throw SolverError("generalized eigenvalue computation failed");
    return std::sqrt(std::max(ges.eigenvalues()(0), 0.0));
}

double estimate_kernel_coercivity(const Mesh& mesh, const DofMap& dofs) {
    const Eigen::MatrixXd z = stress_kernel_basis(mesh, dofs);
    if (z.cols() == 0) return kInf;
    const Eigen::MatrixXd ma = z.transpose() * Eigen::MatrixXd(stress_mass(mesh, dofs, dofs.kind())) * z;
    const Eigen::MatrixXd ml = z.transpose() * Eigen::MatrixXd(stress_mass(mesh, dofs, ProblemKind::Poisson)) * z;
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(0.5 * (ma + ma.transpose()),
                                                                       0.5 * (ml + ml.transpose()),
                                                                       Eigen::EigenvaluesOnly);
    if (ges.info() != Eigen::Success) throw SolverError("generalized eigenvalue computation failed");
    return ges.eigenvalues()(0);
}

EfficiencyReliabilityReport check_efficiency_reliability(const std::vector<IterationRecord>& records) {
    EfficiencyReliabilityReport rep;
    std::vector<double> eff;
    double c_rel = 0.0;
    for (const auto& r : records) {
        if (!std::isfinite(r.err_energy)) throw ValidationError("record " + std::to_string(r.k) + " has no error value");
        const double err2 = r.err_energy * r.err_energy;
        if (err2 == 0.0 && r.eta2 == 0.0 && r.osc2 == 0.0) continue;
        c_rel = std::max(c_rel, r.eta2 + r.osc2 > 0.0 ? err2 / (r.eta2 + r.osc2) : kInf);
        eff.push_back(r.eta2 > 0.0 ? err2 / r.eta2 : kInf);
    }
    rep.levels = static_cast<int>(eff.size());
    rep.ran = !eff.empty();
    if (rep.ran) {
        rep.c_rel = c_rel;
        rep.c_eff = *std::min_element(eff.begin(), eff.end());
        rep.band = spread(eff);
    }
    return rep;
}

bool ConstantsReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

ConstantsReport verify_suite(const ProblemSpec& problem, const Mesh& initial, const VerifyOptions& options) {
    ConstantsReport report;
    report.reference = "discrete solution two uniform refinements beyond the finer mesh of each pair";

    AfemConfig config;
    config.problem = problem;
    config.initial_mesh = initial;
    config.theta = options.theta;
    config.max_dofs = std::numeric_limits<long long>::max();
    config.tolerance = 0.0;
    config.max_iterations = options.pair_levels;
    const AfemHistory history = afem_run(config);

    {
        CheckResult c;
        c.name = "orthogonality";
        for (std::size_t k = 0; k < history.meshes.size(); ++k) {
            const DofMap dofs(history.meshes[k], problem.element, problem.kind);
            if (dofs.n_sigma() > kMaxOrthogonalityDofs) break;
            c.value = std::max(c.value, check_orthogonality(history.meshes[k], dofs, history.fields[k].sigma));
            c.fine_ntri = static_cast<int>(history.meshes[k].num_triangles());
            c.ran = true;
        }
        c.passed = c.ran && c.value <= 1e-9;
        c.detail = c.ran ? "max |(A sigma_h, tau_h)| over kernel bases" : "no mesh within the dense limit";
        report.checks.push_back(c);
    }

    std::vector<double> drel;
    std::vector<double> r1;
    for (std::size_t k = 0; k + 1 < history.meshes.size(); ++k) {
        const Mesh& coarse = history.meshes[k];
        const Mesh& fine = history.meshes[k + 1];
        const DiscreteReliabilityReport dr = check_discrete_reliability(coarse, fine, problem);
        report.checks.push_back({"discrete_reliability", true, dr.passed, dr.ratio, dr.coarse_ntri, dr.fine_ntri,
                                 "||sigma_h - sigma_H||^2 / (eta^2(R~) + osc^2)"});
        if (dr.ratio > 0.0) drel.push_back(dr.ratio);
        report.c_drel = std::max(report.c_drel, dr.ratio);

        const QuasiOrthogonalityReport qo = check_quasi_orthogonality(coarse, fine, problem);
        report.checks.push_back({"quasi_orthogonality", true, qo.passed, qo.r1, qo.coarse_ntri, qo.fine_ntri,
                                 "||sigma_h - sigma~_h||_A / osc(f, T_H \\ T_h)"});
        if (qo.r1 > 0.0) r1.push_back(qo.r1);
        report.c_0 = std::max(report.c_0, std::isfinite(qo.r1) ? qo.r1 * qo.r1 : kInf);
    }
    const auto stability = [&](const std::string& name, const std::vector<double>& values) {
        CheckResult c;
        c.name = name;
        c.ran = !values.empty();
        c.value = c.ran ? spread(values) : 0.0;
        c.passed = !c.ran || c.value < options.stability_factor;
        c.detail = c.ran ? "max/min over " + std::to_string(values.size()) + " pairs" : "all pairs vanish";
        report.checks.push_back(c);
    };
    stability("discrete_reliability_stability", drel);
    stability("quasi_orthogonality_stability", r1);

    {
        CheckResult c;
        c.name = "infsup";
        std::vector<double> betas;
        Mesh mesh = initial;
        for (int level = 0; level < options.infsup_levels; ++level) {
            const DofMap dofs(mesh, problem.element, problem.kind);
            if (dofs.n_total() > kMaxInfSupDofs) break;
            betas.push_back(estimate_infsup(mesh, dofs));
            c.fine_ntri = static_cast<int>(mesh.num_triangles());
            mesh = refine_uniform(mesh);
        }
        c.ran = !betas.empty();
        if (c.ran) {
            const double lo = *std::min_element(betas.begin(), betas.end());
            const double hi = *std::max_element(betas.begin(), betas.end());
            report.infsup = lo;
            c.value = lo;
            c.passed = lo > 0.0 && (hi - lo) / hi < options.infsup_variation;
            c.detail = "variation " + std::to_string((hi - lo) / hi) + " over " + std::to_string(betas.size()) + " levels";
        }
        report.checks.push_back(c);
    }

    {
        CheckResult c;
        c.name = "efficiency_reliability";
        const EfficiencyReliabilityReport er = check_efficiency_reliability(history.records);
        c.ran = er.ran;
        c.value = er.band;
        c.passed = !er.ran || (std::isfinite(er.c_rel) && er.band < options.stability_factor);
        c.detail = "error source: " + history.error_source;
        report.c_rel = er.c_rel;
        report.c_eff = er.c_eff;
        report.checks.push_back(c);
    }
    return report;
}

nlohmann::json to_json(const ConstantsReport& report) {
    const auto number = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    };
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"ran", c.ran},
                          {"passed", c.passed},
                          {"value", number(c.value)},
                          {"coarse_ntri", c.coarse_ntri},
                          {"fine_ntri", c.fine_ntri},
                          {"detail", c.detail}});
    return {{"constants",
             {{"c_rel", number(report.c_rel)},
              {"c_eff", number(report.c_eff)},
              {"c_drel", number(report.c_drel)},
              {"c_0", number(report.c_0)},
              {"infsup", number(report.infsup)}}},
            {"checks", checks},
            {"reference", report.reference},
            {"passed", report.passed()}};
}

}  // namespace amfem
