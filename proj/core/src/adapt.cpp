#include "amfem/adapt.hpp"

#include "amfem/error.hpp"
#include "amfem/system.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace amfem {

MarkSet doerfler_mark(const std::vector<double>& totals, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ValidationError("marking parameter theta must lie in (0, 1]");
    std::vector<int> order(totals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return totals[static_cast<std::size_t>(a)] > totals[static_cast<std::size_t>(b)];
    });
    // Sum in the same order as the prefix scan so theta = 1 terminates exactly.
    double sum = 0.0;
    for (int k : order) sum += totals[static_cast<std::size_t>(k)];
    MarkSet marked;
    if (!(sum > 0.0)) return marked;
    const double goal = theta * sum;
    double acc = 0.0;
    for (int k : order) {
        if (acc >= goal) break;
        acc += totals[static_cast<std::size_t>(k)];
        marked.push_back(k);
    }
    std::sort(marked.begin(), marked.end());
    return marked;
}

MarkSet doerfler_mark(const IndicatorSet& ind, double theta) { return doerfler_mark(ind.combined(), theta); }

void AfemConfig::validate() const {
    if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("theta must lie in (0, 1)");
    if (max_dofs < 0) throw ValidationError("max_dofs must be >= 0");
    if (!(tolerance >= 0.0)) throw ValidationError("tolerance must be >= 0");
    if (max_iterations < 0) throw ValidationError("max_iterations must be >= 0");
    if (bisections_per_mark < 1) throw ValidationError("bisections_per_mark must be >= 1");
    if (!problem.source) throw ValidationError("problem has no source term");
    problem.element.validate();
    if (initial_mesh.num_triangles() == 0) throw ValidationError("initial mesh is empty");
}

double IterationRecord::estimator_reduction_margin() const { return eta2 - 0.5 * eta2_marked - eta2_frozen_next; }

double IterationRecord::oscillation_reduction_margin() const { return osc2 - 0.5 * osc2_refined - osc2_next; }

RefineResult refine_marked(const Mesh& mesh, const MarkSet& marked, int bisections) {
    RefineResult result = refine_with_parents(mesh, marked);
    std::vector<char> is_marked(mesh.num_triangles(), 0);
    for (int t : marked) is_marked[static_cast<std::size_t>(t)] = 1;
    for (int b = 1; b < bisections; ++b) {
        MarkSet again;
        for (std::size_t i = 0; i < result.parent.size(); ++i)
            if (is_marked[static_cast<std::size_t>(result.parent[i])]) again.push_back(static_cast<int>(i));
        RefineResult next = refine_with_parents(result.mesh, again);
        for (auto& p : next.parent) p = result.parent[static_cast<std::size_t>(p)];
        result = std::move(next);
    }
    return result;
}

namespace {

AfemHistory run_loop(const AfemConfig& config, bool uniform) {
    config.validate();
    const ProblemSpec& problem = config.problem;
    AfemHistory history;
    Mesh mesh = config.initial_mesh;
    std::vector<int> parent;  // current mesh -> previous mesh
    for (int k = 0;; ++k) {
        const auto start = std::chrono::steady_clock::now();
        DofMap dofs(mesh, problem.element, problem.kind);
        const SaddleSystem sys = assemble(mesh, dofs, problem);
        FieldPair field = solve(sys);
        IndicatorSet ind = indicators(mesh, dofs, field.sigma, problem.source);
        const IndicatorTotals tot = total(ind);

        IterationRecord rec;
        rec.k = k;
        rec.ntri = static_cast<int>(mesh.num_triangles());
        rec.n_sigma = dofs.n_sigma();
        rec.n_u = dofs.n_u();
        rec.eta2 = tot.eta2;
        rec.osc2 = tot.osc2;
        const Eigen::VectorXd fh = project_source(mesh, dofs, problem.source);
        rec.load_residual = divergence_residual(mesh, dofs, field.sigma, fh) /
                            std::max(displacement_l2_norm(mesh, dofs, fh), 1e-300);
        if (dofs.has_constraint()) rec.trace_mean = std::abs(trace_row(mesh, dofs).dot(field.sigma));

        if (k > 0) {
            auto& prev = history.records.back();
            const Mesh& prev_mesh = history.meshes.back();
            const DofMap prev_dofs(prev_mesh, problem.element, problem.kind);
            const Eigen::VectorXd frozen = prolong_stress(prev_mesh, prev_dofs, history.fields.back().sigma, mesh, dofs, parent);
            prev.eta2_frozen_next = total(estimate(mesh, dofs, frozen)).eta2;
            prev.osc2_next = tot.osc2;
            std::vector<int> children(prev_mesh.num_triangles(), 0);
            for (int p : parent) ++children[static_cast<std::size_t>(p)];
            prev.osc2_refined = 0.0;
            for (std::size_t t = 0; t < children.size(); ++t)
                if (children[t] != 1) prev.osc2_refined += history.indicators.back().osc2[t];
        }

        const bool stop = rec.ndof() >= config.max_dofs || tot.eta2 + tot.osc2 < config.tolerance ||
                          k >= config.max_iterations;
        MarkSet marked;
        if (!stop) {
            if (uniform) {
                marked.resize(mesh.num_triangles());
                std::iota(marked.begin(), marked.end(), 0);
            } else {
                marked = doerfler_mark(ind, config.theta);
            }
        }
        rec.nmarked = static_cast<int>(marked.size());
        rec.eta2_marked = subset_sum(ind.eta2, marked);

        std::optional<RefineResult> next;
        if (!marked.empty()) next = refine_marked(mesh, marked, uniform ? 1 : config.bisections_per_mark);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        history.records.push_back(rec);
        history.meshes.push_back(mesh);
        history.fields.push_back(std::move(field));
        history.indicators.push_back(std::move(ind));
        history.marked.push_back(marked);
        if (!next) break;
        mesh = std::move(next->mesh);
        parent = std::move(next->parent);
    }

    ErrorMode mode = config.error_mode;
    if (mode == ErrorMode::Auto) mode = problem.exact_stress ? ErrorMode::Exact : ErrorMode::Reference;
    if (mode == ErrorMode::Exact && !problem.exact_stress)
        throw ValidationError("exact error requested but the problem has no exact solution");
    if (mode == ErrorMode::Exact) {
        history.error_source = "exact";
        for (std::size_t i = 0; i < history.records.size(); ++i) {
            const DofMap dofs(history.meshes[i], problem.element, problem.kind);
            history.records[i].err_energy =
                energy_error(history.meshes[i], dofs, history.fields[i].sigma, problem.exact_stress);
        }
    } else if (mode == ErrorMode::Reference) {
        history.error_source = "reference";
        const Mesh ref_mesh = refine_uniform(history.meshes.back(), 2);
        const Solution ref = solve_problem(ref_mesh, problem);
        for (std::size_t i = 0; i < history.records.size(); ++i) {
            const DofMap dofs(history.meshes[i], problem.element, problem.kind);
            const Eigen::VectorXd lifted = prolong_stress(history.meshes[i], dofs, history.fields[i].sigma, ref_mesh, ref.dofs);
            history.records[i].err_energy = energy_norm(ref_mesh, ref.dofs, ref.field.sigma - lifted);
        }
    } else {
        history.error_source = "none";
    }
    if (!config.keep_fields) {
        history.meshes.clear();
        history.fields.clear();
        history.indicators.clear();
    }
    return history;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

}  // namespace

AfemHistory afem_run(const AfemConfig& config) { return run_loop(config, false); }

AfemHistory uniform_run(const AfemConfig& config) { return run_loop(config, true); }

std::string history_csv(const AfemHistory& history) {
    std::ostringstream out;
    out << "k,ntri,ndof,eta2,osc2,err_energy,nmarked,seconds\n";
    for (const auto& r : history.records)
        out << r.k << ',' << r.ntri << ',' << r.ndof() << ',' << format_double(r.eta2) << ',' << format_double(r.osc2)
            << ',' << format_double(r.err_energy) << ',' << r.nmarked << ',' << format_double(r.seconds) << '\n';
    return out.str();
}

void write_history_csv(const AfemHistory& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << history_csv(history);
}

std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open history file " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "k,ntri,ndof,eta2,osc2,err_energy,nmarked,seconds")
        throw ValidationError("history file " + path.string() + " has an unexpected header");
    std::vector<HistoryRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 8)
            throw ValidationError("history line " + std::to_string(lineno) + ": expected 8 columns");
        try {
            HistoryRow r;
            r.k = std::stoi(cells[0]);
            r.ntri = std::stoi(cells[1]);
            r.ndof = std::stoll(cells[2]);
            r.eta2 = std::stod(cells[3]);
            r.osc2 = std::stod(cells[4]);
            r.err_energy = cells[5] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[5]);
            r.nmarked = std::stoi(cells[6]);
            r.seconds = std::stod(cells[7]);
            rows.push_back(r);
        } catch (const std::exception&) {
            throw ValidationError("history line " + std::to_string(lineno) + ": malformed number");
        }
    }
    return rows;
}

}  // namespace amfem
