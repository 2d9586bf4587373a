#pragma once

#include "amfem/estimator.hpp"
#include "amfem/mesh.hpp"
#include "amfem/problem.hpp"
#include "amfem/spaces.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace amfem {

/// Dörfler marking: the smallest set M with
/// sum_{K in M} total(K) >= theta * sum_K total(K), where total = eta2 + osc2.
/// Elements are taken by decreasing indicator, ties by increasing index.
/// Returns the set sorted by index; empty when all indicators vanish.
MarkSet doerfler_mark(const IndicatorSet& ind, double theta);
MarkSet doerfler_mark(const std::vector<double>& totals, double theta);

enum class ErrorMode {
    Auto,       ///< exact stress when the problem has one, otherwise a reference solution
    Exact,
    Reference,  ///< discrete solution two uniform refinements beyond the finest mesh
    None,
};

struct AfemConfig {
    ProblemSpec problem;
    Mesh initial_mesh;
    double theta = 0.3;
    /// Stop once n_sigma + n_u reaches this many unknowns.
    long long max_dofs = 100000;
    /// Stop once eta^2 + osc^2 drops below this.
    double tolerance = 1e-8;
    int max_iterations = 1000;
    /// Bisections applied to every marked element per step. Two bisections
    /// split all three edges of the element.
    int bisections_per_mark = 2;
    ErrorMode error_mode = ErrorMode::Auto;
    /// Keep meshes and solutions of every iteration in the history.
    bool keep_fields = true;

    /// Throws ValidationError when theta is outside (0, 1) or limits are negative.
    void validate() const;
};

struct IterationRecord {
    int k = 0;
    int ntri = 0;
    int n_sigma = 0;
    int n_u = 0;
    double eta2 = 0.0;
    double osc2 = 0.0;
    double err_energy = std::numeric_limits<double>::quiet_NaN();
    int nmarked = 0;
    double seconds = 0.0;
    /// ||div sigma_h - Q_h f|| / max(||Q_h f||, tiny).
    double load_residual = 0.0;
    /// For Stokes: |int tr(sigma_h)|.
    double trace_mean = 0.0;
    /// Set from the next iteration: eta^2(sigma_k, T_{k+1}) with the frozen field.
    double eta2_frozen_next = std::numeric_limits<double>::quiet_NaN();
    /// eta^2(sigma_k, M_k).
    double eta2_marked = 0.0;
    /// osc^2(f, T_k \ T_{k+1}).
    double osc2_refined = std::numeric_limits<double>::quiet_NaN();
    /// osc^2(f, T_{k+1}).
    double osc2_next = std::numeric_limits<double>::quiet_NaN();

    long long ndof() const noexcept { return static_cast<long long>(n_sigma) + n_u; }
    /// eta2(T_k) - rho eta2(M_k) - eta2_frozen_next with rho = 1/2 (>= 0 when the reduction holds).
    double estimator_reduction_margin() const;
    /// osc2(T_k) - rho osc2(T_k \ T_{k+1}) - osc2(T_{k+1}).
    double oscillation_reduction_margin() const;
};

struct AfemHistory {
    std::vector<IterationRecord> records;
    std::vector<Mesh> meshes;
    std::vector<FieldPair> fields;
    std::vector<IndicatorSet> indicators;
    std::vector<MarkSet> marked;
    std::string error_source;  ///< "exact", "reference", or "none"
};

/// Solve, estimate, mark (Dörfler), refine (newest vertex bisection) until a
/// stop criterion holds.
AfemHistory afem_run(const AfemConfig& config);

/// Same loop with every element marked and bisected once per step.
AfemHistory uniform_run(const AfemConfig& config);

/// Marks the children of `marked` elements again: every element of
/// `marked` ends up bisected `bisections` times (plus closure).
RefineResult refine_marked(const Mesh& mesh, const MarkSet& marked, int bisections);

/// CSV header k,ntri,ndof,eta2,osc2,err_energy,nmarked,seconds.
void write_history_csv(const AfemHistory& history, const std::filesystem::path& path);
std::string history_csv(const AfemHistory& history);

struct HistoryRow {
    int k = 0;
    int ntri = 0;
    long long ndof = 0;
    double eta2 = 0.0;
    double osc2 = 0.0;
    double err_energy = std::numeric_limits<double>::quiet_NaN();
    int nmarked = 0;
    double seconds = 0.0;
};

/// Parses a history CSV written by write_history_csv.
std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path);

}  // namespace amfem
