#pragma once

#include "amfem/mesh.hpp"
#include "amfem/problem.hpp"
#include "amfem/spaces.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <vector>

namespace amfem {

/// Per-element squared indicators on one mesh.
struct IndicatorSet {
    std::vector<double> eta2;
    std::vector<double> osc2;

    std::size_t size() const noexcept { return eta2.size(); }
    /// eta2(K) + osc2(K).
    std::vector<double> combined() const;
};

struct IndicatorTotals {
    double eta2 = 0.0;
    double osc2 = 0.0;
};

/// eta^2(K) = h_K^2 ||rot(A sigma_h)||_K^2 + sum_{E in K} h_E ||[A sigma_h . t_E]||_E^2,
/// with h_K = |K|^{1/2}, h_E = |E|, rot taken rowwise, and the one-sided
/// trace as jump on boundary edges. Interior edges contribute to both
/// neighbours. The osc2 part is left at zero.
IndicatorSet estimate(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma);

/// osc^2(K) = h_K^2 ||f - Q_h f||_K^2 by quadrature of degree 2k + 4.
std::vector<double> oscillation(const Mesh& mesh, const DofMap& dofs, const Source& f);

/// Both parts.
IndicatorSet indicators(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma, const Source& f);

/// Sums over a subset of elements. Throws ValidationError on bad indices.
IndicatorTotals total(const IndicatorSet& ind, const std::vector<int>& subset);
/// Sums over all elements.
IndicatorTotals total(const IndicatorSet& ind);

/// Sum of a per-element vector over a subset.
double subset_sum(const std::vector<double>& values, const std::vector<int>& subset);

/// CSV with header element_id,eta2,osc2.
void write_indicators_csv(const IndicatorSet& ind, const std::filesystem::path& path);

}  // namespace amfem
