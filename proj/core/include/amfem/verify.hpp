#pragma once

#include "amfem/adapt.hpp"
#include "amfem/mesh.hpp"
#include "amfem/problem.hpp"
#include "amfem/spaces.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace amfem {

/// Dense limits for the kernel and eigenvalue oracles.
inline constexpr int kMaxOrthogonalityDofs = 500;
inline constexpr int kMaxInfSupDofs = 2000;

/// Orthonormal basis (columns) of {tau : B tau = 0}, intersected with
/// {int tr(tau) = 0} for Stokes. Throws ValidationError above kMaxOrthogonalityDofs.
Eigen::MatrixXd stress_kernel_basis(const Mesh& mesh, const DofMap& dofs);

/// max |(A sigma_h, tau_h)| over an orthonormal basis of the discrete kernel.
double check_orthogonality(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& sigma);

struct QuasiOrthogonalityReport {
    int coarse_ntri = 0;
    int fine_ntri = 0;
    double difference = 0.0;        ///< ||sigma_h - sigma~_h||_A
    double osc_refined = 0.0;       ///< osc(f, T_H \ T_h)
    double r1 = 0.0;                ///< difference / osc_refined, the sqrt(C_0) estimate
    double load_identity = 0.0;     ///< relative ||div sigma~_h - Q_H f||
    double pythagoras_lhs = 0.0;    ///< (1 - delta) ||sigma - sigma_h||_A^2
    double pythagoras_rhs = 0.0;    ///< ||sigma - sigma_H||^2 - ||sigma_h - sigma_H||^2 + C_0/delta osc^2
    bool passed = true;
};

/// Compares the fine solution with the intermediate solution that uses the
/// coarse datum Q_H f on the fine mesh; sigma is a reference solution two
/// uniform refinements beyond the fine mesh. delta = 1/2.
QuasiOrthogonalityReport check_quasi_orthogonality(const Mesh& coarse, const Mesh& fine, const ProblemSpec& problem);

struct DiscreteReliabilityReport {
    int coarse_ntri = 0;
    int fine_ntri = 0;
    double numerator = 0.0;    ///< ||sigma_h - sigma_H||_A^2
    double denominator = 0.0;  ///< eta^2(sigma_H, R~) + osc^2(f, T_H \ T_h)
    double ratio = 0.0;        ///< empirical C_Drel lower estimate
    bool passed = true;
};

/// R~ is the set of coarse triangles touching a refined one.
DiscreteReliabilityReport check_discrete_reliability(const Mesh& coarse, const Mesh& fine, const ProblemSpec& problem);

/// beta_h = min_v max_tau (div tau, v) / (||tau||_L2 ||v||_{1,h}), from the
/// smallest generalized eigenvalue of B M^{-1} B^T against the discrete H1
/// Gram matrix. Stokes restricts tau to int tr(tau) = 0.
double estimate_infsup(const Mesh& mesh, const DofMap& dofs);

/// Smallest c with ||tau||_A^2 >= c ||tau||^2 on the discrete kernel.
double estimate_kernel_coercivity(const Mesh& mesh, const DofMap& dofs);

struct EfficiencyReliabilityReport {
    double c_rel = 0.0;  ///< max err^2 / (eta^2 + osc^2)
    double c_eff = 0.0;  ///< min err^2 / eta^2
    double band = 0.0;   ///< max/min of err^2 / eta^2
    int levels = 0;      ///< records with nonzero data
    bool ran = false;
};

/// Throws ValidationError when some record lacks an error value.
EfficiencyReliabilityReport check_efficiency_reliability(const std::vector<IterationRecord>& records);

struct CheckResult {
    std::string name;
    bool ran = false;
    bool passed = false;
    double value = 0.0;
    int coarse_ntri = 0;
    int fine_ntri = 0;
    std::string detail;
};

struct ConstantsReport {
    double c_rel = 0.0;
    double c_eff = 0.0;
    double c_drel = 0.0;
    double c_0 = 0.0;
    double infsup = 0.0;
    std::vector<CheckResult> checks;
    std::string reference;  ///< how sigma was represented in the checks

    bool passed() const;
};

struct VerifyOptions {
    double theta = 0.3;
    /// Nested pairs taken from an adaptive run.
    int pair_levels = 5;
    /// Meshes (initial plus uniform bisections) for the inf-sup estimate.
    int infsup_levels = 3;
    /// Allowed max/min spread of the empirical constants.
    double stability_factor = 10.0;
    double infsup_variation = 0.2;
};

/// Runs every check on nested meshes produced from `initial`.
ConstantsReport verify_suite(const ProblemSpec& problem, const Mesh& initial, const VerifyOptions& options = {});

nlohmann::json to_json(const ConstantsReport& report);

}  // namespace amfem
