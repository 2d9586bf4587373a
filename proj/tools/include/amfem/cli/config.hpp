#pragma once

#include "amfem/adapt.hpp"
#include "amfem/mesh.hpp"
#include "amfem/problem.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace amfem::cli {

enum class Subcommand { Run, Uniform, Verify, Rates };

std::string to_string(Subcommand s);
Subcommand parse_subcommand(const std::string& name);

/// Experiment configuration. JSON keys match the member names:
///
///   subcommand      run | uniform | verify | rates      (default run)
///   problem         poisson | stokes                    (required)
///   domain          unit_square | lshape | <mesh file>  (required)
///   mesh_n          grid resolution of built-in domains (default 2)
///   family          rt | bdm                            (default rt)
///   order           0 | 1                               (default 0)
///   theta           marking parameter in (0, 1)         (default 0.3)
///   stop            default | initial                   (initial: solve once)
///   max_dofs, max_iterations, tolerance, bisections_per_mark
///   source          manufactured | constant | linear_x | peak
///                   (default manufactured on unit_square, constant otherwise)
///   source_value    value of the constant source        (default 1)
///   error           auto | exact | reference | none     (default auto)
///   out             output directory                    (default "out")
///   history         history CSV read by `rates`         (default <out>/history.csv)
///   verify_levels   nested pairs checked by `verify`    (default 5)
///   seed            recorded with the outputs           (default 0)
struct RunConfig {
    Subcommand subcommand = Subcommand::Run;
    ProblemKind problem = ProblemKind::Poisson;
    std::string domain;
    int mesh_n = 2;
    Family family = Family::RaviartThomas;
    int order = 0;
    double theta = 0.3;
    std::string stop = "default";
    long long max_dofs = 100000;
    int max_iterations = 1000;
    double tolerance = 1e-8;
    int bisections_per_mark = 2;
    std::string source;
    double source_value = 1.0;
    ErrorMode error = ErrorMode::Auto;
    std::filesystem::path out = "out";
    std::optional<std::filesystem::path> history;
    int verify_levels = 5;
    std::uint64_t seed = 0;

    /// Throws ValidationError naming the offending key.
    void validate() const;

    ElementFamily element() const { return {family, order}; }
    std::filesystem::path history_path() const { return history ? *history : out / "history.csv"; }
};

/// Parses a JSON object; unknown keys and wrong types are rejected.
/// `origin` prefixes error messages (usually the file name).
RunConfig parse_config(const std::string& text, const std::string& origin = "config");
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& config);

Mesh build_mesh(const RunConfig& config);
ProblemSpec build_problem(const RunConfig& config);
AfemConfig build_afem_config(const RunConfig& config);

}  // namespace amfem::cli
