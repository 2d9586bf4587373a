#include "amfem/cli/config.hpp"

#include "amfem/error.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace amfem::cli {

namespace {

using Json = nlohmann::json;

std::string key_error(const std::string& origin, const std::string& key, const std::string& message) {
    return origin + "." + key + ": " + message;
}

template <typename T>
T get_as(const Json& value, const std::string& origin, const std::string& key, const char* type) {
    try {
        return value.get<T>();
    } catch (const Json::exception&) {
        throw ValidationError(key_error(origin, key, std::string("expected ") + type));
    }
}

int get_int(const Json& value, const std::string& origin, const std::string& key) {
    if (!value.is_number_integer()) throw ValidationError(key_error(origin, key, "expected an integer"));
    return get_as<int>(value, origin, key, "an integer");
}

double get_number(const Json& value, const std::string& origin, const std::string& key) {
    if (!value.is_number()) throw ValidationError(key_error(origin, key, "expected a number"));
    return value.get<double>();
}

std::string get_string(const Json& value, const std::string& origin, const std::string& key) {
    if (!value.is_string()) throw ValidationError(key_error(origin, key, "expected a string"));
    return value.get<std::string>();
}

const char* error_mode_name(ErrorMode m) {
    switch (m) {
        case ErrorMode::Auto: return "auto";
        case ErrorMode::Exact: return "exact";
        case ErrorMode::Reference: return "reference";
        case ErrorMode::None: return "none";
    }
    return "auto";
}

}  // namespace

std::string to_string(Subcommand s) {
    switch (s) {
        case Subcommand::Run: return "run";
        case Subcommand::Uniform: return "uniform";
        case Subcommand::Verify: return "verify";
        case Subcommand::Rates: return "rates";
    }
    return "run";
}

Subcommand parse_subcommand(const std::string& name) {
    if (name == "run") return Subcommand::Run;
    if (name == "uniform") return Subcommand::Uniform;
    if (name == "verify") return Subcommand::Verify;
    if (name == "rates") return Subcommand::Rates;
    throw ValidationError("unknown subcommand '" + name + "' (expected run, uniform, verify or rates)");
}

void RunConfig::validate() const {
    const auto fail = [](const std::string& key, const std::string& msg) {
        throw ValidationError(key_error("config", key, msg));
    };
    if (domain.empty()) fail("domain", "required (unit_square, lshape or a mesh file)");
    if (mesh_n < 1) fail("mesh_n", "must be >= 1");
    if (order != 0 && order != 1) fail("order", "must be 0 or 1");
    if (family == Family::BrezziDouglasMarini && order != 0) fail("order", "bdm is available for order 0 only");
    if (!(theta > 0.0 && theta < 1.0)) fail("theta", "must lie in (0, 1)");
    if (stop != "default" && stop != "initial") fail("stop", "must be 'default' or 'initial'");
    if (max_dofs < 0) fail("max_dofs", "must be >= 0");
    if (max_iterations < 0) fail("max_iterations", "must be >= 0");
    if (!(tolerance >= 0.0)) fail("tolerance", "must be >= 0");
    if (bisections_per_mark < 1) fail("bisections_per_mark", "must be >= 1");
    if (verify_levels < 1) fail("verify_levels", "must be >= 1");
    if (!source.empty() && source != "manufactured" && source != "constant" && source != "linear_x" &&
        source != "peak")
        fail("source", "unknown source '" + source + "'");
    if (source == "manufactured" && domain != "unit_square")
        fail("source", "the manufactured solution is defined on unit_square only");
    if (error == ErrorMode::Exact && source != "manufactured" && !(source.empty() && domain == "unit_square"))
        fail("error", "exact errors need the manufactured source");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    if (!j.is_object()) throw ValidationError(origin + ": top level must be a JSON object");

    RunConfig c;
    using Setter = std::function<void(const Json&, const std::string&)>;
    const std::map<std::string, Setter> setters{
        {"subcommand",
         [&](const Json& v, const std::string& k) {
             try {
                 c.subcommand = parse_subcommand(get_string(v, origin, k));
             } catch (const ValidationError& e) {
                 throw ValidationError(key_error(origin, k, e.what()));
             }
         }},
        {"problem",
         [&](const Json& v, const std::string& k) {
             const std::string s = get_string(v, origin, k);
             if (s == "poisson") c.problem = ProblemKind::Poisson;
             else if (s == "stokes") c.problem = ProblemKind::Stokes;
             else throw ValidationError(key_error(origin, k, "expected 'poisson' or 'stokes', got '" + s + "'"));
         }},
        {"domain", [&](const Json& v, const std::string& k) { c.domain = get_string(v, origin, k); }},
        {"mesh_n", [&](const Json& v, const std::string& k) { c.mesh_n = get_int(v, origin, k); }},
        {"family",
         [&](const Json& v, const std::string& k) {
             const std::string s = get_string(v, origin, k);
             if (s == "rt") c.family = Family::RaviartThomas;
             else if (s == "bdm") c.family = Family::BrezziDouglasMarini;
             else throw ValidationError(key_error(origin, k, "expected 'rt' or 'bdm', got '" + s + "'"));
         }},
        {"order", [&](const Json& v, const std::string& k) { c.order = get_int(v, origin, k); }},
        {"theta", [&](const Json& v, const std::string& k) { c.theta = get_number(v, origin, k); }},
        {"stop", [&](const Json& v, const std::string& k) { c.stop = get_string(v, origin, k); }},
        {"max_dofs",
         [&](const Json& v, const std::string& k) {
             if (!v.is_number_integer()) throw ValidationError(key_error(origin, k, "expected an integer"));
             c.max_dofs = v.get<long long>();
         }},
        {"max_iterations", [&](const Json& v, const std::string& k) { c.max_iterations = get_int(v, origin, k); }},
        {"tolerance", [&](const Json& v, const std::string& k) { c.tolerance = get_number(v, origin, k); }},
        {"bisections_per_mark",
         [&](const Json& v, const std::string& k) { c.bisections_per_mark = get_int(v, origin, k); }},
        {"source", [&](const Json& v, const std::string& k) { c.source = get_string(v, origin, k); }},
        {"source_value", [&](const Json& v, const std::string& k) { c.source_value = get_number(v, origin, k); }},
        {"error",
         [&](const Json& v, const std::string& k) {
             const std::string s = get_string(v, origin, k);
             if (s == "auto") c.error = ErrorMode::Auto;
             else if (s == "exact") c.error = ErrorMode::Exact;
             else if (s == "reference") c.error = ErrorMode::Reference;
             else if (s == "none") c.error = ErrorMode::None;
             else throw ValidationError(key_error(origin, k, "expected auto, exact, reference or none"));
         }},
        {"out", [&](const Json& v, const std::string& k) { c.out = get_string(v, origin, k); }},
        {"history", [&](const Json& v, const std::string& k) { c.history = get_string(v, origin, k); }},
        {"verify_levels", [&](const Json& v, const std::string& k) { c.verify_levels = get_int(v, origin, k); }},
        {"seed",
         [&](const Json& v, const std::string& k) {
             if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                 throw ValidationError(key_error(origin, k, "expected a non-negative integer"));
             c.seed = v.get<std::uint64_t>();
         }},
    };
    for (const auto& [key, value] : j.items()) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw ValidationError(origin + ": unknown key '" + key + "'");
        it->second(value, key);
    }
    if (!j.contains("problem")) throw ValidationError(key_error(origin, "problem", "required"));
    if (!j.contains("domain")) throw ValidationError(key_error(origin, "domain", "required"));
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.string());
}

nlohmann::json to_json(const RunConfig& c) {
    Json j{{"subcommand", to_string(c.subcommand)},
           {"problem", to_string(c.problem)},
           {"domain", c.domain},
           {"mesh_n", c.mesh_n},
           {"family", c.family == Family::RaviartThomas ? "rt" : "bdm"},
           {"order", c.order},
           {"theta", c.theta},
           {"stop", c.stop},
           {"max_dofs", c.max_dofs},
           {"max_iterations", c.max_iterations},
           {"tolerance", c.tolerance},
           {"bisections_per_mark", c.bisections_per_mark},
           {"source", c.source},
           {"source_value", c.source_value},
           {"error", error_mode_name(c.error)},
           {"out", c.out.string()},
           {"verify_levels", c.verify_levels},
           {"seed", c.seed}};
    if (c.history) j["history"] = c.history->string();
    return j;
}

Mesh build_mesh(const RunConfig& c) {
    if (c.domain == "unit_square") return generate_unit_square(c.mesh_n);
    if (c.domain == "lshape") return generate_lshape(c.mesh_n);
    return read_mesh_json(c.domain);
}

ProblemSpec build_problem(const RunConfig& c) {
    std::string source = c.source;
    if (source.empty()) source = c.domain == "unit_square" ? "manufactured" : "constant";
    return builtin_problem(c.problem, c.element(), source, c.source_value);
}

AfemConfig build_afem_config(const RunConfig& c) {
    AfemConfig a;
    a.problem = build_problem(c);
    a.initial_mesh = build_mesh(c);
    a.theta = c.theta;
    a.max_dofs = c.max_dofs;
    a.max_iterations = c.stop == "initial" ? 0 : c.max_iterations;
    a.tolerance = c.tolerance;
    a.bisections_per_mark = c.bisections_per_mark;
    a.error_mode = c.error;
    return a;
}

}  // namespace amfem::cli
