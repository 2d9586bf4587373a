#include "amfem/cli/config.hpp"
#include "amfem/cli/experiment.hpp"
#include "amfem/cli/rates.hpp"
#include "amfem/error.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace amfem;
using namespace amfem::cli;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("amfem_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// history.csv with the seconds column removed.
std::string without_seconds(const std::string& csv) {
    std::stringstream in(csv), out;
    std::string line;
    while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << '\n';
    return out.str();
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(AMFEM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
    const RunConfig c = parse_config(R"({"problem": "poisson", "domain": "unit_square"})");
    CHECK(c.theta == 0.3);
    CHECK(c.family == Family::RaviartThomas);
    CHECK(c.order == 0);
    CHECK(c.subcommand == Subcommand::Run);
    CHECK(c.max_dofs == 100000);
    CHECK(c.tolerance == 1e-8);
    CHECK(c.mesh_n == 2);
    CHECK(c.history_path() == fs::path("out") / "history.csv");
    CHECK(build_problem(c).source_name == "manufactured");
    CHECK(build_mesh(c).num_triangles() == 8);
    const RunConfig l = parse_config(R"({"problem": "stokes", "domain": "lshape", "family": "bdm"})");
    CHECK(build_problem(l).source_name == "constant");
    CHECK(build_problem(l).kind == ProblemKind::Stokes);
    CHECK(l.element() == ElementFamily{Family::BrezziDouglasMarini, 0});
}

TEST_CASE("config validation errors name the key") {
    const auto message = [](const std::string& text) -> std::string {
        try {
            RunConfig c = parse_config(text);
            c.validate();
        } catch (const ValidationError& e) {
            return e.what();
        }
        return "";
    };
    CHECK(message(R"({"problem": "poisson", "domain": "unit_square", "theta": 1.5})").find("theta") != std::string::npos);
    CHECK(message(R"({"problem": "poisson", "domain": "unit_square", "theta": 0})").find("theta") != std::string::npos);
    const std::string unknown = message(R"({"problem": "poisson", "domain": "unit_square", "thета": 0.3})");
    CHECK(unknown.find("unknown key") != std::string::npos);
    CHECK(unknown.find("thета") != std::string::npos);
    CHECK(message(R"({"problem": "poisson", "domain": "unit_square", "theta": "big"})").find("theta") != std::string::npos);
    CHECK(message(R"({"problem": "elasticity", "domain": "unit_square"})").find("problem") != std::string::npos);
    CHECK(message(R"({"problem": "poisson"})").find("domain") != std::string::npos);
    CHECK(message(R"({"problem": "poisson", "domain": "unit_square", "order": 2})").find("order") != std::string::npos);
    CHECK(message(R"({"problem": "poisson", "domain": "unit_square", "family": "bdm", "order": 1})").find("order") !=
          std::string::npos);
    CHECK(message(R"({"problem": "poisson", "domain": "lshape", "source": "manufactured"})").find("source") !=
          std::string::npos);
    CHECK(message(R"([1, 2])") != "");
    CHECK(message("{not json") != "");
    CHECK(message(R"({"problem": "poisson", "domain": "unit_square"})") == "");
}

TEST_CASE("config serializes and parses back") {
    RunConfig c = parse_config(R"({"problem": "stokes", "domain": "lshape", "family": "rt", "order": 1,
                                   "theta": 0.45, "max_dofs": 1234, "seed": 7, "error": "none"})");
    const RunConfig d = parse_config(to_json(c).dump());
    CHECK(to_json(d) == to_json(c));
    CHECK(d.theta == 0.45);
    CHECK(d.seed == 7);
    CHECK(d.error == ErrorMode::None);
}

TEST_CASE("rate fits") {
    const RateFit f = fit_rate({{100, 0.2}, {400, 0.1}, {1600, 0.05}});
    CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(f.residual == doctest::Approx(0.0).scale(1.0));
    CHECK(f.points == 3);
    CHECK(f.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-13));
    CHECK(fit_rate({{10, 3}, {20, 3}, {40, 3}, {80, 3}}).slope == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS_AS(fit_rate({{100, 0.2}, {400, 0.1}}), ValidationError);
    CHECK_THROWS_AS(fit_rate({{100, 0.2}, {400, -0.1}, {800, 0.05}}), ValidationError);
    CHECK_THROWS_AS(fit_rate({{100, 0.2}, {100, 0.1}, {100, 0.05}}), ValidationError);
    // Noisy line: slope close, residual positive.
    const RateFit g = fit_rate({{10, 1.0}, {100, 0.11}, {1000, 0.0098}, {10000, 0.00102}});
    CHECK(g.slope == doctest::Approx(-1.0).epsilon(0.02));
    CHECK(g.residual > 0.0);
    // Tail: 8 points use the last 4; the head is ignored.
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 8; ++i) pts.emplace_back(std::pow(2.0, i), i < 4 ? 1.0 : std::pow(2.0, -i));
    const RateFit t = fit_tail_rate(pts);
    CHECK(t.points == 4);
    CHECK(t.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fit_tail_rate({{1, 1}, {2, 0.5}, {4, 0.25}, {8, 0.125}, {16, 0.0625}}).points == 3);
}

TEST_CASE("run with stop = initial writes a single record") {
    const fs::path out = scratch("initial");
    RunConfig c = parse_config(R"({"problem": "poisson", "domain": "unit_square", "stop": "initial"})");
    c.out = out;
    const ExperimentResult r = run_experiment(c);
    CHECK(r.passed);
    const std::vector<HistoryRow> rows = read_history_csv(out / "history.csv");
    CHECK(rows.size() == 1);
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "history.json"));
    CHECK(fs::exists(out / "indicators_0.csv"));
    fs::remove_all(out);
}

TEST_CASE("run outputs embed the config and are reproducible") {
    const fs::path a = scratch("repro_a"), b = scratch("repro_b");
    RunConfig c = parse_config(R"({"problem": "stokes", "domain": "unit_square", "max_dofs": 2500, "family": "bdm"})");
    c.out = a;
    const ExperimentResult ra = run_experiment(c);
    c.out = b;
    const ExperimentResult rb = run_experiment(c);
    CHECK(ra.passed);
    CHECK(without_seconds(slurp(a / "history.csv")) == without_seconds(slurp(b / "history.csv")));
    const auto report = nlohmann::json::parse(slurp(a / "report.json"));
    CHECK(report["config"]["problem"] == "stokes");
    CHECK(report["config"]["max_dofs"] == 2500);
    const auto history = nlohmann::json::parse(slurp(a / "history.json"));
    CHECK(history.contains("config"));
    CHECK(ra.report["summary"] == rb.report["summary"]);
    std::vector<std::string> names;
    for (const auto& chk : report["checks"]) {
        names.push_back(chk["name"]);
        CHECK(chk["passed"].get<bool>());
    }
    for (const char* n : {"load_identity", "trace_constraint", "estimator_reduction", "oscillation_reduction"})
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
    for (std::size_t k = 0; k < history["records"].size(); ++k)
        CHECK(fs::exists(a / ("indicators_" + std::to_string(k) + ".csv")));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("rates subcommand matches a manual fit") {
    const fs::path out = scratch("rates");
    RunConfig c = parse_config(R"({"problem": "poisson", "domain": "lshape", "max_dofs": 3000, "error": "none"})");
    c.out = out;
    run_experiment(c);
    c.subcommand = Subcommand::Rates;
    const ExperimentResult r = run_experiment(c);
    const std::vector<HistoryRow> rows = read_history_csv(out / "history.csv");
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rows) pts.emplace_back(static_cast<double>(row.ndof), row.eta2 + row.osc2);
    const RateFit manual = fit_tail_rate(pts);
    CHECK(r.report["rates"]["eta2_osc2"]["slope"].get<double>() == doctest::Approx(manual.slope).epsilon(1e-12));
    CHECK(r.report["rates"]["eta2_osc2"]["points"].get<int>() == manual.points);
    CHECK(r.report["rates"]["err_energy"].is_null());
    const auto file = nlohmann::json::parse(slurp(out / "rates.json"));
    CHECK(file["config"]["subcommand"] == "rates");
    fs::remove_all(out);
}

TEST_CASE("verify subcommand attempts every check") {
    const fs::path out = scratch("verify");
    RunConfig c = parse_config(R"({"subcommand": "verify", "problem": "poisson", "domain": "unit_square", "verify_levels": 3})");
    c.out = out;
    const ExperimentResult r = run_experiment(c);
    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report["checks"].size() >= 7);
    CHECK(report.contains("constants"));
    CHECK(report["config"]["subcommand"] == "verify");
    CHECK(report["passed"].get<bool>() == r.passed);
    fs::remove_all(out);
}

TEST_CASE("command line exit codes") {
    const fs::path dir = scratch("binary");
    const fs::path good = dir / "good.json", bad = dir / "bad.json", unknown = dir / "unknown.json";
    write_file(good, R"({"problem": "poisson", "domain": "unit_square", "max_dofs": 300})");
    write_file(bad, R"({"problem": "poisson", "domain": "unit_square", "theta": 1.5})");
    write_file(unknown, R"({"problem": "poisson", "domain": "unit_square", "thета": 0.3})");
    const std::string out = " --out " + (dir / "out").string();
    CHECK(run_binary("run --config " + good.string() + out) == 0);
    CHECK(fs::exists(dir / "out" / "history.csv"));
    CHECK(run_binary("uniform --config " + good.string() + out) == 0);
    CHECK(run_binary("rates --config " + good.string() + out) == 0);
    CHECK(run_binary("run --config " + bad.string() + out) == 2);
    CHECK(run_binary("run --config " + unknown.string() + out) == 2);
    CHECK(run_binary("run --config " + good.string() + " --theta 1.5" + out) == 2);
    CHECK(run_binary("run --config " + good.string() + " --max-dofs -5" + out) == 2);
    CHECK(run_binary("run --config " + (dir / "missing.json").string() + out) == 2);
    CHECK(run_binary("run" + out) == 2);
    CHECK(run_binary("frobnicate --config " + good.string()) == 2);
    // The two-triangle square is pre-asymptotic: the stability checks fail.
    const fs::path coarse = dir / "coarse.json";
    write_file(coarse, R"({"problem": "poisson", "domain": "unit_square", "mesh_n": 1, "verify_levels": 3})");
    CHECK(run_binary("verify --config " + coarse.string() + out) == 3);
    fs::remove_all(dir);
}
