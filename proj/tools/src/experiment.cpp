#include "amfem/cli/experiment.hpp"

#include "amfem/error.hpp"
#include "amfem/estimator.hpp"
#include "amfem/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace amfem::cli {

namespace {

using Json = nlohmann::json;

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json fit_json(const RateFit& fit) {
    return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}, {"points", fit.points}};
}

void write_json(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void prepare_output(const RunConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.out, ec);
    if (ec) throw ValidationError("cannot create output directory " + config.out.string() + ": " + ec.message());
}

std::vector<HistoryRow> rows_of(const AfemHistory& history) {
    std::vector<HistoryRow> rows;
    for (const auto& r : history.records)
        rows.push_back({r.k, r.ntri, r.ndof(), r.eta2, r.osc2, r.err_energy, r.nmarked, r.seconds});
    return rows;
}

Json check(const std::string& name, bool passed, double value, const std::string& detail) {
    return {{"name", name}, {"passed", passed}, {"value", number(value)}, {"detail", detail}};
}

ExperimentResult run_loop(const RunConfig& config, bool uniform) {
    const AfemConfig afem = build_afem_config(config);
    const AfemHistory history = uniform ? uniform_run(afem) : afem_run(afem);
    prepare_output(config);
    write_history_csv(history, config.out / "history.csv");
    Json hist = history_json(history);
    hist["config"] = to_json(config);
    write_json(hist, config.out / "history.json");
    for (std::size_t k = 0; k < history.indicators.size(); ++k)
        write_indicators_csv(history.indicators[k], config.out / ("indicators_" + std::to_string(k) + ".csv"));

    ExperimentResult result;
    Json checks = Json::array();
    double load = 0.0;
    double trace = 0.0;
    for (const auto& r : history.records) {
        load = std::max(load, r.load_residual);
        trace = std::max(trace, r.trace_mean);
    }
    checks.push_back(check("load_identity", load <= 1e-10, load, "max relative ||div sigma_h - Q_h f||"));
    if (afem.problem.kind == ProblemKind::Stokes)
        checks.push_back(check("trace_constraint", trace <= 1e-10, trace, "max |int tr(sigma_h)|"));
    if (!uniform) {
        double est = std::numeric_limits<double>::infinity();
        double osc = std::numeric_limits<double>::infinity();
        bool osc_ok = true;
        for (const auto& r : history.records) {
            if (std::isnan(r.eta2_frozen_next)) continue;
            est = std::min(est, r.estimator_reduction_margin());
            const double margin = r.oscillation_reduction_margin();
            osc = std::min(osc, margin);
            osc_ok = osc_ok && margin >= -(1e-10 * r.osc2 + 1e-14);
        }
        checks.push_back(check("estimator_reduction", !(est < -1e-10), est,
                               "min of eta2 - eta2(M)/2 - eta2(frozen sigma, next mesh)"));
        checks.push_back(check("oscillation_reduction", osc_ok, osc,
                               "min of osc2 - osc2(refined)/2 - osc2(next mesh)"));
    }
    for (const auto& c : checks) result.passed = result.passed && c["passed"].get<bool>();

    const auto& last = history.records.back();
    result.report = {{"config", to_json(config)},
                     {"summary",
                      {{"iterations", history.records.size()},
                       {"ntri", last.ntri},
                       {"ndof", last.ndof()},
                       {"eta2", last.eta2},
                       {"osc2", last.osc2},
                       {"err_energy", number(last.err_energy)},
                       {"error_source", history.error_source}}},
                     {"rates", rates_report(rows_of(history))},
                     {"checks", checks},
                     {"passed", result.passed}};
    write_json(result.report, config.out / "report.json");
    return result;
}

}  // namespace

Json history_json(const AfemHistory& history) {
    Json records = Json::array();
    for (const auto& r : history.records)
        records.push_back({{"k", r.k},
                           {"ntri", r.ntri},
                           {"n_sigma", r.n_sigma},
                           {"n_u", r.n_u},
                           {"ndof", r.ndof()},
                           {"eta2", r.eta2},
                           {"osc2", r.osc2},
                           {"err_energy", number(r.err_energy)},
                           {"nmarked", r.nmarked},
                           {"seconds", r.seconds},
                           {"load_residual", r.load_residual},
                           {"trace_mean", r.trace_mean},
                           {"eta2_marked", r.eta2_marked},
                           {"eta2_frozen_next", number(r.eta2_frozen_next)},
                           {"osc2_refined", number(r.osc2_refined)},
                           {"osc2_next", number(r.osc2_next)}});
    return {{"error_source", history.error_source}, {"records", records}};
}

Json rates_report(const std::vector<HistoryRow>& rows) {
    Json out = Json::object();
    std::vector<std::pair<double, double>> est;
    std::vector<std::pair<double, double>> err;
    for (const auto& r : rows) {
        if (r.eta2 + r.osc2 > 0.0) est.emplace_back(static_cast<double>(r.ndof), r.eta2 + r.osc2);
        if (std::isfinite(r.err_energy) && r.err_energy > 0.0) err.emplace_back(static_cast<double>(r.ndof), r.err_energy);
    }
    out["eta2_osc2"] = est.size() >= 3 ? fit_json(fit_tail_rate(est)) : Json(nullptr);
    out["err_energy"] = err.size() >= 3 ? fit_json(fit_tail_rate(err)) : Json(nullptr);
    return out;
}

ExperimentResult run_experiment(const RunConfig& config) {
    config.validate();
    switch (config.subcommand) {
        case Subcommand::Run: return run_loop(config, false);
        case Subcommand::Uniform: return run_loop(config, true);
        case Subcommand::Verify: {
            const ProblemSpec problem = build_problem(config);
            const Mesh mesh = build_mesh(config);
            VerifyOptions options;
            options.theta = config.theta;
            options.pair_levels = config.verify_levels;
            const ConstantsReport report = verify_suite(problem, mesh, options);
            prepare_output(config);
            ExperimentResult result;
            result.passed = report.passed();
            result.report = to_json(report);
            result.report["config"] = to_json(config);
            write_json(result.report, config.out / "report.json");
            return result;
        }
        case Subcommand::Rates: {
            const auto rows = read_history_csv(config.history_path());
            ExperimentResult result;
            result.report = {{"config", to_json(config)}, {"history", config.history_path().string()},
                             {"rates", rates_report(rows)}};
            prepare_output(config);
            write_json(result.report, config.out / "rates.json");
            return result;
        }
    }
    throw ValidationError("unknown subcommand");
}

}  // namespace amfem::cli
