#include "amfem/cli/config.hpp"
#include "amfem/cli/experiment.hpp"
#include "amfem/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCheck = 3;

struct Flags {
    std::string config;
    std::optional<double> theta;
    std::optional<long long> max_dofs;
    std::optional<std::string> out;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive mixed finite element experiments"};
    app.require_subcommand(1);
    Flags flags;
    for (const char* name : {"run", "uniform", "verify", "rates"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", flags.config, "JSON configuration file")->required();
        sub->add_option("--theta", flags.theta, "marking parameter in (0, 1)");
        sub->add_option("--max-dofs", flags.max_dofs, "stop once this many unknowns are reached");
        sub->add_option("--out", flags.out, "output directory");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        amfem::cli::RunConfig config = amfem::cli::load_config(flags.config);
        config.subcommand = amfem::cli::parse_subcommand(app.get_subcommands().front()->get_name());
        if (flags.theta) config.theta = *flags.theta;
        if (flags.max_dofs) config.max_dofs = *flags.max_dofs;
        if (flags.out) config.out = *flags.out;
        config.validate();
        const amfem::cli::ExperimentResult result = amfem::cli::run_experiment(config);
        std::cout << result.report.dump(2) << '\n';
        if (!result.passed) {
            std::cerr << "amfem: a verification check failed\n";
            return kExitCheck;
        }
        return kExitOk;
    } catch (const amfem::ValidationError& e) {
        std::cerr << "amfem: " << e.what() << '\n';
        return kExitValidation;
    } catch (const amfem::CheckFailure& e) {
        std::cerr << "amfem: " << e.what() << '\n';
        return kExitCheck;
    } catch (const std::exception& e) {
        std::cerr << "amfem: " << e.what() << '\n';
        return kExitError;
    }
}
