// Scenario-driven front end: load a declarative config, dispatch to the
// stability machinery, and emit machine-readable reports.
//
//   ulamlab run <config>... [--out DIR] [--seed N] [--jobs N] [--format json|csv]
//   ulamlab scenarios
//   ulamlab validate <config>

#include <chrono>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ulamlab/scenario.hpp"

namespace fs = std::filesystem;
using ulamlab::scenario::Json;

namespace {

struct JobOutcome {
    std::string name;
    std::string verdict;
    std::string detail;
    int exit_code = 2;
};

JobOutcome run_one(const std::string& config_path, const std::string& out_root,
                   std::optional<std::uint64_t> seed, const std::string& format) {
    JobOutcome outcome;
    outcome.name = fs::path(config_path).stem().string();
    const auto started = std::chrono::steady_clock::now();
    try {
        Json config = ulamlab::scenario::load_config(config_path);
        if (auto problems = ulamlab::scenario::validate(config); !problems.empty()) {
            outcome.verdict = "config-error";
            outcome.detail = problems.front() +
                             (problems.size() > 1
                                  ? " (+" + std::to_string(problems.size() - 1) + " more)"
                                  : "");
            return outcome;
        }
        auto result = ulamlab::scenario::run(config, seed);
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - started)
                              .count();
        ulamlab::scenario::write_report(result, (fs::path(out_root) / outcome.name).string(),
                                        format, ms);
        outcome.verdict = result.verdict;
        outcome.detail = result.detail;
        outcome.exit_code = result.exit_code;
    } catch (const ulamlab::config_error& e) {
        outcome.verdict = "config-error";
        outcome.detail = e.what();
        outcome.exit_code = 2;
    } catch (const std::exception& e) {
        outcome.verdict = "error";
        outcome.detail = e.what();
        outcome.exit_code = 1;
    }
    return outcome;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the stability of Cauchy-type functional equations"};
    app.require_subcommand(1);

    // run
    std::vector<std::string> configs;
    std::string out_dir = "out";
    std::string format = "json";
    unsigned jobs = 1;
    std::uint64_t seed_value = 0;
    auto* run_cmd = app.add_subcommand("run", "run scenario configs and write reports");
    run_cmd->add_option("config", configs, "scenario config file(s)")->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    auto* seed_opt = run_cmd->add_option("--seed", seed_value, "override perturbation seeds");
    run_cmd->add_option("--jobs", jobs, "run scenarios in parallel")->check(CLI::Range(1u, 64u));
    run_cmd->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));

    // scenarios
    auto* list_cmd = app.add_subcommand("scenarios", "list every scenario kind");

    // validate
    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "check a config without executing it");
    validate_cmd->add_option("config", validate_path, "scenario config file")->required();

    CLI11_PARSE(app, argc, argv);

    if (list_cmd->parsed()) {
        for (const auto& entry : ulamlab::scenario::catalog())
            std::cout << entry.kind << " — " << entry.description << " — " << entry.anchor
                      << "\n";
        std::cout << ulamlab::scenario::catalog().size() << " scenario kinds\n";
        return 0;
    }

    if (validate_cmd->parsed()) {
        try {
            Json config = ulamlab::scenario::load_config(validate_path);
            auto problems = ulamlab::scenario::validate(config);
            if (problems.empty()) {
                std::cout << "ok\n";
                return 0;
            }
            for (const auto& p : problems) std::cout << p << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cout << e.what() << "\n";
            return 2;
        }
    }

    // run
    std::optional<std::uint64_t> seed;
    if (seed_opt->count() > 0) seed = seed_value;

    std::vector<JobOutcome> outcomes(configs.size());
    if (jobs <= 1 || configs.size() <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i)
            outcomes[i] = run_one(configs[i], out_dir, seed, format);
    } else {
        std::vector<std::future<JobOutcome>> futures;
        futures.reserve(configs.size());
        for (const std::string& path : configs)
            futures.push_back(std::async(std::launch::async, run_one, path, out_dir, seed,
                                         format));
        for (std::size_t i = 0; i < futures.size(); ++i) outcomes[i] = futures[i].get();
    }

    int worst = 0;
    for (const auto& o : outcomes) {
        std::cout << o.name << ": " << o.verdict;
        if (!o.detail.empty()) std::cout << " (" << o.detail << ")";
        std::cout << (o.exit_code == 0 ? " [ok]" : " [mismatch]") << "\n";
        worst = std::max(worst, o.exit_code);
    }
    return worst;
}
