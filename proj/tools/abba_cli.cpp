// abba: batch runner for the advisor trials and the pump-link demo.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "abba/link/demo.hpp"
#include "abba/link/transport.hpp"
#include "abba/report/report.hpp"
#include "abba/scenario/config.hpp"
#include "abba/scenario/trial.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitPartial = 3;
constexpr int kExitLink = 4;

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

struct RunArgs {
    std::string config;
    std::vector<std::string> scenarios;
    std::optional<int> patients;
    std::optional<int> days;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 0;
    bool check_config = false;
};

int run_command(const RunArgs& args) {
    abba::scenario::RunConfig cfg;
    try {
        cfg = args.config.empty() ? abba::scenario::parse_run_config("") : abba::scenario::load_run_config(args.config);
        if (!args.scenarios.empty()) {
            cfg.scenarios.clear();
            for (const auto& s : args.scenarios) cfg.scenarios.push_back(abba::scenario::scenario_from_string(s));
        }
        if (args.patients) {
            if (*args.patients < 1) throw std::invalid_argument("--patients must be at least 1");
            cfg.patients = *args.patients;
        }
        if (args.days) cfg.base.timeline.last_day = *args.days;
        if (args.seed) {
            cfg.cohort_seed = *args.seed;
            cfg.base.scenario_seed = *args.seed;
        }
        for (auto id : cfg.scenarios) cfg.scenario(id).validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    if (args.check_config) {
        std::cout << abba::scenario::dump_run_config(cfg);
        std::cout << "# config_hash: " << abba::report::config_hash(cfg) << "\n";
        std::cout << "# evaluation weeks:";
        for (const auto& w : abba::scenario::evaluation_weeks(cfg.base.timeline)) {
            std::cout << fmt::format(" {}=D{}-D{}", w.label, w.first_day, w.last_day);
        }
        std::cout << "\n";
        return 0;
    }

    const int threads = args.threads > 0 ? args.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto results = abba::report::run_all(cfg, threads);
    try {
        abba::report::write_outputs(args.out, cfg, results);
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return kExitIo;
    }

    std::cout << fmt::format("{} trials written to {}\n", results.trials.size(), args.out);
    for (const auto& t : results.trials) {
        if (t.failure) std::cerr << "trial failed: " << *t.failure << "\n";
    }
    for (const auto& issue : results.invariant_issues) std::cerr << "invariant: " << issue << "\n";
    if (results.failures() > 0 || !results.invariant_issues.empty()) {
        std::cerr << fmt::format("partial results: {} failed trials, {} invariant issues\n", results.failures(),
                                 results.invariant_issues.size());
        return kExitPartial;
    }
    return 0;
}

int demo_command(double drop_rate, std::uint64_t seed, std::string address) {
    if (address.empty()) address = fmt::format("/tmp/abba-link-{}.sock", ::getpid());
    abba::link::DemoOptions opts;
    opts.drop_rate = drop_rate;
    opts.seed = seed;
    opts.address = address;
    abba::link::DemoResult r;
    try {
        r = abba::link::run_pump_link_demo(opts);
    } catch (const std::exception& e) {
        std::cerr << "link error: " << e.what() << "\n";
        return kExitLink;
    }
    std::cout << "address: " << address << "\n";
    std::cout << "message ledger (pump):\n";
    for (const auto& m : r.pump_history) std::cout << "  " << abba::link::describe(m) << "\n";
    std::cout << fmt::format("sync rounds: {}\ndropped: {}\ncorrupt: {}\nconverged: {}\n", r.rounds, r.dropped,
                             r.corrupt, r.converged ? "yes" : "no");
    return r.converged ? 0 : kExitLink;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive basal-bolus advisor: virtual trials and pump-link demo"};
    app.require_subcommand(1);
    app.set_version_flag("--version", abba::report::kVersion);

    RunArgs run;
    run.out = env_or("ABBA_OUT", "abba-out");
    auto* run_cmd = app.add_subcommand("run", "Run virtual trials and write the report tree");
    run_cmd->add_option("-c,--config", run.config, "YAML run config; every key defaults to the protocol value")
        ->check(CLI::ExistingFile);
    run_cmd->add_option("-s,--scenario", run.scenarios, "Scenario ids (S1..S4), repeatable or comma separated")
        ->delimiter(',');
    run_cmd->add_option("-n,--patients", run.patients, "Cohort size");
    run_cmd->add_option("-d,--days", run.days, "Last simulated day label (full protocol: 98)");
    run_cmd->add_option("--seed", run.seed, "Master seed for cohort and scenario streams");
    run_cmd->add_option("-o,--out", run.out, "Output directory (default $ABBA_OUT or ./abba-out)");
    run_cmd->add_option("-j,--threads", run.threads, "Worker threads (default: all cores)");
    run_cmd->add_flag("--check-config", run.check_config, "Validate and print the resolved config, then exit");

    double drop_rate = 0.0;
    std::uint64_t demo_seed = 1;
    std::string address = env_or("ABBA_LINK_ADDR", "");
    auto* demo_cmd = app.add_subcommand("demo-pump-link", "Replay one scripted day between a mock pump and the advisor");
    demo_cmd->add_option("--drop-rate", drop_rate, "Probability of dropping each record in transit")
        ->check(CLI::Range(0.0, 0.95));
    demo_cmd->add_option("--seed", demo_seed, "Seed of the fault injector and the simulated day");
    demo_cmd->add_option("--address", address, "AF_UNIX socket path (default $ABBA_LINK_ADDR or a temp path)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;  // usage errors count as configuration errors
    }

    if (run_cmd->parsed()) return run_command(run);
    return demo_command(drop_rate, demo_seed, address);
}
