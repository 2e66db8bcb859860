#include "wdlab/runner.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

std::string redirect(const std::string& path, const std::string& dflt, const std::string& dir) {
    std::string name = path.empty() ? dflt : std::filesystem::path(path).filename().string();
    return (std::filesystem::path(dir) / name).string();
}

int run(const std::string& subcommand, const Options& opt) {
    using namespace wdlab;
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    RunResult res;
    try {
        cfg = load_config(opt.config);
        if (cfg.kind != subcommand)
            throw Error(ErrorCode::ConfigInvalid,
                        "experiment.kind: is \"" + cfg.kind + "\" but the subcommand is \"" + subcommand + "\"");
        if (opt.seed) cfg.seed = *opt.seed;
        if (!opt.out_dir.empty()) {
            cfg.output.report = redirect(cfg.output.report, "report.json", opt.out_dir);
            cfg.output.orbits = redirect(cfg.output.orbits, "orbits.csv", opt.out_dir);
            cfg.output.plot = redirect(cfg.output.plot, "plot.svg", opt.out_dir);
        }
        res = run_experiment(cfg);
    } catch (const Error& e) {
        std::cerr << "wdlab: " << e.what() << "\n";
        return ExitConfigInvalid;
    }
    try {
        write_outputs(cfg, res);
    } catch (const Error& e) {
        std::cerr << "wdlab: " << e.what() << "\n";
        return ExitExperimentError;
    }
    if (cfg.output.report.empty()) std::cout << report_text(res);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "wdlab " << subcommand << ": status " << res.report["status"].get<std::string>() << ", exit "
              << res.exit_code << ", " << secs << " s\n";
    if (res.report.contains("error")) std::cerr << "  " << res.report["error"]["message"].get<std::string>() << "\n";
    for (const auto& f : res.report["theorem_consistency"]["failures"]) std::cerr << "  " << f.get<std::string>() << "\n";
    return res.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wdlab: orbit and boundary experiments on Hilbert, Thompson and hyperbolic geometries"};
    app.require_subcommand(1);
    Options opt;
    std::string chosen;
    for (const auto& kind : wdlab::experiment_kinds) {
        auto* sub = app.add_subcommand(kind, "run a " + kind + " experiment");
        sub->add_option("--config", opt.config, "config JSON")->required();
        sub->add_option("--seed", opt.seed, "override the master seed");
        sub->add_option("--out-dir", opt.out_dir, "write report.json, orbits.csv and plot.svg here");
        sub->callback([&chosen, kind] { chosen = kind; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : wdlab::ExitConfigInvalid;
    }
    return run(chosen, opt);
}
