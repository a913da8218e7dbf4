#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ivgp/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::size_t workers_from_env(std::size_t fallback)
{
    const char* env = std::getenv("IVGP_WORKERS");
    if (env == nullptr || *env == '\0') {
        return fallback;
    }
    try {
        auto n = std::stoul(env);
        if (n == 0) {
            throw std::invalid_argument("zero");
        }
        return n;
    } catch (const std::exception&) {
        throw ivgp::ConfigError(std::string("IVGP_WORKERS must be a positive integer, got '") + env + "'");
    }
}

int cmd_run(const fs::path& config, std::size_t workers, const std::string& output)
{
    auto cfg = ivgp::load_config(config);
    cfg.workers = workers_from_env(cfg.workers);
    if (workers > 0) {
        cfg.workers = workers;
    }
    if (!output.empty()) {
        cfg.output_dir = output;
    }
    auto result = ivgp::run_experiment(cfg);
    std::cout << "wrote " << result.traces.size() << " traces to " << (cfg.output_dir / "traces").string() << '\n';
    for (const auto& f : result.summary.finals) {
        std::printf("%-16s %-20s median test RRSE %s  runs with RRSE > 1: %zu/%zu\n", f.method.c_str(),
            f.problem.c_str(), ivgp::format_value(f.median_test_rrse).c_str(), f.runs_test_rrse_above_1, f.runs);
    }
    return 0;
}

int cmd_summarize(const fs::path& trace_dir, std::string output)
{
    fs::path out = output.empty() ? trace_dir.parent_path() / "summary" : fs::path(output);
    auto summary = ivgp::summarize(trace_dir, out);
    std::cout << "wrote " << summary.rows.size() << " summary rows to " << out.string() << '\n';
    return 0;
}

int cmd_analyze(const std::vector<std::string>& files)
{
    std::vector<fs::path> paths(files.begin(), files.end());
    auto res = ivgp::analyze_friedman(paths);
    std::printf("problems: %zu, methods: %zu\n", res.problems.size(), res.methods.size());
    std::printf("chi2 = %.6g, df = %zu, p = %.6g\n", res.chi2, res.df, res.p);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ivgp: interval-arithmetic genetic programming for symbolic regression"};
    app.require_subcommand(1);

    std::string config;
    std::size_t workers = 0;
    std::string run_output;
    auto* run = app.add_subcommand("run", "Run an experiment matrix described by a config file");
    run->add_option("--config", config, "Experiment config (key = value lines)")->required()->check(CLI::ExistingFile);
    run->add_option("--workers", workers, "Worker threads (overrides IVGP_WORKERS and the config)");
    run->add_option("--output", run_output, "Output directory (overrides the config)");

    std::string trace_dir;
    std::string summary_output;
    auto* summarize = app.add_subcommand("summarize", "Aggregate trace files into per-method summaries");
    summarize->add_option("trace-dir", trace_dir, "Directory of trace CSV files")->required()->check(CLI::ExistingDirectory);
    summarize->add_option("--output", summary_output, "Summary directory (default: sibling 'summary')");

    bool friedman = false;
    std::vector<std::string> summary_files;
    auto* analyze = app.add_subcommand("analyze", "Statistical comparison of summarised methods");
    analyze->add_flag("--friedman", friedman, "Friedman rank test blocked by problem")->required();
    analyze->add_option("files", summary_files, "Per-method summary CSV files")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return cmd_run(config, workers, run_output);
        }
        if (*summarize) {
            return cmd_summarize(trace_dir, summary_output);
        }
        if (*analyze) {
            return cmd_analyze(summary_files);
        }
    } catch (const std::exception& e) {
        std::cerr << "ivgp: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
