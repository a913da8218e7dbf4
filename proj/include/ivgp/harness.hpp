#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ivgp/engine.hpp"
#include "ivgp/problems.hpp"

namespace ivgp {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    // A synthetic problem name, "keijzer10-subdomain", or a CSV path.
    std::string problem = "keijzer10";
    std::optional<IntervalSource> interval_source; // problem default when unset
    std::filesystem::path interval_file;           // declared intervals for CSV problems
    SplitScheme split = CrossValidation{};         // CSV problems only
    double subdomain_lo = 0.25;
    double subdomain_hi = 0.75;
    double noise_sd = 0.0;
    std::vector<SafetyMode> methods{SafetyMode::IntervalAware};
    std::size_t runs = 1;
    std::uint64_t base_seed = 1;
    std::size_t workers = 1;
    GpConfig gp;
    std::filesystem::path output_dir = "ivgp-out";

    void validate() const;
};

// `key = value` lines; '#' starts a comment. Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Problem instance for run `run_index`; identical across methods.
class ProblemFactory {
public:
    // Loads and checks any data files; throws DataError/ConfigError up front.
    explicit ProblemFactory(const ExperimentConfig& cfg);

    Problem make(std::size_t run_index) const;
    const std::string& name() const { return name_; }

private:
    const ExperimentConfig& cfg_;
    std::string name_;
    std::optional<Dataset> data_;
    std::optional<IntervalEnv> declared_;
    std::vector<Split> splits_;
};

struct TraceRow {
    std::size_t run = 0;
    GenerationStats stats;
};

void write_trace(const std::filesystem::path& path, std::size_t run, const RunTrace& trace);
std::vector<TraceRow> read_trace(const std::filesystem::path& path);

struct SummaryRow {
    std::string method;
    std::string problem;
    std::size_t generation = 0;
    std::string statistic;
    double median = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct FinalSummary {
    std::string method;
    std::string problem;
    std::size_t runs = 0;
    double median_train_rrse = 0.0;
    double median_test_rrse = 0.0;
    double test_ci_low = 0.0;
    double test_ci_high = 0.0;
    std::size_t runs_test_rrse_above_1 = 0; // invalid test results included
    std::size_t invalid_test_runs = 0;
    double max_test_rrse = 0.0; // largest finite value
    double median_invalid_proportion = 0.0;
};

struct Summary {
    std::vector<SummaryRow> rows;
    std::vector<FinalSummary> finals;
};

// Aggregates every trace file under `trace_dir` and writes
// `<out_dir>/<method>.csv` per method plus `<out_dir>/final.csv`.
Summary summarize(const std::filesystem::path& trace_dir, const std::filesystem::path& out_dir);

std::vector<SummaryRow> read_summary(const std::filesystem::path& path);

struct ExperimentResult {
    std::vector<std::filesystem::path> traces;
    std::vector<std::filesystem::path> models;
    Summary summary;
};

// Runs the (method x run) matrix with `cfg.workers` threads, then aggregates.
// Output files do not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Friedman test over final-generation median test RRSE, blocked by problem.
struct FriedmanAnalysis {
    std::vector<std::string> problems;
    std::vector<std::string> methods;
    std::vector<std::vector<double>> values;
    double chi2 = 0.0;
    std::size_t df = 0;
    double p = 1.0;
};

FriedmanAnalysis analyze_friedman(const std::vector<std::filesystem::path>& summary_files);

// "invalid" for the invalid-fitness sentinel, otherwise 17 significant digits.
std::string format_value(double v);
double parse_value(std::string_view s);

} // namespace ivgp
