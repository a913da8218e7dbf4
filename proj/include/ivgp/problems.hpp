#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ivgp/dataset.hpp"
#include "ivgp/expr_tree.hpp"
#include "ivgp/random.hpp"

namespace ivgp {

enum class IntervalSource { Declared, Estimated, Measured };

std::string_view interval_source_name(IntervalSource s);
std::optional<IntervalSource> interval_source_from_name(std::string_view name);

struct Problem {
    std::string name;
    Dataset train;
    Dataset test;
    IntervalEnv env;
    IntervalSource interval_source = IntervalSource::Estimated;
    std::optional<IntervalEnv> declared; // known input domain, when one exists
};

// Recomputes `problem.env` from the requested source. Declared requires
// `problem.declared`; Measured uses train and test rows together.
void apply_interval_source(Problem& problem, IntervalSource source);

struct SyntheticOptions {
    double noise_sd = 0.0; // Gaussian response noise, Friedman generators only
};

// keijzer10, keijzer13, pagie1, friedman1, friedman2, friedman3.
// Throws std::invalid_argument for any other name.
Problem gen_synthetic(std::string_view name, Rng& rng, const SyntheticOptions& options = {});

// Keijzer-10 with the 20 training rows drawn from [lo, hi]^2 while the test
// grid still spans [0, 1]^2. Used to probe interval-estimation sensitivity.
Problem gen_keijzer10_subdomain(double lo, double hi, Rng& rng);

double keijzer10(double x1, double x2);
double keijzer13(double x1, double x2);
double pagie1(double x1, double x2);

// Error in an input file, with 1-based line/column (line 1 is the header).
class DataError : public std::runtime_error {
public:
    DataError(const std::string& message, std::size_t row = 0, std::size_t column = 0);

    std::size_t row() const { return row_; }
    std::size_t column() const { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text);

// Two-column (lo, hi) interval file keyed by feature name:
//   feature,lo,hi
//   x1,0,1
IntervalEnv load_interval_file(const std::filesystem::path& path, const std::vector<std::string>& feature_names);

IntervalEnv estimate_intervals(const Dataset& data, double margin = 0.0);

// Share of `test_iv` not covered by `train_iv`.
double uncovered_fraction(const Interval& train_iv, const Interval& test_iv);

struct Holdout {
    double train_fraction = 0.1;
};

struct CrossValidation {
    std::size_t rounds = 10;
    std::size_t folds = 10;
};

using SplitScheme = std::variant<Holdout, CrossValidation>;

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

std::vector<Split> make_splits(std::size_t n, const SplitScheme& scheme, Rng& rng);

} // namespace ivgp
