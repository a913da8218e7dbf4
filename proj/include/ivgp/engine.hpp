#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ivgp/expr_tree.hpp"
#include "ivgp/problems.hpp"
#include "ivgp/random.hpp"

namespace ivgp {

// How a run guards against operators that are undefined on part of their input.
enum class SafetyMode : std::uint8_t {
    Unprotected,    // IEEE semantics; non-finite predictions invalidate
    Protected,      // x/0 -> 1, log(x) -> ln|x|, log(0) -> 0
    IntervalStatic, // interval analysis rejects trees before evaluation
    IntervalAware,  // safe initialisation plus check-and-repair after variation
};

std::string_view mode_name(SafetyMode mode);
std::optional<SafetyMode> mode_from_name(std::string_view name);

enum class Validity : std::uint8_t { Valid, EvalError, IntervalError };

std::string_view validity_name(Validity v);

// Ordered after every finite fitness; minimisation treats it as the worst value.
inline constexpr double kInvalidFitness = std::numeric_limits<double>::infinity();

inline bool is_invalid_fitness(double f) { return !(f < kInvalidFitness); }

struct Individual {
    Tree tree;
    double fitness = kInvalidFitness;
    Validity validity = Validity::EvalError; // unevaluated individuals count as invalid
    std::optional<double> test_fitness;
};

inline Individual unevaluated(Tree tree)
{
    Individual ind;
    ind.tree = std::move(tree);
    return ind;
}

enum class BuildMethod : std::uint8_t { Grow, Full };

struct GpConfig {
    std::size_t population_size = 200;
    std::size_t generations = 250;
    std::size_t init_min_depth = 2;
    std::size_t init_max_depth = 6;
    double mutation_prob = 0.7;
    double crossover_prob = 0.3;
    std::size_t mutation_max_depth = 4;
    std::size_t max_offspring_depth = 17;
    std::size_t tournament_size = 3;
    std::size_t elitism = 1;
    Interval erc_range = Interval::make(-5.0, 5.0);
    std::vector<Op> functions{std::begin(kAllOps), std::end(kAllOps)};
    SafetyMode mode = SafetyMode::Unprotected;
    std::uint64_t seed = 0;

    // Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

// Root-relative squared error. Returns kInvalidFitness when any prediction is
// non-finite, the response has zero variance, or the ratio overflows.
double rrse(std::span<const double> y, std::span<const double> yhat);

Semantics semantics_for(SafetyMode mode);

Individual evaluate_fitness(Individual ind, const Dataset& train, const IntervalEnv& env, SafetyMode mode);

// Standard (interval-blind) grow/full construction. Terminals are the
// `n_features` inputs plus one ERC slot when `erc` is defined.
Tree random_tree(BuildMethod method, std::size_t min_depth, std::size_t max_depth, std::span<const Op> functions,
    std::size_t n_features, const Interval& erc, Rng& rng);

// Depth limits cycle over [init_min_depth, init_max_depth]; grow and full
// alternate per ramp. Interval-aware mode builds with the safe builder.
std::vector<Individual> ramped_half_and_half(const GpConfig& cfg, const IntervalEnv& env, Rng& rng);

// Index of the tournament winner: lowest fitness, earliest draw on ties.
std::size_t tournament_select(std::span<const Individual> pop, std::size_t k, Rng& rng);

// Offspring of a subtree variation. `site` is the index of the inserted
// subtree's root, or empty when the depth cap rejected the offspring and a
// copy of the first parent was returned.
struct Variation {
    Tree tree;
    std::optional<std::size_t> site;
};

Variation subtree_crossover(const Tree& p1, const Tree& p2, std::size_t max_depth, Rng& rng);
// Donor subtrees come from the safe builder in interval-aware mode.
Variation subtree_mutation(const Tree& p, const GpConfig& cfg, const IntervalEnv& env, Rng& rng);

namespace detail {
    Variation subtree_mutation(const Tree& p, const GpConfig& cfg, const IntervalEnv& env, bool safe_donor, Rng& rng);
} // namespace detail

struct GenerationStats {
    std::size_t generation = 0;
    double best_train_rrse = kInvalidFitness;
    double best_test_rrse = kInvalidFitness;
    double invalid_proportion = 0.0;
    double mean_size = 0.0;
    double mean_depth = 0.0;
    std::size_t best_size = 0;
    std::size_t best_depth = 0;
};

struct RunTrace {
    std::vector<GenerationStats> generations;
    Individual champion; // train-best of the final generation, test_fitness set
};

RunTrace run(const GpConfig& cfg, const Problem& problem, Rng& rng);
// Seeds the run's stream from cfg.seed.
RunTrace run(const GpConfig& cfg, const Problem& problem);

} // namespace ivgp
