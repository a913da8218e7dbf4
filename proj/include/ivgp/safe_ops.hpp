#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "ivgp/engine.hpp"

namespace ivgp {

// Inputs of the safe tree builder. Terminals are the features of `env` plus an
// ERC slot drawing from env.constants when `constants` is set.
struct BuildContext {
    std::size_t depth = 1;
    std::size_t max_depth = 6;
    std::size_t min_depth = 1; // operator nodes are forced above this depth
    std::span<const Op> functions;
    const IntervalEnv* env = nullptr;
    bool constants = true;
    BuildMethod method = BuildMethod::Grow;
};

// Builds a tree bottom-up, choosing each operator only once its children's
// intervals are known, so every node carries a defined cached interval.
Tree build_tree(const BuildContext& ctx, Rng& rng);

// First operator of matching arity, in shuffled order, whose interval on
// (ab, cd) is defined. `cd` present selects binary operators.
std::optional<Op> select_operation(std::span<const Op> functions, const Interval& ab, const std::optional<Interval>& cd,
    Rng& rng);

enum class RepairResult { Valid, Unrepairable };

// Walks from `node` to the root recomputing cached intervals and swapping in
// a same-arity operator wherever a node's interval became undefined.
// `node` == Tree::npos means the modification was at the root.
RepairResult check_and_repair(Tree& tree, std::size_t node, std::span<const Op> functions, Rng& rng);

enum class VariationKind { Crossover, Mutation };

struct SafeVariation {
    Individual offspring; // unevaluated; IntervalError if unrepairable
    std::optional<std::size_t> site;
};

// Base subtree variation followed by upward repair from the modification site.
// `donor` is only read for crossover.
SafeVariation safe_variation(VariationKind kind, const Individual& parent, const Individual* donor, const GpConfig& cfg,
    const IntervalEnv& env, Rng& rng);

} // namespace ivgp
