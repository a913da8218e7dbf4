#include "ivgp/safe_ops.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace ivgp {

namespace {

    std::size_t count_arity(std::span<const Op> functions, int a)
    {
        return static_cast<std::size_t>(
            std::count_if(functions.begin(), functions.end(), [a](Op op) { return arity(op) == a; }));
    }

    bool pick_terminal(const BuildContext& ctx, std::size_t depth, std::size_t n_terminals, Rng& rng)
    {
        if (depth >= ctx.max_depth) {
            return true;
        }
        if (depth < ctx.min_depth || ctx.method == BuildMethod::Full) {
            return false;
        }
        double p = static_cast<double>(n_terminals) / static_cast<double>(n_terminals + ctx.functions.size());
        return uniform(rng, 0.0, 1.0) < p;
    }

    Node pick_terminal_node(const BuildContext& ctx, Rng& rng)
    {
        const std::size_t p = ctx.env->features.size();
        const std::size_t n = p + (ctx.constants ? 1 : 0);
        std::size_t k = uniform_index(rng, n);
        if (k < p) {
            Node node = Node::make_feature(static_cast<std::uint32_t>(k));
            node.interval = ctx.env->features[k];
            return node;
        }
        return Node::make_constant(uniform(rng, ctx.env->constants.lo(), ctx.env->constants.hi()));
    }

    std::vector<Node> build(const BuildContext& ctx, std::size_t depth, Rng& rng)
    {
        const std::size_t n_terminals = ctx.env->features.size() + (ctx.constants ? 1 : 0);
        if (pick_terminal(ctx, depth, n_terminals, rng)) {
            return {pick_terminal_node(ctx, rng)};
        }

        std::vector<Node> left = build(ctx, depth + 1, rng);
        const Interval ab = left.front().interval;

        const std::size_t n_binary = count_arity(ctx.functions, 2);
        const std::size_t n_unary = count_arity(ctx.functions, 1);
        bool binary = n_unary == 0
            || (n_binary > 0 && uniform(rng, 0.0, 1.0) < static_cast<double>(n_binary) / static_cast<double>(n_binary + n_unary));

        std::vector<Node> right;
        if (binary) {
            right = build(ctx, depth + 1, rng);
        }
        auto cd = binary ? std::optional<Interval>(right.front().interval) : std::nullopt;
        auto op = select_operation(ctx.functions, ab, cd, rng);

        // No operator of the chosen arity is defined here: try the other arity,
        // and failing that hand back the left subtree on its own.
        if (!op) {
            if (binary && n_unary > 0) {
                right.clear();
                binary = false;
                op = select_operation(ctx.functions, ab, std::nullopt, rng);
            } else if (!binary && n_binary > 0) {
                right = build(ctx, depth + 1, rng);
                binary = true;
                op = select_operation(ctx.functions, ab, right.front().interval, rng);
            }
        }
        if (!op) {
            return left;
        }

        Node node = Node::make_operator(*op);
        node.interval = binary ? compute_interval(*op, ab, right.front().interval) : compute_interval(*op, ab);

        std::vector<Node> out;
        out.reserve(1 + left.size() + right.size());
        out.push_back(node);
        out.insert(out.end(), left.begin(), left.end());
        out.insert(out.end(), right.begin(), right.end());
        return out;
    }

} // namespace

Tree build_tree(const BuildContext& ctx, Rng& rng)
{
    if (ctx.functions.empty()) {
        throw std::invalid_argument("build_tree: empty function set");
    }
    if (ctx.env == nullptr || (ctx.env->features.empty() && !ctx.constants)) {
        throw std::invalid_argument("build_tree: empty terminal set");
    }
    ctx.env->check();
    if (ctx.depth < 1 || ctx.depth > ctx.max_depth) {
        throw std::invalid_argument("build_tree: depth must lie in [1, max_depth]");
    }
    return Tree(build(ctx, ctx.depth, rng));
}

std::optional<Op> select_operation(std::span<const Op> functions, const Interval& ab, const std::optional<Interval>& cd,
    Rng& rng)
{
    const int wanted = cd ? 2 : 1;
    std::vector<Op> candidates;
    for (Op op : functions) {
        if (arity(op) == wanted) {
            candidates.push_back(op);
        }
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    for (Op op : candidates) {
        if (compute_interval(op, ab, cd).defined()) {
            return op;
        }
    }
    return std::nullopt;
}

RepairResult check_and_repair(Tree& tree, std::size_t node, std::span<const Op> functions, Rng& rng)
{
    if (node == Tree::npos) {
        return tree.root().interval.defined() ? RepairResult::Valid : RepairResult::Unrepairable;
    }

    std::vector<std::size_t> chain{node};
    auto up = tree.ancestors(node);
    chain.insert(chain.end(), up.begin(), up.end());

    bool valid = true;
    for (std::size_t k : chain) {
        Node& n = tree[k];
        const Interval ab = tree[tree.left(k)].interval;
        std::optional<Interval> cd;
        if (n.arity() == 2) {
            cd = tree[tree.right(k)].interval;
        }
        Interval iv = compute_interval(n.op, ab, cd);
        if (!iv.defined()) {
            std::vector<Op> shuffled(functions.begin(), functions.end());
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            for (Op f : shuffled) {
                if (arity(f) != n.arity()) {
                    continue;
                }
                Interval candidate = compute_interval(f, ab, cd);
                if (candidate.defined()) {
                    n.op = f;
                    iv = candidate;
                    break;
                }
            }
        }
        n.interval = iv;
        valid = valid && iv.defined();
    }
    return valid ? RepairResult::Valid : RepairResult::Unrepairable;
}

SafeVariation safe_variation(VariationKind kind, const Individual& parent, const Individual* donor, const GpConfig& cfg,
    const IntervalEnv& env, Rng& rng)
{
    Variation v;
    if (kind == VariationKind::Crossover) {
        if (donor == nullptr) {
            throw std::invalid_argument("safe_variation: crossover needs a donor");
        }
        v = subtree_crossover(parent.tree, donor->tree, cfg.max_offspring_depth, rng);
    } else {
        v = detail::subtree_mutation(parent.tree, cfg, env, true, rng);
    }

    RepairResult result;
    if (v.site) {
        // Donor intervals are a function of env alone, so refreshing the
        // inserted subtree in place matches propagating it anywhere else.
        propagate_intervals(v.tree, *v.site, env);
        auto up = v.tree.ancestors(*v.site);
        result = check_and_repair(v.tree, up.empty() ? Tree::npos : up.front(), cfg.functions, rng);
    } else {
        result = check_and_repair(v.tree, Tree::npos, cfg.functions, rng);
    }

    SafeVariation out{unevaluated(std::move(v.tree)), v.site};
    if (result == RepairResult::Unrepairable) {
        out.offspring.validity = Validity::IntervalError;
    }
    return out;
}

} // namespace ivgp
