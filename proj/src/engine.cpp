#include "ivgp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ivgp/safe_ops.hpp"

namespace ivgp {

std::string_view mode_name(SafetyMode mode)
{
    switch (mode) {
    case SafetyMode::Unprotected: return "unprotected";
    case SafetyMode::Protected: return "protected";
    case SafetyMode::IntervalStatic: return "interval-static";
    case SafetyMode::IntervalAware: return "interval-aware";
    }
    return "?";
}

std::optional<SafetyMode> mode_from_name(std::string_view name)
{
    for (auto m : {SafetyMode::Unprotected, SafetyMode::Protected, SafetyMode::IntervalStatic, SafetyMode::IntervalAware}) {
        if (mode_name(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

std::string_view validity_name(Validity v)
{
    switch (v) {
    case Validity::Valid: return "valid";
    case Validity::EvalError: return "eval_error";
    case Validity::IntervalError: return "interval_error";
    }
    return "?";
}

void GpConfig::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("gp config: " + what); };
    if (population_size == 0 || generations == 0 || tournament_size == 0) {
        fail("population_size, generations and tournament_size must be positive");
    }
    if (init_min_depth < 1 || init_min_depth > init_max_depth) {
        fail("initial depths must satisfy 1 <= min <= max");
    }
    if (mutation_max_depth < 1 || max_offspring_depth < init_max_depth) {
        fail("mutation depth must be positive and max_offspring_depth >= init_max_depth");
    }
    if (mutation_prob < 0.0 || crossover_prob < 0.0 || std::fabs(mutation_prob + crossover_prob - 1.0) > 1e-12) {
        fail("mutation_prob + crossover_prob must equal 1");
    }
    if (elitism > population_size) {
        fail("elitism exceeds population size");
    }
    if (functions.empty()) {
        fail("empty function set");
    }
    for (Op op : functions) {
        if (!is_valid_op(op)) {
            fail("unknown operator in function set");
        }
    }
}

double rrse(std::span<const double> y, std::span<const double> yhat)
{
    if (y.size() != yhat.size()) {
        throw std::invalid_argument("rrse: length mismatch");
    }
    if (y.size() < 2) {
        throw std::invalid_argument("rrse: need at least two observations");
    }
    double mean = 0.0;
    for (double v : y) {
        mean += v;
    }
    mean /= static_cast<double>(y.size());

    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(yhat[i])) {
            return kInvalidFitness;
        }
        double e = y[i] - yhat[i];
        double d = y[i] - mean;
        num += e * e;
        den += d * d;
    }
    if (den == 0.0) {
        return kInvalidFitness;
    }
    double r = std::sqrt(num / den);
    return std::isfinite(r) ? r : kInvalidFitness;
}

Semantics semantics_for(SafetyMode mode)
{
    return mode == SafetyMode::Protected ? Semantics::Protected : Semantics::Unprotected;
}

Individual evaluate_fitness(Individual ind, const Dataset& train, const IntervalEnv& env, SafetyMode mode)
{
    if (train.rows() == 0) {
        throw std::invalid_argument("evaluate_fitness: empty training set");
    }
    ind.fitness = kInvalidFitness;
    if (mode == SafetyMode::IntervalStatic || mode == SafetyMode::IntervalAware) {
        if (!propagate_intervals(ind.tree, env)) {
            ind.validity = Validity::IntervalError;
            return ind;
        }
    }
    auto yhat = evaluate(ind.tree, train, semantics_for(mode));
    double f = rrse(train.response, yhat);
    if (is_invalid_fitness(f)) {
        ind.validity = Validity::EvalError;
        return ind;
    }
    ind.validity = Validity::Valid;
    ind.fitness = f;
    return ind;
}

namespace {

    void grow_into(std::vector<Node>& out, BuildMethod method, std::size_t depth, std::size_t min_depth,
        std::size_t max_depth, std::span<const Op> functions, std::size_t n_features, const Interval& erc, Rng& rng)
    {
        const std::size_t n_terminals = n_features + (erc.defined() ? 1 : 0);
        bool terminal = depth >= max_depth;
        if (!terminal && depth >= min_depth && method == BuildMethod::Grow) {
            double p = static_cast<double>(n_terminals) / static_cast<double>(n_terminals + functions.size());
            terminal = uniform(rng, 0.0, 1.0) < p;
        }
        if (terminal) {
            std::size_t k = uniform_index(rng, n_terminals);
            out.push_back(k < n_features ? Node::make_feature(static_cast<std::uint32_t>(k))
                                         : Node::make_constant(uniform(rng, erc.lo(), erc.hi())));
            return;
        }
        Op op = functions[uniform_index(rng, functions.size())];
        out.push_back(Node::make_operator(op));
        for (int c = 0; c < arity(op); ++c) {
            grow_into(out, method, depth + 1, min_depth, max_depth, functions, n_features, erc, rng);
        }
    }

} // namespace

Tree random_tree(BuildMethod method, std::size_t min_depth, std::size_t max_depth, std::span<const Op> functions,
    std::size_t n_features, const Interval& erc, Rng& rng)
{
    if (functions.empty() || (n_features == 0 && !erc.defined())) {
        throw std::invalid_argument("random_tree: empty function or terminal set");
    }
    std::vector<Node> nodes;
    grow_into(nodes, method, 1, min_depth, max_depth, functions, n_features, erc, rng);
    return Tree(std::move(nodes));
}

namespace {

    Tree make_tree(BuildMethod method, std::size_t min_depth, std::size_t max_depth, const GpConfig& cfg,
        const IntervalEnv& env, bool safe, Rng& rng)
    {
        if (safe) {
            IntervalEnv e = env;
            e.constants = cfg.erc_range;
            BuildContext ctx;
            ctx.depth = 1;
            ctx.min_depth = min_depth;
            ctx.max_depth = max_depth;
            ctx.functions = cfg.functions;
            ctx.env = &e;
            ctx.constants = cfg.erc_range.defined();
            ctx.method = method;
            return build_tree(ctx, rng);
        }
        return random_tree(method, min_depth, max_depth, cfg.functions, env.features.size(), cfg.erc_range, rng);
    }

} // namespace

std::vector<Individual> ramped_half_and_half(const GpConfig& cfg, const IntervalEnv& env, Rng& rng)
{
    const std::size_t ramp = cfg.init_max_depth - cfg.init_min_depth + 1;
    const bool safe = cfg.mode == SafetyMode::IntervalAware;
    std::vector<Individual> pop;
    pop.reserve(cfg.population_size);
    for (std::size_t i = 0; i < cfg.population_size; ++i) {
        std::size_t max_depth = cfg.init_min_depth + i % ramp;
        BuildMethod method = (i / ramp) % 2 == 0 ? BuildMethod::Full : BuildMethod::Grow;
        pop.push_back(unevaluated(make_tree(method, cfg.init_min_depth, max_depth, cfg, env, safe, rng)));
    }
    return pop;
}

std::size_t tournament_select(std::span<const Individual> pop, std::size_t k, Rng& rng)
{
    if (pop.empty()) {
        throw std::invalid_argument("tournament_select: empty population");
    }
    std::size_t best = uniform_index(rng, pop.size());
    for (std::size_t d = 1; d < k; ++d) {
        std::size_t c = uniform_index(rng, pop.size());
        if (pop[c].fitness < pop[best].fitness) {
            best = c;
        }
    }
    return best;
}

namespace {

    Variation insert_or_reject(const Tree& p, std::size_t site, std::span<const Node> donor, std::size_t max_depth)
    {
        std::size_t depth = p.node_depth(site) - 1 + Tree(std::vector<Node>(donor.begin(), donor.end())).depth();
        if (depth > max_depth) {
            return {p, std::nullopt};
        }
        return {p.replace_subtree(site, donor), site};
    }

} // namespace

Variation subtree_crossover(const Tree& p1, const Tree& p2, std::size_t max_depth, Rng& rng)
{
    std::size_t s1 = uniform_index(rng, p1.size());
    std::size_t s2 = uniform_index(rng, p2.size());
    return insert_or_reject(p1, s1, p2.nodes().subspan(s2, p2[s2].size), max_depth);
}

Variation detail::subtree_mutation(const Tree& p, const GpConfig& cfg, const IntervalEnv& env, bool safe_donor, Rng& rng)
{
    std::size_t site = uniform_index(rng, p.size());
    Tree donor = make_tree(BuildMethod::Grow, 1, cfg.mutation_max_depth, cfg, env, safe_donor, rng);
    return insert_or_reject(p, site, donor.nodes(), cfg.max_offspring_depth);
}

Variation subtree_mutation(const Tree& p, const GpConfig& cfg, const IntervalEnv& env, Rng& rng)
{
    return detail::subtree_mutation(p, cfg, env, cfg.mode == SafetyMode::IntervalAware, rng);
}

namespace {

    std::size_t best_index(std::span<const Individual> pop)
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < pop.size(); ++i) {
            if (pop[i].fitness < pop[best].fitness) {
                best = i;
            }
        }
        return best;
    }

    std::vector<std::size_t> elite_indices(std::span<const Individual> pop, std::size_t count)
    {
        std::vector<std::size_t> idx(pop.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            idx[i] = i;
        }
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return pop[a].fitness < pop[b].fitness; });
        idx.resize(count);
        return idx;
    }

} // namespace

RunTrace run(const GpConfig& cfg, const Problem& problem, Rng& rng)
{
    cfg.validate();
    problem.env.check();
    if (problem.env.features.size() != problem.train.features()) {
        throw std::invalid_argument("run: interval env does not cover every feature");
    }
    const SafetyMode mode = cfg.mode;
    const Semantics sem = semantics_for(mode);

    auto evaluate_all = [&](std::vector<Individual>& pop) {
        for (auto& ind : pop) {
            if (ind.validity == Validity::IntervalError && mode == SafetyMode::IntervalAware) {
                ind.fitness = kInvalidFitness;
                continue;
            }
            ind = evaluate_fitness(std::move(ind), problem.train, problem.env, mode);
        }
    };

    std::vector<Individual> pop = ramped_half_and_half(cfg, problem.env, rng);
    evaluate_all(pop);

    RunTrace trace;
    trace.generations.reserve(cfg.generations);

    std::optional<Tree> cached_tree;
    double cached_test = kInvalidFitness;

    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        GenerationStats st;
        st.generation = gen;
        std::size_t invalid = 0;
        double size_sum = 0.0;
        double depth_sum = 0.0;
        for (const auto& ind : pop) {
            invalid += ind.validity != Validity::Valid ? 1 : 0;
            size_sum += static_cast<double>(ind.tree.size());
            depth_sum += static_cast<double>(ind.tree.depth());
        }
        const auto n = static_cast<double>(pop.size());
        st.invalid_proportion = static_cast<double>(invalid) / n;
        st.mean_size = size_sum / n;
        st.mean_depth = depth_sum / n;

        std::size_t b = best_index(pop);
        const Individual& best = pop[b];
        st.best_train_rrse = best.fitness;
        st.best_size = best.tree.size();
        st.best_depth = best.tree.depth();
        // Test error is for reporting only and never feeds back into selection.
        if (best.validity != Validity::Valid) {
            st.best_test_rrse = kInvalidFitness;
        } else if (cached_tree && *cached_tree == best.tree) {
            st.best_test_rrse = cached_test;
        } else {
            cached_tree = best.tree;
            cached_test = rrse(problem.test.response, evaluate(best.tree, problem.test, sem));
            st.best_test_rrse = cached_test;
        }
        trace.generations.push_back(st);

        if (gen + 1 == cfg.generations) {
            trace.champion = best;
            trace.champion.test_fitness = st.best_test_rrse;
            break;
        }

        std::vector<Individual> next;
        next.reserve(pop.size());
        for (std::size_t e : elite_indices(pop, cfg.elitism)) {
            next.push_back(pop[e]);
        }
        while (next.size() < pop.size()) {
            const bool mutate = uniform(rng, 0.0, 1.0) < cfg.mutation_prob;
            const Individual& p1 = pop[tournament_select(pop, cfg.tournament_size, rng)];
            if (mode == SafetyMode::IntervalAware) {
                const Individual* p2 = mutate ? nullptr : &pop[tournament_select(pop, cfg.tournament_size, rng)];
                auto sv = safe_variation(mutate ? VariationKind::Mutation : VariationKind::Crossover, p1, p2, cfg,
                    problem.env, rng);
                next.push_back(std::move(sv.offspring));
            } else {
                Variation v;
                if (mutate) {
                    v = subtree_mutation(p1.tree, cfg, problem.env, rng);
                } else {
                    const Individual& p2 = pop[tournament_select(pop, cfg.tournament_size, rng)];
                    v = subtree_crossover(p1.tree, p2.tree, cfg.max_offspring_depth, rng);
                }
                next.push_back(unevaluated(std::move(v.tree)));
            }
            Individual& child = next.back();
            if (mode == SafetyMode::IntervalAware && child.validity == Validity::IntervalError) {
                child.fitness = kInvalidFitness;
            } else {
                child = evaluate_fitness(std::move(child), problem.train, problem.env, mode);
            }
        }
        pop = std::move(next);
    }
    return trace;
}

RunTrace run(const GpConfig& cfg, const Problem& problem)
{
    Rng rng = make_rng(cfg.seed);
    return run(cfg, problem, rng);
}

} // namespace ivgp
