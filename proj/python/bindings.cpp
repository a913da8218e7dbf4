#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>

#include "ivgp/engine.hpp"
#include "ivgp/expr_tree.hpp"
#include "ivgp/interval.hpp"
#include "ivgp/problems.hpp"
#include "ivgp/safe_ops.hpp"
#include "ivgp/stats.hpp"

namespace py = pybind11;
using namespace ivgp;

namespace {

Op parse_op(const std::string& name)
{
    auto op = op_from_name(name);
    if (!op) {
        throw py::value_error("unknown operator '" + name + "'");
    }
    return *op;
}

SafetyMode parse_mode(const std::string& name)
{
    auto m = mode_from_name(name);
    if (!m) {
        throw py::value_error("unknown mode '" + name + "'");
    }
    return *m;
}

IntervalEnv env_from_pairs(const std::vector<std::pair<double, double>>& bounds)
{
    IntervalEnv env;
    for (auto [lo, hi] : bounds) {
        env.features.push_back(Interval::make(lo, hi));
    }
    env.check();
    return env;
}

py::object interval_or_none(const Interval& iv)
{
    if (!iv.defined()) {
        return py::none();
    }
    return py::make_tuple(iv.lo(), iv.hi());
}

py::dict stats_dict(const GenerationStats& g)
{
    py::dict d;
    d["generation"] = g.generation;
    d["best_train_rrse"] = g.best_train_rrse;
    d["best_test_rrse"] = g.best_test_rrse;
    d["invalid_proportion"] = g.invalid_proportion;
    d["mean_size"] = g.mean_size;
    d["mean_depth"] = g.mean_depth;
    d["best_size"] = g.best_size;
    d["best_depth"] = g.best_depth;
    return d;
}

} // namespace

PYBIND11_MODULE(_ivgp, m)
{
    m.doc() = "Interval-arithmetic genetic programming for symbolic regression";

    py::class_<Interval>(m, "Interval")
        .def(py::init(&Interval::make), py::arg("lo"), py::arg("hi"))
        .def_static("undefined", &Interval::undefined)
        .def_property_readonly("defined", &Interval::defined)
        .def_property_readonly("lo", &Interval::lo)
        .def_property_readonly("hi", &Interval::hi)
        .def("contains", &Interval::contains)
        .def("__eq__", &Interval::identical)
        .def("__repr__", [](const Interval& iv) {
            return iv.defined() ? "Interval(" + std::to_string(iv.lo()) + ", " + std::to_string(iv.hi()) + ")"
                                : std::string("Interval.undefined()");
        });

    m.def(
        "compute_interval",
        [](const std::string& op, const Interval& ab, std::optional<Interval> cd) { return compute_interval(parse_op(op), ab, cd); },
        py::arg("op"), py::arg("ab"), py::arg("cd") = py::none());

    py::class_<Tree>(m, "Tree")
        .def("__str__", &format_sexpr)
        .def("__repr__", [](const Tree& t) { return "Tree('" + format_sexpr(t) + "')"; })
        .def("__len__", &Tree::size)
        .def("__eq__", &Tree::operator==)
        .def_property_readonly("depth", &Tree::depth)
        .def(
            "evaluate",
            [](const Tree& t, const std::vector<double>& row, bool protected_ops) {
                return evaluate(t, row, protected_ops ? Semantics::Protected : Semantics::Unprotected);
            },
            py::arg("row"), py::arg("protected") = false)
        .def(
            "propagate",
            [](Tree& t, const std::vector<std::pair<double, double>>& bounds) {
                bool ok = propagate_intervals(t, env_from_pairs(bounds));
                return py::make_tuple(ok, interval_or_none(t.root().interval));
            },
            py::arg("bounds"), "Interval analysis; returns (valid, root interval or None).");

    m.def("parse_sexpr", [](const std::string& s) { return parse_sexpr(s); });

    m.def("rrse", [](const std::vector<double>& y, const std::vector<double>& yhat) { return rrse(y, yhat); });

    py::class_<Problem>(m, "Problem")
        .def_readonly("name", &Problem::name)
        .def_property_readonly("n_train", [](const Problem& p) { return p.train.rows(); })
        .def_property_readonly("n_test", [](const Problem& p) { return p.test.rows(); })
        .def_property_readonly("n_features", [](const Problem& p) { return p.train.features(); })
        .def_property_readonly("train_columns", [](const Problem& p) { return p.train.columns; })
        .def_property_readonly("train_response", [](const Problem& p) { return p.train.response; })
        .def_property_readonly("intervals", [](const Problem& p) {
            std::vector<std::pair<double, double>> out;
            for (const auto& iv : p.env.features) {
                out.emplace_back(iv.lo(), iv.hi());
            }
            return out;
        });

    m.def(
        "gen_synthetic",
        [](const std::string& name, std::uint64_t seed) {
            Rng rng = make_rng(seed, 1);
            return gen_synthetic(name, rng);
        },
        py::arg("name"), py::arg("seed") = 0);

    m.def("estimate_intervals", [](const std::vector<std::vector<double>>& columns, double margin) {
        Dataset d;
        d.columns = columns;
        d.response.assign(columns.empty() ? 0 : columns.front().size(), 0.0);
        std::vector<std::pair<double, double>> out;
        for (const auto& iv : estimate_intervals(d, margin).features) {
            out.emplace_back(iv.lo(), iv.hi());
        }
        return out;
    }, py::arg("columns"), py::arg("margin") = 0.0);

    m.def("uncovered_fraction", &uncovered_fraction, py::arg("train"), py::arg("test"));

    m.def(
        "build_tree",
        [](const std::vector<std::pair<double, double>>& bounds, std::size_t max_depth, bool full, std::uint64_t seed) {
            IntervalEnv env = env_from_pairs(bounds);
            BuildContext ctx;
            ctx.max_depth = max_depth;
            ctx.functions = kAllOps;
            ctx.env = &env;
            ctx.method = full ? BuildMethod::Full : BuildMethod::Grow;
            Rng rng = make_rng(seed);
            return build_tree(ctx, rng);
        },
        py::arg("bounds"), py::arg("max_depth") = 6, py::arg("full") = false, py::arg("seed") = 0,
        "Safe initialisation: a tree whose every node has a defined interval.");

    m.def(
        "run",
        [](const Problem& problem, const std::string& mode, std::uint64_t seed, std::size_t population_size,
            std::size_t generations) {
            GpConfig cfg;
            cfg.mode = parse_mode(mode);
            cfg.seed = seed;
            cfg.population_size = population_size;
            cfg.generations = generations;
            RunTrace trace;
            {
                py::gil_scoped_release release;
                trace = run(cfg, problem);
            }
            py::list gens;
            for (const auto& g : trace.generations) {
                gens.append(stats_dict(g));
            }
            py::dict out;
            out["generations"] = gens;
            out["champion"] = format_sexpr(trace.champion.tree);
            out["validity"] = std::string(validity_name(trace.champion.validity));
            out["test_rrse"] = trace.champion.test_fitness.value_or(kInvalidFitness);
            return out;
        },
        py::arg("problem"), py::arg("mode") = "interval-aware", py::arg("seed") = 0, py::arg("population_size") = 200,
        py::arg("generations") = 250);

    m.def("median_ci95", [](const std::vector<double>& samples) {
        auto r = stats::median_ci95(samples);
        return py::make_tuple(r.median, r.lo, r.hi);
    });

    m.def("friedman_rank_test", [](const std::vector<std::vector<double>>& values) {
        auto r = stats::friedman_rank_test(values);
        return py::make_tuple(r.chi2, r.df, r.p);
    });

    m.def("chi2_survival", &stats::chi2_survival, py::arg("chi2"), py::arg("df"));

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
}
