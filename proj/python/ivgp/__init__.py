"""Interval-arithmetic genetic programming for symbolic regression."""

from ._ivgp import (
    Interval,
    Tree,
    Problem,
    compute_interval,
    parse_sexpr,
    rrse,
    gen_synthetic,
    estimate_intervals,
    uncovered_fraction,
    build_tree,
    run,
    median_ci95,
    friedman_rank_test,
    chi2_survival,
)

__all__ = [
    "Interval",
    "Tree",
    "Problem",
    "compute_interval",
    "parse_sexpr",
    "rrse",
    "gen_synthetic",
    "estimate_intervals",
    "uncovered_fraction",
    "build_tree",
    "run",
    "median_ci95",
    "friedman_rank_test",
    "chi2_survival",
]
