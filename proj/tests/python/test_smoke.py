import math

import pytest

import ivgp


def test_interval_rules():
    r = ivgp.compute_interval("div", ivgp.Interval(0, 1), ivgp.Interval(0.5, 1.5))
    assert (r.lo, r.hi) == (0.0, 2.0)
    assert not ivgp.compute_interval("log", ivgp.Interval(0, 1)).defined
    with pytest.raises(ValueError):
        ivgp.compute_interval("pow", ivgp.Interval(0, 1))


def test_tree_round_trip_and_propagation():
    t = ivgp.parse_sexpr("(div x1 (add 0.5 x2))")
    assert str(t) == "(div x1 (add 0.5 x2))"
    assert t.depth == 3 and len(t) == 5
    assert t.propagate([(0, 1), (0, 1)]) == (True, (0.0, 2.0))
    bad = ivgp.parse_sexpr("(div x1 (mul x1 x2))")
    assert bad.propagate([(0, 1), (0, 1)]) == (False, None)
    assert t.evaluate([0.6, 0.1]) == pytest.approx(1.0)
    assert ivgp.parse_sexpr("(div x1 x2)").evaluate([3, 0], protected=True) == 1.0
    with pytest.raises(ValueError):
        ivgp.parse_sexpr("(add x1")


def test_safe_builder():
    for seed in range(50):
        t = ivgp.build_tree([(0, 1), (0, 1)], max_depth=5, seed=seed)
        ok, _ = t.propagate([(0, 1), (0, 1)])
        assert ok


def test_problems_and_stats():
    p = ivgp.gen_synthetic("pagie1", seed=1)
    assert p.n_train == 68 and p.n_train + p.n_test == 676
    assert ivgp.rrse([1, 2, 3], [2, 2, 2]) == 1.0
    assert ivgp.uncovered_fraction(ivgp.Interval(0, 1), ivgp.Interval(-1, 2)) == pytest.approx(2 / 3)
    chi2, df, _ = ivgp.friedman_rank_test([[1, 2, 3], [1, 2, 3], [1, 2, 3]])
    assert (chi2, df) == (pytest.approx(6.0), 2)
    assert abs(ivgp.chi2_survival(9.1519, 3) - 0.0273) < 5e-4
    med, lo, hi = ivgp.median_ci95([7.0])
    assert med == lo == hi == 7.0


def test_short_run():
    p = ivgp.gen_synthetic("keijzer10", seed=2)
    out = ivgp.run(p, mode="interval-aware", seed=3, population_size=30, generations=5)
    gens = out["generations"]
    assert len(gens) == 5
    assert all(0.0 <= g["invalid_proportion"] <= 1.0 for g in gens)
    assert ivgp.parse_sexpr(out["champion"]) is not None
    again = ivgp.run(p, mode="interval-aware", seed=3, population_size=30, generations=5)
    assert again["champion"] == out["champion"]
    assert math.isfinite(gens[-1]["best_train_rrse"])
