#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "ivgp/interval.hpp"

using namespace ivgp;

namespace {

Interval random_interval(std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    double a = u(rng);
    double b = u(rng);
    // a quarter of the intervals are degenerate points
    if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
        b = a;
    }
    return Interval::make(std::min(a, b), std::max(a, b));
}

double point_in(const Interval& iv, std::mt19937_64& rng)
{
    switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
    case 0: return iv.lo();
    case 1: return iv.hi();
    default: return std::uniform_real_distribution<double>(iv.lo(), iv.hi())(rng);
    }
}

} // namespace

TEST_CASE("make_interval")
{
    auto p = make_interval(0.5, 0.5);
    CHECK(p.defined());
    CHECK(p.lo() == 0.5);
    CHECK(p.hi() == 0.5);

    auto z = make_interval(0, 0);
    CHECK(z.defined());
    CHECK(z.width() == 0.0);

    CHECK_FALSE(make_interval(1, 0).defined());
    CHECK_FALSE(make_interval(0, std::numeric_limits<double>::infinity()).defined());
    CHECK_FALSE(make_interval(std::nan(""), 1).defined());
}

TEST_CASE("interval_contains")
{
    auto iv = make_interval(0, 2);
    CHECK(interval_contains(iv, 1.0));
    CHECK(interval_contains(iv, 2.0));
    CHECK(interval_contains(iv, 0.0));
    CHECK_FALSE(interval_contains(iv, 2.0000001));
    CHECK_FALSE(interval_contains(Interval::undefined(), 0.0));
    CHECK_FALSE(interval_contains(iv, std::nan("")));
}

TEST_CASE("compute_interval examples")
{
    auto r = compute_interval(Op::Add, make_interval(0.5, 0.5), make_interval(0, 1));
    CHECK(r.lo() == 0.5);
    CHECK(r.hi() == 1.5);

    r = compute_interval(Op::Div, make_interval(0, 1), make_interval(0.5, 1.5));
    CHECK(r.lo() == 0.0);
    CHECK(r.hi() == 2.0);

    CHECK_FALSE(compute_interval(Op::Div, make_interval(0, 1), make_interval(0, 1)).defined());
    CHECK_FALSE(compute_interval(Op::Div, make_interval(1, 2), make_interval(-1, 0)).defined());
    CHECK_FALSE(compute_interval(Op::Log, make_interval(0, 1)).defined());

    r = compute_interval(Op::Mul, make_interval(-1, 2), make_interval(3, 4));
    CHECK(r.lo() == -4.0);
    CHECK(r.hi() == 8.0);

    r = compute_interval(Op::Sub, make_interval(0, 1), make_interval(0.5, 2));
    CHECK(r.lo() == -2.0);
    CHECK(r.hi() == 0.5);
}

TEST_CASE("sin on [0, pi] matches a dense sampling oracle")
{
    const double pi = std::numbers::pi;
    double lo = 1e9;
    double hi = -1e9;
    const int n = 1'000'000;
    for (int i = 0; i <= n; ++i) {
        double v = std::sin(pi * i / n);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    auto r = compute_interval(Op::Sin, make_interval(0, pi));
    CHECK(r.lo() == doctest::Approx(lo).epsilon(1e-12));
    CHECK(r.hi() == 1.0);
    CHECK(hi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.lo() == 0.0);
}

TEST_CASE("sin and cos critical points")
{
    const double pi = std::numbers::pi;
    auto c = compute_interval(Op::Cos, make_interval(-0.5, 0.5));
    CHECK(c.hi() == 1.0);
    CHECK(c.lo() == doctest::Approx(std::cos(0.5)));

    c = compute_interval(Op::Cos, make_interval(2.0, 4.0)); // contains pi
    CHECK(c.lo() == -1.0);

    auto s = compute_interval(Op::Sin, make_interval(4.0, 5.0)); // contains 3pi/2
    CHECK(s.lo() == -1.0);
    CHECK(s.hi() == doctest::Approx(std::max(std::sin(4.0), std::sin(5.0))));

    s = compute_interval(Op::Sin, make_interval(0.1, 0.2)); // monotone piece
    CHECK(s.lo() == std::sin(0.1));
    CHECK(s.hi() == std::sin(0.2));

    s = compute_interval(Op::Sin, make_interval(-10, -10 + 2 * pi));
    CHECK(s.lo() == -1.0);
    CHECK(s.hi() == 1.0);
}

TEST_CASE("unknown operator and missing operand are caller errors")
{
    CHECK_THROWS_AS(compute_interval(static_cast<Op>(42), make_interval(0, 1), make_interval(0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(compute_interval(Op::Add, make_interval(0, 1)), std::invalid_argument);
    // unary operators ignore cd
    CHECK(compute_interval(Op::Exp, make_interval(0, 1), make_interval(5, 6)).identical(compute_interval(Op::Exp, make_interval(0, 1))));
}

TEST_CASE("non-finite bounds collapse to undefined")
{
    CHECK_FALSE(compute_interval(Op::Exp, make_interval(0, 1000)).defined());
    CHECK_FALSE(compute_interval(Op::Mul, make_interval(1e200, 1e200), make_interval(1e200, 1e200)).defined());
    CHECK_FALSE(compute_interval(Op::Add, make_interval(1.7e308, 1.7e308), make_interval(1.7e308, 1.7e308)).defined());
}

TEST_CASE("undefined is absorbing")
{
    auto u = Interval::undefined();
    auto d = make_interval(1, 2);
    for (Op op : kAllOps) {
        if (arity(op) == 2) {
            CHECK_FALSE(compute_interval(op, u, d).defined());
            CHECK_FALSE(compute_interval(op, d, u).defined());
        } else {
            CHECK_FALSE(compute_interval(op, u).defined());
        }
    }
}

TEST_CASE("monotone operators are exact at the endpoints")
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        auto ab = random_interval(rng, 50);
        auto cd = random_interval(rng, 50);
        auto add = compute_interval(Op::Add, ab, cd);
        CHECK(add.lo() == ab.lo() + cd.lo());
        CHECK(add.hi() == ab.hi() + cd.hi());
        auto sub = compute_interval(Op::Sub, ab, cd);
        CHECK(sub.lo() == ab.lo() - cd.hi());
        CHECK(sub.hi() == ab.hi() - cd.lo());
        auto e = compute_interval(Op::Exp, ab);
        CHECK(e.lo() == std::exp(ab.lo()));
        CHECK(e.hi() == std::exp(ab.hi()));
        auto l = compute_interval(Op::Log, ab);
        if (ab.lo() > 0) {
            CHECK(l.lo() == std::log(ab.lo()));
            CHECK(l.hi() == std::log(ab.hi()));
        } else {
            CHECK_FALSE(l.defined());
        }
    }
}

TEST_CASE("containment property over random cases")
{
    std::mt19937_64 rng(2024);
    std::size_t checked = 0;
    for (int i = 0; i < 100'000; ++i) {
        Op op = kAllOps[std::uniform_int_distribution<int>(0, 7)(rng)];
        double scale = i % 2 == 0 ? 3.0 : 40.0;
        auto ab = random_interval(rng, scale);
        auto cd = random_interval(rng, scale);
        auto r = compute_interval(op, ab, cd);
        if (!r.defined()) {
            continue;
        }
        double x = point_in(ab, rng);
        double y = point_in(cd, rng);
        double v = apply_op(op, x, y);
        if (!std::isfinite(v)) {
            continue;
        }
        ++checked;
        REQUIRE_MESSAGE(interval_contains(r, v), op_name(op), " [", ab.lo(), ",", ab.hi(), "] [", cd.lo(), ",", cd.hi(),
            "] x=", x, " y=", y, " -> ", v);
        if (op == Op::Sin || op == Op::Cos) {
            CHECK(r.lo() >= -1.0);
            CHECK(r.hi() <= 1.0);
        }
    }
    CHECK(checked > 50'000);
}

TEST_CASE("operator names round-trip")
{
    for (Op op : kAllOps) {
        CHECK(op_from_name(op_name(op)) == op);
    }
    CHECK_FALSE(op_from_name("pow"));
}
