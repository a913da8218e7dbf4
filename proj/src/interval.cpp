#include "ivgp/interval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ivgp {

Interval Interval::make(double lo, double hi)
{
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
        return undefined();
    }
    return Interval{lo, hi, true};
}

bool Interval::contains(double x) const
{
    return defined_ && std::isfinite(x) && lo_ <= x && x <= hi_;
}

bool Interval::identical(const Interval& other) const
{
    if (defined_ != other.defined_) {
        return false;
    }
    if (!defined_) {
        return true;
    }
    return std::bit_cast<std::uint64_t>(lo_) == std::bit_cast<std::uint64_t>(other.lo_)
        && std::bit_cast<std::uint64_t>(hi_) == std::bit_cast<std::uint64_t>(other.hi_);
}

int arity(Op op)
{
    switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
        return 2;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
        return 1;
    }
    throw std::invalid_argument("unknown operator id " + std::to_string(static_cast<int>(op)));
}

bool is_valid_op(Op op)
{
    return static_cast<std::uint8_t>(op) <= static_cast<std::uint8_t>(Op::Log);
}

std::string_view op_name(Op op)
{
    switch (op) {
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    }
    throw std::invalid_argument("unknown operator id " + std::to_string(static_cast<int>(op)));
}

std::optional<Op> op_from_name(std::string_view name)
{
    for (Op op : kAllOps) {
        if (op_name(op) == name) {
            return op;
        }
    }
    return std::nullopt;
}

namespace {

    constexpr double kTwoPi = 2.0 * std::numbers::pi;

    // True if some point c + 2*pi*k (integer k) lies in [a, b].
    bool hits_periodic_point(double a, double b, double c)
    {
        double k = std::ceil((a - c) / kTwoPi);
        return c + k * kTwoPi <= b;
    }

    Interval min_max(double p, double q, double r, double s)
    {
        return Interval::make(std::min({p, q, r, s}), std::max({p, q, r, s}));
    }

    Interval periodic_range(double a, double b, double fa, double fb, double peak, double trough)
    {
        if (b - a >= kTwoPi) {
            return Interval::make(-1.0, 1.0);
        }
        double lo = std::min(fa, fb);
        double hi = std::max(fa, fb);
        if (hits_periodic_point(a, b, peak)) {
            hi = 1.0;
        }
        if (hits_periodic_point(a, b, trough)) {
            lo = -1.0;
        }
        return Interval::make(lo, hi);
    }

} // namespace

Interval compute_interval(Op op, const Interval& ab, const std::optional<Interval>& cd)
{
    int n = arity(op); // rejects unknown ids
    if (n == 2 && !cd) {
        throw std::invalid_argument(std::string("binary operator '") + std::string(op_name(op)) + "' requires two intervals");
    }
    if (!ab.defined() || (n == 2 && !cd->defined())) {
        return Interval::undefined();
    }

    double a = ab.lo();
    double b = ab.hi();
    switch (op) {
    case Op::Add:
        return Interval::make(a + cd->lo(), b + cd->hi());
    case Op::Sub:
        return Interval::make(a - cd->hi(), b - cd->lo());
    case Op::Mul: {
        double c = cd->lo();
        double d = cd->hi();
        return min_max(a * c, a * d, b * c, b * d);
    }
    case Op::Div: {
        double c = cd->lo();
        double d = cd->hi();
        if (c <= 0.0 && 0.0 <= d) {
            return Interval::undefined();
        }
        return min_max(a / c, a / d, b / c, b / d);
    }
    case Op::Sin:
        return periodic_range(a, b, std::sin(a), std::sin(b), std::numbers::pi / 2, -std::numbers::pi / 2);
    case Op::Cos:
        return periodic_range(a, b, std::cos(a), std::cos(b), 0.0, std::numbers::pi);
    case Op::Exp:
        return Interval::make(std::exp(a), std::exp(b));
    case Op::Log:
        if (a <= 0.0) {
            return Interval::undefined();
        }
        return Interval::make(std::log(a), std::log(b));
    }
    return Interval::undefined();
}

double apply_op(Op op, double x, double y)
{
    switch (op) {
    case Op::Add: return x + y;
    case Op::Sub: return x - y;
    case Op::Mul: return x * y;
    case Op::Div: return x / y;
    case Op::Sin: return std::sin(x);
    case Op::Cos: return std::cos(x);
    case Op::Exp: return std::exp(x);
    case Op::Log: return std::log(x);
    }
    throw std::invalid_argument("unknown operator id " + std::to_string(static_cast<int>(op)));
}

} // namespace ivgp
