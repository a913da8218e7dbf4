#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace ivgp {

// Closed real interval [lo, hi], or the distinguished undefined value.
// A defined interval always has finite bounds with lo <= hi.
class Interval {
public:
    constexpr Interval() = default;

    static constexpr Interval undefined() { return Interval{}; }

    // Returns undefined for non-finite or inverted bounds.
    static Interval make(double lo, double hi);

    bool defined() const { return defined_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double width() const { return hi_ - lo_; }

    bool contains(double x) const;

    // Structural equality: two undefined values compare equal, defined
    // intervals compare by bit pattern of their bounds.
    bool identical(const Interval& other) const;

private:
    constexpr Interval(double lo, double hi, bool defined) : lo_(lo), hi_(hi), defined_(defined) {}

    double lo_ = 0.0;
    double hi_ = 0.0;
    bool defined_ = false;
};

inline Interval make_interval(double lo, double hi) { return Interval::make(lo, hi); }
inline bool interval_contains(const Interval& iv, double x) { return iv.contains(x); }

enum class Op : std::uint8_t { Add, Sub, Mul, Div, Sin, Cos, Exp, Log };

inline constexpr Op kAllOps[] = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Sin, Op::Cos, Op::Exp, Op::Log};

int arity(Op op);
bool is_valid_op(Op op);
std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);

// Interval extension of `op`. Unary operators ignore `cd`; binary operators
// throw std::invalid_argument when `cd` is absent, as does an unknown op.
Interval compute_interval(Op op, const Interval& ab, const std::optional<Interval>& cd = std::nullopt);

// Concrete IEEE evaluation of `op` with no protection.
double apply_op(Op op, double x, double y = 0.0);

} // namespace ivgp
