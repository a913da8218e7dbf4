#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ivgp/dataset.hpp"
#include "ivgp/interval.hpp"

namespace ivgp {

enum class NodeKind : std::uint8_t { Operator, Feature, Constant };

struct Node {
    NodeKind kind = NodeKind::Constant;
    Op op = Op::Add;
    std::uint32_t feature = 0;
    double value = 0.0;
    Interval interval;       // cached execution interval
    std::uint32_t size = 1;  // nodes in the subtree rooted here

    static Node make_operator(Op op);
    static Node make_feature(std::uint32_t index);
    static Node make_constant(double value);

    bool is_terminal() const { return kind != NodeKind::Operator; }
    int arity() const { return kind == NodeKind::Operator ? ivgp::arity(op) : 0; }

    // Same symbol, ignoring the cached interval.
    bool same_symbol(const Node& other) const;
};

// Expression tree stored in prefix order. For an operator at index i the
// left child sits at i + 1 and the right child at i + 1 + nodes[i + 1].size.
class Tree {
public:
    Tree() = default;
    // Throws std::invalid_argument unless `nodes` is a single well-formed prefix expression.
    explicit Tree(std::vector<Node> nodes);

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    const Node& operator[](std::size_t i) const { return nodes_[i]; }
    Node& operator[](std::size_t i) { return nodes_[i]; }
    std::span<const Node> nodes() const { return nodes_; }
    const Node& root() const { return nodes_.front(); }

    std::size_t left(std::size_t i) const { return i + 1; }
    std::size_t right(std::size_t i) const { return i + 1 + nodes_[i + 1].size; }

    // Parent index of every node; the root maps to npos.
    std::vector<std::size_t> parents() const;
    // Ancestors of node i, nearest first, ending at the root.
    std::vector<std::size_t> ancestors(std::size_t i) const;
    std::size_t depth() const;
    // Depth of node i counted from the root (root = 1).
    std::size_t node_depth(std::size_t i) const;

    Tree subtree(std::size_t i) const;
    // Copy of this tree with the subtree at `site` replaced by `donor`.
    Tree replace_subtree(std::size_t site, std::span<const Node> donor) const;

    // Structural equality ignoring cached intervals.
    bool operator==(const Tree& other) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    void recompute_sizes();

    std::vector<Node> nodes_;
};

enum class Semantics : std::uint8_t { Unprotected, Protected };

struct IntervalEnv {
    std::vector<Interval> features;
    Interval constants = Interval::make(-5.0, 5.0);

    // Throws std::invalid_argument if any entry is undefined.
    void check() const;
};

double evaluate(const Tree& tree, std::span<const double> row, Semantics semantics);
// Column-wise evaluation over every row of `data`.
std::vector<double> evaluate(const Tree& tree, const Dataset& data, Semantics semantics);

// Sets every node's cached interval bottom-up; returns true iff all are defined.
// Throws std::out_of_range if a feature has no entry in env.
bool propagate_intervals(Tree& tree, const IntervalEnv& env);
// Same, restricted to the subtree rooted at `root`.
bool propagate_intervals(Tree& tree, std::size_t root, const IntervalEnv& env);

struct TreeMetrics {
    std::size_t depth = 0;
    std::size_t size = 0;
};

TreeMetrics tree_metrics(const Tree& tree);

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t position, std::string token, const std::string& message);

    std::size_t position() const { return position_; }
    const std::string& token() const { return token_; }

private:
    std::size_t position_;
    std::string token_;
};

// Prefix s-expression, e.g. "(div x1 (add 0.5 x2))". Features are 1-based.
std::string format_sexpr(const Tree& tree);
Tree parse_sexpr(std::string_view text);

} // namespace ivgp
