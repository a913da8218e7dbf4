#include "ivgp/expr_tree.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace ivgp {

std::vector<double> Dataset::row(std::size_t i) const
{
    std::vector<double> out(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out[j] = columns[j][i];
    }
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const
{
    Dataset out;
    out.names = names;
    out.columns.resize(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out.columns[j].reserve(indices.size());
        for (auto i : indices) {
            out.columns[j].push_back(columns[j].at(i));
        }
    }
    out.response.reserve(indices.size());
    for (auto i : indices) {
        out.response.push_back(response.at(i));
    }
    return out;
}

void Dataset::check_shape() const
{
    if (!names.empty() && names.size() != columns.size()) {
        throw std::invalid_argument("dataset: feature name count does not match column count");
    }
    for (const auto& c : columns) {
        if (c.size() != response.size()) {
            throw std::invalid_argument("dataset: column length does not match response length");
        }
    }
}

Node Node::make_operator(Op op)
{
    Node n;
    n.kind = NodeKind::Operator;
    n.op = op;
    return n;
}

Node Node::make_feature(std::uint32_t index)
{
    Node n;
    n.kind = NodeKind::Feature;
    n.feature = index;
    return n;
}

Node Node::make_constant(double value)
{
    Node n;
    n.kind = NodeKind::Constant;
    n.value = value;
    n.interval = Interval::make(value, value);
    return n;
}

bool Node::same_symbol(const Node& other) const
{
    if (kind != other.kind) {
        return false;
    }
    switch (kind) {
    case NodeKind::Operator: return op == other.op;
    case NodeKind::Feature: return feature == other.feature;
    case NodeKind::Constant: return std::bit_cast<std::uint64_t>(value) == std::bit_cast<std::uint64_t>(other.value);
    }
    return false;
}

Tree::Tree(std::vector<Node> nodes)
    : nodes_(std::move(nodes))
{
    if (nodes_.empty()) {
        throw std::invalid_argument("tree: empty node list");
    }
    // A prefix expression is well formed iff the count of open slots hits zero exactly at the end.
    std::size_t open = 1;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (open == 0) {
            throw std::invalid_argument("tree: trailing nodes after a complete expression");
        }
        if (nodes_[i].kind == NodeKind::Operator && !is_valid_op(nodes_[i].op)) {
            throw std::invalid_argument("tree: unknown operator id");
        }
        open = open - 1 + static_cast<std::size_t>(nodes_[i].arity());
    }
    if (open != 0) {
        throw std::invalid_argument("tree: incomplete expression");
    }
    recompute_sizes();
}

void Tree::recompute_sizes()
{
    for (std::size_t k = nodes_.size(); k-- > 0;) {
        auto& n = nodes_[k];
        std::uint32_t s = 1;
        if (n.arity() >= 1) {
            s += nodes_[k + 1].size;
        }
        if (n.arity() == 2) {
            s += nodes_[k + 1 + nodes_[k + 1].size].size;
        }
        n.size = s;
    }
}

std::vector<std::size_t> Tree::parents() const
{
    std::vector<std::size_t> out(nodes_.size(), npos);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        int a = nodes_[i].arity();
        if (a >= 1) {
            out[left(i)] = i;
        }
        if (a == 2) {
            out[right(i)] = i;
        }
    }
    return out;
}

std::vector<std::size_t> Tree::ancestors(std::size_t i) const
{
    // Descend from the root toward i; every node on the way is an ancestor.
    std::vector<std::size_t> path;
    std::size_t cur = 0;
    while (cur != i) {
        path.push_back(cur);
        std::size_t l = left(cur);
        cur = (nodes_[cur].arity() == 2 && i >= right(cur)) ? right(cur) : l;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::size_t Tree::node_depth(std::size_t i) const
{
    return ancestors(i).size() + 1;
}

std::size_t Tree::depth() const
{
    std::vector<std::size_t> d(nodes_.size(), 1);
    for (std::size_t k = nodes_.size(); k-- > 0;) {
        int a = nodes_[k].arity();
        if (a >= 1) {
            d[k] = 1 + d[left(k)];
        }
        if (a == 2) {
            d[k] = std::max(d[k], 1 + d[right(k)]);
        }
    }
    return nodes_.empty() ? 0 : d[0];
}

Tree Tree::subtree(std::size_t i) const
{
    auto first = nodes_.begin() + static_cast<std::ptrdiff_t>(i);
    return Tree(std::vector<Node>(first, first + nodes_[i].size));
}

Tree Tree::replace_subtree(std::size_t site, std::span<const Node> donor) const
{
    std::vector<Node> out;
    out.reserve(nodes_.size() - nodes_[site].size + donor.size());
    auto s = nodes_.begin() + static_cast<std::ptrdiff_t>(site);
    out.insert(out.end(), nodes_.begin(), s);
    out.insert(out.end(), donor.begin(), donor.end());
    out.insert(out.end(), s + nodes_[site].size, nodes_.end());
    return Tree(std::move(out));
}

bool Tree::operator==(const Tree& other) const
{
    return std::equal(nodes_.begin(), nodes_.end(), other.nodes_.begin(), other.nodes_.end(),
        [](const Node& a, const Node& b) { return a.same_symbol(b); });
}

void IntervalEnv::check() const
{
    for (std::size_t j = 0; j < features.size(); ++j) {
        if (!features[j].defined()) {
            throw std::invalid_argument("interval env: feature " + std::to_string(j + 1) + " has an undefined interval");
        }
    }
    if (!constants.defined()) {
        throw std::invalid_argument("interval env: undefined constant range");
    }
}

namespace {

    inline double apply(Op op, double x, double y, Semantics semantics)
    {
        if (semantics == Semantics::Protected) {
            if (op == Op::Div && y == 0.0) {
                return 1.0;
            }
            if (op == Op::Log) {
                return x == 0.0 ? 0.0 : std::log(std::fabs(x));
            }
        }
        return apply_op(op, x, y);
    }

    double evaluate_at(const Tree& t, std::size_t i, std::span<const double> row, Semantics semantics)
    {
        const Node& n = t[i];
        switch (n.kind) {
        case NodeKind::Constant: return n.value;
        case NodeKind::Feature: return row[n.feature];
        case NodeKind::Operator: break;
        }
        double x = evaluate_at(t, t.left(i), row, semantics);
        double y = n.arity() == 2 ? evaluate_at(t, t.right(i), row, semantics) : 0.0;
        return apply(n.op, x, y, semantics);
    }

    constexpr std::size_t kBatch = 64;

} // namespace

double evaluate(const Tree& tree, std::span<const double> row, Semantics semantics)
{
    return evaluate_at(tree, 0, row, semantics);
}

std::vector<double> evaluate(const Tree& tree, const Dataset& data, Semantics semantics)
{
    const std::size_t n = data.rows();
    const std::size_t m = tree.size();
    std::vector<double> out(n);
    std::vector<double> scratch(m * kBatch);

    for (std::size_t r0 = 0; r0 < n; r0 += kBatch) {
        const std::size_t len = std::min(kBatch, n - r0);
        for (std::size_t k = m; k-- > 0;) {
            const Node& node = tree[k];
            double* dst = scratch.data() + k * kBatch;
            switch (node.kind) {
            case NodeKind::Constant:
                std::fill_n(dst, len, node.value);
                break;
            case NodeKind::Feature:
                std::copy_n(data.columns[node.feature].data() + r0, len, dst);
                break;
            case NodeKind::Operator: {
                const double* x = scratch.data() + tree.left(k) * kBatch;
                if (node.arity() == 2) {
                    const double* y = scratch.data() + tree.right(k) * kBatch;
                    for (std::size_t r = 0; r < len; ++r) {
                        dst[r] = apply(node.op, x[r], y[r], semantics);
                    }
                } else {
                    for (std::size_t r = 0; r < len; ++r) {
                        dst[r] = apply(node.op, x[r], 0.0, semantics);
                    }
                }
                break;
            }
            }
        }
        std::copy_n(scratch.data(), len, out.data() + r0);
    }
    return out;
}

bool propagate_intervals(Tree& tree, std::size_t root, const IntervalEnv& env)
{
    bool valid = true;
    const std::size_t end = root + tree[root].size;
    for (std::size_t k = end; k-- > root;) {
        Node& n = tree[k];
        switch (n.kind) {
        case NodeKind::Constant:
            n.interval = Interval::make(n.value, n.value);
            break;
        case NodeKind::Feature:
            n.interval = env.features.at(n.feature);
            break;
        case NodeKind::Operator:
            if (n.arity() == 2) {
                n.interval = compute_interval(n.op, tree[tree.left(k)].interval, tree[tree.right(k)].interval);
            } else {
                n.interval = compute_interval(n.op, tree[tree.left(k)].interval);
            }
            break;
        }
        valid = valid && n.interval.defined();
    }
    return valid;
}

bool propagate_intervals(Tree& tree, const IntervalEnv& env)
{
    return propagate_intervals(tree, 0, env);
}

TreeMetrics tree_metrics(const Tree& tree)
{
    return {tree.depth(), tree.size()};
}

ParseError::ParseError(std::size_t position, std::string token, const std::string& message)
    : std::runtime_error("parse error at position " + std::to_string(position) + " near '" + token + "': " + message)
    , position_(position)
    , token_(std::move(token))
{
}

namespace {

    void format_into(const Tree& t, std::size_t i, std::string& out)
    {
        const Node& n = t[i];
        switch (n.kind) {
        case NodeKind::Constant: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            return;
        }
        case NodeKind::Feature:
            out += 'x';
            out += std::to_string(n.feature + 1);
            return;
        case NodeKind::Operator:
            break;
        }
        out += '(';
        out += op_name(n.op);
        out += ' ';
        format_into(t, t.left(i), out);
        if (n.arity() == 2) {
            out += ' ';
            format_into(t, t.right(i), out);
        }
        out += ')';
    }

    struct Token {
        std::string_view text;
        std::size_t position;
    };

    class SexprParser {
    public:
        explicit SexprParser(std::string_view text) : text_(text) {}

        Tree parse()
        {
            std::vector<Node> nodes;
            parse_expr(nodes);
            Token t = next();
            if (!t.text.empty()) {
                throw ParseError(t.position, std::string(t.text), "unexpected trailing input");
            }
            return Tree(std::move(nodes));
        }

    private:
        Token next()
        {
            while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
            std::size_t start = pos_;
            if (pos_ == text_.size()) {
                return {{}, start};
            }
            if (text_[pos_] == '(' || text_[pos_] == ')') {
                ++pos_;
                return {text_.substr(start, 1), start};
            }
            while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '('
                && text_[pos_] != ')') {
                ++pos_;
            }
            return {text_.substr(start, pos_ - start), start};
        }

        void parse_expr(std::vector<Node>& nodes)
        {
            Token t = next();
            if (t.text.empty()) {
                throw ParseError(t.position, "", "unexpected end of input");
            }
            if (t.text == ")") {
                throw ParseError(t.position, ")", "unexpected ')'");
            }
            if (t.text == "(") {
                Token name = next();
                auto op = op_from_name(name.text);
                if (!op) {
                    throw ParseError(name.position, std::string(name.text), "unknown operator");
                }
                nodes.push_back(Node::make_operator(*op));
                for (int k = 0; k < arity(*op); ++k) {
                    parse_expr(nodes);
                }
                Token close = next();
                if (close.text != ")") {
                    throw ParseError(close.position, std::string(close.text), "expected ')'");
                }
                return;
            }
            nodes.push_back(parse_terminal(t));
        }

        static Node parse_terminal(const Token& t)
        {
            std::string_view s = t.text;
            if (s.size() >= 2 && s[0] == 'x') {
                unsigned k = 0;
                auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), k);
                if (ec == std::errc{} && p == s.data() + s.size() && k >= 1) {
                    return Node::make_feature(k - 1);
                }
                throw ParseError(t.position, std::string(s), "bad feature token");
            }
            const char* first = s.data();
            if (!s.empty() && s[0] == '+') {
                ++first;
            }
            double v = 0.0;
            auto [p, ec] = std::from_chars(first, s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
                throw ParseError(t.position, std::string(s), "expected operator, feature or constant");
            }
            return Node::make_constant(v);
        }

        std::string_view text_;
        std::size_t pos_ = 0;
    };

} // namespace

std::string format_sexpr(const Tree& tree)
{
    std::string out;
    if (!tree.empty()) {
        format_into(tree, 0, out);
    }
    return out;
}

Tree parse_sexpr(std::string_view text)
{
    return SexprParser(text).parse();
}

} // namespace ivgp
