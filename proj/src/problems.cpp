#include "ivgp/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace ivgp {

std::string_view interval_source_name(IntervalSource s)
{
    switch (s) {
    case IntervalSource::Declared: return "declared";
    case IntervalSource::Estimated: return "estimated";
    case IntervalSource::Measured: return "measured";
    }
    return "?";
}

std::optional<IntervalSource> interval_source_from_name(std::string_view name)
{
    for (auto s : {IntervalSource::Declared, IntervalSource::Estimated, IntervalSource::Measured}) {
        if (interval_source_name(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

namespace {

    Dataset concat(const Dataset& a, const Dataset& b)
    {
        Dataset out = a;
        for (std::size_t j = 0; j < out.columns.size(); ++j) {
            out.columns[j].insert(out.columns[j].end(), b.columns[j].begin(), b.columns[j].end());
        }
        out.response.insert(out.response.end(), b.response.begin(), b.response.end());
        return out;
    }

    IntervalEnv box(std::size_t p, double lo, double hi)
    {
        IntervalEnv env;
        env.features.assign(p, Interval::make(lo, hi));
        return env;
    }

    std::vector<std::string> default_names(std::size_t p)
    {
        std::vector<std::string> names;
        for (std::size_t j = 0; j < p; ++j) {
            names.push_back("x" + std::to_string(j + 1));
        }
        return names;
    }

    // Two-feature data set from explicit points.
    Dataset grid_dataset(const std::vector<double>& x1, const std::vector<double>& x2, double (*f)(double, double))
    {
        Dataset d;
        d.names = default_names(2);
        d.columns.assign(2, {});
        for (std::size_t i = 0; i < x1.size(); ++i) {
            d.columns[0].push_back(x1[i]);
            d.columns[1].push_back(x2[i]);
            d.response.push_back(f(x1[i], x2[i]));
        }
        return d;
    }

    Dataset mesh(double lo, double step, std::size_t per_axis, double (*f)(double, double))
    {
        std::vector<double> a;
        std::vector<double> b;
        for (std::size_t i = 0; i < per_axis; ++i) {
            for (std::size_t k = 0; k < per_axis; ++k) {
                a.push_back(lo + step * static_cast<double>(i));
                b.push_back(lo + step * static_cast<double>(k));
            }
        }
        return grid_dataset(a, b, f);
    }

    // Train on `n_train` rows drawn without replacement, test on the rest.
    void split_mesh(Problem& p, const Dataset& all, std::size_t n_train, Rng& rng)
    {
        std::vector<std::size_t> idx(all.rows());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
        std::sort(train.begin(), train.end());
        std::sort(test.begin(), test.end());
        p.train = all.subset(train);
        p.test = all.subset(test);
    }

    Dataset uniform_square(std::size_t n, double lo, double hi, Rng& rng)
    {
        std::vector<double> a;
        std::vector<double> b;
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(uniform(rng, lo, hi));
            b.push_back(uniform(rng, lo, hi));
        }
        return grid_dataset(a, b, keijzer10);
    }

    Dataset keijzer10_test_grid()
    {
        std::vector<double> a;
        std::vector<double> b;
        for (int i = 0; i < 100; ++i) {
            for (int k = 0; k < 100; ++k) {
                a.push_back(i / 99.0);
                b.push_back(k / 99.0);
            }
        }
        return grid_dataset(a, b, keijzer10);
    }

    struct FriedmanSpec {
        std::vector<std::pair<double, double>> ranges;
        double (*f)(const std::vector<double>&);
    };

    double friedman1(const std::vector<double>& x)
    {
        return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
    }

    double friedman2(const std::vector<double>& x)
    {
        double t = x[1] * x[2] - 1.0 / (x[1] * x[3]);
        return std::sqrt(x[0] * x[0] + t * t);
    }

    double friedman3(const std::vector<double>& x)
    {
        return std::atan((x[1] * x[2] - 1.0 / (x[1] * x[3])) / x[0]);
    }

    FriedmanSpec friedman_spec(std::string_view name)
    {
        const std::vector<std::pair<double, double>> f23{{0.0, 100.0}, {40.0 * std::numbers::pi, 560.0 * std::numbers::pi}, {0.0, 1.0}, {1.0, 11.0}};
        if (name == "friedman1") {
            return {std::vector<std::pair<double, double>>(10, {0.0, 1.0}), friedman1};
        }
        if (name == "friedman2") {
            return {f23, friedman2};
        }
        return {f23, friedman3};
    }

    Dataset friedman_rows(const FriedmanSpec& spec, std::size_t n, double noise_sd, Rng& rng)
    {
        const std::size_t p = spec.ranges.size();
        Dataset d;
        d.names = default_names(p);
        d.columns.assign(p, {});
        std::normal_distribution<double> noise(0.0, noise_sd > 0.0 ? noise_sd : 1.0);
        std::vector<double> x(p);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                x[j] = uniform(rng, spec.ranges[j].first, spec.ranges[j].second);
                d.columns[j].push_back(x[j]);
            }
            double y = spec.f(x);
            if (noise_sd > 0.0) {
                y += noise(rng);
            }
            d.response.push_back(y);
        }
        return d;
    }

} // namespace

double keijzer10(double x1, double x2)
{
    return std::pow(x1, x2); // pow(0, 0) == 1
}

double keijzer13(double x1, double x2)
{
    return 6.0 * std::sin(x1) * std::cos(x2);
}

double pagie1(double x1, double x2)
{
    return 1.0 / (1.0 + std::pow(x1, -4.0)) + 1.0 / (1.0 + std::pow(x2, -4.0));
}

void apply_interval_source(Problem& problem, IntervalSource source)
{
    switch (source) {
    case IntervalSource::Declared:
        if (!problem.declared) {
            throw std::invalid_argument("problem '" + problem.name + "' has no declared intervals");
        }
        problem.env = *problem.declared;
        break;
    case IntervalSource::Estimated:
        problem.env = estimate_intervals(problem.train);
        break;
    case IntervalSource::Measured:
        problem.env = estimate_intervals(concat(problem.train, problem.test));
        break;
    }
    problem.interval_source = source;
}

Problem gen_synthetic(std::string_view name, Rng& rng, const SyntheticOptions& options)
{
    Problem p;
    p.name = std::string(name);
    if (name == "keijzer10") {
        p.train = uniform_square(20, 0.0, 1.0, rng);
        p.test = keijzer10_test_grid();
        p.declared = box(2, 0.0, 1.0);
    } else if (name == "pagie1") {
        split_mesh(p, mesh(-5.0, 0.4, 26, pagie1), 68, rng);
        p.declared = box(2, -5.0, 5.0);
    } else if (name == "keijzer13") {
        split_mesh(p, mesh(-3.0, 0.1, 61, keijzer13), 20, rng);
        p.declared = box(2, -3.0, 3.0);
    } else if (name == "friedman1" || name == "friedman2" || name == "friedman3") {
        auto spec = friedman_spec(name);
        p.train = friedman_rows(spec, 200, options.noise_sd, rng);
        p.test = friedman_rows(spec, 2000, options.noise_sd, rng);
        IntervalEnv env;
        for (auto [lo, hi] : spec.ranges) {
            env.features.push_back(Interval::make(lo, hi));
        }
        p.declared = env;
        apply_interval_source(p, IntervalSource::Estimated);
        return p;
    } else {
        throw std::invalid_argument("unknown synthetic problem '" + std::string(name) + "'");
    }
    apply_interval_source(p, IntervalSource::Declared);
    return p;
}

Problem gen_keijzer10_subdomain(double lo, double hi, Rng& rng)
{
    Problem p;
    p.name = "keijzer10-subdomain";
    p.train = uniform_square(20, lo, hi, rng);
    p.test = keijzer10_test_grid();
    p.declared = box(2, 0.0, 1.0);
    apply_interval_source(p, IntervalSource::Estimated);
    return p;
}

DataError::DataError(const std::string& message, std::size_t row, std::size_t column)
    : std::runtime_error(row == 0 ? message
                                  : message + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")")
    , row_(row)
    , column_(column)
{
}

namespace {

    std::vector<std::string_view> split_fields(std::string_view line)
    {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        return out;
    }

    std::string_view trim(std::string_view s)
    {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
            s.remove_prefix(1);
        }
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
            s.remove_suffix(1);
        }
        return s;
    }

    std::optional<double> parse_number(std::string_view s)
    {
        s = trim(s);
        if (!s.empty() && s.front() == '+') {
            s.remove_prefix(1);
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
            return std::nullopt;
        }
        return v;
    }

    std::string read_file(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw DataError("cannot open '" + path.string() + "'");
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    template <typename Fn> void for_each_line(std::string_view text, Fn&& fn)
    {
        std::size_t line_no = 0;
        std::size_t start = 0;
        while (start < text.size()) {
            std::size_t nl = text.find('\n', start);
            std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
            ++line_no;
            if (!trim(line).empty()) {
                fn(line, line_no);
            }
            if (nl == std::string_view::npos) {
                break;
            }
            start = nl + 1;
        }
    }

} // namespace

Dataset parse_csv(std::string_view text)
{
    if (text.starts_with("\xEF\xBB\xBF")) {
        text.remove_prefix(3);
    }
    Dataset d;
    std::size_t width = 0;
    bool header = true;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        auto fields = split_fields(line);
        if (header) {
            if (fields.size() < 2) {
                throw DataError("header must name at least one feature and the response", line_no, 1);
            }
            width = fields.size();
            for (std::size_t j = 0; j + 1 < width; ++j) {
                d.names.emplace_back(trim(fields[j]));
            }
            d.columns.assign(width - 1, {});
            header = false;
            return;
        }
        if (fields.size() != width) {
            throw DataError("expected " + std::to_string(width) + " columns, found " + std::to_string(fields.size()),
                line_no, std::min(fields.size(), width) + 1);
        }
        for (std::size_t j = 0; j < width; ++j) {
            auto v = parse_number(fields[j]);
            if (!v) {
                throw DataError("non-numeric cell '" + std::string(trim(fields[j])) + "'", line_no, j + 1);
            }
            if (j + 1 < width) {
                d.columns[j].push_back(*v);
            } else {
                d.response.push_back(*v);
            }
        }
    });
    if (header) {
        throw DataError("empty file");
    }
    if (d.rows() == 0) {
        throw DataError("no data rows");
    }
    if (d.rows() < 2) {
        throw DataError("need at least two data rows");
    }
    auto [lo, hi] = std::minmax_element(d.response.begin(), d.response.end());
    if (*lo == *hi) {
        throw DataError("constant response column");
    }
    return d;
}

Dataset load_csv(const std::filesystem::path& path)
{
    return parse_csv(read_file(path));
}

IntervalEnv load_interval_file(const std::filesystem::path& path, const std::vector<std::string>& feature_names)
{
    std::string text = read_file(path);
    std::vector<std::optional<Interval>> found(feature_names.size());
    bool header = true;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (header) {
            header = false;
            return;
        }
        auto fields = split_fields(line);
        if (fields.size() != 3) {
            throw DataError("interval file rows must be 'feature,lo,hi'", line_no, 1);
        }
        auto name = trim(fields[0]);
        auto it = std::find(feature_names.begin(), feature_names.end(), name);
        if (it == feature_names.end()) {
            throw DataError("unknown feature '" + std::string(name) + "'", line_no, 1);
        }
        auto lo = parse_number(fields[1]);
        auto hi = parse_number(fields[2]);
        if (!lo) {
            throw DataError("non-numeric lower bound", line_no, 2);
        }
        if (!hi) {
            throw DataError("non-numeric upper bound", line_no, 3);
        }
        Interval iv = Interval::make(*lo, *hi);
        if (!iv.defined()) {
            throw DataError("lower bound exceeds upper bound", line_no, 2);
        }
        found[static_cast<std::size_t>(it - feature_names.begin())] = iv;
    });
    IntervalEnv env;
    for (std::size_t j = 0; j < found.size(); ++j) {
        if (!found[j]) {
            throw DataError("no interval given for feature '" + feature_names[j] + "'");
        }
        env.features.push_back(*found[j]);
    }
    return env;
}

IntervalEnv estimate_intervals(const Dataset& data, double margin)
{
    if (data.rows() == 0) {
        throw std::invalid_argument("estimate_intervals: empty data set");
    }
    IntervalEnv env;
    for (const auto& col : data.columns) {
        auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        double pad = margin * (*hi - *lo);
        env.features.push_back(Interval::make(*lo - pad, *hi + pad));
    }
    return env;
}

double uncovered_fraction(const Interval& train_iv, const Interval& test_iv)
{
    if (!train_iv.defined() || !test_iv.defined()) {
        throw std::invalid_argument("uncovered_fraction: undefined interval");
    }
    if (!(test_iv.width() > 0.0)) {
        throw std::invalid_argument("uncovered_fraction: test interval has zero width");
    }
    double covered = std::max(0.0, std::min(train_iv.hi(), test_iv.hi()) - std::max(train_iv.lo(), test_iv.lo()));
    return (test_iv.width() - covered) / test_iv.width();
}

std::vector<Split> make_splits(std::size_t n, const SplitScheme& scheme, Rng& rng)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<Split> out;

    if (const auto* h = std::get_if<Holdout>(&scheme)) {
        if (!(h->train_fraction > 0.0 && h->train_fraction <= 1.0)) {
            throw std::invalid_argument("holdout fraction must lie in (0, 1]");
        }
        // Tolerance keeps e.g. 0.1 * 10 at 1 rather than 2.
        auto k = static_cast<std::size_t>(std::ceil(h->train_fraction * static_cast<double>(n) - 1e-9));
        std::shuffle(idx.begin(), idx.end(), rng);
        Split s;
        s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
        std::sort(s.train.begin(), s.train.end());
        std::sort(s.test.begin(), s.test.end());
        out.push_back(std::move(s));
        return out;
    }

    const auto& cv = std::get<CrossValidation>(scheme);
    if (cv.rounds == 0 || cv.folds < 2 || n < cv.folds) {
        throw std::invalid_argument("cross validation needs rounds >= 1, folds >= 2 and n >= folds");
    }
    for (std::size_t r = 0; r < cv.rounds; ++r) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t f = 0; f < cv.folds; ++f) {
            Split s;
            for (std::size_t i = 0; i < n; ++i) {
                (i % cv.folds == f ? s.test : s.train).push_back(idx[i]);
            }
            std::sort(s.train.begin(), s.train.end());
            std::sort(s.test.begin(), s.test.end());
            out.push_back(std::move(s));
        }
    }
    return out;
}

} // namespace ivgp
