#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "ivgp/problems.hpp"

using namespace ivgp;

namespace {

// Reference formulas typed in independently of the library.
double ref_response(const std::string& name, const std::vector<double>& x)
{
    if (name == "keijzer10") {
        return (x[0] == 0.0 && x[1] == 0.0) ? 1.0 : std::pow(x[0], x[1]);
    }
    if (name == "keijzer13") {
        return 6.0 * std::sin(x[0]) * std::cos(x[1]);
    }
    if (name == "pagie1") {
        return 1.0 / (1.0 + std::pow(x[0], -4.0)) + 1.0 / (1.0 + std::pow(x[1], -4.0));
    }
    const double pi = 3.14159265358979323846;
    if (name == "friedman1") {
        return 10.0 * std::sin(pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
    }
    if (name == "friedman2") {
        double t = x[1] * x[2] - 1.0 / (x[1] * x[3]);
        return std::sqrt(x[0] * x[0] + t * t);
    }
    if (name == "friedman3") {
        return std::atan((x[1] * x[2] - 1.0 / (x[1] * x[3])) / x[0]);
    }
    return NAN;
}

std::filesystem::path temp_file(const std::string& name, const std::string& body)
{
    auto dir = std::filesystem::temp_directory_path() / "ivgp_test_problems";
    std::filesystem::create_directories(dir);
    auto p = dir / name;
    std::ofstream(p) << body;
    return p;
}

} // namespace

TEST_CASE("generator point examples")
{
    CHECK(keijzer10(0.25, 0.5) == doctest::Approx(0.5));
    CHECK(keijzer10(0.0, 0.0) == 1.0);
    CHECK(pagie1(1.0, 1.0) == doctest::Approx(1.0));
    CHECK(keijzer13(0.0, 0.0) == 0.0);
}

TEST_CASE("synthetic problem shapes")
{
    Rng rng = make_rng(1, 1);
    auto k10 = gen_synthetic("keijzer10", rng);
    CHECK(k10.train.rows() == 20);
    CHECK(k10.test.rows() == 10000);
    CHECK(k10.train.features() == 2);
    CHECK(k10.interval_source == IntervalSource::Declared);
    CHECK(k10.env.features[0].identical(Interval::make(0, 1)));

    auto pg = gen_synthetic("pagie1", rng);
    CHECK(pg.train.rows() == 68);
    CHECK(pg.train.rows() + pg.test.rows() == 676);
    std::set<std::pair<double, double>> pts;
    for (const auto* d : {&pg.train, &pg.test}) {
        for (std::size_t i = 0; i < d->rows(); ++i) {
            CHECK(d->columns[0][i] != 0.0);
            CHECK(d->columns[1][i] != 0.0);
            CHECK(d->columns[0][i] >= -5.0);
            CHECK(d->columns[0][i] <= 5.0 + 1e-9);
            pts.emplace(d->columns[0][i], d->columns[1][i]);
        }
    }
    CHECK(pts.size() == 676);

    auto k13 = gen_synthetic("keijzer13", rng);
    CHECK(k13.train.rows() == 20);
    CHECK(k13.train.rows() + k13.test.rows() == 61 * 61);

    auto f1 = gen_synthetic("friedman1", rng);
    CHECK(f1.train.features() == 10);
    CHECK(f1.train.rows() == 200);
    CHECK(f1.test.rows() == 2000);
    CHECK(f1.interval_source == IntervalSource::Estimated);
    for (auto name : {"friedman2", "friedman3"}) {
        auto f = gen_synthetic(name, rng);
        CHECK(f.train.features() == 4);
    }

    CHECK_THROWS_AS(gen_synthetic("keijzer99", rng), std::invalid_argument);
}

TEST_CASE("keijzer10 test grid is the inclusive 100 x 100 mesh")
{
    Rng rng = make_rng(2, 1);
    auto k10 = gen_synthetic("keijzer10", rng);
    std::set<std::pair<long, long>> cells;
    for (std::size_t i = 0; i < k10.test.rows(); ++i) {
        double a = k10.test.columns[0][i] * 99.0;
        double b = k10.test.columns[1][i] * 99.0;
        CHECK(std::abs(a - std::round(a)) < 1e-9);
        cells.emplace(std::lround(a), std::lround(b));
    }
    CHECK(cells.size() == 10000);
    CHECK(cells.count({0, 0}) == 1);
    CHECK(cells.count({99, 99}) == 1);
}

TEST_CASE("responses match direct evaluation of the formulas")
{
    for (auto name : {"keijzer10", "keijzer13", "pagie1", "friedman1", "friedman2", "friedman3"}) {
        CAPTURE(name);
        Rng rng = make_rng(11, 1);
        auto p = gen_synthetic(name, rng);
        for (const auto* d : {&p.train, &p.test}) {
            for (std::size_t i = 0; i < d->rows(); ++i) {
                double want = ref_response(name, d->row(i));
                REQUIRE(d->response[i] == doctest::Approx(want).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("friedman noise option")
{
    Rng a = make_rng(4, 1);
    auto clean = gen_synthetic("friedman1", a);
    Rng b = make_rng(4, 1);
    auto noisy = gen_synthetic("friedman1", b, SyntheticOptions{1.0});
    double diff = 0;
    for (std::size_t i = 0; i < noisy.train.rows(); ++i) {
        diff += std::abs(noisy.train.response[i] - ref_response("friedman1", noisy.train.row(i)));
    }
    CHECK(diff / static_cast<double>(noisy.train.rows()) > 0.3);
    (void)clean;
}

TEST_CASE("subdomain problem")
{
    Rng rng = make_rng(3, 1);
    auto p = gen_keijzer10_subdomain(0.25, 0.75, rng);
    CHECK(p.test.rows() == 10000);
    for (std::size_t j = 0; j < 2; ++j) {
        for (double v : p.train.columns[j]) {
            CHECK(v >= 0.25);
            CHECK(v <= 0.75);
        }
        CHECK(uncovered_fraction(Interval::make(0.25, 0.75), p.declared->features[j]) == doctest::Approx(0.5));
    }
    auto measured = p;
    apply_interval_source(measured, IntervalSource::Measured);
    CHECK(measured.env.features[0].lo() == 0.0);
    CHECK(measured.env.features[0].hi() == 1.0);
    CHECK(p.env.features[0].lo() >= 0.25);
}

TEST_CASE("csv loading")
{
    auto d = parse_csv("a,b,y\n1,2,3\n4,5,6\n7,8,9\n1.5,-2e3,0\n");
    CHECK(d.features() == 2);
    CHECK(d.rows() == 4);
    CHECK(d.names == std::vector<std::string>{"a", "b"});
    CHECK(d.columns[1][3] == -2000.0);
    CHECK(d.response[2] == 9.0);

    // Row numbers count file lines with the header as line 1.
    std::string body = "a,b,y\n";
    for (int i = 0; i < 5; ++i) {
        body += "1,2," + std::to_string(i) + "\n";
    }
    body += "1,oops,3\n";
    try {
        load_csv(temp_file("text.csv", body));
        FAIL("no error");
    } catch (const DataError& e) {
        CHECK(e.row() == 7);
        CHECK(e.column() == 2);
        CHECK(std::string(e.what()).find("oops") != std::string::npos);
    }

    auto expect = [](const std::string& text, const std::string& needle) {
        try {
            parse_csv(text);
            FAIL("no error for ", text);
        } catch (const DataError& e) {
            CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
        }
    };
    expect("a,b,y\n", "no data rows");
    expect("", "empty file");
    expect("a,y\n1,2\n", "at least two");
    expect("a,y\n1,2\n3,2\n", "constant response");
    expect("a,y\n1,2\n3\n", "expected 2 columns");
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);

    auto crlf = parse_csv("a,y\r\n1,2\r\n3,4\r\n");
    CHECK(crlf.rows() == 2);
}

TEST_CASE("interval files")
{
    auto p = temp_file("iv.csv", "feature,lo,hi\nb,-1,1\na,0,2\n");
    auto env = load_interval_file(p, {"a", "b"});
    CHECK(env.features[0].identical(Interval::make(0, 2)));
    CHECK(env.features[1].identical(Interval::make(-1, 1)));
    CHECK_THROWS_AS(load_interval_file(p, {"a", "b", "c"}), DataError);
    auto bad = temp_file("iv_bad.csv", "feature,lo,hi\na,3,2\n");
    CHECK_THROWS_AS(load_interval_file(bad, {"a"}), DataError);
}

TEST_CASE("estimate_intervals")
{
    Dataset d;
    d.columns = {{0.2, 0.9, 0.5}, {1, 1, 1}, {0, 1, 0.5}};
    d.response = {0, 1, 2};
    auto env = estimate_intervals(d);
    CHECK(env.features[0].identical(Interval::make(0.2, 0.9)));
    CHECK(env.features[1].identical(Interval::make(1, 1)));
    auto wide = estimate_intervals(d, 0.1);
    CHECK(wide.features[2].lo() == doctest::Approx(-0.1));
    CHECK(wide.features[2].hi() == doctest::Approx(1.1));

    Rng rng = make_rng(5, 1);
    for (int k = 0; k < 20; ++k) {
        auto p = gen_synthetic("friedman1", rng);
        auto e = estimate_intervals(p.train);
        for (std::size_t j = 0; j < p.train.features(); ++j) {
            for (double v : p.train.columns[j]) {
                REQUIRE(e.features[j].contains(v));
            }
        }
    }
}

TEST_CASE("uncovered_fraction")
{
    CHECK(uncovered_fraction(Interval::make(0, 1), Interval::make(0, 1)) == 0.0);
    CHECK(uncovered_fraction(Interval::make(0.25, 0.75), Interval::make(0, 1)) == 0.5);
    CHECK(uncovered_fraction(Interval::make(0, 1), Interval::make(-1, 2)) == doctest::Approx(2.0 / 3.0));
    CHECK(uncovered_fraction(Interval::make(5, 6), Interval::make(0, 1)) == 1.0);
    CHECK_THROWS(uncovered_fraction(Interval::make(0, 1), Interval::make(0.5, 0.5)));
}

TEST_CASE("splits")
{
    Rng rng = make_rng(6, 2);
    auto cv = make_splits(100, CrossValidation{10, 10}, rng);
    REQUIRE(cv.size() == 100);
    for (std::size_t r = 0; r < 10; ++r) {
        std::vector<int> seen(100, 0);
        for (std::size_t f = 0; f < 10; ++f) {
            const auto& s = cv[r * 10 + f];
            CHECK(s.test.size() == 10);
            CHECK(s.train.size() == 90);
            for (auto i : s.test) {
                seen[i]++;
            }
            std::set<std::size_t> tr(s.train.begin(), s.train.end());
            for (auto i : s.test) {
                CHECK(tr.count(i) == 0);
            }
        }
        for (int c : seen) {
            REQUIRE(c == 1);
        }
    }

    auto odd = make_splits(23, CrossValidation{2, 5}, rng);
    for (const auto& s : odd) {
        CHECK(s.test.size() >= 4);
        CHECK(s.test.size() <= 5);
    }

    auto loo = make_splits(10, CrossValidation{1, 10}, rng);
    REQUIRE(loo.size() == 10);
    std::set<std::size_t> singles;
    for (const auto& s : loo) {
        REQUIRE(s.test.size() == 1);
        singles.insert(s.test[0]);
    }
    CHECK(singles.size() == 10);

    auto h = make_splits(676, Holdout{0.1}, rng);
    REQUIRE(h.size() == 1);
    CHECK(h[0].train.size() == 68);
    CHECK(h[0].test.size() == 608);

    CHECK_THROWS(make_splits(5, CrossValidation{1, 10}, rng));
}

TEST_CASE("interval source names")
{
    for (auto s : {IntervalSource::Declared, IntervalSource::Estimated, IntervalSource::Measured}) {
        CHECK(interval_source_from_name(interval_source_name(s)) == s);
    }
}
