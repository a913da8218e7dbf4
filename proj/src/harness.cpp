#include "ivgp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "ivgp/stats.hpp"

namespace fs = std::filesystem;

namespace ivgp {

std::string format_value(double v)
{
    if (is_invalid_fitness(v) || std::isnan(v)) {
        return "invalid";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_value(std::string_view s)
{
    if (s == "invalid") {
        return kInvalidFitness;
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw DataError("bad numeric field '" + std::string(s) + "'");
    }
    return v;
}

namespace {

    std::string_view trim(std::string_view s)
    {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
            s.remove_prefix(1);
        }
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
            s.remove_suffix(1);
        }
        return s;
    }

    std::vector<std::string> split(std::string_view s, char sep)
    {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (true) {
            std::size_t pos = s.find(sep, start);
            out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
            if (pos == std::string_view::npos) {
                return out;
            }
            start = pos + 1;
        }
    }

    template <typename T> T parse_number(std::string_view s, std::size_t line, std::string_view key)
    {
        T v{};
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
            throw ConfigError("line " + std::to_string(line) + ": bad value '" + std::string(s) + "' for '"
                + std::string(key) + "'");
        }
        return v;
    }

    bool is_synthetic(std::string_view name)
    {
        static const std::set<std::string_view> names{
            "keijzer10", "keijzer13", "pagie1", "friedman1", "friedman2", "friedman3", "keijzer10-subdomain"};
        return names.contains(name);
    }

    std::string sanitize(std::string s)
    {
        for (char& c : s) {
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') {
                c = '-';
            }
        }
        return s;
    }

    std::string run_stem(const std::string& problem, SafetyMode mode, std::size_t run)
    {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04zu", run);
        return problem + "__" + std::string(mode_name(mode)) + "__run" + buf;
    }

    std::string read_text(const fs::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw DataError("cannot open '" + path.string() + "'");
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_text(const fs::path& path, const std::string& text)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write '" + path.string() + "'");
        }
        out << text;
    }

    std::vector<std::vector<std::string>> read_rows(const fs::path& path, std::string_view expected_header)
    {
        std::string text = read_text(path);
        std::istringstream in(text);
        std::string line;
        std::vector<std::vector<std::string>> rows;
        bool header = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (trim(line).empty()) {
                continue;
            }
            if (header) {
                if (line != expected_header) {
                    throw DataError("unexpected header in '" + path.string() + "'");
                }
                header = false;
                continue;
            }
            rows.push_back(split(line, ','));
        }
        return rows;
    }

    constexpr std::string_view kTraceHeader = "run,generation,best_train_rrse,best_test_rrse,invalid_proportion,best_size,best_depth";
    constexpr std::string_view kSummaryHeader = "method,problem,generation,statistic,median,ci_low,ci_high";
    constexpr std::string_view kFinalHeader = "method,problem,runs,median_train_rrse,median_test_rrse,test_ci_low,"
                                              "test_ci_high,runs_test_rrse_above_1,invalid_test_runs,max_test_rrse,"
                                              "median_invalid_proportion";

    std::size_t method_order(const std::string& m)
    {
        if (auto mode = mode_from_name(m)) {
            return static_cast<std::size_t>(*mode);
        }
        return 100;
    }

} // namespace

void ExperimentConfig::validate() const
{
    gp.validate();
    if (methods.empty()) {
        throw ConfigError("no methods selected");
    }
    if (runs == 0) {
        throw ConfigError("runs must be at least 1");
    }
    if (workers == 0) {
        throw ConfigError("workers must be at least 1");
    }
    if (!(subdomain_lo < subdomain_hi)) {
        throw ConfigError("subdomain bounds must satisfy lo < hi");
    }
    if (output_dir.empty()) {
        throw ConfigError("output directory not set");
    }
}

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir)
{
    ExperimentConfig cfg;
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() || base_dir.empty() ? fs::path(p) : base_dir / p; };

    using Setter = std::function<void(const std::string&, std::size_t)>;
    auto size_key = [&](std::size_t& dst) {
        return Setter([&dst](const std::string& v, std::size_t line) { dst = parse_number<std::size_t>(v, line, "value"); });
    };
    auto real_key = [&](double& dst) {
        return Setter([&dst](const std::string& v, std::size_t line) { dst = parse_number<double>(v, line, "value"); });
    };
    double erc_lo = cfg.gp.erc_range.lo();
    double erc_hi = cfg.gp.erc_range.hi();

    std::map<std::string, Setter, std::less<>> setters{
        {"problem",
            [&](const std::string& v, std::size_t) { cfg.problem = is_synthetic(v) ? v : resolve(v).string(); }},
        {"interval_source",
            [&](const std::string& v, std::size_t line) {
                cfg.interval_source = interval_source_from_name(v);
                if (!cfg.interval_source) {
                    throw ConfigError("line " + std::to_string(line) + ": unknown interval source '" + v + "'");
                }
            }},
        {"interval_file", [&](const std::string& v, std::size_t) { cfg.interval_file = resolve(v); }},
        {"split",
            [&](const std::string& v, std::size_t line) {
                auto parts = split(v, ':');
                if (parts[0] == "holdout" && parts.size() == 2) {
                    cfg.split = Holdout{parse_number<double>(parts[1], line, "split")};
                } else if (parts[0] == "cv" && parts.size() == 3) {
                    cfg.split = CrossValidation{parse_number<std::size_t>(parts[1], line, "split"),
                        parse_number<std::size_t>(parts[2], line, "split")};
                } else {
                    throw ConfigError("line " + std::to_string(line) + ": split must be holdout:<frac> or cv:<rounds>:<folds>");
                }
            }},
        {"subdomain",
            [&](const std::string& v, std::size_t line) {
                auto parts = split(v, ':');
                if (parts.size() != 2) {
                    throw ConfigError("line " + std::to_string(line) + ": subdomain must be <lo>:<hi>");
                }
                cfg.subdomain_lo = parse_number<double>(parts[0], line, "subdomain");
                cfg.subdomain_hi = parse_number<double>(parts[1], line, "subdomain");
            }},
        {"noise_sd", real_key(cfg.noise_sd)},
        {"methods",
            [&](const std::string& v, std::size_t line) {
                cfg.methods.clear();
                for (const auto& m : split(v, ',')) {
                    auto mode = mode_from_name(m);
                    if (!mode) {
                        throw ConfigError("line " + std::to_string(line) + ": unknown method '" + m + "'");
                    }
                    cfg.methods.push_back(*mode);
                }
            }},
        {"runs", size_key(cfg.runs)},
        {"seed", [&](const std::string& v, std::size_t line) { cfg.base_seed = parse_number<std::uint64_t>(v, line, "seed"); }},
        {"workers", size_key(cfg.workers)},
        {"output", [&](const std::string& v, std::size_t) { cfg.output_dir = resolve(v); }},
        {"population_size", size_key(cfg.gp.population_size)},
        {"generations", size_key(cfg.gp.generations)},
        {"init_min_depth", size_key(cfg.gp.init_min_depth)},
        {"init_max_depth", size_key(cfg.gp.init_max_depth)},
        {"mutation_prob", real_key(cfg.gp.mutation_prob)},
        {"crossover_prob", real_key(cfg.gp.crossover_prob)},
        {"mutation_max_depth", size_key(cfg.gp.mutation_max_depth)},
        {"max_offspring_depth", size_key(cfg.gp.max_offspring_depth)},
        {"tournament_size", size_key(cfg.gp.tournament_size)},
        {"elitism", size_key(cfg.gp.elitism)},
        {"erc_lo", real_key(erc_lo)},
        {"erc_hi", real_key(erc_hi)},
        {"functions",
            [&](const std::string& v, std::size_t line) {
                cfg.gp.functions.clear();
                for (const auto& f : split(v, ',')) {
                    auto op = op_from_name(f);
                    if (!op) {
                        throw ConfigError("line " + std::to_string(line) + ": unknown function '" + f + "'");
                    }
                    cfg.gp.functions.push_back(*op);
                }
            }},
    };

    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        it->second(value, line_no);
    }
    cfg.gp.erc_range = Interval::make(erc_lo, erc_hi);
    if (!cfg.gp.erc_range.defined()) {
        throw ConfigError("erc_lo/erc_hi do not form an interval");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const fs::path& path)
{
    std::string text;
    try {
        text = read_text(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, path.parent_path());
}

ProblemFactory::ProblemFactory(const ExperimentConfig& cfg)
    : cfg_(cfg)
{
    cfg.validate();
    if (is_synthetic(cfg.problem)) {
        name_ = cfg.problem;
        if (!cfg.interval_file.empty()) {
            throw ConfigError("interval_file only applies to CSV problems");
        }
    } else {
        fs::path path(cfg.problem);
        if (!fs::exists(path)) {
            throw ConfigError("problem '" + cfg.problem + "' is neither a known generator nor an existing file");
        }
        name_ = sanitize(path.stem().string());
        data_ = load_csv(path);
        if (!cfg.interval_file.empty()) {
            declared_ = load_interval_file(cfg.interval_file, data_->names);
        }
        Rng rng = make_rng(cfg.base_seed, 2);
        splits_ = make_splits(data_->rows(), cfg.split, rng);
    }
    if (name_.find("__") != std::string::npos) {
        throw ConfigError("problem name may not contain '__'");
    }
    make(0); // surfaces interval-source errors before any run starts
}

Problem ProblemFactory::make(std::size_t run_index) const
{
    Rng rng = make_rng(cfg_.base_seed + run_index, 1);
    Problem p;
    IntervalSource default_source = IntervalSource::Declared;
    if (data_) {
        const Split& s = splits_[run_index % splits_.size()];
        p.name = name_;
        p.train = data_->subset(s.train);
        p.test = data_->subset(s.test);
        p.declared = declared_;
        default_source = declared_ ? IntervalSource::Declared : IntervalSource::Estimated;
    } else if (name_ == "keijzer10-subdomain") {
        p = gen_keijzer10_subdomain(cfg_.subdomain_lo, cfg_.subdomain_hi, rng);
        default_source = IntervalSource::Estimated;
    } else {
        p = gen_synthetic(name_, rng, SyntheticOptions{cfg_.noise_sd});
        default_source = p.interval_source;
    }
    try {
        apply_interval_source(p, cfg_.interval_source.value_or(default_source));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

void write_trace(const fs::path& path, std::size_t run, const RunTrace& trace)
{
    std::string out(kTraceHeader);
    out += '\n';
    for (const auto& g : trace.generations) {
        out += std::to_string(run) + ',' + std::to_string(g.generation) + ',' + format_value(g.best_train_rrse) + ','
            + format_value(g.best_test_rrse) + ',' + format_value(g.invalid_proportion) + ','
            + std::to_string(g.best_size) + ',' + std::to_string(g.best_depth) + '\n';
    }
    write_text(path, out);
}

std::vector<TraceRow> read_trace(const fs::path& path)
{
    std::vector<TraceRow> out;
    for (const auto& f : read_rows(path, kTraceHeader)) {
        if (f.size() != 7) {
            throw DataError("malformed trace row in '" + path.string() + "'");
        }
        TraceRow r;
        r.run = static_cast<std::size_t>(parse_value(f[0]));
        r.stats.generation = static_cast<std::size_t>(parse_value(f[1]));
        r.stats.best_train_rrse = parse_value(f[2]);
        r.stats.best_test_rrse = parse_value(f[3]);
        r.stats.invalid_proportion = parse_value(f[4]);
        r.stats.best_size = static_cast<std::size_t>(parse_value(f[5]));
        r.stats.best_depth = static_cast<std::size_t>(parse_value(f[6]));
        out.push_back(r);
    }
    return out;
}

Summary summarize(const fs::path& trace_dir, const fs::path& out_dir)
{
    // (problem, method) -> traces ordered by file name, i.e. by run index
    std::map<std::pair<std::string, std::string>, std::vector<std::vector<TraceRow>>> groups;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(trace_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw DataError("no trace files in '" + trace_dir.string() + "'");
    }
    for (const auto& f : files) {
        // <problem>__<method>__run<k>
        std::string stem = f.stem().string();
        auto a = stem.find("__");
        auto b = stem.find("__", a == std::string::npos ? 0 : a + 2);
        if (a == std::string::npos || b == std::string::npos) {
            throw DataError("trace file name '" + f.filename().string() + "' is not <problem>__<method>__run<k>.csv");
        }
        groups[{stem.substr(0, a), stem.substr(a + 2, b - a - 2)}].push_back(read_trace(f));
    }

    Summary summary;
    std::map<std::string, std::string> per_method;
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& [key, _] : groups) {
        keys.push_back(key);
    }
    std::stable_sort(keys.begin(), keys.end(), [](const auto& x, const auto& y) {
        return std::tuple(method_order(x.second), x.second, x.first) < std::tuple(method_order(y.second), y.second, y.first);
    });

    for (const auto& key : keys) {
        const auto& [problem, method] = key;
        const auto& runs = groups.at(key);
        const std::size_t n_gen = runs.front().size();
        for (const auto& r : runs) {
            if (r.size() != n_gen || n_gen == 0) {
                throw DataError("traces for " + problem + "/" + method + " have differing generation counts");
            }
        }
        using Getter = double (*)(const GenerationStats&);
        const std::pair<const char*, Getter> statistics[] = {
            {"best_train_rrse", [](const GenerationStats& s) { return s.best_train_rrse; }},
            {"best_test_rrse", [](const GenerationStats& s) { return s.best_test_rrse; }},
            {"invalid_proportion", [](const GenerationStats& s) { return s.invalid_proportion; }},
        };
        std::string& text = per_method[method];
        std::vector<double> column(runs.size());
        for (std::size_t g = 0; g < n_gen; ++g) {
            for (const auto& [name, get] : statistics) {
                for (std::size_t r = 0; r < runs.size(); ++r) {
                    column[r] = get(runs[r][g].stats);
                }
                auto m = stats::median_ci95(column);
                SummaryRow row{method, problem, runs.front()[g].stats.generation, name, m.median, m.lo, m.hi};
                text += row.method + ',' + row.problem + ',' + std::to_string(row.generation) + ',' + row.statistic + ','
                    + format_value(row.median) + ',' + format_value(row.ci_low) + ',' + format_value(row.ci_high) + '\n';
                summary.rows.push_back(std::move(row));
            }
        }

        FinalSummary fin;
        fin.method = method;
        fin.problem = problem;
        fin.runs = runs.size();
        std::vector<double> train;
        std::vector<double> test;
        std::vector<double> invalid;
        fin.max_test_rrse = 0.0;
        for (const auto& r : runs) {
            const auto& last = r.back().stats;
            train.push_back(last.best_train_rrse);
            test.push_back(last.best_test_rrse);
            invalid.push_back(last.invalid_proportion);
            if (is_invalid_fitness(last.best_test_rrse)) {
                ++fin.invalid_test_runs;
            } else {
                fin.max_test_rrse = std::max(fin.max_test_rrse, last.best_test_rrse);
            }
            if (!(last.best_test_rrse <= 1.0)) {
                ++fin.runs_test_rrse_above_1;
            }
        }
        fin.median_train_rrse = stats::median(train);
        auto t = stats::median_ci95(test);
        fin.median_test_rrse = t.median;
        fin.test_ci_low = t.lo;
        fin.test_ci_high = t.hi;
        fin.median_invalid_proportion = stats::median(invalid);
        summary.finals.push_back(fin);
    }

    fs::create_directories(out_dir);
    for (const auto& [method, text] : per_method) {
        write_text(out_dir / (method + ".csv"), std::string(kSummaryHeader) + '\n' + text);
    }
    std::string fin_text(kFinalHeader);
    fin_text += '\n';
    for (const auto& f : summary.finals) {
        fin_text += f.method + ',' + f.problem + ',' + std::to_string(f.runs) + ',' + format_value(f.median_train_rrse) + ','
            + format_value(f.median_test_rrse) + ',' + format_value(f.test_ci_low) + ',' + format_value(f.test_ci_high)
            + ',' + std::to_string(f.runs_test_rrse_above_1) + ',' + std::to_string(f.invalid_test_runs) + ','
            + format_value(f.max_test_rrse) + ',' + format_value(f.median_invalid_proportion) + '\n';
    }
    write_text(out_dir / "final.csv", fin_text);
    return summary;
}

std::vector<SummaryRow> read_summary(const fs::path& path)
{
    std::vector<SummaryRow> out;
    for (const auto& f : read_rows(path, kSummaryHeader)) {
        if (f.size() != 7) {
            throw DataError("malformed summary row in '" + path.string() + "'");
        }
        out.push_back(SummaryRow{f[0], f[1], static_cast<std::size_t>(parse_value(f[2])), f[3], parse_value(f[4]),
            parse_value(f[5]), parse_value(f[6])});
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    ProblemFactory factory(cfg);

    const fs::path trace_dir = cfg.output_dir / "traces";
    const fs::path model_dir = cfg.output_dir / "models";
    fs::create_directories(trace_dir);
    fs::create_directories(model_dir);

    struct Task {
        SafetyMode mode;
        std::size_t run;
    };
    std::vector<Task> tasks;
    for (auto mode : cfg.methods) {
        for (std::size_t r = 0; r < cfg.runs; ++r) {
            tasks.push_back({mode, r});
        }
    }

    ExperimentResult result;
    for (const auto& t : tasks) {
        std::string stem = run_stem(factory.name(), t.mode, t.run);
        result.traces.push_back(trace_dir / (stem + ".csv"));
        result.models.push_back(model_dir / (stem + ".sexpr"));
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                const auto& t = tasks[i];
                Problem problem = factory.make(t.run);
                GpConfig gp = cfg.gp;
                gp.mode = t.mode;
                gp.seed = cfg.base_seed + t.run;
                RunTrace trace = run(gp, problem);
                write_trace(result.traces[i], t.run, trace);
                write_text(result.models[i], format_sexpr(trace.champion.tree) + '\n');
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };

    const std::size_t n_workers = std::min(cfg.workers, tasks.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }

    result.summary = summarize(trace_dir, cfg.output_dir / "summary");
    return result;
}

FriedmanAnalysis analyze_friedman(const std::vector<fs::path>& summary_files)
{
    // final-generation median test RRSE per (problem, method)
    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, double>> finals;
    FriedmanAnalysis out;
    for (const auto& path : summary_files) {
        for (const auto& row : read_summary(path)) {
            if (row.statistic != "best_test_rrse") {
                continue;
            }
            auto& slot = finals[{row.problem, row.method}];
            if (row.generation >= slot.first) {
                slot = {row.generation, row.median};
            }
            if (std::find(out.methods.begin(), out.methods.end(), row.method) == out.methods.end()) {
                out.methods.push_back(row.method);
            }
            if (std::find(out.problems.begin(), out.problems.end(), row.problem) == out.problems.end()) {
                out.problems.push_back(row.problem);
            }
        }
    }
    std::stable_sort(out.methods.begin(), out.methods.end(),
        [](const auto& a, const auto& b) { return method_order(a) < method_order(b); });
    std::sort(out.problems.begin(), out.problems.end());
    for (const auto& p : out.problems) {
        std::vector<double> row;
        for (const auto& m : out.methods) {
            auto it = finals.find({p, m});
            if (it == finals.end()) {
                throw DataError("no summary for method '" + m + "' on problem '" + p + "'");
            }
            row.push_back(it->second.second);
        }
        out.values.push_back(std::move(row));
    }
    if (out.problems.size() < 2 || out.methods.size() < 2) {
        throw DataError("the Friedman test needs at least two problems and two methods");
    }
    auto res = stats::friedman_rank_test(out.values);
    out.chi2 = res.chi2;
    out.df = res.df;
    out.p = res.p;
    return out;
}

} // namespace ivgp
