#include <klt/cli.hpp>

#include <klt/bound.hpp>
#include <klt/extremal.hpp>
#include <klt/serialization.hpp>
#include <klt/verify.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace klt::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 42;
constexpr std::array<double, 4> kTableDeltas{0.001, 0.01, 0.1, 1.0};

/// Bad flag or config value; exits with kUsageError.
class UsageError : public Error
{
public:
    using Error::Error;
};

std::string key_of(const std::string& flag)
{
    std::string key = flag;
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

/// Merges flags over the optional --config file and records the effective
/// values for the "config" echo.
class Settings
{
public:
    Settings(const CLI::App& sub, std::string config_path)
        : sub_(sub)
    {
        echo_["command"] = sub.get_name();
        if (config_path.empty()) return;
        std::ifstream in(config_path);
        if (!in) throw UsageError("--config: cannot open " + config_path);
        try {
            file_ = json::parse(in);
        } catch (const json::parse_error& e) {
            throw UsageError("--config: " + std::string(e.what()));
        }
        if (!file_.is_object()) throw UsageError("--config: expected a flat JSON object");
    }

    /// Value of --flag: the flag if given, else the config file, else `fallback`.
    template <class T>
    std::optional<T> get(const std::string& flag, const T& bound, std::optional<T> fallback = std::nullopt)
    {
        const auto key = key_of(flag);
        std::optional<T> value = fallback;
        if (sub_.get_option("--" + flag)->count() > 0) {
            value = bound;
        } else if (file_.contains(key)) {
            try {
                value = file_.at(key).get<T>();
            } catch (const json::exception&) {
                throw UsageError("--" + flag + ": config file value has the wrong type");
            }
        }
        if (value) echo_[key] = *value;
        return value;
    }

    double delta(const std::string& flag, double bound, std::optional<double> fallback = std::nullopt)
    {
        const auto got = get<double>(flag, bound, fallback);
        if (!got) throw UsageError("--" + flag + " is required");
        const double v = *got;
        if (!(v >= 0) || !std::isfinite(v)) throw UsageError("--" + flag + " must be a finite number >= 0");
        return v;
    }

    std::int64_t positive(const std::string& flag, std::int64_t bound, std::int64_t fallback, std::int64_t minimum = 1)
    {
        const auto v = *get<std::int64_t>(flag, bound, fallback);
        if (v < minimum) throw UsageError("--" + flag + " must be >= " + std::to_string(minimum));
        return v;
    }

    /// flag, then config file, then KLT_SEED, then 42.
    std::uint64_t seed(std::uint64_t bound)
    {
        std::uint64_t fallback = kDefaultSeed;
        if (const char* env = std::getenv("KLT_SEED")) {
            try {
                std::size_t used = 0;
                fallback = std::stoull(env, &used);
                if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw UsageError("KLT_SEED must be a non-negative integer");
            }
        }
        return *get<std::uint64_t>("seed", bound, fallback);
    }

    bool flag(const std::string& name)
    {
        bool v = sub_.get_option("--" + name)->count() > 0;
        if (!v && file_.contains(key_of(name))) {
            try {
                v = file_.at(key_of(name)).get<bool>();
            } catch (const json::exception&) {
                throw UsageError("--" + name + ": config file value has the wrong type");
            }
        }
        echo_[key_of(name)] = v;
        return v;
    }

    const json& echo() const { return echo_; }

private:
    const CLI::App& sub_;
    json file_ = json::object();
    json echo_ = json::object();
};

/// "-" means the stream handed to run().
class Sink
{
public:
    Sink(const std::string& path, std::ostream& fallback)
    {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
        } else {
            file_.open(path, std::ios::binary);
            if (!file_) throw UsageError("cannot open output file " + path);
            stream_ = &file_;
        }
    }

    std::ostream& stream() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

bool is_stdout(const std::string& path) { return path.empty() || path == "-"; }

void emit_json(std::ostream& out, const Settings& settings, json result)
{
    json doc = {{"tool_version", kToolVersion}, {"config", settings.echo()}, {"result", std::move(result)}};
    out << doc.dump(2) << '\n';
}

struct Flags
{
    double delta1 = 0;
    double delta2 = 0;
    std::int64_t dim = 1;
    std::int64_t trials = 10000;
    std::uint64_t seed = kDefaultSeed;
    std::int64_t grid = 0;
    std::string format;
    std::string output = "-";
    std::string config;
    bool q_identity = false;
    std::string center;
    std::string side_output;
    double delta1_min = 0.001;
    double delta1_max = 1;
    double delta2_min = 0.001;
    double delta2_max = 1;
};

void add_common(CLI::App& sub, Flags& f)
{
    sub.add_option("--output", f.output, "Output path, '-' for standard output");
    sub.add_option("--config", f.config, "Flat JSON file with default flag values");
}

void add_deltas(CLI::App& sub, Flags& f)
{
    sub.add_option("--delta1", f.delta1, "KL(N1 || N2) budget in nats");
    sub.add_option("--delta2", f.delta2, "KL(N2 || N3) budget in nats");
}

void add_format(CLI::App& sub, Flags& f)
{
    sub.add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

std::string resolve_format(Settings& s, const Flags& f, const std::string& fallback)
{
    const auto v = *s.get<std::string>("format", f.format, fallback);
    if (v != "csv" && v != "json") throw UsageError("--format must be csv or json");
    return v;
}

int cmd_bound(Settings& s, const Flags& f, std::ostream& out)
{
    const double d1 = s.delta("delta1", f.delta1);
    const double d2 = s.delta("delta2", f.delta2);
    const auto format = resolve_format(s, f, "json");
    Sink sink(*s.get<std::string>("output", f.output, "-"), out);
    const auto report = bound_report(BudgetPaird(d1, d2));
    if (format == "json") {
        emit_json(sink.stream(), s, to_json(report));
    } else {
        CsvWriter csv(sink.stream(), {"delta1", "delta2", "supremum", "asymptotic", "legacy"});
        csv.row(d1, d2, report.supremum, report.asymptotic, report.legacy);
    }
    return kSuccess;
}

// 0.001 -> "0.001", 1 -> "1".
std::string table_label(double v)
{
    auto label = format_fixed(v, 3);
    label.erase(label.find_last_not_of('0') + 1);
    if (label.back() == '.') label.pop_back();
    return label;
}

int cmd_table(Settings& s, const Flags& f, std::ostream& out)
{
    const auto format = resolve_format(s, f, "csv");
    Sink sink(*s.get<std::string>("output", f.output, "-"), out);
    if (format == "csv") {
        // Rows are delta1, columns delta2.
        auto& o = sink.stream();
        o << "delta1";
        for (double d2 : kTableDeltas) o << ',' << table_label(d2);
        o << '\n';
        for (double d1 : kTableDeltas) {
            o << table_label(d1);
            for (double d2 : kTableDeltas) o << ',' << format_fixed(supremum(d1, d2), 4);
            o << '\n';
        }
    } else {
        json values = json::array();
        for (double d1 : kTableDeltas) {
            json row = json::array();
            for (double d2 : kTableDeltas) row.push_back(std::round(supremum(d1, d2) * 1e4) / 1e4);
            values.push_back(std::move(row));
        }
        emit_json(sink.stream(), s, {{"deltas", kTableDeltas}, {"supremum", std::move(values)}});
    }
    return kSuccess;
}

std::vector<double> axis(double lo, double hi, std::int64_t count)
{
    if (lo == hi) return {lo};
    std::vector<double> out(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = i + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return out;
}

int cmd_sweep(Settings& s, const Flags& f, std::ostream& out)
{
    const double x0 = s.delta("delta1-min", f.delta1_min, 0.001);
    const double x1 = s.delta("delta1-max", f.delta1_max, 1.0);
    const double y0 = s.delta("delta2-min", f.delta2_min, 0.001);
    const double y1 = s.delta("delta2-max", f.delta2_max, 1.0);
    if (x0 > x1) throw UsageError("--delta1-min must not exceed --delta1-max");
    if (y0 > y1) throw UsageError("--delta2-min must not exceed --delta2-max");
    const auto grid = s.positive("grid", f.grid, 100, 2);
    const auto format = resolve_format(s, f, "csv");
    Sink sink(*s.get<std::string>("output", f.output, "-"), out);

    const auto xs = axis(x0, x1, grid);
    const auto ys = axis(y0, y1, grid);
    if (format == "csv") {
        CsvWriter csv(sink.stream(), {"delta1", "delta2", "supremum"});
        for (double x : xs)
            for (double y : ys) csv.row(x, y, supremum(x, y));
    } else {
        json rows = json::array();
        for (double x : xs)
            for (double y : ys) rows.push_back({{"delta1", x}, {"delta2", y}, {"supremum", supremum(x, y)}});
        emit_json(sink.stream(), s, std::move(rows));
    }
    return kSuccess;
}

json read_json_file(const std::string& path, const char* flag)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput(std::string(flag) + ": cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string(flag) + ": " + e.what());
    }
}

int cmd_construct(Settings& s, const Flags& f, std::ostream& out)
{
    const double d1 = s.delta("delta1", f.delta1);
    const double d2 = s.delta("delta2", f.delta2);
    const auto center_path = s.get<std::string>("center", f.center);
    const auto dim = s.get<std::int64_t>("dim", f.dim);
    const auto seed = s.seed(f.seed);
    const bool q_identity = s.flag("q-identity");
    Sink sink(*s.get<std::string>("output", f.output, "-"), out);

    std::optional<Gaussiand> center;
    if (center_path) {
        center = gaussian_from_json(read_json_file(*center_path, "--center"));
    } else {
        if (!dim) throw UsageError("either --center or --dim is required");
        if (*dim < 1 || *dim > kMaxDim) throw UsageError("--dim must be in [1, " + std::to_string(kMaxDim) + "]");
        center = Gaussiand::standard(*dim);
    }
    Stream rng(seed);
    const auto q = q_identity ? OrthogonalMatrixd::identity(center->dim()) : random_orthogonal(center->dim(), rng);
    const auto triple = construct_triple(*center, BudgetPaird(d1, d2), q);
    emit_json(sink.stream(), s, to_json(triple));
    return kSuccess;
}

int cmd_verify(Settings& s, const Flags& f, std::ostream& out, std::ostream& err)
{
    const double d1 = s.delta("delta1", f.delta1);
    const double d2 = s.delta("delta2", f.delta2);
    const auto dim = s.positive("dim", f.dim, 1);
    if (dim > kMaxDim) throw UsageError("--dim must be in [1, " + std::to_string(kMaxDim) + "]");
    const auto trials = s.positive("trials", f.trials, 10000);
    const auto seed = s.seed(f.seed);
    Sink sink(*s.get<std::string>("output", f.output, "-"), out);

    const auto report = verify_triangle(dim, BudgetPaird(d1, d2), trials, seed);
    emit_json(sink.stream(), s, to_json(report));
    if (report.counterexample()) {
        err << "counterexample: KL(N1||N3) exceeds the supremum by " << format_full(-report.margin)
            << " at trial " << report.worst_triple.trial << '\n';
        return kCounterexample;
    }
    return kSuccess;
}

std::string sidecar_path(const std::string& explicit_path, const std::string& output, const std::string& suffix)
{
    if (!explicit_path.empty()) return explicit_path;
    if (is_stdout(output)) return {};
    return output + suffix;
}

int cmd_experiment_1d(Settings& s, const Flags& f, std::ostream& out, std::ostream& err)
{
    const double d1 = s.delta("delta1", f.delta1);
    const double d2 = s.delta("delta2", f.delta2);
    if (d1 == 0 || d2 == 0) throw UsageError("--delta1 and --delta2 must be > 0 for experiment-1d");
    const auto grid = s.positive("grid", f.grid, 101, 2);
    const auto output = *s.get<std::string>("output", f.output, "-");
    const auto families = sidecar_path(*s.get<std::string>("families-output", f.side_output, ""), output, ".families.csv");
    Sink sink(output, out);

    const auto g = static_cast<int>(grid);
    const auto values = kl_grid_1d(d1, d2, g);
    const auto mu1 = symmetric_grid(family_left_half_width(d1), g);
    const auto mu2 = symmetric_grid(family_right_half_width(d2), g);
    CsvWriter csv(sink.stream(), {"mu1", "mu2", "kl"});
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) csv.row(mu1[static_cast<std::size_t>(i)], mu2[static_cast<std::size_t>(j)], values(i, j));

    if (families.empty()) {
        err << "note: family table not written (pass --families-output or a file --output)\n";
        return kSuccess;
    }
    Sink side(families, out);
    CsvWriter fam(side.stream(), {"mu", "sigma_sq", "side"});
    for (double m : mu1) {
        const auto p = family_1d_left(m, d1);
        fam.row(p.mu, p.sigma_sq, to_string(p.side));
    }
    for (double m : mu2) {
        const auto p = family_1d_right(m, d2);
        fam.row(p.mu, p.sigma_sq, to_string(p.side));
    }
    return kSuccess;
}

int cmd_hscan(Settings& s, const Flags& f, std::ostream& out, std::ostream& err)
{
    const double d1 = s.delta("delta1", f.delta1);
    const double d2 = s.delta("delta2", f.delta2);
    if (d1 == 0 || d2 == 0) throw UsageError("--delta1 and --delta2 must be > 0 for hscan");
    const auto grid = s.positive("grid", f.grid, 201, 11);
    const auto output = *s.get<std::string>("output", f.output, "-");
    const auto grid_path = sidecar_path(*s.get<std::string>("grid-output", f.side_output, ""), output, ".grid.csv");
    Sink sink(output, out);

    const auto report = scan_h(BudgetPaird(d1, d2), static_cast<int>(grid));
    emit_json(sink.stream(), s, to_json(report));
    if (grid_path.empty()) {
        err << "note: grid CSV not written (pass --grid-output or a file --output)\n";
        return kSuccess;
    }
    Sink side(grid_path, out);
    write_h_grid_csv(side.stream(), report);
    return kSuccess;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Tight relaxed triangle inequality for KL divergence between Gaussians", "klt"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Flags f;
    auto* bound = app.add_subcommand("bound", "Supremum, small-budget form and legacy bound for (delta1, delta2)");
    add_deltas(*bound, f);
    add_format(*bound, f);
    add_common(*bound, f);

    auto* table = app.add_subcommand("table", "Supremum over {0.001, 0.01, 0.1, 1}^2, rounded to 4 decimals");
    add_format(*table, f);
    add_common(*table, f);

    auto* sweep = app.add_subcommand("sweep", "Supremum over a rectangular grid of budgets");
    sweep->add_option("--delta1-min", f.delta1_min);
    sweep->add_option("--delta1-max", f.delta1_max);
    sweep->add_option("--delta2-min", f.delta2_min);
    sweep->add_option("--delta2-max", f.delta2_max);
    sweep->add_option("--grid", f.grid, "Points per axis (default 100)");
    add_format(*sweep, f);
    add_common(*sweep, f);

    auto* construct = app.add_subcommand("construct", "Gaussian triple attaining the supremum");
    add_deltas(*construct, f);
    construct->add_option("--center", f.center, "JSON file with the middle Gaussian");
    construct->add_option("--dim", f.dim, "Use N(0, I) of this dimension as the middle Gaussian");
    construct->add_option("--seed", f.seed);
    construct->add_flag("--q-identity", f.q_identity, "Use Q = I instead of a Haar-random rotation");
    add_common(*construct, f);

    auto* verify = app.add_subcommand("verify", "Constrained random search for a counterexample");
    add_deltas(*verify, f);
    verify->add_option("--dim", f.dim, "Dimension (default 1)");
    verify->add_option("--trials", f.trials, "Trials including the extremal one (default 10000)");
    verify->add_option("--seed", f.seed);
    add_common(*verify, f);

    auto* exp1d = app.add_subcommand("experiment-1d", "KL grid over the one-dimensional constrained families");
    add_deltas(*exp1d, f);
    exp1d->add_option("--grid", f.grid, "Points per axis (default 101)");
    exp1d->add_option("--families-output", f.side_output, "CSV path for the two families");
    add_common(*exp1d, f);

    auto* hscan = app.add_subcommand("hscan", "Normalized H surface scan over [0, 2]^2");
    add_deltas(*hscan, f);
    hscan->add_option("--grid", f.grid, "Points per axis (default 201)");
    hscan->add_option("--grid-output", f.side_output, "CSV path for the grid values");
    add_common(*hscan, f);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        auto* sub = app.get_subcommands().front();
        Settings s(*sub, f.config);
        const auto& name = sub->get_name();
        if (name == "bound") return cmd_bound(s, f, out);
        if (name == "table") return cmd_table(s, f, out);
        if (name == "sweep") return cmd_sweep(s, f, out);
        if (name == "construct") return cmd_construct(s, f, out);
        if (name == "verify") return cmd_verify(s, f, out, err);
        if (name == "experiment-1d") return cmd_experiment_1d(s, f, out, err);
        if (name == "hscan") return cmd_hscan(s, f, out, err);
        err << "error: unknown command " << name << '\n';
        return kUsageError;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    }
}

} // namespace klt::cli
