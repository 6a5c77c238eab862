#include <klt/serialization.hpp>

#include <charconv>
#include <cmath>
#include <system_error>

namespace klt {

json to_json(const Matrix<double>& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const Vector<double>& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json to_json(const Gaussiand& g)
{
    return {{"mean", to_json(g.mean())}, {"cov", to_json(g.cov().matrix())}};
}

json to_json(const BudgetPaird& b)
{
    return {{"delta1", b.delta1()}, {"delta2", b.delta2()}};
}

json to_json(const BoundReport<double>& r)
{
    return {{"inputs", to_json(r.inputs)},
            {"supremum", r.supremum},
            {"asymptotic", r.asymptotic},
            {"legacy", r.legacy}};
}

json to_json(const ExtremalTriple& t)
{
    return {{"n1", to_json(t.n1)},
            {"n2", to_json(t.n2)},
            {"n3", to_json(t.n3)},
            {"q", to_json(t.q.matrix())},
            {"budgets", to_json(t.budgets)},
            {"supremum", supremum(t.budgets)},
            {"achieved12", t.achieved12},
            {"achieved23", t.achieved23},
            {"achieved13", t.achieved13}};
}

json to_json(const TrialRecord& r)
{
    json out = {{"trial", r.trial}, {"kl12", r.kl12}, {"kl23", r.kl23}, {"kl13", r.kl13}};
    if (r.n1) out["n1"] = to_json(*r.n1);
    if (r.n3) out["n3"] = to_json(*r.n3);
    return out;
}

json to_json(const VerifyReport& r)
{
    return {{"seed", r.seed},
            {"dim", r.dim},
            {"trials", r.trials},
            {"budgets", to_json(r.budgets)},
            {"supremum", r.supremum},
            {"max_kl13", r.max_kl13},
            {"random_max_kl13", r.random_max_kl13},
            {"margin", r.margin},
            {"counterexample", r.counterexample()},
            {"constraint_residual_max", r.constraint_residual_max},
            {"affine_spot_check_residual", r.affine_spot_check_residual},
            {"worst_triple", to_json(r.worst_triple)}};
}

json to_json(const HScanReport& r)
{
    auto curve = [](const auto& pts) {
        json out = json::array();
        for (const auto& [x, y] : pts) out.push_back({x, y});
        return out;
    };
    return {{"budgets", to_json(r.budgets)},
            {"grid", r.grid},
            {"argmax", {r.argmax.first, r.argmax.second}},
            {"max_value", r.max_value},
            {"interior_intersections", r.interior_intersections},
            {"grid_coincident_cells", r.grid_coincident_cells},
            {"curve_x", curve(r.curve_x)},
            {"curve_y", curve(r.curve_y)}};
}

namespace {

std::vector<double> number_array(const json& node, const char* what)
{
    if (!node.is_array()) throw InvalidInput(std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : node) {
        if (!v.is_number()) throw InvalidInput(std::string(what) + " must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

Gaussiand gaussian_from_json(const json& doc)
{
    if (!doc.is_object() || !doc.contains("mean") || !doc.contains("cov")) {
        throw InvalidInput(R"(Gaussian must be an object with "mean" and "cov")");
    }
    const auto mean = number_array(doc["mean"], "mean");
    const auto n = static_cast<Eigen::Index>(mean.size());
    if (n < 1) throw InvalidInput("mean must not be empty");
    const auto& cov_node = doc["cov"];
    if (!cov_node.is_array() || static_cast<Eigen::Index>(cov_node.size()) != n) {
        throw InvalidInput("cov must be an n x n array matching the mean length");
    }
    Matrix<double> cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = number_array(cov_node[static_cast<std::size_t>(i)], "cov row");
        if (static_cast<Eigen::Index>(row.size()) != n) throw InvalidInput("cov must be square");
        for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = row[static_cast<std::size_t>(j)];
    }
    Vector<double> mu = Eigen::Map<const Vector<double>>(mean.data(), n);
    return Gaussiand(std::move(mu), SpdMatrixd(cov, 1e-9));
}

std::string format_full(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (res.ec != std::errc()) throw NumericalError("number formatting failed");
    return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int decimals)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    if (res.ec != std::errc()) throw NumericalError("number formatting failed");
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header)
    : out_(out)
{
    bool first = true;
    for (auto h : header) {
        if (!first) out_ << ',';
        first = false;
        out_ << h;
    }
    out_ << '\n';
}

void write_h_grid_csv(std::ostream& out, const HScanReport& report)
{
    CsvWriter csv(out, {"x", "y", "value"});
    const int g = report.grid;
    for (int i = 0; i < g; ++i) {
        const double x = 2.0 * i / (g - 1);
        for (int j = 0; j < g; ++j) {
            csv.row(x, 2.0 * j / (g - 1), report.values(i, j));
        }
    }
}

} // namespace klt
