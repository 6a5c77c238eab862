#pragma once

// JSON and CSV encodings used by the command-line tool.
//
// Gaussian:  {"mean": [...], "cov": [[...], ...]}
// CSV:       header row, comma separated, LF endings, 17 significant digits.

#include <klt/bound.hpp>
#include <klt/extremal.hpp>
#include <klt/gaussian.hpp>
#include <klt/verify.hpp>

#include <json.hpp>

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace klt {

using json = nlohmann::json;

json to_json(const Matrix<double>& m);
json to_json(const Vector<double>& v);
json to_json(const Gaussiand& g);
json to_json(const BudgetPaird& b);
json to_json(const BoundReport<double>& r);
json to_json(const ExtremalTriple& t);
json to_json(const TrialRecord& r);
json to_json(const VerifyReport& r);
json to_json(const HScanReport& r);

/// Parses the Gaussian schema. Covariance asymmetry above 1e-9 (relative to
/// max(1, |cov|_max)) is rejected; smaller asymmetry is symmetrized away.
/// Throws InvalidInput on a malformed document and NotPositiveDefinite on a
/// covariance that fails Cholesky.
Gaussiand gaussian_from_json(const json& doc);

/// 17 significant digits, locale independent.
std::string format_full(double v);

/// Rounded to `decimals` places, fixed notation, locale independent.
std::string format_fixed(double v, int decimals);

class CsvWriter
{
public:
    CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header);

    template <class... Fields>
    void row(const Fields&... fields)
    {
        bool first = true;
        ((write_field(fields, first)), ...);
        out_ << '\n';
    }

private:
    template <class T>
    void write_field(const T& v, bool& first)
    {
        if (!first) out_ << ',';
        first = false;
        if constexpr (std::is_floating_point_v<T>) out_ << format_full(static_cast<double>(v));
        else out_ << v;
    }

    std::ostream& out_;
};

/// hscan grid: `x,y,value`, x-major.
void write_h_grid_csv(std::ostream& out, const HScanReport& report);

} // namespace klt
