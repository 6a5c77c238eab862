#include <klt/serialization.hpp>

#include <doctest.h>

#include <sstream>

using namespace klt;
using Mat = Matrix<double>;
using Vec = Vector<double>;

TEST_CASE("gaussian_from_json accepts the schema")
{
    const auto g = gaussian_from_json(json::parse(R"({"mean": [1, 2], "cov": [[2, 0.5], [0.5, 1]]})"));
    CHECK(g.dim() == 2);
    CHECK(g.mean()(1) == 2.0);
    CHECK(g.cov().matrix()(0, 1) == 0.5);

    // Asymmetry at round-off level is symmetrized.
    const auto h = gaussian_from_json(json::parse(R"({"mean": [0, 0], "cov": [[1, 1e-12], [0, 1]]})"));
    CHECK(h.cov().matrix()(0, 1) == h.cov().matrix()(1, 0));
}

TEST_CASE("gaussian_from_json rejects bad documents")
{
    CHECK_THROWS_AS(gaussian_from_json(json::parse(R"({"mean": [0, 0]})")), InvalidInput);
    CHECK_THROWS_AS(gaussian_from_json(json::parse(R"({"mean": [0], "cov": [[1, 0]]})")), InvalidInput);
    CHECK_THROWS_AS(gaussian_from_json(json::parse(R"({"mean": ["a"], "cov": [[1]]})")), InvalidInput);
    CHECK_THROWS_AS(gaussian_from_json(json::parse(R"({"mean": [0, 0], "cov": [[1, 0], [0]]})")), InvalidInput);
    CHECK_THROWS_AS(gaussian_from_json(json::parse(R"([1, 2])")), InvalidInput);
    CHECK_THROWS_AS(gaussian_from_json(json::parse(R"({"mean": [0, 0], "cov": [[1, 0]]})")), InvalidInput);
    CHECK_THROWS_AS(gaussian_from_json(json::parse(R"({"mean": [0, 0], "cov": [[1, 0.5], [0, 1]]})")), NotPositiveDefinite);
    CHECK_THROWS_AS(gaussian_from_json(json::parse(R"({"mean": [0, 0], "cov": [[1, 2], [2, 1]]})")), NotPositiveDefinite);
}

TEST_CASE("Gaussian JSON roundtrip is exact")
{
    Stream rng(1);
    for (int k = 0; k < 200; ++k) {
        const int n = 1 + k % 6;
        Vec mu(n);
        for (int i = 0; i < n; ++i) mu(i) = rng.normal() * std::pow(10.0, rng.uniform(-5, 5));
        const Gaussiand g(mu, random_spd(n, rng));
        const auto back = gaussian_from_json(json::parse(to_json(g).dump()));
        CHECK(back.mean() == g.mean());
        CHECK(back.cov().matrix() == g.cov().matrix());
    }
}

TEST_CASE("number formatting")
{
    CHECK(format_full(0.1) == "0.10000000000000001");
    CHECK(format_full(1.0) == "1");
    CHECK(std::stod(format_full(0.49818490463018123)) == 0.49818490463018123);
    CHECK(format_fixed(0.49818490463018123, 4) == "0.4982");
    CHECK(format_fixed(8.143359, 4) == "8.1434");
    CHECK(format_fixed(0.00408566, 4) == "0.0041");
}

TEST_CASE("CsvWriter")
{
    std::ostringstream out;
    CsvWriter w(out, {"a", "b", "c"});
    w.row(1, 0.1, std::string("x"));
    w.row(2, 1.0 / 3.0, "y");
    CHECK(out.str() == "a,b,c\n1,0.10000000000000001,x\n2,0.33333333333333331,y\n");
}

TEST_CASE("report JSON carries the documented fields")
{
    const auto t = construct_triple(Gaussiand::standard(2), BudgetPaird(0.1, 0.2), OrthogonalMatrixd::identity(2));
    const auto j = to_json(t);
    for (const char* key : {"n1", "n2", "n3", "q", "budgets", "achieved12", "achieved23", "achieved13"}) CHECK(j.contains(key));
    CHECK(j["budgets"]["delta2"] == 0.2);

    const auto v = to_json(verify_triangle(1, BudgetPaird(0.1, 0.1), 10, 3, {.threads = 1}));
    for (const char* key : {"seed", "dim", "trials", "budgets", "max_kl13", "supremum", "margin", "worst_triple",
                            "constraint_residual_max"})
        CHECK(v.contains(key));
    CHECK(v["worst_triple"].contains("n1"));

    const auto b = to_json(bound_report(BudgetPaird(0.1, 0.1)));
    CHECK(b["supremum"].get<double>() == supremum(0.1, 0.1));
}

TEST_CASE("H grid CSV")
{
    const auto r = scan_h(BudgetPaird(0.1, 0.1), 11, 1);
    std::ostringstream out;
    write_h_grid_csv(out, r);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,y,value");
    std::getline(in, line);
    CHECK(line == "0,0," + format_full(r.values(0, 0)));
    std::getline(in, line);
    CHECK(line.rfind("0,0.20000000000000001,", 0) == 0);
    int rows = 2;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 11 * 11);
}
