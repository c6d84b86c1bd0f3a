#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gelunet/bounds.hpp"
#include "gelunet/compiler.hpp"
#include "gelunet/errors.hpp"

using namespace gelunet;

TEST_CASE("parser shapes") {
    CHECK(to_string(*parse("x*y + 1")) == "add(mul(x, y), 1)");
    CHECK(to_string(*parse("exp(-x)/y")) == "div(exp_neg(x), y)");
    CHECK(to_string(*parse("-x^2")) == "sub(0, pow(x, 2))");
    CHECK(to_string(*parse("x - y - z")) == "sub(sub(x, y), z)");
    CHECK(to_string(*parse("exp(x)")) == "exp_neg(sub(0, x))");
    CHECK(to_string(*parse("2*x + 1")) == "add(mul(2, x), 1)");
    CHECK(to_string(*parse("(x + y)^3")) == "pow(add(x, y), 3)");
}

TEST_CASE("syntax errors carry positions") {
    try {
        parse("x^^2");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.column == 3);
    }
    CHECK_THROWS_AS(parse("x +"), ParseError);
    CHECK_THROWS_AS(parse("(x"), ParseError);
    CHECK_THROWS_AS(parse("x^-2"), ParseError);
    CHECK_THROWS_AS(parse("x $ y"), ParseError);
    CHECK_THROWS_AS(parse("exp x"), ParseError);
}

TEST_CASE("unknown identifiers are rejected during inference") {
    auto ast = parse("x + q");
    std::vector<VariableDecl> vars{{"x", -1, 1}};
    CHECK_THROWS_AS(infer_ranges(*ast, vars), ParseError);
}

TEST_CASE("interval inference") {
    std::vector<VariableDecl> vars{{"x", -1, 1}};
    auto sq = parse("x^2");
    infer_ranges(*sq, vars);
    CHECK(sq->range.lo == 0.0);
    CHECK(sq->range.hi == 1.0);

    // exp(-(x+2)) with x in [0,1]: argument in [2,3], passes with A = 0
    std::vector<VariableDecl> vx{{"x", 0, 1}};
    auto ok = parse("exp(-(x+2))");
    infer_ranges(*ok, vx);
    CHECK(ok->range.hi <= std::exp(-2.0) * (1 + 1e-12));

    // exp(2x) on [0,1] has argument interval [-2, 0]: violates A <= 1
    auto bad = parse("exp(2*x)");
    CHECK_THROWS_AS(infer_ranges(*bad, vx), RangeError);

    // division by an interval containing zero is rejected with the constraint
    auto div = parse("1/y");
    std::vector<VariableDecl> vy{{"y", -1, 1}};
    try {
        infer_ranges(*div, vy);
        FAIL("expected a range violation");
    } catch (const RangeError& e) {
        std::string msg = e.what();
        CHECK(msg.find("N >= 3") != std::string::npos);
    }

    // a positive denominator passes and the quotient interval is sane
    std::vector<VariableDecl> vq{{"y", 0.25, 1.0}};
    auto good = parse("1/y");
    infer_ranges(*good, vq);
    CHECK(good->range.lo == doctest::Approx(1.0));
    CHECK(good->range.hi == doctest::Approx(4.0));

    // spanning more than 2^6 hits the desk guard
    std::vector<VariableDecl> vwide{{"y", 0.001, 1.0}};
    auto wide = parse("1/y");
    CHECK_THROWS_AS(infer_ranges(*wide, vwide), RangeError);
}

TEST_CASE("expression oracle differentiates the tree") {
    std::vector<VariableDecl> vars{{"x", 0, 1}};
    auto ast = parse("x^2 + exp(-x)");
    infer_ranges(*ast, vars);
    Jet j = expression_jet(*ast, vars, {0.5}, 3);
    double e = std::exp(-0.5);
    CHECK(j.partial({0}) == doctest::Approx(0.25 + e));
    CHECK(j.partial({1}) == doctest::Approx(1.0 - e));
    CHECK(j.partial({2}) == doctest::Approx(2.0 + e));
    CHECK(j.partial({3}) == doctest::Approx(-e));

    std::vector<VariableDecl> v2{{"x", -1, 1}, {"y", 0.25, 1}};
    auto q = parse("x/y");
    infer_ranges(*q, v2);
    Jet jq = expression_jet(*q, v2, {0.5, 0.5}, 2);
    CHECK(jq.partial({0, 0}) == doctest::Approx(1.0));
    CHECK(jq.partial({1, 0}) == doctest::Approx(2.0));
    CHECK(jq.partial({0, 1}) == doctest::Approx(-2.0));
    CHECK(jq.partial({1, 1}) == doctest::Approx(-4.0));
}

TEST_CASE("compile a bare variable exactly") {
    std::vector<VariableDecl> vars{{"x", -3, 3}};
    auto ast = parse("x");
    infer_ranges(*ast, vars);
    CompileResult r = compile(*ast, vars, 1e-2, 2);
    CHECK(r.report.pass);
    CHECK(r.report.overall == 0.0);
}

TEST_CASE("compile a product") {
    std::vector<VariableDecl> vars{{"x", -1, 1}, {"y", -1, 1}};
    auto ast = parse("x*y");
    infer_ranges(*ast, vars);
    CompileResult r = compile(*ast, vars, 1e-2, 2);
    CHECK(r.report.pass);
    CHECK(r.report.overall <= 1e-2 + r.report.noise_floor);
    CHECK(std::fabs(evaluate(r.network, {0.5, -0.5})[0] + 0.25) <= 1e-2);
}

TEST_CASE("compile the mixed polynomial-exponential expression") {
    std::vector<VariableDecl> vars{{"x", 0, 1}};
    auto ast = parse("x^2 + exp(-x)");
    infer_ranges(*ast, vars);
    CompileResult r = compile(*ast, vars, 5e-2, 3);
    CHECK(r.report.pass);
    CHECK(r.report.overall <= 5e-2 + r.report.noise_floor);
}

TEST_CASE("compilation is deterministic") {
    std::vector<VariableDecl> vars{{"x", -1, 1}, {"y", -1, 1}};
    auto ast = parse("x*y + x");
    infer_ranges(*ast, vars);
    CompileResult a = compile(*ast, vars, 2e-2, 2);
    CompileResult b = compile(*ast, vars, 2e-2, 2);
    CHECK(serialize(a.network) == serialize(b.network));
    CHECK(a.report.to_json() == b.report.to_json());
}

TEST_CASE("budget soundness on sampled expressions") {
    // For sampled two-child nodes: each child's realized error, pushed through
    // the product-bound amplification used by the allocator, stays below the
    // parent budget (= eps at the root).
    const int m = 2;
    const double eps = 2e-2;
    std::vector<VariableDecl> vars{{"x", -1, 1}, {"y", -1, 1}};
    const char* exprs[] = {"x*y", "x + y", "x*y + x", "(x + y)*y", "x^2 * y",
                           "x*x", "y^3 + x", "x - y*y", "(x*y)*y", "x^2 + y^2"};
    for (const char* src : exprs) {
        CAPTURE(src);
        auto ast = parse(src);
        infer_ranges(*ast, vars);
        CompileResult parent = compile(*ast, vars, eps, m);
        REQUIRE(parent.report.pass);
        if (ast->children.size() != 2) continue;
        double amp = 1.0;
        if (ast->kind == Expr::Kind::mul) {
            double C = 2.0;  // children live in [-1,1]-boxes, +1 allocator slack
            amp = std::min(64.0, product_bound(m, 1.0, C).value);
        }
        for (const auto& child : ast->children) {
            if (child->kind == Expr::Kind::constant) continue;
            CompileResult cr = compile(*child, vars, eps, m);
            double realized = cr.report.overall;
            CHECK(realized * amp * 2.0 <= eps);
        }
    }
}
