#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gelunet/builders.hpp"
#include "gelunet/jet.hpp"
#include "gelunet/verify.hpp"

namespace gelunet {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct Expr {
    enum class Kind { constant, variable, add, sub, mul, div, int_pow, exp_neg };
    Kind kind = Kind::constant;
    double value = 0.0;       // constant
    std::string name;         // variable
    int var_index = -1;       // resolved by infer_ranges
    int exponent = 0;         // int_pow
    std::vector<std::unique_ptr<Expr>> children;
    int line = 1, column = 1;
    Interval range;
    bool range_set = false;
};

struct VariableDecl {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
};

// Recursive descent over: expr := term {(+|-) term}; term := unary {(*|/) unary};
// unary := - unary | factor; factor := base [^ integer];
// base := number | identifier | ( expr ) | exp ( expr ).
// Unary minus becomes sub(0, x); exp(E) becomes exp_neg(G) with E = -G.
std::unique_ptr<Expr> parse(const std::string& source);

std::string to_string(const Expr& e);

// Interval arithmetic over the tree; resolves variable indices against the
// declarations and enforces the division/exponential domain constraints.
void infer_ranges(Expr& e, const std::vector<VariableDecl>& vars);

// Closed-form partials of the expression itself (the verification oracle).
Jet expression_jet(const Expr& e, const std::vector<VariableDecl>& vars,
                   const std::vector<double>& x, int order);

struct CompileResult {
    Network network;
    BuildCertificate certificate;
    SobolevReport report;
};

// Bottom-up construction over the builders, uniform sibling budget split with
// bound-module amplification, then a measured verification pass over the
// declared box. Throws RefinementError when the measured error cannot be
// brought under eps.
CompileResult compile(const Expr& e, const std::vector<VariableDecl>& vars, double eps, int m,
                      const BudgetPolicy& policy = {});

}  // namespace gelunet
