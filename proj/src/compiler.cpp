#include "gelunet/compiler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "gelunet/activation.hpp"
#include "gelunet/bounds.hpp"
#include "gelunet/errors.hpp"

namespace gelunet {

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum class Kind { number, identifier, op, end };
    Kind kind = Kind::end;
    double number = 0.0;
    std::string text;
    int line = 1, column = 1;
};

struct Lexer {
    const std::string& src;
    size_t pos = 0;
    int line = 1, column = 1;
    Token current;

    explicit Lexer(const std::string& s) : src(s) { advance(); }

    void bump(char c) {
        ++pos;
        if (c == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }

    void advance() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
            bump(src[pos]);
        Token t;
        t.line = line;
        t.column = column;
        if (pos >= src.size()) {
            t.kind = Token::Kind::end;
            current = t;
            return;
        }
        char c = src[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t start = pos;
            while (pos < src.size() &&
                   (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.' ||
                    src[pos] == 'e' || src[pos] == 'E' ||
                    ((src[pos] == '+' || src[pos] == '-') && pos > start &&
                     (src[pos - 1] == 'e' || src[pos - 1] == 'E'))))
                bump(src[pos]);
            t.kind = Token::Kind::number;
            t.text = src.substr(start, pos - start);
            try {
                t.number = std::stod(t.text);
            } catch (const std::exception&) {
                throw ParseError("malformed number '" + t.text + "'", t.line, t.column);
            }
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos;
            while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                                        src[pos] == '_'))
                bump(src[pos]);
            t.kind = Token::Kind::identifier;
            t.text = src.substr(start, pos - start);
        } else if (std::string("+-*/^()").find(c) != std::string::npos) {
            t.kind = Token::Kind::op;
            t.text = std::string(1, c);
            bump(c);
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", line, column);
        }
        current = t;
    }
};

std::unique_ptr<Expr> make_node(Expr::Kind kind, int line, int column) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->line = line;
    e->column = column;
    return e;
}

std::unique_ptr<Expr> make_constant(double v, int line, int column) {
    auto e = make_node(Expr::Kind::constant, line, column);
    e->value = v;
    return e;
}

struct Parser {
    Lexer lex;
    explicit Parser(const std::string& s) : lex(s) {}

    bool is_op(const char* s) const {
        return lex.current.kind == Token::Kind::op && lex.current.text == s;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw ParseError(what, lex.current.line, lex.current.column);
    }

    std::unique_ptr<Expr> parse_expr() {
        auto left = parse_term();
        while (is_op("+") || is_op("-")) {
            bool plus = lex.current.text == "+";
            int ln = lex.current.line, col = lex.current.column;
            lex.advance();
            auto right = parse_term();
            auto node = make_node(plus ? Expr::Kind::add : Expr::Kind::sub, ln, col);
            node->children.push_back(std::move(left));
            node->children.push_back(std::move(right));
            left = std::move(node);
        }
        return left;
    }

    std::unique_ptr<Expr> parse_term() {
        auto left = parse_unary();
        while (is_op("*") || is_op("/")) {
            bool mul = lex.current.text == "*";
            int ln = lex.current.line, col = lex.current.column;
            lex.advance();
            auto right = parse_unary();
            auto node = make_node(mul ? Expr::Kind::mul : Expr::Kind::div, ln, col);
            node->children.push_back(std::move(left));
            node->children.push_back(std::move(right));
            left = std::move(node);
        }
        return left;
    }

    std::unique_ptr<Expr> parse_unary() {
        if (is_op("-")) {
            int ln = lex.current.line, col = lex.current.column;
            lex.advance();
            auto inner = parse_unary();
            auto node = make_node(Expr::Kind::sub, ln, col);
            node->children.push_back(make_constant(0.0, ln, col));
            node->children.push_back(std::move(inner));
            return node;
        }
        return parse_factor();
    }

    std::unique_ptr<Expr> parse_factor() {
        auto base = parse_base();
        if (is_op("^")) {
            int ln = lex.current.line, col = lex.current.column;
            lex.advance();
            if (lex.current.kind != Token::Kind::number)
                fail("expected integer exponent after '^'");
            double v = lex.current.number;
            if (v != std::floor(v) || v < 0.0 || v > 1000.0)
                fail("exponent must be a nonnegative integer");
            lex.advance();
            auto node = make_node(Expr::Kind::int_pow, ln, col);
            node->exponent = static_cast<int>(v);
            node->children.push_back(std::move(base));
            return node;
        }
        return base;
    }

    std::unique_ptr<Expr> parse_base() {
        const Token t = lex.current;
        if (t.kind == Token::Kind::number) {
            lex.advance();
            return make_constant(t.number, t.line, t.column);
        }
        if (t.kind == Token::Kind::identifier) {
            lex.advance();
            if (t.text == "exp") {
                if (!is_op("(")) fail("expected '(' after exp");
                lex.advance();
                auto arg = parse_expr();
                if (!is_op(")")) fail("expected ')'");
                lex.advance();
                // exp(E) is realized as e^{-G}; strip a leading unary minus
                auto node = make_node(Expr::Kind::exp_neg, t.line, t.column);
                if (arg->kind == Expr::Kind::sub && arg->children[0]->kind == Expr::Kind::constant &&
                    arg->children[0]->value == 0.0) {
                    node->children.push_back(std::move(arg->children[1]));
                } else {
                    auto neg = make_node(Expr::Kind::sub, t.line, t.column);
                    neg->children.push_back(make_constant(0.0, t.line, t.column));
                    neg->children.push_back(std::move(arg));
                    node->children.push_back(std::move(neg));
                }
                return node;
            }
            auto node = make_node(Expr::Kind::variable, t.line, t.column);
            node->name = t.text;
            return node;
        }
        if (t.kind == Token::Kind::op && t.text == "(") {
            lex.advance();
            auto inner = parse_expr();
            if (!is_op(")")) fail("expected ')'");
            lex.advance();
            return inner;
        }
        fail("expected a number, identifier or '('");
    }
};

}  // namespace

std::unique_ptr<Expr> parse(const std::string& source) {
    Parser p(source);
    auto e = p.parse_expr();
    if (p.lex.current.kind != Token::Kind::end)
        throw ParseError("unexpected trailing input '" + p.lex.current.text + "'",
                         p.lex.current.line, p.lex.current.column);
    return e;
}

std::string to_string(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::constant: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%g", e.value);
            return buf;
        }
        case Expr::Kind::variable: return e.name;
        case Expr::Kind::add: return "add(" + to_string(*e.children[0]) + ", " + to_string(*e.children[1]) + ")";
        case Expr::Kind::sub: return "sub(" + to_string(*e.children[0]) + ", " + to_string(*e.children[1]) + ")";
        case Expr::Kind::mul: return "mul(" + to_string(*e.children[0]) + ", " + to_string(*e.children[1]) + ")";
        case Expr::Kind::div: return "div(" + to_string(*e.children[0]) + ", " + to_string(*e.children[1]) + ")";
        case Expr::Kind::int_pow:
            return "pow(" + to_string(*e.children[0]) + ", " + std::to_string(e.exponent) + ")";
        case Expr::Kind::exp_neg: return "exp_neg(" + to_string(*e.children[0]) + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Interval inference
// ---------------------------------------------------------------------------

namespace {

Interval iv(double lo, double hi) { return Interval{lo, hi}; }

Interval iv_mul(Interval a, Interval b) {
    double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return iv(*std::min_element(c, c + 4), *std::max_element(c, c + 4));
}

Interval iv_pow(Interval a, int e) {
    if (e == 0) return iv(1.0, 1.0);
    if (e % 2 == 1) return iv(std::pow(a.lo, e), std::pow(a.hi, e));
    double lo = (a.lo <= 0.0 && a.hi >= 0.0) ? 0.0
                                             : std::pow(std::min(std::fabs(a.lo), std::fabs(a.hi)), e);
    double hi = std::pow(std::max(std::fabs(a.lo), std::fabs(a.hi)), e);
    return iv(lo, hi);
}

std::string iv_str(Interval a) {
    return "[" + std::to_string(a.lo) + ", " + std::to_string(a.hi) + "]";
}

int division_knots(Interval den, const Expr& node) {
    if (den.lo <= 0.0)
        throw RangeError("division at " + std::to_string(node.line) + ":" +
                         std::to_string(node.column) + ": denominator interval " + iv_str(den) +
                         " must be positive; the construction requires y in [2^-N, 1] with N >= 3");
    double ratio = den.hi / den.lo;
    int N = std::max(3, static_cast<int>(std::ceil(std::log2(ratio))));
    if (N > 6)
        throw RangeError("division at " + std::to_string(node.line) + ":" +
                         std::to_string(node.column) + ": denominator range " + iv_str(den) +
                         " spans more than 2^6; desk guard requires N <= 6");
    return N;
}

}  // namespace

void infer_ranges(Expr& e, const std::vector<VariableDecl>& vars) {
    for (auto& c : e.children) infer_ranges(*c, vars);
    switch (e.kind) {
        case Expr::Kind::constant:
            e.range = iv(e.value, e.value);
            break;
        case Expr::Kind::variable: {
            e.var_index = -1;
            for (size_t i = 0; i < vars.size(); ++i)
                if (vars[i].name == e.name) e.var_index = static_cast<int>(i);
            if (e.var_index < 0)
                throw ParseError("unknown identifier '" + e.name + "'", e.line, e.column);
            e.range = iv(vars[e.var_index].lo, vars[e.var_index].hi);
            break;
        }
        case Expr::Kind::add:
            e.range = iv(e.children[0]->range.lo + e.children[1]->range.lo,
                         e.children[0]->range.hi + e.children[1]->range.hi);
            break;
        case Expr::Kind::sub:
            e.range = iv(e.children[0]->range.lo - e.children[1]->range.hi,
                         e.children[0]->range.hi - e.children[1]->range.lo);
            break;
        case Expr::Kind::mul:
            e.range = iv_mul(e.children[0]->range, e.children[1]->range);
            break;
        case Expr::Kind::div: {
            Interval den = e.children[1]->range;
            division_knots(den, e);  // validates
            e.range = iv_mul(e.children[0]->range, iv(1.0 / den.hi, 1.0 / den.lo));
            break;
        }
        case Expr::Kind::int_pow:
            e.range = iv_pow(e.children[0]->range, e.exponent);
            break;
        case Expr::Kind::exp_neg: {
            Interval g = e.children[0]->range;
            if (g.lo < -1.0)
                throw RangeError("exp at " + std::to_string(e.line) + ":" +
                                 std::to_string(e.column) + ": argument interval " + iv_str(g) +
                                 " must lie in [-A, inf) with A <= 1");
            e.range = iv(std::exp(-g.hi), std::exp(-g.lo));
            break;
        }
    }
    e.range_set = true;
}

// ---------------------------------------------------------------------------
// Expression oracle
// ---------------------------------------------------------------------------

namespace {

Jet expr_jet(const Expr& e, std::shared_ptr<const JetSpace> sp, const std::vector<double>& x) {
    switch (e.kind) {
        case Expr::Kind::constant: return jet_constant(sp, e.value);
        case Expr::Kind::variable: return jet_variable(sp, e.var_index, x[e.var_index]);
        case Expr::Kind::add:
            return jet_add(expr_jet(*e.children[0], sp, x), expr_jet(*e.children[1], sp, x));
        case Expr::Kind::sub:
            return jet_sub(expr_jet(*e.children[0], sp, x), expr_jet(*e.children[1], sp, x));
        case Expr::Kind::mul:
            return jet_multiply(expr_jet(*e.children[0], sp, x), expr_jet(*e.children[1], sp, x));
        case Expr::Kind::div: {
            Jet num = expr_jet(*e.children[0], sp, x);
            Jet den = expr_jet(*e.children[1], sp, x);
            double y0 = den.value();
            std::vector<double> derivs(sp->order() + 1);
            for (int j = 0; j <= sp->order(); ++j)
                derivs[j] = (j % 2 == 0 ? 1.0 : -1.0) * factorial(j) / std::pow(y0, j + 1);
            return jet_multiply(num, jet_compose_series(den, derivs));
        }
        case Expr::Kind::int_pow: {
            Jet base = expr_jet(*e.children[0], sp, x);
            Jet acc = jet_constant(sp, 1.0);
            for (int j = 0; j < e.exponent; ++j) acc = jet_multiply(acc, base);
            return acc;
        }
        case Expr::Kind::exp_neg: {
            Jet u = expr_jet(*e.children[0], sp, x);
            double v = std::exp(-u.value());
            std::vector<double> derivs(sp->order() + 1);
            for (int j = 0; j <= sp->order(); ++j) derivs[j] = (j % 2 == 0 ? v : -v);
            return jet_compose_series(u, derivs);
        }
    }
    throw RequestError("expression_jet: unknown node");
}

}  // namespace

Jet expression_jet(const Expr& e, const std::vector<VariableDecl>& vars,
                   const std::vector<double>& x, int order) {
    auto sp = JetSpace::make(static_cast<int>(vars.size()), order);
    return expr_jet(e, sp, x);
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

namespace {

constexpr double kAmpCap = 64.0;
constexpr double kShareFloor = 1e-12;

double mag(Interval a) { return std::max({1.0, std::fabs(a.lo), std::fabs(a.hi)}); }

struct Compiler {
    const std::vector<VariableDecl>& vars;
    int I;
    int m;
    const BudgetPolicy& policy;
    std::map<std::string, double>* budgets;
    int counter = 0;

    double share(double budget, int pieces, double amp) {
        return std::max(budget / (pieces * std::min(amp, kAmpCap)), kShareFloor);
    }

    void note(const std::string& kind, double value) {
        (*budgets)["node_" + std::to_string(counter++) + "_" + kind] = value;
    }

    Network selector(int i) const {
        Layer l = Layer::zeros(1, I);
        l.at(0, i) = 1.0;
        return Network::affine(std::move(l));
    }

    Network constant_net(double v) const {
        Layer l = Layer::zeros(1, I);
        l.shift[0] = -v;
        return Network::affine(std::move(l));
    }

    void equalize_pair(Network& a, Network& b, double eps_id, double sa, double sb) {
        int target = std::max(a.depth(), b.depth());
        a = equalize_depth(a, target, m, eps_id, sa);
        b = equalize_depth(b, target, m, eps_id, sb);
    }

    Network compile_node(const Expr& e, double budget) {
        note("budget", budget);
        switch (e.kind) {
            case Expr::Kind::constant:
                return constant_net(e.value);
            case Expr::Kind::variable:
                return selector(e.var_index);
            case Expr::Kind::add:
            case Expr::Kind::sub: {
                Network a = compile_node(*e.children[0], share(budget, 2, 1.0));
                Network b = compile_node(*e.children[1], share(budget, 2, 1.0));
                equalize_pair(a, b, budget / 16.0, mag(e.children[0]->range) + 1.0,
                              mag(e.children[1]->range) + 1.0);
                return weighted_sum({a, b}, {1.0, e.kind == Expr::Kind::add ? 1.0 : -1.0}, true);
            }
            case Expr::Kind::mul: {
                double Ca = mag(e.children[0]->range), Cb = mag(e.children[1]->range);
                double C = std::max(Ca, Cb) + 1.0;
                double amp = product_bound(m, 1.0, C).value;
                Network a = compile_node(*e.children[0], share(budget, 2, amp));
                Network b = compile_node(*e.children[1], share(budget, 2, amp));
                // clipped children keep the multiplication inputs inside the
                // simultaneity box
                double eps_clip = std::max(budget / (8.0 * C * C * C), kShareFloor);
                Network ca = compose(build_clip_net_for_compile(eps_clip, std::ceil(Ca)), a);
                Network cb = compose(build_clip_net_for_compile(eps_clip, std::ceil(Cb)), b);
                equalize_pair(ca, cb, budget / 16.0, Ca + 1.0, Cb + 1.0);
                double eps_mul = std::max(budget / (4.0 * C * C * C), kShareFloor);
                note("eps_mul", eps_mul);
                Network pair = parallel({ca, cb}, true);
                return compose(internal_mul2(eps_mul), pair);
            }
            case Expr::Kind::div: {
                Interval den = e.children[1]->range;
                int N = division_knots(den, e);
                double nm = mag(e.children[0]->range);
                double hi = den.hi;
                double out_scale = nm / hi * std::pow(2.0, N);  // worst output magnitude
                double amp = std::min(kAmpCap, out_scale);
                Network a = compile_node(*e.children[0], share(budget, 2, amp));
                Network b = compile_node(*e.children[1], share(budget, 2, amp));
                scale_last(a, 1.0 / nm);
                scale_last(b, 1.0 / hi);
                double eps_div = std::clamp(budget * hi / nm / 2.0, 1e-6, 0.4);
                note("eps_div", eps_div);
                BuildResult div = build_division(eps_div, m, N, policy);
                equalize_pair(a, b, budget / 16.0, 1.0, 1.0);
                Network pair = parallel({a, b}, true);
                Network out = compose(div.network, pair);
                scale_last(out, nm / hi);
                return out;
            }
            case Expr::Kind::int_pow: {
                if (e.exponent == 0) return constant_net(1.0);
                if (e.exponent == 1) return compile_node(*e.children[0], budget);
                double C = mag(e.children[0]->range);
                double amp = std::min(kAmpCap, e.exponent * std::pow(C, e.exponent - 1) *
                                                   std::pow(2.0, m));
                double eps_pow = std::max(budget / 2.0, kShareFloor);
                note("eps_pow", eps_pow);
                if (e.children[0]->kind == Expr::Kind::variable) {
                    std::vector<int> k(I, 0);
                    k[e.children[0]->var_index] = e.exponent;
                    return internal_monomial(k, std::ceil(C), eps_pow);
                }
                Network child = compile_node(*e.children[0], share(budget, 1, amp));
                Network pow = internal_power(e.exponent, std::ceil(C), eps_pow);
                return compose(pow, child);
            }
            case Expr::Kind::exp_neg: {
                Interval g = e.children[0]->range;
                double A = std::min(1.0, std::max(0.0, -g.lo));
                double amp = std::min(kAmpCap, std::exp(A) * std::pow(2.0, m));
                Network child = compile_node(*e.children[0], share(budget, 1, amp));
                double eps_exp = std::clamp(budget / 2.0, 1e-6, 0.4);
                note("eps_exp", eps_exp);
                BuildResult ex = build_exp(eps_exp, m, A, policy);
                return compose(ex.network, child);
            }
        }
        throw RequestError("compile: unknown node");
    }

    // Internal pieces shared with the builders; declared below.
    static Network build_clip_net_for_compile(double eps, double A);
    static Network internal_mul2(double eps);
    Network internal_monomial(const std::vector<int>& k, double K, double eps) const;
    Network internal_power(int j, double K, double eps) const;
    static void scale_last(Network& n, double s);
};

Network Compiler::build_clip_net_for_compile(double eps, double A) {
    BuildResult r = build_clip(std::clamp(eps, 1e-6, 0.5), 3, std::max(1.0, A));
    return r.network;
}

Network Compiler::internal_mul2(double eps) {
    BuildResult r = build_mul2(std::clamp(eps, 1e-6, 0.5), 3);
    return r.network;
}

Network Compiler::internal_monomial(const std::vector<int>& k, double K, double eps) const {
    BuildResult r = build_monomial(std::clamp(eps, 1e-6, 0.5), m, k, std::max(1.0, K), policy);
    return r.network;
}

Network Compiler::internal_power(int j, double K, double eps) const {
    BuildResult r = build_monomial(std::clamp(eps, 1e-6, 0.5), m, {j}, std::max(1.0, K), policy);
    return r.network;
}

void Compiler::scale_last(Network& n, double s) {
    Layer& l = n.layers.back();
    for (double& w : l.weight) w *= s;
    for (double& b : l.shift) b *= s;
}

}  // namespace

CompileResult compile(const Expr& e, const std::vector<VariableDecl>& vars, double eps, int m,
                      const BudgetPolicy& policy) {
    if (!(eps > 0.0 && eps < 1.0)) throw RequestError("compile: eps must lie in (0,1)");
    if (m < 1) throw RequestError("compile: order must be >= 1");
    if (vars.empty()) throw RequestError("compile: at least one variable must be declared");
    if (!e.range_set) throw RequestError("compile: run infer_ranges first");
    policy.validate();

    Oracle oracle;
    oracle.kind = Oracle::Kind::expression;
    const Expr* root = &e;
    oracle.jet_fn = [root, &vars](const std::vector<double>& x, int order) {
        return expression_jet(*root, vars, x, order);
    };
    GridSpec grid;
    for (const VariableDecl& v : vars) grid.intervals.emplace_back(v.lo, v.hi);
    grid.points_per_dim = vars.size() == 1 ? 512 : (vars.size() == 2 ? 32 : 8);

    std::map<std::string, double> budgets;
    CompileResult result;
    double budget = eps;
    for (int round = 0; round <= policy.max_refinements; ++round) {
        budgets.clear();
        Compiler c{vars, static_cast<int>(vars.size()), m, policy, &budgets};
        Network net = c.compile_node(e, budget);
        double floor = estimate_noise_floor(net, 8.0);
        SobolevReport rep = sobolev_error(net, oracle, grid, m, eps, floor);
        rep.target = "expression";
        result.certificate.request.eps = eps;
        result.certificate.request.order = m;
        result.certificate.sub_budgets = budgets;
        result.certificate.config = audit(net);
        result.certificate.noise_floor = floor;
        result.certificate.refinements_used = round;
        result.certificate.summary.verified = true;
        result.certificate.summary.pass = rep.pass;
        result.certificate.summary.measured_error = rep.overall;
        result.network = std::move(net);
        result.report = std::move(rep);
        if (result.report.pass) return result;
        budget *= policy.backoff_factor;
    }
    throw RefinementError("compile: measured error " +
                              std::to_string(result.report.overall) + " exceeds eps after refinements",
                          result.report.overall);
}

}  // namespace gelunet
