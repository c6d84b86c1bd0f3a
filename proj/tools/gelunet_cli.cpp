// Command-line front end: synthesize, verify, audit, and compile certified
// GELU approximator networks.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gelunet/builders.hpp"
#include "gelunet/compiler.hpp"
#include "gelunet/errors.hpp"
#include "gelunet/verify.hpp"

using namespace gelunet;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitMeasuredFail = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << text;
}

std::vector<std::pair<double, double>> parse_domain(const std::string& text) {
    // lo:hi[,lo:hi...]
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto colon = part.find(':');
        if (colon == std::string::npos) throw FormatError("domain must be lo:hi[,lo:hi...]");
        out.emplace_back(std::stod(part.substr(0, colon)), std::stod(part.substr(colon + 1)));
    }
    if (out.empty()) throw FormatError("empty domain");
    return out;
}

std::vector<int> parse_multi(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(std::stoi(part));
    return out;
}

VariableDecl parse_var(const std::string& text) {
    auto eq = text.find('=');
    auto colon = text.find(':', eq);
    if (eq == std::string::npos || colon == std::string::npos)
        throw FormatError("variable declaration must be name=lo:hi");
    VariableDecl v;
    v.name = text.substr(0, eq);
    v.lo = std::stod(text.substr(eq + 1, colon - eq - 1));
    v.hi = std::stod(text.substr(colon + 1));
    if (!(v.lo < v.hi)) throw FormatError("variable '" + v.name + "': need lo < hi");
    return v;
}

std::vector<std::pair<std::vector<int>, double>> load_coeffs(const std::string& path) {
    // JSON: [{"k": [..], "a": num}, ...]
    nlohmann::json doc = nlohmann::json::parse(read_file(path));
    std::vector<std::pair<std::vector<int>, double>> out;
    for (const auto& t : doc)
        out.emplace_back(t.at("k").get<std::vector<int>>(), t.at("a").get<double>());
    return out;
}

Oracle oracle_for(Target t, const BuildRequest& rq) {
    Oracle o;
    switch (t) {
        case Target::identity_shallow:
        case Target::identity_deep: o.kind = Oracle::Kind::identity; break;
        case Target::square: o.kind = Oracle::Kind::square; break;
        case Target::mul2:
        case Target::prod_d: o.kind = Oracle::Kind::product; break;
        case Target::monomial:
            o.kind = Oracle::Kind::monomial;
            o.multi = rq.multi;
            break;
        case Target::polynomial:
            o.kind = Oracle::Kind::polynomial;
            o.terms = rq.coefficients;
            break;
        case Target::exp_neg: o.kind = Oracle::Kind::exp_neg; break;
        case Target::reciprocal_naive:
        case Target::reciprocal: o.kind = Oracle::Kind::reciprocal; break;
        case Target::division: o.kind = Oracle::Kind::division; break;
        case Target::heaviside:
            o.kind = Oracle::Kind::heaviside_tails;
            o.param = rq.kappa;
            break;
        case Target::clip:
            o.kind = Oracle::Kind::clip_reference;
            o.param = rq.clip_a;
            break;
        default: throw RequestError("no oracle for this target");
    }
    return o;
}

int run(int argc, char** argv) {
    CLI::App app{"construct and certify GELU approximator networks"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "build a network for a named target");
    std::string target_str, out_path = "network.json";
    BuildRequest rq;
    BudgetPolicy policy;
    double eps = 1e-3;
    int order = 3;
    int seed = 0;
    synth->add_option("--target", target_str, "target name")->required();
    synth->add_option("--eps", eps, "accuracy parameter in (0,1)")->required();
    synth->add_option("--order", order, "Sobolev order m");
    synth->add_option("--out", out_path, "output network file");
    synth->add_option("--dim", rq.dim, "d for prod_d");
    synth->add_option("--scale", rq.scale, "domain scale K");
    synth->add_option("--clip-A", rq.clip_a, "clip half-width A");
    synth->add_option("--N", rq.knots, "dyadic knot count N");
    synth->add_option("--depth", rq.depth, "depth L for identity_deep");
    synth->add_option("--kappa", rq.kappa, "heaviside transition half-width");
    synth->add_option("--a", rq.rec_a, "reciprocal_naive left endpoint");
    synth->add_option("--b", rq.rec_b, "reciprocal_naive right endpoint");
    synth->add_option("--A", rq.exp_a, "exp left endpoint A in [0,1]");
    std::string multi_str, coeffs_path;
    synth->add_option("--multi", multi_str, "monomial exponents k1,k2,...");
    synth->add_option("--coeffs", coeffs_path, "polynomial coefficient file (JSON)");
    synth->add_option("--constant", policy.asymptotic_constant, "asymptotic constant");
    synth->add_option("--backoff", policy.backoff_factor, "refinement backoff factor");
    synth->add_option("--max-refinements", policy.max_refinements, "refinement cap");
    synth->add_option("--seed", seed, "probe seed (recorded in outputs)");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "measure a network against an oracle");
    std::string net_path, domain_str, expr_str, report_path;
    int grid_points = 0;
    std::vector<std::string> var_strs;
    verify->add_option("--net", net_path, "network file")->required();
    verify->add_option("--target", target_str, "oracle target name");
    verify->add_option("--expr", expr_str, "expression oracle");
    verify->add_option("--var", var_strs, "variable declaration name=lo:hi (for --expr)");
    verify->add_option("--domain", domain_str, "verification box lo:hi[,lo:hi...]");
    verify->add_option("--order", order, "Sobolev order m");
    verify->add_option("--eps", eps, "pass threshold");
    verify->add_option("--grid", grid_points, "points per dimension");
    std::string probes_str;
    verify->add_option("--probes", probes_str, "far-field probe points p1,p2;q1,q2;...");
    verify->add_option("--out", report_path, "report file (default: stdout)");
    verify->add_option("--multi", multi_str, "monomial exponents for the oracle");
    verify->add_option("--coeffs", coeffs_path, "polynomial coefficients for the oracle");
    verify->add_option("--kappa", rq.kappa, "heaviside oracle parameter");
    verify->add_option("--clip-A", rq.clip_a, "clip oracle parameter");
    verify->add_option("--N", rq.knots, "knot count (reciprocal/division oracle note)");
    verify->add_option("--seed", seed, "probe seed");

    // ---- audit ----
    auto* audit_cmd = app.add_subcommand("audit", "print a network's configuration");
    audit_cmd->add_option("--net", net_path, "network file")->required();

    // ---- compile ----
    auto* compile_cmd = app.add_subcommand("compile", "compile an arithmetic expression");
    compile_cmd->add_option("--expr", expr_str, "expression source")->required();
    compile_cmd->add_option("--var", var_strs, "variable declaration name=lo:hi")->required();
    compile_cmd->add_option("--eps", eps, "accuracy parameter")->required();
    compile_cmd->add_option("--order", order, "Sobolev order m");
    compile_cmd->add_option("--out", out_path, "output network file");
    compile_cmd->add_option("--constant", policy.asymptotic_constant, "asymptotic constant");
    compile_cmd->add_option("--seed", seed, "probe seed");

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        rq.target = target_from_name(target_str);
        rq.eps = eps;
        rq.order = order;
        if (!multi_str.empty()) rq.multi = parse_multi(multi_str);
        if (!coeffs_path.empty()) rq.coefficients = load_coeffs(coeffs_path);
        NetworkMeta meta;
        meta.target = target_name(rq.target);
        meta.eps = eps;
        meta.order = order;
        if (rq.target == Target::partition_of_unity) {
            PartitionBuildResult r = build_partition_of_unity(eps, order, rq.knots, policy);
            for (size_t i = 0; i < r.networks.size(); ++i) {
                std::string path = out_path + "." + std::to_string(i + 1) + ".json";
                write_file(path, serialize(r.networks[i], meta));
                std::cout << "wrote " << path << "\n";
            }
            write_file(out_path + ".cert.json", r.certificate.to_json());
            std::cout << "wrote " << out_path << ".cert.json\n";
            return r.certificate.summary.pass ? kExitPass : kExitMeasuredFail;
        }
        BuildResult r = build(rq, policy);
        write_file(out_path, serialize(r.network, meta));
        write_file(out_path + ".cert.json", r.certificate.to_json());
        std::cout << "wrote " << out_path << " and " << out_path << ".cert.json\n"
                  << "measured error " << r.certificate.summary.measured_error << " (eps " << eps
                  << ", " << r.certificate.refinements_used << " refinements, seed " << seed
                  << ")\n";
        return r.certificate.summary.pass ? kExitPass : kExitMeasuredFail;
    }

    if (verify->parsed()) {
        Network net = deserialize(read_file(net_path));
        GridSpec grid;
        if (domain_str.empty()) throw FormatError("--domain is required for verify");
        grid.intervals = parse_domain(domain_str);
        grid.points_per_dim = grid_points > 0 ? grid_points
                                              : (grid.intervals.size() == 1 ? 1024 : 32);
        Oracle oracle;
        std::vector<VariableDecl> vars;
        std::unique_ptr<Expr> ast;
        if (!expr_str.empty()) {
            for (const auto& s : var_strs) vars.push_back(parse_var(s));
            ast = parse(expr_str);
            infer_ranges(*ast, vars);
            oracle.kind = Oracle::Kind::expression;
            Expr* root = ast.get();
            auto vars_copy = vars;
            oracle.jet_fn = [root, vars_copy](const std::vector<double>& x, int o) {
                return expression_jet(*root, vars_copy, x, o);
            };
        } else if (!target_str.empty()) {
            rq.target = target_from_name(target_str);
            if (!multi_str.empty()) rq.multi = parse_multi(multi_str);
            if (!coeffs_path.empty()) rq.coefficients = load_coeffs(coeffs_path);
            oracle = oracle_for(rq.target, rq);
        } else {
            throw FormatError("verify needs --target or --expr");
        }
        SobolevReport rep =
            sobolev_error(net, oracle, grid, order, eps, estimate_noise_floor(net, 8.0));
        rep.target = expr_str.empty() ? target_str : expr_str;
        if (!probes_str.empty()) {
            std::stringstream ss(probes_str);
            std::string point;
            while (std::getline(ss, point, ';')) {
                std::vector<double> p;
                std::stringstream ps(point);
                std::string coord;
                while (std::getline(ps, coord, ',')) p.push_back(std::stod(coord));
                auto v = evaluate(net, p);
                bool finite = true;
                for (double c : v) finite &= std::isfinite(c);
                std::cout << "probe " << point << " -> " << v[0]
                          << (finite ? "" : " (NOT FINITE)") << "\n";
                if (!finite) rep.pass = false;
            }
        }
        if (report_path.empty())
            std::cout << rep.to_json() << "\n";
        else
            write_file(report_path, rep.to_json());
        std::cout << (rep.pass ? "pass" : "FAIL") << ": overall " << rep.overall << " vs eps "
                  << eps << " + floor " << rep.noise_floor << " (seed " << seed << ")\n";
        return rep.pass ? kExitPass : kExitMeasuredFail;
    }

    if (audit_cmd->parsed()) {
        Network net = deserialize(read_file(net_path));
        NetworkConfig cfg = gelunet::audit(net);
        std::cout << "depth L = " << cfg.depth << "\nwidths =";
        for (int w : cfg.widths) std::cout << " " << w;
        std::cout << "\nmax width = " << cfg.max_width() << "\nnonzeros S = " << cfg.nonzeros
                  << "\nmagnitude B = " << cfg.magnitude << "\n";
        return kExitPass;
    }

    if (compile_cmd->parsed()) {
        std::vector<VariableDecl> vars;
        for (const auto& s : var_strs) vars.push_back(parse_var(s));
        std::unique_ptr<Expr> ast = parse(expr_str);
        infer_ranges(*ast, vars);
        CompileResult r = compile(*ast, vars, eps, order, policy);
        NetworkMeta meta;
        meta.target = expr_str;
        meta.eps = eps;
        meta.order = order;
        write_file(out_path, serialize(r.network, meta));
        write_file(out_path + ".report.json", r.report.to_json());
        std::cout << "wrote " << out_path << " and " << out_path << ".report.json\n"
                  << "ast: " << to_string(*ast) << "\n"
                  << (r.report.pass ? "pass" : "FAIL") << ": measured " << r.report.overall
                  << " vs eps " << eps << " (seed " << seed << ")\n";
        return r.report.pass ? kExitPass : kExitMeasuredFail;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ParseError& e) {
        std::cerr << "syntax error at " << e.line << ":" << e.column << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const RangeError& e) {
        std::cerr << "range violation: " << e.what() << "\n";
        return kExitUsage;
    } catch (const RequestError& e) {
        std::cerr << "invalid request: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const RefinementError& e) {
        std::cerr << "measured failure: " << e.what() << "\n";
        return kExitMeasuredFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
