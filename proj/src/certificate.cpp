#include "gelunet/certificate.hpp"

#include <cmath>

#include <json.hpp>

#include "gelunet/errors.hpp"

namespace gelunet {

std::string target_name(Target t) {
    switch (t) {
        case Target::identity_shallow: return "identity_shallow";
        case Target::identity_deep: return "identity_deep";
        case Target::heaviside: return "heaviside";
        case Target::partition_of_unity: return "partition_of_unity";
        case Target::clip: return "clip";
        case Target::square: return "square";
        case Target::mul2: return "mul2";
        case Target::prod_d: return "prod_d";
        case Target::monomial: return "monomial";
        case Target::polynomial: return "polynomial";
        case Target::exp_neg: return "exp";
        case Target::reciprocal_naive: return "reciprocal_naive";
        case Target::reciprocal: return "reciprocal";
        case Target::division: return "division";
    }
    return "unknown";
}

Target target_from_name(const std::string& name) {
    static const std::map<std::string, Target> table = {
        {"identity_shallow", Target::identity_shallow},
        {"identity", Target::identity_shallow},
        {"identity_deep", Target::identity_deep},
        {"heaviside", Target::heaviside},
        {"partition_of_unity", Target::partition_of_unity},
        {"pou", Target::partition_of_unity},
        {"clip", Target::clip},
        {"square", Target::square},
        {"mul2", Target::mul2},
        {"prod_d", Target::prod_d},
        {"monomial", Target::monomial},
        {"polynomial", Target::polynomial},
        {"exp", Target::exp_neg},
        {"exp_neg", Target::exp_neg},
        {"reciprocal_naive", Target::reciprocal_naive},
        {"reciprocal", Target::reciprocal},
        {"division", Target::division},
    };
    auto it = table.find(name);
    if (it == table.end()) throw RequestError("unknown target '" + name + "'");
    return it->second;
}

void BudgetPolicy::validate() const {
    if (asymptotic_constant <= 0.0) throw RequestError("policy: asymptotic_constant must be positive");
    if (backoff_factor <= 0.0 || backoff_factor >= 1.0)
        throw RequestError("policy: backoff_factor must lie in (0,1)");
    if (max_refinements < 0) throw RequestError("policy: max_refinements must be >= 0");
}

void BuildRequest::validate() const {
    if (!(eps > 0.0 && eps < 1.0)) throw RequestError("request: eps must lie in (0,1)");
    if (eps < 1e-6)
        throw RequestError("request: eps below 1e-6 hits the double cancellation floor");
    if (order < 1) throw RequestError("request: order must be >= 1");
    switch (target) {
        case Target::identity_deep:
            if (depth < 2) throw RequestError("identity_deep: depth must be >= 2");
            if (scale < 1.0) throw RequestError("identity_deep: scale K must be >= 1");
            break;
        case Target::heaviside:
            if (!(kappa > 0.0 && kappa < 1.0)) throw RequestError("heaviside: kappa must lie in (0,1)");
            break;
        case Target::partition_of_unity:
            if (knots < 3) throw RequestError("partition_of_unity: N must be >= 3");
            break;
        case Target::clip:
            if (clip_a < 1.0) throw RequestError("clip: A must be >= 1");
            break;
        case Target::prod_d:
            if (dim < 2) throw RequestError("prod_d: d must be >= 2");
            if (dim > 8) throw RequestError("prod_d: desk guard d <= 8");
            if (order > 3) throw RequestError("prod_d: desk guard m <= 3");
            if (scale < 1.0) throw RequestError("prod_d: scale K must be >= 1");
            break;
        case Target::monomial: {
            if (multi.empty()) throw RequestError("monomial: empty exponent vector");
            int total = 0;
            for (int e : multi) {
                if (e < 0) throw RequestError("monomial: negative exponent");
                total += e;
            }
            if (total < 2) throw RequestError("monomial: total degree must be >= 2");
            if (scale < 1.0) throw RequestError("monomial: scale K must be >= 1");
            break;
        }
        case Target::polynomial: {
            if (order < 3) throw RequestError("polynomial: order must be >= 3");
            for (const auto& [k, a] : coefficients)
                if (std::fabs(a) > 1.0) throw RequestError("polynomial: |a_k| must be <= 1");
            for (size_t i = 0; i < coefficients.size(); ++i)
                for (size_t j = i + 1; j < coefficients.size(); ++j)
                    if (coefficients[i].first == coefficients[j].first)
                        throw RequestError("polynomial: duplicate multi-index");
            if (scale < 1.0) throw RequestError("polynomial: scale K must be >= 1");
            break;
        }
        case Target::exp_neg:
            if (!(exp_a >= 0.0 && exp_a <= 1.0)) throw RequestError("exp: A must lie in [0,1]");
            break;
        case Target::reciprocal_naive:
            if (!(rec_a > 0.0 && rec_a <= rec_b && rec_b <= 2.0))
                throw RequestError("reciprocal_naive: need 0 < a <= b <= 2");
            if (rec_b / rec_a < 1.25) throw RequestError("reciprocal_naive: need b/a >= 5/4");
            if (!(rec_a < 1.0)) throw RequestError("reciprocal_naive: need a < 1");
            if (order < 3) throw RequestError("reciprocal_naive: order must be >= 3");
            break;
        case Target::reciprocal:
        case Target::division:
            if (knots < 3) throw RequestError("reciprocal/division: N must be >= 3");
            if (knots > 6) throw RequestError("reciprocal/division: desk guard N <= 6");
            if (order < 3) throw RequestError("reciprocal/division: order must be >= 3");
            break;
        default:
            break;
    }
}

std::string BuildCertificate::to_json() const {
    nlohmann::json doc;
    doc["target"] = target_name(request.target);
    doc["eps"] = request.eps;
    doc["order"] = request.order;
    doc["sub_budgets"] = sub_budgets;
    nlohmann::json cfg;
    cfg["depth"] = config.depth;
    cfg["widths"] = config.widths;
    cfg["nonzeros"] = config.nonzeros;
    cfg["magnitude"] = config.magnitude;
    doc["config"] = std::move(cfg);
    doc["noise_floor"] = noise_floor;
    doc["global_bound"] = global_bound;
    doc["refinements_used"] = refinements_used;
    nlohmann::json sum;
    sum["verified"] = summary.verified;
    sum["pass"] = summary.pass;
    sum["measured_error"] = summary.measured_error;
    nlohmann::json checks = nlohmann::json::array();
    for (const CheckResult& c : summary.checks) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["pass"] = c.pass;
        jc["measured"] = c.measured;
        jc["allowed"] = c.allowed;
        checks.push_back(std::move(jc));
    }
    sum["checks"] = std::move(checks);
    doc["verification"] = std::move(sum);
    return doc.dump(2);
}

}  // namespace gelunet
