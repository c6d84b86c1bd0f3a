#include "gelunet/verify.hpp"

#include <algorithm>
#include <cfloat>
#include <cstdio>
#include <cmath>
#include <random>
#include <thread>

#include <json.hpp>

#include "gelunet/activation.hpp"
#include "gelunet/errors.hpp"

namespace gelunet {

namespace {

double falling_factorial(int a, int k) {
    double acc = 1.0;
    for (int j = 0; j < k; ++j) acc *= (a - j);
    return acc;
}

double int_pow(double x, int e) {
    double acc = 1.0;
    for (int j = 0; j < e; ++j) acc *= x;
    return acc;
}

double monomial_partial(const std::vector<double>& x, const std::vector<int>& exps,
                        const MultiIndex& k) {
    double acc = 1.0;
    for (size_t i = 0; i < exps.size(); ++i) {
        int ki = i < k.size() ? k[i] : 0;
        if (ki > exps[i]) return 0.0;
        acc *= falling_factorial(exps[i], ki) * int_pow(x[i], exps[i] - ki);
    }
    return acc;
}

int total_degree(const MultiIndex& k) {
    int d = 0;
    for (int v : k) d += v;
    return d;
}

}  // namespace

int Oracle::dimension() const {
    switch (kind) {
        case Kind::identity: return -1;
        case Kind::square: return 1;
        case Kind::product: return -1;
        case Kind::monomial: return static_cast<int>(multi.size());
        case Kind::polynomial: return terms.empty() ? -1 : static_cast<int>(terms.front().first.size());
        case Kind::exp_neg: return 1;
        case Kind::reciprocal: return 1;
        case Kind::division: return 2;
        case Kind::heaviside_tails: return 1;
        case Kind::clip_reference: return 1;
        case Kind::expression: return -1;
    }
    return -1;
}

double Oracle::partial(const std::vector<double>& x, const MultiIndex& k) const {
    const int deg = total_degree(k);
    switch (kind) {
        case Kind::identity:
            if (deg == 0) return x[0];
            return (deg == 1 && k[0] == 1) ? 1.0 : 0.0;
        case Kind::square:
            if (deg == 0) return x[0] * x[0];
            if (deg == 1) return 2.0 * x[0];
            if (deg == 2) return 2.0;
            return 0.0;
        case Kind::product: {
            std::vector<int> exps(x.size(), 1);
            return monomial_partial(x, exps, k);
        }
        case Kind::monomial:
            return monomial_partial(x, multi, k);
        case Kind::polynomial: {
            double acc = 0.0;
            for (const auto& [exps, a] : terms) acc += a * monomial_partial(x, exps, k);
            return acc;
        }
        case Kind::exp_neg: {
            double v = std::exp(-x[0]);
            return (deg % 2 == 0) ? v : -v;
        }
        case Kind::reciprocal: {
            if (x[0] == 0.0) throw RangeError("reciprocal oracle: singular point 0");
            double v = factorial(deg) / int_pow(x[0], deg + 1);
            return (deg % 2 == 0) ? v : -v;
        }
        case Kind::division: {
            int k1 = k.size() > 0 ? k[0] : 0;
            int k2 = k.size() > 1 ? k[1] : 0;
            if (x[1] == 0.0) throw RangeError("division oracle: singular denominator");
            if (k1 > 1) return 0.0;
            double dy = factorial(k2) / int_pow(x[1], k2 + 1);
            if (k2 % 2 == 1) dy = -dy;
            return k1 == 0 ? x[0] * dy : dy;
        }
        case Kind::heaviside_tails:
            if (x[0] <= -param) return 0.0;
            if (x[0] >= param) return deg == 0 ? 1.0 : 0.0;
            throw RangeError("heaviside oracle queried inside the transition band");
        case Kind::clip_reference: {
            double A = param;
            if (std::fabs(x[0]) <= A) {
                if (deg == 0) return x[0];
                return deg == 1 ? 1.0 : 0.0;
            }
            if (x[0] >= A + 1.0) return deg == 0 ? A + 0.5 : 0.0;
            if (x[0] <= -A - 1.0) return deg == 0 ? -A - 0.5 : 0.0;
            throw RangeError("clip oracle queried inside the transition band");
        }
        case Kind::expression: {
            Jet j = jet_fn(x, deg);
            return j.partial(k);
        }
    }
    return 0.0;
}

GridSpec GridSpec::box(std::vector<std::pair<double, double>> intervals, int points) {
    GridSpec g;
    g.intervals = std::move(intervals);
    g.points_per_dim = points;
    return g;
}

namespace {

struct MaxTracker {
    double max_err = 0.0;
    std::vector<double> argmax;
};

// Evaluates the jet at every point in `points` and folds per-index maxima.
void scan_points(const Network& net, const Oracle& oracle, int order, int output_index,
                 const std::vector<std::vector<double>>& points,
                 std::vector<MaxTracker>& trackers) {
    if (points.empty()) return;
    auto sp = JetSpace::make(net.input_dim, order);
    const int P = sp->size();
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned chunks = std::min<unsigned>(hw, static_cast<unsigned>(points.size()));
    std::vector<std::vector<MaxTracker>> partial(chunks, std::vector<MaxTracker>(P));
    auto work = [&](unsigned c) {
        size_t lo = points.size() * c / chunks;
        size_t hi = points.size() * (c + 1) / chunks;
        for (size_t p = lo; p < hi; ++p) {
            Jet j = partials(net, points[p], order, output_index);
            for (int i = 0; i < P; ++i) {
                const MultiIndex& k = sp->index(i);
                double err = std::fabs(j.partial(k) - oracle.partial(points[p], k));
                if (err > partial[c][i].max_err) {
                    partial[c][i].max_err = err;
                    partial[c][i].argmax = points[p];
                }
            }
        }
    };
    if (chunks == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned c = 0; c < chunks; ++c) threads.emplace_back(work, c);
        for (auto& t : threads) t.join();
    }
    // Deterministic merge in chunk order.
    for (unsigned c = 0; c < chunks; ++c)
        for (int i = 0; i < P; ++i)
            if (partial[c][i].max_err > trackers[i].max_err) trackers[i] = partial[c][i];
}

std::vector<std::vector<double>> grid_points(const GridSpec& grid) {
    const int d = static_cast<int>(grid.intervals.size());
    const int n = grid.points_per_dim;
    std::vector<std::vector<double>> pts;
    std::vector<int> idx(d, 0);
    size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<size_t>(n);
    pts.reserve(total);
    for (size_t t = 0; t < total; ++t) {
        std::vector<double> x(d);
        for (int i = 0; i < d; ++i) {
            auto [lo, hi] = grid.intervals[i];
            x[i] = n == 1 ? lo : lo + (hi - lo) * idx[i] / (n - 1);
        }
        pts.push_back(std::move(x));
        for (int i = d - 1; i >= 0; --i) {
            if (++idx[i] < n) break;
            idx[i] = 0;
        }
    }
    return pts;
}

}  // namespace

SobolevReport sobolev_error(const Network& net, const Oracle& oracle, const GridSpec& grid,
                            int order, double eps, double noise_floor, int output_index) {
    net.validate();
    const int d = static_cast<int>(grid.intervals.size());
    if (d != net.input_dim)
        throw DimensionError("sobolev_error: grid dimension != network input_dim");
    int od = oracle.dimension();
    if (od >= 0 && od != d) throw DimensionError("sobolev_error: oracle dimension mismatch");
    if (grid.points_per_dim < 2) throw RequestError("sobolev_error: points_per_dim must be >= 2");
    if (oracle.kind == Oracle::Kind::reciprocal)
        for (auto [lo, hi] : grid.intervals)
            if (lo <= 0.0 && hi >= 0.0) throw RangeError("sobolev_error: reciprocal oracle singular inside grid");

    auto sp = JetSpace::make(d, order);
    const int P = sp->size();
    std::vector<MaxTracker> trackers(P);
    scan_points(net, oracle, order, output_index, grid_points(grid), trackers);

    // Argmax zoom: re-scan small boxes around the current per-index maxima.
    const int local = d <= 2 ? 5 : 3;
    double cell = 0.0;
    for (auto [lo, hi] : grid.intervals)
        cell = std::max(cell, (hi - lo) / (grid.points_per_dim - 1));
    for (int round = 0; round < grid.zoom_rounds; ++round) {
        double h = cell / std::pow(2.0, round);
        std::vector<std::vector<double>> pts;
        for (const MaxTracker& t : trackers) {
            if (t.argmax.empty()) continue;
            GridSpec localgrid;
            for (int i = 0; i < d; ++i) {
                auto [lo, hi] = grid.intervals[i];
                double a = std::max(lo, t.argmax[i] - h);
                double b = std::min(hi, t.argmax[i] + h);
                localgrid.intervals.emplace_back(a, b);
            }
            localgrid.points_per_dim = local;
            auto lp = grid_points(localgrid);
            pts.insert(pts.end(), lp.begin(), lp.end());
        }
        scan_points(net, oracle, order, output_index, pts, trackers);
    }

    SobolevReport report;
    report.order = order;
    report.eps = eps;
    report.noise_floor = noise_floor;
    report.grid_note = std::to_string(grid.points_per_dim) + "^" + std::to_string(d) +
                       " + " + std::to_string(grid.zoom_rounds) + " zoom rounds";
    for (int i = 0; i < P; ++i) {
        IndexReport ir;
        ir.k = sp->index(i);
        ir.max_err = trackers[i].max_err;
        ir.argmax = trackers[i].argmax;
        report.per_index.push_back(std::move(ir));
        report.overall = std::max(report.overall, trackers[i].max_err);
    }
    report.pass = report.overall <= eps + noise_floor;
    return report;
}

std::string SobolevReport::to_json() const {
    nlohmann::json doc;
    doc["target"] = target;
    doc["eps"] = eps;
    doc["order"] = order;
    doc["grid"] = grid_note;
    nlohmann::json per = nlohmann::json::array();
    for (const IndexReport& ir : per_index) {
        nlohmann::json j;
        j["k"] = ir.k;
        j["max_err"] = ir.max_err;
        j["argmax"] = ir.argmax;
        per.push_back(std::move(j));
    }
    doc["per_index"] = std::move(per);
    doc["overall"] = overall;
    doc["noise_floor"] = noise_floor;
    doc["pass"] = pass;
    return doc.dump(2);
}

namespace {

// `total` is the order of the full multi-index; the step must be sized by it,
// not by the per-axis order, or the nested denominators swallow the values.
long double fd_recurse(const std::function<long double(const std::vector<long double>&)>& f,
                       const std::vector<double>& x, const MultiIndex& k, int total) {
    int dim = -1;
    for (size_t i = 0; i < k.size(); ++i)
        if (k[i] > 0) { dim = static_cast<int>(i); break; }
    std::vector<long double> xl(x.begin(), x.end());
    if (dim < 0) return f(xl);

    MultiIndex rest = k;
    const int o = rest[dim];
    rest[dim] = 0;
    auto sub = [&](long double shift) {
        std::vector<double> xs = x;
        xs[dim] = static_cast<double>(xl[dim] + shift);
        return fd_recurse(f, xs, rest, total);
    };
    const long double h =
        std::pow((long double)LDBL_EPSILON, 1.0L / (total + 2)) * (1.0L + std::fabs(xl[dim]));
    switch (o) {
        case 1: return (sub(h) - sub(-h)) / (2.0L * h);
        case 2: return (sub(h) - 2.0L * sub(0.0L) + sub(-h)) / (h * h);
        case 3: return (sub(2 * h) - 2.0L * sub(h) + 2.0L * sub(-h) - sub(-2 * h)) / (2.0L * h * h * h);
        case 4:
            return (sub(2 * h) - 4.0L * sub(h) + 6.0L * sub(0.0L) - 4.0L * sub(-h) + sub(-2 * h)) /
                   (h * h * h * h);
        default: throw CapacityError("finite differences support per-axis order <= 4");
    }
}

}  // namespace

long double finite_difference_partial(
    const std::function<long double(const std::vector<long double>&)>& f,
    const std::vector<double>& x, const MultiIndex& k) {
    int total = total_degree(k);
    if (total > 4) throw CapacityError("finite differences support |k| <= 4");
    return fd_recurse(f, x, k, std::max(total, 1));
}

long double finite_difference_partial(const Network& net, const std::vector<double>& x,
                                      const MultiIndex& k, int output_index) {
    return finite_difference_partial(
        [&](const std::vector<long double>& xl) { return evaluate_ld(net, xl)[output_index]; }, x,
        k);
}

// ---------------------------------------------------------------------------
// Certificate batteries
// ---------------------------------------------------------------------------

namespace {

int default_points(int d) {
    switch (d) {
        case 1: return 1024;
        case 2: return 48;
        case 3: return 16;
        case 4: return 12;
        default: return std::max(3, static_cast<int>(std::floor(std::pow(4096.0, 1.0 / d))));
    }
}

struct Battery {
    const BudgetPolicy* policy;
    BuildCertificate cert;

    void check(const std::string& name, double measured, double allowed) {
        CheckResult r;
        r.name = name;
        r.measured = measured;
        r.allowed = allowed;
        r.pass = measured <= allowed;
        cert.summary.checks.push_back(std::move(r));
    }
    void check_flag(const std::string& name, bool ok) {
        CheckResult r;
        r.name = name;
        r.measured = ok ? 0.0 : 1.0;
        r.allowed = 0.0;
        r.pass = ok;
        cert.summary.checks.push_back(std::move(r));
    }
    // Headline + auxiliary domain measurements.
    void measure(const std::string& name, const Network& net, const Oracle& oracle,
                 const GridSpec& grid, int order, double eps, bool headline) {
        SobolevReport rep = sobolev_error(net, oracle, grid, order, eps, cert.noise_floor);
#ifdef GELUNET_TRACE
        fprintf(stderr, "[measure %s] overall=%.4g allowed=%.4g\n", name.c_str(), rep.overall,
                eps + cert.noise_floor);
        for (const auto& ir : rep.per_index) {
            fprintf(stderr, "   k=(");
            for (int kk : ir.k) fprintf(stderr, "%d,", kk);
            fprintf(stderr, ") err=%.4g at (", ir.max_err);
            for (double a : ir.argmax) fprintf(stderr, "%.5f,", a);
            fprintf(stderr, ")\n");
        }
#endif
        check(name, rep.overall, eps + cert.noise_floor);
        if (headline) cert.summary.measured_error = std::max(cert.summary.measured_error, rep.overall);
    }
    BuildCertificate finish() {
        cert.summary.verified = true;
        cert.summary.pass = true;
        for (const CheckResult& c : cert.summary.checks) cert.summary.pass &= c.pass;
        return cert;
    }
};

bool jet_finite(const Network& net, const std::vector<double>& x, int order) {
    for (const Jet& j : partials_all(net, x, order))
        for (double c : j.coefficients)
            if (!std::isfinite(c)) return false;
    return true;
}

GridSpec interval_grid(double lo, double hi, int points = 1024) {
    return GridSpec::box({{lo, hi}}, points);
}

Oracle zero_oracle() {
    Oracle o;
    o.kind = Oracle::Kind::polynomial;
    o.terms = {};
    return o;
}

}  // namespace

BuildCertificate check_certificate(const Network& net, BuildCertificate certificate,
                                   const BudgetPolicy& policy) {
    policy.validate();
    certificate.config = audit(net);
    Battery b{&policy, std::move(certificate)};
    b.cert.summary.checks.clear();
    b.cert.summary.measured_error = 0.0;
    const BuildRequest& rq = b.cert.request;
    const NetworkConfig& cfg = b.cert.config;
    const double eps = rq.eps;
    const int m = rq.order;

    switch (rq.target) {
        case Target::identity_shallow: {
            Oracle id{.kind = Oracle::Kind::identity};
            for (double C : {1.0, 2.0})
                b.measure("identity W^" + std::to_string(m) + " on [-" + std::to_string(C) + "," +
                              std::to_string(C) + "]",
                          net, id, interval_grid(-C, C), m, C * C * eps, true);
            b.check("phi_id(0)", std::fabs(evaluate(net, {0.0})[0]), 1e-30);
            b.check_flag("config L=2", cfg.depth == 2);
            b.check_flag("config max width = 1", cfg.max_width() == 1);
            b.check_flag("config S <= 3", cfg.nonzeros <= 3);
            break;
        }
        case Target::identity_deep: {
            Oracle id{.kind = Oracle::Kind::identity};
            double K = rq.scale;
            b.measure("identity W^m on [-K,K]", net, id, interval_grid(-K, K), m, eps, true);
            b.check_flag("config depth", cfg.depth == rq.depth);
            for (double p : {100.0, 1000.0, -100.0, -1000.0}) {
                double v = std::fabs(evaluate(net, {p})[0]);
                b.check("bounded at " + std::to_string(p), v, b.cert.global_bound);
            }
            break;
        }
        case Target::heaviside: {
            double kp = rq.kappa;
            Oracle tails{.kind = Oracle::Kind::heaviside_tails};
            tails.param = kp;
            b.measure("left tail", net, tails, interval_grid(-kp - 10.0, -kp), m, eps, true);
            b.measure("right tail", net, tails, interval_grid(kp, kp + 10.0), m, eps, true);
            b.check_flag("config L=2", cfg.depth == 2);
            b.check_flag("config S <= 8", cfg.nonzeros <= 8);
            for (double p : {-1000.0, 1000.0})
                b.check("bounded at probe", std::fabs(evaluate(net, {p})[0]), b.cert.global_bound);
            break;
        }
        case Target::clip: {
            double A = rq.clip_a;
            Oracle ref{.kind = Oracle::Kind::clip_reference};
            ref.param = A;
            b.measure("interior", net, ref, interval_grid(-A, A), m, eps, true);
            b.measure("right ray", net, ref, interval_grid(A + 1.0, A + 20.0), m, eps, false);
            b.measure("left ray", net, ref, interval_grid(-A - 20.0, -A - 1.0), m, eps, false);
            double sup = 0.0;
            for (double p : {0.0, A, -A, A + 1, -A - 1, A + 5, -A - 5, 100.0, -100.0, 1000.0, -1000.0})
                sup = std::max(sup, std::fabs(evaluate(net, {p})[0]));
            GridSpec g = interval_grid(-A - 20.0, A + 20.0);
            for (const auto& x : grid_points(g)) sup = std::max(sup, std::fabs(evaluate(net, x)[0]));
            b.check("global sup", sup, A + 2.5 + 1e-12);
            double gap = 0.0;
            for (const auto& x : grid_points(interval_grid(A, A + 1.0, 256)))
                gap = std::max(gap, std::fabs(evaluate(net, x)[0] - (A + 0.5)));
            for (const auto& x : grid_points(interval_grid(-A - 1.0, -A, 256)))
                gap = std::max(gap, std::fabs(evaluate(net, x)[0] + (A + 0.5)));
            b.check("gap saturation", gap, eps + 1.0);
            b.check_flag("config L=2", cfg.depth == 2);
            b.check_flag("config max width = 2", cfg.max_width() == 2);
            b.check_flag("config S = 7", cfg.nonzeros == 7);
            break;
        }
        case Target::square: {
            Oracle sq{.kind = Oracle::Kind::square};
            for (double C : {1.0, 2.0, 4.0})
                b.measure("square W^m on [-" + std::to_string(static_cast<int>(C)) + ",...]", net,
                          sq, interval_grid(-C, C, 2048), m, C * C * C * eps, true);
            b.check("phi_sq(0)", std::fabs(evaluate(net, {0.0})[0]), 1e-30);
            b.check_flag("config L=2", cfg.depth == 2);
            b.check_flag("config max width = 2", cfg.max_width() == 2);
            b.check_flag("config S <= 6", cfg.nonzeros <= 6);
            break;
        }
        case Target::mul2: {
            Oracle pr{.kind = Oracle::Kind::product};
            for (double C : {1.0, 2.0, 4.0})
                b.measure("product W^m on box " + std::to_string(static_cast<int>(C)), net, pr,
                          GridSpec::box({{-C, C}, {-C, C}}, 48), m, C * C * C * eps, true);
            std::mt19937_64 rng(0);
            std::uniform_real_distribution<double> u(-8.0, 8.0);
            double worst = 0.0;
            for (int t = 0; t < 1000; ++t)
                worst = std::max(worst, std::fabs(evaluate(net, {u(rng), 0.0})[0]));
            b.check("polarization phi(x,0)", worst, 1e-12);
            b.check_flag("config L=2", cfg.depth == 2);
            b.check_flag("config max width <= 4", cfg.max_width() <= 4);
            b.check_flag("config S <= 12", cfg.nonzeros <= 12);
            break;
        }
        case Target::prod_d: {
            Oracle pr{.kind = Oracle::Kind::product};
            double K = rq.scale;
            std::vector<std::pair<double, double>> box(rq.dim, {-K, K});
            b.measure("product W^m on box", net, pr, GridSpec::box(box, default_points(rq.dim)), m,
                      eps, true);
            std::vector<double> far(rq.dim, 100.0);
            b.check_flag("far probe finite", jet_finite(net, far, m));
            break;
        }
        case Target::monomial: {
            Oracle mono{.kind = Oracle::Kind::monomial};
            mono.multi = rq.multi;
            double K = rq.scale;
            int I = static_cast<int>(rq.multi.size());
            std::vector<std::pair<double, double>> box(I, {-K, K});
            b.measure("monomial W^m on box", net, mono, GridSpec::box(box, default_points(I)), m,
                      eps, true);
            // Zero-exponent coordinates must not influence the output at all.
            for (int i = 0; i < I; ++i) {
                if (rq.multi[i] != 0) continue;
                std::vector<double> p(I, 0.37), q(I, 0.37);
                q[i] = -0.91;
                double d = std::fabs(evaluate(net, p)[0] - evaluate(net, q)[0]);
                b.check("independent of x" + std::to_string(i), d, 1e-12);
            }
            break;
        }
        case Target::polynomial: {
            Oracle poly{.kind = Oracle::Kind::polynomial};
            poly.terms = rq.coefficients;
            int I = poly.terms.empty() ? net.input_dim : static_cast<int>(poly.terms.front().first.size());
            double K = rq.scale;
            std::vector<std::pair<double, double>> box(I, {-K, K});
            b.measure("polynomial W^m on box", net, poly, GridSpec::box(box, default_points(I)), m,
                      eps, true);
            break;
        }
        case Target::exp_neg: {
            Oracle ex{.kind = Oracle::Kind::exp_neg};
            double A = rq.exp_a;
            double T = 2.0;
            auto it = b.cert.sub_budgets.find("K");
            if (it != b.cert.sub_budgets.end()) T = std::max(T, it->second);
            b.measure("exp W^m on [-A, K]", net, ex, interval_grid(-A, T), m, eps, true);
            double far = std::fabs(evaluate(net, {1000.0})[0]);
            b.check("bounded at 1e3", far, b.cert.global_bound);
            b.check_flag("far probe finite", jet_finite(net, {1000.0}, m));
            break;
        }
        case Target::reciprocal_naive: {
            Oracle rec{.kind = Oracle::Kind::reciprocal};
            b.measure("reciprocal W^m on [a,b]", net, rec, interval_grid(rq.rec_a, rq.rec_b), m,
                      eps, true);
            b.check("bounded at -5", std::fabs(evaluate(net, {-5.0})[0]), b.cert.global_bound);
            break;
        }
        case Target::reciprocal: {
            Oracle rec{.kind = Oracle::Kind::reciprocal};
            double a0 = std::pow(2.0, -rq.knots);
            b.measure("reciprocal W^m on [a0,1]", net, rec, interval_grid(a0, 1.0, 512), m, eps,
                      true);
            b.check("phi(1) vs 1", std::fabs(evaluate(net, {1.0})[0] - 1.0), eps + b.cert.noise_floor);
            double hard = std::fabs(evaluate(net, {a0})[0] - 1.0 / a0);
            b.check("phi(a0) vs 2^N", hard, eps * (1.0 + 1.0 / (a0 * a0)));
            break;
        }
        case Target::division: {
            Oracle dv{.kind = Oracle::Kind::division};
            double a0 = std::pow(2.0, -rq.knots);
            b.measure("division W^m on box", net, dv,
                      GridSpec::box({{-1.0, 1.0}, {a0, 1.0}}, 32), m, eps, true);
            b.check("phi(1,1) vs 1", std::fabs(evaluate(net, {1.0, 1.0})[0] - 1.0), eps);
            double hard = std::fabs(evaluate(net, {-1.0, a0})[0] + 1.0 / a0);
            b.check("phi(-1,a0) vs -2^N", hard, eps * (1.0 + 1.0 / a0));
            break;
        }
        case Target::partition_of_unity:
            throw RequestError("partition_of_unity certificates need check_certificate_family");
    }
    return b.finish();
}

BuildCertificate check_certificate_family(const std::vector<Network>& nets,
                                          BuildCertificate certificate,
                                          const BudgetPolicy& policy) {
    policy.validate();
    if (certificate.request.target != Target::partition_of_unity)
        throw RequestError("family battery only defined for partition_of_unity");
    Battery b{&policy, std::move(certificate)};
    b.cert.summary.checks.clear();
    const BuildRequest& rqv = b.cert.request;
    const int N = rqv.knots;
    const int m = rqv.order;
    const double eps = rqv.eps;
    if (static_cast<int>(nets.size()) != N) throw DimensionError("pou family size mismatch");
    auto a = [&](int i) { return std::pow(2.0, -N + i); };

    double sum_err = 0.0;
    for (const auto& x : grid_points(interval_grid(-2.0, 2.0, 10000))) {
        long double s = 0.0L;
        for (const Network& n : nets) s += evaluate_ld(n, {x[0]})[0];
        sum_err = std::max(sum_err, static_cast<double>(std::fabs(s - 1.0L)));
    }
    b.check("sum of psi_i vs 1", sum_err, 1e-12);
    b.cert.summary.measured_error = sum_err;

    Oracle zero = zero_oracle();
    {
        SobolevReport r = sobolev_error(nets.front(), zero, interval_grid(a(2), 10.0), m, eps,
                                        b.cert.noise_floor);
        b.check("psi_1 right tail", r.overall, eps + b.cert.noise_floor);
    }
    {
        SobolevReport r = sobolev_error(nets.back(), zero, interval_grid(-10.0, a(N - 2)), m, eps,
                                        b.cert.noise_floor);
        b.check("psi_N left tail", r.overall, eps + b.cert.noise_floor);
    }
    for (int i = 2; i <= N - 1; ++i) {
        const Network& psi = nets[i - 1];
        SobolevReport left = sobolev_error(psi, zero, interval_grid(-10.0, a(i - 2)), m, eps,
                                           b.cert.noise_floor);
        SobolevReport right = sobolev_error(psi, zero, interval_grid(a(i + 1), 10.0), m, eps,
                                            b.cert.noise_floor);
        b.check("psi_" + std::to_string(i) + " tails", std::max(left.overall, right.overall),
                eps + b.cert.noise_floor);
    }
    for (const Network& n : nets)
        b.check_flag("config L=2", n.depth() == 2);
    return b.finish();
}

}  // namespace gelunet
