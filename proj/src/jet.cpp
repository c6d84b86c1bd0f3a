#include "gelunet/jet.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>

#include "gelunet/activation.hpp"
#include "gelunet/errors.hpp"

namespace gelunet {

namespace {

uint64_t pack_key(const MultiIndex& k) {
    uint64_t key = 0;
    for (int v : k) key = (key << 8) | static_cast<uint64_t>(v & 0xff);
    return key;
}

void enumerate(int n, int m, MultiIndex& cur, int pos, int remaining,
               std::vector<MultiIndex>& out) {
    if (pos == n - 1) {
        cur[pos] = remaining;
        out.push_back(cur);
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        cur[pos] = v;
        enumerate(n, m, cur, pos + 1, remaining - v, out);
    }
}

}  // namespace

JetSpace::JetSpace(int n, int m) : n_(n), m_(m) {
    // Graded order: all indices of total degree 0, then 1, ... then m.
    MultiIndex cur(n, 0);
    for (int deg = 0; deg <= m; ++deg) enumerate(n, m, cur, 0, deg, indices_);
    const int P = size();
    product_.assign(static_cast<size_t>(P) * P, -1);
    std::map<uint64_t, int> lookup;
    for (int i = 0; i < P; ++i) lookup[pack_key(indices_[i])] = i;
    for (int i = 0; i < P; ++i) {
        int di = 0;
        for (int v : indices_[i]) di += v;
        for (int j = 0; j < P; ++j) {
            int dj = 0;
            for (int v : indices_[j]) dj += v;
            if (di + dj > m) continue;
            MultiIndex sum(n);
            for (int t = 0; t < n; ++t) sum[t] = indices_[i][t] + indices_[j][t];
            product_[static_cast<size_t>(i) * P + j] = lookup.at(pack_key(sum));
        }
    }
    factorials_.resize(P);
    for (int i = 0; i < P; ++i) {
        long double f = 1.0L;
        for (int v : indices_[i])
            for (int t = 2; t <= v; ++t) f *= t;
        factorials_[i] = f;
    }
}

std::shared_ptr<const JetSpace> JetSpace::make(int variables, int order) {
    if (variables < 1) throw DimensionError("JetSpace: need at least one variable");
    if (order < 0 || order > kMaxDerivativeOrder)
        throw CapacityError("JetSpace: order out of range");
    if (order >= 3 && variables > 8)
        throw CapacityError("JetSpace: more than 8 variables at order >= 3");
    if (variables > 64) throw CapacityError("JetSpace: too many variables");
    // Cache: spaces are tiny but the product table is worth reusing.
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(variables, order);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto sp = std::shared_ptr<const JetSpace>(new JetSpace(variables, order));
    cache[key] = sp;
    return sp;
}

int JetSpace::position(const MultiIndex& k) const {
    if (static_cast<int>(k.size()) != n_) return -1;
    int deg = 0;
    for (int v : k) {
        if (v < 0) return -1;
        deg += v;
    }
    if (deg > m_) return -1;
    for (int i = 0; i < size(); ++i)
        if (indices_[i] == k) return i;
    return -1;
}

double Jet::coefficient(const MultiIndex& k) const {
    int p = space->position(k);
    if (p < 0) throw CapacityError("Jet: multi-index outside truncation order");
    return coefficients[p];
}

double Jet::partial(const MultiIndex& k) const {
    int p = space->position(k);
    if (p < 0) throw CapacityError("Jet: multi-index outside truncation order");
    return coefficients[p] * static_cast<double>(space->index_factorial(p));
}

namespace {

// Working representation during propagation: long double coefficient blocks,
// one contiguous block of size P per neuron.
struct JetBuffer {
    int P = 0;
    std::vector<long double> data;  // count x P
    int count() const { return P == 0 ? 0 : static_cast<int>(data.size()) / P; }
    long double* at(int i) { return data.data() + static_cast<size_t>(i) * P; }
    const long double* at(int i) const { return data.data() + static_cast<size_t>(i) * P; }
    void resize(int count) { data.assign(static_cast<size_t>(count) * P, 0.0L); }
};

// c += a * b, truncated.
void jet_mul_acc(const JetSpace& sp, const long double* a, const long double* b,
                 long double* c) {
    const int P = sp.size();
    for (int i = 0; i < P; ++i) {
        long double ai = a[i];
        if (ai == 0.0L) continue;
        for (int j = 0; j < P; ++j) {
            int t = sp.product_target(i, j);
            if (t < 0) break;  // graded order: once truncated, later j only grow
            long double bj = b[j];
            if (bj != 0.0L) c[t] += ai * bj;
        }
    }
}

// GELU applied to one jet in place: series composition around the jet's value.
void jet_gelu(const JetSpace& sp, long double* u, long double* scratch_v,
              long double* scratch_r, long double* scratch_t) {
    const int P = sp.size();
    const int m = sp.order();
    long double u0 = u[0];
    long double derivs[kMaxDerivativeOrder + 1];
    gelu_derivatives_ld(m, u0, derivs);
    if (m == 0) {
        u[0] = derivs[0];
        return;
    }
    // v = u with the constant removed; r = Horner result.
    std::copy(u, u + P, scratch_v);
    scratch_v[0] = 0.0L;
    long double fact = 1.0L;
    for (int j = 2; j <= m; ++j) fact *= j;  // m!
    // coefficients c_j = d^j GELU(u0) / j!
    std::fill(scratch_r, scratch_r + P, 0.0L);
    long double cm = derivs[m];
    {
        long double f = 1.0L;
        for (int j = 2; j <= m; ++j) f *= j;
        cm /= f;
    }
    scratch_r[0] = cm;
    for (int j = m - 1; j >= 0; --j) {
        // r = r * v + c_j
        std::fill(scratch_t, scratch_t + P, 0.0L);
        jet_mul_acc(sp, scratch_r, scratch_v, scratch_t);
        long double f = 1.0L;
        for (int t = 2; t <= j; ++t) f *= t;
        scratch_t[0] += derivs[j] / f;
        std::copy(scratch_t, scratch_t + P, scratch_r);
    }
    std::copy(scratch_r, scratch_r + P, u);
}

JetBuffer forward_jets(const Network& net, const std::vector<double>& x,
                       std::shared_ptr<const JetSpace> sp) {
    net.validate();
    if (static_cast<int>(x.size()) != net.input_dim)
        throw DimensionError("partials: input length mismatch");
    const int P = sp->size();
    JetBuffer h, next;
    h.P = next.P = P;
    h.resize(net.input_dim);
    for (int i = 0; i < net.input_dim; ++i) {
        long double* ji = h.at(i);
        ji[0] = static_cast<long double>(x[i]);
        if (sp->order() >= 1) {
            MultiIndex e(net.input_dim, 0);
            e[i] = 1;
            ji[sp->position(e)] = 1.0L;
        }
    }
    std::vector<long double> sv(P), sr(P), st(P);
    const int L = net.depth();
    for (int j = 0; j < L; ++j) {
        const Layer& l = net.layers[j];
        next.resize(l.rows);
        for (int r = 0; r < l.rows; ++r) {
            long double* out = next.at(r);
            const double* row = l.weight.data() + static_cast<size_t>(r) * l.cols;
            for (int c = 0; c < l.cols; ++c) {
                double w = row[c];
                if (w == 0.0) continue;
                const long double* in = h.at(c);
                for (int p = 0; p < P; ++p) out[p] += static_cast<long double>(w) * in[p];
            }
            out[0] -= static_cast<long double>(l.shift[r]);
            if (j + 1 < L) jet_gelu(*sp, out, sv.data(), sr.data(), st.data());
        }
        std::swap(h.data, next.data);
    }
    return h;
}

}  // namespace

Jet jet_constant(std::shared_ptr<const JetSpace> space, double v) {
    Jet j;
    j.space = std::move(space);
    j.coefficients.assign(j.space->size(), 0.0);
    j.coefficients[0] = v;
    return j;
}

Jet jet_variable(std::shared_ptr<const JetSpace> space, int variable, double value) {
    Jet j = jet_constant(std::move(space), value);
    if (j.space->order() >= 1) {
        MultiIndex e(j.space->variables(), 0);
        e[variable] = 1;
        j.coefficients[j.space->position(e)] = 1.0;
    }
    return j;
}

namespace {
void require_same_space(const Jet& a, const Jet& b) {
    if (a.space.get() != b.space.get())
        throw DimensionError("jet arithmetic requires a shared space");
}
}  // namespace

Jet jet_add(const Jet& a, const Jet& b) {
    require_same_space(a, b);
    Jet r = a;
    for (size_t i = 0; i < r.coefficients.size(); ++i) r.coefficients[i] += b.coefficients[i];
    return r;
}

Jet jet_sub(const Jet& a, const Jet& b) {
    require_same_space(a, b);
    Jet r = a;
    for (size_t i = 0; i < r.coefficients.size(); ++i) r.coefficients[i] -= b.coefficients[i];
    return r;
}

Jet jet_scale(Jet a, double s) {
    for (double& c : a.coefficients) c *= s;
    return a;
}

Jet jet_multiply(const Jet& a, const Jet& b) {
    require_same_space(a, b);
    const JetSpace& sp = *a.space;
    Jet r = jet_constant(a.space, 0.0);
    const int P = sp.size();
    for (int i = 0; i < P; ++i) {
        double ai = a.coefficients[i];
        if (ai == 0.0) continue;
        for (int j = 0; j < P; ++j) {
            int t = sp.product_target(i, j);
            if (t < 0) break;
            r.coefficients[t] += ai * b.coefficients[j];
        }
    }
    return r;
}

Jet jet_compose_series(const Jet& u, const std::vector<double>& derivs) {
    const int m = u.space->order();
    if (static_cast<int>(derivs.size()) < m + 1)
        throw CapacityError("jet_compose_series: not enough derivatives");
    Jet v = u;
    v.coefficients[0] = 0.0;
    Jet r = jet_constant(u.space, derivs[m] / factorial(m));
    for (int j = m - 1; j >= 0; --j) {
        r = jet_multiply(r, v);
        r.coefficients[0] += derivs[j] / factorial(j);
    }
    return r;
}

std::vector<Jet> partials_all(const Network& net, const std::vector<double>& x, int order) {
    auto sp = JetSpace::make(net.input_dim, order);
    JetBuffer out = forward_jets(net, x, sp);
    std::vector<Jet> jets(net.output_dim);
    for (int i = 0; i < net.output_dim; ++i) {
        jets[i].space = sp;
        const long double* src = out.at(i);
        jets[i].coefficients.assign(src, src + sp->size());
    }
    return jets;
}

Jet partials(const Network& net, const std::vector<double>& x, int order, int output_index) {
    if (output_index < 0 || output_index >= net.output_dim)
        throw DimensionError("partials: output index out of range");
    return partials_all(net, x, order)[output_index];
}

}  // namespace gelunet
