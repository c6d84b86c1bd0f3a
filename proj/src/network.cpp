#include "gelunet/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "gelunet/activation.hpp"
#include "gelunet/errors.hpp"

namespace gelunet {

Layer Layer::zeros(int rows, int cols) {
    Layer l;
    l.rows = rows;
    l.cols = cols;
    l.weight.assign(static_cast<size_t>(rows) * cols, 0.0);
    l.shift.assign(rows, 0.0);
    return l;
}

Layer Layer::identity(int n) {
    Layer l = zeros(n, n);
    for (int i = 0; i < n; ++i) l.at(i, i) = 1.0;
    return l;
}

Network Network::affine(Layer l) {
    Network n;
    n.input_dim = l.cols;
    n.output_dim = l.rows;
    n.layers.push_back(std::move(l));
    return n;
}

void Network::validate() const {
    if (layers.empty()) throw DimensionError("network has no layers");
    if (layers.front().cols != input_dim)
        throw DimensionError("first layer column count does not match input_dim");
    if (layers.back().rows != output_dim)
        throw DimensionError("last layer row count does not match output_dim");
    int prev = input_dim;
    for (size_t j = 0; j < layers.size(); ++j) {
        const Layer& l = layers[j];
        if (l.cols != prev)
            throw DimensionError("width chain broken at layer " + std::to_string(j));
        if (l.weight.size() != static_cast<size_t>(l.rows) * l.cols ||
            l.shift.size() != static_cast<size_t>(l.rows))
            throw DimensionError("layer storage size mismatch at layer " + std::to_string(j));
        for (double w : l.weight)
            if (!std::isfinite(w)) throw DimensionError("non-finite weight entry");
        for (double b : l.shift)
            if (!std::isfinite(b)) throw DimensionError("non-finite shift entry");
        prev = l.rows;
    }
}

namespace {

// out = A*h - b over long double accumulators; zero weights are skipped,
// which matters a lot for the block-diagonal assemblies.
void affine_apply(const Layer& l, const std::vector<long double>& h,
                  std::vector<long double>& out) {
    out.assign(l.rows, 0.0L);
    for (int r = 0; r < l.rows; ++r) {
        long double acc = 0.0L;
        const double* row = l.weight.data() + static_cast<size_t>(r) * l.cols;
        for (int c = 0; c < l.cols; ++c) {
            double w = row[c];
            if (w != 0.0) acc += static_cast<long double>(w) * h[c];
        }
        out[r] = acc - static_cast<long double>(l.shift[r]);
    }
}

}  // namespace

std::vector<long double> evaluate_ld(const Network& net, const std::vector<long double>& x) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw DimensionError("evaluate: input length " + std::to_string(x.size()) +
                             " != input_dim " + std::to_string(net.input_dim));
    std::vector<long double> h = x, next;
    const int L = net.depth();
    for (int j = 0; j < L; ++j) {
        affine_apply(net.layers[j], h, next);
        if (j + 1 < L)
            for (auto& v : next) v = gelu_ld(v);
        h.swap(next);
    }
    return h;
}

std::vector<double> evaluate(const Network& net, const std::vector<double>& x) {
    std::vector<long double> xl(x.begin(), x.end());
    std::vector<long double> y = evaluate_ld(net, xl);
    return std::vector<double>(y.begin(), y.end());
}

NetworkConfig audit(const Network& net) {
    NetworkConfig cfg;
    cfg.depth = net.depth();
    cfg.widths.push_back(net.input_dim);
    for (const Layer& l : net.layers) {
        cfg.widths.push_back(l.rows);
        for (double w : l.weight) {
            if (w != 0.0) ++cfg.nonzeros;
            cfg.magnitude = std::max(cfg.magnitude, std::fabs(w));
        }
        for (double b : l.shift) {
            if (b != 0.0) ++cfg.nonzeros;
            cfg.magnitude = std::max(cfg.magnitude, std::fabs(b));
        }
    }
    return cfg;
}

int NetworkConfig::max_width() const {
    int m = 0;
    for (int w : widths) m = std::max(m, w);
    return m;
}

Network compose(const Network& outer, const Network& inner) {
    if (inner.output_dim != outer.input_dim)
        throw DimensionError("compose: inner output_dim " + std::to_string(inner.output_dim) +
                             " != outer input_dim " + std::to_string(outer.input_dim));
    const Layer& li = inner.layers.back();
    const Layer& lo = outer.layers.front();
    Layer merged = Layer::zeros(lo.rows, li.cols);
    // merged pre-act: A1_out (A_L_in h - b_L_in) - b1_out
    for (int r = 0; r < lo.rows; ++r) {
        for (int c = 0; c < li.cols; ++c) {
            long double acc = 0.0L;
            for (int k = 0; k < lo.cols; ++k) {
                double a = lo.at(r, k), b = li.at(k, c);
                if (a != 0.0 && b != 0.0) acc += static_cast<long double>(a) * b;
            }
            merged.at(r, c) = static_cast<double>(acc);
        }
        long double s = static_cast<long double>(lo.shift[r]);
        for (int k = 0; k < lo.cols; ++k)
            if (lo.at(r, k) != 0.0) s += static_cast<long double>(lo.at(r, k)) * li.shift[k];
        merged.shift[r] = static_cast<double>(s);
    }
    Network out;
    out.input_dim = inner.input_dim;
    out.output_dim = outer.output_dim;
    out.layers.assign(inner.layers.begin(), inner.layers.end() - 1);
    out.layers.push_back(std::move(merged));
    out.layers.insert(out.layers.end(), outer.layers.begin() + 1, outer.layers.end());
    out.validate();
    return out;
}

namespace {

void check_equal_depths(const std::vector<Network>& nets) {
    if (nets.empty()) throw DimensionError("combinator: empty network list");
    for (const Network& n : nets)
        if (n.depth() != nets.front().depth())
            throw DimensionError("combinator: member depths differ (equalize first)");
}

Layer stack_layer(const std::vector<Network>& nets, int j, bool stack_inputs) {
    int rows = 0, cols = 0;
    for (const Network& n : nets) {
        rows += n.layers[j].rows;
        cols = stack_inputs ? n.layers[j].cols : cols + n.layers[j].cols;
    }
    Layer out = Layer::zeros(rows, cols);
    int r0 = 0, c0 = 0;
    for (const Network& n : nets) {
        const Layer& l = n.layers[j];
        for (int r = 0; r < l.rows; ++r) {
            for (int c = 0; c < l.cols; ++c) out.at(r0 + r, (stack_inputs ? 0 : c0) + c) = l.at(r, c);
            out.shift[r0 + r] = l.shift[r];
        }
        r0 += l.rows;
        if (!stack_inputs) c0 += l.cols;
    }
    return out;
}

}  // namespace

Network parallel(const std::vector<Network>& nets, bool shared_input) {
    check_equal_depths(nets);
    if (shared_input) {
        for (const Network& n : nets)
            if (n.input_dim != nets.front().input_dim)
                throw DimensionError("parallel: shared input dims differ");
    }
    const int L = nets.front().depth();
    Network out;
    out.input_dim = shared_input ? nets.front().input_dim : 0;
    if (!shared_input)
        for (const Network& n : nets) out.input_dim += n.input_dim;
    for (const Network& n : nets) out.output_dim += n.output_dim;
    for (int j = 0; j < L; ++j) out.layers.push_back(stack_layer(nets, j, shared_input && j == 0));
    out.validate();
    return out;
}

Network weighted_sum(const std::vector<Network>& nets, const std::vector<double>& coeffs,
                     bool shared_input) {
    check_equal_depths(nets);
    if (coeffs.size() != nets.size())
        throw DimensionError("weighted_sum: coefficient count mismatch");
    for (const Network& n : nets)
        if (n.output_dim != 1) throw DimensionError("weighted_sum: members must be scalar-valued");
    if (nets.front().depth() == 1) {
        // Pure affine members fuse into one affine layer.
        Network p = parallel(nets, shared_input);
        Layer fused = Layer::zeros(1, p.layers[0].cols);
        long double s = 0.0L;
        for (size_t k = 0; k < nets.size(); ++k) {
            const Layer& l = p.layers[0];
            for (int c = 0; c < l.cols; ++c)
                fused.at(0, c) += coeffs[k] * l.at(static_cast<int>(k), c);
            s += static_cast<long double>(coeffs[k]) * l.shift[k];
        }
        fused.shift[0] = static_cast<double>(s);
        Network out = Network::affine(std::move(fused));
        out.validate();
        return out;
    }
    Network p = parallel(nets, shared_input);
    // Re-fuse the stacked last layer into a single scaled row.
    Layer last = Layer::zeros(1, p.layers.back().cols);
    long double s = 0.0L;
    int r = 0;
    for (size_t k = 0; k < nets.size(); ++k) {
        const Layer& lk = p.layers.back();
        for (int c = 0; c < lk.cols; ++c) {
            double w = lk.at(r, c);
            if (w != 0.0) last.at(0, c) += coeffs[k] * w;
        }
        s += static_cast<long double>(coeffs[k]) * lk.shift[r];
        r += 1;
    }
    last.shift[0] = static_cast<double>(s);
    p.layers.back() = std::move(last);
    p.output_dim = 1;
    p.validate();
    return p;
}

std::string serialize(const Network& net, const NetworkMeta& meta) {
    net.validate();
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["convention"] = "pre_act = A*h - b";
    doc["input_dim"] = net.input_dim;
    doc["output_dim"] = net.output_dim;
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& l : net.layers) {
        nlohmann::json jl;
        jl["rows"] = l.rows;
        jl["cols"] = l.cols;
        jl["a"] = l.weight;
        jl["b"] = l.shift;
        layers.push_back(std::move(jl));
    }
    doc["layers"] = std::move(layers);
    nlohmann::json m;
    m["target"] = meta.target;
    m["eps"] = meta.eps;
    m["order"] = meta.order;
    m["domain"] = meta.domain.empty() ? nlohmann::json(nlohmann::json::object())
                                      : nlohmann::json(meta.domain);
    doc["meta"] = std::move(m);
    return doc.dump(2);
}

Network deserialize(const std::string& text, NetworkMeta* meta_out) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("network document is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format_version").get<int>() != 1)
            throw FormatError("unsupported format_version");
        if (doc.at("convention").get<std::string>() != "pre_act = A*h - b")
            throw FormatError("unknown shift convention");
        Network net;
        net.input_dim = doc.at("input_dim").get<int>();
        net.output_dim = doc.at("output_dim").get<int>();
        for (const auto& jl : doc.at("layers")) {
            Layer l;
            l.rows = jl.at("rows").get<int>();
            l.cols = jl.at("cols").get<int>();
            l.weight = jl.at("a").get<std::vector<double>>();
            l.shift = jl.at("b").get<std::vector<double>>();
            net.layers.push_back(std::move(l));
        }
        if (meta_out && doc.contains("meta")) {
            const auto& m = doc["meta"];
            meta_out->target = m.value("target", std::string());
            meta_out->eps = m.value("eps", 0.0);
            meta_out->order = m.value("order", 0);
            if (m.contains("domain") && m["domain"].is_string())
                meta_out->domain = m["domain"].get<std::string>();
        }
        try {
            net.validate();
        } catch (const DimensionError& e) {
            throw FormatError(std::string("dimension-chain violation: ") + e.what());
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed network document: ") + e.what());
    }
}

namespace {

// Plain double-precision forward pass, used only to probe rounding noise.
std::vector<double> evaluate_plain_double(const Network& net, const std::vector<double>& x) {
    std::vector<double> h = x, next;
    const int L = net.depth();
    for (int j = 0; j < L; ++j) {
        const Layer& l = net.layers[j];
        next.assign(l.rows, 0.0);
        for (int r = 0; r < l.rows; ++r) {
            double acc = 0.0;
            const double* row = l.weight.data() + static_cast<size_t>(r) * l.cols;
            for (int c = 0; c < l.cols; ++c)
                if (row[c] != 0.0) acc += row[c] * h[c];
            next[r] = acc - l.shift[r];
        }
        if (j + 1 < L)
            for (auto& v : next) v = gelu(v);
        h.swap(next);
    }
    return h;
}

}  // namespace

double estimate_noise_floor(const Network& net, double input_scale) {
    // Empirical: the spread between a double-precision forward pass and the
    // long double pipeline measures the rounding sensitivity of the assembly.
    // Our evaluation path carries ~2^-11 of that spread; keep a safety factor
    // for derivative amplification.
    double scale = std::max(1.0, input_scale);
    double diff = 0.0;
    const int probes = 9;
    for (int t = 0; t < probes; ++t) {
        std::vector<double> x(net.input_dim);
        for (int i = 0; i < net.input_dim; ++i) {
            // deterministic low-discrepancy-ish probe pattern in [-scale, scale]
            double u = std::fmod(0.5 + 0.618033988749895 * (t + 3.0 * i + 1), 1.0);
            x[i] = (2.0 * u - 1.0) * scale;
        }
        std::vector<double> a = evaluate_plain_double(net, x);
        std::vector<double> b = evaluate(net, x);
        for (int i = 0; i < net.output_dim; ++i)
            diff = std::max(diff, std::fabs(a[i] - b[i]));
    }
    // the long double pipeline carries ~2^-11 of the double-path spread;
    // keep a 4x margin for derivative amplification
    return std::max(1e-14, diff / 512.0);
}

}  // namespace gelunet
