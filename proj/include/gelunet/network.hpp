#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gelunet {

// One affine stage. Pre-activation is A*h - b (the shift is subtracted).
struct Layer {
    int rows = 0;
    int cols = 0;
    std::vector<double> weight;  // row-major, rows x cols
    std::vector<double> shift;   // length rows

    double& at(int r, int c) { return weight[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return weight[static_cast<size_t>(r) * cols + c]; }

    static Layer zeros(int rows, int cols);
    static Layer identity(int n);
};

// Immutable feedforward value: h0 = x; h_j = GELU(A_j h_{j-1} - b_j) for
// j < L; output = A_L h_{L-1} - b_L.
struct Network {
    std::vector<Layer> layers;
    int input_dim = 0;
    int output_dim = 0;

    int depth() const { return static_cast<int>(layers.size()); }
    // Throws DimensionError when the width chain or finiteness invariants fail.
    void validate() const;

    static Network affine(Layer l);  // single-layer network (pure affine map)
};

// Audited configuration (depth L, widths W, nonzero count S, magnitude B).
struct NetworkConfig {
    int depth = 0;
    std::vector<int> widths;  // W_0 .. W_L
    long long nonzeros = 0;
    double magnitude = 0.0;
    int max_width() const;
};

std::vector<double> evaluate(const Network& net, const std::vector<double>& x);
std::vector<long double> evaluate_ld(const Network& net, const std::vector<long double>& x);

NetworkConfig audit(const Network& net);

// Fused composition: evaluate(compose(g, f), x) == g(f(x)) up to roundoff.
// The inner last affine map and the outer first affine map merge into one layer.
Network compose(const Network& outer, const Network& inner);

// Block-diagonal stacking. All depths must match. With shared_input the
// first-layer weights stack vertically over one common input.
Network parallel(const std::vector<Network>& nets, bool shared_input);

// Like parallel but the last layers fuse into sum_k coeffs[k] * net_k, so all
// member networks must have output_dim 1.
Network weighted_sum(const std::vector<Network>& nets, const std::vector<double>& coeffs,
                     bool shared_input);

// Composes `net` with identity chains so the result has exactly target_depth
// layers (declared in builders.cpp; forward declaration lives there).

// UTF-8 JSON text, shortest round-trip decimals; see README for the schema.
struct NetworkMeta {
    std::string target;
    double eps = 0.0;
    int order = 0;
    std::string domain;
};

std::string serialize(const Network& net, const NetworkMeta& meta = {});
Network deserialize(const std::string& text, NetworkMeta* meta_out = nullptr);

// Crude forward magnitude/rounding propagation: an upper estimate of the
// evaluation noise for inputs with |x_i| <= input_scale. Used as the
// certificate noise floor.
double estimate_noise_floor(const Network& net, double input_scale);

}  // namespace gelunet
