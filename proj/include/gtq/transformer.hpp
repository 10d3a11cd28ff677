#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gtq/autodiff.hpp"

namespace gtq {

enum class TokenMode { Scalar, Patch };

struct TransformerConfig {
    int d_model = 16;
    int n_heads = 2;
    int n_layers = 1;
    int d_ff = 32;
    int n_qubits = 3;
    TokenMode token_mode = TokenMode::Scalar;
    int patch = 4; // patch side, only used in Patch mode
    std::uint64_t seed = 0;

    void validate() const; // d_model % n_heads == 0, n_qubits <= d_model
};

// Scalar mode: one token per feature (T = s_in, token dim 1). Patch mode:
// non-overlapping p x p patches of a square image, row-major (T = (side/p)^2,
// token dim p^2).
ad::Tensor tokenize(const std::vector<double>& x, const TransformerConfig& cfg);

// Fixed sinusoidal table, T x d_model.
ad::Tensor positional_encoding(std::size_t T, std::size_t d_model);

// angle_i = pi * tanh(h_i), each in (-pi, pi), plus its derivative
// pi * (1 - tanh^2) used to chain quantum-layer gradients into the tape.
std::vector<double> to_angles(const std::vector<double>& h);
std::vector<double> to_angles_grad(const std::vector<double>& h);

// Per-layer attention matrices captured during encode (one per head).
struct EncodeTrace {
    std::vector<ad::Tensor> attention;
};

// Token embedding + positional encoding + self-attention stack + mean
// pooling + linear head down to n_qubits. Parameters are persistent autodiff
// leaves; every encode builds a fresh graph over them.
class Encoder {
public:
    Encoder(TransformerConfig cfg, int token_dim);

    // Returns h as a 1 x n_qubits graph node.
    ad::NodePtr encode(const std::vector<double>& x, EncodeTrace* trace = nullptr) const;

    std::vector<ad::NodePtr> parameters() const;
    std::size_t parameter_count() const;

    const TransformerConfig& config() const { return cfg_; }
    int token_dim() const { return token_dim_; }

    // Flat versioned binary record: magic "GTQ1", config, shapes, row-major
    // real64 payloads (little-endian).
    void save(std::ostream& os) const;
    static Encoder load(std::istream& is);

private:
    struct Layer {
        ad::NodePtr w_q, w_k, w_v, w_o, b_o;
        ad::NodePtr w_ff1, b_ff1, w_ff2, b_ff2;
    };

    Encoder() = default;
    void init_params();

    TransformerConfig cfg_;
    int token_dim_ = 1;
    ad::NodePtr w_embed_, b_embed_; // token_dim -> d_model
    std::vector<Layer> layers_;
    ad::NodePtr w_head_, b_head_; // d_model -> n_qubits
};

} // namespace gtq
