#include "gtq/transformer.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include "gtq/rng.hpp"

namespace gtq {

using ad::NodePtr;
using ad::Tensor;

void TransformerConfig::validate() const {
    if (d_model < 1 || n_heads < 1 || n_layers < 0 || d_ff < 1)
        throw ConfigError("transformer: sizes must be positive");
    if (d_model % n_heads != 0)
        throw ConfigError("transformer: d_model must be divisible by n_heads");
    if (n_qubits < 1 || n_qubits > d_model)
        throw ConfigError("transformer: need 1 <= n_qubits <= d_model");
    if (token_mode == TokenMode::Patch && patch < 1)
        throw ConfigError("transformer: patch side must be >= 1");
}

ad::Tensor tokenize(const std::vector<double>& x, const TransformerConfig& cfg) {
    if (x.empty()) throw FormatError("tokenize: empty input");
    if (cfg.token_mode == TokenMode::Scalar) {
        return Tensor({x.size(), 1}, x);
    }
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(double(x.size()))));
    if (side * side != x.size())
        throw FormatError("tokenize: patch mode needs a square image, got " +
                          std::to_string(x.size()) + " pixels");
    const std::size_t p = static_cast<std::size_t>(cfg.patch);
    if (side % p != 0)
        throw FormatError("tokenize: image side " + std::to_string(side) +
                          " is not divisible by patch " + std::to_string(p));
    const std::size_t grid = side / p;
    Tensor tokens({grid * grid, p * p});
    for (std::size_t gr = 0; gr < grid; ++gr)
        for (std::size_t gc = 0; gc < grid; ++gc) {
            const std::size_t t = gr * grid + gc;
            for (std::size_t r = 0; r < p; ++r)
                for (std::size_t c = 0; c < p; ++c)
                    tokens.at(t, r * p + c) = x[(gr * p + r) * side + gc * p + c];
        }
    return tokens;
}

ad::Tensor positional_encoding(std::size_t T, std::size_t d_model) {
    Tensor pe({T, d_model});
    for (std::size_t pos = 0; pos < T; ++pos)
        for (std::size_t i = 0; i < d_model; ++i) {
            const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(d_model);
            const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
            pe.at(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    return pe;
}

std::vector<double> to_angles(const std::vector<double>& h) {
    std::vector<double> a(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) a[i] = std::numbers::pi * std::tanh(h[i]);
    return a;
}

std::vector<double> to_angles_grad(const std::vector<double>& h) {
    std::vector<double> d(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double t = std::tanh(h[i]);
        d[i] = std::numbers::pi * (1.0 - t * t);
    }
    return d;
}

namespace {

NodePtr init_matrix(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng) {
    Tensor t({rows, cols});
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.uniform(-bound, bound);
    return ad::leaf(std::move(t), true);
}

} // namespace

Encoder::Encoder(TransformerConfig cfg, int token_dim) : cfg_(cfg), token_dim_(token_dim) {
    cfg_.validate();
    if (token_dim_ < 1) throw ConfigError("encoder: token_dim must be >= 1");
    init_params();
}

void Encoder::init_params() {
    Rng rng(derive_seed(cfg_.seed, 0x656e63, 0));
    const auto d = static_cast<std::size_t>(cfg_.d_model);
    const auto td = static_cast<std::size_t>(token_dim_);
    w_embed_ = init_matrix(td, d, td, rng);
    b_embed_ = init_matrix(1, d, td, rng);
    layers_.clear();
    for (int l = 0; l < cfg_.n_layers; ++l) {
        Layer layer;
        layer.w_q = init_matrix(d, d, d, rng);
        layer.w_k = init_matrix(d, d, d, rng);
        layer.w_v = init_matrix(d, d, d, rng);
        layer.w_o = init_matrix(d, d, d, rng);
        layer.b_o = init_matrix(1, d, d, rng);
        const auto ff = static_cast<std::size_t>(cfg_.d_ff);
        layer.w_ff1 = init_matrix(d, ff, d, rng);
        layer.b_ff1 = init_matrix(1, ff, d, rng);
        layer.w_ff2 = init_matrix(ff, d, ff, rng);
        layer.b_ff2 = init_matrix(1, d, ff, rng);
        layers_.push_back(std::move(layer));
    }
    w_head_ = init_matrix(d, static_cast<std::size_t>(cfg_.n_qubits), d, rng);
    b_head_ = init_matrix(1, static_cast<std::size_t>(cfg_.n_qubits), d, rng);
}

ad::NodePtr Encoder::encode(const std::vector<double>& x, EncodeTrace* trace) const {
    Tensor tokens = tokenize(x, cfg_);
    if (tokens.cols() != static_cast<std::size_t>(token_dim_))
        throw DimensionError("encode: input token dim " + std::to_string(tokens.cols()) +
                             " does not match encoder token dim " + std::to_string(token_dim_));
    const std::size_t T = tokens.rows();
    const auto d = static_cast<std::size_t>(cfg_.d_model);
    const std::size_t n_heads = static_cast<std::size_t>(cfg_.n_heads);
    const std::size_t d_k = d / n_heads;
    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(d_k));

    NodePtr h = ad::add_rowvec(ad::matmul(ad::constant(std::move(tokens)), w_embed_), b_embed_);
    h = ad::add(h, ad::constant(positional_encoding(T, d)));

    for (const Layer& layer : layers_) {
        NodePtr q = ad::matmul(h, layer.w_q);
        NodePtr k = ad::matmul(h, layer.w_k);
        NodePtr v = ad::matmul(h, layer.w_v);
        std::vector<NodePtr> heads;
        heads.reserve(n_heads);
        for (std::size_t hd = 0; hd < n_heads; ++hd) {
            const std::size_t c0 = hd * d_k, c1 = (hd + 1) * d_k;
            NodePtr qh = ad::slice_cols(q, c0, c1);
            NodePtr kh = ad::slice_cols(k, c0, c1);
            NodePtr vh = ad::slice_cols(v, c0, c1);
            NodePtr attn =
                ad::softmax_rows(ad::scale(ad::matmul(qh, ad::transpose(kh)), attn_scale));
            if (trace) trace->attention.push_back(attn->value);
            heads.push_back(ad::matmul(attn, vh));
        }
        NodePtr mixed = n_heads == 1 ? heads[0] : ad::concat_cols(heads);
        h = ad::add(h, ad::add_rowvec(ad::matmul(mixed, layer.w_o), layer.b_o));
        NodePtr ff = ad::relu(ad::add_rowvec(ad::matmul(h, layer.w_ff1), layer.b_ff1));
        h = ad::add(h, ad::add_rowvec(ad::matmul(ff, layer.w_ff2), layer.b_ff2));
    }

    NodePtr pooled = ad::mean_rows(h);
    return ad::add_rowvec(ad::matmul(pooled, w_head_), b_head_);
}

std::vector<ad::NodePtr> Encoder::parameters() const {
    std::vector<NodePtr> params{w_embed_, b_embed_};
    for (const Layer& l : layers_) {
        params.insert(params.end(),
                      {l.w_q, l.w_k, l.w_v, l.w_o, l.b_o, l.w_ff1, l.b_ff1, l.w_ff2, l.b_ff2});
    }
    params.push_back(w_head_);
    params.push_back(b_head_);
    return params;
}

std::size_t Encoder::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p->value.numel();
    return n;
}

namespace {

constexpr char kEncoderMagic[4] = {'G', 'T', 'Q', '1'};
constexpr std::uint32_t kEncoderVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
    write_u32(os, static_cast<std::uint32_t>(v));
    write_u32(os, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw FormatError("encoder record: truncated");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& is) {
    const std::uint64_t lo = read_u32(is);
    const std::uint64_t hi = read_u32(is);
    return lo | (hi << 32);
}

void write_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}

double read_f64(std::istream& is) {
    const std::uint64_t bits = read_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace

void Encoder::save(std::ostream& os) const {
    os.write(kEncoderMagic, 4);
    write_u32(os, kEncoderVersion);
    write_u32(os, static_cast<std::uint32_t>(cfg_.d_model));
    write_u32(os, static_cast<std::uint32_t>(cfg_.n_heads));
    write_u32(os, static_cast<std::uint32_t>(cfg_.n_layers));
    write_u32(os, static_cast<std::uint32_t>(cfg_.d_ff));
    write_u32(os, static_cast<std::uint32_t>(cfg_.n_qubits));
    write_u32(os, cfg_.token_mode == TokenMode::Patch ? 1 : 0);
    write_u32(os, static_cast<std::uint32_t>(cfg_.patch));
    write_u64(os, cfg_.seed);
    write_u32(os, static_cast<std::uint32_t>(token_dim_));
    const auto params = parameters();
    write_u32(os, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        write_u32(os, static_cast<std::uint32_t>(p->value.shape.size()));
        for (std::size_t dim : p->value.shape) write_u32(os, static_cast<std::uint32_t>(dim));
    }
    for (const auto& p : params)
        for (double v : p->value.data) write_f64(os, v);
    if (!os) throw IoError("encoder record: write failed");
}

Encoder Encoder::load(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kEncoderMagic, 4) != 0)
        throw FormatError("encoder record: bad magic");
    const std::uint32_t version = read_u32(is);
    if (version != kEncoderVersion)
        throw FormatError("encoder record: unsupported version " + std::to_string(version));
    TransformerConfig cfg;
    cfg.d_model = static_cast<int>(read_u32(is));
    cfg.n_heads = static_cast<int>(read_u32(is));
    cfg.n_layers = static_cast<int>(read_u32(is));
    cfg.d_ff = static_cast<int>(read_u32(is));
    cfg.n_qubits = static_cast<int>(read_u32(is));
    cfg.token_mode = read_u32(is) == 1 ? TokenMode::Patch : TokenMode::Scalar;
    cfg.patch = static_cast<int>(read_u32(is));
    cfg.seed = read_u64(is);
    const int token_dim = static_cast<int>(read_u32(is));

    Encoder enc(cfg, token_dim);
    const auto params = enc.parameters();
    const std::uint32_t count = read_u32(is);
    if (count != params.size())
        throw FormatError("encoder record: parameter count mismatch");
    for (const auto& p : params) {
        const std::uint32_t ndim = read_u32(is);
        std::vector<std::size_t> shape(ndim);
        for (auto& dim : shape) dim = read_u32(is);
        if (shape != p->value.shape)
            throw FormatError("encoder record: tensor shape mismatch");
    }
    for (const auto& p : params)
        for (double& v : p->value.data) v = read_f64(is);
    return enc;
}

} // namespace gtq
