#include "gtq/genome.hpp"

#include <algorithm>

#include "gtq/errors.hpp"

namespace gtq {

Genome::Genome(int n, std::vector<std::uint8_t> b) : n_qubits(n), bits(std::move(b)) {
    if (n_qubits < 2) throw ContractError("genome: need at least 2 qubits");
    if (bits.size() != genome_length(n_qubits))
        throw ContractError("genome: expected " + std::to_string(genome_length(n_qubits)) +
                            " bits, got " + std::to_string(bits.size()));
    for (std::uint8_t v : bits)
        if (v > 1) throw ContractError("genome: bits must be 0 or 1");
}

int Genome::popcount() const {
    int c = 0;
    for (std::uint8_t b : bits) c += b;
    return c;
}

bool Genome::operator<(const Genome& o) const {
    if (n_qubits != o.n_qubits) return n_qubits < o.n_qubits;
    return std::lexicographical_compare(bits.begin(), bits.end(), o.bits.begin(), o.bits.end());
}

std::size_t genome_length(int n_qubits) {
    return static_cast<std::size_t>(n_qubits) * (n_qubits - 1) / 2;
}

std::size_t pair_index(int i, int j, int n) {
    if (i < 0 || i >= j || j >= n)
        throw ContractError("pair_index: need 0 <= i < j < n");
    // rank among pairs in lexicographic order
    const std::size_t si = static_cast<std::size_t>(i);
    return si * n - si * (si + 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

CircuitSpec decode(const Genome& g) {
    const int n = g.n_qubits;
    CircuitSpec spec;
    spec.n_input_slots = n;
    spec.gates.reserve(2 * n + 2 * g.popcount());
    for (int q = 0; q < n; ++q)
        spec.gates.push_back({qsim::GateKind::H, q, -1, -1});
    for (int q = 0; q < n; ++q)
        spec.gates.push_back({qsim::GateKind::RY, q, -1, q});
    // Set bits in ascending pair order; control = min, target = max,
    // RY on the target. Theta slots assigned in emission order.
    int theta = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (!g.bits[pair_index(i, j, n)]) continue;
            spec.gates.push_back({qsim::GateKind::CNOT, i, j, -1});
            spec.gates.push_back({qsim::GateKind::RY, j, -1, n + theta});
            ++theta;
        }
    }
    spec.n_theta_slots = theta;
    return spec;
}

int gate_count(const Genome& g) { return 2 * g.n_qubits + 2 * g.popcount(); }

Genome random_genome(int n_qubits, Rng& rng) {
    std::vector<std::uint8_t> bits(genome_length(n_qubits));
    for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : 0;
    return Genome(n_qubits, std::move(bits));
}

std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, double p_c, Rng& rng) {
    if (a.n_qubits != b.n_qubits)
        throw ContractError("crossover: qubit counts differ");
    const std::size_t len = a.length();
    const bool do_cross = rng.bernoulli(p_c);
    if (!do_cross || len < 2) return {a, b};
    // single-point: cut in [1, len-1], swap tails
    const std::size_t cut = 1 + static_cast<std::size_t>(rng.below(len - 1));
    Genome c1 = a, c2 = b;
    for (std::size_t i = cut; i < len; ++i) std::swap(c1.bits[i], c2.bits[i]);
    return {c1, c2};
}

Genome mutate(const Genome& g, double p_m, Rng& rng) {
    if (p_m < 0.0 || p_m > 1.0) throw ContractError("mutate: p_m must be in [0,1]");
    Genome out = g;
    for (auto& b : out.bits)
        if (rng.bernoulli(p_m)) b ^= 1;
    return out;
}

std::string to_text(const Genome& g) {
    std::string s = std::to_string(g.n_qubits) + ":";
    for (std::uint8_t b : g.bits) s += b ? '1' : '0';
    return s;
}

Genome genome_from_text(const std::string& text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw FormatError("genome text must look like \"N:bits\": " + text);
    int n = 0;
    try {
        std::size_t used = 0;
        n = std::stoi(text.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw FormatError("genome text has a bad qubit count: " + text);
    }
    if (n < 2) throw FormatError("genome text needs at least 2 qubits: " + text);
    const std::string bits = text.substr(colon + 1);
    if (bits.size() != genome_length(n))
        throw FormatError("genome text for " + std::to_string(n) + " qubits needs " +
                          std::to_string(genome_length(n)) + " bits, got " +
                          std::to_string(bits.size()));
    std::vector<std::uint8_t> out;
    out.reserve(bits.size());
    for (char c : bits) {
        if (c != '0' && c != '1') throw FormatError("genome bits must be 0/1: " + text);
        out.push_back(c == '1' ? 1 : 0);
    }
    return Genome(n, std::move(out));
}

} // namespace gtq
