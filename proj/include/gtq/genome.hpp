#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gtq/qsim.hpp"
#include "gtq/rng.hpp"

namespace gtq {

// Search-space point: one bit per ordered qubit pair. A set bit inserts a
// CNOT followed by an RY on the target after the fixed H/RY(input) prefix.
struct Genome {
    int n_qubits = 0;
    std::vector<std::uint8_t> bits; // length n_qubits*(n_qubits-1)/2

    Genome() = default;
    Genome(int n, std::vector<std::uint8_t> b);

    std::size_t length() const { return bits.size(); }
    int popcount() const;

    bool operator==(const Genome& o) const = default;
    // lexicographic on (n_qubits, bits); used for deterministic tie-breaks
    bool operator<(const Genome& o) const;
};

// Decoded gate list. Input-angle slots are [0, n_input_slots); trainable
// theta slots follow at [n_input_slots, n_input_slots + n_theta_slots).
struct CircuitSpec {
    std::vector<qsim::GateOp> gates;
    int n_input_slots = 0;
    int n_theta_slots = 0;

    std::size_t total_slots() const {
        return static_cast<std::size_t>(n_input_slots + n_theta_slots);
    }
};

// Lexicographic rank of the pair (i, j), 0 <= i < j < n:
// (0,1),(0,2),...,(n-2,n-1).
std::size_t pair_index(int i, int j, int n);

std::size_t genome_length(int n_qubits);

CircuitSpec decode(const Genome& g);

// 2N + 2*popcount(bits): one H and one RY(input) per qubit, plus a
// CNOT+RY block per set bit.
int gate_count(const Genome& g);

Genome random_genome(int n_qubits, Rng& rng);
std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, double p_c, Rng& rng);
Genome mutate(const Genome& g, double p_m, Rng& rng);

// Text form "N:bitstring", e.g. "3:101".
std::string to_text(const Genome& g);
Genome genome_from_text(const std::string& text);

} // namespace gtq
