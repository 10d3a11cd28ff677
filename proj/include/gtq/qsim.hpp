#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gtq/errors.hpp"

namespace gtq::qsim {

using cdouble = std::complex<double>;

enum class GateKind { H, RY, CNOT };

// Single gate instance. `param_slot` indexes the concatenated angle store
// (input angles first, trainable thetas after); -1 for parameterless gates.
struct GateOp {
    GateKind kind;
    int q0 = 0;       // target for H/RY, control for CNOT
    int q1 = -1;      // CNOT target
    int param_slot = -1;
};

// Exact n-qubit state, little-endian qubit ordering: qubit 0 is the least
// significant bit of the amplitude index.
class StateVector {
public:
    explicit StateVector(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    std::span<const cdouble> amplitudes() const { return amps_; }
    std::span<cdouble> amplitudes() { return amps_; }

    double norm_sq() const;

    void apply_h(int q);
    void apply_ry(int q, double theta);
    void apply_cnot(int control, int target);

private:
    void check_qubit(int q) const;

    int n_qubits_;
    std::vector<cdouble> amps_;
};

void apply_gate(StateVector& s, const GateOp& g, std::span<const double> angles);
void run_circuit(StateVector& s, std::span<const GateOp> circuit, std::span<const double> angles);

// <Z_j> for every qubit, exact from amplitudes.
std::vector<double> z_expectations(const StateVector& s);

// Multinomial draw from |a_i|^2; keys are bitstrings with qubit 0 rightmost.
std::map<std::string, int> sample_shots(const StateVector& s, int shots, std::uint64_t seed);

// d<Z_j>/d(slot m) for every (slot, qubit) pair via the +-pi/2 shift rule,
// exact for RY generators. Result is [n_slots x n_qubits] row-major.
std::vector<double> parameter_shift_grad(std::span<const GateOp> circuit,
                                         std::span<const double> angles, int n_qubits,
                                         std::size_t n_slots);

// Text diagram, one line per qubit, gates in circuit order.
std::string circuit_diagram(std::span<const GateOp> circuit, int n_qubits,
                            std::size_t n_input_slots);

} // namespace gtq::qsim
