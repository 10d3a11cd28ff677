#include "gtq/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gtq/rng.hpp"

namespace gtq::qsim {

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 24)
        throw ContractError("StateVector: qubit count out of range: " + std::to_string(n_qubits));
    amps_.assign(std::size_t{1} << n_qubits, cdouble{0.0, 0.0});
    amps_[0] = 1.0;
}

double StateVector::norm_sq() const {
    double s = 0.0;
    for (const cdouble& a : amps_) s += std::norm(a);
    return s;
}

void StateVector::check_qubit(int q) const {
    if (q < 0 || q >= n_qubits_)
        throw ContractError("qubit index out of range: " + std::to_string(q));
}

void StateVector::apply_h(int q) {
    check_qubit(q);
    const std::size_t bit = std::size_t{1} << q;
    const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) continue;
        const cdouble a0 = amps_[i];
        const cdouble a1 = amps_[i | bit];
        amps_[i] = (a0 + a1) * inv_sqrt2;
        amps_[i | bit] = (a0 - a1) * inv_sqrt2;
    }
}

void StateVector::apply_ry(int q, double theta) {
    check_qubit(q);
    const std::size_t bit = std::size_t{1} << q;
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) continue;
        const cdouble a0 = amps_[i];
        const cdouble a1 = amps_[i | bit];
        amps_[i] = c * a0 - s * a1;
        amps_[i | bit] = s * a0 + c * a1;
    }
}

void StateVector::apply_cnot(int control, int target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) throw ContractError("cnot: control equals target");
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & cbit) && !(i & tbit)) std::swap(amps_[i], amps_[i | tbit]);
    }
}

void apply_gate(StateVector& s, const GateOp& g, std::span<const double> angles) {
    switch (g.kind) {
        case GateKind::H:
            s.apply_h(g.q0);
            break;
        case GateKind::RY:
            if (g.param_slot < 0 || static_cast<std::size_t>(g.param_slot) >= angles.size())
                throw ContractError("apply_gate: RY param slot out of range");
            s.apply_ry(g.q0, angles[g.param_slot]);
            break;
        case GateKind::CNOT:
            s.apply_cnot(g.q0, g.q1);
            break;
    }
}

void run_circuit(StateVector& s, std::span<const GateOp> circuit, std::span<const double> angles) {
    for (const GateOp& g : circuit) apply_gate(s, g, angles);
}

std::vector<double> z_expectations(const StateVector& s) {
    std::vector<double> z(s.n_qubits(), 0.0);
    const auto amps = s.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        if (p == 0.0) continue;
        for (int q = 0; q < s.n_qubits(); ++q)
            z[q] += (i >> q) & 1 ? -p : p;
    }
    return z;
}

std::map<std::string, int> sample_shots(const StateVector& s, int shots, std::uint64_t seed) {
    if (shots < 1) throw ContractError("sample_shots: shots must be >= 1");
    const auto amps = s.amplitudes();
    std::vector<double> cdf(amps.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        acc += std::norm(amps[i]);
        cdf[i] = acc;
    }
    Rng rng(seed);
    std::map<std::string, int> hist;
    for (int t = 0; t < shots; ++t) {
        const double u = rng.uniform() * acc;
        const std::size_t idx = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        std::string bits(s.n_qubits(), '0');
        for (int q = 0; q < s.n_qubits(); ++q)
            if ((idx >> q) & 1) bits[s.n_qubits() - 1 - q] = '1'; // qubit 0 rightmost
        ++hist[bits];
    }
    return hist;
}

std::vector<double> parameter_shift_grad(std::span<const GateOp> circuit,
                                         std::span<const double> angles, int n_qubits,
                                         std::size_t n_slots) {
    for (const GateOp& g : circuit)
        if (g.param_slot >= 0 && g.kind != GateKind::RY)
            throw ContractError("parameter_shift_grad: only RY gates may carry parameters");

    std::vector<double> grad(n_slots * static_cast<std::size_t>(n_qubits), 0.0);
    std::vector<double> shifted(angles.begin(), angles.end());

    // Shift one gate occurrence at a time; occurrences sharing a slot sum.
    auto eval_with_gate_shift = [&](std::size_t gate_idx, double delta) {
        StateVector s(n_qubits);
        for (std::size_t gi = 0; gi < circuit.size(); ++gi) {
            const GateOp& g = circuit[gi];
            if (gi == gate_idx) {
                s.apply_ry(g.q0, angles[g.param_slot] + delta);
            } else {
                apply_gate(s, g, angles);
            }
        }
        return z_expectations(s);
    };

    constexpr double half_pi = std::numbers::pi / 2.0;
    for (std::size_t gi = 0; gi < circuit.size(); ++gi) {
        const GateOp& g = circuit[gi];
        if (g.param_slot < 0) continue;
        const std::vector<double> plus = eval_with_gate_shift(gi, half_pi);
        const std::vector<double> minus = eval_with_gate_shift(gi, -half_pi);
        for (int q = 0; q < n_qubits; ++q)
            grad[static_cast<std::size_t>(g.param_slot) * n_qubits + q] +=
                (plus[q] - minus[q]) / 2.0;
    }
    return grad;
}

std::string circuit_diagram(std::span<const GateOp> circuit, int n_qubits,
                            std::size_t n_input_slots) {
    // One column per gate; CNOT draws control 'o' and target 'X' in the
    // same column, other wires carry '|' between them for readability.
    std::vector<std::vector<std::string>> cells(
        static_cast<std::size_t>(n_qubits), std::vector<std::string>(circuit.size()));
    std::vector<std::size_t> width(circuit.size(), 1);

    auto slot_name = [&](int slot) {
        if (slot < static_cast<int>(n_input_slots)) return "x" + std::to_string(slot);
        return "t" + std::to_string(slot - static_cast<int>(n_input_slots));
    };

    for (std::size_t c = 0; c < circuit.size(); ++c) {
        const GateOp& g = circuit[c];
        switch (g.kind) {
            case GateKind::H:
                cells[g.q0][c] = "H";
                break;
            case GateKind::RY:
                cells[g.q0][c] = "RY(" + slot_name(g.param_slot) + ")";
                break;
            case GateKind::CNOT: {
                cells[g.q0][c] = "o";
                cells[g.q1][c] = "X";
                const int lo = std::min(g.q0, g.q1), hi = std::max(g.q0, g.q1);
                for (int q = lo + 1; q < hi; ++q) cells[q][c] = "|";
                break;
            }
        }
        for (int q = 0; q < n_qubits; ++q) width[c] = std::max(width[c], cells[q][c].size());
    }

    std::string out;
    for (int q = 0; q < n_qubits; ++q) {
        out += "q" + std::to_string(q) + ": -";
        for (std::size_t c = 0; c < circuit.size(); ++c) {
            std::string cell = cells[q][c];
            if (cell.empty()) cell = "-";
            while (cell.size() < width[c]) cell += "-";
            out += cell;
            out += "--";
        }
        out += "\n";
    }
    return out;
}

} // namespace gtq::qsim
