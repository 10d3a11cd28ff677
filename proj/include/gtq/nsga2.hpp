#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include "gtq/genome.hpp"

namespace gtq::nsga2 {

struct Objectives {
    double accuracy = 0.0; // maximized
    int gates = 0;         // minimized
};

struct Individual {
    Genome genome;
    Objectives obj;
    int rank = -1;
    double crowding = 0.0;
};

// a dominates b: internally both objectives are minimized (accuracy is
// negated), non-worse in all and strictly better in at least one.
bool dominates(const Individual& a, const Individual& b);

// Fast non-dominated sort. Sets rank on every individual and returns index
// fronts; the union of fronts is a partition of the population.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop);

// Standard crowding distance on one front: boundary members get +inf,
// interior members the sum of normalized neighbor gaps per objective.
// A degenerate objective range contributes 0.
void crowding_distance(std::vector<Individual>& pop, const std::vector<std::size_t>& front);

struct EvolutionConfig {
    int n_qubits = 3;
    int population_size = 20;
    int offspring_size = 20;
    int generations = 50;
    double p_c = 0.90;
    double p_m = -1.0; // < 0 means 1/genome_length
    std::uint64_t seed = 0;
    int n_threads = 1; // offspring evaluation concurrency

    void validate() const;
    double mutation_rate() const;
};

// Evaluation receives a per-individual seed derived as
// derive_seed(cfg.seed, generation, index) so parallel and serial runs
// produce identical results. A throwing evaluation is assigned the worst
// objectives and the run continues.
using EvaluateFn = std::function<Objectives(const Genome&, std::uint64_t eval_seed)>;

struct GenerationRecord {
    int generation = 0; // 0 = initial population
    std::vector<Individual> front; // front 0 after selection
};

struct EvolutionResult {
    std::vector<Individual> population;
    std::vector<GenerationRecord> front_history;
};

// Optional per-generation hook (population after selection plus its front-0
// indices); used by tests to verify non-domination against brute force.
using GenerationHook =
    std::function<void(int generation, const std::vector<Individual>& pop,
                       const std::vector<std::size_t>& front0)>;

EvolutionResult evolve(const EvolutionConfig& cfg, const EvaluateFn& evaluate,
                       std::ostream* log = nullptr, const GenerationHook& hook = nullptr);

// The k front members with highest accuracy; ties broken by fewer gates,
// then genome lexicographic order. Returns all when fewer than k exist.
std::vector<Individual> select_top_k(std::vector<Individual> front, int k);

// CSV dump: generation,genome,accuracy,gates,rank,crowding
void write_front_csv(std::ostream& os, const std::vector<GenerationRecord>& history);

} // namespace gtq::nsga2
