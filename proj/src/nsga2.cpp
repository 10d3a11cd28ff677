#include "gtq/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <sstream>

#include "gtq/errors.hpp"

namespace gtq::nsga2 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Both objectives as minimized values.
inline double f1(const Individual& x) { return -x.obj.accuracy; }
inline double f2(const Individual& x) { return static_cast<double>(x.obj.gates); }

} // namespace

bool dominates(const Individual& a, const Individual& b) {
    const bool no_worse = f1(a) <= f1(b) && f2(a) <= f2(b);
    const bool strictly_better = f1(a) < f1(b) || f2(a) < f2(b);
    return no_worse && strictly_better;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop) {
    if (pop.empty()) throw ContractError("non_dominated_sort: empty population");
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<int> n_dominators(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (dominates(pop[i], pop[j]))
                dominated[i].push_back(j);
            else if (dominates(pop[j], pop[i]))
                ++n_dominators[i];
        }
        if (n_dominators[i] == 0) {
            pop[i].rank = 0;
            fronts[0].push_back(i);
        }
    }

    std::size_t k = 0;
    while (!fronts[k].empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : fronts[k]) {
            for (std::size_t j : dominated[i]) {
                if (--n_dominators[j] == 0) {
                    pop[j].rank = static_cast<int>(k) + 1;
                    next.push_back(j);
                }
            }
        }
        fronts.push_back(std::move(next));
        ++k;
    }
    fronts.pop_back(); // last front is empty by construction
    return fronts;
}

void crowding_distance(std::vector<Individual>& pop, const std::vector<std::size_t>& front) {
    for (std::size_t i : front) pop[i].crowding = 0.0;
    if (front.size() <= 2) {
        for (std::size_t i : front) pop[i].crowding = kInf;
        return;
    }
    const auto objectives = {+[](const Individual& x) { return f1(x); },
                             +[](const Individual& x) { return f2(x); }};
    for (auto objective : objectives) {
        std::vector<std::size_t> order(front);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return objective(pop[a]) < objective(pop[b]);
        });
        const double lo = objective(pop[order.front()]);
        const double hi = objective(pop[order.back()]);
        pop[order.front()].crowding = kInf;
        pop[order.back()].crowding = kInf;
        if (hi - lo <= 0.0) continue; // degenerate range contributes nothing
        for (std::size_t r = 1; r + 1 < order.size(); ++r) {
            if (pop[order[r]].crowding == kInf) continue;
            pop[order[r]].crowding +=
                (objective(pop[order[r + 1]]) - objective(pop[order[r - 1]])) / (hi - lo);
        }
    }
}

void EvolutionConfig::validate() const {
    if (population_size < 2 || offspring_size < 2)
        throw ConfigError("evolution: population and offspring sizes must be >= 2");
    if (generations < 0) throw ConfigError("evolution: generations must be >= 0");
    if (p_c < 0.0 || p_c > 1.0) throw ConfigError("evolution: p_c must be in [0,1]");
    if (p_m > 1.0) throw ConfigError("evolution: p_m must be in [0,1]");
    if (n_qubits < 2) throw ConfigError("evolution: n_qubits must be >= 2");
    if (n_threads < 1) throw ConfigError("evolution: n_threads must be >= 1");
}

double EvolutionConfig::mutation_rate() const {
    if (p_m >= 0.0) return p_m;
    return 1.0 / static_cast<double>(genome_length(n_qubits));
}

namespace {

Objectives worst_objectives(int n_qubits) {
    return {0.0, 2 * n_qubits + 2 * static_cast<int>(genome_length(n_qubits))};
}

// Evaluate a batch, each with its own derived seed. Failures become the
// worst objectives so a bad circuit cannot stall the search.
std::vector<Objectives> evaluate_all(const std::vector<Genome>& genomes,
                                     const EvaluateFn& evaluate, const EvolutionConfig& cfg,
                                     int generation, std::ostream* log) {
    std::vector<Objectives> out(genomes.size());
    auto eval_one = [&](std::size_t i) -> std::pair<Objectives, std::string> {
        const std::uint64_t s =
            derive_seed(cfg.seed, static_cast<std::uint64_t>(generation), i);
        try {
            return {evaluate(genomes[i], s), {}};
        } catch (const std::exception& e) {
            return {worst_objectives(cfg.n_qubits), e.what()};
        }
    };
    if (cfg.n_threads <= 1 || genomes.size() <= 1) {
        for (std::size_t i = 0; i < genomes.size(); ++i) {
            auto [obj, err] = eval_one(i);
            out[i] = obj;
            if (!err.empty() && log)
                *log << "evaluation failed (gen " << generation << ", idx " << i
                     << "): " << err << "\n";
        }
        return out;
    }
    std::vector<std::future<std::pair<Objectives, std::string>>> futures;
    futures.reserve(genomes.size());
    for (std::size_t i = 0; i < genomes.size(); ++i)
        futures.push_back(std::async(std::launch::async, eval_one, i));
    for (std::size_t i = 0; i < genomes.size(); ++i) {
        auto [obj, err] = futures[i].get();
        out[i] = obj;
        if (!err.empty() && log)
            *log << "evaluation failed (gen " << generation << ", idx " << i << "): " << err
                 << "\n";
    }
    return out;
}

// Binary tournament on (rank, crowding, seeded coin).
const Individual& tournament(const std::vector<Individual>& pop, Rng& rng) {
    const Individual& a = pop[rng.below(pop.size())];
    const Individual& b = pop[rng.below(pop.size())];
    if (a.rank != b.rank) return a.rank < b.rank ? a : b;
    if (a.crowding != b.crowding) return a.crowding > b.crowding ? a : b;
    return rng.bernoulli(0.5) ? a : b;
}

void sort_fronts_and_assign(std::vector<Individual>& pop,
                            std::vector<std::vector<std::size_t>>& fronts) {
    fronts = non_dominated_sort(pop);
    for (const auto& f : fronts) crowding_distance(pop, f);
}

std::vector<Individual> collect(const std::vector<Individual>& pop,
                                const std::vector<std::size_t>& idx) {
    std::vector<Individual> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(pop[i]);
    return out;
}

} // namespace

EvolutionResult evolve(const EvolutionConfig& cfg, const EvaluateFn& evaluate,
                       std::ostream* log, const GenerationHook& hook) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0x65766f, 0)); // selection/variation stream
    const double p_m = cfg.mutation_rate();

    std::vector<Genome> genomes;
    genomes.reserve(cfg.population_size);
    for (int i = 0; i < cfg.population_size; ++i) genomes.push_back(random_genome(cfg.n_qubits, rng));
    std::vector<Objectives> objs = evaluate_all(genomes, evaluate, cfg, 0, log);

    std::vector<Individual> pop(genomes.size());
    for (std::size_t i = 0; i < genomes.size(); ++i)
        pop[i] = Individual{std::move(genomes[i]), objs[i]};

    EvolutionResult result;
    std::vector<std::vector<std::size_t>> fronts;
    sort_fronts_and_assign(pop, fronts);
    result.front_history.push_back({0, collect(pop, fronts[0])});
    if (hook) hook(0, pop, fronts[0]);

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        // variation
        std::vector<Genome> offspring;
        offspring.reserve(cfg.offspring_size);
        while (static_cast<int>(offspring.size()) < cfg.offspring_size) {
            const Individual& pa = tournament(pop, rng);
            const Individual& pb = tournament(pop, rng);
            auto [c1, c2] = crossover(pa.genome, pb.genome, cfg.p_c, rng);
            offspring.push_back(mutate(c1, p_m, rng));
            if (static_cast<int>(offspring.size()) < cfg.offspring_size)
                offspring.push_back(mutate(c2, p_m, rng));
        }

        std::vector<Objectives> ofit = evaluate_all(offspring, evaluate, cfg, gen, log);

        // elitist merge and environmental selection
        std::vector<Individual> merged = pop;
        merged.reserve(pop.size() + offspring.size());
        for (std::size_t i = 0; i < offspring.size(); ++i)
            merged.push_back(Individual{std::move(offspring[i]), ofit[i]});

        auto merged_fronts = non_dominated_sort(merged);
        for (const auto& f : merged_fronts) crowding_distance(merged, f);

        std::vector<Individual> next;
        next.reserve(cfg.population_size);
        for (const auto& front : merged_fronts) {
            if (static_cast<int>(next.size() + front.size()) <= cfg.population_size) {
                for (std::size_t i : front) next.push_back(merged[i]);
            } else {
                std::vector<std::size_t> order(front);
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    if (merged[a].crowding != merged[b].crowding)
                        return merged[a].crowding > merged[b].crowding;
                    return merged[a].genome < merged[b].genome; // deterministic tail
                });
                for (std::size_t i : order) {
                    if (static_cast<int>(next.size()) >= cfg.population_size) break;
                    next.push_back(merged[i]);
                }
            }
            if (static_cast<int>(next.size()) >= cfg.population_size) break;
        }
        pop = std::move(next);

        sort_fronts_and_assign(pop, fronts);
        result.front_history.push_back({gen, collect(pop, fronts[0])});
        if (hook) hook(gen, pop, fronts[0]);
        if (log)
            *log << "gen " << gen << ": front0 size " << fronts[0].size() << ", best acc "
                 << std::max_element(pop.begin(), pop.end(),
                                     [](const Individual& a, const Individual& b) {
                                         return a.obj.accuracy < b.obj.accuracy;
                                     })
                        ->obj.accuracy
                 << "\n";
    }

    result.population = std::move(pop);
    return result;
}

std::vector<Individual> select_top_k(std::vector<Individual> front, int k) {
    if (k < 1) throw ContractError("select_top_k: k must be >= 1");
    std::sort(front.begin(), front.end(), [](const Individual& a, const Individual& b) {
        if (a.obj.accuracy != b.obj.accuracy) return a.obj.accuracy > b.obj.accuracy;
        if (a.obj.gates != b.obj.gates) return a.obj.gates < b.obj.gates;
        return a.genome < b.genome;
    });
    if (static_cast<int>(front.size()) > k) front.resize(k);
    return front;
}

void write_front_csv(std::ostream& os, const std::vector<GenerationRecord>& history) {
    os << "generation,genome,accuracy,gates,rank,crowding\n";
    std::ostringstream line;
    line.precision(12);
    for (const auto& rec : history) {
        for (const Individual& ind : rec.front) {
            line.str("");
            line << rec.generation << "," << to_text(ind.genome) << "," << ind.obj.accuracy
                 << "," << ind.obj.gates << "," << ind.rank << ",";
            if (ind.crowding == kInf)
                line << "inf";
            else
                line << ind.crowding;
            os << line.str() << "\n";
        }
    }
}

} // namespace gtq::nsga2
