#pragma once

#include "evoir/genome.hpp"
#include "evoir/ir.hpp"
#include "evoir/nsga.hpp"
#include "evoir/operators.hpp"
#include "evoir/rng.hpp"
#include "evoir/vm.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace evoir {

struct Budget {
    enum class Kind : uint8_t { Generations, WallClock } kind = Kind::Generations;
    int generations = 30;
    double seconds = 0.0;

    static Budget for_generations(int n) { return {Kind::Generations, n, 0.0}; }
    static Budget for_wallclock(double s) { return {Kind::WallClock, 0, s}; }
};

struct SearchConfig {
    int pop_size = 256;        // must be >= 4 and divisible by 4 (elite quarter)
    double cross_rate = 0.80;
    double mutate_rate = 0.30;
    int init_dist = 3;         // mutations applied to each initial individual
    double tolerance = 0.0;    // 0: exact mode; relaxed mode typically 0.01
    Budget budget = Budget::for_generations(30);
    uint64_t master_seed = 0;
    int mutation_retries = 50;  // attempts per mutation call
    int crossover_retries = 20; // attempts per recombination
    int jobs = 1;               // concurrent fitness evaluations
    int64_t instruction_budget = 1'000'000;
    CostTable cost_table;

    void check() const {
        if (pop_size < 4 || pop_size % 4 != 0)
            throw std::invalid_argument("pop_size must be >= 4 and divisible by 4");
        if (cross_rate < 0 || cross_rate > 1 || mutate_rate < 0 || mutate_rate > 1)
            throw std::invalid_argument("rates must be within [0, 1]");
    }
};

struct InitFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OperatorStats {
    int64_t attempts[kOperatorCount] = {};
    int64_t accepts[kOperatorCount] = {};
    int64_t mut_exhausted = 0;
    int64_t cx_attempts = 0;
    int64_t cx_accepts = 0;
    int64_t cx_exhausted = 0;

    int64_t total_attempts() const {
        int64_t n = 0;
        for (int64_t a : attempts)
            n += a;
        return n;
    }
    int64_t total_accepts() const {
        int64_t n = 0;
        for (int64_t a : accepts)
            n += a;
        return n;
    }
    void merge(const OperatorStats& o) {
        for (int i = 0; i < kOperatorCount; ++i) {
            attempts[i] += o.attempts[i];
            accepts[i] += o.accepts[i];
        }
        mut_exhausted += o.mut_exhausted;
        cx_attempts += o.cx_attempts;
        cx_accepts += o.cx_accepts;
        cx_exhausted += o.cx_exhausted;
    }
};

struct GenerationLog {
    int gen = 0;
    double best_cost_err0 = 0.0; // min cost among exact individuals (pop + archive)
    double best_cost_tol = 0.0;  // min cost within tolerance
    double min_error = 0.0;
    int front0_size = 0;
    int64_t mut_attempts = 0;
    int64_t mut_accepts = 0;
    int64_t cx_attempts = 0;
    int64_t cx_accepts = 0;
};

struct ArchiveEntry {
    Individual ind;
    bool overfit = false;         // failed held-out validation
    double heldout_error = -1.0;  // -1 until validated; 1.0 on held-out trap
};

struct SearchResult {
    std::vector<Individual> population;
    std::vector<ArchiveEntry> archive; // mutually non-dominating, insertion order
    std::vector<GenerationLog> log;    // row 0 is the initial population
    OperatorStats stats;
    FitnessVector baseline;
    int best_index = -1; // archive index of the best non-overfit entry, -1 if none
    int generations_run = 0;
};

// Algorithm: tournament offspring + elite quarter, pairwise messy crossover
// at cross_rate, per-individual mutation at mutate_rate, rank the union,
// truncate back to pop_size. Exposed as a class so the per-phase operations
// stay individually testable.
class Engine {
public:
    // Throws InitFailure when the original is invalid or fails its own
    // oracle at error zero.
    Engine(Kernel original, SearchConfig cfg, std::vector<TestCase> tests);

    // pop_size individuals, each the original plus init_dist accepted
    // mutations. Throws InitFailure when a slot exhausts its retries.
    void initialize_population();

    // Draw-and-test loop: apply one random mutation, keep the variant when
    // it validates and stays within tolerance on every test; retry up to
    // the cap, returning the input unchanged on exhaustion.
    Individual mutate_until_valid(const Individual& ind, Rng& rng, OperatorStats& stats) const;

    // Messy crossover with the same accept gate on both children; parents
    // come back unchanged when the retry cap runs out.
    std::pair<Individual, Individual> crossover_until_valid(const Individual& a,
                                                            const Individual& b, Rng& rng,
                                                            OperatorStats& stats) const;

    void step_generation();

    // Full search: initialize, loop to budget, validate the archive against
    // held-out tests, mark OVERFIT entries and pick the best survivor.
    SearchResult run(const std::vector<TestCase>& heldout);

    const std::vector<Individual>& population() const { return population_; }
    const Kernel& original() const { return original_; }
    const ExecConfig& exec_config() const { return exec_; }
    const FitnessVector& baseline() const { return baseline_; }
    int generation() const { return generation_; }

    // validate() + evaluate_fitness in one step: the sanity check every
    // candidate variant must pass before it may enter the population.
    EvalOutcome sanity_check(const Kernel& k) const;

private:
    Kernel original_;
    SearchConfig cfg_;
    std::vector<TestCase> tests_;
    ExecConfig exec_;
    FitnessVector baseline_;

    std::vector<Individual> population_;
    ParetoRank rank_;
    std::vector<ArchiveEntry> archive_;
    std::vector<GenerationLog> log_;
    OperatorStats stats_;
    int generation_ = 0;

    void archive_add(const Individual& ind);
    void rank_current();
    void log_generation(const OperatorStats& gen_stats);
    std::vector<FitnessVector> population_fitness() const;
};

SearchResult run_search(const Kernel& original, const SearchConfig& cfg,
                        const std::vector<TestCase>& tests,
                        const std::vector<TestCase>& heldout);

} // namespace evoir
