#pragma once

#include "evoir/rng.hpp"
#include "evoir/vm.hpp"

#include <vector>

namespace evoir {

// Pareto dominance for minimization on (cost, error): strictly better on at
// least one objective, no worse on the other.
bool dominates(const FitnessVector& a, const FitnessVector& b);

// Fast non-dominated sort. Returns index sets F0, F1, ... where each front
// is the non-dominated subset once earlier fronts are removed.
std::vector<std::vector<int>> nondominated_sort(const std::vector<FitnessVector>& fits);

// Crowding distance within one front: per-objective neighbor-gap sum
// normalized by the objective's range; boundary points get +infinity; an
// objective with zero range contributes nothing. Objective sorts break ties
// with the other objective and then the stable index so that both
// objective-wise minima always sit on a boundary.
std::vector<double> crowding_distance(const std::vector<FitnessVector>& front);

// Per-individual rank data for a whole population.
struct ParetoRank {
    std::vector<int> front;               // front index per individual (0 best)
    std::vector<double> crowding;         // crowding per individual
    std::vector<std::vector<int>> fronts; // same partition as nondominated_sort
};

ParetoRank rank_population(const std::vector<FitnessVector>& fits);

// k binary tournaments with replacement. Lower front wins, ties fall to
// higher crowding, remaining ties to a coin flip. Returns selected indices.
std::vector<int> tournament_select(const ParetoRank& rank, size_t pop_size, size_t k, Rng& rng);

// Truncation: whole fronts in order, the last partial front filled by
// descending crowding, residual ties by ascending index. n must not exceed
// the population size.
std::vector<int> select_best(const ParetoRank& rank, size_t n);

} // namespace evoir
