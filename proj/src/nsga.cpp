#include "evoir/nsga.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace evoir {

bool dominates(const FitnessVector& a, const FitnessVector& b) {
    if (a.cost > b.cost || a.error > b.error)
        return false;
    return a.cost < b.cost || a.error < b.error;
}

std::vector<std::vector<int>> nondominated_sort(const std::vector<FitnessVector>& fits) {
    const int n = static_cast<int>(fits.size());
    std::vector<std::vector<int>> dominated_by(n); // i -> those i dominates
    std::vector<int> dominators(n, 0);             // count of those dominating i

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j)
                continue;
            if (dominates(fits[i], fits[j])) {
                dominated_by[i].push_back(j);
                ++dominators[j];
            }
        }

    std::vector<std::vector<int>> fronts;
    std::vector<int> current;
    for (int i = 0; i < n; ++i)
        if (dominators[i] == 0)
            current.push_back(i);
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<int> next;
        for (int i : current)
            for (int j : dominated_by[i])
                if (--dominators[j] == 0)
                    next.push_back(j);
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<FitnessVector>& front) {
    const size_t n = front.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }

    auto accumulate_objective = [&](auto key, auto tie) {
        std::vector<size_t> order(n);
        for (size_t i = 0; i < n; ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (key(front[a]) != key(front[b]))
                return key(front[a]) < key(front[b]);
            if (tie(front[a]) != tie(front[b]))
                return tie(front[a]) < tie(front[b]);
            return a < b;
        });
        double lo = key(front[order.front()]);
        double hi = key(front[order.back()]);
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        if (hi <= lo)
            return; // zero range: no contribution, no division blow-up
        for (size_t i = 1; i + 1 < n; ++i) {
            if (dist[order[i]] == inf)
                continue;
            dist[order[i]] += (key(front[order[i + 1]]) - key(front[order[i - 1]])) / (hi - lo);
        }
    };

    accumulate_objective([](const FitnessVector& f) { return f.cost; },
                         [](const FitnessVector& f) { return f.error; });
    accumulate_objective([](const FitnessVector& f) { return f.error; },
                         [](const FitnessVector& f) { return f.cost; });
    return dist;
}

ParetoRank rank_population(const std::vector<FitnessVector>& fits) {
    ParetoRank rank;
    rank.fronts = nondominated_sort(fits);
    rank.front.assign(fits.size(), -1);
    rank.crowding.assign(fits.size(), 0.0);
    for (size_t f = 0; f < rank.fronts.size(); ++f) {
        std::vector<FitnessVector> members;
        members.reserve(rank.fronts[f].size());
        for (int i : rank.fronts[f])
            members.push_back(fits[static_cast<size_t>(i)]);
        std::vector<double> dist = crowding_distance(members);
        for (size_t m = 0; m < rank.fronts[f].size(); ++m) {
            int idx = rank.fronts[f][m];
            rank.front[static_cast<size_t>(idx)] = static_cast<int>(f);
            rank.crowding[static_cast<size_t>(idx)] = dist[m];
        }
    }
    return rank;
}

std::vector<int> tournament_select(const ParetoRank& rank, size_t pop_size, size_t k, Rng& rng) {
    std::vector<int> out;
    out.reserve(k);
    for (size_t t = 0; t < k; ++t) {
        int a = static_cast<int>(rng.index(pop_size));
        int b = static_cast<int>(rng.index(pop_size));
        int winner;
        if (rank.front[a] != rank.front[b])
            winner = rank.front[a] < rank.front[b] ? a : b;
        else if (rank.crowding[a] != rank.crowding[b])
            winner = rank.crowding[a] > rank.crowding[b] ? a : b;
        else
            winner = rng.index(2) == 0 ? a : b;
        out.push_back(winner);
    }
    return out;
}

std::vector<int> select_best(const ParetoRank& rank, size_t n) {
    assert(n <= rank.front.size());
    std::vector<int> out;
    out.reserve(n);
    for (const auto& front : rank.fronts) {
        if (out.size() + front.size() <= n) {
            out.insert(out.end(), front.begin(), front.end());
            if (out.size() == n)
                break;
            continue;
        }
        std::vector<int> partial = front;
        std::sort(partial.begin(), partial.end(), [&](int a, int b) {
            if (rank.crowding[a] != rank.crowding[b])
                return rank.crowding[a] > rank.crowding[b];
            return a < b;
        });
        partial.resize(n - out.size());
        out.insert(out.end(), partial.begin(), partial.end());
        break;
    }
    return out;
}

} // namespace evoir
