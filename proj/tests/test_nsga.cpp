#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evoir/nsga.hpp"
#include "evoir/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace evoir;

namespace {

FitnessVector fv(double c, double e) { return {c, e}; }

std::vector<std::vector<int>> brute_force_fronts(const std::vector<FitnessVector>& fits) {
    std::vector<std::vector<int>> fronts;
    std::set<int> remaining;
    for (size_t i = 0; i < fits.size(); ++i)
        remaining.insert(static_cast<int>(i));
    while (!remaining.empty()) {
        std::vector<int> front;
        for (int i : remaining) {
            bool dominated = false;
            for (int j : remaining)
                if (j != i && dominates(fits[j], fits[i]))
                    dominated = true;
            if (!dominated)
                front.push_back(i);
        }
        fronts.push_back(front);
        for (int i : front)
            remaining.erase(i);
    }
    return fronts;
}

} // namespace

TEST_CASE("dominance relation") {
    CHECK(dominates(fv(1, 2), fv(2, 3)));
    CHECK(dominates(fv(1, 3), fv(2, 3)));
    CHECK_FALSE(dominates(fv(1, 3), fv(3, 1)));
    CHECK_FALSE(dominates(fv(3, 1), fv(1, 3)));
    CHECK_FALSE(dominates(fv(2, 2), fv(2, 2)));
}

TEST_CASE("dominance is a strict partial order on random vectors") {
    Rng rng(17);
    std::vector<FitnessVector> v;
    for (int i = 0; i < 60; ++i)
        v.push_back(fv(rng.index(6), rng.index(6)));
    for (const auto& a : v)
        CHECK_FALSE(dominates(a, a)); // irreflexive
    for (const auto& a : v)
        for (const auto& b : v)
            if (dominates(a, b))
                CHECK_FALSE(dominates(b, a)); // antisymmetric
    for (const auto& a : v)
        for (const auto& b : v)
            for (const auto& c : v)
                if (dominates(a, b) && dominates(b, c))
                    CHECK(dominates(a, c)); // transitive
}

TEST_CASE("textbook front split") {
    std::vector<FitnessVector> fits{fv(1, 3), fv(3, 1), fv(2, 2), fv(4, 4)};
    auto fronts = nondominated_sort(fits);
    REQUIRE(fronts.size() == 2);
    CHECK(std::set<int>(fronts[0].begin(), fronts[0].end()) == std::set<int>{0, 1, 2});
    CHECK(fronts[1] == std::vector<int>{3});
}

TEST_CASE("identical fitnesses form one front") {
    std::vector<FitnessVector> fits(5, fv(2, 2));
    auto fronts = nondominated_sort(fits);
    REQUIRE(fronts.size() == 1);
    CHECK(fronts[0].size() == 5);
}

TEST_CASE("random instances match the brute-force oracle") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        size_t n = 1 + rng.index(64);
        std::vector<FitnessVector> fits;
        for (size_t i = 0; i < n; ++i)
            fits.push_back(fv(static_cast<double>(rng.index(20)), static_cast<double>(rng.index(20))));
        auto got = nondominated_sort(fits);
        auto want = brute_force_fronts(fits);
        REQUIRE(got.size() == want.size());
        for (size_t f = 0; f < got.size(); ++f) {
            CHECK(std::set<int>(got[f].begin(), got[f].end()) ==
                  std::set<int>(want[f].begin(), want[f].end()));
        }
    }
}

TEST_CASE("fronts partition the population and respect layer dominance") {
    Rng rng(3);
    std::vector<FitnessVector> fits;
    for (int i = 0; i < 50; ++i)
        fits.push_back(fv(rng.index(10), rng.index(10)));
    auto fronts = nondominated_sort(fits);

    std::set<int> all;
    for (const auto& f : fronts)
        for (int i : f)
            CHECK(all.insert(i).second);
    CHECK(all.size() == fits.size());

    // Every member of F_k (k>0) is dominated by someone in an earlier front.
    for (size_t k = 1; k < fronts.size(); ++k)
        for (int i : fronts[k]) {
            bool dominated = false;
            for (size_t e = 0; e < k; ++e)
                for (int j : fronts[e])
                    if (dominates(fits[j], fits[i]))
                        dominated = true;
            CHECK(dominated);
        }
}

TEST_CASE("crowding distance") {
    SUBCASE("small fronts are all boundary") {
        auto d1 = crowding_distance({fv(1, 1)});
        CHECK(std::isinf(d1[0]));
        auto d2 = crowding_distance({fv(1, 2), fv(2, 1)});
        CHECK(std::isinf(d2[0]));
        CHECK(std::isinf(d2[1]));
    }
    SUBCASE("middle point of a three-point front") {
        auto d = crowding_distance({fv(1, 3), fv(2, 2), fv(3, 1)});
        CHECK(std::isinf(d[0]));
        CHECK(std::isinf(d[2]));
        CHECK(d[1] == doctest::Approx(2.0));
    }
    SUBCASE("duplicates stay finite and non-negative") {
        auto d = crowding_distance({fv(2, 2), fv(2, 2), fv(2, 2), fv(2, 2)});
        int infinities = 0;
        for (double x : d) {
            CHECK(x >= 0.0);
            if (std::isinf(x))
                ++infinities;
        }
        CHECK(infinities >= 2);
        // Zero range on both objectives: no division blow-up.
        for (double x : d)
            CHECK_FALSE(std::isnan(x));
    }
}

TEST_CASE("tournament selection") {
    SUBCASE("population of one is the forced winner") {
        ParetoRank rank = rank_population({fv(1, 1)});
        Rng rng(1);
        auto sel = tournament_select(rank, 1, 7, rng);
        CHECK(sel == std::vector<int>(7, 0));
    }
    SUBCASE("front zero always beats front two when they meet") {
        // idx 0 dominates idx 1 dominates idx 2. Sampling is with
        // replacement, so idx 2 can still win by drawing itself twice:
        // exactly 1/9 of tournaments.
        ParetoRank rank = rank_population({fv(1, 1), fv(2, 2), fv(3, 3)});
        REQUIRE(rank.front[0] == 0);
        REQUIRE(rank.front[2] == 2);
        Rng rng(2);
        const int n = 30000;
        auto sel = tournament_select(rank, 3, n, rng);
        int wins[3] = {0, 0, 0};
        for (int idx : sel)
            wins[idx]++;
        // Expected win rates: 5/9, 3/9, 1/9.
        CHECK(std::abs(wins[0] - n * 5.0 / 9.0) < 300);
        CHECK(std::abs(wins[1] - n * 3.0 / 9.0) < 300);
        CHECK(std::abs(wins[2] - n * 1.0 / 9.0) < 300);
    }
    SUBCASE("selection pressure favors the first front") {
        std::vector<FitnessVector> fits;
        for (int i = 0; i < 8; ++i)
            fits.push_back(fv(i, 7 - i)); // front 0
        for (int i = 0; i < 8; ++i)
            fits.push_back(fv(i + 5, 12 - i)); // dominated layer
        ParetoRank rank = rank_population(fits);
        Rng rng(3);
        auto sel = tournament_select(rank, fits.size(), 10000, rng);
        std::map<int, int> by_front;
        for (int idx : sel)
            by_front[rank.front[static_cast<size_t>(idx)]]++;
        CHECK(by_front[0] > by_front[1]);
        CHECK(by_front[0] > 6000);
    }
}

TEST_CASE("select_best") {
    std::vector<FitnessVector> fits{fv(1, 9), fv(9, 1), fv(5, 5), fv(6, 6), fv(2, 2)};
    ParetoRank rank = rank_population(fits);

    SUBCASE("n equal to population returns everyone") {
        auto sel = select_best(rank, fits.size());
        CHECK(std::set<int>(sel.begin(), sel.end()) == std::set<int>{0, 1, 2, 3, 4});
    }
    SUBCASE("n equal to the first front returns exactly it") {
        auto f0 = nondominated_sort(fits)[0];
        auto sel = select_best(rank, f0.size());
        CHECK(std::set<int>(sel.begin(), sel.end()) == std::set<int>(f0.begin(), f0.end()));
    }
}

TEST_CASE("select_best matches the lexicographic (front, crowding, index) oracle") {
    Rng rng(404);
    for (int trial = 0; trial < 500; ++trial) {
        size_t n = 1 + rng.index(64);
        std::vector<FitnessVector> fits;
        for (size_t i = 0; i < n; ++i)
            fits.push_back(fv(rng.index(12), rng.index(12)));
        ParetoRank rank = rank_population(fits);
        size_t take = 1 + rng.index(n);

        std::vector<int> oracle(n);
        for (size_t i = 0; i < n; ++i)
            oracle[i] = static_cast<int>(i);
        std::sort(oracle.begin(), oracle.end(), [&](int a, int b) {
            if (rank.front[a] != rank.front[b])
                return rank.front[a] < rank.front[b];
            if (rank.crowding[a] != rank.crowding[b])
                return rank.crowding[a] > rank.crowding[b];
            return a < b;
        });
        oracle.resize(take);

        auto got = select_best(rank, take);
        std::sort(got.begin(), got.end());
        std::sort(oracle.begin(), oracle.end());
        CHECK(got == oracle);
    }
}

TEST_CASE("objective-wise minima survive truncation") {
    // The error-0 minimum-cost point and the overall cost minimum both carry
    // infinite crowding, so any truncation that keeps at least the first
    // front's boundary keeps them.
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<FitnessVector> fits;
        size_t n = 6 + rng.index(40);
        for (size_t i = 0; i < n; ++i) {
            double err = rng.chance(0.4) ? 0.0 : rng.uniform();
            fits.push_back(fv(1.0 + static_cast<double>(rng.index(50)), err));
        }
        ParetoRank rank = rank_population(fits);
        size_t keep = std::max<size_t>(4, n / 2);
        auto sel = select_best(rank, keep);
        std::set<int> kept(sel.begin(), sel.end());

        // Lexicographic minima over (error, cost) and (cost, error).
        int best_err = 0, best_cost = 0;
        for (size_t i = 1; i < n; ++i) {
            if (fits[i].error < fits[best_err].error ||
                (fits[i].error == fits[best_err].error && fits[i].cost < fits[best_err].cost))
                best_err = static_cast<int>(i);
            if (fits[i].cost < fits[best_cost].cost ||
                (fits[i].cost == fits[best_cost].cost && fits[i].error < fits[best_cost].error))
                best_cost = static_cast<int>(i);
        }
        // Both sit in front zero with infinite crowding.
        CHECK(rank.front[best_err] == 0);
        CHECK(rank.front[best_cost] == 0);
        bool kept_err = kept.count(best_err) > 0;
        bool kept_cost = kept.count(best_cost) > 0;
        if (!kept_err || !kept_cost) {
            // Only possible when another individual with identical fitness
            // took the boundary slot.
            for (int candidate : {best_err, best_cost})
                if (!kept.count(candidate)) {
                    bool twin_kept = false;
                    for (int i : kept)
                        if (fits[static_cast<size_t>(i)] == fits[static_cast<size_t>(candidate)])
                            twin_kept = true;
                    CHECK(twin_kept);
                }
        }
    }
}
