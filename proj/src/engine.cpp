#include "evoir/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace evoir {

namespace {

// Stream purposes: every random decision belongs to a labelled stream so
// results do not depend on evaluation concurrency.
enum StreamPurpose : uint64_t {
    kStreamInit = 1,
    kStreamTournament = 2,
    kStreamGateCross = 3,
    kStreamGateMutate = 4,
    kStreamCross = 5,
    kStreamMutate = 6,
};

void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    size_t workers = std::min<size_t>(static_cast<size_t>(jobs), n);
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n || failed.load())
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace

Engine::Engine(Kernel original, SearchConfig cfg, std::vector<TestCase> tests)
    : original_(std::move(original)), cfg_(std::move(cfg)), tests_(std::move(tests)) {
    cfg_.check();
    if (tests_.empty())
        throw InitFailure("no test cases");
    if (!is_valid(original_))
        throw InitFailure("original kernel fails validation");

    exec_ = ExecConfig::for_kernel(original_);
    exec_.instruction_budget = cfg_.instruction_budget;
    exec_.cost_table = cfg_.cost_table;

    EvalOutcome base = evaluate_fitness(original_, tests_, exec_, 0.0);
    if (!base.accepted)
        throw InitFailure("original kernel fails its own oracle: " + base.reason);
    baseline_ = base.fitness;

    // The identity variant anchors the archive: the exact-output axis is
    // never empty and gains are always measured against a real point.
    Individual origin;
    origin.kernel = original_;
    origin.fitness = baseline_;
    archive_add(origin);
}

EvalOutcome Engine::sanity_check(const Kernel& k) const {
    if (!is_valid(k))
        return EvalOutcome::rejected(-1, "validation failed");
    return evaluate_fitness(k, tests_, exec_, cfg_.tolerance);
}

Individual Engine::mutate_until_valid(const Individual& ind, Rng& rng,
                                      OperatorStats& stats) const {
    DomTree dom = DomTree::build(ind.kernel);
    MutationContext ctx(ind.kernel, dom, rng);
    for (int attempt = 0; attempt < cfg_.mutation_retries; ++attempt) {
        MutationResult m = random_mutation(ctx);
        if (!m)
            continue;
        int kind = static_cast<int>(operator_kind(*m));
        ++stats.attempts[kind];
        ApplyResult applied = apply_edit(ind.kernel, *m);
        if (!applied.applied)
            continue;
        EvalOutcome outcome = sanity_check(applied.kernel);
        if (!outcome.accepted)
            continue;
        ++stats.accepts[kind];
        Individual next;
        next.kernel = std::move(applied.kernel);
        next.patch = ind.patch;
        next.patch.push_back(*m);
        next.fitness = outcome.fitness;
        return next;
    }
    ++stats.mut_exhausted;
    return ind;
}

std::pair<Individual, Individual> Engine::crossover_until_valid(const Individual& a,
                                                                const Individual& b, Rng& rng,
                                                                OperatorStats& stats) const {
    for (int attempt = 0; attempt < cfg_.crossover_retries; ++attempt) {
        ++stats.cx_attempts;
        auto [pa, pb] = crossover_messy(a.patch, b.patch, rng);
        PatchResult ra = apply_patch(original_, pa);
        PatchResult rb = apply_patch(original_, pb);
        EvalOutcome ea = sanity_check(ra.kernel);
        if (!ea.accepted)
            continue;
        EvalOutcome eb = sanity_check(rb.kernel);
        if (!eb.accepted)
            continue;
        ++stats.cx_accepts;
        Individual ca, cb;
        ca.kernel = std::move(ra.kernel);
        ca.patch = std::move(ra.applied);
        ca.fitness = ea.fitness;
        cb.kernel = std::move(rb.kernel);
        cb.patch = std::move(rb.applied);
        cb.fitness = eb.fitness;
        return {std::move(ca), std::move(cb)};
    }
    ++stats.cx_exhausted;
    return {a, b};
}

void Engine::initialize_population() {
    population_.assign(static_cast<size_t>(cfg_.pop_size), Individual{});
    std::vector<OperatorStats> slot_stats(static_cast<size_t>(cfg_.pop_size));
    std::vector<std::string> failures(static_cast<size_t>(cfg_.pop_size));

    parallel_for(static_cast<size_t>(cfg_.pop_size), cfg_.jobs, [&](size_t slot) {
        Individual ind;
        ind.kernel = original_;
        ind.fitness = baseline_;
        Rng rng = Rng::stream(cfg_.master_seed, 0, slot, kStreamInit);
        for (int m = 0; m < cfg_.init_dist; ++m) {
            Individual next = mutate_until_valid(ind, rng, slot_stats[slot]);
            if (next.patch.size() == ind.patch.size()) {
                failures[slot] = "initialization slot " + std::to_string(slot) +
                                 " exhausted mutation retries at distance " + std::to_string(m);
                return;
            }
            ind = std::move(next);
        }
        population_[slot] = std::move(ind);
    });

    OperatorStats init_stats;
    for (const auto& s : slot_stats)
        init_stats.merge(s);
    stats_.merge(init_stats);
    for (const auto& f : failures)
        if (!f.empty()) {
            std::string detail = f + " (attempts:";
            for (int i = 0; i < kOperatorCount; ++i)
                detail += " " + std::string(operator_kind_name(static_cast<OperatorKind>(i))) +
                          "=" + std::to_string(init_stats.attempts[i]);
            throw InitFailure(detail + ")");
        }

    for (const auto& ind : population_)
        archive_add(ind);
    rank_current();
    generation_ = 0;
    log_generation(init_stats);
}

void Engine::step_generation() {
    const size_t pop_size = static_cast<size_t>(cfg_.pop_size);
    const uint64_t gen = static_cast<uint64_t>(generation_) + 1;

    Rng tournament_rng = Rng::stream(cfg_.master_seed, gen, 0, kStreamTournament);
    std::vector<int> offspring_idx =
        tournament_select(rank_, population_.size(), pop_size, tournament_rng);
    std::vector<int> elite_idx = select_best(rank_, pop_size / 4);

    std::vector<Individual> offspring;
    offspring.reserve(pop_size);
    for (int idx : offspring_idx)
        offspring.push_back(population_[static_cast<size_t>(idx)]);
    std::vector<Individual> elites;
    elites.reserve(elite_idx.size());
    for (int idx : elite_idx)
        elites.push_back(population_[static_cast<size_t>(idx)]);

    // All gate decisions are drawn up front so worker scheduling cannot
    // disturb the stream.
    Rng gate_cx = Rng::stream(cfg_.master_seed, gen, 0, kStreamGateCross);
    Rng gate_mut = Rng::stream(cfg_.master_seed, gen, 0, kStreamGateMutate);
    std::vector<char> cross_fire(pop_size / 2);
    for (auto& f : cross_fire)
        f = gate_cx.chance(cfg_.cross_rate) ? 1 : 0;
    std::vector<char> mutate_fire(pop_size);
    for (auto& f : mutate_fire)
        f = gate_mut.chance(cfg_.mutate_rate) ? 1 : 0;

    std::vector<OperatorStats> pair_stats(pop_size / 2);
    parallel_for(pop_size / 2, cfg_.jobs, [&](size_t pair) {
        if (!cross_fire[pair])
            return;
        Rng rng = Rng::stream(cfg_.master_seed, gen, pair, kStreamCross);
        auto [a, b] = crossover_until_valid(offspring[2 * pair], offspring[2 * pair + 1], rng,
                                            pair_stats[pair]);
        offspring[2 * pair] = std::move(a);
        offspring[2 * pair + 1] = std::move(b);
    });

    std::vector<OperatorStats> mut_stats(pop_size);
    parallel_for(pop_size, cfg_.jobs, [&](size_t i) {
        if (!mutate_fire[i])
            return;
        Rng rng = Rng::stream(cfg_.master_seed, gen, i, kStreamMutate);
        offspring[i] = mutate_until_valid(offspring[i], rng, mut_stats[i]);
    });

    OperatorStats gen_stats;
    for (const auto& s : pair_stats)
        gen_stats.merge(s);
    for (const auto& s : mut_stats)
        gen_stats.merge(s);
    stats_.merge(gen_stats);

    // elites + offspring, rank, truncate.
    std::vector<Individual> pool = std::move(elites);
    pool.insert(pool.end(), std::make_move_iterator(offspring.begin()),
                std::make_move_iterator(offspring.end()));
    std::vector<FitnessVector> fits;
    fits.reserve(pool.size());
    for (const auto& ind : pool)
        fits.push_back(*ind.fitness);
    ParetoRank pool_rank = rank_population(fits);
    std::vector<int> keep = select_best(pool_rank, pop_size);

    std::vector<Individual> next;
    next.reserve(pop_size);
    for (int idx : keep)
        next.push_back(std::move(pool[static_cast<size_t>(idx)]));
    population_ = std::move(next);

    for (const auto& ind : population_)
        archive_add(ind);

    rank_current();
    ++generation_;
    log_generation(gen_stats);
}

void Engine::archive_add(const Individual& ind) {
    if (!ind.fitness)
        return;
    const FitnessVector f = *ind.fitness;
    for (const auto& entry : archive_) {
        const FitnessVector& g = *entry.ind.fitness;
        if (g == f || dominates(g, f))
            return; // already covered
    }
    archive_.erase(std::remove_if(archive_.begin(), archive_.end(),
                                  [&](const ArchiveEntry& entry) {
                                      return dominates(f, *entry.ind.fitness);
                                  }),
                   archive_.end());
    ArchiveEntry e;
    e.ind = ind;
    archive_.push_back(std::move(e));
}

void Engine::rank_current() {
    rank_ = rank_population(population_fitness());
}

std::vector<FitnessVector> Engine::population_fitness() const {
    std::vector<FitnessVector> fits;
    fits.reserve(population_.size());
    for (const auto& ind : population_)
        fits.push_back(*ind.fitness);
    return fits;
}

void Engine::log_generation(const OperatorStats& gen_stats) {
    GenerationLog row;
    row.gen = generation_;

    const double inf = std::numeric_limits<double>::infinity();
    double best_err0 = inf, best_tol = inf, min_err = inf;
    auto account = [&](const FitnessVector& f) {
        if (f.error == 0.0)
            best_err0 = std::min(best_err0, f.cost);
        best_tol = std::min(best_tol, f.cost);
        min_err = std::min(min_err, f.error);
    };
    for (const auto& ind : population_)
        account(*ind.fitness);
    for (const auto& entry : archive_)
        account(*entry.ind.fitness);

    row.best_cost_err0 = best_err0;
    row.best_cost_tol = best_tol;
    row.min_error = min_err;
    row.front0_size = rank_.fronts.empty() ? 0 : static_cast<int>(rank_.fronts[0].size());
    row.mut_attempts = gen_stats.total_attempts();
    row.mut_accepts = gen_stats.total_accepts();
    row.cx_attempts = gen_stats.cx_attempts;
    row.cx_accepts = gen_stats.cx_accepts;
    log_.push_back(row);
}

SearchResult Engine::run(const std::vector<TestCase>& heldout) {
    initialize_population();

    if (cfg_.budget.kind == Budget::Kind::Generations) {
        for (int g = 0; g < cfg_.budget.generations; ++g)
            step_generation();
    } else {
        auto start = std::chrono::steady_clock::now();
        auto elapsed = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        };
        while (elapsed() < cfg_.budget.seconds)
            step_generation();
    }

    // Post-search: held-out validation of every archive member.
    if (!heldout.empty()) {
        parallel_for(archive_.size(), cfg_.jobs, [&](size_t i) {
            ArchiveEntry& entry = archive_[i];
            EvalOutcome out = evaluate_fitness(entry.ind.kernel, heldout, exec_, cfg_.tolerance);
            if (out.accepted) {
                entry.heldout_error = out.fitness.error;
                entry.overfit = false;
            } else {
                entry.heldout_error = 1.0;
                entry.overfit = true;
            }
        });
    }

    SearchResult result;
    result.population = population_;
    result.archive = archive_;
    result.log = log_;
    result.stats = stats_;
    result.baseline = baseline_;
    result.generations_run = generation_;

    // Best pick: cheapest non-overfit archive entry, ties to lower error,
    // then to insertion order. OVERFIT entries stay in the report but are
    // never the answer.
    for (size_t i = 0; i < result.archive.size(); ++i) {
        const ArchiveEntry& e = result.archive[i];
        if (e.overfit)
            continue;
        if (result.best_index < 0)
            result.best_index = static_cast<int>(i);
        else {
            const FitnessVector& best = *result.archive[static_cast<size_t>(result.best_index)].ind.fitness;
            const FitnessVector& cand = *e.ind.fitness;
            if (cand.cost < best.cost || (cand.cost == best.cost && cand.error < best.error))
                result.best_index = static_cast<int>(i);
        }
    }
    return result;
}

SearchResult run_search(const Kernel& original, const SearchConfig& cfg,
                        const std::vector<TestCase>& tests,
                        const std::vector<TestCase>& heldout) {
    Engine engine(original, cfg, tests);
    return engine.run(heldout);
}

} // namespace evoir
