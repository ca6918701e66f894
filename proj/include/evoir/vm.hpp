#pragma once

#include "evoir/ir.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace evoir {

// Scalars flowing through the interpreter have the same shape as literals.
using Scalar = Literal;

// A typed flat array backing one global buffer.
struct Buffer {
    TypeKind elem = TypeKind::F32; // I32 or F32
    std::vector<int32_t> i;
    std::vector<float> f;

    static Buffer of_f32(std::vector<float> v) { Buffer b; b.elem = TypeKind::F32; b.f = std::move(v); return b; }
    static Buffer of_i32(std::vector<int32_t> v) { Buffer b; b.elem = TypeKind::I32; b.i = std::move(v); return b; }

    size_t size() const { return elem == TypeKind::I32 ? i.size() : f.size(); }

    friend bool operator==(const Buffer& a, const Buffer& b) {
        return a.elem == b.elem && a.i == b.i && a.f == b.f;
    }
};

using BufferMap = std::map<std::string, Buffer>;

// Cycle prices per executed instruction. The ratios track a GPU memory
// hierarchy: off-chip traffic dwarfs on-chip, barriers cost every thread.
struct CostTable {
    int64_t arith = 1;
    int64_t cmp = 1;
    int64_t select_op = 1;
    int64_t phi = 1;
    int64_t constant = 1;
    int64_t br = 1;
    int64_t intrinsic = 1;
    int64_t getindex = 1;
    int64_t load_shared = 4;
    int64_t store_shared = 4;
    int64_t load_global = 20;
    int64_t store_global = 20;
    int64_t sync = 8; // charged per thread at each barrier
    int64_t ret = 1;

    // space applies to Load/Store only.
    int64_t cost(Opcode op, MemSpace space) const;
};

struct ExecConfig {
    int thread_count = 1;
    int shared_words = 0;
    int64_t instruction_budget = 1'000'000; // per thread, infinite-loop guard
    CostTable cost_table;

    static ExecConfig for_kernel(const Kernel& k) {
        ExecConfig cfg;
        cfg.thread_count = k.threads;
        cfg.shared_words = k.shared_words;
        return cfg;
    }
};

struct TestCase {
    BufferMap inputs;                      // initial contents of every pointer param
    std::map<std::string, Scalar> scalars; // scalar params by name
    BufferMap oracle;                      // expected final contents of output buffers
};

std::string testcase_to_json(const TestCase& t);
TestCase testcase_from_json(const std::string& json_text);

enum class ExecStatus : uint8_t { Completed, Trap, BudgetExceeded };

struct ExecResult {
    BufferMap outputs; // all global buffers after execution
    int64_t cost = 0;
    ExecStatus status = ExecStatus::Completed;
    std::string trap_reason; // set for Trap / BudgetExceeded
};

// Deterministic phase-based execution: threads run one at a time in
// ascending id order until the next barrier (or ret); all threads must
// arrive at the same barrier or the launch traps. Shared and global
// memory are visible across threads. Pure function of its arguments.
ExecResult execute(const Kernel& k, const TestCase& t, const ExecConfig& cfg);

// Max over all oracle elements of |c - o| / max(|o|, 1e-6), clamped to
// [0, 1]; integer buffers go through the same relative formula. Shape or
// type mismatch counts as total failure (1.0).
double compute_error(const BufferMap& candidate, const BufferMap& oracle);

struct FitnessVector {
    double cost = 0.0;  // mean cycles across test cases
    double error = 0.0; // max across test cases, in [0, 1]

    friend bool operator==(const FitnessVector& a, const FitnessVector& b) {
        return a.cost == b.cost && a.error == b.error;
    }
};

struct EvalOutcome {
    bool accepted = false;
    FitnessVector fitness;   // valid when accepted
    int failing_test = -1;   // first failing test when rejected
    std::string reason;      // why it was rejected

    static EvalOutcome ok(FitnessVector f) {
        EvalOutcome o;
        o.accepted = true;
        o.fitness = f;
        return o;
    }
    static EvalOutcome rejected(int test, std::string why) {
        EvalOutcome o;
        o.failing_test = test;
        o.reason = std::move(why);
        return o;
    }
};

// Runs every test; rejects on any trap/budget overrun or when the max
// error exceeds tolerance. tolerance 0 admits exact variants only.
EvalOutcome evaluate_fitness(const Kernel& k, const std::vector<TestCase>& tests,
                             const ExecConfig& cfg, double tolerance);

} // namespace evoir
