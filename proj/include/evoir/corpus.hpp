#pragma once

#include "evoir/genome.hpp"
#include "evoir/ir.hpp"
#include "evoir/vm.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace evoir {

enum class PlantedClass : uint8_t {
    ConservativeSync,
    RedundantStore,
    DeadConditional,
    RedundantLoad,
    LoopPerforation,
    Memoization,
};

const char* planted_class_name(PlantedClass c);

// Input generator description for one buffer.
struct BufferSpec {
    enum class Dist : uint8_t { Uniform, JitterOf, Zeros, Permutation };

    std::string name;
    TypeKind elem = TypeKind::F32;
    int size = 0;
    Dist dist = Dist::Uniform;
    double lo = 0.0, hi = 1.0;  // Uniform
    std::string source;         // JitterOf: name of the buffer being jittered
    double amplitude = 0.0;     // JitterOf: relative amplitude
    bool output = false;        // compared against the oracle
};

struct ScalarSpec {
    std::string name;
    Scalar value;
};

struct GeneratorSpec {
    std::vector<BufferSpec> buffers;
    std::vector<ScalarSpec> scalars;
};

// One planted-inefficiency benchmark: the kernel, the hand-optimized
// variant it should be able to reach, the explicit patch that reaches it
// (a regression oracle for the operator suite), and its input generator.
struct Benchmark {
    std::string name;
    PlantedClass planted_class = PlantedClass::ConservativeSync;
    Kernel kernel;
    Kernel improved;
    Patch reach_patch;
    GeneratorSpec gen;
    std::string notes;
};

struct UnknownBenchmark : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& benchmark_names();
Benchmark load_benchmark(const std::string& name);

// count deterministic test cases; oracles come from executing the original
// kernel. Disjoint seeds give disjoint (held-out) suites.
std::vector<TestCase> generate_tests(const Benchmark& b, int count, uint64_t seed);

// (cost(original) - cost(improved)) / cost(original) measured by the
// interpreter on generated tests.
double measured_gain(const Benchmark& b, int test_count, uint64_t seed);

// JSON rendering of the generator spec, as shipped in the data directory.
std::string generator_spec_to_json(const Benchmark& b);

// Parses the buffers/scalars sections of a generator spec document, for
// oracle generation against kernels outside the registry.
GeneratorSpec generator_spec_from_json(const std::string& text);

// Deterministic inputs + oracle for an arbitrary kernel and spec.
std::vector<TestCase> generate_tests_for(const Kernel& kernel, const GeneratorSpec& gen, int count,
                                         uint64_t seed);

} // namespace evoir
