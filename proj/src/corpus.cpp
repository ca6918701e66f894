#include "evoir/corpus.hpp"

#include "evoir/rng.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <numeric>

namespace evoir {

const char* planted_class_name(PlantedClass c) {
    switch (c) {
    case PlantedClass::ConservativeSync: return "ConservativeSync";
    case PlantedClass::RedundantStore: return "RedundantStore";
    case PlantedClass::DeadConditional: return "DeadConditional";
    case PlantedClass::RedundantLoad: return "RedundantLoad";
    case PlantedClass::LoopPerforation: return "LoopPerforation";
    case PlantedClass::Memoization: return "Memoization";
    }
    return "?";
}

namespace {

BufferSpec uniform_f32(std::string name, int size, double lo, double hi, bool output = false) {
    BufferSpec s;
    s.name = std::move(name);
    s.elem = TypeKind::F32;
    s.size = size;
    s.dist = BufferSpec::Dist::Uniform;
    s.lo = lo;
    s.hi = hi;
    s.output = output;
    return s;
}

BufferSpec zeros_f32(std::string name, int size, bool output) {
    BufferSpec s;
    s.name = std::move(name);
    s.elem = TypeKind::F32;
    s.size = size;
    s.dist = BufferSpec::Dist::Zeros;
    s.output = output;
    return s;
}

BufferSpec jitter_f32(std::string name, int size, std::string source, double amplitude) {
    BufferSpec s;
    s.name = std::move(name);
    s.elem = TypeKind::F32;
    s.size = size;
    s.dist = BufferSpec::Dist::JitterOf;
    s.source = std::move(source);
    s.amplitude = amplitude;
    return s;
}

// ---------------------------------------------------------------------------
// Benchmark kernels. Uids are written out so the reach patches below stay
// readable; the three barriers, stores and loads they anchor on are fixed.
// ---------------------------------------------------------------------------

// Tile exchange in the style of a wavefront alignment kernel: every thread
// stages one reference element and one tile row/column element, then a
// reduction phase reads every thread's slots. Only the barrier in front of
// the reduction orders writes against cross-thread reads; the first two
// barriers separate writes that never alias. Shared layout: 9x9 tile in
// words 0..80, reference cache in words 81..88. The third barrier is
// necessary under this scheduler: without it thread 0 reads tile slots that
// later threads have not written yet.
Benchmark make_nw_sync() {
    Benchmark b;
    b.name = "nw-sync";
    b.planted_class = PlantedClass::ConservativeSync;
    b.kernel = parse_kernel(R"(kernel nw-sync(reference: ptr<global> f32, matrix: ptr<global> f32, out: ptr<global> f32, s: ptr<shared> f32) threads=8 shared=89 {
entry:
  %0 = tid i32                  #uid=0
  %1 = load f32 reference[%0]   #uid=1
  %2 = add i32 %0, 81           #uid=2
  store s[%2], %1               #uid=3
  sync                          #uid=4
  %3 = load f32 matrix[%0]      #uid=5
  %4 = add i32 %0, 1            #uid=6
  %5 = mul i32 %4, 9            #uid=7
  store s[%5], %3               #uid=8
  sync                          #uid=9
  %6 = add i32 %0, 8            #uid=10
  %7 = load f32 matrix[%6]      #uid=11
  store s[%4], %7               #uid=12
  sync                          #uid=13
  br loop                       #uid=14
loop:
  %8 = phi i32 [0, entry], [%16, body]    #uid=15
  %9 = phi f32 [0.0, entry], [%15, body]  #uid=16
  %10 = icmp.lt i32 %8, 8       #uid=17
  br %10, body, done            #uid=18
body:
  %11 = add i32 %8, 1           #uid=19
  %12 = mul i32 %11, 9          #uid=20
  %13 = load f32 s[%12]         #uid=21
  %14 = load f32 s[%11]         #uid=22
  %17 = add i32 %8, 81          #uid=23
  %18 = load f32 s[%17]         #uid=24
  %19 = fadd f32 %13, %14       #uid=25
  %20 = fadd f32 %19, %18       #uid=26
  %21 = fadd f32 %19, %18       #uid=32
  store s[80], %21              #uid=33
  %15 = fadd f32 %9, %20        #uid=27
  %16 = add i32 %8, 1           #uid=28
  br loop                       #uid=29
done:
  store out[%0], %9             #uid=30
  ret                           #uid=31
}
)");
    b.reach_patch = {EditDelete{4}, EditDelete{9}};
    b.gen.buffers = {uniform_f32("reference", 8, 0.0, 1.0), uniform_f32("matrix", 16, 0.0, 1.0),
                     zeros_f32("out", 8, true)};
    b.notes = "Three barriers; the first two separate same-thread writes and can go. "
              "The third orders staging writes against cross-thread reads and must stay: "
              "removing it makes thread 0 read slots no thread has written in this phase.";
    return b;
}

// Running accumulation that writes its partial sum to a scratch slot on
// every loop iteration, then writes the final value again after the loop.
// Nothing reads the slot between the in-loop stores and the final one.
Benchmark make_lud_store() {
    Benchmark b;
    b.name = "lud-store";
    b.planted_class = PlantedClass::RedundantStore;
    b.kernel = parse_kernel(R"(kernel lud-store(a: ptr<global> f32, out: ptr<global> f32, s: ptr<shared> f32) threads=8 shared=8 {
entry:
  %0 = tid i32                  #uid=0
  br loop                       #uid=1
loop:
  %1 = phi i32 [0, entry], [%7, body]     #uid=2
  %2 = phi f32 [0.0, entry], [%6, body]   #uid=3
  %3 = icmp.lt i32 %1, 8        #uid=4
  br %3, body, flush            #uid=5
body:
  %4 = mul i32 %1, 8            #uid=6
  %5 = add i32 %4, %0           #uid=7
  %8 = load f32 a[%5]           #uid=8
  %6 = fadd f32 %2, %8          #uid=9
  store s[%0], %6               #uid=10
  %7 = add i32 %1, 1            #uid=11
  br loop                       #uid=12
flush:
  store s[%0], %2               #uid=13
  %9 = load f32 s[%0]           #uid=14
  %10 = fmul f32 %9, 0.5        #uid=15
  store out[%0], %10            #uid=16
  ret                           #uid=17
}
)");
    b.reach_patch = {EditDelete{10}};
    b.gen.buffers = {uniform_f32("a", 64, 0.0, 1.0), zeros_f32("out", 8, true)};
    b.notes = "The in-loop scratch store is overwritten by the post-loop store before "
              "anything reads the slot; deleting it is output-neutral.";
    return b;
}

// Per-element transform followed by a guarded correction pass that
// recomputes and re-stores the identical value. The guard bound is far
// beyond the loop range, so the pass always fires and never changes the
// output.
Benchmark make_hot_branch() {
    Benchmark b;
    b.name = "hot-branch";
    b.planted_class = PlantedClass::DeadConditional;
    b.kernel = parse_kernel(R"(kernel hot-branch(a: ptr<global> f32, out: ptr<global> f32) threads=8 {
entry:
  %0 = tid i32                  #uid=0
  %1 = mul i32 %0, 4            #uid=1
  br loop                       #uid=2
loop:
  %2 = phi i32 [0, entry], [%12, next]    #uid=3
  %3 = icmp.lt i32 %2, 4        #uid=4
  br %3, body, done             #uid=5
body:
  %4 = add i32 %1, %2           #uid=6
  %5 = load f32 a[%4]           #uid=7
  %6 = fmul f32 %5, 0.8         #uid=8
  %7 = fadd f32 %6, 0.1         #uid=9
  store out[%4], %7             #uid=10
  %8 = icmp.lt i32 %2, 1000     #uid=11
  br %8, fix, next              #uid=12
fix:
  %9 = load f32 a[%4]           #uid=13
  %10 = fmul f32 %9, 0.8        #uid=14
  %11 = fadd f32 %10, 0.1       #uid=15
  store out[%4], %11            #uid=16
  br next                       #uid=17
next:
  %12 = add i32 %2, 1           #uid=18
  br loop                       #uid=19
done:
  ret                           #uid=20
}
)");
    b.reach_patch = {EditReplaceOperand{11, 1, Binding::constant(Literal::of_i32(0))}};
    b.gen.buffers = {uniform_f32("a", 32, 0.0, 1.0), zeros_f32("out", 32, true)};
    b.notes = "The correction pass re-stores the value the main pass already wrote; "
              "forcing its guard false skips the pass with identical outputs.";
    return b;
}

// Reduction whose scale and bias factors are reloaded from the same global
// address on every iteration. Hoisting the loads out of the loop leaves the
// outputs untouched and removes seven of every eight global reads.
Benchmark make_bfs_load() {
    Benchmark b;
    b.name = "bfs-load";
    b.planted_class = PlantedClass::RedundantLoad;
    b.kernel = parse_kernel(R"(kernel bfs-load(a: ptr<global> f32, gscale: ptr<global> f32, gbias: ptr<global> f32, out: ptr<global> f32, out2: ptr<global> f32, s: ptr<shared> f32) threads=8 shared=8 {
entry:
  %0 = tid i32                  #uid=0
  %1 = mul i32 %0, 8            #uid=1
  br loop                       #uid=2
loop:
  %2 = phi i32 [0, entry], [%11, body]    #uid=3
  %3 = phi f32 [0.0, entry], [%10, body]  #uid=4
  %14 = phi f32 [0.0, entry], [%17, body] #uid=5
  %4 = icmp.lt i32 %2, 8        #uid=6
  br %4, body, done             #uid=7
body:
  %5 = load f32 gscale[0]       #uid=8
  %15 = load f32 gscale[0]      #uid=9
  %6 = add i32 %1, %2           #uid=10
  %7 = load f32 a[%6]           #uid=11
  %9 = load f32 gbias[0]        #uid=12
  %19 = load f32 gbias[0]       #uid=13
  %8 = fmul f32 %7, %5          #uid=14
  %16 = fmul f32 %7, %15        #uid=15
  %12 = fadd f32 %8, %9         #uid=16
  %18 = fadd f32 %16, %19       #uid=17
  %10 = fadd f32 %3, %12        #uid=18
  %17 = fadd f32 %14, %18       #uid=19
  %21 = fadd f32 %10, %17       #uid=27
  store s[%0], %21              #uid=28
  %11 = add i32 %2, 1           #uid=20
  br loop                       #uid=21
done:
  %13 = fdiv f32 %3, 8.0        #uid=22
  store out[%0], %13            #uid=23
  %20 = fmul f32 %14, 0.125     #uid=24
  store out2[%0], %20           #uid=25
  ret                           #uid=26
}
)");
    // Knock out one duplicated load: redirect its consumer to the first
    // load of the same address, then delete it.
    b.reach_patch = {EditReplaceOperand{15, 1, Binding::value_ref(8)}, EditDelete{9}};
    b.gen.buffers = {uniform_f32("a", 64, 0.0, 1.0), uniform_f32("gscale", 4, 0.5, 1.5),
                     uniform_f32("gbias", 4, 0.0, 1.0), zeros_f32("out", 8, true),
                     zeros_f32("out2", 8, true)};
    b.notes = "The loop re-reads gscale[0] and gbias[0] twice per iteration even though "
              "neither changes during a launch. Consumers of the duplicate loads can be "
              "redirected to the first read and the extra loads deleted, or the loads "
              "can be hoisted into the entry block.";
    return b;
}

// Heavily unrolled weighted sum on top of a large base value. The two
// low-weight tail terms contribute well under one percent of any output,
// so truncating the tail trades a little accuracy for four fewer
// instructions per term, one of them a global load.
Benchmark make_lud_unroll() {
    Benchmark b;
    b.name = "lud-unroll";
    b.planted_class = PlantedClass::LoopPerforation;
    b.kernel = parse_kernel(R"(kernel lud-unroll(a: ptr<global> f32, out: ptr<global> f32, s: ptr<shared> f32) threads=8 shared=8 {
entry:
  %0 = tid i32                  #uid=0
  %1 = mul i32 %0, 16           #uid=1
  br loop                       #uid=2
loop:
  %2 = phi i32 [0, entry], [%37, body]    #uid=3
  %3 = icmp.lt i32 %2, 16       #uid=4
  br %3, body, done             #uid=5
body:
  %4 = add i32 %1, %2           #uid=6
  %5 = mul i32 %4, 8            #uid=7
  %6 = load f32 a[%5]           #uid=8
  %9 = add i32 %5, 1            #uid=9
  %10 = load f32 a[%9]          #uid=10
  %7 = fmul f32 %6, 1.0         #uid=11
  %11 = fmul f32 %10, 1.0       #uid=12
  %8 = fadd f32 64.0, %7        #uid=13
  %12 = fadd f32 %8, %11        #uid=14
  store s[%0], %8               #uid=46
  %13 = add i32 %5, 2           #uid=15
  %14 = load f32 a[%13]         #uid=16
  %17 = add i32 %5, 3           #uid=17
  %18 = load f32 a[%17]         #uid=18
  %15 = fmul f32 %14, 1.0       #uid=19
  %19 = fmul f32 %18, 1.0       #uid=20
  %16 = fadd f32 %12, %15       #uid=21
  %20 = fadd f32 %16, %19       #uid=22
  %21 = add i32 %5, 4           #uid=23
  %22 = load f32 a[%21]         #uid=24
  %25 = add i32 %5, 5           #uid=25
  %26 = load f32 a[%25]         #uid=26
  %23 = fmul f32 %22, 1.0       #uid=27
  %27 = fmul f32 %26, 1.0       #uid=28
  %24 = fadd f32 %20, %23       #uid=29
  %28 = fadd f32 %24, %27       #uid=30
  store s[%0], %24              #uid=47
  %29 = add i32 %5, 6           #uid=31
  %30 = load f32 a[%29]         #uid=32
  %33 = add i32 %5, 7           #uid=33
  %34 = load f32 a[%33]         #uid=34
  %31 = fmul f32 %30, 0.5       #uid=35
  %35 = fmul f32 %34, 0.25      #uid=36
  %32 = fadd f32 %28, %31       #uid=37
  %36 = fadd f32 %32, %35       #uid=38
  %38 = fadd f32 %12, %20       #uid=43
  %39 = fmul f32 %38, 0.5       #uid=44
  store s[%0], %39              #uid=45
  store out[%4], %36            #uid=39
  %37 = add i32 %2, 1           #uid=40
  br loop                       #uid=41
done:
  ret                           #uid=42
}
)");
    b.reach_patch = {EditReplaceOperand{39, 2, Binding::value_ref(37)}, EditDelete{38},
                     EditDelete{36}, EditDelete{34}, EditDelete{33}};
    b.gen.buffers = {uniform_f32("a", 1024, 0.0, 1.0), zeros_f32("out", 128, true)};
    b.notes = "Weights decay to 0.25 against a base of 64, so dropping the last term "
              "moves any output by at most 0.4%. Exact variants cannot shed cost here: "
              "every instruction feeds the result.";
    return b;
}

// Two preprocessing chains whose inputs differ by well under one percent
// (the y data is a jittered copy of the x data). Redirecting the second
// consumer to the first chain's result and deleting the now-dead second
// chain is the planted reuse opportunity.
Benchmark make_hot_memo() {
    Benchmark b;
    b.name = "hot-memo";
    b.planted_class = PlantedClass::Memoization;
    b.kernel = parse_kernel(R"(kernel hot-memo(gx: ptr<global> f32, gy: ptr<global> f32, outx: ptr<global> f32, outy: ptr<global> f32, s: ptr<shared> f32) threads=8 shared=8 {
entry:
  %0 = tid i32                  #uid=0
  br loop                       #uid=1
loop:
  %1 = phi i32 [0, entry], [%13, body]    #uid=2
  %2 = icmp.lt i32 %1, 32       #uid=3
  br %2, body, done             #uid=4
body:
  %3 = mul i32 %1, 8            #uid=5
  %4 = add i32 %3, %0           #uid=6
  %5 = load f32 gx[%4]          #uid=7
  %9 = load f32 gy[%4]          #uid=8
  %6 = fmul f32 %5, 0.5         #uid=9
  %10 = fmul f32 %9, 0.5        #uid=10
  %7 = fadd f32 %6, 1.0         #uid=11
  %11 = fadd f32 %10, 1.0       #uid=12
  %8 = fmul f32 %7, 1.25        #uid=13
  %12 = fmul f32 %11, 0.75      #uid=14
  %14 = fadd f32 %6, %7         #uid=20
  %15 = fmul f32 %14, 0.5       #uid=21
  store s[%0], %15              #uid=22
  store outx[%4], %8            #uid=15
  store outy[%4], %12           #uid=16
  %13 = add i32 %1, 1           #uid=17
  br loop                       #uid=18
done:
  ret                           #uid=19
}
)");
    b.reach_patch = {EditReplaceOperand{14, 0, Binding::value_ref(11)}, EditDelete{12},
                     EditDelete{10}, EditDelete{8}};
    b.gen.buffers = {uniform_f32("gx", 256, 0.5, 1.5), jitter_f32("gy", 256, "gx", 0.008),
                     zeros_f32("outx", 256, true), zeros_f32("outy", 256, true)};
    b.notes = "gy tracks gx within 0.8%, so the y chain recomputes almost exactly the "
              "x chain's value. Reusing it changes outy by under 0.5% and strands the "
              "y chain for deletion.";
    return b;
}

using Maker = Benchmark (*)();

const std::map<std::string, Maker>& registry() {
    static const std::map<std::string, Maker> reg = {
        {"nw-sync", make_nw_sync},       {"lud-store", make_lud_store},
        {"hot-branch", make_hot_branch}, {"bfs-load", make_bfs_load},
        {"lud-unroll", make_lud_unroll}, {"hot-memo", make_hot_memo},
    };
    return reg;
}

} // namespace

const std::vector<std::string>& benchmark_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, maker] : registry())
            out.push_back(name);
        return out;
    }();
    return names;
}

Benchmark load_benchmark(const std::string& name) {
    auto it = registry().find(name);
    if (it == registry().end())
        throw UnknownBenchmark("unknown benchmark '" + name + "'");
    Benchmark b = it->second();

    auto errors = validate(b.kernel);
    if (!errors.empty())
        throw std::logic_error("benchmark '" + name + "' kernel fails validation: " +
                               errors.front().rule);
    PatchResult improved = apply_patch(b.kernel, b.reach_patch);
    if (improved.applied.size() != b.reach_patch.size())
        throw std::logic_error("benchmark '" + name + "' reach patch has inapplicable edits");
    if (!is_valid(improved.kernel))
        throw std::logic_error("benchmark '" + name + "' improved variant fails validation");
    b.improved = std::move(improved.kernel);
    return b;
}

std::vector<TestCase> generate_tests_for(const Kernel& kernel, const GeneratorSpec& gen, int count,
                                         uint64_t seed) {
    std::vector<TestCase> tests;
    tests.reserve(static_cast<size_t>(count));
    ExecConfig cfg = ExecConfig::for_kernel(kernel);
    for (int t = 0; t < count; ++t) {
        TestCase tc;
        for (size_t bi = 0; bi < gen.buffers.size(); ++bi) {
            const BufferSpec& spec = gen.buffers[bi];
            Rng rng = Rng::stream(seed, static_cast<uint64_t>(t), bi, 91);
            Buffer buf;
            buf.elem = spec.elem;
            switch (spec.dist) {
            case BufferSpec::Dist::Uniform:
                if (spec.elem == TypeKind::F32) {
                    buf.f.reserve(static_cast<size_t>(spec.size));
                    for (int i = 0; i < spec.size; ++i)
                        buf.f.push_back(static_cast<float>(spec.lo) +
                                        rng.uniform_float() *
                                            static_cast<float>(spec.hi - spec.lo));
                } else {
                    for (int i = 0; i < spec.size; ++i)
                        buf.i.push_back(static_cast<int32_t>(spec.lo) +
                                        static_cast<int32_t>(rng.below(static_cast<uint64_t>(
                                            spec.hi - spec.lo))));
                }
                break;
            case BufferSpec::Dist::JitterOf: {
                const Buffer& src = tc.inputs.at(spec.source);
                for (int i = 0; i < spec.size; ++i) {
                    float u = rng.uniform_float() * 2.0f - 1.0f;
                    buf.f.push_back(src.f[static_cast<size_t>(i)] *
                                    (1.0f + static_cast<float>(spec.amplitude) * u));
                }
                break;
            }
            case BufferSpec::Dist::Zeros:
                if (spec.elem == TypeKind::F32)
                    buf.f.assign(static_cast<size_t>(spec.size), 0.0f);
                else
                    buf.i.assign(static_cast<size_t>(spec.size), 0);
                break;
            case BufferSpec::Dist::Permutation: {
                buf.elem = TypeKind::I32;
                buf.i.resize(static_cast<size_t>(spec.size));
                std::iota(buf.i.begin(), buf.i.end(), 0);
                rng.shuffle(buf.i);
                break;
            }
            }
            tc.inputs[spec.name] = std::move(buf);
        }
        for (const auto& s : gen.scalars)
            tc.scalars[s.name] = s.value;

        ExecResult r = execute(kernel, tc, cfg);
        if (r.status != ExecStatus::Completed)
            throw std::logic_error("kernel '" + kernel.name + "' failed while producing an " +
                                   "oracle: " + r.trap_reason);
        for (const auto& spec : gen.buffers)
            if (spec.output)
                tc.oracle[spec.name] = r.outputs.at(spec.name);
        tests.push_back(std::move(tc));
    }
    return tests;
}

std::vector<TestCase> generate_tests(const Benchmark& b, int count, uint64_t seed) {
    return generate_tests_for(b.kernel, b.gen, count, seed);
}

double measured_gain(const Benchmark& b, int test_count, uint64_t seed) {
    std::vector<TestCase> tests = generate_tests(b, test_count, seed);
    ExecConfig cfg = ExecConfig::for_kernel(b.kernel);
    double orig = 0.0, improved = 0.0;
    for (const auto& t : tests) {
        ExecResult ro = execute(b.kernel, t, cfg);
        ExecResult ri = execute(b.improved, t, cfg);
        if (ro.status != ExecStatus::Completed || ri.status != ExecStatus::Completed)
            throw std::logic_error("benchmark '" + b.name + "' gain measurement trapped");
        orig += static_cast<double>(ro.cost);
        improved += static_cast<double>(ri.cost);
    }
    return (orig - improved) / orig;
}

std::string generator_spec_to_json(const Benchmark& b) {
    nlohmann::json j;
    j["name"] = b.name;
    j["planted_class"] = planted_class_name(b.planted_class);
    j["kernel"] = b.name + ".ir";
    j["improved"] = b.name + ".improved.ir";
    j["reach_patch"] = b.name + ".patch.json";
    j["notes"] = b.notes;
    nlohmann::json buffers = nlohmann::json::array();
    for (const auto& s : b.gen.buffers) {
        nlohmann::json bj;
        bj["name"] = s.name;
        bj["type"] = s.elem == TypeKind::I32 ? "i32" : "f32";
        bj["size"] = s.size;
        switch (s.dist) {
        case BufferSpec::Dist::Uniform:
            bj["dist"] = {{"kind", "uniform"}, {"low", s.lo}, {"high", s.hi}};
            break;
        case BufferSpec::Dist::JitterOf:
            bj["dist"] = {{"kind", "jitter_of"}, {"source", s.source}, {"amplitude", s.amplitude}};
            break;
        case BufferSpec::Dist::Zeros:
            bj["dist"] = {{"kind", "zeros"}};
            break;
        case BufferSpec::Dist::Permutation:
            bj["dist"] = {{"kind", "permutation"}};
            break;
        }
        if (s.output)
            bj["output"] = true;
        buffers.push_back(bj);
    }
    j["buffers"] = buffers;
    nlohmann::json scalars = nlohmann::json::array();
    for (const auto& s : b.gen.scalars) {
        nlohmann::json sj;
        sj["name"] = s.name;
        switch (s.value.kind) {
        case TypeKind::I32: sj["type"] = "i32"; sj["value"] = s.value.i; break;
        case TypeKind::F32: sj["type"] = "f32"; sj["value"] = static_cast<double>(s.value.f); break;
        default: sj["type"] = "bool"; sj["value"] = s.value.b; break;
        }
        scalars.push_back(sj);
    }
    j["scalars"] = scalars;
    return j.dump(2) + "\n";
}

GeneratorSpec generator_spec_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    GeneratorSpec gen;
    for (const auto& bj : j.at("buffers")) {
        BufferSpec s;
        s.name = bj.at("name").get<std::string>();
        s.elem = bj.at("type").get<std::string>() == "i32" ? TypeKind::I32 : TypeKind::F32;
        s.size = bj.at("size").get<int>();
        s.output = bj.value("output", false);
        const auto& dj = bj.at("dist");
        std::string kind = dj.at("kind").get<std::string>();
        if (kind == "uniform") {
            s.dist = BufferSpec::Dist::Uniform;
            s.lo = dj.at("low").get<double>();
            s.hi = dj.at("high").get<double>();
        } else if (kind == "jitter_of") {
            s.dist = BufferSpec::Dist::JitterOf;
            s.source = dj.at("source").get<std::string>();
            s.amplitude = dj.at("amplitude").get<double>();
        } else if (kind == "zeros") {
            s.dist = BufferSpec::Dist::Zeros;
        } else if (kind == "permutation") {
            s.dist = BufferSpec::Dist::Permutation;
            s.elem = TypeKind::I32;
        } else {
            throw std::runtime_error("unknown distribution kind '" + kind + "'");
        }
        gen.buffers.push_back(std::move(s));
    }
    if (j.contains("scalars"))
        for (const auto& sj : j.at("scalars")) {
            ScalarSpec s;
            s.name = sj.at("name").get<std::string>();
            std::string type = sj.at("type").get<std::string>();
            if (type == "i32")
                s.value = Scalar::of_i32(sj.at("value").get<int32_t>());
            else if (type == "f32")
                s.value = Scalar::of_f32(static_cast<float>(sj.at("value").get<double>()));
            else
                s.value = Scalar::of_bool(sj.at("value").get<bool>());
            gen.scalars.push_back(std::move(s));
        }
    return gen;
}

} // namespace evoir
