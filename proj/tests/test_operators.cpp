#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evoir/operators.hpp"
#include "evoir/vm.hpp"

#include <map>
#include <set>

using namespace evoir;

namespace {

// Ten instructions, straight line: the exhaustive repair check walks every
// (source, insertion point) pair of this kernel.
const char* kChain = R"(
kernel chain(a: ptr<global> f32, out: ptr<global> f32) threads=1 {
entry:
  %0 = load f32 a[0]    #uid=0
  %1 = load f32 a[1]    #uid=1
  %2 = fmul f32 %0, %1  #uid=2
  %3 = fadd f32 %2, %1  #uid=3
  %4 = fmul f32 %3, %2  #uid=4
  store out[0], %4      #uid=5
  %5 = fadd f32 %4, %0  #uid=6
  %6 = fmul f32 %5, %1  #uid=7
  store out[1], %6      #uid=8
  ret                   #uid=9
}
)";

const char* kLoop = R"(
kernel looped(a: ptr<global> f32, out: ptr<global> f32) threads=2 {
entry:
  %0 = tid i32            #uid=0
  br header               #uid=1
header:
  %1 = phi i32 [0, entry], [%5, body]   #uid=2
  %2 = phi f32 [0.0, entry], [%6, body] #uid=3
  %3 = icmp.lt i32 %1, 8  #uid=4
  br %3, body, exit       #uid=5
body:
  %4 = load f32 a[%1]     #uid=6
  %5 = add i32 %1, 1      #uid=7
  %6 = fadd f32 %2, %4    #uid=8
  br header               #uid=9
exit:
  store out[%0], %2       #uid=10
  ret                     #uid=11
}
)";

struct Ctx {
    Kernel kernel;
    DomTree dom;
    Rng rng;
    MutationContext ctx;

    explicit Ctx(const char* src, uint64_t seed = 1)
        : kernel(parse_kernel(src)), dom(DomTree::build(kernel)), rng(seed),
          ctx(kernel, dom, rng) {}
};

} // namespace

TEST_CASE("repair leaves dominated operands alone") {
    Ctx c(kChain);
    // The final fmul stays where it is: nothing to fix.
    const Instruction* inst = c.kernel.find_uid(4);
    auto pos = c.kernel.locate(4);
    auto rebinds = repair_operands(c.kernel, *inst, pos->first, pos->second, c.dom, c.rng);
    CHECK(rebinds.empty());
}

TEST_CASE("repair falls back to the unit constant when no candidate exists") {
    Ctx c(kChain);
    // Place a copy of the first fmul at the very top: no f32 value is
    // defined there yet, so both operands collapse to 1.0.
    const Instruction* inst = c.kernel.find_uid(2);
    auto rebinds = repair_operands(c.kernel, *inst, 0, 0, c.dom, c.rng);
    REQUIRE(rebinds.size() == 2);
    for (const auto& r : rebinds) {
        CHECK(r.binding.kind == Binding::Kind::ConstFallback);
        CHECK(r.binding.lit == Literal::of_f32(1.0f));
    }
}

TEST_CASE("repaired copies validate at every insertion point") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        Ctx c(kChain, seed);
        auto uids = {0, 1, 2, 3, 4, 5, 6, 7, 8};
        for (int src : uids) {
            const Instruction* inst = c.kernel.find_uid(src);
            for (size_t b = 0; b < c.kernel.blocks.size(); ++b) {
                for (size_t i = 0; i < c.kernel.blocks[b].instructions.size(); ++i) {
                    const Instruction& anchor = c.kernel.blocks[b].instructions[i];
                    if (anchor.is_phi())
                        continue;
                    EditCopy e;
                    e.src_uid = src;
                    e.before_uid = anchor.uid;
                    e.rebinds = repair_operands(c.kernel, *inst, static_cast<int>(b),
                                                static_cast<int>(i), c.dom, c.rng);
                    ApplyResult r = apply_edit(c.kernel, Edit{e});
                    REQUIRE(r.applied);
                    CHECK(validate(r.kernel).empty());
                }
            }
        }
    }
}

TEST_CASE("copy of a store carries no rewire") {
    Ctx c(kChain, 3);
    bool seen = false;
    for (int i = 0; i < 500 && !seen; ++i) {
        MutationResult m = mutate_copy(c.ctx);
        REQUIRE(m.has_value());
        const auto& e = std::get<EditCopy>(*m);
        if (e.src_uid == 5) {
            CHECK_FALSE(e.rewire.has_value());
            seen = true;
        }
    }
    CHECK(seen);
}

TEST_CASE("copies that produce values get rewired to a downstream slot") {
    Ctx c(kChain, 7);
    int rewired = 0, total = 0;
    for (int i = 0; i < 300; ++i) {
        MutationResult m = mutate_copy(c.ctx);
        REQUIRE(m.has_value());
        const auto& e = std::get<EditCopy>(*m);
        const Instruction* src = c.kernel.find_uid(e.src_uid);
        if (!src->result)
            continue;
        ++total;
        if (e.rewire)
            ++rewired;
    }
    CHECK(total > 0);
    // Downstream f32 slots are plentiful in this kernel; only copies placed
    // at the very bottom can end up without a consumer.
    CHECK(rewired > total / 2);
}

TEST_CASE("emitted rebinds are sound: every binding dominates its use and types match") {
    for (const char* src : {kChain, kLoop}) {
        Ctx c(src, 11);
        for (int i = 0; i < 2000; ++i) {
            MutationResult m = random_mutation(c.ctx);
            if (!m)
                continue;
            ApplyResult r = apply_edit(c.kernel, *m);
            if (!r.applied)
                continue;
            DomTree dom2 = DomTree::build(r.kernel);

            auto check_rebinds = [&](int uid, const std::vector<Rebind>& rebinds) {
                const Instruction* inst = r.kernel.find_uid(uid);
                if (!inst)
                    return;
                for (const auto& rb : rebinds) {
                    REQUIRE(rb.slot < static_cast<int>(inst->operands.size()));
                    auto want = slot_type(r.kernel, *inst, static_cast<size_t>(rb.slot));
                    if (rb.binding.kind == Binding::Kind::ConstFallback) {
                        if (want)
                            CHECK(rb.binding.lit.type() == *want);
                    } else {
                        const Instruction* def = r.kernel.find_uid(rb.binding.def_uid);
                        REQUIRE(def != nullptr);
                        REQUIRE(def->result.has_value());
                        if (want)
                            CHECK(def->result_type() == *want);
                        CHECK(dom2.dominates_use(r.kernel, def->uid, *inst,
                                                 static_cast<size_t>(rb.slot)));
                    }
                }
            };

            if (auto* e = std::get_if<EditMove>(&*m))
                check_rebinds(e->uid, e->rebinds);
            if (auto* e = std::get_if<EditReplaceInstr>(&*m))
                check_rebinds(e->victim_uid, e->rebinds);
            if (auto* e = std::get_if<EditSwap>(&*m)) {
                check_rebinds(e->uid_a, e->rebinds_a);
                check_rebinds(e->uid_b, e->rebinds_b);
            }
        }
    }
}

TEST_CASE("deleting the removable barrier keeps outputs and cuts cost") {
    Kernel k = parse_kernel(R"(
kernel mini(a: ptr<global> f32, out: ptr<global> f32, s: ptr<shared> f32) threads=4 shared=4 {
entry:
  %0 = tid i32          #uid=0
  %1 = load f32 a[%0]   #uid=1
  store s[%0], %1       #uid=2
  sync                  #uid=3
  %2 = load f32 s[%0]   #uid=4
  store out[%0], %2     #uid=5
  ret                   #uid=6
}
)");
    ApplyResult r = apply_edit(k, Edit{EditDelete{3}});
    REQUIRE(r.applied);
    CHECK(validate(r.kernel).empty());
    TestCase t;
    t.inputs = {{"a", Buffer::of_f32({1, 2, 3, 4})}, {"out", Buffer::of_f32({0, 0, 0, 0})}};
    ExecResult before = execute(k, t, ExecConfig::for_kernel(k));
    ExecResult after = execute(r.kernel, t, ExecConfig::for_kernel(r.kernel));
    REQUIRE(before.status == ExecStatus::Completed);
    REQUIRE(after.status == ExecStatus::Completed);
    CHECK(before.outputs == after.outputs);
    CHECK(after.cost < before.cost);
}

TEST_CASE("loop bound literal can be truncated through replace_operand") {
    Kernel k = parse_kernel(kLoop);
    // %3 = icmp.lt i32 %1, 8 has uid 4; squeezing the bound to 1 runs the
    // loop once.
    ApplyResult r =
        apply_edit(k, Edit{EditReplaceOperand{4, 1, Binding::constant(Literal::of_i32(1))}});
    REQUIRE(r.applied);
    CHECK(validate(r.kernel).empty());

    TestCase t;
    t.inputs = {{"a", Buffer::of_f32({1, 1, 1, 1, 1, 1, 1, 1})},
                {"out", Buffer::of_f32({0, 0})}};
    ExecResult full = execute(k, t, ExecConfig::for_kernel(k));
    ExecResult once = execute(r.kernel, t, ExecConfig::for_kernel(r.kernel));
    REQUIRE(full.status == ExecStatus::Completed);
    REQUIRE(once.status == ExecStatus::Completed);
    CHECK(full.outputs.at("out").f == std::vector<float>{8.0f, 8.0f});
    CHECK(once.outputs.at("out").f == std::vector<float>{1.0f, 1.0f});
    CHECK(once.cost < full.cost);
}

TEST_CASE("swapping independent instructions preserves semantics") {
    Kernel k = parse_kernel(R"(
kernel indep(a: ptr<global> f32, out: ptr<global> f32) threads=2 {
entry:
  %0 = tid i32          #uid=0
  %1 = load f32 a[%0]   #uid=1
  %2 = fadd f32 %1, 1.0 #uid=2
  %3 = fadd f32 %1, 2.0 #uid=3
  %4 = fmul f32 %2, %3  #uid=4
  store out[%0], %4     #uid=5
  ret                   #uid=6
}
)");
    ApplyResult r = apply_edit(k, Edit{EditSwap{2, 3, {}, {}}});
    REQUIRE(r.applied);
    CHECK(validate(r.kernel).empty());
    TestCase t;
    t.inputs = {{"a", Buffer::of_f32({0.5f, 0.25f})}, {"out", Buffer::of_f32({0, 0})}};
    ExecResult before = execute(k, t, ExecConfig::for_kernel(k));
    ExecResult after = execute(r.kernel, t, ExecConfig::for_kernel(r.kernel));
    CHECK(before.outputs == after.outputs);
    CHECK(before.cost == after.cost);
}

TEST_CASE("random_mutation draws the five operators uniformly") {
    Ctx c(kChain, 42);
    std::map<OperatorKind, int> counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        MutationResult m = random_mutation(c.ctx);
        REQUIRE(m.has_value()); // this kernel offers candidates to all five
        counts[operator_kind(*m)]++;
    }
    REQUIRE(counts.size() == 5);
    for (const auto& [kind, count] : counts) {
        double freq = static_cast<double>(count) / n;
        CHECK(freq > 0.19);
        CHECK(freq < 0.21);
    }
}

TEST_CASE("mutation streams are reproducible per seed") {
    auto draw_keys = [](uint64_t seed) {
        Ctx c(kLoop, seed);
        std::vector<std::string> keys;
        for (int i = 0; i < 50; ++i) {
            MutationResult m = random_mutation(c.ctx);
            keys.push_back(m ? edit_key(*m) : "<none>");
        }
        return keys;
    };
    CHECK(draw_keys(123) == draw_keys(123));
    CHECK(draw_keys(123) != draw_keys(124));
}

TEST_CASE("kernel with no mutable instruction yields NoCandidate") {
    Ctx c("kernel empty() { entry: ret }");
    CHECK_FALSE(mutate_copy(c.ctx).has_value());
    CHECK_FALSE(mutate_delete(c.ctx).has_value());
    CHECK_FALSE(mutate_move(c.ctx).has_value());
    CHECK_FALSE(mutate_swap(c.ctx).has_value());
    CHECK_FALSE(mutate_replace(c.ctx).has_value());
    CHECK_FALSE(random_mutation(c.ctx).has_value());
}

TEST_CASE("messy crossover conserves the edit multiset") {
    Rng rng(5);
    Patch pa{EditDelete{1}, EditDelete{2}};
    Patch pb{EditDelete{3}};
    for (int trial = 0; trial < 500; ++trial) {
        auto [c1, c2] = crossover_messy(pa, pb, rng);
        CHECK(c1.size() + c2.size() == 3);
        std::multiset<std::string> got;
        for (const auto& e : c1)
            got.insert(edit_key(e));
        for (const auto& e : c2)
            got.insert(edit_key(e));
        std::multiset<std::string> want{edit_key(Edit{EditDelete{1}}), edit_key(Edit{EditDelete{2}}),
                                        edit_key(Edit{EditDelete{3}})};
        CHECK(got == want);
    }
}

TEST_CASE("crossover of empty patches") {
    Rng rng(6);
    auto [c1, c2] = crossover_messy({}, {}, rng);
    CHECK(c1.empty());
    CHECK(c2.empty());
}

TEST_CASE("each edit lands in the first child about half the time") {
    Rng rng(8);
    Patch pa{EditDelete{1}, EditDelete{2}};
    Patch pb{EditDelete{3}, EditDelete{4}};
    const int n = 10000;
    std::map<std::string, int> in_first;
    for (int trial = 0; trial < n; ++trial) {
        auto [c1, c2] = crossover_messy(pa, pb, rng);
        for (const auto& e : c1)
            in_first[edit_key(e)]++;
    }
    // Uniform permutation + uniform split point puts an edit in child one
    // with probability 1/2; 3 sigma for n=10^4 Bernoulli(1/2) is 150.
    for (const auto& [key, count] : in_first) {
        CHECK(count > n / 2 - 150);
        CHECK(count < n / 2 + 150);
    }
    CHECK(in_first.size() == 4);
}
