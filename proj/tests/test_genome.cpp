#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evoir/genome.hpp"
#include "evoir/ir.hpp"
#include "evoir/rng.hpp"

using namespace evoir;

namespace {

// Mirrors the dependency-chain shape used throughout: two loads feeding a
// mul/add/mul chain, with stable uids 0..6.
const char* kChain = R"(
kernel chain(a: ptr<global> f32, out: ptr<global> f32) threads=1 {
entry:
  %0 = load f32 a[0]    #uid=0
  %1 = load f32 a[1]    #uid=1
  %2 = fmul f32 %0, %1  #uid=2
  %3 = fadd f32 %2, %1  #uid=3
  %4 = fmul f32 %3, %2  #uid=4
  store out[0], %4      #uid=5
  ret                   #uid=6
}
)";

} // namespace

TEST_CASE("empty patch is identity") {
    Kernel k = parse_kernel(kChain);
    PatchResult r = apply_patch(k, {});
    CHECK(structurally_equal(r.kernel, k));
    CHECK(r.applied.empty());
}

TEST_CASE("delete removes exactly the addressed instruction") {
    Kernel k = parse_kernel(kChain);
    ApplyResult r = apply_edit(k, EditDelete{5});
    REQUIRE(r.applied);
    CHECK(r.kernel.instruction_count() == k.instruction_count() - 1);
    CHECK(r.kernel.find_uid(5) == nullptr);
    CHECK(r.kernel.find_uid(4) != nullptr);
}

TEST_CASE("delete of a missing anchor is inapplicable") {
    Kernel k = parse_kernel(kChain);
    ApplyResult r = apply_edit(k, EditDelete{9999});
    CHECK_FALSE(r.applied);
    CHECK(structurally_equal(r.kernel, k));
}

TEST_CASE("copy with constant fallback and rewire rebuilds the dependency") {
    Kernel k = parse_kernel(kChain);
    // Duplicate the first fmul (uid 2) in front of the fadd, replacing its
    // first operand with the constant 1.0, and rewire the final fmul's
    // second operand to consume the fresh value.
    EditCopy copy;
    copy.src_uid = 2;
    copy.before_uid = 3;
    copy.rebinds = {{0, Binding::constant(Literal::of_f32(1.0f))}};
    copy.rewire = Rewire{4, 1};
    ApplyResult r = apply_edit(k, copy);
    REQUIRE(r.applied);
    CHECK(is_valid(r.kernel));
    CHECK(r.kernel.instruction_count() == k.instruction_count() + 1);

    // The inserted copy sits in front of uid 3 and reads (1.0, %1).
    auto pos = r.kernel.locate(3);
    REQUIRE(pos);
    const Instruction& inserted = r.kernel.blocks[pos->first].instructions[pos->second - 1];
    CHECK(inserted.op == Opcode::FMul);
    CHECK(inserted.uid >= 1'000'000);
    CHECK(inserted.operands[0] == Operand::literal(Literal::of_f32(1.0f)));

    // The rewired consumer now reads the fresh result.
    const Instruction* consumer = r.kernel.find_uid(4);
    REQUIRE(consumer);
    CHECK(consumer->operands[1] == Operand::val(*inserted.result));
}

TEST_CASE("copy is deterministic") {
    Kernel k = parse_kernel(kChain);
    EditCopy copy;
    copy.src_uid = 2;
    copy.before_uid = 5;
    ApplyResult r1 = apply_edit(k, copy);
    ApplyResult r2 = apply_edit(k, copy);
    REQUIRE(r1.applied);
    REQUIRE(r2.applied);
    CHECK(structurally_equal(r1.kernel, r2.kernel));
    CHECK(print_kernel(r1.kernel) == print_kernel(r2.kernel));
}

TEST_CASE("orphaned edit after delete is dropped, applied is a subsequence") {
    Kernel k = parse_kernel(kChain);
    Patch p{EditDelete{3}, EditReplaceOperand{3, 0, Binding::constant(Literal::of_f32(2.0f))}};
    PatchResult r = apply_patch(k, p);
    REQUIRE(r.applied.size() == 1);
    CHECK(r.applied[0] == Edit{EditDelete{3}});
    CHECK(r.kernel.find_uid(3) == nullptr);
}

TEST_CASE("move keeps the instruction and changes its position") {
    Kernel k = parse_kernel(kChain);
    // Move load uid 1 directly in front of the store (legal: uses stay
    // dominated in a straight-line block? no: %2 uses %1 earlier -> invalid,
    // which apply_edit must still materialize).
    EditMove move;
    move.uid = 1;
    move.before_uid = 5;
    ApplyResult r = apply_edit(k, move);
    REQUIRE(r.applied);
    CHECK(r.kernel.instruction_count() == k.instruction_count());
    auto pos = r.kernel.locate(1);
    REQUIRE(pos);
    CHECK(pos->second == 4); // right before the store
    CHECK_FALSE(is_valid(r.kernel)); // %2 = fmul %0, %1 now uses %1 before its def
}

TEST_CASE("swap exchanges two positions") {
    Kernel k = parse_kernel(kChain);
    ApplyResult r = apply_edit(k, EditSwap{0, 1, {}, {}});
    REQUIRE(r.applied);
    CHECK(r.kernel.blocks[0].instructions[0].uid == 1);
    CHECK(r.kernel.blocks[0].instructions[1].uid == 0);
    CHECK(is_valid(r.kernel));
}

TEST_CASE("replace_instr takes over the victim's site and value") {
    Kernel k = parse_kernel(kChain);
    // Replace the fadd (uid 3) with a duplicate of the first fmul (uid 2).
    EditReplaceInstr rep;
    rep.victim_uid = 3;
    rep.donor_uid = 2;
    ApplyResult r = apply_edit(k, rep);
    REQUIRE(r.applied);
    const Instruction* at = r.kernel.find_uid(3);
    REQUIRE(at);
    CHECK(at->op == Opcode::FMul);
    REQUIRE(at->result);
    CHECK(*at->result == 3); // keeps %3 so the downstream use still resolves
    CHECK(is_valid(r.kernel));
}

TEST_CASE("replace_operand rebinding to an existing value") {
    Kernel k = parse_kernel(kChain);
    ApplyResult r = apply_edit(k, EditReplaceOperand{4, 1, Binding::value_ref(1)});
    REQUIRE(r.applied);
    const Instruction* at = r.kernel.find_uid(4);
    REQUIRE(at);
    CHECK(at->operands[1] == Operand::val(1));
    CHECK(is_valid(r.kernel));
}

TEST_CASE("binding to a vanished definition is inapplicable") {
    Kernel k = parse_kernel(kChain);
    PatchResult r = apply_patch(
        k, {EditDelete{1}, EditReplaceOperand{4, 1, Binding::value_ref(1)}});
    CHECK(r.applied.size() == 1);
}

TEST_CASE("patch application is pure and reproducible") {
    Kernel k = parse_kernel(kChain);
    Patch p{
        EditCopy{2, 3, {{0, Binding::constant(Literal::of_f32(1.0f))}}, Rewire{4, 1}},
        EditDelete{5},
        EditSwap{0, 1, {}, {}},
    };
    PatchResult r1 = apply_patch(k, p);
    PatchResult r2 = apply_patch(k, p);
    CHECK(structurally_equal(r1.kernel, r2.kernel));
    CHECK(r1.applied.size() == r2.applied.size());
}

TEST_CASE("applied edits form a subsequence of the patch") {
    Kernel k = parse_kernel(kChain);
    Rng rng(31);
    // Random patches full of valid and dangling anchors; whatever applies
    // must appear in order.
    for (int trial = 0; trial < 300; ++trial) {
        Patch p;
        size_t len = rng.index(6);
        for (size_t i = 0; i < len; ++i) {
            switch (rng.index(3)) {
            case 0: p.push_back(EditDelete{static_cast<int>(rng.index(10))}); break;
            case 1:
                p.push_back(EditReplaceOperand{static_cast<int>(rng.index(10)),
                                               static_cast<int>(rng.index(3)),
                                               Binding::constant(Literal::of_f32(2.0f))});
                break;
            default:
                p.push_back(EditSwap{static_cast<int>(rng.index(10)),
                                     static_cast<int>(rng.index(10)), {}, {}});
                break;
            }
        }
        PatchResult r = apply_patch(k, p);
        // Subsequence check: walk p, consuming applied in order.
        size_t ai = 0;
        for (const Edit& e : p)
            if (ai < r.applied.size() && r.applied[ai] == e)
                ++ai;
        CHECK(ai == r.applied.size());
    }
}

TEST_CASE("patch JSON round trip") {
    Patch p{
        EditCopy{2, 3, {{0, Binding::constant(Literal::of_f32(1.0f))}, {1, Binding::value_ref(0)}},
                 Rewire{4, 1}},
        EditDelete{5},
        EditMove{1, 5, {}, std::nullopt},
        EditReplaceInstr{3, 2, {{0, Binding::value_ref(1)}}},
        EditReplaceOperand{4, 1, Binding::constant(Literal::of_i32(7))},
        EditSwap{0, 1, {{0, Binding::value_ref(2)}}, {}},
    };
    Patch back = patch_from_json(patch_to_json(p));
    REQUIRE(back.size() == p.size());
    for (size_t i = 0; i < p.size(); ++i)
        CHECK(back[i] == p[i]);
}

TEST_CASE("recorded patch replays to the same kernel") {
    Kernel original = parse_kernel(kChain);
    Patch p{
        EditCopy{2, 3, {{0, Binding::constant(Literal::of_f32(1.0f))}}, Rewire{4, 1}},
        EditReplaceOperand{3, 0, Binding::value_ref(0)},
    };
    PatchResult first = apply_patch(original, p);
    // Serialize, re-parse, re-apply: same result.
    Kernel reloaded = parse_kernel(print_kernel(original));
    Patch pback = patch_from_json(patch_to_json(first.applied));
    PatchResult second = apply_patch(reloaded, pback);
    CHECK(structurally_equal(first.kernel, second.kernel));
}
