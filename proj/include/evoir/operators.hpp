#pragma once

#include "evoir/dom.hpp"
#include "evoir/genome.hpp"
#include "evoir/ir.hpp"
#include "evoir/rng.hpp"

#include <optional>
#include <utility>

namespace evoir {

// Everything a mutation draw needs. Mutable targets exclude phis and block
// terminators; replace_operand additionally reaches phi arms and branch
// conditions.
struct MutationContext {
    const Kernel& kernel;
    const DomTree& dom;
    Rng& rng;
    int size_hint = 1; // N for synthesized integer literals

    MutationContext(const Kernel& k, const DomTree& d, Rng& r);
};

// nullopt means NoCandidate: the kernel offers nothing for this operator.
using MutationResult = std::optional<Edit>;

// For each operand of `inst` whose definition would not dominate the
// position (block, index), picks a random same-type dominating definition,
// falling back to the constant 1.0 / 1 / true when none exists. Pointer
// slots have no constant fallback and are left alone when stranded.
std::vector<Rebind> repair_operands(const Kernel& k, const Instruction& inst, int block, int index,
                                    const DomTree& dom, Rng& rng);

MutationResult mutate_copy(MutationContext& ctx);
MutationResult mutate_delete(MutationContext& ctx);
MutationResult mutate_move(MutationContext& ctx);
MutationResult mutate_replace(MutationContext& ctx);
MutationResult mutate_swap(MutationContext& ctx);

// One of the five above, drawn with equal probability.
MutationResult random_mutation(MutationContext& ctx);

// Operator family of an edit, for acceptance telemetry. replace_instr and
// replace_operand both report as "replace".
enum class OperatorKind : uint8_t { Copy, Delete, Move, Replace, Swap };
OperatorKind operator_kind(const Edit& e);
const char* operator_kind_name(OperatorKind k);
constexpr int kOperatorCount = 5;

// One-point messy crossover: merge both parents' edit sequences, shuffle,
// cut once at a uniform point; the halves are the children. The children's
// multiset of edits always equals the parents' union.
std::pair<Patch, Patch> crossover_messy(const Patch& pa, const Patch& pb, Rng& rng);

} // namespace evoir
