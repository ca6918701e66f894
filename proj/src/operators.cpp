#include "evoir/operators.hpp"

#include <algorithm>

namespace evoir {

namespace {

bool is_mutable_target(const Instruction& inst) {
    return !inst.is_phi() && !inst.is_terminator();
}

std::vector<int> mutable_uids(const Kernel& k) {
    std::vector<int> out;
    k.for_each_instruction([&](const BasicBlock&, const Instruction& inst) {
        if (is_mutable_target(inst))
            out.push_back(inst.uid);
    });
    return out;
}

struct InsertPoint {
    int block;
    int index;
    int before_uid;
};

// A new instruction may land in front of any non-phi instruction,
// terminators included (that is how "append to block" is expressed).
std::vector<InsertPoint> insertion_points(const Kernel& k) {
    std::vector<InsertPoint> out;
    for (size_t b = 0; b < k.blocks.size(); ++b) {
        const auto& insts = k.blocks[b].instructions;
        for (size_t i = 0; i < insts.size(); ++i)
            if (!insts[i].is_phi())
                out.push_back({static_cast<int>(b), static_cast<int>(i), insts[i].uid});
    }
    return out;
}

// Definitions of the requested type that dominate (block, index), in
// program order for reproducible sampling.
std::vector<int> dominating_defs(const Kernel& k, const DomTree& dom, Type want, int block,
                                 int index) {
    std::vector<int> out;
    k.for_each_instruction([&](const BasicBlock&, const Instruction& inst) {
        if (!inst.result || inst.result_type() != want)
            return;
        if (dom.dominates_position(inst.uid, block, index))
            out.push_back(inst.uid);
    });
    return out;
}

Literal fallback_literal(Type t) {
    switch (t.kind) {
    case TypeKind::F32: return Literal::of_f32(1.0f);
    case TypeKind::I32: return Literal::of_i32(1);
    case TypeKind::Bool: return Literal::of_bool(true);
    default: return Literal::of_i32(1);
    }
}

int find_def_uid(const Kernel& k, ValueId v) {
    int uid = -1;
    k.for_each_instruction([&](const BasicBlock&, const Instruction& inst) {
        if (inst.result && *inst.result == v)
            uid = inst.uid;
    });
    return uid;
}

// Rewire slots: operand positions the inserted result could feed. Must be
// type compatible and strictly after (dominated by) the insertion point.
// Phi arms are excluded; their use sites live in predecessor blocks.
std::vector<Rewire> rewire_slots(const Kernel& k, const DomTree& dom, Type produced, int block,
                                 int index, int skip_uid) {
    std::vector<Rewire> out;
    for (size_t b = 0; b < k.blocks.size(); ++b) {
        const auto& insts = k.blocks[b].instructions;
        for (size_t i = 0; i < insts.size(); ++i) {
            const Instruction& inst = insts[i];
            if (inst.is_phi() || inst.uid == skip_uid)
                continue;
            bool below = static_cast<int>(b) == block
                             ? static_cast<int>(i) >= index
                             : (dom.block_dominates(block, static_cast<int>(b)) &&
                                static_cast<int>(b) != block);
            if (!below)
                continue;
            for (size_t s = 0; s < inst.operands.size(); ++s) {
                auto want = slot_type(k, inst, s);
                if (want && *want == produced)
                    out.push_back({inst.uid, static_cast<int>(s)});
            }
        }
    }
    return out;
}

} // namespace

MutationContext::MutationContext(const Kernel& k, const DomTree& d, Rng& r)
    : kernel(k), dom(d), rng(r) {
    int hint = k.threads;
    k.for_each_instruction([&](const BasicBlock&, const Instruction& inst) {
        for (const auto& o : inst.operands)
            if (o.kind == Operand::Kind::Lit && o.lit.kind == TypeKind::I32)
                hint = std::max(hint, o.lit.i);
        if (inst.op == Opcode::Const && inst.const_value.kind == TypeKind::I32)
            hint = std::max(hint, inst.const_value.i);
    });
    size_hint = std::max(hint, 2);
}

std::vector<Rebind> repair_operands(const Kernel& k, const Instruction& inst, int block, int index,
                                    const DomTree& dom, Rng& rng) {
    std::vector<Rebind> rebinds;
    for (size_t s = 0; s < inst.operands.size(); ++s) {
        const Operand& o = inst.operands[s];
        if (!o.is_value())
            continue; // literals and params are defined everywhere
        int def = find_def_uid(k, o.value);
        if (def >= 0 && def != inst.uid && dom.dominates_position(def, block, index))
            continue;

        auto want = slot_type(k, inst, s);
        if (!want)
            continue;
        std::vector<int> candidates = dominating_defs(k, dom, *want, block, index);
        candidates.erase(std::remove(candidates.begin(), candidates.end(), inst.uid),
                         candidates.end());
        if (!candidates.empty()) {
            rebinds.push_back({static_cast<int>(s), Binding::value_ref(rng.pick(candidates))});
        } else if (want->is_scalar()) {
            rebinds.push_back({static_cast<int>(s), Binding::constant(fallback_literal(*want))});
        }
        // Stranded pointer slots stay as they are; the sanity check decides.
    }
    return rebinds;
}

MutationResult mutate_copy(MutationContext& ctx) {
    std::vector<int> targets = mutable_uids(ctx.kernel);
    if (targets.empty())
        return std::nullopt;
    std::vector<InsertPoint> points = insertion_points(ctx.kernel);
    if (points.empty())
        return std::nullopt;

    int src = ctx.rng.pick(targets);
    InsertPoint at = ctx.rng.pick(points);
    const Instruction* inst = ctx.kernel.find_uid(src);

    EditCopy edit;
    edit.src_uid = src;
    edit.before_uid = at.before_uid;
    edit.rebinds = repair_operands(ctx.kernel, *inst, at.block, at.index, ctx.dom, ctx.rng);
    if (inst->result) {
        std::vector<Rewire> slots =
            rewire_slots(ctx.kernel, ctx.dom, inst->result_type(), at.block, at.index, -1);
        if (!slots.empty())
            edit.rewire = ctx.rng.pick(slots);
        // No consumer available: emit anyway, the insertion is then inert.
    }
    return Edit{edit};
}

MutationResult mutate_delete(MutationContext& ctx) {
    std::vector<int> targets = mutable_uids(ctx.kernel);
    if (targets.empty())
        return std::nullopt;
    return Edit{EditDelete{ctx.rng.pick(targets)}};
}

MutationResult mutate_move(MutationContext& ctx) {
    std::vector<int> targets = mutable_uids(ctx.kernel);
    if (targets.empty())
        return std::nullopt;
    int uid = ctx.rng.pick(targets);
    std::vector<InsertPoint> points = insertion_points(ctx.kernel);
    points.erase(std::remove_if(points.begin(), points.end(),
                                [&](const InsertPoint& p) { return p.before_uid == uid; }),
                 points.end());
    if (points.empty())
        return std::nullopt;
    InsertPoint at = ctx.rng.pick(points);

    // Plan the repair on the moved shape: materialize the bare move, then
    // patch up operands at the instruction's landing position.
    EditMove edit;
    edit.uid = uid;
    edit.before_uid = at.before_uid;
    ApplyResult moved = apply_edit(ctx.kernel, Edit{edit});
    if (!moved.applied)
        return std::nullopt;
    DomTree dom = DomTree::build(moved.kernel);
    auto pos = moved.kernel.locate(uid);
    const Instruction* inst = moved.kernel.find_uid(uid);
    edit.rebinds =
        repair_operands(moved.kernel, *inst, pos->first, pos->second, dom, ctx.rng);
    if (inst->result) {
        std::vector<Rewire> slots = rewire_slots(moved.kernel, dom, inst->result_type(),
                                                 pos->first, pos->second, uid);
        if (!slots.empty() && ctx.rng.chance(0.5))
            edit.rewire = ctx.rng.pick(slots);
    }
    return Edit{edit};
}

namespace {

MutationResult replace_instruction_level(MutationContext& ctx) {
    std::vector<int> targets = mutable_uids(ctx.kernel);
    if (targets.empty())
        return std::nullopt;

    // Victims need at least one donor producing the same kind of value.
    struct Pair {
        int victim;
        std::vector<int> donors;
    };
    std::vector<Pair> feasible;
    for (int victim_uid : targets) {
        const Instruction* victim = ctx.kernel.find_uid(victim_uid);
        std::vector<int> donors;
        for (int donor_uid : targets) {
            if (donor_uid == victim_uid)
                continue;
            const Instruction* donor = ctx.kernel.find_uid(donor_uid);
            bool compatible = victim->result
                                  ? (donor->result && donor->result_type() == victim->result_type())
                                  : !donor->result;
            if (compatible)
                donors.push_back(donor_uid);
        }
        if (!donors.empty())
            feasible.push_back({victim_uid, std::move(donors)});
    }
    if (feasible.empty())
        return std::nullopt;
    const Pair& chosen = feasible[ctx.rng.index(feasible.size())];
    int donor_uid = chosen.donors[ctx.rng.index(chosen.donors.size())];

    EditReplaceInstr edit;
    edit.victim_uid = chosen.victim;
    edit.donor_uid = donor_uid;
    auto pos = ctx.kernel.locate(chosen.victim);
    const Instruction* donor = ctx.kernel.find_uid(donor_uid);
    Instruction staged = *donor;
    staged.uid = chosen.victim; // dominance checks must treat it as the victim's site
    edit.rebinds =
        repair_operands(ctx.kernel, staged, pos->first, pos->second, ctx.dom, ctx.rng);
    return Edit{edit};
}

MutationResult replace_operand_level(MutationContext& ctx) {
    // Any operand slot, branch conditions and phi arms included.
    struct Slot {
        int uid;
        int slot;
    };
    std::vector<Slot> slots;
    ctx.kernel.for_each_instruction([&](const BasicBlock&, const Instruction& inst) {
        for (size_t s = 0; s < inst.operands.size(); ++s)
            slots.push_back({inst.uid, static_cast<int>(s)});
    });
    if (slots.empty())
        return std::nullopt;

    for (int attempt = 0; attempt < 8; ++attempt) {
        Slot chosen = slots[ctx.rng.index(slots.size())];
        const Instruction* inst = ctx.kernel.find_uid(chosen.uid);
        auto want = slot_type(ctx.kernel, *inst, static_cast<size_t>(chosen.slot));
        if (!want)
            continue;

        if (want->is_scalar() && ctx.rng.chance(0.25)) {
            // Synthesized literal: how loop bounds and magic numbers move.
            Literal lit;
            if (want->kind == TypeKind::I32) {
                const int n = ctx.size_hint;
                const int32_t pool[5] = {0, 1, 2, n / 2, n - 1};
                lit = Literal::of_i32(pool[ctx.rng.index(5)]);
            } else if (want->kind == TypeKind::F32) {
                const float pool[4] = {0.0f, 0.5f, 1.0f, 2.0f};
                lit = Literal::of_f32(pool[ctx.rng.index(4)]);
            } else {
                lit = Literal::of_bool(ctx.rng.index(2) == 0);
            }
            return Edit{EditReplaceOperand{chosen.uid, chosen.slot, Binding::constant(lit)}};
        }

        // Rebind to a dominating definition of the same type.
        std::vector<int> candidates;
        ctx.kernel.for_each_instruction([&](const BasicBlock&, const Instruction& def) {
            if (!def.result || def.result_type() != *want || def.uid == chosen.uid)
                return;
            if (ctx.dom.dominates_use(ctx.kernel, def.uid, *inst, static_cast<size_t>(chosen.slot)))
                candidates.push_back(def.uid);
        });
        if (!candidates.empty())
            return Edit{EditReplaceOperand{chosen.uid, chosen.slot,
                                           Binding::value_ref(ctx.rng.pick(candidates))}};
        if (want->is_scalar())
            return Edit{EditReplaceOperand{chosen.uid, chosen.slot,
                                           Binding::constant(fallback_literal(*want))}};
        // Pointer slot with no alternative: try another slot.
    }
    return std::nullopt;
}

} // namespace

MutationResult mutate_replace(MutationContext& ctx) {
    if (ctx.rng.chance(0.5))
        return replace_instruction_level(ctx);
    return replace_operand_level(ctx);
}

MutationResult mutate_swap(MutationContext& ctx) {
    std::vector<int> targets = mutable_uids(ctx.kernel);
    if (targets.size() < 2)
        return std::nullopt;
    size_t ai = ctx.rng.index(targets.size());
    size_t bi = ctx.rng.index(targets.size() - 1);
    if (bi >= ai)
        ++bi;
    EditSwap edit;
    edit.uid_a = targets[ai];
    edit.uid_b = targets[bi];

    ApplyResult swapped = apply_edit(ctx.kernel, Edit{edit});
    if (!swapped.applied)
        return std::nullopt;
    DomTree dom = DomTree::build(swapped.kernel);
    for (int which = 0; which < 2; ++which) {
        int uid = which == 0 ? edit.uid_a : edit.uid_b;
        auto pos = swapped.kernel.locate(uid);
        const Instruction* inst = swapped.kernel.find_uid(uid);
        auto rebinds =
            repair_operands(swapped.kernel, *inst, pos->first, pos->second, dom, ctx.rng);
        (which == 0 ? edit.rebinds_a : edit.rebinds_b) = std::move(rebinds);
    }
    return Edit{edit};
}

MutationResult random_mutation(MutationContext& ctx) {
    switch (ctx.rng.index(5)) {
    case 0: return mutate_copy(ctx);
    case 1: return mutate_delete(ctx);
    case 2: return mutate_move(ctx);
    case 3: return mutate_replace(ctx);
    default: return mutate_swap(ctx);
    }
}

OperatorKind operator_kind(const Edit& e) {
    struct Visitor {
        OperatorKind operator()(const EditCopy&) const { return OperatorKind::Copy; }
        OperatorKind operator()(const EditDelete&) const { return OperatorKind::Delete; }
        OperatorKind operator()(const EditMove&) const { return OperatorKind::Move; }
        OperatorKind operator()(const EditReplaceInstr&) const { return OperatorKind::Replace; }
        OperatorKind operator()(const EditReplaceOperand&) const { return OperatorKind::Replace; }
        OperatorKind operator()(const EditSwap&) const { return OperatorKind::Swap; }
    };
    return std::visit(Visitor{}, e);
}

const char* operator_kind_name(OperatorKind k) {
    switch (k) {
    case OperatorKind::Copy: return "copy";
    case OperatorKind::Delete: return "delete";
    case OperatorKind::Move: return "move";
    case OperatorKind::Replace: return "replace";
    case OperatorKind::Swap: return "swap";
    }
    return "?";
}

std::pair<Patch, Patch> crossover_messy(const Patch& pa, const Patch& pb, Rng& rng) {
    Patch combined;
    combined.reserve(pa.size() + pb.size());
    combined.insert(combined.end(), pa.begin(), pa.end());
    combined.insert(combined.end(), pb.begin(), pb.end());
    rng.shuffle(combined);
    size_t split = rng.index(combined.size() + 1); // inclusive of both ends
    Patch left(combined.begin(), combined.begin() + static_cast<long>(split));
    Patch right(combined.begin() + static_cast<long>(split), combined.end());
    return {std::move(left), std::move(right)};
}

} // namespace evoir
