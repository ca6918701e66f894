#include "evoir/dom.hpp"
#include "evoir/ir.hpp"

#include <unordered_map>
#include <unordered_set>

namespace evoir {

namespace {

struct Checker {
    const Kernel& k;
    std::vector<ValidationError> errors;

    void add(int uid, const char* rule, std::string detail) {
        errors.push_back({uid, rule, std::move(detail)});
    }

    // uid uniqueness and SSA single assignment.
    void check_identities() {
        std::unordered_set<int> uids;
        std::unordered_map<ValueId, int> defs;
        k.for_each_instruction([&](const BasicBlock&, const Instruction& inst) {
            if (!uids.insert(inst.uid).second)
                add(inst.uid, "uid-unique", "duplicate instruction uid");
            if (inst.result) {
                auto [it, fresh] = defs.emplace(*inst.result, inst.uid);
                if (!fresh)
                    add(inst.uid, "ssa-single-assignment",
                        "%" + std::to_string(*inst.result) + " already defined by uid " +
                            std::to_string(it->second));
            }
        });
    }

    // Exactly one terminator per block, and only as the last instruction.
    void check_terminators() {
        for (const auto& block : k.blocks) {
            if (block.instructions.empty()) {
                add(-1, "terminator", "block '" + block.label + "' is empty");
                continue;
            }
            for (size_t i = 0; i < block.instructions.size(); ++i) {
                const Instruction& inst = block.instructions[i];
                bool last = i + 1 == block.instructions.size();
                if (inst.is_terminator() && !last)
                    add(inst.uid, "terminator", "terminator before end of block '" + block.label + "'");
                if (!inst.is_terminator() && last)
                    add(inst.uid, "terminator", "block '" + block.label + "' lacks a terminator");
            }
        }
    }

    void check_labels() {
        for (const auto& block : k.blocks) {
            for (const auto& inst : block.instructions) {
                if (inst.op != Opcode::Br && inst.op != Opcode::Phi)
                    continue;
                for (const auto& label : inst.labels) {
                    int target = k.block_index(label);
                    if (target < 0)
                        add(inst.uid, "bad-label", "unknown block '" + label + "'");
                    else if (target == 0 && inst.op == Opcode::Br)
                        add(inst.uid, "bad-label", "branch to entry block");
                }
            }
        }
    }

    void check_phi_placement(const DomTree& dom) {
        for (size_t b = 0; b < k.blocks.size(); ++b) {
            const auto& block = k.blocks[b];
            bool body_seen = false;
            for (const auto& inst : block.instructions) {
                if (inst.is_phi()) {
                    if (body_seen)
                        add(inst.uid, "phi-placement", "phi after non-phi in block '" + block.label + "'");
                } else {
                    body_seen = true;
                }
            }
            // Incoming lists must cover the block's predecessors exactly.
            const auto& preds = dom.predecessors()[b];
            for (const auto& inst : block.instructions) {
                if (!inst.is_phi())
                    continue;
                if (inst.operands.size() != inst.labels.size()) {
                    add(inst.uid, "phi-placement", "phi arm count mismatch");
                    continue;
                }
                std::unordered_set<int> incoming;
                for (const auto& label : inst.labels) {
                    int pb = k.block_index(label);
                    if (pb >= 0 && !incoming.insert(pb).second)
                        add(inst.uid, "phi-placement", "duplicate incoming block '" + label + "'");
                }
                for (int p : preds)
                    if (!incoming.count(p))
                        add(inst.uid, "phi-placement",
                            "missing incoming value for predecessor '" + k.blocks[p].label + "'");
                for (int in : incoming) {
                    bool is_pred = false;
                    for (int p : preds)
                        if (p == in)
                            is_pred = true;
                    if (!is_pred)
                        add(inst.uid, "phi-placement",
                            "incoming block '" + k.blocks[in].label + "' is not a predecessor");
                }
            }
        }
    }

    void check_reachability(const DomTree& dom) {
        for (size_t b = 0; b < k.blocks.size(); ++b)
            if (!dom.reachable(static_cast<int>(b)))
                add(-1, "unreachable-block", "block '" + k.blocks[b].label + "' unreachable from entry");
    }

    void expect_type(const Instruction& inst, size_t slot, Type want) {
        if (slot >= inst.operands.size())
            return; // arity reported separately
        auto got = operand_type(k, inst.operands[slot]);
        if (!got) {
            if (inst.operands[slot].is_value())
                add(inst.uid, "undef-value",
                    "%" + std::to_string(inst.operands[slot].value) + " has no definition");
            else
                add(inst.uid, "type-signature", "unresolvable operand");
            return;
        }
        if (*got != want)
            add(inst.uid, "type-signature",
                std::string("operand ") + std::to_string(slot) + " is " + to_string(*got) +
                    ", expected " + to_string(want));
    }

    void check_arity(const Instruction& inst, size_t want) {
        if (inst.operands.size() != want)
            add(inst.uid, "type-signature",
                std::string(opcode_name(inst.op)) + " expects " + std::to_string(want) + " operands");
    }

    void check_signature(const Instruction& inst) {
        const bool has_result = inst.result.has_value();
        auto require_result = [&](bool want) {
            if (want && !has_result)
                add(inst.uid, "type-signature", std::string(opcode_name(inst.op)) + " must define a value");
            if (!want && has_result)
                add(inst.uid, "type-signature", std::string(opcode_name(inst.op)) + " defines no value");
        };

        switch (inst.op) {
        case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::SDiv:
            require_result(true);
            check_arity(inst, 2);
            if (inst.type != Type::i32())
                add(inst.uid, "type-signature", "integer arithmetic must be i32");
            expect_type(inst, 0, Type::i32());
            expect_type(inst, 1, Type::i32());
            break;
        case Opcode::FAdd: case Opcode::FSub: case Opcode::FMul: case Opcode::FDiv:
            require_result(true);
            check_arity(inst, 2);
            if (inst.type != Type::f32())
                add(inst.uid, "type-signature", "float arithmetic must be f32");
            expect_type(inst, 0, Type::f32());
            expect_type(inst, 1, Type::f32());
            break;
        case Opcode::ICmp:
            require_result(true);
            check_arity(inst, 2);
            expect_type(inst, 0, Type::i32());
            expect_type(inst, 1, Type::i32());
            break;
        case Opcode::FCmp:
            require_result(true);
            check_arity(inst, 2);
            expect_type(inst, 0, Type::f32());
            expect_type(inst, 1, Type::f32());
            break;
        case Opcode::Select:
            require_result(true);
            check_arity(inst, 3);
            if (!inst.type.is_scalar())
                add(inst.uid, "type-signature", "select produces a scalar");
            expect_type(inst, 0, Type::boolean());
            expect_type(inst, 1, inst.type);
            expect_type(inst, 2, inst.type);
            break;
        case Opcode::Load: {
            require_result(true);
            check_arity(inst, 2);
            if (inst.type != Type::i32() && inst.type != Type::f32())
                add(inst.uid, "type-signature", "load type must be i32 or f32");
            if (!inst.operands.empty()) {
                auto pt = operand_type(k, inst.operands[0]);
                if (!pt || !pt->is_ptr())
                    add(inst.uid, "type-signature", "load address must be a pointer");
            }
            expect_type(inst, 1, Type::i32());
            break;
        }
        case Opcode::Store: {
            require_result(false);
            check_arity(inst, 3);
            if (!inst.operands.empty()) {
                auto pt = operand_type(k, inst.operands[0]);
                if (!pt || !pt->is_ptr())
                    add(inst.uid, "type-signature", "store address must be a pointer");
            }
            expect_type(inst, 1, Type::i32());
            if (inst.operands.size() == 3) {
                auto vt = operand_type(k, inst.operands[2]);
                if (vt && (*vt != Type::i32() && *vt != Type::f32()))
                    add(inst.uid, "type-signature", "stored value must be i32 or f32");
                if (!vt && inst.operands[2].is_value())
                    add(inst.uid, "undef-value",
                        "%" + std::to_string(inst.operands[2].value) + " has no definition");
            }
            break;
        }
        case Opcode::GetIndex: {
            require_result(true);
            check_arity(inst, 2);
            if (!inst.type.is_ptr())
                add(inst.uid, "type-signature", "getindex produces a pointer");
            if (!inst.operands.empty()) {
                auto pt = operand_type(k, inst.operands[0]);
                if (!pt || !pt->is_ptr())
                    add(inst.uid, "type-signature", "getindex base must be a pointer");
                else if (pt->space != inst.type.space)
                    add(inst.uid, "type-signature", "getindex changes address space");
            }
            expect_type(inst, 1, Type::i32());
            break;
        }
        case Opcode::Phi:
            require_result(true);
            if (inst.operands.empty())
                add(inst.uid, "type-signature", "phi needs at least one arm");
            for (size_t i = 0; i < inst.operands.size(); ++i)
                expect_type(inst, i, inst.type);
            break;
        case Opcode::Br:
            require_result(false);
            if (inst.labels.size() == 2) {
                check_arity(inst, 1);
                expect_type(inst, 0, Type::boolean());
            } else if (inst.labels.size() == 1) {
                check_arity(inst, 0);
            } else {
                add(inst.uid, "type-signature", "br needs one or two targets");
            }
            break;
        case Opcode::Sync:
        case Opcode::Ret:
            require_result(false);
            check_arity(inst, 0);
            break;
        case Opcode::Tid:
        case Opcode::NThreads:
            require_result(true);
            check_arity(inst, 0);
            if (inst.type != Type::i32())
                add(inst.uid, "type-signature", "intrinsic type must be i32");
            break;
        case Opcode::Const:
            require_result(true);
            check_arity(inst, 0);
            if (inst.const_value.type() != inst.type)
                add(inst.uid, "type-signature", "const literal does not match declared type");
            break;
        }
    }

    void check_dominance(const DomTree& dom) {
        std::unordered_map<ValueId, int> def_uid;
        k.for_each_instruction([&](const BasicBlock&, const Instruction& inst) {
            if (inst.result)
                def_uid.emplace(*inst.result, inst.uid);
        });
        k.for_each_instruction([&](const BasicBlock&, const Instruction& inst) {
            for (size_t s = 0; s < inst.operands.size(); ++s) {
                const Operand& o = inst.operands[s];
                if (!o.is_value())
                    continue;
                auto it = def_uid.find(o.value);
                if (it == def_uid.end())
                    continue; // undef-value reported by signature pass
                if (it->second == inst.uid) {
                    add(inst.uid, "use-not-dominated", "instruction uses its own result");
                    continue;
                }
                if (!dom.dominates_use(k, it->second, inst, s))
                    add(inst.uid, "use-not-dominated",
                        "%" + std::to_string(o.value) + " does not dominate this use");
            }
        });
    }

    void check_sync_placement() {
        bool any_sync = false;
        k.for_each_instruction([&](const BasicBlock&, const Instruction& inst) {
            if (inst.op == Opcode::Sync)
                any_sync = true;
        });
        if (!any_sync)
            return;
        std::vector<bool> divergent = thread_divergent_blocks(k);
        for (size_t b = 0; b < k.blocks.size(); ++b) {
            if (!divergent[b])
                continue;
            for (const auto& inst : k.blocks[b].instructions)
                if (inst.op == Opcode::Sync)
                    add(inst.uid, "sync-divergent",
                        "barrier in block '" + k.blocks[b].label + "' whose execution may depend on thread id");
        }
    }
};

} // namespace

std::vector<ValidationError> validate(const Kernel& k) {
    Checker c{k, {}};
    if (k.blocks.empty()) {
        c.add(-1, "terminator", "kernel has no blocks");
        return c.errors;
    }
    c.check_identities();
    c.check_terminators();
    c.check_labels();

    // Structural prerequisites for CFG analyses: bail out early if the shape
    // is broken badly enough that the dominator walk would be meaningless.
    bool shape_ok = true;
    for (const auto& e : c.errors)
        if (e.rule == std::string("terminator") || e.rule == std::string("bad-label") ||
            e.rule == std::string("uid-unique"))
            shape_ok = false;
    if (!shape_ok)
        return c.errors;

    DomTree dom = DomTree::build(k);
    c.check_phi_placement(dom);
    c.check_reachability(dom);
    k.for_each_instruction([&](const BasicBlock&, const Instruction& inst) { c.check_signature(inst); });
    c.check_dominance(dom);
    c.check_sync_placement();
    return c.errors;
}

} // namespace evoir
