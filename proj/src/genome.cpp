#include "evoir/genome.hpp"

#include <json.hpp>

#include <unordered_set>

namespace evoir {

const char* edit_kind_name(const Edit& e) {
    struct Visitor {
        const char* operator()(const EditCopy&) const { return "copy"; }
        const char* operator()(const EditDelete&) const { return "delete"; }
        const char* operator()(const EditMove&) const { return "move"; }
        const char* operator()(const EditReplaceInstr&) const { return "replace_instr"; }
        const char* operator()(const EditReplaceOperand&) const { return "replace_operand"; }
        const char* operator()(const EditSwap&) const { return "swap"; }
    };
    return std::visit(Visitor{}, e);
}

namespace {

constexpr int kFreshUidBase = 1'000'000;

uint64_t mix64(uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

// Fresh uid for an inserted instruction, derived from the edit's anchors so
// that replaying the same edit in the same context reproduces the same uid.
int fresh_uid(const Kernel& k, int src_uid, int anchor_uid) {
    std::unordered_set<int> taken;
    k.for_each_instruction([&](const BasicBlock&, const Instruction& i) { taken.insert(i.uid); });
    uint64_t h = mix64((static_cast<uint64_t>(static_cast<uint32_t>(src_uid)) << 32) |
                       static_cast<uint32_t>(anchor_uid));
    for (;;) {
        int candidate = kFreshUidBase + static_cast<int>(h % 1'000'000);
        if (!taken.count(candidate))
            return candidate;
        h = mix64(h + 1);
    }
}

// Resolve a binding into a concrete operand. Returns nullopt when a
// referenced definition is gone (edit is then inapplicable).
std::optional<Operand> resolve_binding(const Kernel& k, const Binding& b) {
    if (b.kind == Binding::Kind::ConstFallback)
        return Operand::literal(b.lit);
    const Instruction* def = k.find_uid(b.def_uid);
    if (!def || !def->result)
        return std::nullopt;
    return Operand::val(*def->result);
}

bool apply_rebinds(const Kernel& k, Instruction& inst, const std::vector<Rebind>& rebinds) {
    for (const Rebind& r : rebinds) {
        if (r.slot < 0 || r.slot >= static_cast<int>(inst.operands.size()))
            return false;
        auto op = resolve_binding(k, r.binding);
        if (!op)
            return false;
        inst.operands[static_cast<size_t>(r.slot)] = *op;
    }
    return true;
}

struct Applier {
    const Kernel& k;

    ApplyResult fail() const { return {k, false}; }
    ApplyResult ok(Kernel kernel) const { return {std::move(kernel), true}; }

    ApplyResult operator()(const EditCopy& e) const {
        auto src_pos = k.locate(e.src_uid);
        auto anchor_pos = k.locate(e.before_uid);
        if (!src_pos || !anchor_pos)
            return fail();

        Kernel out = k;
        Instruction copy = out.blocks[src_pos->first].instructions[src_pos->second];
        copy.uid = fresh_uid(out, e.src_uid, e.before_uid);
        if (copy.result)
            copy.result = out.max_value_id() + 1;
        if (!apply_rebinds(out, copy, e.rebinds))
            return fail();

        ValueId copy_result = copy.result ? *copy.result : -1;
        auto& anchor_block = out.blocks[anchor_pos->first].instructions;
        anchor_block.insert(anchor_block.begin() + anchor_pos->second, std::move(copy));

        if (e.rewire) {
            if (copy_result < 0)
                return fail();
            auto target = out.locate(e.rewire->target_uid);
            if (!target)
                return fail();
            Instruction& t = out.blocks[target->first].instructions[target->second];
            if (e.rewire->slot < 0 || e.rewire->slot >= static_cast<int>(t.operands.size()))
                return fail();
            t.operands[static_cast<size_t>(e.rewire->slot)] = Operand::val(copy_result);
        }
        return ok(std::move(out));
    }

    ApplyResult operator()(const EditDelete& e) const {
        auto pos = k.locate(e.uid);
        if (!pos)
            return fail();
        Kernel out = k;
        auto& insts = out.blocks[pos->first].instructions;
        insts.erase(insts.begin() + pos->second);
        return ok(std::move(out));
    }

    ApplyResult operator()(const EditMove& e) const {
        if (e.uid == e.before_uid)
            return fail();
        auto pos = k.locate(e.uid);
        auto anchor = k.locate(e.before_uid);
        if (!pos || !anchor)
            return fail();

        Kernel out = k;
        Instruction moved = out.blocks[pos->first].instructions[pos->second];
        auto& from = out.blocks[pos->first].instructions;
        from.erase(from.begin() + pos->second);

        auto anchor2 = out.locate(e.before_uid); // position after the erase
        if (!anchor2)
            return fail();
        if (!apply_rebinds(out, moved, e.rebinds))
            return fail();
        ValueId moved_result = moved.result ? *moved.result : -1;
        auto& to = out.blocks[anchor2->first].instructions;
        to.insert(to.begin() + anchor2->second, std::move(moved));

        if (e.rewire) {
            if (moved_result < 0)
                return fail();
            auto target = out.locate(e.rewire->target_uid);
            if (!target)
                return fail();
            Instruction& t = out.blocks[target->first].instructions[target->second];
            if (e.rewire->slot < 0 || e.rewire->slot >= static_cast<int>(t.operands.size()))
                return fail();
            t.operands[static_cast<size_t>(e.rewire->slot)] = Operand::val(moved_result);
        }
        return ok(std::move(out));
    }

    ApplyResult operator()(const EditReplaceInstr& e) const {
        auto victim_pos = k.locate(e.victim_uid);
        auto donor_pos = k.locate(e.donor_uid);
        if (!victim_pos || !donor_pos)
            return fail();

        Kernel out = k;
        const Instruction victim = out.blocks[victim_pos->first].instructions[victim_pos->second];
        Instruction repl = out.blocks[donor_pos->first].instructions[donor_pos->second];
        repl.uid = victim.uid; // the replacement takes over the victim's site
        if (repl.result)
            repl.result = victim.result ? victim.result : std::optional<ValueId>(out.max_value_id() + 1);
        if (!apply_rebinds(out, repl, e.rebinds))
            return fail();
        out.blocks[victim_pos->first].instructions[victim_pos->second] = std::move(repl);
        return ok(std::move(out));
    }

    ApplyResult operator()(const EditReplaceOperand& e) const {
        auto pos = k.locate(e.uid);
        if (!pos)
            return fail();
        Kernel out = k;
        Instruction& inst = out.blocks[pos->first].instructions[pos->second];
        if (e.slot < 0 || e.slot >= static_cast<int>(inst.operands.size()))
            return fail();
        auto op = resolve_binding(out, e.binding);
        if (!op)
            return fail();
        inst.operands[static_cast<size_t>(e.slot)] = *op;
        return ok(std::move(out));
    }

    ApplyResult operator()(const EditSwap& e) const {
        if (e.uid_a == e.uid_b)
            return fail();
        auto pa = k.locate(e.uid_a);
        auto pb = k.locate(e.uid_b);
        if (!pa || !pb)
            return fail();
        Kernel out = k;
        std::swap(out.blocks[pa->first].instructions[pa->second],
                  out.blocks[pb->first].instructions[pb->second]);
        // After the swap, a sits where b was and vice versa.
        Instruction& a_now = out.blocks[pb->first].instructions[pb->second];
        Instruction& b_now = out.blocks[pa->first].instructions[pa->second];
        if (!apply_rebinds(out, a_now, e.rebinds_a))
            return fail();
        if (!apply_rebinds(out, b_now, e.rebinds_b))
            return fail();
        return ok(std::move(out));
    }
};

} // namespace

ApplyResult apply_edit(const Kernel& k, const Edit& e) {
    return std::visit(Applier{k}, e);
}

PatchResult apply_patch(const Kernel& original, const Patch& p) {
    PatchResult result;
    result.kernel = original;
    for (const Edit& e : p) {
        ApplyResult step = apply_edit(result.kernel, e);
        if (step.applied) {
            result.kernel = std::move(step.kernel);
            result.applied.push_back(e);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json literal_to_json(const Literal& l) {
    json j;
    switch (l.kind) {
    case TypeKind::I32: j["type"] = "i32"; j["value"] = l.i; break;
    case TypeKind::F32: j["type"] = "f32"; j["value"] = static_cast<double>(l.f); break;
    case TypeKind::Bool: j["type"] = "bool"; j["value"] = l.b; break;
    default: break;
    }
    return j;
}

Literal literal_from_json(const json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "i32") return Literal::of_i32(j.at("value").get<int32_t>());
    if (type == "f32") return Literal::of_f32(static_cast<float>(j.at("value").get<double>()));
    if (type == "bool") return Literal::of_bool(j.at("value").get<bool>());
    throw std::runtime_error("unknown literal type '" + type + "'");
}

json binding_to_json(const Binding& b) {
    json j;
    if (b.kind == Binding::Kind::ValueRef)
        j["val"] = b.def_uid;
    else
        j["lit"] = literal_to_json(b.lit);
    return j;
}

Binding binding_from_json(const json& j) {
    if (j.contains("val"))
        return Binding::value_ref(j.at("val").get<int>());
    return Binding::constant(literal_from_json(j.at("lit")));
}

json rebinds_to_json(const std::vector<Rebind>& rebinds) {
    json arr = json::array();
    for (const Rebind& r : rebinds) {
        json j = binding_to_json(r.binding);
        j["slot"] = r.slot;
        arr.push_back(j);
    }
    return arr;
}

std::vector<Rebind> rebinds_from_json(const json& arr) {
    std::vector<Rebind> out;
    for (const auto& j : arr)
        out.push_back({j.at("slot").get<int>(), binding_from_json(j)});
    return out;
}

json edit_to_json(const Edit& e) {
    json j;
    j["op"] = edit_kind_name(e);
    struct Visitor {
        json& j;
        void operator()(const EditCopy& c) const {
            j["src"] = c.src_uid;
            j["before"] = c.before_uid;
            j["rebinds"] = rebinds_to_json(c.rebinds);
            if (c.rewire)
                j["rewire"] = {{"uid", c.rewire->target_uid}, {"slot", c.rewire->slot}};
        }
        void operator()(const EditDelete& d) const { j["uid"] = d.uid; }
        void operator()(const EditMove& m) const {
            j["uid"] = m.uid;
            j["before"] = m.before_uid;
            j["rebinds"] = rebinds_to_json(m.rebinds);
            if (m.rewire)
                j["rewire"] = {{"uid", m.rewire->target_uid}, {"slot", m.rewire->slot}};
        }
        void operator()(const EditReplaceInstr& r) const {
            j["victim"] = r.victim_uid;
            j["donor"] = r.donor_uid;
            j["rebinds"] = rebinds_to_json(r.rebinds);
        }
        void operator()(const EditReplaceOperand& r) const {
            j["uid"] = r.uid;
            j["slot"] = r.slot;
            j["bind"] = binding_to_json(r.binding);
        }
        void operator()(const EditSwap& s) const {
            j["a"] = s.uid_a;
            j["b"] = s.uid_b;
            j["rebinds_a"] = rebinds_to_json(s.rebinds_a);
            j["rebinds_b"] = rebinds_to_json(s.rebinds_b);
        }
    };
    std::visit(Visitor{j}, e);
    return j;
}

Edit edit_from_json(const json& j) {
    std::string op = j.at("op").get<std::string>();
    if (op == "copy") {
        EditCopy e;
        e.src_uid = j.at("src").get<int>();
        e.before_uid = j.at("before").get<int>();
        e.rebinds = rebinds_from_json(j.at("rebinds"));
        if (j.contains("rewire"))
            e.rewire = Rewire{j["rewire"].at("uid").get<int>(), j["rewire"].at("slot").get<int>()};
        return e;
    }
    if (op == "delete")
        return EditDelete{j.at("uid").get<int>()};
    if (op == "move") {
        EditMove e;
        e.uid = j.at("uid").get<int>();
        e.before_uid = j.at("before").get<int>();
        e.rebinds = rebinds_from_json(j.at("rebinds"));
        if (j.contains("rewire"))
            e.rewire = Rewire{j["rewire"].at("uid").get<int>(), j["rewire"].at("slot").get<int>()};
        return e;
    }
    if (op == "replace_instr") {
        EditReplaceInstr e;
        e.victim_uid = j.at("victim").get<int>();
        e.donor_uid = j.at("donor").get<int>();
        e.rebinds = rebinds_from_json(j.at("rebinds"));
        return e;
    }
    if (op == "replace_operand") {
        EditReplaceOperand e;
        e.uid = j.at("uid").get<int>();
        e.slot = j.at("slot").get<int>();
        e.binding = binding_from_json(j.at("bind"));
        return e;
    }
    if (op == "swap") {
        EditSwap e;
        e.uid_a = j.at("a").get<int>();
        e.uid_b = j.at("b").get<int>();
        e.rebinds_a = rebinds_from_json(j.at("rebinds_a"));
        e.rebinds_b = rebinds_from_json(j.at("rebinds_b"));
        return e;
    }
    throw std::runtime_error("unknown edit kind '" + op + "'");
}

} // namespace

std::string patch_to_json(const Patch& p) {
    json arr = json::array();
    for (const Edit& e : p)
        arr.push_back(edit_to_json(e));
    return arr.dump(2) + "\n";
}

Patch patch_from_json(const std::string& text) {
    json arr = json::parse(text);
    if (!arr.is_array())
        throw std::runtime_error("patch JSON must be an array of edits");
    Patch p;
    for (const auto& j : arr)
        p.push_back(edit_from_json(j));
    return p;
}

std::string edit_key(const Edit& e) {
    return edit_to_json(e).dump();
}

} // namespace evoir
