#include "evoir/ir.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace evoir {

std::string to_string(const Type& t) {
    switch (t.kind) {
    case TypeKind::I32: return "i32";
    case TypeKind::F32: return "f32";
    case TypeKind::Bool: return "bool";
    case TypeKind::Ptr: return t.space == MemSpace::Global ? "ptr<global>" : "ptr<shared>";
    }
    return "?";
}

std::string to_string(const Literal& l) {
    switch (l.kind) {
    case TypeKind::I32: return std::to_string(l.i);
    case TypeKind::F32: {
        // Shortest form that round-trips and still reads as a float literal.
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(l.f));
        std::string s(buf);
        if (s.find_first_of(".eEnN") == std::string::npos) // inf/nan never printed in practice
            s += ".0";
        return s;
    }
    case TypeKind::Bool: return l.b ? "true" : "false";
    default: return "?";
    }
}

const char* opcode_name(Opcode op) {
    switch (op) {
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::SDiv: return "sdiv";
    case Opcode::FAdd: return "fadd";
    case Opcode::FSub: return "fsub";
    case Opcode::FMul: return "fmul";
    case Opcode::FDiv: return "fdiv";
    case Opcode::ICmp: return "icmp";
    case Opcode::FCmp: return "fcmp";
    case Opcode::Select: return "select";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::GetIndex: return "getindex";
    case Opcode::Phi: return "phi";
    case Opcode::Br: return "br";
    case Opcode::Sync: return "sync";
    case Opcode::Ret: return "ret";
    case Opcode::Tid: return "tid";
    case Opcode::NThreads: return "nthreads";
    case Opcode::Const: return "const";
    }
    return "?";
}

const char* pred_name(CmpPred p) {
    switch (p) {
    case CmpPred::Eq: return "eq";
    case CmpPred::Ne: return "ne";
    case CmpPred::Lt: return "lt";
    case CmpPred::Le: return "le";
    case CmpPred::Gt: return "gt";
    case CmpPred::Ge: return "ge";
    }
    return "?";
}

ParseError::ParseError(int line_, int col_, std::string msg)
    : std::runtime_error("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) +
                         ": " + msg),
      line(line_), column(col_), message(std::move(msg)) {}

int Kernel::block_index(const std::string& label) const {
    for (size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].label == label)
            return static_cast<int>(i);
    return -1;
}

const BasicBlock* Kernel::find_block(const std::string& label) const {
    int i = block_index(label);
    return i < 0 ? nullptr : &blocks[i];
}

int Kernel::param_index(const std::string& name) const {
    for (size_t i = 0; i < params.size(); ++i)
        if (params[i].name == name)
            return static_cast<int>(i);
    return -1;
}

std::optional<std::pair<int, int>> Kernel::locate(int uid) const {
    for (size_t b = 0; b < blocks.size(); ++b)
        for (size_t i = 0; i < blocks[b].instructions.size(); ++i)
            if (blocks[b].instructions[i].uid == uid)
                return std::make_pair(static_cast<int>(b), static_cast<int>(i));
    return std::nullopt;
}

const Instruction* Kernel::find_uid(int uid) const {
    auto pos = locate(uid);
    if (!pos)
        return nullptr;
    return &blocks[pos->first].instructions[pos->second];
}

int Kernel::max_uid() const {
    int m = -1;
    for_each_instruction([&](const BasicBlock&, const Instruction& i) {
        if (i.uid > m)
            m = i.uid;
    });
    return m;
}

ValueId Kernel::max_value_id() const {
    ValueId m = -1;
    for_each_instruction([&](const BasicBlock&, const Instruction& i) {
        if (i.result && *i.result > m)
            m = *i.result;
    });
    return m;
}

size_t Kernel::instruction_count() const {
    size_t n = 0;
    for (const auto& b : blocks)
        n += b.instructions.size();
    return n;
}

std::optional<Type> operand_type(const Kernel& k, const Operand& o) {
    switch (o.kind) {
    case Operand::Kind::Lit:
        return o.lit.type();
    case Operand::Kind::Param:
        if (o.param < 0 || o.param >= static_cast<int>(k.params.size()))
            return std::nullopt;
        return k.params[o.param].type;
    case Operand::Kind::Value: {
        std::optional<Type> found;
        k.for_each_instruction([&](const BasicBlock&, const Instruction& i) {
            if (i.result && *i.result == o.value)
                found = i.result_type();
        });
        return found;
    }
    }
    return std::nullopt;
}

std::optional<Type> slot_type(const Kernel& k, const Instruction& inst, size_t slot) {
    switch (inst.op) {
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::SDiv:
        if (slot < 2) return Type::i32();
        return std::nullopt;
    case Opcode::FAdd:
    case Opcode::FSub:
    case Opcode::FMul:
    case Opcode::FDiv:
        if (slot < 2) return Type::f32();
        return std::nullopt;
    case Opcode::ICmp:
        if (slot < 2) return Type::i32();
        return std::nullopt;
    case Opcode::FCmp:
        if (slot < 2) return Type::f32();
        return std::nullopt;
    case Opcode::Select:
        if (slot == 0) return Type::boolean();
        if (slot < 3) return inst.type;
        return std::nullopt;
    case Opcode::Load:
        if (slot == 0) {
            if (slot < inst.operands.size())
                return operand_type(k, inst.operands[0]); // pointer, either space
            return std::nullopt;
        }
        if (slot == 1) return Type::i32();
        return std::nullopt;
    case Opcode::Store:
        if (slot == 0) {
            if (slot < inst.operands.size())
                return operand_type(k, inst.operands[0]);
            return std::nullopt;
        }
        if (slot == 1) return Type::i32();
        if (slot == 2) {
            if (slot < inst.operands.size())
                return operand_type(k, inst.operands[2]);
            return std::nullopt;
        }
        return std::nullopt;
    case Opcode::GetIndex:
        if (slot == 0) return inst.type; // pointer of the declared space
        if (slot == 1) return Type::i32();
        return std::nullopt;
    case Opcode::Phi:
        if (slot < inst.operands.size()) return inst.type;
        return std::nullopt;
    case Opcode::Br:
        if (slot == 0 && inst.labels.size() == 2) return Type::boolean();
        return std::nullopt;
    case Opcode::Sync:
    case Opcode::Ret:
    case Opcode::Tid:
    case Opcode::NThreads:
    case Opcode::Const:
        return std::nullopt;
    }
    return std::nullopt;
}

} // namespace evoir
