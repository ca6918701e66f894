#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evoir {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

enum class MemSpace : uint8_t { Global, Shared };

enum class TypeKind : uint8_t { I32, F32, Bool, Ptr };

struct Type {
    TypeKind kind = TypeKind::I32;
    MemSpace space = MemSpace::Global; // meaningful only for Ptr

    static Type i32() { return {TypeKind::I32, MemSpace::Global}; }
    static Type f32() { return {TypeKind::F32, MemSpace::Global}; }
    static Type boolean() { return {TypeKind::Bool, MemSpace::Global}; }
    static Type ptr(MemSpace s) { return {TypeKind::Ptr, s}; }

    bool is_ptr() const { return kind == TypeKind::Ptr; }
    bool is_scalar() const { return kind != TypeKind::Ptr; }

    friend bool operator==(const Type& a, const Type& b) {
        return a.kind == b.kind && (a.kind != TypeKind::Ptr || a.space == b.space);
    }
    friend bool operator!=(const Type& a, const Type& b) { return !(a == b); }
};

std::string to_string(const Type& t);

// ---------------------------------------------------------------------------
// Values and operands
// ---------------------------------------------------------------------------

// SSA value number (%n in the textual form). Unique per definition.
using ValueId = int32_t;

struct Literal {
    TypeKind kind = TypeKind::I32;
    int32_t i = 0;
    float f = 0.0f;
    bool b = false;

    static Literal of_i32(int32_t v) { Literal l; l.kind = TypeKind::I32; l.i = v; return l; }
    static Literal of_f32(float v) { Literal l; l.kind = TypeKind::F32; l.f = v; return l; }
    static Literal of_bool(bool v) { Literal l; l.kind = TypeKind::Bool; l.b = v; return l; }

    Type type() const { return {kind, MemSpace::Global}; }

    friend bool operator==(const Literal& a, const Literal& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
        case TypeKind::I32: return a.i == b.i;
        case TypeKind::F32: return a.f == b.f; // bit-for-bit is what round-trip needs
        case TypeKind::Bool: return a.b == b.b;
        default: return false;
        }
    }
};

std::string to_string(const Literal& l);

struct Operand {
    enum class Kind : uint8_t { Value, Lit, Param };

    Kind kind = Kind::Lit;
    ValueId value = -1;  // Kind::Value
    Literal lit;         // Kind::Lit
    int param = -1;      // Kind::Param, index into Kernel::params

    static Operand val(ValueId v) { Operand o; o.kind = Kind::Value; o.value = v; return o; }
    static Operand literal(Literal l) { Operand o; o.kind = Kind::Lit; o.lit = l; return o; }
    static Operand param_ref(int idx) { Operand o; o.kind = Kind::Param; o.param = idx; return o; }

    bool is_value() const { return kind == Kind::Value; }

    friend bool operator==(const Operand& a, const Operand& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
        case Kind::Value: return a.value == b.value;
        case Kind::Lit: return a.lit == b.lit;
        case Kind::Param: return a.param == b.param;
        }
        return false;
    }
};

// ---------------------------------------------------------------------------
// Instructions
// ---------------------------------------------------------------------------

enum class Opcode : uint8_t {
    Add, Sub, Mul, SDiv,
    FAdd, FSub, FMul, FDiv,
    ICmp, FCmp,
    Select,
    Load, Store, GetIndex,
    Phi,
    Br, Sync, Ret,
    Tid, NThreads,
    Const,
};

enum class CmpPred : uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

const char* opcode_name(Opcode op);
const char* pred_name(CmpPred p);

struct Instruction {
    // Stable identity. Assigned at load time and by edits; never reused
    // within a kernel. Patches anchor on uids, not positions.
    int uid = -1;

    Opcode op = Opcode::Ret;
    CmpPred pred = CmpPred::Eq; // ICmp / FCmp only

    std::optional<ValueId> result;
    Type type;                       // result type; compared type for cmp
    std::vector<Operand> operands;
    std::vector<std::string> labels; // Br targets; Phi incoming labels (parallel to operands)
    Literal const_value;             // Const only

    bool is_terminator() const { return op == Opcode::Br || op == Opcode::Ret; }
    bool is_phi() const { return op == Opcode::Phi; }

    // Type of the produced value. Compares carry their operand type in
    // `type` but define a bool.
    Type result_type() const {
        if (op == Opcode::ICmp || op == Opcode::FCmp)
            return Type::boolean();
        return type;
    }

    friend bool operator==(const Instruction& a, const Instruction& b) {
        return a.uid == b.uid && a.op == b.op && a.pred == b.pred && a.result == b.result &&
               a.type == b.type && a.operands == b.operands && a.labels == b.labels &&
               (a.op != Opcode::Const || a.const_value == b.const_value);
    }
};

struct BasicBlock {
    std::string label;
    std::vector<Instruction> instructions;

    friend bool operator==(const BasicBlock& a, const BasicBlock& b) {
        return a.label == b.label && a.instructions == b.instructions;
    }
};

struct Param {
    std::string name;
    Type type;
    std::optional<TypeKind> elem; // element annotation for pointer params

    friend bool operator==(const Param& a, const Param& b) {
        return a.name == b.name && a.type == b.type && a.elem == b.elem;
    }
};

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

struct Kernel {
    std::string name;
    std::vector<Param> params;
    std::vector<BasicBlock> blocks; // blocks[0] is the entry block
    int threads = 1;
    int shared_words = 0;

    int block_index(const std::string& label) const;
    const BasicBlock* find_block(const std::string& label) const;
    int param_index(const std::string& name) const;

    // (block index, instruction index) of a uid, or nullopt.
    std::optional<std::pair<int, int>> locate(int uid) const;
    const Instruction* find_uid(int uid) const;

    int max_uid() const;
    ValueId max_value_id() const;
    size_t instruction_count() const;

    template <typename Fn>
    void for_each_instruction(Fn&& fn) const {
        for (const auto& b : blocks)
            for (const auto& i : b.instructions)
                fn(b, i);
    }

    friend bool operator==(const Kernel& a, const Kernel& b) {
        return a.name == b.name && a.params == b.params && a.blocks == b.blocks &&
               a.threads == b.threads && a.shared_words == b.shared_words;
    }
};

// Structural equality (same as operator==; named for call sites where the
// intent is the round-trip law rather than generic comparison).
inline bool structurally_equal(const Kernel& a, const Kernel& b) { return a == b; }

// ---------------------------------------------------------------------------
// Parsing / printing
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
    int line;
    int column;
    std::string message;

    ParseError(int line_, int col_, std::string msg);
};

// Parses the textual form. Throws ParseError on malformed syntax, unknown
// opcodes, or type annotation mismatches. The result is structurally checked
// only as far as parsing requires; run validate() for full checking.
Kernel parse_kernel(const std::string& text);

// Canonical text. parse_kernel(print_kernel(k)) is structurally equal to k,
// uids included (serialized as trailing #uid= comments).
std::string print_kernel(const Kernel& k);

// ---------------------------------------------------------------------------
// Signature queries (shared by validator, operators and interpreter)
// ---------------------------------------------------------------------------

// Static type of an operand as written, resolved against defs and params.
// Returns nullopt for a ValueId with no definition in the kernel.
std::optional<Type> operand_type(const Kernel& k, const Operand& o);

// Declared type of an operand slot: what a binding placed there must have.
// For almost all slots this is fixed by the opcode signature; for a store's
// value slot it is the type of the operand currently in the slot.
std::optional<Type> slot_type(const Kernel& k, const Instruction& inst, size_t slot);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationError {
    int uid;            // offending instruction, or -1 for kernel-level problems
    std::string rule;   // short rule id, e.g. "ssa-single-assignment"
    std::string detail;
};

// Full structural check: uid uniqueness, SSA single assignment, dominance of
// uses, opcode signatures, terminator and phi discipline, block reachability,
// and barrier placement (no sync in a block whose execution can diverge by
// thread id). Empty result means the kernel is well formed.
std::vector<ValidationError> validate(const Kernel& k);

inline bool is_valid(const Kernel& k) { return validate(k).empty(); }

} // namespace evoir
