#pragma once

#include "evoir/ir.hpp"
#include "evoir/vm.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace evoir {

// ---------------------------------------------------------------------------
// Edits: the patch atoms. All anchors are instruction uids, never positions,
// so a recorded edit survives the other edits around it.
// ---------------------------------------------------------------------------

// What to put in an operand slot when an edit has to rebind it.
struct Binding {
    enum class Kind : uint8_t { ValueRef, ConstFallback };
    Kind kind = Kind::ConstFallback;
    int def_uid = -1; // ValueRef: uid of the defining instruction
    Literal lit;      // ConstFallback payload

    static Binding value_ref(int uid) { Binding b; b.kind = Kind::ValueRef; b.def_uid = uid; return b; }
    static Binding constant(Literal l) { Binding b; b.kind = Kind::ConstFallback; b.lit = l; return b; }

    friend bool operator==(const Binding& a, const Binding& b) {
        if (a.kind != b.kind) return false;
        return a.kind == Kind::ValueRef ? a.def_uid == b.def_uid : a.lit == b.lit;
    }
};

struct Rebind {
    int slot = 0;
    Binding binding;
    friend bool operator==(const Rebind&, const Rebind&) = default;
};

// (target instruction uid, operand slot) that should consume a freshly
// inserted result.
struct Rewire {
    int target_uid = -1;
    int slot = 0;
    friend bool operator==(const Rewire&, const Rewire&) = default;
};

struct EditCopy {
    int src_uid = -1;
    int before_uid = -1; // insertion anchor: the copy lands in front of it
    std::vector<Rebind> rebinds;
    std::optional<Rewire> rewire;
    friend bool operator==(const EditCopy&, const EditCopy&) = default;
};

struct EditDelete {
    int uid = -1;
    friend bool operator==(const EditDelete&, const EditDelete&) = default;
};

struct EditMove {
    int uid = -1;
    int before_uid = -1;
    std::vector<Rebind> rebinds;
    std::optional<Rewire> rewire;
    friend bool operator==(const EditMove&, const EditMove&) = default;
};

struct EditReplaceInstr {
    int victim_uid = -1;
    int donor_uid = -1;
    std::vector<Rebind> rebinds;
    friend bool operator==(const EditReplaceInstr&, const EditReplaceInstr&) = default;
};

struct EditReplaceOperand {
    int uid = -1;
    int slot = 0;
    Binding binding;
    friend bool operator==(const EditReplaceOperand&, const EditReplaceOperand&) = default;
};

struct EditSwap {
    int uid_a = -1;
    int uid_b = -1;
    std::vector<Rebind> rebinds_a;
    std::vector<Rebind> rebinds_b;
    friend bool operator==(const EditSwap&, const EditSwap&) = default;
};

using Edit = std::variant<EditCopy, EditDelete, EditMove, EditReplaceInstr, EditReplaceOperand, EditSwap>;

const char* edit_kind_name(const Edit& e);

// Ordered edit list. Application order is list order.
using Patch = std::vector<Edit>;

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

struct ApplyResult {
    Kernel kernel;
    bool applied = false; // false: edit was Inapplicable, kernel is unchanged
};

// Realizes one edit. The result is a new kernel; it is NOT guaranteed to
// pass validate() — structural rejection is the engine's job. Inapplicable
// when any referenced uid or anchor no longer exists.
ApplyResult apply_edit(const Kernel& k, const Edit& e);

struct PatchResult {
    Kernel kernel;
    Patch applied; // the effective sub-sequence; inapplicable edits dropped
};

// Left fold of apply_edit over the pristine original. Pure: same patch and
// original always produce the same kernel, across runs and hosts.
PatchResult apply_patch(const Kernel& original, const Patch& p);

// ---------------------------------------------------------------------------
// Serialization (run logs, replay)
// ---------------------------------------------------------------------------

std::string patch_to_json(const Patch& p);
Patch patch_from_json(const std::string& text);

// Stable one-line identity, usable as a multiset key in tests.
std::string edit_key(const Edit& e);

// ---------------------------------------------------------------------------
// Individual: both representations plus fitness and selection metadata.
// ---------------------------------------------------------------------------

struct Individual {
    Kernel kernel;  // materialized variant
    Patch patch;    // the edits that produced it from the original
    std::optional<FitnessVector> fitness;

    // Selection metadata maintained by the ranking pass.
    int front = -1;
    double crowding = 0.0;
};

} // namespace evoir
