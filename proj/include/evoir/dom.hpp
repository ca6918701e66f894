#pragma once

#include "evoir/ir.hpp"

#include <unordered_map>
#include <vector>

namespace evoir {

// Dominator tree over a kernel's CFG, with instruction-level queries.
// Built once per kernel variant; the mutation repair step leans on it.
class DomTree {
public:
    static DomTree build(const Kernel& k);

    // Block-level: does block a dominate block b? (reflexive)
    bool block_dominates(int a, int b) const;

    // Instruction-level: strict ordering within a block, block dominance
    // across blocks. An instruction does not dominate itself.
    bool dominates(int def_uid, int use_uid) const;

    // Dominance of a definition over a use slot. Phi uses are charged to the
    // end of the incoming predecessor block.
    bool dominates_use(const Kernel& k, int def_uid, const Instruction& user, size_t slot) const;

    // Same query for a prospective instruction position rather than an
    // existing uid: does the definition dominate (block, index)?
    bool dominates_position(int def_uid, int block, int index) const;

    int idom(int block) const { return idom_[block]; }
    bool reachable(int block) const { return reachable_[block]; }
    const std::vector<int>& rpo() const { return rpo_; }
    const std::vector<std::vector<int>>& successors() const { return succ_; }
    const std::vector<std::vector<int>>& predecessors() const { return pred_; }

    // Position lookup for uids (block index, instruction index).
    std::optional<std::pair<int, int>> position(int uid) const;

private:
    std::vector<int> idom_;                 // per block; -1 for entry / unreachable
    std::vector<bool> reachable_;
    std::vector<int> rpo_;
    std::vector<std::vector<int>> succ_;
    std::vector<std::vector<int>> pred_;
    std::unordered_map<int, std::pair<int, int>> pos_; // uid -> (block, index)
};

// Immediate dominators of an arbitrary digraph rooted at `entry`
// (iterative Cooper-Harvey-Kennedy). idom[entry] == entry; unreachable
// nodes get -1. Exposed so tests can drive it with raw graphs.
std::vector<int> immediate_dominators(const std::vector<std::vector<int>>& succ, int entry);

// Blocks whose execution can differ between threads: control-dependent
// (transitively) on a branch whose condition is data-derived from tid or
// from loaded memory. Barrier placement is rejected in such blocks.
std::vector<bool> thread_divergent_blocks(const Kernel& k);

} // namespace evoir
