#include "evoir/dom.hpp"

#include <algorithm>
#include <unordered_set>

namespace evoir {

namespace {

void postorder(const std::vector<std::vector<int>>& succ, int node, std::vector<bool>& seen,
               std::vector<int>& out) {
    seen[node] = true;
    for (int s : succ[node])
        if (!seen[s])
            postorder(succ, s, seen, out);
    out.push_back(node);
}

} // namespace

std::vector<int> immediate_dominators(const std::vector<std::vector<int>>& succ, int entry) {
    const int n = static_cast<int>(succ.size());
    std::vector<bool> seen(n, false);
    std::vector<int> post;
    postorder(succ, entry, seen, post);

    std::vector<int> order_index(n, -1); // postorder number
    for (size_t i = 0; i < post.size(); ++i)
        order_index[post[i]] = static_cast<int>(i);

    std::vector<std::vector<int>> pred(n);
    for (int b = 0; b < n; ++b)
        for (int s : succ[b])
            pred[s].push_back(b);

    std::vector<int> idom(n, -1);
    idom[entry] = entry;

    auto intersect = [&](int a, int b) {
        while (a != b) {
            while (order_index[a] < order_index[b])
                a = idom[a];
            while (order_index[b] < order_index[a])
                b = idom[b];
        }
        return a;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = post.rbegin(); it != post.rend(); ++it) {
            int b = *it;
            if (b == entry)
                continue;
            int new_idom = -1;
            for (int p : pred[b]) {
                if (idom[p] < 0)
                    continue;
                new_idom = new_idom < 0 ? p : intersect(p, new_idom);
            }
            if (new_idom >= 0 && idom[b] != new_idom) {
                idom[b] = new_idom;
                changed = true;
            }
        }
    }
    return idom;
}

DomTree DomTree::build(const Kernel& k) {
    DomTree t;
    const int n = static_cast<int>(k.blocks.size());
    t.succ_.assign(n, {});
    t.pred_.assign(n, {});
    for (int b = 0; b < n; ++b) {
        const auto& insts = k.blocks[b].instructions;
        if (insts.empty())
            continue;
        const Instruction& last = insts.back();
        if (last.op == Opcode::Br)
            for (const auto& label : last.labels) {
                int target = k.block_index(label);
                if (target >= 0)
                    t.succ_[b].push_back(target);
            }
    }
    for (int b = 0; b < n; ++b)
        for (int s : t.succ_[b])
            t.pred_[s].push_back(b);

    t.idom_ = immediate_dominators(t.succ_, 0);
    t.reachable_.assign(n, false);
    for (int b = 0; b < n; ++b)
        t.reachable_[b] = t.idom_[b] >= 0;

    // Reverse postorder for consumers that want a stable traversal.
    std::vector<bool> seen(n, false);
    std::vector<int> post;
    postorder(t.succ_, 0, seen, post);
    t.rpo_.assign(post.rbegin(), post.rend());

    for (int b = 0; b < n; ++b)
        for (size_t i = 0; i < k.blocks[b].instructions.size(); ++i)
            t.pos_[k.blocks[b].instructions[i].uid] = {b, static_cast<int>(i)};

    return t;
}

bool DomTree::block_dominates(int a, int b) const {
    if (a < 0 || b < 0 || !reachable_[a] || !reachable_[b])
        return false;
    while (true) {
        if (b == a)
            return true;
        if (b == 0)
            return false;
        b = idom_[b];
        if (b < 0)
            return false;
    }
}

std::optional<std::pair<int, int>> DomTree::position(int uid) const {
    auto it = pos_.find(uid);
    if (it == pos_.end())
        return std::nullopt;
    return it->second;
}

bool DomTree::dominates(int def_uid, int use_uid) const {
    auto d = position(def_uid);
    auto u = position(use_uid);
    if (!d || !u)
        return false;
    if (d->first == u->first)
        return d->second < u->second;
    return block_dominates(d->first, u->first);
}

bool DomTree::dominates_position(int def_uid, int block, int index) const {
    auto d = position(def_uid);
    if (!d)
        return false;
    if (d->first == block)
        return d->second < index;
    return block_dominates(d->first, block);
}

bool DomTree::dominates_use(const Kernel& k, int def_uid, const Instruction& user,
                            size_t slot) const {
    if (user.is_phi()) {
        // A phi reads its incoming value at the end of the predecessor.
        if (slot >= user.labels.size())
            return false;
        int pred_block = k.block_index(user.labels[slot]);
        if (pred_block < 0)
            return false;
        auto d = position(def_uid);
        if (!d)
            return false;
        return block_dominates(d->first, pred_block);
    }
    return dominates(def_uid, user.uid);
}

std::vector<bool> thread_divergent_blocks(const Kernel& k) {
    const int n = static_cast<int>(k.blocks.size());
    DomTree dom = DomTree::build(k);

    // Taint: values that can differ across threads. Seeds are tid results and
    // loaded values (memory contents are not tracked, so loads are assumed
    // thread-varying). Propagates through operands to a fixpoint.
    std::unordered_set<ValueId> tainted;
    bool changed = true;
    while (changed) {
        changed = false;
        k.for_each_instruction([&](const BasicBlock&, const Instruction& inst) {
            if (!inst.result || tainted.count(*inst.result))
                return;
            bool taint = inst.op == Opcode::Tid || inst.op == Opcode::Load;
            if (!taint)
                for (const auto& o : inst.operands)
                    if (o.is_value() && tainted.count(o.value))
                        taint = true;
            if (taint) {
                tainted.insert(*inst.result);
                changed = true;
            }
        });
    }

    // Post-dominators over the reverse CFG with a virtual exit joining all
    // ret blocks.
    const int exit_node = n;
    std::vector<std::vector<int>> rsucc(n + 1); // reverse edges, plus virtual exit
    for (int b = 0; b < n; ++b) {
        for (int s : dom.successors()[b])
            rsucc[s].push_back(b);
        if (!k.blocks[b].instructions.empty() &&
            k.blocks[b].instructions.back().op == Opcode::Ret)
            rsucc[exit_node].push_back(b);
    }
    std::vector<int> ipdom = immediate_dominators(rsucc, exit_node);

    std::vector<bool> divergent(n, false);
    // A block with no path to exit cannot be reasoned about; treat as
    // divergent so barriers there are rejected.
    for (int b = 0; b < n; ++b)
        if (ipdom[b] < 0)
            divergent[b] = true;

    // Mark blocks control-dependent on a tainted branch, then iterate:
    // a branch inside a divergent block spreads divergence to its dependents.
    changed = true;
    while (changed) {
        changed = false;
        for (int b = 0; b < n; ++b) {
            if (!dom.reachable(b) || k.blocks[b].instructions.empty())
                continue;
            const Instruction& term = k.blocks[b].instructions.back();
            if (term.op != Opcode::Br || term.labels.size() != 2)
                continue;
            bool branch_varies = divergent[b];
            if (!branch_varies && !term.operands.empty() && term.operands[0].is_value() &&
                tainted.count(term.operands[0].value))
                branch_varies = true;
            if (!branch_varies)
                continue;
            for (int s : dom.successors()[b]) {
                // Control-dependent: every block from s up the post-dominator
                // chain until (exclusive) b's immediate post-dominator.
                int stop = ipdom[b];
                int cur = s;
                while (cur >= 0 && cur != stop && cur != exit_node) {
                    if (!divergent[cur]) {
                        divergent[cur] = true;
                        changed = true;
                    }
                    cur = ipdom[cur];
                }
            }
        }
    }
    return divergent;
}

} // namespace evoir
