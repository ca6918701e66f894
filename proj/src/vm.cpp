#include "evoir/vm.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>

namespace evoir {

int64_t CostTable::cost(Opcode op, MemSpace space) const {
    switch (op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::SDiv:
    case Opcode::FAdd: case Opcode::FSub: case Opcode::FMul: case Opcode::FDiv:
        return arith;
    case Opcode::ICmp: case Opcode::FCmp: return cmp;
    case Opcode::Select: return select_op;
    case Opcode::Phi: return phi;
    case Opcode::Const: return constant;
    case Opcode::Br: return br;
    case Opcode::Tid: case Opcode::NThreads: return intrinsic;
    case Opcode::GetIndex: return getindex;
    case Opcode::Load: return space == MemSpace::Shared ? load_shared : load_global;
    case Opcode::Store: return space == MemSpace::Shared ? store_shared : store_global;
    case Opcode::Sync: return sync;
    case Opcode::Ret: return ret;
    }
    return 1;
}

namespace {

struct PtrVal {
    MemSpace space = MemSpace::Global;
    int buffer = -1;    // param index into globals_ for global space
    int32_t offset = 0; // element offset from the buffer base
};

struct Value {
    enum class Kind : uint8_t { Undef, Scalar, Ptr } kind = Kind::Undef;
    Scalar scalar;
    PtrVal ptr;

    static Value of(Scalar s) { Value v; v.kind = Kind::Scalar; v.scalar = s; return v; }
    static Value of(PtrVal p) { Value v; v.kind = Kind::Ptr; v.ptr = p; return v; }
};

struct TrapSignal {
    std::string reason;
};

struct BudgetSignal {};

struct SharedWord {
    bool init = false;
    Scalar value;
};

// Pre-resolved instruction: labels mapped to block indices, costs looked up
// once, operands normalized. The interpreter loop then runs on plain
// integers instead of strings and map lookups.
struct CompiledOp {
    const Instruction* inst = nullptr;
    int64_t cost = 0;
    std::vector<int> targets; // Br: successor blocks; Phi: incoming blocks
};

struct ThreadState {
    int tid = 0;
    int block = 0;
    int ip = 0;
    int prev_block = -1;
    int64_t executed = 0;
    std::vector<Value> values; // indexed by ValueId

    enum class Stop : uint8_t { Running, AtSync, AtRet } stop = Stop::Running;
    int stop_uid = -1;
};

class Machine {
public:
    Machine(const Kernel& k, const TestCase& t, const ExecConfig& cfg) : kernel_(k), cfg_(cfg) {
        shared_.assign(static_cast<size_t>(cfg.shared_words), SharedWord{});
        scalar_args_.assign(k.params.size(), Scalar{});
        param_buffer_.assign(k.params.size(), -2);
        for (size_t p = 0; p < k.params.size(); ++p) {
            const Param& param = k.params[p];
            if (param.type.is_ptr()) {
                if (param.type.space == MemSpace::Global) {
                    auto it = t.inputs.find(param.name);
                    if (it == t.inputs.end())
                        throw TrapSignal{"missing buffer for param '" + param.name + "'"};
                    if (param.elem && *param.elem != it->second.elem)
                        throw TrapSignal{"buffer type mismatch for param '" + param.name + "'"};
                    global_names_.push_back(param.name);
                    globals_.push_back(it->second);
                    param_buffer_[p] = static_cast<int>(globals_.size()) - 1;
                } else {
                    param_buffer_[p] = -1;
                }
            } else {
                auto it = t.scalars.find(param.name);
                if (it == t.scalars.end())
                    throw TrapSignal{"missing scalar for param '" + param.name + "'"};
                if (it->second.type() != param.type)
                    throw TrapSignal{"scalar type mismatch for param '" + param.name + "'"};
                scalar_args_[p] = it->second;
            }
        }
        compile();
    }

    ExecResult run() {
        std::vector<ThreadState> threads(static_cast<size_t>(cfg_.thread_count));
        for (int t = 0; t < cfg_.thread_count; ++t) {
            threads[static_cast<size_t>(t)].tid = t;
            threads[static_cast<size_t>(t)].values.assign(value_slots_, Value{});
        }

        // Phases end when every thread has reached a barrier or returned.
        while (true) {
            for (auto& th : threads)
                run_to_barrier(th);

            bool all_ret = true, all_sync = true;
            int sync_uid = threads.front().stop_uid;
            for (const auto& th : threads) {
                if (th.stop != ThreadState::Stop::AtRet)
                    all_ret = false;
                if (th.stop != ThreadState::Stop::AtSync || th.stop_uid != sync_uid)
                    all_sync = false;
            }
            if (all_ret)
                break;
            if (!all_sync)
                throw TrapSignal{"barrier divergence"};
            for (auto& th : threads) {
                th.stop = ThreadState::Stop::Running;
                ++th.ip; // step past the barrier
            }
        }

        ExecResult result;
        result.status = ExecStatus::Completed;
        result.cost = cost_;
        for (size_t i = 0; i < globals_.size(); ++i)
            result.outputs[global_names_[i]] = globals_[i];
        return result;
    }

    int64_t cost() const { return cost_; }

private:
    const Kernel& kernel_;
    const ExecConfig& cfg_;
    std::vector<Buffer> globals_;
    std::vector<std::string> global_names_;
    std::vector<int> param_buffer_; // param index -> globals_ index, -1 shared, -2 scalar
    std::vector<Scalar> scalar_args_;
    std::vector<SharedWord> shared_;
    std::vector<std::vector<CompiledOp>> code_; // per block
    size_t value_slots_ = 0;
    int64_t cost_ = 0;

    void compile() {
        code_.resize(kernel_.blocks.size());
        ValueId max_vid = kernel_.max_value_id();
        value_slots_ = static_cast<size_t>(std::max<ValueId>(max_vid, -1) + 1);
        for (size_t b = 0; b < kernel_.blocks.size(); ++b) {
            const auto& insts = kernel_.blocks[b].instructions;
            code_[b].resize(insts.size());
            for (size_t i = 0; i < insts.size(); ++i) {
                CompiledOp& op = code_[b][i];
                op.inst = &insts[i];
                MemSpace space = MemSpace::Global;
                if (op.inst->op == Opcode::Load || op.inst->op == Opcode::Store) {
                    auto t = operand_type(kernel_, op.inst->operands[0]);
                    if (t && t->is_ptr())
                        space = t->space;
                }
                op.cost = cfg_.cost_table.cost(op.inst->op, space);
                if (op.inst->op == Opcode::Br || op.inst->op == Opcode::Phi) {
                    for (const auto& label : op.inst->labels)
                        op.targets.push_back(kernel_.block_index(label));
                }
                for (const auto& o : op.inst->operands)
                    if (o.is_value() && o.value >= 0 &&
                        static_cast<size_t>(o.value) >= value_slots_)
                        value_slots_ = static_cast<size_t>(o.value) + 1;
            }
        }
    }

    Value fetch(const ThreadState& th, const Operand& o) {
        switch (o.kind) {
        case Operand::Kind::Lit:
            return Value::of(o.lit);
        case Operand::Kind::Param: {
            if (o.param < 0 || o.param >= static_cast<int>(kernel_.params.size()))
                throw TrapSignal{"bad param reference"};
            const Param& p = kernel_.params[o.param];
            if (p.type.is_ptr()) {
                PtrVal ptr;
                ptr.space = p.type.space;
                ptr.buffer = param_buffer_[static_cast<size_t>(o.param)];
                ptr.offset = 0;
                return Value::of(ptr);
            }
            return Value::of(scalar_args_[static_cast<size_t>(o.param)]);
        }
        case Operand::Kind::Value: {
            if (o.value < 0 || static_cast<size_t>(o.value) >= th.values.size())
                throw TrapSignal{"read of undefined value %" + std::to_string(o.value)};
            const Value& v = th.values[static_cast<size_t>(o.value)];
            if (v.kind == Value::Kind::Undef)
                throw TrapSignal{"read of undefined value %" + std::to_string(o.value)};
            return v;
        }
        }
        throw TrapSignal{"bad operand"};
    }

    Scalar fetch_scalar(const ThreadState& th, const Operand& o, TypeKind want) {
        Value v = fetch(th, o);
        if (v.kind != Value::Kind::Scalar || v.scalar.kind != want)
            throw TrapSignal{"operand type mismatch"};
        return v.scalar;
    }

    PtrVal fetch_ptr(const ThreadState& th, const Operand& o) {
        Value v = fetch(th, o);
        if (v.kind != Value::Kind::Ptr)
            throw TrapSignal{"operand is not a pointer"};
        return v.ptr;
    }

    Scalar load_from(const PtrVal& ptr, int32_t index, TypeKind want) {
        int64_t eff = static_cast<int64_t>(ptr.offset) + index;
        if (ptr.space == MemSpace::Shared) {
            if (eff < 0 || eff >= static_cast<int64_t>(shared_.size()))
                throw TrapSignal{"shared access out of bounds"};
            const SharedWord& w = shared_[static_cast<size_t>(eff)];
            if (!w.init)
                throw TrapSignal{"read of uninitialized shared memory"};
            if (w.value.kind != want)
                throw TrapSignal{"shared load type mismatch"};
            return w.value;
        }
        const Buffer& buf = globals_[static_cast<size_t>(ptr.buffer)];
        if (eff < 0 || eff >= static_cast<int64_t>(buf.size()))
            throw TrapSignal{"global access out of bounds"};
        if (buf.elem != want)
            throw TrapSignal{"global load type mismatch"};
        Scalar s;
        s.kind = want;
        if (want == TypeKind::I32)
            s.i = buf.i[static_cast<size_t>(eff)];
        else
            s.f = buf.f[static_cast<size_t>(eff)];
        return s;
    }

    void store_to(const PtrVal& ptr, int32_t index, const Scalar& value) {
        if (value.kind == TypeKind::Bool)
            throw TrapSignal{"store of bool"};
        int64_t eff = static_cast<int64_t>(ptr.offset) + index;
        if (ptr.space == MemSpace::Shared) {
            if (eff < 0 || eff >= static_cast<int64_t>(shared_.size()))
                throw TrapSignal{"shared access out of bounds"};
            shared_[static_cast<size_t>(eff)] = SharedWord{true, value};
            return;
        }
        Buffer& buf = globals_[static_cast<size_t>(ptr.buffer)];
        if (eff < 0 || eff >= static_cast<int64_t>(buf.size()))
            throw TrapSignal{"global access out of bounds"};
        if (buf.elem != value.kind)
            throw TrapSignal{"global store type mismatch"};
        if (value.kind == TypeKind::I32)
            buf.i[static_cast<size_t>(eff)] = value.i;
        else
            buf.f[static_cast<size_t>(eff)] = value.f;
    }

    void set(ThreadState& th, ValueId vid, Value v) {
        if (vid < 0)
            throw TrapSignal{"definition without value id"};
        if (static_cast<size_t>(vid) >= th.values.size())
            th.values.resize(static_cast<size_t>(vid) + 1);
        th.values[static_cast<size_t>(vid)] = v;
    }

    void enter_block(ThreadState& th, int target) {
        th.prev_block = th.block;
        th.block = target;
        th.ip = 0;

        // Phis read their inputs simultaneously on entry.
        const auto& ops = code_[static_cast<size_t>(target)];
        ValueId staged_vid[8];
        Value staged_val[8];
        size_t staged = 0;
        std::vector<std::pair<ValueId, Value>> overflow;
        for (const auto& op : ops) {
            const Instruction& inst = *op.inst;
            if (!inst.is_phi())
                break;
            cost_ += op.cost;
            bump(th);
            bool matched = false;
            for (size_t a = 0; a < op.targets.size(); ++a) {
                if (op.targets[a] == th.prev_block) {
                    Value v = fetch(th, inst.operands[a]);
                    if (staged < 8) {
                        staged_vid[staged] = *inst.result;
                        staged_val[staged] = v;
                        ++staged;
                    } else {
                        overflow.emplace_back(*inst.result, v);
                    }
                    matched = true;
                    break;
                }
            }
            if (!matched)
                throw TrapSignal{"phi has no incoming value for predecessor"};
            ++th.ip;
        }
        for (size_t i = 0; i < staged; ++i)
            set(th, staged_vid[i], staged_val[i]);
        for (auto& [vid, v] : overflow)
            set(th, vid, v);
    }

    void bump(ThreadState& th) {
        if (++th.executed > cfg_.instruction_budget)
            throw BudgetSignal{};
    }

    void run_to_barrier(ThreadState& th) {
        if (th.stop == ThreadState::Stop::AtRet)
            return;
        while (true) {
            const auto& ops = code_[static_cast<size_t>(th.block)];
            if (th.ip >= static_cast<int>(ops.size()))
                throw TrapSignal{"fell off the end of a block"};
            const CompiledOp& op = ops[static_cast<size_t>(th.ip)];
            const Instruction& inst = *op.inst;

            if (inst.op == Opcode::Sync) {
                cost_ += op.cost;
                bump(th);
                th.stop = ThreadState::Stop::AtSync;
                th.stop_uid = inst.uid;
                return;
            }
            if (inst.op == Opcode::Ret) {
                cost_ += op.cost;
                bump(th);
                th.stop = ThreadState::Stop::AtRet;
                th.stop_uid = inst.uid;
                return;
            }
            if (inst.op == Opcode::Br) {
                cost_ += op.cost;
                bump(th);
                int target;
                if (op.targets.size() == 2) {
                    Scalar c = fetch_scalar(th, inst.operands[0], TypeKind::Bool);
                    target = c.b ? op.targets[0] : op.targets[1];
                } else {
                    target = op.targets[0];
                }
                if (target < 0)
                    throw TrapSignal{"branch to unknown block"};
                enter_block(th, target);
                continue;
            }
            if (inst.is_phi())
                throw TrapSignal{"phi outside block entry"};

            cost_ += op.cost;
            bump(th);
            step(th, inst);
            ++th.ip;
        }
    }

    void step(ThreadState& th, const Instruction& inst) {
        switch (inst.op) {
        case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::SDiv: {
            int32_t a = fetch_scalar(th, inst.operands[0], TypeKind::I32).i;
            int32_t b = fetch_scalar(th, inst.operands[1], TypeKind::I32).i;
            int32_t r = 0;
            uint32_t ua = static_cast<uint32_t>(a), ub = static_cast<uint32_t>(b);
            switch (inst.op) {
            case Opcode::Add: r = static_cast<int32_t>(ua + ub); break;
            case Opcode::Sub: r = static_cast<int32_t>(ua - ub); break;
            case Opcode::Mul: r = static_cast<int32_t>(ua * ub); break;
            case Opcode::SDiv:
                if (b == 0)
                    throw TrapSignal{"integer division by zero"};
                if (a == std::numeric_limits<int32_t>::min() && b == -1)
                    throw TrapSignal{"integer division overflow"};
                r = a / b;
                break;
            default: break;
            }
            set(th, *inst.result, Value::of(Scalar::of_i32(r)));
            break;
        }
        case Opcode::FAdd: case Opcode::FSub: case Opcode::FMul: case Opcode::FDiv: {
            float a = fetch_scalar(th, inst.operands[0], TypeKind::F32).f;
            float b = fetch_scalar(th, inst.operands[1], TypeKind::F32).f;
            float r = 0.0f;
            switch (inst.op) {
            case Opcode::FAdd: r = a + b; break;
            case Opcode::FSub: r = a - b; break;
            case Opcode::FMul: r = a * b; break;
            case Opcode::FDiv: r = a / b; break; // IEEE inf/nan, no trap
            default: break;
            }
            set(th, *inst.result, Value::of(Scalar::of_f32(r)));
            break;
        }
        case Opcode::ICmp: {
            int32_t a = fetch_scalar(th, inst.operands[0], TypeKind::I32).i;
            int32_t b = fetch_scalar(th, inst.operands[1], TypeKind::I32).i;
            set(th, *inst.result, Value::of(Scalar::of_bool(compare(a, b, inst.pred))));
            break;
        }
        case Opcode::FCmp: {
            float a = fetch_scalar(th, inst.operands[0], TypeKind::F32).f;
            float b = fetch_scalar(th, inst.operands[1], TypeKind::F32).f;
            set(th, *inst.result, Value::of(Scalar::of_bool(compare(a, b, inst.pred))));
            break;
        }
        case Opcode::Select: {
            bool c = fetch_scalar(th, inst.operands[0], TypeKind::Bool).b;
            Value v = fetch(th, inst.operands[c ? 1 : 2]);
            if (v.kind != Value::Kind::Scalar || v.scalar.kind != inst.type.kind)
                throw TrapSignal{"select arm type mismatch"};
            set(th, *inst.result, v);
            break;
        }
        case Opcode::Load: {
            PtrVal p = fetch_ptr(th, inst.operands[0]);
            int32_t idx = fetch_scalar(th, inst.operands[1], TypeKind::I32).i;
            set(th, *inst.result, Value::of(load_from(p, idx, inst.type.kind)));
            break;
        }
        case Opcode::Store: {
            PtrVal p = fetch_ptr(th, inst.operands[0]);
            int32_t idx = fetch_scalar(th, inst.operands[1], TypeKind::I32).i;
            Value v = fetch(th, inst.operands[2]);
            if (v.kind != Value::Kind::Scalar)
                throw TrapSignal{"store of non-scalar"};
            store_to(p, idx, v.scalar);
            break;
        }
        case Opcode::GetIndex: {
            PtrVal p = fetch_ptr(th, inst.operands[0]);
            if (p.space != inst.type.space)
                throw TrapSignal{"getindex address space mismatch"};
            int32_t idx = fetch_scalar(th, inst.operands[1], TypeKind::I32).i;
            p.offset += idx;
            set(th, *inst.result, Value::of(p));
            break;
        }
        case Opcode::Tid:
            set(th, *inst.result, Value::of(Scalar::of_i32(th.tid)));
            break;
        case Opcode::NThreads:
            set(th, *inst.result, Value::of(Scalar::of_i32(cfg_.thread_count)));
            break;
        case Opcode::Const:
            set(th, *inst.result, Value::of(inst.const_value));
            break;
        default:
            throw TrapSignal{"unexpected opcode in straight-line step"};
        }
    }

    template <typename T>
    static bool compare(T a, T b, CmpPred p) {
        switch (p) {
        case CmpPred::Eq: return a == b;
        case CmpPred::Ne: return a != b;
        case CmpPred::Lt: return a < b;
        case CmpPred::Le: return a <= b;
        case CmpPred::Gt: return a > b;
        case CmpPred::Ge: return a >= b;
        }
        return false;
    }
};

} // namespace

ExecResult execute(const Kernel& k, const TestCase& t, const ExecConfig& cfg) {
    ExecResult failed;
    try {
        Machine m(k, t, cfg);
        try {
            return m.run();
        } catch (const TrapSignal& trap) {
            failed.status = ExecStatus::Trap;
            failed.trap_reason = trap.reason;
            failed.cost = m.cost();
            return failed;
        } catch (const BudgetSignal&) {
            failed.status = ExecStatus::BudgetExceeded;
            failed.trap_reason = "instruction budget exceeded";
            failed.cost = m.cost();
            return failed;
        }
    } catch (const TrapSignal& trap) { // setup failures (missing buffers etc.)
        failed.status = ExecStatus::Trap;
        failed.trap_reason = trap.reason;
        return failed;
    }
}

namespace {

double relative_difference(double c, double o) {
    double denom = std::max(std::abs(o), 1e-6);
    double d = std::abs(c - o) / denom;
    if (!std::isfinite(d))
        return 1.0;
    return std::min(d, 1.0);
}

} // namespace

double compute_error(const BufferMap& candidate, const BufferMap& oracle) {
    double worst = 0.0;
    for (const auto& [name, want] : oracle) {
        auto it = candidate.find(name);
        if (it == candidate.end())
            return 1.0;
        const Buffer& got = it->second;
        if (got.elem != want.elem || got.size() != want.size())
            return 1.0;
        if (want.elem == TypeKind::I32) {
            for (size_t i = 0; i < want.i.size(); ++i)
                worst = std::max(worst, relative_difference(got.i[i], want.i[i]));
        } else {
            for (size_t i = 0; i < want.f.size(); ++i)
                worst = std::max(worst, relative_difference(got.f[i], want.f[i]));
        }
        if (worst >= 1.0)
            return 1.0;
    }
    return worst;
}

EvalOutcome evaluate_fitness(const Kernel& k, const std::vector<TestCase>& tests,
                             const ExecConfig& cfg, double tolerance) {
    if (tests.empty())
        return EvalOutcome::rejected(-1, "no test cases");
    double total_cost = 0.0;
    double error = 0.0;
    for (size_t i = 0; i < tests.size(); ++i) {
        ExecResult r = execute(k, tests[i], cfg);
        if (r.status != ExecStatus::Completed)
            return EvalOutcome::rejected(static_cast<int>(i), r.trap_reason);
        double e = compute_error(r.outputs, tests[i].oracle);
        if (e > tolerance)
            return EvalOutcome::rejected(static_cast<int>(i),
                                         "error " + std::to_string(e) + " exceeds tolerance");
        error = std::max(error, e);
        total_cost += static_cast<double>(r.cost);
    }
    FitnessVector f;
    f.cost = total_cost / static_cast<double>(tests.size());
    f.error = error;
    return EvalOutcome::ok(f);
}

// ---------------------------------------------------------------------------
// TestCase JSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json buffer_to_json(const Buffer& b) {
    json j;
    j["type"] = b.elem == TypeKind::I32 ? "i32" : "f32";
    if (b.elem == TypeKind::I32) {
        j["data"] = b.i;
    } else {
        json arr = json::array();
        for (float v : b.f)
            arr.push_back(static_cast<double>(v));
        j["data"] = arr;
    }
    return j;
}

Buffer buffer_from_json(const json& j) {
    Buffer b;
    std::string type = j.at("type").get<std::string>();
    if (type == "i32") {
        b.elem = TypeKind::I32;
        b.i = j.at("data").get<std::vector<int32_t>>();
    } else if (type == "f32") {
        b.elem = TypeKind::F32;
        for (const auto& v : j.at("data"))
            b.f.push_back(static_cast<float>(v.get<double>()));
    } else {
        throw std::runtime_error("unknown buffer type '" + type + "'");
    }
    return b;
}

} // namespace

std::string testcase_to_json(const TestCase& t) {
    json j;
    j["inputs"] = json::object();
    for (const auto& [name, buf] : t.inputs)
        j["inputs"][name] = buffer_to_json(buf);
    j["scalars"] = json::object();
    for (const auto& [name, s] : t.scalars) {
        json sj;
        switch (s.kind) {
        case TypeKind::I32: sj["type"] = "i32"; sj["value"] = s.i; break;
        case TypeKind::F32: sj["type"] = "f32"; sj["value"] = static_cast<double>(s.f); break;
        default: sj["type"] = "bool"; sj["value"] = s.b; break;
        }
        j["scalars"][name] = sj;
    }
    j["oracle"] = json::object();
    for (const auto& [name, buf] : t.oracle)
        j["oracle"][name] = buffer_to_json(buf);
    return j.dump(2) + "\n";
}

TestCase testcase_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    TestCase t;
    for (const auto& [name, bj] : j.at("inputs").items())
        t.inputs[name] = buffer_from_json(bj);
    if (j.contains("scalars"))
        for (const auto& [name, sj] : j.at("scalars").items()) {
            std::string type = sj.at("type").get<std::string>();
            if (type == "i32")
                t.scalars[name] = Scalar::of_i32(sj.at("value").get<int32_t>());
            else if (type == "f32")
                t.scalars[name] = Scalar::of_f32(static_cast<float>(sj.at("value").get<double>()));
            else
                t.scalars[name] = Scalar::of_bool(sj.at("value").get<bool>());
        }
    for (const auto& [name, bj] : j.at("oracle").items())
        t.oracle[name] = buffer_from_json(bj);
    return t;
}

} // namespace evoir
