#include "evoir/ir.hpp"

#include <cctype>
#include <cstring>
#include <set>
#include <sstream>

namespace evoir {

namespace {

// Line-oriented scanner. The grammar is one instruction per line, so a
// cursor over a single line with explicit positions gives exact error spots.
struct Cursor {
    const std::string& s;
    int line;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(line, static_cast<int>(pos) + 1, msg);
    }

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t'))
            ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= s.size();
    }

    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c))
            fail(std::string("expected '") + c + "'");
    }

    bool eat_word(const char* w) {
        skip_ws();
        size_t len = std::strlen(w);
        if (s.compare(pos, len, w) == 0) {
            size_t after = pos + len;
            if (after >= s.size() || !(std::isalnum(static_cast<unsigned char>(s[after])) || s[after] == '_')) {
                pos = after;
                return true;
            }
        }
        return false;
    }

    std::string ident() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_' || s[pos] == '-' ||
                s[pos] == '.'))
            ++pos;
        if (pos == start)
            fail("expected identifier");
        return s.substr(start, pos - start);
    }

    int integer() {
        skip_ws();
        size_t start = pos;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+'))
            ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
            ++pos;
        if (pos == start || (pos == start + 1 && !std::isdigit(static_cast<unsigned char>(s[start]))))
            fail("expected integer");
        return std::stoi(s.substr(start, pos - start));
    }
};

Type parse_type(Cursor& c) {
    if (c.eat_word("i32")) return Type::i32();
    if (c.eat_word("f32")) return Type::f32();
    if (c.eat_word("bool")) return Type::boolean();
    if (c.eat_word("ptr")) {
        c.expect('<');
        MemSpace space;
        if (c.eat_word("global"))
            space = MemSpace::Global;
        else if (c.eat_word("shared"))
            space = MemSpace::Shared;
        else
            c.fail("expected 'global' or 'shared'");
        c.expect('>');
        return Type::ptr(space);
    }
    c.fail("expected type");
}

// Literal token: 123 / -4 -> i32, anything with . e E -> f32, true/false -> bool.
Literal parse_literal(Cursor& c) {
    c.skip_ws();
    if (c.eat_word("true")) return Literal::of_bool(true);
    if (c.eat_word("false")) return Literal::of_bool(false);
    size_t start = c.pos;
    size_t p = c.pos;
    const std::string& s = c.s;
    if (p < s.size() && (s[p] == '-' || s[p] == '+'))
        ++p;
    bool is_float = false, any = false;
    while (p < s.size()) {
        char ch = s[p];
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            any = true;
            ++p;
        } else if (ch == '.' || ch == 'e' || ch == 'E') {
            is_float = true;
            ++p;
            if (ch != '.' && p < s.size() && (s[p] == '-' || s[p] == '+'))
                ++p;
        } else {
            break;
        }
    }
    if (!any)
        c.fail("expected literal");
    std::string tok = s.substr(start, p - start);
    c.pos = p;
    if (is_float)
        return Literal::of_f32(std::stof(tok));
    return Literal::of_i32(std::stoi(tok));
}

struct LineParser {
    Kernel& kernel;

    Operand parse_operand(Cursor& c) {
        char ch = c.peek();
        if (ch == '%') {
            c.eat('%');
            return Operand::val(c.integer());
        }
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '-' || ch == '+' || ch == '.')
            return Operand::literal(parse_literal(c));
        // true/false or a parameter name
        size_t save = c.pos;
        std::string id = c.ident();
        if (id == "true") return Operand::literal(Literal::of_bool(true));
        if (id == "false") return Operand::literal(Literal::of_bool(false));
        int pi = kernel.param_index(id);
        if (pi < 0) {
            c.pos = save;
            c.fail("unknown operand '" + id + "'");
        }
        return Operand::param_ref(pi);
    }

    // Parses everything after "%n = ".
    Instruction parse_def(Cursor& c, ValueId result) {
        Instruction inst;
        inst.result = result;
        std::string op = c.ident();

        auto two_operands = [&](Opcode code, Type t) {
            inst.op = code;
            inst.type = t;
            inst.operands.push_back(parse_operand(c));
            c.expect(',');
            inst.operands.push_back(parse_operand(c));
        };

        if (op == "add" || op == "sub" || op == "mul" || op == "sdiv") {
            Type t = parse_type(c);
            if (t != Type::i32())
                c.fail("integer arithmetic requires i32");
            Opcode code = op == "add" ? Opcode::Add
                        : op == "sub" ? Opcode::Sub
                        : op == "mul" ? Opcode::Mul
                                      : Opcode::SDiv;
            two_operands(code, t);
        } else if (op == "fadd" || op == "fsub" || op == "fmul" || op == "fdiv") {
            Type t = parse_type(c);
            if (t != Type::f32())
                c.fail("float arithmetic requires f32");
            Opcode code = op == "fadd" ? Opcode::FAdd
                        : op == "fsub" ? Opcode::FSub
                        : op == "fmul" ? Opcode::FMul
                                       : Opcode::FDiv;
            two_operands(code, t);
        } else if (op.rfind("icmp.", 0) == 0 || op.rfind("fcmp.", 0) == 0) {
            bool is_f = op[0] == 'f';
            std::string predname = op.substr(5);
            inst.op = is_f ? Opcode::FCmp : Opcode::ICmp;
            bool found = false;
            for (CmpPred p : {CmpPred::Eq, CmpPred::Ne, CmpPred::Lt, CmpPred::Le, CmpPred::Gt, CmpPred::Ge})
                if (predname == pred_name(p)) {
                    inst.pred = p;
                    found = true;
                }
            if (!found)
                c.fail("unknown compare predicate '" + predname + "'");
            Type t = parse_type(c);
            if ((is_f && t != Type::f32()) || (!is_f && t != Type::i32()))
                c.fail("compare type does not match opcode");
            inst.type = t;
            inst.operands.push_back(parse_operand(c));
            c.expect(',');
            inst.operands.push_back(parse_operand(c));
        } else if (op == "select") {
            inst.op = Opcode::Select;
            inst.type = parse_type(c);
            if (!inst.type.is_scalar())
                c.fail("select produces a scalar");
            inst.operands.push_back(parse_operand(c));
            c.expect(',');
            inst.operands.push_back(parse_operand(c));
            c.expect(',');
            inst.operands.push_back(parse_operand(c));
        } else if (op == "load") {
            inst.op = Opcode::Load;
            inst.type = parse_type(c);
            if (!inst.type.is_scalar() || inst.type == Type::boolean())
                c.fail("load type must be i32 or f32");
            inst.operands.push_back(parse_operand(c));
            c.expect('[');
            inst.operands.push_back(parse_operand(c));
            c.expect(']');
        } else if (op == "getindex") {
            inst.op = Opcode::GetIndex;
            inst.type = parse_type(c);
            if (!inst.type.is_ptr())
                c.fail("getindex produces a pointer");
            inst.operands.push_back(parse_operand(c));
            c.expect(',');
            inst.operands.push_back(parse_operand(c));
        } else if (op == "phi") {
            inst.op = Opcode::Phi;
            inst.type = parse_type(c);
            do {
                c.expect('[');
                inst.operands.push_back(parse_operand(c));
                c.expect(',');
                inst.labels.push_back(c.ident());
                c.expect(']');
            } while (c.eat(','));
        } else if (op == "tid" || op == "nthreads") {
            inst.op = op == "tid" ? Opcode::Tid : Opcode::NThreads;
            inst.type = parse_type(c);
            if (inst.type != Type::i32())
                c.fail("intrinsic type must be i32");
        } else if (op == "const") {
            inst.op = Opcode::Const;
            inst.type = parse_type(c);
            inst.const_value = parse_literal(c);
            if (inst.const_value.type() != inst.type)
                c.fail("const literal does not match declared type");
        } else {
            c.fail("unknown opcode '" + op + "'");
        }
        return inst;
    }

    Instruction parse_instruction(Cursor& c) {
        if (c.peek() == '%') {
            c.eat('%');
            ValueId v = c.integer();
            c.expect('=');
            return parse_def(c, v);
        }
        std::string op = c.ident();
        Instruction inst;
        if (op == "store") {
            inst.op = Opcode::Store;
            inst.operands.push_back(parse_operand(c));
            c.expect('[');
            inst.operands.push_back(parse_operand(c));
            c.expect(']');
            c.expect(',');
            inst.operands.push_back(parse_operand(c));
        } else if (op == "br") {
            inst.op = Opcode::Br;
            char ch = c.peek();
            if (ch == '%' || std::isdigit(static_cast<unsigned char>(ch))) {
                inst.operands.push_back(parse_operand(c));
                c.expect(',');
                inst.labels.push_back(c.ident());
                c.expect(',');
                inst.labels.push_back(c.ident());
            } else {
                // May be "br true, a, b" (literal condition) or "br label".
                size_t save = c.pos;
                std::string id = c.ident();
                if ((id == "true" || id == "false") && c.peek() == ',') {
                    inst.operands.push_back(Operand::literal(Literal::of_bool(id == "true")));
                    c.expect(',');
                    inst.labels.push_back(c.ident());
                    c.expect(',');
                    inst.labels.push_back(c.ident());
                } else {
                    c.pos = save;
                    inst.labels.push_back(c.ident());
                }
            }
        } else if (op == "sync") {
            inst.op = Opcode::Sync;
        } else if (op == "ret") {
            inst.op = Opcode::Ret;
        } else {
            c.fail("unknown statement '" + op + "'");
        }
        return inst;
    }
};

// Splits "text # comment" and extracts a trailing #uid=N if present.
std::string strip_comment(const std::string& line, std::optional<int>& uid) {
    uid.reset();
    size_t h = line.find('#');
    if (h == std::string::npos)
        return line;
    std::string comment = line.substr(h);
    size_t u = comment.find("uid=");
    if (u != std::string::npos) {
        size_t p = u + 4;
        size_t start = p;
        while (p < comment.size() && (std::isdigit(static_cast<unsigned char>(comment[p])) || comment[p] == '-'))
            ++p;
        if (p > start)
            uid = std::stoi(comment.substr(start, p - start));
    }
    return line.substr(0, h);
}

} // namespace

namespace {

// The grammar is written one instruction per line, but instructions may
// also be separated by ';' and braces/labels may share a line. Normalize
// to one statement per line, keeping original line numbers for errors.
struct SourceLine {
    std::string text;
    int line;
};

std::vector<SourceLine> normalize(const std::string& text) {
    std::vector<SourceLine> out;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        size_t h = raw.find('#');
        std::string code = h == std::string::npos ? raw : raw.substr(0, h);
        std::string comment = h == std::string::npos ? "" : raw.substr(h);

        std::vector<std::string> pieces;
        std::string cur;
        bool in_header = out.empty() && code.find("kernel") != std::string::npos;
        for (char ch : code) {
            if (ch == ';') {
                pieces.push_back(cur);
                cur.clear();
            } else if (ch == '{' && in_header) {
                cur += ch;
                pieces.push_back(cur);
                cur.clear();
                in_header = false;
            } else if (ch == '}') {
                pieces.push_back(cur);
                cur = "}";
                pieces.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        pieces.push_back(cur);
        // Trailing comment (and its #uid annotation) belongs to the last
        // non-empty piece.
        int last_nonempty = -1;
        for (size_t i = 0; i < pieces.size(); ++i)
            if (pieces[i].find_first_not_of(" \t") != std::string::npos)
                last_nonempty = static_cast<int>(i);
        for (size_t i = 0; i < pieces.size(); ++i) {
            std::string piece = pieces[i];
            if (static_cast<int>(i) == last_nonempty)
                piece += comment;
            else if (last_nonempty < 0 && i + 1 == pieces.size())
                piece += comment;
            if (piece.find_first_not_of(" \t") != std::string::npos)
                out.push_back({piece, lineno});
        }
    }
    return out;
}

} // namespace

Kernel parse_kernel(const std::string& text) {
    Kernel kernel;
    std::vector<SourceLine> lines = normalize(text);

    enum class State { Header, Body, Done };
    State state = State::Header;
    BasicBlock* current = nullptr;
    std::vector<std::optional<int>> pending_uids;
    std::vector<std::pair<size_t, size_t>> order; // (block, index) in program order

    for (size_t li = 0; li < lines.size(); ++li) {
        std::optional<int> uid;
        std::string body = strip_comment(lines[li].text, uid);
        Cursor c{body, lines[li].line};
        if (c.at_end())
            continue;

        if (state == State::Header) {
            if (!c.eat_word("kernel"))
                c.fail("expected 'kernel'");
            kernel.name = c.ident();
            c.expect('(');
            if (!c.eat(')')) {
                do {
                    Param p;
                    p.name = c.ident();
                    c.expect(':');
                    p.type = parse_type(c);
                    if (p.type.is_ptr()) {
                        // optional element annotation
                        char ch = c.peek();
                        if (ch == 'i' || ch == 'f') {
                            Type elem = parse_type(c);
                            if (!elem.is_scalar() || elem == Type::boolean())
                                c.fail("pointer element type must be i32 or f32");
                            p.elem = elem.kind;
                        }
                    }
                    kernel.params.push_back(std::move(p));
                } while (c.eat(','));
                c.expect(')');
            }
            while (!c.at_end() && c.peek() != '{') {
                if (c.eat_word("threads")) {
                    c.expect('=');
                    kernel.threads = c.integer();
                } else if (c.eat_word("shared")) {
                    c.expect('=');
                    kernel.shared_words = c.integer();
                } else {
                    c.fail("expected threads=, shared= or '{'");
                }
            }
            c.expect('{');
            state = State::Body;
            continue;
        }

        if (state == State::Done)
            c.fail("text after closing '}'");

        if (c.eat('}')) {
            state = State::Done;
            continue;
        }

        // Label: "name:" optionally followed by an instruction on the line.
        {
            size_t save = c.pos;
            char ch = c.peek();
            if (ch != '%' && !std::isdigit(static_cast<unsigned char>(ch))) {
                std::string id = c.ident();
                if (c.eat(':')) {
                    if (kernel.block_index(id) >= 0)
                        c.fail("duplicate block label '" + id + "'");
                    kernel.blocks.push_back(BasicBlock{id, {}});
                    current = &kernel.blocks.back();
                    if (c.at_end())
                        continue;
                } else {
                    c.pos = save;
                }
            }
        }

        if (!current)
            c.fail("instruction before first block label");
        LineParser lp{kernel};
        Instruction inst = lp.parse_instruction(c);
        if (!c.at_end())
            c.fail("unexpected trailing text");
        current->instructions.push_back(std::move(inst));
        pending_uids.push_back(uid);
        order.emplace_back(kernel.blocks.size() - 1, current->instructions.size() - 1);
    }

    if (state == State::Header)
        throw ParseError(static_cast<int>(lines.size()), 1, "missing kernel header");
    if (state == State::Body)
        throw ParseError(static_cast<int>(lines.size()), 1, "missing closing '}'");
    if (kernel.blocks.empty())
        throw ParseError(1, 1, "kernel has no blocks");

    // Assign uids: explicit annotations win, the rest packed in program
    // order around them.
    std::set<int> taken;
    for (const auto& u : pending_uids)
        if (u)
            taken.insert(*u);
    int next = 0;
    for (size_t i = 0; i < order.size(); ++i) {
        Instruction& inst = kernel.blocks[order[i].first].instructions[order[i].second];
        if (pending_uids[i]) {
            inst.uid = *pending_uids[i];
        } else {
            while (taken.count(next))
                ++next;
            inst.uid = next;
            taken.insert(next);
        }
    }

    return kernel;
}

namespace {

std::string operand_text(const Kernel& k, const Operand& o) {
    switch (o.kind) {
    case Operand::Kind::Value: return "%" + std::to_string(o.value);
    case Operand::Kind::Lit: return to_string(o.lit);
    case Operand::Kind::Param:
        return o.param >= 0 && o.param < static_cast<int>(k.params.size()) ? k.params[o.param].name
                                                                           : "<bad-param>";
    }
    return "?";
}

} // namespace

std::string print_kernel(const Kernel& k) {
    std::ostringstream out;
    out << "kernel " << k.name << "(";
    for (size_t i = 0; i < k.params.size(); ++i) {
        if (i)
            out << ", ";
        const Param& p = k.params[i];
        out << p.name << ": " << to_string(p.type);
        if (p.elem)
            out << " " << to_string(Type{*p.elem, MemSpace::Global});
    }
    out << ") threads=" << k.threads << " shared=" << k.shared_words << " {\n";

    for (const auto& block : k.blocks) {
        out << block.label << ":\n";
        for (const auto& inst : block.instructions) {
            out << "  ";
            if (inst.result)
                out << "%" << *inst.result << " = ";
            switch (inst.op) {
            case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::SDiv:
            case Opcode::FAdd: case Opcode::FSub: case Opcode::FMul: case Opcode::FDiv:
                out << opcode_name(inst.op) << " " << to_string(inst.type) << " "
                    << operand_text(k, inst.operands[0]) << ", " << operand_text(k, inst.operands[1]);
                break;
            case Opcode::ICmp: case Opcode::FCmp:
                out << opcode_name(inst.op) << "." << pred_name(inst.pred) << " "
                    << to_string(inst.type) << " " << operand_text(k, inst.operands[0]) << ", "
                    << operand_text(k, inst.operands[1]);
                break;
            case Opcode::Select:
                out << "select " << to_string(inst.type) << " " << operand_text(k, inst.operands[0])
                    << ", " << operand_text(k, inst.operands[1]) << ", "
                    << operand_text(k, inst.operands[2]);
                break;
            case Opcode::Load:
                out << "load " << to_string(inst.type) << " " << operand_text(k, inst.operands[0])
                    << "[" << operand_text(k, inst.operands[1]) << "]";
                break;
            case Opcode::Store:
                out << "store " << operand_text(k, inst.operands[0]) << "["
                    << operand_text(k, inst.operands[1]) << "], " << operand_text(k, inst.operands[2]);
                break;
            case Opcode::GetIndex:
                out << "getindex " << to_string(inst.type) << " " << operand_text(k, inst.operands[0])
                    << ", " << operand_text(k, inst.operands[1]);
                break;
            case Opcode::Phi:
                out << "phi " << to_string(inst.type) << " ";
                for (size_t i = 0; i < inst.operands.size(); ++i) {
                    if (i)
                        out << ", ";
                    out << "[" << operand_text(k, inst.operands[i]) << ", " << inst.labels[i] << "]";
                }
                break;
            case Opcode::Br:
                if (inst.labels.size() == 2)
                    out << "br " << operand_text(k, inst.operands[0]) << ", " << inst.labels[0] << ", "
                        << inst.labels[1];
                else
                    out << "br " << inst.labels[0];
                break;
            case Opcode::Sync: out << "sync"; break;
            case Opcode::Ret: out << "ret"; break;
            case Opcode::Tid: out << "tid " << to_string(inst.type); break;
            case Opcode::NThreads: out << "nthreads " << to_string(inst.type); break;
            case Opcode::Const:
                out << "const " << to_string(inst.type) << " " << to_string(inst.const_value);
                break;
            }
            out << "  #uid=" << inst.uid << "\n";
        }
    }
    out << "}\n";
    return out.str();
}

} // namespace evoir
