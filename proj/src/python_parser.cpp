#include "actref/python_lexer.hpp"
#include "actref/source_model.hpp"

#include <array>
#include <map>
#include <unordered_set>

namespace actref {
namespace {

const std::unordered_set<std::string_view>& keywords() {
    static const std::unordered_set<std::string_view> kw = {
        "False", "None",   "True",    "and",      "as",     "assert", "async", "await",
        "break", "class",  "continue", "def",     "del",    "elif",   "else",  "except",
        "finally", "for",  "from",    "global",   "if",     "import", "in",    "is",
        "lambda", "nonlocal", "not",  "or",       "pass",   "raise",  "return", "try",
        "while", "with",   "yield",
    };
    return kw;
}

constexpr std::array<std::string_view, 13> kAugOps = {"+=", "-=", "*=", "/=", "//=", "%=", "@=",
                                                      "&=", "|=", "^=", ">>=", "<<=", "**="};

class Parser {
public:
    Parser(std::string_view src, std::string path, bool layout)
        : src_(src), path_(std::move(path)), toks_(tokenize(src, LexOptions{layout, false}, path_)) {}

    NodeBuilder file_input() {
        NodeBuilder root(NodeKind::ModuleRoot);
        while (!at(TokenKind::EndMarker)) {
            if (at(TokenKind::Newline)) {
                ++i_;
                continue;
            }
            statement(root.children);
        }
        root.span.begin = Position{1, 0, 0};
        root.span.end = end_position();
        return root;
    }

    NodeBuilder expression_input() {
        NodeBuilder e = at_op("yield") ? yield_expr() : testlist_star_expr();
        if (!at(TokenKind::EndMarker))
            error("unexpected token after expression");
        return e;
    }

private:
    // ---- token helpers ----
    const Token& tok(std::size_t ahead = 0) const {
        std::size_t k = std::min(i_ + ahead, toks_.size() - 1);
        return toks_[k];
    }
    bool at(TokenKind k) const { return tok().kind == k; }
    bool at_op(std::string_view text) const {
        const Token& t = tok();
        return (t.kind == TokenKind::Op || t.kind == TokenKind::Name) && t.text == text;
    }
    bool at_keyword(std::string_view kw) const { return tok().kind == TokenKind::Name && tok().text == kw; }
    bool is_name_token(const Token& t) const {
        return t.kind == TokenKind::Name && !keywords().contains(t.text);
    }
    bool accept(std::string_view text) {
        if (at_op(text)) {
            ++i_;
            return true;
        }
        return false;
    }
    const Token& expect(std::string_view text) {
        if (!at_op(text))
            error("expected '" + std::string(text) + "'");
        return toks_[i_++];
    }
    const Token& expect_name() {
        if (!is_name_token(tok()))
            error("expected identifier");
        return toks_[i_++];
    }
    const Token& prev() const { return toks_[i_ - 1]; }

    [[noreturn]] void error(const std::string& msg) const {
        std::string got = tok().kind == TokenKind::EndMarker ? std::string("end of input")
                          : tok().kind == TokenKind::Newline ? std::string("newline")
                          : tok().kind == TokenKind::Indent  ? std::string("indent")
                          : tok().kind == TokenKind::Dedent  ? std::string("dedent")
                                                             : "'" + std::string(tok().text) + "'";
        throw SyntaxError(path_, tok().begin.line, msg + ", got " + got);
    }

    Position end_position() const {
        Position p{1, 0, 0};
        for (char c : src_) {
            ++p.offset;
            if (c == '\n') {
                ++p.line;
                p.column = 0;
            } else {
                ++p.column;
            }
        }
        return p;
    }

    static NodeBuilder make(NodeKind kind, std::string label, Position b, Position e) {
        return NodeBuilder(kind, std::move(label), Span{b, e});
    }
    void set_span_from_children(NodeBuilder& n) const {
        if (!n.children.empty()) {
            n.span.begin = outer_begin(n.children.front());
            n.span.end = last_end();
        }
    }

    // End of the last consumed token, skipping layout tokens. Covers closing
    // parens that a parenthesized last child leaves out of its own span.
    Position outer_begin(const NodeBuilder& n) const {
        auto it = paren_outer_.find({n.span.begin.offset, n.span.end.offset});
        return it == paren_outer_.end() ? n.span.begin : it->second.begin;
    }

    Position last_end() const {
        for (std::size_t k = i_; k > 0; --k) {
            const Token& t = toks_[k - 1];
            if (t.kind != TokenKind::Newline && t.kind != TokenKind::Indent && t.kind != TokenKind::Dedent)
                return t.end;
        }
        return Position{1, 0, 0};
    }

    // ---- statements ----
    void statement(std::vector<NodeBuilder>& out) {
        if (at_op("@")) {
            out.push_back(decorated());
            return;
        }
        if (at_keyword("if")) {
            out.push_back(if_stmt());
        } else if (at_keyword("while")) {
            out.push_back(while_stmt());
        } else if (at_keyword("for")) {
            out.push_back(for_stmt(tok().begin, false));
        } else if (at_keyword("try")) {
            out.push_back(try_stmt());
        } else if (at_keyword("with")) {
            out.push_back(with_stmt(tok().begin, false));
        } else if (at_keyword("def")) {
            out.push_back(funcdef({}, tok().begin, false));
        } else if (at_keyword("class")) {
            out.push_back(classdef({}, tok().begin));
        } else if (at_keyword("async")) {
            Position b = tok().begin;
            ++i_;
            if (at_keyword("def"))
                out.push_back(funcdef({}, b, true));
            else if (at_keyword("with"))
                out.push_back(with_stmt(b, true));
            else if (at_keyword("for"))
                out.push_back(for_stmt(b, true));
            else
                error("expected 'def', 'with' or 'for' after 'async'");
        } else {
            simple_stmt(out);
        }
    }

    void simple_stmt(std::vector<NodeBuilder>& out) {
        out.push_back(small_stmt());
        while (accept(";")) {
            if (at(TokenKind::Newline) || at(TokenKind::EndMarker))
                break;
            out.push_back(small_stmt());
        }
        if (at(TokenKind::EndMarker))
            return;
        if (!at(TokenKind::Newline))
            error("expected end of statement");
        ++i_;
    }

    NodeBuilder suite(NodeKind kind) {
        NodeBuilder block(kind);
        if (at(TokenKind::Newline)) {
            ++i_;
            if (!at(TokenKind::Indent))
                error("expected an indented block");
            ++i_;
            while (!at(TokenKind::Dedent) && !at(TokenKind::EndMarker)) {
                if (at(TokenKind::Newline)) {
                    ++i_;
                    continue;
                }
                statement(block.children);
            }
            if (at(TokenKind::Dedent))
                ++i_;
        } else {
            simple_stmt(block.children);
        }
        if (block.children.empty())
            error("expected an indented block");
        set_span_from_children(block);
        return block;
    }

    NodeBuilder decorated() {
        std::vector<NodeBuilder> decorators;
        Position b = tok().begin;
        while (at_op("@")) {
            Position db = tok().begin;
            ++i_;
            NodeBuilder expr = namedexpr_test();
            NodeBuilder d = make(NodeKind::Decorator, "", db, expr.span.end);
            d.children.push_back(std::move(expr));
            decorators.push_back(std::move(d));
            if (!at(TokenKind::Newline))
                error("expected newline after decorator");
            ++i_;
        }
        if (at_keyword("def"))
            return funcdef(std::move(decorators), b, false);
        if (at_keyword("class"))
            return classdef(std::move(decorators), b);
        if (at_keyword("async")) {
            ++i_;
            if (at_keyword("def"))
                return funcdef(std::move(decorators), b, true);
        }
        error("expected function or class definition after decorator");
    }

    NodeBuilder funcdef(std::vector<NodeBuilder> decorators, Position b, bool is_async) {
        expect("def");
        const Token& name = expect_name();
        NodeBuilder fn = make(is_async ? NodeKind::AsyncFunctionDef : NodeKind::FunctionDef, std::string(name.text), b, b);
        fn.children = std::move(decorators);
        const Token& open = expect("(");
        NodeBuilder args = make(NodeKind::Arguments, "", open.begin, open.end);
        parameters(args, ")", true);
        const Token& close = expect(")");
        args.span.end = close.end;
        fn.children.push_back(std::move(args));
        if (at_op("->")) {
            Position rb = tok().begin;
            ++i_;
            NodeBuilder ann = test();
            NodeBuilder ret = make(NodeKind::Returns, "", rb, ann.span.end);
            ret.children.push_back(std::move(ann));
            fn.children.push_back(std::move(ret));
        }
        expect(":");
        fn.children.push_back(suite(NodeKind::Block));
        fn.span.end = last_end();
        return fn;
    }

    // Parses a parameter list up to (not including) `terminator`.
    void parameters(NodeBuilder& args, std::string_view terminator, bool annotations) {
        bool first = true;
        while (!at_op(terminator)) {
            if (!first)
                expect(",");
            first = false;
            if (at_op(terminator))
                break;
            if (at_op("/")) {
                ++i_;
                continue;
            }
            if (at_op("*") || at_op("**")) {
                bool kw = at_op("**");
                Position pb = tok().begin;
                ++i_;
                if (!kw && (at_op(",") || at_op(terminator)))
                    continue; // bare '*' marks keyword-only parameters
                const Token& name = expect_name();
                NodeBuilder a = make(kw ? NodeKind::VarArg : NodeKind::VarArg, std::string(name.text), pb, name.end);
                a.kind = kw ? NodeKind::KwArg : NodeKind::VarArg;
                if (annotations && at_op(":"))
                    add_annotation(a);
                args.children.push_back(std::move(a));
                continue;
            }
            const Token& name = expect_name();
            NodeBuilder a = make(NodeKind::Arg, std::string(name.text), name.begin, name.end);
            if (annotations && at_op(":"))
                add_annotation(a);
            if (accept("=")) {
                a.children.push_back(test());
                a.span.end = last_end();
            }
            args.children.push_back(std::move(a));
        }
    }

    void add_annotation(NodeBuilder& a) {
        Position ab = tok().begin;
        expect(":");
        NodeBuilder t = test();
        NodeBuilder ann = make(NodeKind::Annotation, "", ab, t.span.end);
        ann.span.begin = t.span.begin;
        ann.children.push_back(std::move(t));
        a.span.end = ann.span.end;
        a.children.push_back(std::move(ann));
    }

    NodeBuilder classdef(std::vector<NodeBuilder> decorators, Position b) {
        expect("class");
        const Token& name = expect_name();
        NodeBuilder cls = make(NodeKind::ClassDef, std::string(name.text), b, b);
        cls.children = std::move(decorators);
        if (at_op("(")) {
            const Token& open = toks_[i_++];
            NodeBuilder bases = make(NodeKind::Bases, "", open.begin, open.end);
            arglist(bases.children, ")");
            bases.span.end = expect(")").end;
            cls.children.push_back(std::move(bases));
        }
        expect(":");
        cls.children.push_back(suite(NodeKind::Block));
        cls.span.end = last_end();
        return cls;
    }

    NodeBuilder if_stmt() {
        Position b = tok().begin;
        ++i_; // 'if' or 'elif'
        NodeBuilder node = make(NodeKind::If, "", b, b);
        node.children.push_back(namedexpr_test());
        expect(":");
        node.children.push_back(suite(NodeKind::Block));
        if (at_keyword("elif")) {
            NodeBuilder nested = if_stmt();
            NodeBuilder orelse = make(NodeKind::OrElse, "", nested.span.begin, nested.span.end);
            orelse.children.push_back(std::move(nested));
            node.children.push_back(std::move(orelse));
        } else if (at_keyword("else")) {
            ++i_;
            expect(":");
            node.children.push_back(suite(NodeKind::OrElse));
        }
        node.span.end = last_end();
        return node;
    }

    void optional_else(NodeBuilder& node) {
        if (at_keyword("else")) {
            ++i_;
            expect(":");
            node.children.push_back(suite(NodeKind::OrElse));
        }
    }

    NodeBuilder while_stmt() {
        Position b = tok().begin;
        ++i_;
        NodeBuilder node = make(NodeKind::While, "", b, b);
        node.children.push_back(namedexpr_test());
        expect(":");
        node.children.push_back(suite(NodeKind::Block));
        optional_else(node);
        node.span.end = last_end();
        return node;
    }

    NodeBuilder for_stmt(Position b, bool is_async) {
        expect("for");
        NodeBuilder node = make(is_async ? NodeKind::AsyncFor : NodeKind::For, "", b, b);
        node.children.push_back(exprlist());
        expect("in");
        node.children.push_back(testlist());
        expect(":");
        node.children.push_back(suite(NodeKind::Block));
        optional_else(node);
        node.span.end = last_end();
        return node;
    }

    NodeBuilder try_stmt() {
        Position b = tok().begin;
        ++i_;
        expect(":");
        NodeBuilder node = make(NodeKind::Try, "", b, b);
        node.children.push_back(suite(NodeKind::Block));
        bool handlers = false;
        while (at_keyword("except")) {
            handlers = true;
            Position hb = tok().begin;
            ++i_;
            NodeBuilder h = make(NodeKind::ExceptHandler, "", hb, hb);
            if (!at_op(":")) {
                h.children.push_back(test());
                if (accept("as"))
                    h.label = std::string(expect_name().text);
            }
            expect(":");
            h.children.push_back(suite(NodeKind::Block));
            h.span.end = last_end();
            node.children.push_back(std::move(h));
        }
        if (handlers)
            optional_else(node);
        if (at_keyword("finally")) {
            ++i_;
            expect(":");
            node.children.push_back(suite(NodeKind::FinalBody));
        } else if (!handlers) {
            error("expected 'except' or 'finally' block");
        }
        node.span.end = last_end();
        return node;
    }

    NodeBuilder with_stmt(Position b, bool is_async) {
        expect("with");
        NodeBuilder node = make(is_async ? NodeKind::AsyncWith : NodeKind::With, "", b, b);
        do {
            NodeBuilder ctx = test();
            NodeBuilder item = make(NodeKind::WithItem, "", ctx.span.begin, ctx.span.end);
            item.children.push_back(std::move(ctx));
            if (accept("as")) {
                item.children.push_back(expr());
                item.span.end = last_end();
            }
            node.children.push_back(std::move(item));
        } while (accept(","));
        expect(":");
        node.children.push_back(suite(NodeKind::Block));
        node.span.end = last_end();
        return node;
    }

    NodeBuilder keyword_stmt(NodeKind kind) {
        const Token& t = toks_[i_++];
        return make(kind, "", t.begin, t.end);
    }

    bool at_statement_end() const {
        return at(TokenKind::Newline) || at(TokenKind::EndMarker) || at_op(";");
    }

    NodeBuilder small_stmt() {
        if (at_keyword("pass"))
            return keyword_stmt(NodeKind::Pass);
        if (at_keyword("break"))
            return keyword_stmt(NodeKind::Break);
        if (at_keyword("continue"))
            return keyword_stmt(NodeKind::Continue);
        if (at_keyword("return")) {
            NodeBuilder n = keyword_stmt(NodeKind::Return);
            if (!at_statement_end()) {
                n.children.push_back(testlist_star_expr());
                n.span.end = last_end();
            }
            return n;
        }
        if (at_keyword("raise")) {
            NodeBuilder n = keyword_stmt(NodeKind::Raise);
            if (!at_statement_end()) {
                n.children.push_back(test());
                if (accept("from"))
                    n.children.push_back(test());
                n.span.end = last_end();
            }
            return n;
        }
        if (at_keyword("global") || at_keyword("nonlocal")) {
            NodeBuilder n = keyword_stmt(at_keyword("global") ? NodeKind::Global : NodeKind::Nonlocal);
            do {
                const Token& name = expect_name();
                n.children.push_back(make(NodeKind::Name, std::string(name.text), name.begin, name.end));
            } while (accept(","));
            n.span.end = last_end();
            return n;
        }
        if (at_keyword("del")) {
            NodeBuilder n = keyword_stmt(NodeKind::Delete);
            do {
                if (at_statement_end())
                    break;
                n.children.push_back(expr_or_star());
            } while (accept(","));
            if (n.children.empty())
                error("expected target after 'del'");
            n.span.end = last_end();
            return n;
        }
        if (at_keyword("assert")) {
            NodeBuilder n = keyword_stmt(NodeKind::Assert);
            n.children.push_back(test());
            if (accept(","))
                n.children.push_back(test());
            n.span.end = last_end();
            return n;
        }
        if (at_keyword("import"))
            return import_name();
        if (at_keyword("from"))
            return import_from();
        return expr_stmt();
    }

    std::string dotted_name() {
        std::string name(expect_name().text);
        while (at_op(".")) {
            ++i_;
            name += ".";
            name += expect_name().text;
        }
        return name;
    }

    NodeBuilder import_name() {
        NodeBuilder n = keyword_stmt(NodeKind::Import);
        do {
            Position ab = tok().begin;
            std::string name = dotted_name();
            if (accept("as"))
                name += " as " + std::string(expect_name().text);
            n.children.push_back(make(NodeKind::Alias, name, ab, prev().end));
        } while (accept(","));
        n.span.end = last_end();
        return n;
    }

    NodeBuilder import_from() {
        NodeBuilder n = keyword_stmt(NodeKind::ImportFrom);
        std::string module;
        while (at_op(".") || at_op("...")) {
            module += tok().text;
            ++i_;
        }
        if (!at_keyword("import"))
            module += dotted_name();
        if (module.empty())
            error("expected module name");
        n.label = module;
        expect("import");
        if (at_op("*")) {
            const Token& star = toks_[i_++];
            n.children.push_back(make(NodeKind::Alias, "*", star.begin, star.end));
        } else {
            bool paren = accept("(");
            do {
                if (paren && at_op(")"))
                    break;
                const Token& name = expect_name();
                std::string label(name.text);
                if (accept("as"))
                    label += " as " + std::string(expect_name().text);
                n.children.push_back(make(NodeKind::Alias, label, name.begin, prev().end));
            } while (accept(","));
            if (paren)
                n.span.end = expect(")").end;
            if (n.children.empty())
                error("expected imported names");
        }
        if (n.span.end.offset < n.children.back().span.end.offset)
            n.span.end = last_end();
        return n;
    }

    NodeBuilder expr_stmt() {
        NodeBuilder first = at_keyword("yield") ? yield_expr() : testlist_star_expr();
        if (at_op(":")) {
            Position ab = tok().begin;
            ++i_;
            NodeBuilder ann_value = test();
            NodeBuilder ann = make(NodeKind::Annotation, "", ann_value.span.begin, ann_value.span.end);
            (void)ab;
            ann.children.push_back(std::move(ann_value));
            NodeBuilder n = make(NodeKind::AnnAssign, "", outer_begin(first), ann.span.end);
            n.children.push_back(std::move(first));
            n.children.push_back(std::move(ann));
            if (accept("=")) {
                n.children.push_back(at_keyword("yield") ? yield_expr() : testlist_star_expr());
                n.span.end = last_end();
            }
            return n;
        }
        for (std::string_view op : kAugOps) {
            if (tok().kind == TokenKind::Op && tok().text == op) {
                ++i_;
                NodeBuilder n = make(NodeKind::AugAssign, std::string(op), outer_begin(first), first.span.end);
                n.children.push_back(std::move(first));
                n.children.push_back(at_keyword("yield") ? yield_expr() : testlist());
                n.span.end = last_end();
                return n;
            }
        }
        if (at_op("=")) {
            NodeBuilder n = make(NodeKind::Assign, "", outer_begin(first), first.span.end);
            n.children.push_back(std::move(first));
            while (accept("="))
                n.children.push_back(at_keyword("yield") ? yield_expr() : testlist_star_expr());
            n.span.end = last_end();
            return n;
        }
        NodeBuilder n = make(NodeKind::Expr, "", outer_begin(first), first.span.end);
        n.children.push_back(std::move(first));
        return n;
    }

    // ---- expressions ----
    bool starts_expression() const {
        const Token& t = tok();
        switch (t.kind) {
        case TokenKind::Name:
            return !keywords().contains(t.text) || t.text == "None" || t.text == "True" || t.text == "False" ||
                   t.text == "not" || t.text == "lambda" || t.text == "await";
        case TokenKind::Number:
        case TokenKind::String:
        case TokenKind::FString:
            return true;
        case TokenKind::Op:
            return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" || t.text == "+" ||
                   t.text == "~" || t.text == "..." || t.text == "*";
        default:
            return false;
        }
    }

    // Comma-separated list; becomes a Tuple when a comma is present.
    template <typename ItemFn>
    NodeBuilder comma_list(ItemFn item, bool allow_trailing = true, bool slices = false) {
        NodeBuilder first = item();
        if (!at_op(","))
            return first;
        NodeBuilder tup = make(NodeKind::Tuple, "", outer_begin(first), first.span.end);
        tup.children.push_back(std::move(first));
        while (at_op(",")) {
            Position comma_end = tok().end;
            ++i_;
            tup.span.end = comma_end;
            if (!starts_expression() && !(slices && at_op(":"))) {
                if (!allow_trailing)
                    error("expected expression");
                break;
            }
            tup.children.push_back(item());
            tup.span.end = last_end();
        }
        return tup;
    }

    NodeBuilder testlist_star_expr() {
        return comma_list([this] { return at_op("*") ? star_expr() : test(); });
    }
    NodeBuilder testlist() {
        return comma_list([this] { return test(); });
    }
    NodeBuilder exprlist() {
        return comma_list([this] { return expr_or_star(); });
    }
    NodeBuilder expr_or_star() { return at_op("*") ? star_expr() : expr(); }

    NodeBuilder star_expr() {
        Position b = expect("*").begin;
        NodeBuilder inner = expr();
        NodeBuilder n = make(NodeKind::Starred, "", b, inner.span.end);
        n.children.push_back(std::move(inner));
        return n;
    }

    NodeBuilder namedexpr_test() {
        NodeBuilder t = test();
        if (at_op(":=")) {
            if (t.kind != NodeKind::Name)
                error("cannot use assignment expression with this target");
            ++i_;
            NodeBuilder value = test();
            NodeBuilder n = make(NodeKind::NamedExpr, "", outer_begin(t), last_end());
            n.children.push_back(std::move(t));
            n.children.push_back(std::move(value));
            return n;
        }
        return t;
    }

    NodeBuilder test() {
        if (at_keyword("lambda"))
            return lambdef(true);
        NodeBuilder body = or_test();
        if (at_keyword("if")) {
            ++i_;
            NodeBuilder cond = or_test();
            expect("else");
            NodeBuilder orelse = test();
            NodeBuilder n = make(NodeKind::IfExp, "", outer_begin(body), last_end());
            n.children.push_back(std::move(cond));
            n.children.push_back(std::move(body));
            n.children.push_back(std::move(orelse));
            return n;
        }
        return body;
    }

    NodeBuilder test_nocond() {
        if (at_keyword("lambda"))
            return lambdef(false);
        return or_test();
    }

    NodeBuilder lambdef(bool allow_cond) {
        Position b = expect("lambda").begin;
        NodeBuilder args = make(NodeKind::Arguments, "", prev().end, prev().end);
        parameters(args, ":", false);
        if (!args.children.empty()) {
            args.span.begin = args.children.front().span.begin;
            args.span.end = last_end();
        }
        expect(":");
        NodeBuilder body = allow_cond ? test() : test_nocond();
        NodeBuilder n = make(NodeKind::Lambda, "", b, body.span.end);
        n.children.push_back(std::move(args));
        n.children.push_back(std::move(body));
        return n;
    }

    NodeBuilder bool_chain(NodeKind, std::string_view op, NodeBuilder (Parser::*next)()) {
        NodeBuilder first = (this->*next)();
        if (!at_keyword(op))
            return first;
        NodeBuilder n = make(NodeKind::BoolOp, std::string(op), outer_begin(first), first.span.end);
        n.children.push_back(std::move(first));
        while (accept(op))
            n.children.push_back((this->*next)());
        n.span.end = last_end();
        return n;
    }

    NodeBuilder or_test() { return bool_chain(NodeKind::BoolOp, "or", &Parser::and_test); }
    NodeBuilder and_test() { return bool_chain(NodeKind::BoolOp, "and", &Parser::not_test); }

    NodeBuilder not_test() {
        if (at_keyword("not")) {
            Position b = tok().begin;
            ++i_;
            NodeBuilder operand = not_test();
            NodeBuilder n = make(NodeKind::UnaryOp, "not", b, operand.span.end);
            n.children.push_back(std::move(operand));
            return n;
        }
        return comparison();
    }

    std::string comp_op() {
        const Token& t = tok();
        if (t.kind == TokenKind::Op &&
            (t.text == "<" || t.text == ">" || t.text == "==" || t.text == ">=" || t.text == "<=" || t.text == "!=")) {
            ++i_;
            return std::string(t.text);
        }
        if (at_keyword("in")) {
            ++i_;
            return "in";
        }
        if (at_keyword("not") && tok(1).kind == TokenKind::Name && tok(1).text == "in") {
            i_ += 2;
            return "not in";
        }
        if (at_keyword("is")) {
            ++i_;
            if (accept("not"))
                return "is not";
            return "is";
        }
        return {};
    }

    NodeBuilder comparison() {
        NodeBuilder first = expr();
        std::string op = comp_op();
        if (op.empty())
            return first;
        NodeBuilder n = make(NodeKind::Compare, "", outer_begin(first), first.span.end);
        n.children.push_back(std::move(first));
        while (!op.empty()) {
            if (!n.label.empty())
                n.label += ' ';
            n.label += op;
            n.children.push_back(expr());
            op = comp_op();
        }
        n.span.end = last_end();
        return n;
    }

    template <std::size_t N>
    NodeBuilder binary(const std::array<std::string_view, N>& ops, NodeBuilder (Parser::*next)()) {
        NodeBuilder left = (this->*next)();
        while (true) {
            const Token& t = tok();
            bool matched = false;
            if (t.kind == TokenKind::Op) {
                for (std::string_view op : ops)
                    matched = matched || t.text == op;
            }
            if (!matched)
                return left;
            ++i_;
            NodeBuilder right = (this->*next)();
            NodeBuilder n = make(NodeKind::BinOp, std::string(t.text), outer_begin(left), last_end());
            n.children.push_back(std::move(left));
            n.children.push_back(std::move(right));
            left = std::move(n);
        }
    }

    NodeBuilder expr() { return binary(std::array<std::string_view, 1>{"|"}, &Parser::xor_expr); }
    NodeBuilder xor_expr() { return binary(std::array<std::string_view, 1>{"^"}, &Parser::and_expr); }
    NodeBuilder and_expr() { return binary(std::array<std::string_view, 1>{"&"}, &Parser::shift_expr); }
    NodeBuilder shift_expr() { return binary(std::array<std::string_view, 2>{"<<", ">>"}, &Parser::arith_expr); }
    NodeBuilder arith_expr() { return binary(std::array<std::string_view, 2>{"+", "-"}, &Parser::term); }
    NodeBuilder term() { return binary(std::array<std::string_view, 5>{"*", "/", "%", "//", "@"}, &Parser::factor); }

    NodeBuilder factor() {
        const Token& t = tok();
        if (t.kind == TokenKind::Op && (t.text == "+" || t.text == "-" || t.text == "~")) {
            ++i_;
            NodeBuilder operand = factor();
            NodeBuilder n = make(NodeKind::UnaryOp, std::string(t.text), t.begin, operand.span.end);
            n.children.push_back(std::move(operand));
            return n;
        }
        return power();
    }

    NodeBuilder power() {
        NodeBuilder base = await_primary();
        if (at_op("**")) {
            ++i_;
            NodeBuilder exponent = factor();
            NodeBuilder n = make(NodeKind::BinOp, "**", outer_begin(base), last_end());
            n.children.push_back(std::move(base));
            n.children.push_back(std::move(exponent));
            return n;
        }
        return base;
    }

    NodeBuilder await_primary() {
        if (at_keyword("await")) {
            Position b = tok().begin;
            ++i_;
            NodeBuilder inner = primary();
            NodeBuilder n = make(NodeKind::Await, "", b, inner.span.end);
            n.children.push_back(std::move(inner));
            return n;
        }
        return primary();
    }

    NodeBuilder primary() {
        NodeBuilder node = atom();
        while (true) {
            if (at_op("(")) {
                ++i_;
                NodeBuilder call = make(NodeKind::Call, "", outer_begin(node), node.span.end);
                call.children.push_back(std::move(node));
                arglist(call.children, ")");
                call.span.end = expect(")").end;
                node = std::move(call);
            } else if (at_op("[")) {
                ++i_;
                NodeBuilder sub = make(NodeKind::Subscript, "", outer_begin(node), node.span.end);
                sub.children.push_back(std::move(node));
                sub.children.push_back(comma_list([this] { return subscript(); }, true, true));
                sub.span.end = expect("]").end;
                node = std::move(sub);
            } else if (at_op(".")) {
                ++i_;
                const Token& name = expect_name();
                NodeBuilder attr = make(NodeKind::Attribute, std::string(name.text), outer_begin(node), name.end);
                attr.children.push_back(std::move(node));
                node = std::move(attr);
            } else {
                return node;
            }
        }
    }

    NodeBuilder subscript() {
        Position b = tok().begin;
        NodeBuilder lower;
        bool has_lower = false;
        if (!at_op(":")) {
            lower = at_op("*") ? star_expr() : test();
            has_lower = true;
            if (!at_op(":"))
                return lower;
            b = lower.span.begin;
        }
        NodeBuilder slice = make(NodeKind::Slice, "", b, tok().end);
        if (has_lower)
            slice.children.push_back(std::move(lower));
        expect(":");
        std::string shape = has_lower ? "L:" : ":";
        if (!at_op(":") && !at_op("]") && !at_op(",")) {
            slice.children.push_back(test());
            slice.span.end = last_end();
            shape += "U";
        }
        if (at_op(":")) {
            slice.span.end = tok().end;
            ++i_;
            shape += ":";
            if (!at_op("]") && !at_op(",")) {
                slice.children.push_back(test());
                slice.span.end = last_end();
                shape += "S";
            }
        }
        slice.label = shape;
        return slice;
    }

    // Call arguments or class bases, appended to `out`.
    void arglist(std::vector<NodeBuilder>& out, std::string_view terminator) {
        const Token& open = toks_[i_ - 1];
        bool first = true;
        while (!at_op(terminator)) {
            if (!first)
                expect(",");
            first = false;
            if (at_op(terminator))
                break;
            if (at_op("*")) {
                out.push_back(star_expr_test());
                continue;
            }
            if (at_op("**")) {
                Position b = tok().begin;
                ++i_;
                NodeBuilder v = test();
                NodeBuilder n = make(NodeKind::DoubleStarred, "", b, v.span.end);
                n.children.push_back(std::move(v));
                out.push_back(std::move(n));
                continue;
            }
            if (is_name_token(tok()) && tok(1).kind == TokenKind::Op && tok(1).text == "=") {
                const Token& name = toks_[i_];
                i_ += 2;
                NodeBuilder v = test();
                NodeBuilder kw = make(NodeKind::Keyword, std::string(name.text), name.begin, last_end());
                kw.children.push_back(std::move(v));
                out.push_back(std::move(kw));
                continue;
            }
            NodeBuilder arg = namedexpr_test();
            if (at_keyword("for") || at_keyword("async")) {
                // A bare generator argument borrows the call's parentheses.
                NodeBuilder gen = make(NodeKind::GeneratorExp, "", open.begin, arg.span.end);
                gen.children.push_back(std::move(arg));
                comp_for(gen);
                gen.span.end = at_op(terminator) ? tok().end : last_end();
                out.push_back(std::move(gen));
                continue;
            }
            out.push_back(std::move(arg));
        }
    }

    NodeBuilder star_expr_test() {
        Position b = expect("*").begin;
        NodeBuilder inner = test();
        NodeBuilder n = make(NodeKind::Starred, "", b, inner.span.end);
        n.children.push_back(std::move(inner));
        return n;
    }

    // Appends one or more Comprehension children to `owner`.
    void comp_for(NodeBuilder& owner) {
        while (at_keyword("for") || at_keyword("async")) {
            Position b = tok().begin;
            std::string label;
            if (accept("async"))
                label = "async";
            expect("for");
            NodeBuilder comp = make(NodeKind::Comprehension, label, b, b);
            comp.children.push_back(exprlist());
            expect("in");
            comp.children.push_back(or_test());
            while (at_keyword("if")) {
                ++i_;
                comp.children.push_back(test_nocond());
            }
            comp.span.end = last_end();
            owner.children.push_back(std::move(comp));
        }
        owner.span.end = last_end();
    }

    NodeBuilder yield_expr() {
        Position b = expect("yield").begin;
        if (accept("from")) {
            NodeBuilder v = test();
            NodeBuilder n = make(NodeKind::YieldFrom, "", b, v.span.end);
            n.children.push_back(std::move(v));
            return n;
        }
        NodeBuilder n = make(NodeKind::Yield, "", b, prev().end);
        if (starts_expression()) {
            n.children.push_back(testlist_star_expr());
            n.span.end = last_end();
        }
        return n;
    }

    NodeBuilder atom() {
        const Token& t = tok();
        switch (t.kind) {
        case TokenKind::Name: {
            if (t.text == "None" || t.text == "True" || t.text == "False") {
                ++i_;
                return make(NodeKind::Constant, std::string(t.text), t.begin, t.end);
            }
            if (keywords().contains(t.text))
                error("invalid syntax");
            ++i_;
            return make(NodeKind::Name, std::string(t.text), t.begin, t.end);
        }
        case TokenKind::Number:
            ++i_;
            return make(NodeKind::Constant, std::string(t.text), t.begin, t.end);
        case TokenKind::String:
        case TokenKind::FString: {
            Position b = t.begin;
            bool fstring = false;
            std::string label;
            Position e = t.end;
            while (tok().kind == TokenKind::String || tok().kind == TokenKind::FString) {
                fstring = fstring || tok().kind == TokenKind::FString;
                if (!label.empty())
                    label += ' ';
                label += tok().text;
                e = tok().end;
                ++i_;
            }
            return make(fstring ? NodeKind::JoinedStr : NodeKind::Constant, label, b, e);
        }
        case TokenKind::Op:
            if (t.text == "...") {
                ++i_;
                return make(NodeKind::Constant, "...", t.begin, t.end);
            }
            if (t.text == "(")
                return paren_atom();
            if (t.text == "[")
                return list_atom();
            if (t.text == "{")
                return brace_atom();
            break;
        default:
            break;
        }
        error("invalid syntax");
    }

    NodeBuilder paren_atom() {
        const Token& open = toks_[i_++];
        if (at_op(")")) {
            const Token& close = toks_[i_++];
            return make(NodeKind::Tuple, "", open.begin, close.end);
        }
        if (at_keyword("yield")) {
            NodeBuilder y = yield_expr();
            expect(")");
            return y;
        }
        NodeBuilder first = at_op("*") ? star_expr() : namedexpr_test();
        if (at_keyword("for") || at_keyword("async")) {
            NodeBuilder gen = make(NodeKind::GeneratorExp, "", open.begin, open.end);
            gen.children.push_back(std::move(first));
            comp_for(gen);
            gen.span.begin = open.begin;
            gen.span.end = expect(")").end;
            return gen;
        }
        if (!at_op(",")) {
            Position close = expect(")").end;
            auto& outer = paren_outer_[{first.span.begin.offset, first.span.end.offset}];
            if (outer.end.offset < close.offset)
                outer = Span{open.begin, close};
            return first;
        }
        NodeBuilder tup = make(NodeKind::Tuple, "", open.begin, open.end);
        tup.children.push_back(std::move(first));
        while (accept(",")) {
            if (at_op(")"))
                break;
            tup.children.push_back(at_op("*") ? star_expr() : namedexpr_test());
        }
        tup.span.end = expect(")").end;
        return tup;
    }

    NodeBuilder list_atom() {
        const Token& open = toks_[i_++];
        NodeBuilder list = make(NodeKind::List, "", open.begin, open.end);
        if (at_op("]")) {
            list.span.end = toks_[i_++].end;
            return list;
        }
        NodeBuilder first = at_op("*") ? star_expr() : namedexpr_test();
        if (at_keyword("for") || at_keyword("async")) {
            list.kind = NodeKind::ListComp;
            list.children.push_back(std::move(first));
            comp_for(list);
            list.span.begin = open.begin;
            list.span.end = expect("]").end;
            return list;
        }
        list.children.push_back(std::move(first));
        while (accept(",")) {
            if (at_op("]"))
                break;
            list.children.push_back(at_op("*") ? star_expr() : namedexpr_test());
        }
        list.span.end = expect("]").end;
        return list;
    }

    NodeBuilder dict_item() {
        if (at_op("**")) {
            Position b = tok().begin;
            ++i_;
            NodeBuilder v = expr();
            NodeBuilder n = make(NodeKind::DoubleStarred, "", b, v.span.end);
            n.children.push_back(std::move(v));
            return n;
        }
        return test();
    }

    NodeBuilder brace_atom() {
        const Token& open = toks_[i_++];
        NodeBuilder node = make(NodeKind::Dict, "", open.begin, open.end);
        if (at_op("}")) {
            node.span.end = toks_[i_++].end;
            return node;
        }
        bool is_dict;
        NodeBuilder first;
        if (at_op("**")) {
            first = dict_item();
            is_dict = true;
            node.children.push_back(std::move(first));
        } else {
            first = at_op("*") ? star_expr() : namedexpr_test();
            is_dict = at_op(":");
            node.children.push_back(std::move(first));
            if (is_dict) {
                ++i_;
                node.children.push_back(test());
            }
        }
        if (at_keyword("for") || at_keyword("async")) {
            node.kind = is_dict ? NodeKind::DictComp : NodeKind::SetComp;
            comp_for(node);
            node.span.begin = open.begin;
            node.span.end = expect("}").end;
            return node;
        }
        node.kind = is_dict ? NodeKind::Dict : NodeKind::Set;
        while (accept(",")) {
            if (at_op("}"))
                break;
            if (is_dict) {
                if (at_op("**")) {
                    node.children.push_back(dict_item());
                    continue;
                }
                node.children.push_back(test());
                expect(":");
                node.children.push_back(test());
            } else {
                node.children.push_back(at_op("*") ? star_expr() : namedexpr_test());
            }
        }
        node.span.end = expect("}").end;
        return node;
    }

    std::string_view src_;
    std::string path_;
    std::vector<Token> toks_;
    std::size_t i_ = 0;
    // inner span offsets of a parenthesized expression -> span with its outermost parens
    std::map<std::pair<std::uint32_t, std::uint32_t>, Span> paren_outer_;
};

} // namespace

AstTree parse_module(std::string_view content, std::string path) {
    Parser parser(content, path, true);
    AstTree tree(parser.file_input(), std::move(path));
    tree.set_source(std::make_shared<const std::string>(content));
    return tree;
}

AstTree parse_module(const SourceFile& source) { return parse_module(source.content, source.path); }

AstTree parse_expression(std::string_view content) {
    Parser parser(content, "<expression>", false);
    AstTree tree(parser.expression_input(), "<expression>");
    tree.set_source(std::make_shared<const std::string>(content));
    return tree;
}

} // namespace actref
