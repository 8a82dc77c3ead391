#include "actref/source_model.hpp"

#include <array>
#include <cstdio>
#include <functional>

namespace actref {
namespace {

constexpr std::array<std::string_view, kNodeKindCount> kKindNames = {
    "ModuleRoot", "Block",       "OrElse",     "FinalBody",  "Decorator",    "Arguments",  "Arg",
    "VarArg",     "KwArg",       "Annotation", "Returns",    "Bases",        "WithItem",   "ExceptHandler",
    "Alias",      "Comprehension", "Keyword",  "ClassDef",   "FunctionDef",  "AsyncFunctionDef", "Return",
    "Delete",     "Assign",      "AugAssign",  "AnnAssign",  "For",          "AsyncFor",   "While",
    "If",         "With",        "AsyncWith",  "Raise",      "Try",          "Assert",     "Import",
    "ImportFrom", "Global",      "Nonlocal",   "Expr",       "Pass",         "Break",      "Continue",
    "BoolOp",     "NamedExpr",   "BinOp",      "UnaryOp",    "Lambda",       "IfExp",      "Dict",
    "Set",        "ListComp",    "SetComp",    "DictComp",   "GeneratorExp", "Await",      "Yield",
    "YieldFrom",  "Compare",     "Call",       "Starred",    "DoubleStarred", "Constant",  "JoinedStr",
    "Attribute",  "Subscript",   "Slice",      "Name",       "List",         "Tuple",
};

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 29;
    return h;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

std::string_view to_string(NodeKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<NodeKind> node_kind_from_string(std::string_view name) {
    for (std::size_t k = 0; k < kKindNames.size(); ++k)
        if (kKindNames[k] == name)
            return static_cast<NodeKind>(k);
    return std::nullopt;
}

bool is_statement_kind(NodeKind kind) {
    return kind >= NodeKind::ClassDef && kind <= NodeKind::Continue;
}

bool is_expression_kind(NodeKind kind) { return kind >= NodeKind::BoolOp; }

bool is_function_kind(NodeKind kind) {
    return kind == NodeKind::FunctionDef || kind == NodeKind::AsyncFunctionDef;
}

std::string to_string(const Span& span) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%u:%u-%u:%u", span.begin.line, span.begin.column, span.end.line,
                  span.end.column);
    return buf;
}

std::string normalize_newlines(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r') {
            out.push_back('\n');
            if (i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
        } else {
            out.push_back(text[i]);
        }
    }
    return out;
}

std::string content_digest(std::string_view normalized) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(normalized)));
    return buf;
}

SourceFile::SourceFile(std::string p, std::string c) : path(std::move(p)), content(normalize_newlines(c)) {
    auto slash = path.find_last_of('/');
    name = slash == std::string::npos ? path : path.substr(slash + 1);
    content_hash = content_digest(content);
}

std::string SourceFile::directory() const {
    auto slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string() : path.substr(0, slash);
}

std::string SourceFile::module_name() const {
    std::string m = path;
    if (m.size() > 3 && m.ends_with(".py"))
        m.resize(m.size() - 3);
    for (char& c : m)
        if (c == '/')
            c = '.';
    return m;
}

std::size_t NodeBuilder::size() const {
    std::size_t n = 1;
    for (const auto& c : children)
        n += c.size();
    return n;
}

AstTree::AstTree(const NodeBuilder& root, std::string path) : path_(std::move(path)) {
    std::size_t n = root.size();
    nodes_.reserve(n);
    hashes_.resize(n);
    shape_hashes_.resize(n);
    heights_.resize(n);
    sizes_.resize(n);
    depths_.reserve(n);
    positions_.reserve(n);
    post_order_.reserve(n);
    flatten(root, kNoNode, 0, 0);
}

void AstTree::flatten(const NodeBuilder& b, NodeId parent, std::uint32_t depth, std::uint32_t pos) {
    NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(AstNode{id, b.kind, b.label, b.span, parent, {}});
    depths_.push_back(depth);
    positions_.push_back(pos);
    nodes_[id].children.reserve(b.children.size());
    std::uint64_t h = mix(fnv1a(b.label), static_cast<std::uint64_t>(b.kind) + 1);
    std::uint64_t sh = mix(0x51ed27, static_cast<std::uint64_t>(b.kind) + 1);
    std::uint32_t height = 1;
    std::uint32_t size = 1;
    std::uint32_t k = 0;
    for (const auto& child : b.children) {
        NodeId cid = static_cast<NodeId>(nodes_.size());
        nodes_[id].children.push_back(cid);
        flatten(child, id, depth + 1, k++);
        h = mix(h, hashes_[cid]);
        sh = mix(sh, shape_hashes_[cid]);
        height = std::max(height, heights_[cid] + 1);
        size += sizes_[cid];
    }
    h = mix(h, b.children.size());
    sh = mix(sh, b.children.size());
    hashes_[id] = h;
    shape_hashes_[id] = sh;
    heights_[id] = height;
    sizes_[id] = size;
    post_order_.push_back(id);
}

NodeBuilder AstTree::to_builder(NodeId id) const {
    const AstNode& n = nodes_.at(id);
    NodeBuilder b(n.kind, n.label, n.span);
    b.children.reserve(n.children.size());
    for (NodeId c : n.children)
        b.children.push_back(to_builder(c));
    return b;
}

bool isomorphic(const AstTree& a, NodeId na, const AstTree& b, NodeId nb) {
    if (a.hash(na) != b.hash(nb) || a.subtree_size(na) != b.subtree_size(nb))
        return false;
    std::uint32_t n = a.subtree_size(na);
    // Pre-order layout: equal-shaped subtrees line up index by index.
    for (std::uint32_t k = 0; k < n; ++k) {
        const AstNode& x = a[na + k];
        const AstNode& y = b[nb + k];
        if (x.kind != y.kind || x.label != y.label || x.children.size() != y.children.size())
            return false;
    }
    return true;
}

bool isomorphic(const AstTree& a, const AstTree& b) {
    if (a.empty() || b.empty())
        return a.empty() && b.empty();
    return isomorphic(a, a.root(), b, b.root());
}

std::string dump(const AstTree& tree, NodeId id) {
    std::string out;
    std::function<void(NodeId)> rec = [&](NodeId n) {
        out.append(2 * (tree.depth(n) - tree.depth(id)), ' ');
        out += to_string(tree[n].kind);
        if (!tree[n].label.empty()) {
            out += ": ";
            out += tree[n].label;
        }
        out += '\n';
        for (NodeId c : tree[n].children)
            rec(c);
    };
    rec(id);
    return out;
}

SyntaxError::SyntaxError(std::string path, std::uint32_t line, const std::string& message)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + message), path_(std::move(path)), line_(line) {}

std::string_view to_string(ElementKind kind) {
    switch (kind) {
    case ElementKind::Module:
        return "Module";
    case ElementKind::Class:
        return "Class";
    case ElementKind::Method:
        return "Method";
    case ElementKind::Statement:
        return "Statement";
    case ElementKind::Variable:
        return "Variable";
    }
    return "?";
}

std::string CodeElement::name() const {
    auto dot = qualified_name.find_last_of('.');
    return dot == std::string::npos ? qualified_name : qualified_name.substr(dot + 1);
}

std::string CodeElement::container() const {
    if (kind == ElementKind::Module)
        return {};
    auto dot = qualified_name.find_last_of('.');
    return dot == std::string::npos ? std::string() : qualified_name.substr(0, dot);
}

NodeId enclosing_declaration(const AstTree& tree, NodeId id) {
    NodeId p = tree[id].parent;
    while (p != kNoNode && !is_declaration_kind(tree[p].kind))
        p = tree[p].parent;
    return p == kNoNode ? tree.root() : p;
}

std::string qualified_name_of(const AstTree& tree, NodeId decl) {
    if (decl == tree.root() || !is_declaration_kind(tree[decl].kind))
        return {};
    std::string outer = qualified_name_of(tree, enclosing_declaration(tree, decl));
    return outer.empty() ? tree[decl].label : outer + "." + tree[decl].label;
}

std::string enclosing_scope_name(const AstTree& tree, NodeId id) {
    return qualified_name_of(tree, enclosing_declaration(tree, id));
}

bool is_assignment_target(const AstTree& tree, NodeId id) {
    if (tree[id].kind != NodeKind::Name)
        return false;
    NodeId child = id;
    NodeId p = tree[id].parent;
    while (p != kNoNode &&
           (tree[p].kind == NodeKind::Tuple || tree[p].kind == NodeKind::List || tree[p].kind == NodeKind::Starred)) {
        child = p;
        p = tree[p].parent;
    }
    if (p == kNoNode)
        return false;
    const AstNode& stmt = tree[p];
    if (stmt.kind == NodeKind::Assign)
        return child != stmt.children.back();
    if (stmt.kind == NodeKind::AnnAssign)
        return child == stmt.children.front();
    return false;
}

std::string callee_name(const AstTree& tree, NodeId call) {
    if (tree[call].kind != NodeKind::Call || tree[call].children.empty())
        return {};
    const AstNode& func = tree[tree[call].children.front()];
    if (func.kind == NodeKind::Name || func.kind == NodeKind::Attribute)
        return func.label;
    return {};
}

std::string_view node_text(const AstTree& tree, NodeId id, std::string_view content) {
    const Span& s = tree[id].span;
    if (s.end.offset > content.size() || s.begin.offset > s.end.offset)
        return {};
    return content.substr(s.begin.offset, s.end.offset - s.begin.offset);
}

namespace {

std::string expression_name(const AstTree& tree, NodeId id) {
    const AstNode& n = tree[id];
    if (n.kind == NodeKind::Name)
        return n.label;
    if (n.kind == NodeKind::Attribute && !n.children.empty()) {
        std::string base = expression_name(tree, n.children.front());
        return base.empty() ? n.label : base + "." + n.label;
    }
    if ((n.kind == NodeKind::Call || n.kind == NodeKind::Subscript) && !n.children.empty())
        return expression_name(tree, n.children.front());
    return std::string(to_string(n.kind));
}

bool is_receiver_scope(const AstTree& tree, NodeId fn) {
    NodeId p = tree[fn].parent;
    return p != kNoNode && tree[p].kind == NodeKind::Block && tree[p].parent != kNoNode &&
           tree[tree[p].parent].kind == NodeKind::ClassDef;
}

ElementSignature signature_of(const AstTree& tree, NodeId decl) {
    ElementSignature sig;
    const AstNode& n = tree[decl];
    sig.name = n.label;
    for (NodeId c : n.children) {
        const AstNode& child = tree[c];
        if (is_function_kind(n.kind) && child.kind == NodeKind::Arguments) {
            for (NodeId a : child.children)
                sig.parameter_names.push_back(tree[a].label);
        } else if (n.kind == NodeKind::ClassDef && child.kind == NodeKind::Bases) {
            for (NodeId b : child.children)
                if (tree[b].kind != NodeKind::Keyword && tree[b].kind != NodeKind::DoubleStarred)
                    sig.base_names.push_back(expression_name(tree, b));
        }
    }
    if (is_function_kind(n.kind) && !sig.parameter_names.empty() && is_receiver_scope(tree, decl) &&
        (sig.parameter_names.front() == "self" || sig.parameter_names.front() == "cls"))
        sig.parameter_names.erase(sig.parameter_names.begin());
    sig.arity = sig.parameter_names.size();
    return sig;
}

} // namespace

std::vector<CodeElement> extract_elements(const AstTree& tree, const std::string& file_path) {
    std::vector<CodeElement> out;
    if (tree.empty())
        return out;
    SourceFile probe;
    probe.path = file_path;
    CodeElement module;
    module.kind = ElementKind::Module;
    module.qualified_name = probe.module_name();
    module.signature.name = module.qualified_name;
    module.node = tree.root();
    module.file = file_path;
    module.span = tree[tree.root()].span;
    out.push_back(std::move(module));
    for (const AstNode& n : tree.nodes()) {
        if (is_declaration_kind(n.kind)) {
            CodeElement e;
            e.kind = n.kind == NodeKind::ClassDef ? ElementKind::Class : ElementKind::Method;
            e.qualified_name = qualified_name_of(tree, n.id);
            e.signature = signature_of(tree, n.id);
            e.node = n.id;
            e.file = file_path;
            e.span = n.span;
            out.push_back(std::move(e));
        } else if (n.kind == NodeKind::Name && is_assignment_target(tree, n.id)) {
            CodeElement e;
            e.kind = ElementKind::Variable;
            std::string scope = enclosing_scope_name(tree, n.id);
            e.qualified_name = scope.empty() ? n.label : scope + "." + n.label;
            e.signature.name = n.label;
            e.node = n.id;
            e.file = file_path;
            e.span = n.span;
            out.push_back(std::move(e));
        }
    }
    return out;
}

ElementSignature element_signature(const CodeElement& element, const AstTree& tree) {
    if (element.kind != ElementKind::Class && element.kind != ElementKind::Method)
        throw UnsupportedElement("element_signature: " + std::string(to_string(element.kind)) + " '" +
                                 element.qualified_name + "' has no declaration signature");
    return signature_of(tree, element.node);
}

} // namespace actref
