#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace actref {

/// Fixed node-kind taxonomy of the Python syntax tree.
enum class NodeKind : std::uint8_t {
    // structure
    ModuleRoot,
    Block,
    OrElse,
    FinalBody,
    Decorator,
    Arguments,
    Arg,
    VarArg,
    KwArg,
    Annotation,
    Returns,
    Bases,
    WithItem,
    ExceptHandler,
    Alias,
    Comprehension,
    Keyword,
    // statements
    ClassDef,
    FunctionDef,
    AsyncFunctionDef,
    Return,
    Delete,
    Assign,
    AugAssign,
    AnnAssign,
    For,
    AsyncFor,
    While,
    If,
    With,
    AsyncWith,
    Raise,
    Try,
    Assert,
    Import,
    ImportFrom,
    Global,
    Nonlocal,
    Expr,
    Pass,
    Break,
    Continue,
    // expressions
    BoolOp,
    NamedExpr,
    BinOp,
    UnaryOp,
    Lambda,
    IfExp,
    Dict,
    Set,
    ListComp,
    SetComp,
    DictComp,
    GeneratorExp,
    Await,
    Yield,
    YieldFrom,
    Compare,
    Call,
    Starred,
    DoubleStarred,
    Constant,
    JoinedStr,
    Attribute,
    Subscript,
    Slice,
    Name,
    List,
    Tuple,
};

inline constexpr std::size_t kNodeKindCount = static_cast<std::size_t>(NodeKind::Tuple) + 1;

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view name);

bool is_statement_kind(NodeKind kind);
bool is_expression_kind(NodeKind kind);
bool is_function_kind(NodeKind kind);
inline bool is_declaration_kind(NodeKind kind) {
    return kind == NodeKind::ClassDef || is_function_kind(kind);
}

struct Position {
    std::uint32_t line = 1;   // 1-based
    std::uint32_t column = 0; // 0-based byte column
    std::uint32_t offset = 0; // byte offset into the file
    friend bool operator==(const Position&, const Position&) = default;
    friend auto operator<=>(const Position& a, const Position& b) { return a.offset <=> b.offset; }
};

struct Span {
    Position begin;
    Position end; // exclusive
    friend bool operator==(const Span&, const Span&) = default;
    bool contains(const Span& other) const {
        return begin.offset <= other.begin.offset && other.end.offset <= end.offset;
    }
};

std::string to_string(const Span& span);

struct SourceFile {
    std::string path;    // slash-separated, relative
    std::string name;    // final path segment
    std::string content; // newline-normalized text
    std::string content_hash;

    SourceFile() = default;
    SourceFile(std::string path, std::string content);

    /// Directory part of the path ("" for top-level files).
    std::string directory() const;
    /// Dotted module name derived from the path ("pkg/mod.py" -> "pkg.mod").
    std::string module_name() const;
};

/// CRLF and lone CR become LF.
std::string normalize_newlines(std::string_view text);
std::string content_digest(std::string_view normalized);

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

struct AstNode {
    NodeId id = kNoNode;
    NodeKind kind = NodeKind::ModuleRoot;
    std::string label;
    Span span;
    NodeId parent = kNoNode;
    std::vector<NodeId> children;
};

/// Mutable nested form used while building or rewriting trees.
struct NodeBuilder {
    NodeKind kind = NodeKind::ModuleRoot;
    std::string label;
    Span span;
    std::vector<NodeBuilder> children;

    NodeBuilder() = default;
    NodeBuilder(NodeKind k, std::string l = {}, Span s = {}) : kind(k), label(std::move(l)), span(s) {}
    std::size_t size() const;
};

/// Ordered labeled tree stored in pre-order. Node ids are pre-order indices
/// and never change once the tree is built.
class AstTree {
public:
    AstTree() = default;
    explicit AstTree(const NodeBuilder& root, std::string path = {});

    const std::string& path() const { return path_; }
    /// Text the tree was parsed from; empty for trees built from NodeBuilders.
    std::string_view source() const { return source_ ? std::string_view(*source_) : std::string_view(); }
    void set_source(std::shared_ptr<const std::string> text) { source_ = std::move(text); }
    bool empty() const { return nodes_.empty(); }
    std::size_t size() const { return nodes_.size(); }
    NodeId root() const { return 0; }

    const AstNode& node(NodeId id) const { return nodes_.at(id); }
    const AstNode& operator[](NodeId id) const { return nodes_[id]; }
    bool contains(NodeId id) const { return id < nodes_.size(); }
    std::span<const AstNode> nodes() const { return nodes_; }

    std::uint64_t hash(NodeId id) const { return hashes_[id]; }
    std::uint64_t structure_hash(NodeId id) const { return shape_hashes_[id]; }
    std::uint32_t height(NodeId id) const { return heights_[id]; }
    /// Number of nodes in the subtree rooted at id, id included.
    std::uint32_t subtree_size(NodeId id) const { return sizes_[id]; }
    std::uint32_t depth(NodeId id) const { return depths_[id]; }
    /// Index of id among its parent's children (0 for the root).
    std::uint32_t position(NodeId id) const { return positions_[id]; }

    /// Pre-order ids make descendant tests constant time.
    bool is_descendant(NodeId maybe_descendant, NodeId ancestor) const {
        return maybe_descendant > ancestor && maybe_descendant < ancestor + sizes_[ancestor];
    }
    bool in_subtree(NodeId id, NodeId root) const { return id >= root && id < root + sizes_[root]; }

    const std::vector<NodeId>& post_order() const { return post_order_; }

    NodeBuilder to_builder(NodeId id = 0) const;

private:
    void flatten(const NodeBuilder& b, NodeId parent, std::uint32_t depth, std::uint32_t pos);

    std::string path_;
    std::shared_ptr<const std::string> source_;
    std::vector<AstNode> nodes_;
    std::vector<std::uint64_t> hashes_;
    std::vector<std::uint64_t> shape_hashes_;
    std::vector<std::uint32_t> heights_;
    std::vector<std::uint32_t> sizes_;
    std::vector<std::uint32_t> depths_;
    std::vector<std::uint32_t> positions_;
    std::vector<NodeId> post_order_;
};

/// Kind, label and child order agree everywhere; spans and ids are ignored.
bool isomorphic(const AstTree& a, NodeId na, const AstTree& b, NodeId nb);
bool isomorphic(const AstTree& a, const AstTree& b);

/// Indented one-node-per-line dump, "Kind: label".
std::string dump(const AstTree& tree, NodeId id = 0);

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(std::string path, std::uint32_t line, const std::string& message);
    const std::string& path() const { return path_; }
    std::uint32_t line() const { return line_; }

private:
    std::string path_;
    std::uint32_t line_;
};

AstTree parse_module(const SourceFile& source);
AstTree parse_module(std::string_view content, std::string path = "<string>");
/// Parses a single expression; the returned tree's root is the expression.
AstTree parse_expression(std::string_view content);

enum class ElementKind : std::uint8_t { Module, Class, Method, Statement, Variable };
std::string_view to_string(ElementKind kind);

struct ElementSignature {
    std::string name;
    std::size_t arity = 0;
    std::vector<std::string> parameter_names;
    std::vector<std::string> base_names;
    friend bool operator==(const ElementSignature&, const ElementSignature&) = default;
};

struct CodeElement {
    ElementKind kind = ElementKind::Module;
    std::string qualified_name;
    ElementSignature signature;
    NodeId node = kNoNode;
    std::string file;
    Span span;

    /// Last segment of the qualified name.
    std::string name() const;
    /// Qualified name of the enclosing element ("" at module scope).
    std::string container() const;
};

class UnsupportedElement : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::vector<CodeElement> extract_elements(const AstTree& tree, const std::string& file_path);
ElementSignature element_signature(const CodeElement& element, const AstTree& tree);

/// Scope-qualified name of the innermost class/function enclosing `id`
/// (exclusive), "" at module scope.
std::string enclosing_scope_name(const AstTree& tree, NodeId id);
/// Innermost class/function node strictly enclosing `id`, or the root.
NodeId enclosing_declaration(const AstTree& tree, NodeId id);
/// Qualified name of a declaration node ("A.m").
std::string qualified_name_of(const AstTree& tree, NodeId decl);
/// True for a Name node bound by an Assign/AnnAssign target.
bool is_assignment_target(const AstTree& tree, NodeId id);
/// Name of the function called by a Call node (Name or Attribute label).
std::string callee_name(const AstTree& tree, NodeId call);
/// Source text covered by a node.
std::string_view node_text(const AstTree& tree, NodeId id, std::string_view content);

} // namespace actref
