#pragma once

#include "actref/module_level.hpp"
#include "actref/source_model.hpp"
#include "actref/tree_diff.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace actref {

// Modify collects node actions inside an element that survives on both sides
// (body edits, reorders); no rule consumes it.
enum class ElementActionKind : std::uint8_t { Insert, Delete, Move, Update, Modify };
std::string_view to_string(ElementActionKind kind);

struct ElementAction {
    ElementActionKind kind = ElementActionKind::Modify;
    /// After-side element, or the before-side one for Delete.
    CodeElement element;
    /// Before-side element for Move/Update/Modify.
    std::optional<CodeElement> before_element;
    std::string from_container; // Move
    std::string to_container;   // Move
    std::string old_name;       // Update
    std::string new_name;       // Update
    std::vector<EditAction> evidence;
    double body_similarity = 0.0;
    /// Subject nodes: the declaration, the assignment statement, or the renamed Name.
    NodeId before_node = kNoNode;
    NodeId after_node = kNoNode;
    /// Normalized tokens of the body (declarations) or right-hand side (variables).
    TokenMultiset before_tokens;
    TokenMultiset after_tokens;
    std::string before_file;
    std::string after_file;
    /// Commit-wide identity assigned by the pipeline.
    std::size_t id = 0;

    const CodeElement& before_side() const { return before_element ? *before_element : element; }
};

/// One-line rendering, e.g. "Update Method A.f -> g".
std::string describe(const ElementAction& action);

/// Collapses a raw script into element-level actions. The mapping is the one the
/// script was generated from; it tells surviving declarations from new or removed ones.
std::vector<ElementAction> group_into_element_actions(const std::vector<EditAction>& script, const AstTree& before,
                                                      const AstTree& after, const NodeMapping& mapping);

struct RefineOptions {
    double rename_body_floor = 0.5;
    double signature_pair_floor = 0.7;
};

/// Splits weak declaration Updates into Delete+Insert and fuses look-alike
/// Delete+Insert pairs back into Move/Update.
std::vector<ElementAction> refine_update_vs_replace(std::vector<ElementAction> actions,
                                                   const RefineOptions& options = {});

/// Indices (into deletes, inserts) of signature-compatible pairs, best tier first.
std::vector<std::pair<std::size_t, std::size_t>> pair_declarations_by_signature(
    const std::vector<ElementAction>& deletes, const std::vector<ElementAction>& inserts,
    const RefineOptions& options = {});

/// Tokens of a declaration's body, or of an assignment's right-hand side.
TokenMultiset body_tokens(const AstTree& tree, NodeId node);

/// Element describing a declaration node, an assignment statement or an assignment target.
CodeElement element_at(const AstTree& tree, NodeId node, const std::string& file);

/// Single-Name target of an Assign/AnnAssign statement, or kNoNode.
NodeId assigned_name(const AstTree& tree, NodeId stmt);

} // namespace actref
