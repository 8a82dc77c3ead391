#pragma once

#include "actref/source_model.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace actref {

/// Digest of a subtree: kinds, labels and child order. Spans and ids do not contribute.
std::uint64_t structural_hash(const AstTree& tree, NodeId id);

/// Injective, kind-preserving correspondence between the nodes of two trees.
class NodeMapping {
public:
    NodeMapping() = default;
    NodeMapping(std::size_t before_size, std::size_t after_size);

    /// Adds (b, a) if both are currently unmapped. Returns false otherwise.
    bool add(NodeId b, NodeId a);
    /// Same pairs seen from the other side.
    NodeMapping inverted() const;

    bool has_before(NodeId b) const { return b < to_after_.size() && to_after_[b] != kNoNode; }
    bool has_after(NodeId a) const { return a < to_before_.size() && to_before_[a] != kNoNode; }
    NodeId after_of(NodeId b) const { return b < to_after_.size() ? to_after_[b] : kNoNode; }
    NodeId before_of(NodeId a) const { return a < to_before_.size() ? to_before_[a] : kNoNode; }
    bool contains(NodeId b, NodeId a) const { return has_before(b) && to_after_[b] == a; }

    std::size_t size() const { return count_; }
    std::size_t before_size() const { return to_after_.size(); }
    std::size_t after_size() const { return to_before_.size(); }

    /// Pairs ordered by before id.
    std::vector<std::pair<NodeId, NodeId>> pairs() const;

private:
    std::vector<NodeId> to_after_;
    std::vector<NodeId> to_before_;
    std::size_t count_ = 0;
};

struct MatcherOptions {
    std::optional<double> threshold; // fixed bottom-up threshold, clamped to [0.3, 0.6]
    std::uint32_t min_height = 2;
    bool signature_aware = true;     // restrict pairing of differently named declarations
};

NodeMapping match_trees(const AstTree& before, const AstTree& after, const MatcherOptions& options = {});

double dice_similarity(const AstTree& before, NodeId b, const AstTree& after, NodeId a, const NodeMapping& mapping);

double adaptive_threshold(std::size_t before_size, std::size_t after_size,
                          std::optional<double> override_value = std::nullopt);

enum class EditKind : std::uint8_t { Insert, Delete, Move, Update };
std::string_view to_string(EditKind kind);

struct EditAction {
    EditKind kind = EditKind::Update;
    NodeKind node_kind = NodeKind::ModuleRoot;
    NodeId before = kNoNode;        // Delete, Move, Update
    NodeId after = kNoNode;         // Insert, Move, Update
    NodeId parent = kNoNode;        // after-tree parent (Insert, Move)
    NodeId parent_before = kNoNode; // before-side counterpart of `parent`, if mapped
    std::uint32_t position = 0;     // child index under `parent`
    bool subtree = false;           // Insert/Delete covering a whole unmapped subtree
    std::string old_label;
    std::string new_label;
    std::string file;
    /// Inserted material: the whole subtree, or a single childless node.
    std::shared_ptr<const NodeBuilder> payload;

    friend bool operator==(const EditAction& x, const EditAction& y) {
        return x.kind == y.kind && x.node_kind == y.node_kind && x.before == y.before && x.after == y.after &&
               x.parent == y.parent && x.parent_before == y.parent_before && x.position == y.position &&
               x.subtree == y.subtree && x.old_label == y.old_label && x.new_label == y.new_label &&
               x.file == y.file;
    }
};

class MappingMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidScript : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Updates, Moves, Inserts, Deletes; each group in pre-order.
std::vector<EditAction> generate_actions(const AstTree& before, const AstTree& after, const NodeMapping& mapping);

AstTree apply_actions(const AstTree& before, const std::vector<EditAction>& script);

/// One-line human readable rendering.
std::string describe(const EditAction& action, const AstTree& before, const AstTree& after);

} // namespace actref
