#include "actref/action_refine.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace actref {

std::string_view to_string(ElementActionKind kind) {
    switch (kind) {
    case ElementActionKind::Insert:
        return "Insert";
    case ElementActionKind::Delete:
        return "Delete";
    case ElementActionKind::Move:
        return "Move";
    case ElementActionKind::Update:
        return "Update";
    case ElementActionKind::Modify:
        return "Modify";
    }
    return "?";
}

std::string describe(const ElementAction& a) {
    std::string out = std::string(to_string(a.kind)) + " " + std::string(to_string(a.element.kind)) + " ";
    switch (a.kind) {
    case ElementActionKind::Update:
        out += a.before_side().qualified_name + " -> " + a.new_name;
        break;
    case ElementActionKind::Move:
        out += a.element.name() + " from '" + a.from_container + "' (" + a.before_file + ") to '" + a.to_container +
               "' (" + a.after_file + ")";
        break;
    default:
        out += a.element.qualified_name;
        break;
    }
    return out + " [" + std::to_string(a.evidence.size()) + " node actions]";
}

NodeId assigned_name(const AstTree& tree, NodeId stmt) {
    const AstNode& n = tree[stmt];
    if (n.kind == NodeKind::Assign && n.children.size() == 2 && tree[n.children[0]].kind == NodeKind::Name)
        return n.children[0];
    if (n.kind == NodeKind::AnnAssign && n.children.size() == 3 && tree[n.children[0]].kind == NodeKind::Name)
        return n.children[0];
    return kNoNode;
}

namespace {

NodeId statement_of_target(const AstTree& tree, NodeId name) {
    NodeId p = tree[name].parent;
    while (p != kNoNode && !is_statement_kind(tree[p].kind))
        p = tree[p].parent;
    return p;
}

std::string module_name_for(const std::string& file) {
    SourceFile probe;
    probe.path = file;
    return probe.module_name();
}

} // namespace

TokenMultiset body_tokens(const AstTree& tree, NodeId node) {
    const AstNode& n = tree[node];
    if (node == tree.root())
        return node_tokens(tree, node);
    if (is_declaration_kind(n.kind)) {
        if (!n.children.empty() && tree[n.children.back()].kind == NodeKind::Block)
            return node_tokens(tree, n.children.back());
        return {};
    }
    if (n.kind == NodeKind::Name && is_assignment_target(tree, node)) {
        NodeId stmt = statement_of_target(tree, node);
        if (stmt != kNoNode)
            return body_tokens(tree, stmt);
    }
    if ((n.kind == NodeKind::Assign || n.kind == NodeKind::AnnAssign) && n.children.size() >= 2) {
        if (n.kind == NodeKind::AnnAssign && n.children.size() < 3)
            return {};
        return node_tokens(tree, n.children.back());
    }
    return node_tokens(tree, node);
}

CodeElement element_at(const AstTree& tree, NodeId node, const std::string& file) {
    CodeElement e;
    e.file = file;
    e.node = node;
    e.span = tree[node].span;
    const AstNode& n = tree[node];
    if (node == tree.root()) {
        e.kind = ElementKind::Module;
        e.qualified_name = module_name_for(file);
        e.signature.name = e.qualified_name;
        return e;
    }
    if (is_declaration_kind(n.kind)) {
        e.kind = n.kind == NodeKind::ClassDef ? ElementKind::Class : ElementKind::Method;
        e.qualified_name = qualified_name_of(tree, node);
        e.signature = element_signature(e, tree);
        return e;
    }
    NodeId name = node;
    if (n.kind != NodeKind::Name) {
        name = assigned_name(tree, node);
        if (name == kNoNode) {
            e.kind = ElementKind::Statement;
            std::string scope = enclosing_scope_name(tree, node);
            e.qualified_name = scope.empty() ? std::string(to_string(n.kind)) : scope + "." + std::string(to_string(n.kind));
            return e;
        }
    }
    e.kind = ElementKind::Variable;
    std::string scope = enclosing_scope_name(tree, name);
    e.qualified_name = scope.empty() ? tree[name].label : scope + "." + tree[name].label;
    e.signature.name = tree[name].label;
    e.node = name;
    return e;
}

namespace {

class Grouper {
public:
    Grouper(const AstTree& before, const AstTree& after, const NodeMapping& mapping)
        : before_(before), after_(after), mapping_(mapping) {}

    std::vector<ElementAction> run(const std::vector<EditAction>& script) {
        for (std::size_t i = 0; i < script.size(); ++i)
            dispatch(script[i], i);
        std::vector<std::pair<std::size_t, ElementAction*>> order;
        for (auto& [key, slot] : slots_)
            order.emplace_back(slot.first, &slot.action);
        std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        std::vector<ElementAction> out;
        for (auto& [first, action] : order)
            out.push_back(std::move(*action));
        return out;
    }

private:
    enum class SlotKind { Insert, Delete, Modify, Update, Move, Variable };
    struct Slot {
        std::size_t first = 0;
        ElementAction action;
    };

    bool mapped(bool after_side, NodeId n) const {
        return after_side ? mapping_.has_after(n) : mapping_.has_before(n);
    }

    // Innermost element node owning x: a declaration, an unmapped assignment
    // statement, or the root; unmapped owners climb to the outermost unmapped
    // declaration around them.
    NodeId owner(bool after_side, NodeId x) const {
        const AstTree& t = after_side ? after_ : before_;
        NodeId e = x;
        while (e != t.root()) {
            if (is_declaration_kind(t[e].kind))
                break;
            if (!mapped(after_side, e) && assigned_name(t, e) != kNoNode)
                break;
            e = t[e].parent;
        }
        while (e != t.root() && !mapped(after_side, e)) {
            NodeId p = enclosing_declaration(t, e);
            if (p == t.root() || mapped(after_side, p))
                break;
            e = p;
        }
        return e;
    }

    Slot& slot(SlotKind kind, NodeId key, std::size_t index, bool& fresh) {
        auto [it, inserted] = slots_.try_emplace(std::make_pair(kind, key));
        fresh = inserted;
        if (inserted)
            it->second.first = index;
        return it->second;
    }

    void fill_pair(ElementAction& ea, NodeId b, NodeId a) {
        ea.element = element_at(after_, a, after_.path());
        ea.before_element = element_at(before_, b, before_.path());
        ea.before_node = b;
        ea.after_node = a;
        ea.before_tokens = body_tokens(before_, b);
        ea.after_tokens = body_tokens(after_, a);
        ea.body_similarity = token_similarity(ea.before_tokens, ea.after_tokens);
        ea.before_file = before_.path();
        ea.after_file = after_.path();
    }

    void attribute(const EditAction& raw, std::size_t index, bool after_side, NodeId x) {
        NodeId e = owner(after_side, x);
        bool fresh = false;
        if (!mapped(after_side, e)) {
            const AstTree& t = after_side ? after_ : before_;
            Slot& s = slot(after_side ? SlotKind::Insert : SlotKind::Delete, e, index, fresh);
            if (fresh) {
                ElementAction& ea = s.action;
                ea.kind = after_side ? ElementActionKind::Insert : ElementActionKind::Delete;
                ea.element = element_at(t, e, t.path());
                (after_side ? ea.after_node : ea.before_node) = e;
                (after_side ? ea.after_tokens : ea.before_tokens) = body_tokens(t, e);
                (after_side ? ea.after_file : ea.before_file) = t.path();
            }
            s.action.evidence.push_back(raw);
            return;
        }
        NodeId b = after_side ? mapping_.before_of(e) : e;
        NodeId a = after_side ? e : mapping_.after_of(e);
        Slot& s = slot(SlotKind::Modify, b, index, fresh);
        if (fresh) {
            s.action.kind = ElementActionKind::Modify;
            fill_pair(s.action, b, a);
        }
        s.action.evidence.push_back(raw);
    }

    void dispatch(const EditAction& raw, std::size_t index) {
        bool fresh = false;
        switch (raw.kind) {
        case EditKind::Insert:
            attribute(raw, index, true, raw.after);
            return;
        case EditKind::Delete:
            attribute(raw, index, false, raw.before);
            return;
        case EditKind::Update: {
            NodeId b = raw.before, a = raw.after;
            if (is_declaration_kind(after_[a].kind)) {
                Slot& s = slot(SlotKind::Update, b, index, fresh);
                s.action.kind = ElementActionKind::Update;
                fill_pair(s.action, b, a);
                s.action.old_name = before_[b].label;
                s.action.new_name = after_[a].label;
                s.action.evidence.push_back(raw);
                return;
            }
            if (is_assignment_target(after_, a) && is_assignment_target(before_, b)) {
                Slot& s = slot(SlotKind::Variable, static_cast<NodeId>(index), index, fresh);
                s.action.kind = ElementActionKind::Update;
                fill_pair(s.action, b, a);
                s.action.old_name = before_[b].label;
                s.action.new_name = after_[a].label;
                s.action.evidence.push_back(raw);
                return;
            }
            attribute(raw, index, true, a);
            return;
        }
        case EditKind::Move: {
            NodeId b = raw.before, a = raw.after;
            if (is_declaration_kind(after_[a].kind)) {
                NodeId cb = enclosing_declaration(before_, b);
                NodeId ca = enclosing_declaration(after_, a);
                if (mapping_.after_of(cb) != ca) {
                    Slot& s = slot(SlotKind::Move, b, index, fresh);
                    s.action.kind = ElementActionKind::Move;
                    fill_pair(s.action, b, a);
                    s.action.from_container = qualified_name_of(before_, cb);
                    s.action.to_container = qualified_name_of(after_, ca);
                    s.action.evidence.push_back(raw);
                    return;
                }
            }
            attribute(raw, index, true, a);
            return;
        }
        }
    }

    const AstTree& before_;
    const AstTree& after_;
    const NodeMapping& mapping_;
    std::map<std::pair<SlotKind, NodeId>, Slot> slots_;
};

bool same_signature_shape(const ElementSignature& x, const ElementSignature& y) {
    return x.arity == y.arity && x.parameter_names == y.parameter_names && x.base_names == y.base_names;
}

bool is_declaration_element(const ElementAction& a) {
    return a.element.kind == ElementKind::Class || a.element.kind == ElementKind::Method;
}

} // namespace

std::vector<ElementAction> group_into_element_actions(const std::vector<EditAction>& script, const AstTree& before,
                                                      const AstTree& after, const NodeMapping& mapping) {
    if (script.empty())
        return {};
    return Grouper(before, after, mapping).run(script);
}

std::vector<ElementAction> refine_update_vs_replace(std::vector<ElementAction> actions, const RefineOptions& options) {
    // weak declaration updates become Delete + Insert; the Modify of the same
    // element (if any) supplies the Insert's evidence
    for (std::size_t i = 0; i < actions.size(); ++i) {
        ElementAction& u = actions[i];
        if (u.kind != ElementActionKind::Update || !is_declaration_element(u) ||
            u.body_similarity >= options.rename_body_floor)
            continue;
        for (std::size_t j = 0; j < actions.size(); ++j) {
            ElementAction& m = actions[j];
            if (j == i || m.kind != ElementActionKind::Modify || m.before_node != u.before_node ||
                m.after_node != u.after_node || m.before_file != u.before_file || m.after_file != u.after_file)
                continue;
            ElementAction del = u;
            del.kind = ElementActionKind::Delete;
            del.element = u.before_side();
            del.before_element.reset();
            del.after_node = kNoNode;
            del.after_tokens = {};
            del.after_file.clear();
            del.old_name.clear();
            del.new_name.clear();
            del.body_similarity = 0.0;
            ElementAction ins = std::move(m);
            ins.kind = ElementActionKind::Insert;
            ins.before_element.reset();
            ins.before_node = kNoNode;
            ins.before_tokens = {};
            ins.before_file.clear();
            ins.body_similarity = 0.0;
            u = std::move(del);
            actions[j] = std::move(ins);
            break;
        }
    }

    // look-alike Delete + Insert pairs fuse back; first delete wins, best insert by similarity
    std::vector<bool> gone(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const ElementAction& d = actions[i];
        if (gone[i] || d.kind != ElementActionKind::Delete || !is_declaration_element(d))
            continue;
        std::size_t best = actions.size();
        double best_sim = -1.0;
        for (std::size_t j = 0; j < actions.size(); ++j) {
            const ElementAction& ins = actions[j];
            if (gone[j] || ins.kind != ElementActionKind::Insert || ins.element.kind != d.element.kind)
                continue;
            if (!same_signature_shape(d.element.signature, ins.element.signature))
                continue;
            double sim = token_similarity(d.before_tokens, ins.after_tokens);
            if (sim >= options.rename_body_floor && sim > best_sim) {
                best_sim = sim;
                best = j;
            }
        }
        if (best == actions.size())
            continue;
        ElementAction& ins = actions[best];
        ElementAction fused = ins;
        fused.before_element = d.element;
        fused.before_node = d.before_node;
        fused.before_tokens = d.before_tokens;
        fused.before_file = d.before_file;
        fused.body_similarity = best_sim;
        bool same_container = d.element.container() == ins.element.container() && d.before_file == ins.after_file;
        if (!same_container) {
            fused.kind = ElementActionKind::Move;
            fused.from_container = d.element.container();
            fused.to_container = ins.element.container();
        } else if (d.element.name() != ins.element.name()) {
            fused.kind = ElementActionKind::Update;
            fused.old_name = d.element.name();
            fused.new_name = ins.element.name();
        } else {
            fused.kind = ElementActionKind::Modify;
        }
        fused.evidence = d.evidence;
        fused.evidence.insert(fused.evidence.end(), ins.evidence.begin(), ins.evidence.end());
        gone[i] = true;
        actions[best] = std::move(fused);
    }
    std::vector<ElementAction> out;
    for (std::size_t i = 0; i < actions.size(); ++i)
        if (!gone[i])
            out.push_back(std::move(actions[i]));
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_declarations_by_signature(
    const std::vector<ElementAction>& deletes, const std::vector<ElementAction>& inserts, const RefineOptions& options) {
    // (tier, -similarity, delete index, insert index); tier 0 = name and arity agree
    std::vector<std::tuple<int, double, std::size_t, std::size_t>> cands;
    for (std::size_t i = 0; i < deletes.size(); ++i) {
        const ElementAction& d = deletes[i];
        for (std::size_t j = 0; j < inserts.size(); ++j) {
            const ElementAction& ins = inserts[j];
            if (d.element.kind != ins.element.kind)
                continue;
            double sim = token_similarity(d.before_tokens, ins.after_tokens);
            int tier;
            if (d.element.name() == ins.element.name())
                tier = d.element.signature.arity == ins.element.signature.arity ? 0 : 1;
            else if (sim >= options.signature_pair_floor)
                tier = 2;
            else
                continue;
            cands.emplace_back(tier, -sim, i, j);
        }
    }
    std::sort(cands.begin(), cands.end());
    std::vector<bool> used_d(deletes.size()), used_i(inserts.size());
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (auto [tier, neg_sim, i, j] : cands) {
        if (used_d[i] || used_i[j])
            continue;
        used_d[i] = used_i[j] = true;
        out.emplace_back(i, j);
    }
    return out;
}

} // namespace actref
