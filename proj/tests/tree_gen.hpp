#pragma once

// Random Python-shaped syntax trees and the four mutation operators used by
// the edit-script soundness checks.

#include "actref/source_model.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace actref::testing {

class TreeGenerator {
public:
    explicit TreeGenerator(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    /// A module whose size lies in [min_nodes, max_nodes].
    NodeBuilder program(std::size_t min_nodes, std::size_t max_nodes) {
        while (true) {
            NodeBuilder root(NodeKind::ModuleRoot);
            std::size_t target = pick(min_nodes, max_nodes);
            while (root.size() < target)
                root.children.push_back(statement(0));
            std::size_t n = root.size();
            if (n >= min_nodes && n <= max_nodes)
                return root;
        }
    }

    NodeBuilder statement(int depth) {
        int choice = static_cast<int>(pick(0, depth >= 2 ? 3 : 7));
        switch (choice) {
        case 0: {
            NodeBuilder n(NodeKind::Assign);
            n.children.push_back(name());
            n.children.push_back(expression(0));
            return n;
        }
        case 1: {
            NodeBuilder n(NodeKind::Expr);
            n.children.push_back(call(0));
            return n;
        }
        case 2: {
            NodeBuilder n(NodeKind::Return);
            n.children.push_back(expression(0));
            return n;
        }
        case 3: {
            NodeBuilder n(NodeKind::AugAssign, "+=");
            n.children.push_back(name());
            n.children.push_back(constant());
            return n;
        }
        case 4: {
            NodeBuilder n(NodeKind::If);
            NodeBuilder test(NodeKind::Compare, pick_of({"<", "==", "is", ">="}));
            test.children.push_back(name());
            test.children.push_back(constant());
            n.children.push_back(std::move(test));
            n.children.push_back(block(depth + 1, 1, 3));
            if (pick(0, 2) == 0)
                n.children.push_back(block(depth + 1, 1, 2, NodeKind::OrElse));
            return n;
        }
        case 5: {
            NodeBuilder n(NodeKind::For);
            n.children.push_back(name());
            n.children.push_back(call(1));
            n.children.push_back(block(depth + 1, 1, 3));
            return n;
        }
        case 6:
            return function(depth);
        default: {
            NodeBuilder n(NodeKind::ClassDef, pick_of({"Alpha", "Beta", "Gamma", "Delta"}));
            NodeBuilder body(NodeKind::Block);
            std::size_t k = pick(1, 3);
            for (std::size_t i = 0; i < k; ++i)
                body.children.push_back(function(depth + 1));
            n.children.push_back(std::move(body));
            return n;
        }
        }
    }

    NodeBuilder expression(int depth) {
        int choice = static_cast<int>(pick(0, depth >= 2 ? 1 : 4));
        switch (choice) {
        case 0:
            return name();
        case 1:
            return constant();
        case 2: {
            NodeBuilder n(NodeKind::BinOp, pick_of({"+", "-", "*"}));
            n.children.push_back(expression(depth + 1));
            n.children.push_back(expression(depth + 1));
            return n;
        }
        case 3:
            return call(depth + 1);
        default: {
            NodeBuilder n(NodeKind::Attribute, pick_of({"shape", "value", "size"}));
            n.children.push_back(name());
            return n;
        }
        }
    }

    NodeBuilder name() { return NodeBuilder(NodeKind::Name, pick_of({"a", "b", "c", "x", "y", "self", "n", "img"})); }
    NodeBuilder constant() { return NodeBuilder(NodeKind::Constant, pick_of({"0", "1", "2", "'k'", "None"})); }

    NodeBuilder call(int depth) {
        NodeBuilder n(NodeKind::Call);
        n.children.push_back(NodeBuilder(NodeKind::Name, pick_of({"f", "g", "len", "print", "range"})));
        std::size_t k = pick(0, 2);
        for (std::size_t i = 0; i < k; ++i)
            n.children.push_back(expression(depth + 1));
        return n;
    }

    NodeBuilder function(int depth) {
        NodeBuilder n(NodeKind::FunctionDef, pick_of({"run", "step", "load", "save", "apply", "reset"}));
        NodeBuilder args(NodeKind::Arguments);
        std::size_t k = pick(0, 3);
        for (std::size_t i = 0; i < k; ++i)
            args.children.push_back(NodeBuilder(NodeKind::Arg, pick_of({"self", "a", "b", "img"})));
        n.children.push_back(std::move(args));
        n.children.push_back(block(depth + 1, 1, 4));
        return n;
    }

    NodeBuilder block(int depth, std::size_t lo, std::size_t hi, NodeKind kind = NodeKind::Block) {
        NodeBuilder b(kind);
        std::size_t k = pick(lo, hi);
        for (std::size_t i = 0; i < k; ++i)
            b.children.push_back(statement(depth));
        return b;
    }

    /// Applies `count` random mutations drawn from relabel, subtree insert,
    /// subtree delete and subtree move.
    NodeBuilder mutate(NodeBuilder root, int count) {
        for (int i = 0; i < count; ++i) {
            switch (pick(0, 3)) {
            case 0:
                relabel(root);
                break;
            case 1:
                insert(root);
                break;
            case 2:
                remove(root);
                break;
            default:
                move(root);
                break;
            }
        }
        return root;
    }

private:
    std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
    std::string pick_of(std::initializer_list<const char*> options) {
        std::vector<const char*> v(options);
        return v[pick(0, v.size() - 1)];
    }

    static void collect(NodeBuilder& n, const std::function<bool(const NodeBuilder&)>& pred,
                        std::vector<NodeBuilder*>& out) {
        if (pred(n))
            out.push_back(&n);
        for (auto& c : n.children)
            collect(c, pred, out);
    }
    static bool is_body(const NodeBuilder& n) {
        return n.kind == NodeKind::ModuleRoot || n.kind == NodeKind::Block || n.kind == NodeKind::OrElse;
    }

    void relabel(NodeBuilder& root) {
        std::vector<NodeBuilder*> nodes;
        collect(root, [](const NodeBuilder& n) { return !n.label.empty(); }, nodes);
        if (nodes.empty())
            return;
        NodeBuilder* n = nodes[pick(0, nodes.size() - 1)];
        n->label += "_" + std::to_string(pick(1, 9));
    }

    void insert(NodeBuilder& root) {
        std::vector<NodeBuilder*> bodies;
        collect(root, is_body, bodies);
        NodeBuilder* b = bodies[pick(0, bodies.size() - 1)];
        b->children.insert(b->children.begin() + pick(0, b->children.size()), statement(1));
    }

    void remove(NodeBuilder& root) {
        std::vector<NodeBuilder*> bodies;
        collect(root, [](const NodeBuilder& n) { return is_body(n) && n.children.size() >= 2; }, bodies);
        if (bodies.empty())
            return;
        NodeBuilder* b = bodies[pick(0, bodies.size() - 1)];
        b->children.erase(b->children.begin() + pick(0, b->children.size() - 1));
    }

    void move(NodeBuilder& root) {
        std::vector<NodeBuilder*> bodies;
        collect(root, [](const NodeBuilder& n) { return is_body(n) && n.children.size() >= 2; }, bodies);
        if (bodies.empty())
            return;
        NodeBuilder* src = bodies[pick(0, bodies.size() - 1)];
        std::size_t idx = pick(0, src->children.size() - 1);
        NodeBuilder moved = std::move(src->children[idx]);
        src->children.erase(src->children.begin() + idx);
        std::vector<NodeBuilder*> targets;
        collect(root, is_body, targets);
        NodeBuilder* dst = targets[pick(0, targets.size() - 1)];
        dst->children.insert(dst->children.begin() + pick(0, dst->children.size()), std::move(moved));
    }

    std::mt19937_64 rng_;
};

} // namespace actref::testing
