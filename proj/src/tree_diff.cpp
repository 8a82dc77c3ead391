#include "actref/tree_diff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace actref {

std::uint64_t structural_hash(const AstTree& tree, NodeId id) { return tree.hash(id); }

NodeMapping::NodeMapping(std::size_t before_size, std::size_t after_size)
    : to_after_(before_size, kNoNode), to_before_(after_size, kNoNode) {}

bool NodeMapping::add(NodeId b, NodeId a) {
    if (b >= to_after_.size() || a >= to_before_.size())
        return false;
    if (to_after_[b] != kNoNode || to_before_[a] != kNoNode)
        return false;
    to_after_[b] = a;
    to_before_[a] = b;
    ++count_;
    return true;
}

NodeMapping NodeMapping::inverted() const {
    NodeMapping m;
    m.to_after_ = to_before_;
    m.to_before_ = to_after_;
    m.count_ = count_;
    return m;
}

std::vector<std::pair<NodeId, NodeId>> NodeMapping::pairs() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(count_);
    for (NodeId b = 0; b < to_after_.size(); ++b)
        if (to_after_[b] != kNoNode)
            out.emplace_back(b, to_after_[b]);
    return out;
}

double adaptive_threshold(std::size_t before_size, std::size_t after_size, std::optional<double> override_value) {
    if (override_value)
        return std::clamp(*override_value, 0.3, 0.6);
    return std::min(before_size, after_size) < 100 ? 0.4 : 0.5;
}

double dice_similarity(const AstTree& before, NodeId b, const AstTree& after, NodeId a, const NodeMapping& mapping) {
    std::uint32_t db = before.subtree_size(b) - 1;
    std::uint32_t da = after.subtree_size(a) - 1;
    if (db == 0 && da == 0)
        return before[b].label == after[a].label ? 1.0 : 0.0;
    std::uint32_t common = 0;
    for (NodeId x = b + 1; x < b + before.subtree_size(b); ++x) {
        NodeId y = mapping.after_of(x);
        if (y != kNoNode && after.is_descendant(y, a))
            ++common;
    }
    return 2.0 * common / static_cast<double>(db + da);
}

namespace {

/// Longest common subsequence of two index ranges; ties resolved towards
/// earlier elements of the first range.
template <typename Eq>
std::vector<std::pair<std::size_t, std::size_t>> lcs(std::size_t n, std::size_t m, Eq eq) {
    std::vector<std::uint32_t> dp((n + 1) * (m + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return dp[i * (m + 1) + j]; };
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = m; j-- > 0;)
            at(i, j) = eq(i, j) ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (eq(i, j) && at(i, j) == at(i + 1, j + 1) + 1) {
            out.emplace_back(i, j);
            ++i, ++j;
        } else if (at(i + 1, j) >= at(i, j + 1)) {
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

std::uint32_t distance(NodeId x, NodeId y) { return x > y ? x - y : y - x; }

class Matcher {
public:
    Matcher(const AstTree& before, const AstTree& after, const MatcherOptions& options)
        : b_(before), a_(after), opt_(options), m_(before.size(), after.size()) {
        index_declarations(b_, bq_, bq_set_);
        index_declarations(a_, aq_, aq_set_);
        for (NodeId a = 0; a < a_.size(); ++a)
            if (!aq_[a].empty())
                after_by_qname_[aq_[a]].push_back(a);
    }

    NodeMapping run() {
        if (b_.empty() || a_.empty())
            return std::move(m_);
        top_down();
        bottom_up();
        return std::move(m_);
    }

private:
    static void index_declarations(const AstTree& t, std::vector<std::string>& names,
                                   std::unordered_set<std::string>& set) {
        names.assign(t.size(), {});
        for (NodeId n = 0; n < t.size(); ++n) {
            if (is_declaration_kind(t[n].kind)) {
                names[n] = qualified_name_of(t, n);
                set.insert(names[n]);
            }
        }
    }

    // Differently named declarations pair up only when the old name is gone
    // and the new one did not exist before.
    bool compatible(NodeId b, NodeId a) const {
        const AstNode& x = b_[b];
        const AstNode& y = a_[a];
        if (x.kind != y.kind)
            return false;
        if (!opt_.signature_aware || !is_declaration_kind(x.kind) || x.label == y.label)
            return true;
        return !aq_set_.contains(bq_[b]) && !bq_set_.contains(aq_[a]);
    }

    void map_isomorphic(NodeId b, NodeId a) {
        for (std::uint32_t k = 0; k < b_.subtree_size(b); ++k)
            m_.add(b + k, a + k);
    }

    bool same_shape(NodeId b, NodeId a) const {
        if (b_.structure_hash(b) != a_.structure_hash(a) || b_.subtree_size(b) != a_.subtree_size(a))
            return false;
        for (std::uint32_t k = 0; k < b_.subtree_size(b); ++k) {
            if (b_[b + k].children.size() != a_[a + k].children.size() || !compatible(b + k, a + k))
                return false;
        }
        return true;
    }

    void top_down() {
        std::vector<NodeId> open_b{b_.root()}, open_a{a_.root()};
        auto max_height = [](const std::vector<NodeId>& open, const AstTree& t) {
            std::uint32_t h = 0;
            for (NodeId n : open)
                h = std::max(h, t.height(n));
            return h;
        };
        auto take = [](std::vector<NodeId>& open, const AstTree& t, std::uint32_t h) {
            std::vector<NodeId> out;
            std::vector<NodeId> rest;
            for (NodeId n : open)
                (t.height(n) == h ? out : rest).push_back(n);
            open = std::move(rest);
            std::sort(out.begin(), out.end());
            return out;
        };
        auto open_children = [](std::vector<NodeId>& open, const AstTree& t, const std::vector<NodeId>& nodes) {
            for (NodeId n : nodes)
                for (NodeId c : t[n].children)
                    open.push_back(c);
        };
        while (true) {
            std::uint32_t hb = max_height(open_b, b_);
            std::uint32_t ha = max_height(open_a, a_);
            if (std::min(hb, ha) < std::max<std::uint32_t>(opt_.min_height, 1))
                break;
            if (hb > ha) {
                open_children(open_b, b_, take(open_b, b_, hb));
                continue;
            }
            if (ha > hb) {
                open_children(open_a, a_, take(open_a, a_, ha));
                continue;
            }
            std::vector<NodeId> bs = take(open_b, b_, hb);
            std::vector<NodeId> as = take(open_a, a_, ha);
            std::map<std::uint64_t, std::pair<std::vector<NodeId>, std::vector<NodeId>>> groups;
            for (NodeId b : bs)
                groups[b_.hash(b)].first.push_back(b);
            for (NodeId a : as)
                groups[a_.hash(a)].second.push_back(a);
            std::vector<std::tuple<std::uint32_t, NodeId, NodeId>> ambiguous;
            for (auto& [h, group] : groups) {
                auto& [gb, ga] = group;
                // glued containers follow their owner, not their content
                if (gb.empty() || ga.empty() || glued(b_[gb[0]].kind))
                    continue;
                if (gb.size() == 1 && ga.size() == 1) {
                    if (isomorphic(b_, gb[0], a_, ga[0]))
                        map_isomorphic(gb[0], ga[0]);
                    continue;
                }
                for (NodeId b : gb)
                    for (NodeId a : ga)
                        if (isomorphic(b_, b, a_, a))
                            ambiguous.emplace_back(distance(b, a), a, b);
            }
            std::sort(ambiguous.begin(), ambiguous.end());
            for (auto [d, a, b] : ambiguous)
                if (!m_.has_before(b) && !m_.has_after(a))
                    map_isomorphic(b, a);
            std::vector<NodeId> rest_b, rest_a;
            for (NodeId b : bs)
                if (!m_.has_before(b))
                    rest_b.push_back(b);
            for (NodeId a : as)
                if (!m_.has_after(a))
                    rest_a.push_back(a);
            open_children(open_b, b_, rest_b);
            open_children(open_a, a_, rest_a);
        }
    }

    void bottom_up() {
        std::unordered_map<NodeId, std::uint32_t> common;
        for (NodeId b : b_.post_order()) {
            if (b == b_.root()) {
                if (!m_.has_before(b) && !m_.has_after(a_.root()) && b_[b].kind == a_[a_.root()].kind) {
                    m_.add(b, a_.root());
                    recover(b, a_.root());
                }
                continue;
            }
            if (m_.has_before(b) || b_[b].children.empty() || glued(b_[b].kind))
                continue;
            common.clear();
            for (NodeId x = b + 1; x < b + b_.subtree_size(b); ++x) {
                NodeId y = m_.after_of(x);
                if (y == kNoNode)
                    continue;
                for (NodeId p = a_[y].parent; p != kNoNode; p = a_[p].parent)
                    ++common[p];
            }
            const bool decl = opt_.signature_aware && is_declaration_kind(b_[b].kind);
            std::vector<NodeId> candidates;
            for (auto [a, count] : common)
                if (!m_.has_after(a) && compatible(b, a))
                    candidates.push_back(a);
            if (decl) {
                auto it = after_by_qname_.find(bq_[b]);
                if (it != after_by_qname_.end())
                    for (NodeId a : it->second)
                        if (!m_.has_after(a) && a_[a].kind == b_[b].kind && !common.contains(a))
                            candidates.push_back(a);
            }
            if (candidates.empty())
                continue;
            std::uint32_t db = b_.subtree_size(b) - 1;
            NodeId best = kNoNode;
            std::tuple<bool, double, std::int64_t, std::int64_t> best_rank{};
            for (NodeId a : candidates) {
                auto it = common.find(a);
                std::uint32_t c = it == common.end() ? 0 : it->second;
                double dice = 2.0 * c / static_cast<double>(db + a_.subtree_size(a) - 1);
                bool same_name = decl && aq_[a] == bq_[b];
                std::tuple<bool, double, std::int64_t, std::int64_t> rank{same_name, dice, -std::int64_t(distance(b, a)),
                                                                           -std::int64_t(a)};
                if (best == kNoNode || rank > best_rank) {
                    best = a;
                    best_rank = rank;
                }
            }
            double threshold = adaptive_threshold(b_.subtree_size(b), a_.subtree_size(best), opt_.threshold);
            if (std::get<0>(best_rank) || std::get<1>(best_rank) >= threshold) {
                m_.add(b, best);
                recover(b, best);
            }
        }
    }

    // Bodies and signatures belong to their owner: they are paired only when
    // the owner is, so a block never migrates to another class or function.
    static bool glued(NodeKind k) {
        return k == NodeKind::Block || k == NodeKind::OrElse || k == NodeKind::FinalBody || k == NodeKind::Arguments ||
               k == NodeKind::Bases || k == NodeKind::Returns;
    }

    // Pairs up the unmatched children of a matched container pair.
    void recover(NodeId b, NodeId a) {
        const auto& cb = b_[b].children;
        const auto& ca = a_[a].children;
        if (cb.empty() || ca.empty())
            return;
        auto free_pair = [&](std::size_t i, std::size_t j) { return !m_.has_before(cb[i]) && !m_.has_after(ca[j]); };

        for (auto [i, j] : lcs(cb.size(), ca.size(), [&](std::size_t i, std::size_t j) {
                 return free_pair(i, j) && b_.hash(cb[i]) == a_.hash(ca[j]) && isomorphic(b_, cb[i], a_, ca[j]);
             }))
            map_isomorphic(cb[i], ca[j]);

        for (auto [i, j] : lcs(cb.size(), ca.size(), [&](std::size_t i, std::size_t j) {
                 return free_pair(i, j) && same_shape(cb[i], ca[j]);
             }))
            map_isomorphic(cb[i], ca[j]);

        for (auto [i, j] : lcs(cb.size(), ca.size(), [&](std::size_t i, std::size_t j) {
                 return free_pair(i, j) && b_[cb[i]].kind == a_[ca[j]].kind && b_[cb[i]].label == a_[ca[j]].label &&
                        compatible(cb[i], ca[j]);
             })) {
            if (m_.add(cb[i], ca[j]))
                recover(cb[i], ca[j]);
        }

        // Kinds left with exactly one free child on each side.
        std::map<NodeKind, std::pair<std::vector<NodeId>, std::vector<NodeId>>> by_kind;
        for (NodeId x : cb)
            if (!m_.has_before(x))
                by_kind[b_[x].kind].first.push_back(x);
        for (NodeId y : ca)
            if (!m_.has_after(y))
                by_kind[a_[y].kind].second.push_back(y);
        for (auto& [kind, group] : by_kind) {
            if (group.first.size() == 1 && group.second.size() == 1 && compatible(group.first[0], group.second[0])) {
                if (m_.add(group.first[0], group.second[0]))
                    recover(group.first[0], group.second[0]);
            }
        }
    }

    const AstTree& b_;
    const AstTree& a_;
    MatcherOptions opt_;
    NodeMapping m_;
    std::vector<std::string> bq_, aq_;
    std::unordered_set<std::string> bq_set_, aq_set_;
    std::unordered_map<std::string, std::vector<NodeId>> after_by_qname_;
};

// Nodes whose whole subtree is unmapped on their own side.
std::vector<char> fully_unmapped(const AstTree& t, const std::function<bool(NodeId)>& mapped) {
    std::vector<char> full(t.size(), 0);
    for (NodeId n : t.post_order()) {
        bool f = !mapped(n);
        for (NodeId c : t[n].children)
            f = f && full[c];
        full[n] = f;
    }
    return full;
}

} // namespace

NodeMapping match_trees(const AstTree& before, const AstTree& after, const MatcherOptions& options) {
    return Matcher(before, after, options).run();
}

std::string_view to_string(EditKind kind) {
    switch (kind) {
    case EditKind::Insert:
        return "Insert";
    case EditKind::Delete:
        return "Delete";
    case EditKind::Move:
        return "Move";
    case EditKind::Update:
        return "Update";
    }
    return "?";
}

std::vector<EditAction> generate_actions(const AstTree& before, const AstTree& after, const NodeMapping& mapping) {
    for (auto [b, a] : mapping.pairs()) {
        if (!before.contains(b) || !after.contains(a))
            throw MappingMismatch("mapping references node ids absent from the trees");
        if (before[b].kind != after[a].kind)
            throw MappingMismatch("mapping pairs nodes of different kinds");
    }
    if (after.size() < mapping.after_size()) {
        for (NodeId a = static_cast<NodeId>(after.size()); a < mapping.after_size(); ++a)
            if (mapping.has_after(a))
                throw MappingMismatch("mapping references node ids absent from the trees");
    }

    std::vector<EditAction> updates, moves, inserts, deletes;
    const std::string& file = after.path().empty() ? before.path() : after.path();

    for (NodeId b = 0; b < before.size(); ++b) {
        NodeId a = mapping.after_of(b);
        if (a == kNoNode || before[b].label == after[a].label)
            continue;
        EditAction act;
        act.kind = EditKind::Update;
        act.node_kind = before[b].kind;
        act.before = b;
        act.after = a;
        act.old_label = before[b].label;
        act.new_label = after[a].label;
        act.file = file;
        updates.push_back(std::move(act));
    }

    // Mapped children that keep their parent and relative order stay put.
    std::vector<char> in_order(after.size(), 0);
    for (NodeId pa = 0; pa < after.size(); ++pa) {
        NodeId pb = mapping.before_of(pa);
        if (pb == kNoNode)
            continue;
        std::vector<NodeId> sb, sa;
        for (NodeId c : before[pb].children) {
            NodeId partner = mapping.after_of(c);
            if (partner != kNoNode && after[partner].parent == pa)
                sb.push_back(c);
        }
        for (NodeId c : after[pa].children) {
            NodeId partner = mapping.before_of(c);
            if (partner != kNoNode && before[partner].parent == pb)
                sa.push_back(c);
        }
        for (auto [i, j] : lcs(sb.size(), sa.size(),
                               [&](std::size_t i, std::size_t j) { return mapping.after_of(sb[i]) == sa[j]; }))
            in_order[sa[j]] = 1;
    }

    auto full_after = fully_unmapped(after, [&](NodeId a) { return mapping.has_after(a); });
    auto full_before = fully_unmapped(before, [&](NodeId b) { return mapping.has_before(b); });

    for (NodeId a = 0; a < after.size(); ++a) {
        const AstNode& n = after[a];
        NodeId b = mapping.before_of(a);
        if (b != kNoNode) {
            bool root_pair = n.parent == kNoNode && before[b].parent == kNoNode;
            if (root_pair || in_order[a])
                continue;
            EditAction act;
            act.kind = EditKind::Move;
            act.node_kind = n.kind;
            act.before = b;
            act.after = a;
            act.parent = n.parent;
            act.parent_before = n.parent == kNoNode ? kNoNode : mapping.before_of(n.parent);
            act.position = after.position(a);
            act.old_label = before[b].label;
            act.new_label = n.label;
            act.file = file;
            moves.push_back(std::move(act));
            continue;
        }
        if (n.parent != kNoNode && full_after[n.parent])
            continue; // covered by an ancestor's subtree insert
        EditAction act;
        act.kind = EditKind::Insert;
        act.node_kind = n.kind;
        act.after = a;
        act.parent = n.parent;
        act.parent_before = n.parent == kNoNode ? kNoNode : mapping.before_of(n.parent);
        act.position = after.position(a);
        act.subtree = full_after[a];
        act.new_label = n.label;
        act.file = file;
        act.payload = std::make_shared<const NodeBuilder>(act.subtree ? after.to_builder(a)
                                                                       : NodeBuilder(n.kind, n.label, n.span));
        inserts.push_back(std::move(act));
    }

    for (NodeId b = 0; b < before.size(); ++b) {
        const AstNode& n = before[b];
        if (mapping.has_before(b))
            continue;
        if (n.parent != kNoNode && full_before[n.parent])
            continue;
        EditAction act;
        act.kind = EditKind::Delete;
        act.node_kind = n.kind;
        act.before = b;
        act.subtree = full_before[b];
        act.old_label = n.label;
        act.file = file;
        deletes.push_back(std::move(act));
    }

    std::vector<EditAction> script;
    script.reserve(updates.size() + moves.size() + inserts.size() + deletes.size());
    for (auto* group : {&updates, &moves, &inserts, &deletes})
        for (auto& act : *group)
            script.push_back(std::move(act));
    return script;
}

AstTree apply_actions(const AstTree& before, const std::vector<EditAction>& script) {
    struct Work {
        NodeKind kind;
        std::string label;
        Span span;
        std::vector<std::size_t> children;
        std::size_t parent;
        bool alive = true;
    };
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<Work> w;
    w.reserve(before.size());
    for (const AstNode& n : before.nodes())
        w.push_back(Work{n.kind, n.label, n.span, {}, n.parent == kNoNode ? none : n.parent});
    for (const AstNode& n : before.nodes())
        for (NodeId c : n.children)
            w[n.id].children.push_back(c);

    auto check_before = [&](NodeId b) {
        if (b >= before.size())
            throw InvalidScript("action references a node that does not exist in the before tree");
    };
    auto detach = [&](std::size_t x) {
        std::size_t p = w[x].parent;
        if (p == none)
            return;
        auto& ch = w[p].children;
        ch.erase(std::remove(ch.begin(), ch.end(), x), ch.end());
        w[x].parent = none;
    };

    std::vector<char> moved(before.size(), 0), deleted(before.size(), 0);
    for (const EditAction& act : script) {
        if (act.kind == EditKind::Update) {
            check_before(act.before);
            if (w[act.before].label != act.old_label || w[act.before].kind != act.node_kind)
                throw InvalidScript("update does not match the node it targets");
            w[act.before].label = act.new_label;
        }
    }

    std::unordered_map<NodeId, std::size_t> inserted; // after id -> work node
    std::function<std::size_t(const NodeBuilder&, bool)> build = [&](const NodeBuilder& nb, bool deep) {
        std::size_t id = w.size();
        w.push_back(Work{nb.kind, nb.label, nb.span, {}, none});
        if (deep) {
            for (const NodeBuilder& c : nb.children) {
                std::size_t cid = build(c, true);
                w[cid].parent = id;
                w[id].children.push_back(cid);
            }
        }
        return id;
    };
    for (const EditAction& act : script) {
        if (act.kind != EditKind::Insert)
            continue;
        if (!act.payload || act.payload->kind != act.node_kind)
            throw InvalidScript("insert without a matching payload");
        if (inserted.contains(act.after))
            throw InvalidScript("duplicate insert");
        inserted[act.after] = build(*act.payload, act.subtree);
    }

    for (const EditAction& act : script) {
        if (act.kind != EditKind::Move)
            continue;
        check_before(act.before);
        if (moved[act.before])
            throw InvalidScript("node moved twice");
        moved[act.before] = 1;
        detach(act.before);
    }
    for (const EditAction& act : script) {
        if (act.kind != EditKind::Delete)
            continue;
        check_before(act.before);
        if (moved[act.before] || deleted[act.before])
            throw InvalidScript("deleted node is also moved or deleted twice");
        deleted[act.before] = 1;
        detach(act.before);
        w[act.before].alive = false;
    }

    struct Attach {
        std::size_t parent;
        std::uint32_t position;
        std::size_t node;
    };
    std::vector<Attach> attach;
    std::size_t new_root = none;
    for (const EditAction& act : script) {
        if (act.kind != EditKind::Insert && act.kind != EditKind::Move)
            continue;
        std::size_t node = act.kind == EditKind::Insert ? inserted.at(act.after) : act.before;
        std::size_t parent = none;
        if (act.parent_before != kNoNode) {
            check_before(act.parent_before);
            parent = act.parent_before;
        } else if (act.parent != kNoNode) {
            auto it = inserted.find(act.parent);
            if (it == inserted.end())
                throw InvalidScript("target parent is neither mapped nor inserted");
            parent = it->second;
        }
        if (parent == none) {
            if (new_root != none)
                throw InvalidScript("two new roots");
            new_root = node;
            continue;
        }
        if (!w[parent].alive)
            throw InvalidScript("target parent was deleted");
        attach.push_back(Attach{parent, act.position, node});
    }
    std::stable_sort(attach.begin(), attach.end(), [](const Attach& x, const Attach& y) {
        return std::tie(x.parent, x.position) < std::tie(y.parent, y.position);
    });
    for (const Attach& at : attach) {
        auto& ch = w[at.parent].children;
        if (at.position > ch.size())
            throw InvalidScript("insert position out of range");
        ch.insert(ch.begin() + at.position, at.node);
        w[at.node].parent = at.parent;
    }

    std::size_t root = new_root != none ? new_root : 0;
    if (root == 0 && (before.empty() || !w[0].alive))
        throw InvalidScript("script leaves no root");
    std::function<NodeBuilder(std::size_t)> to_builder = [&](std::size_t id) {
        NodeBuilder nb(w[id].kind, w[id].label, w[id].span);
        for (std::size_t c : w[id].children)
            nb.children.push_back(to_builder(c));
        return nb;
    };
    return AstTree(to_builder(root), before.path());
}

std::string describe(const EditAction& act, const AstTree& before, const AstTree& after) {
    auto where = [](const AstTree& t, NodeId id) {
        return t.contains(id) ? "@" + std::to_string(t[id].span.begin.line) : std::string();
    };
    std::string kind(to_string(act.node_kind));
    std::string out(to_string(act.kind));
    out += ' ';
    out += kind;
    switch (act.kind) {
    case EditKind::Update:
        out += " '" + act.old_label + "' -> '" + act.new_label + "'" + where(before, act.before);
        break;
    case EditKind::Delete:
        if (!act.old_label.empty())
            out += " '" + act.old_label + "'";
        out += where(before, act.before);
        if (act.subtree)
            out += " (subtree)";
        break;
    case EditKind::Insert:
    case EditKind::Move:
        if (!act.new_label.empty())
            out += " '" + act.new_label + "'";
        out += act.kind == EditKind::Move ? where(before, act.before) + " ->" : std::string();
        out += where(after, act.after);
        if (act.parent != kNoNode)
            out += " under " + std::string(to_string(after[act.parent].kind)) + where(after, act.parent) + "[" +
                   std::to_string(act.position) + "]";
        if (act.subtree)
            out += " (subtree)";
        break;
    }
    return out;
}

} // namespace actref
