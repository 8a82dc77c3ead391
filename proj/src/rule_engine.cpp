#include "actref/rule_engine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace actref {

std::shared_ptr<FileDiff> diff_trees(std::shared_ptr<const AstTree> before, std::shared_ptr<const AstTree> after,
                                     const MatcherOptions& matcher) {
    auto d = std::make_shared<FileDiff>();
    d->before_path = before->path();
    d->after_path = after->path();
    d->mapping = match_trees(*before, *after, matcher);
    d->script = generate_actions(*before, *after, d->mapping);
    for (auto& e : d->script)
        e.file = e.kind == EditKind::Delete ? d->before_path : d->after_path;
    d->before = std::move(before);
    d->after = std::move(after);
    return d;
}

std::shared_ptr<const AstTree> empty_module(const std::string& path) {
    return std::make_shared<const AstTree>(NodeBuilder(NodeKind::ModuleRoot), path);
}

std::size_t RuleContext::add_file(std::shared_ptr<const FileDiff> diff) {
    files_.push_back(std::move(diff));
    return files_.size() - 1;
}

std::size_t RuleContext::add_action(std::size_t file, ElementAction action) {
    actions_.push_back(std::move(action));
    file_of_.push_back(file);
    consumed_.push_back(0);
    return actions_.size() - 1;
}

bool RuleContext::spend_candidate() {
    if (options_.max_candidate_pairs && candidates_ >= options_.max_candidate_pairs) {
        exhausted_ = true;
        return false;
    }
    ++candidates_;
    return true;
}

std::vector<std::size_t> RuleContext::remaining_declaration_actions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < actions_.size(); ++i) {
        const ElementAction& a = actions_[i];
        if (consumed_[i] || (a.kind != ElementActionKind::Insert && a.kind != ElementActionKind::Delete))
            continue;
        if (a.element.kind == ElementKind::Class || a.element.kind == ElementKind::Method)
            out.push_back(i);
    }
    return out;
}

std::string_view to_string(SubjectKind kind) {
    switch (kind) {
    case SubjectKind::Module:
        return "Module";
    case SubjectKind::Class:
        return "Class";
    case SubjectKind::Method:
        return "Method";
    case SubjectKind::Variable:
        return "Variable";
    case SubjectKind::Statement:
        return "Statement";
    case SubjectKind::Expression:
        return "Expression";
    }
    return "?";
}

SubjectKind classify_action_subject(const ElementAction& action) {
    switch (action.element.kind) {
    case ElementKind::Module:
        return SubjectKind::Module;
    case ElementKind::Class:
        return SubjectKind::Class;
    case ElementKind::Method:
        return SubjectKind::Method;
    case ElementKind::Variable:
        return SubjectKind::Variable;
    case ElementKind::Statement:
        return SubjectKind::Statement;
    }
    return SubjectKind::Statement;
}

SubjectKind classify_action_subject(const EditAction& action, const AstTree& before, const AstTree& after) {
    bool on_after = action.after != kNoNode;
    const AstTree& t = on_after ? after : before;
    NodeId n = on_after ? action.after : action.before;
    NodeKind k = t[n].kind;
    if (k == NodeKind::ModuleRoot)
        return SubjectKind::Module;
    if (k == NodeKind::ClassDef)
        return SubjectKind::Class;
    if (is_function_kind(k))
        return SubjectKind::Method;
    if (is_assignment_target(t, n) || assigned_name(t, n) != kNoNode)
        return SubjectKind::Variable;
    if (is_expression_kind(k))
        return SubjectKind::Expression;
    return SubjectKind::Statement;
}

namespace {

std::string qualify(const std::string& scope, const std::string& name) {
    return scope.empty() ? name : scope + "." + name;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(2);
    s << std::fixed << v;
    return s.str();
}

ElementLocator loc(const AstTree& t, NodeId n) { return locate(element_at(t, n, t.path())); }

/// Reading direction: forward finds extractions, backward the mirrored inlines.
struct Dir {
    bool fwd;

    const AstTree& new_tree(const FileDiff& f) const { return fwd ? *f.after : *f.before; }
    const AstTree& old_tree(const FileDiff& f) const { return fwd ? *f.before : *f.after; }
    NodeId old_of(const FileDiff& f, NodeId n) const { return fwd ? f.mapping.before_of(n) : f.mapping.after_of(n); }
    NodeId new_node(const ElementAction& a) const { return fwd ? a.after_node : a.before_node; }
    NodeId old_node(const ElementAction& a) const { return fwd ? a.before_node : a.after_node; }
    const TokenMultiset& new_tokens(const ElementAction& a) const { return fwd ? a.after_tokens : a.before_tokens; }
    const TokenMultiset& old_tokens(const ElementAction& a) const { return fwd ? a.before_tokens : a.after_tokens; }
    ElementActionKind created() const { return fwd ? ElementActionKind::Insert : ElementActionKind::Delete; }
    ElementActionKind removed() const { return fwd ? ElementActionKind::Delete : ElementActionKind::Insert; }
    NodeId raw_new(const EditAction& e) const { return fwd ? e.after : e.before; }
    NodeId raw_old(const EditAction& e) const { return fwd ? e.before : e.after; }
    const std::string& name_on_new(const ElementAction& a) const { return fwd ? a.new_name : a.old_name; }
    RefactoringType pick(RefactoringType extract, RefactoringType inline_) const { return fwd ? extract : inline_; }

    // Extract: old-side host -> new element. Inline: old element -> new-side host.
    void orient(RefactoringInstance& r, ElementLocator created, ElementLocator host) const {
        if (fwd) {
            r.before = std::move(host);
            r.after = std::move(created);
        } else {
            r.before = std::move(created);
            r.after = std::move(host);
        }
    }
};

/// Per-tree lookups shared by the rules of one run.
class TreeFacts {
public:
    const std::vector<NodeId>& scope_of(const AstTree& t) {
        auto [it, fresh] = scopes_.try_emplace(&t);
        if (fresh) {
            it->second.assign(t.size(), t.root());
            for (const AstNode& n : t.nodes()) {
                if (n.parent == kNoNode)
                    continue;
                NodeId p = n.parent;
                it->second[n.id] = is_declaration_kind(t[p].kind) ? p : it->second[p];
            }
        }
        return it->second;
    }

    const TokenMultiset& tokens(const AstTree& t, NodeId n) {
        auto [it, fresh] = tokens_.try_emplace(std::make_pair(&t, n));
        if (fresh)
            it->second = node_tokens(t, n);
        return it->second;
    }

    const TokenMultiset& body(const AstTree& t, NodeId n) {
        auto [it, fresh] = bodies_.try_emplace(std::make_pair(&t, n));
        if (fresh)
            it->second = body_tokens(t, n);
        return it->second;
    }

    // Statement tokens without nested bodies ("if x > 0:" keeps only its header).
    TokenMultiset header(const AstTree& t, NodeId stmt) {
        TokenMultiset all = tokens(t, stmt);
        for (NodeId c : t[stmt].children) {
            NodeKind k = t[c].kind;
            if (k == NodeKind::Block || k == NodeKind::OrElse || k == NodeKind::FinalBody || k == NodeKind::ExceptHandler)
                all = all.minus(tokens(t, c));
        }
        return all;
    }

    // Names and parameters visible directly in a scope (nested declarations excluded).
    const std::set<std::string>& names_in(const AstTree& t, NodeId scope) {
        auto [it, fresh] = names_.try_emplace(std::make_pair(&t, scope));
        if (fresh) {
            const auto& sc = scope_of(t);
            for (NodeId n = scope; n < scope + t.subtree_size(scope); ++n) {
                NodeKind k = t[n].kind;
                if ((k == NodeKind::Name || k == NodeKind::Arg || k == NodeKind::VarArg || k == NodeKind::KwArg) &&
                    sc[n] == scope)
                    it->second.insert(t[n].label);
            }
        }
        return it->second;
    }

private:
    std::unordered_map<const AstTree*, std::vector<NodeId>> scopes_;
    std::map<std::pair<const AstTree*, NodeId>, TokenMultiset> tokens_;
    std::map<std::pair<const AstTree*, NodeId>, TokenMultiset> bodies_;
    std::map<std::pair<const AstTree*, NodeId>, std::set<std::string>> names_;
};

std::size_t count_calls(const AstTree& t, NodeId root, const std::string& name) {
    std::size_t n = 0;
    for (NodeId x = root; x < root + t.subtree_size(root); ++x)
        if (t[x].kind == NodeKind::Call && callee_name(t, x) == name)
            ++n;
    return n;
}

bool is_declaration_action(const ElementAction& a) {
    return a.element.kind == ElementKind::Class || a.element.kind == ElementKind::Method;
}

void finish(RefactoringInstance& r, RuleContext& ctx, const std::vector<std::size_t>& used) {
    for (std::size_t i : used) {
        ctx.consume(i);
        r.evidence.push_back(ctx.action(i).id);
    }
    if (r.description.empty())
        r.description = default_description(r);
}

// ---------------------------------------------------------------- rename

// Value bound to an assignment target: the Assign/AnnAssign right-hand side.
NodeId bound_value(const AstTree& t, NodeId name) {
    NodeId p = t[name].parent;
    while (p != kNoNode && !is_statement_kind(t[p].kind))
        p = t[p].parent;
    if (p == kNoNode)
        return kNoNode;
    const AstNode& st = t[p];
    if (st.kind == NodeKind::Assign && st.children.size() >= 2)
        return st.children.back();
    if (st.kind == NodeKind::AnnAssign && st.children.size() == 3)
        return st.children[2];
    return kNoNode;
}

double binding_similarity(const FileDiff& f, NodeId before_name, NodeId after_name, TreeFacts& facts) {
    NodeId vb = bound_value(*f.before, before_name);
    NodeId va = bound_value(*f.after, after_name);
    if (vb == kNoNode || va == kNoNode)
        return 1.0;
    return token_similarity(facts.tokens(*f.before, vb), facts.tokens(*f.after, va));
}

std::vector<RefactoringInstance> rename_rules(RuleContext& ctx, TreeFacts& facts) {
    std::vector<RefactoringInstance> out;
    // declarations
    for (std::size_t i = 0; i < ctx.action_count(); ++i) {
        const ElementAction& a = ctx.action(i);
        if (ctx.consumed(i) || a.kind != ElementActionKind::Update || !is_declaration_action(a) ||
            a.old_name == a.new_name)
            continue;
        RefactoringInstance r;
        r.type = a.element.kind == ElementKind::Class ? RefactoringType::RenameClass : RefactoringType::RenameMethod;
        r.before = locate(a.before_side());
        r.after = locate(a.element);
        r.description = std::string(to_string(r.type)) + " " + a.before_side().qualified_name + " -> " +
                        a.element.qualified_name + " (body similarity " + fmt(a.body_similarity) + ")";
        finish(r, ctx, {i});
        out.push_back(std::move(r));
    }
    // variables: group target updates by (file, scope, old, new)
    std::map<std::tuple<std::size_t, NodeId, std::string, std::string>, std::vector<std::size_t>> groups;
    std::vector<std::tuple<std::size_t, NodeId, std::string, std::string>> order;
    for (std::size_t i = 0; i < ctx.action_count(); ++i) {
        const ElementAction& a = ctx.action(i);
        if (ctx.consumed(i) || a.kind != ElementActionKind::Update || a.element.kind != ElementKind::Variable)
            continue;
        const FileDiff& f = ctx.file(ctx.file_of(i));
        NodeId scope = facts.scope_of(*f.before)[a.before_node];
        auto key = std::make_tuple(ctx.file_of(i), scope, a.old_name, a.new_name);
        auto& g = groups[key];
        if (g.empty())
            order.push_back(key);
        g.push_back(i);
    }
    for (const auto& key : order) {
        const auto& members = groups[key];
        const auto& [file, scope_b, old_name, new_name] = key;
        const FileDiff& f = ctx.file(file);
        const ElementAction& first = ctx.action(members.front());
        NodeId scope_a = facts.scope_of(*f.after)[first.after_node];
        if (f.mapping.after_of(scope_b) != scope_a)
            continue;
        // the old name must be gone and the new one fresh
        if (facts.names_in(*f.after, scope_a).count(old_name) || facts.names_in(*f.before, scope_b).count(new_name))
            continue;
        if (members.size() < ctx.options().rename_use_min)
            continue;
        // a rebinding to an unrelated value is not a rename
        double rhs_sim = binding_similarity(f, first.before_node, first.after_node, facts);
        if (rhs_sim < ctx.options().refine.rename_body_floor)
            continue;
        RefactoringInstance r;
        r.type = RefactoringType::RenameVariable;
        r.before = locate(first.before_side());
        r.after = locate(first.element);
        r.description = "Rename Variable " + first.before_side().qualified_name + " -> " + first.element.qualified_name;
        finish(r, ctx, members);
        out.push_back(std::move(r));
    }
    return out;
}

// ------------------------------------------------------------------ move

std::vector<RefactoringInstance> move_rules(RuleContext& ctx, TreeFacts& facts, bool element_moves) {
    std::vector<RefactoringInstance> out;
    const double floor = ctx.options().move_floor;
    // rule 1: element moves across containers
    for (std::size_t i = 0; element_moves && i < ctx.action_count(); ++i) {
        const ElementAction& a = ctx.action(i);
        if (ctx.consumed(i) || a.kind != ElementActionKind::Move || !is_declaration_action(a))
            continue;
        const FileDiff& f = ctx.file(ctx.file_of(i));
        NodeId cb = facts.scope_of(*f.before)[a.before_node];
        NodeId ca = facts.scope_of(*f.after)[a.after_node];
        bool cb_class = cb != f.before->root() && (*f.before)[cb].kind == NodeKind::ClassDef;
        bool ca_class = ca != f.after->root() && (*f.after)[ca].kind == NodeKind::ClassDef;
        // reserved for Extract Class / Inline Class
        if (cb_class && ca_class && f.mapping.has_before(cb) != f.mapping.has_after(ca))
            continue;
        RefactoringInstance r;
        r.type = a.element.kind == ElementKind::Class ? RefactoringType::MoveClass : RefactoringType::MoveMethod;
        r.before = locate(a.before_side());
        r.after = locate(a.element);
        r.description = std::string(to_string(r.type)) + " " + a.element.name() + " from '" + a.from_container +
                        "' to '" + a.to_container + "'";
        finish(r, ctx, {i});
        out.push_back(std::move(r));
    }

    // rule 2: similar Delete/Insert pairs in different containers
    std::vector<std::size_t> dels, inss;
    for (std::size_t i = 0; i < ctx.action_count(); ++i) {
        const ElementAction& a = ctx.action(i);
        if (ctx.consumed(i) || !is_declaration_action(a))
            continue;
        if (a.kind == ElementActionKind::Delete)
            dels.push_back(i);
        else if (a.kind == ElementActionKind::Insert)
            inss.push_back(i);
    }
    if (dels.empty() || inss.empty())
        return out;
    std::vector<ElementAction> dv, iv;
    for (std::size_t i : dels)
        dv.push_back(ctx.action(i));
    for (std::size_t i : inss)
        iv.push_back(ctx.action(i));
    std::vector<std::pair<std::size_t, std::size_t>> order = pair_declarations_by_signature(dv, iv, ctx.options().refine);
    std::set<std::pair<std::size_t, std::size_t>> seen(order.begin(), order.end());
    std::vector<std::tuple<double, std::size_t, std::size_t>> rest;
    for (std::size_t x = 0; x < dv.size(); ++x)
        for (std::size_t y = 0; y < iv.size(); ++y)
            if (!seen.count({x, y}) && dv[x].element.kind == iv[y].element.kind)
                rest.emplace_back(-token_similarity(dv[x].before_tokens, iv[y].after_tokens), x, y);
    std::sort(rest.begin(), rest.end());
    for (auto [neg, x, y] : rest)
        order.emplace_back(x, y);

    for (auto [x, y] : order) {
        std::size_t di = dels[x], ii = inss[y];
        if (ctx.consumed(di) || ctx.consumed(ii))
            continue;
        if (!ctx.spend_candidate())
            break;
        const ElementAction& d = ctx.action(di);
        const ElementAction& ins = ctx.action(ii);
        if (d.element.kind != ins.element.kind)
            continue;
        bool same_container = d.element.file == ins.element.file && d.element.container() == ins.element.container();
        if (same_container)
            continue;
        const FileDiff& fd = ctx.file(ctx.file_of(di));
        const FileDiff& fi = ctx.file(ctx.file_of(ii));
        double sim = token_similarity(d.before_tokens, ins.after_tokens);
        if (sim < floor)
            continue;
        // re-diff the two declarations on their own
        NodeBuilder sb(NodeKind::ModuleRoot), sa(NodeKind::ModuleRoot);
        sb.children.push_back(fd.before->to_builder(d.before_node));
        sa.children.push_back(fi.after->to_builder(ins.after_node));
        AstTree tb(sb, d.element.file), ta(sa, ins.element.file);
        NodeMapping m = match_trees(tb, ta);
        std::size_t edits = generate_actions(tb, ta, m).size();

        RefactoringInstance r;
        r.type = d.element.kind == ElementKind::Class ? RefactoringType::MoveClass : RefactoringType::MoveMethod;
        r.before = locate(d.element);
        r.after = locate(ins.element);
        r.description = std::string(to_string(r.type)) + " " + d.element.qualified_name + " (" + d.element.file +
                        ") -> " + ins.element.qualified_name + " (" + ins.element.file + "), similarity " + fmt(sim) +
                        ", " + std::to_string(edits) + " residual edits";
        finish(r, ctx, {di, ii});
        out.push_back(std::move(r));
    }
    return out;
}

// ------------------------------------------------------- extract / inline

struct Host {
    std::size_t file;
    NodeId new_node;
    NodeId old_node;
};

std::vector<Host> function_hosts(const RuleContext& ctx, const Dir& dir) {
    std::vector<Host> hosts;
    for (std::size_t fi = 0; fi < ctx.file_count(); ++fi) {
        const FileDiff& f = ctx.file(fi);
        const AstTree& t = dir.new_tree(f);
        for (const AstNode& n : t.nodes()) {
            if (!is_function_kind(n.kind))
                continue;
            NodeId o = dir.old_of(f, n.id);
            if (o != kNoNode)
                hosts.push_back(Host{fi, n.id, o});
        }
    }
    return hosts;
}

std::vector<RefactoringInstance> method_rule(RuleContext& ctx, TreeFacts& facts, const Dir& dir) {
    std::vector<RefactoringInstance> out;
    const double floor = ctx.options().extract_floor;
    std::vector<Host> hosts = function_hosts(ctx, dir);
    for (std::size_t i = 0; i < ctx.action_count(); ++i) {
        const ElementAction& a = ctx.action(i);
        if (ctx.consumed(i) || a.kind != dir.created() || a.element.kind != ElementKind::Method)
            continue;
        const std::size_t fi = ctx.file_of(i);
        const FileDiff& f = ctx.file(fi);
        const AstTree& nt = dir.new_tree(f);
        const NodeId node = dir.new_node(a);
        const std::string name = a.element.name();
        const TokenMultiset& body = dir.new_tokens(a);

        // hosts of the same file first
        std::vector<const Host*> order;
        for (const Host& h : hosts)
            if (h.file == fi)
                order.push_back(&h);
        for (const Host& h : hosts)
            if (h.file != fi)
                order.push_back(&h);

        const Host* best = nullptr;
        double best_sim = -1.0;
        std::size_t best_moved = 0;
        for (const Host* h : order) {
            const FileDiff& hf = ctx.file(h->file);
            const AstTree& hn = dir.new_tree(hf);
            const AstTree& ho = dir.old_tree(hf);
            if (h->file == fi && (nt.in_subtree(h->new_node, node) || nt.in_subtree(node, h->new_node)))
                continue;
            if (h->file != fi && !ctx.spend_candidate())
                break;
            if (count_calls(hn, h->new_node, name) <= count_calls(ho, h->old_node, name))
                continue;
            TokenMultiset removed = facts.body(ho, h->old_node).minus(facts.body(hn, h->new_node));
            double sim = token_similarity(body, removed);
            std::size_t moved = 0;
            if (h->file == fi)
                for (const EditAction& e : f.script)
                    if (e.kind == EditKind::Move && nt.in_subtree(dir.raw_new(e), node) &&
                        ho.in_subtree(dir.raw_old(e), h->old_node))
                        ++moved;
            if (sim < floor && moved == 0)
                continue;
            if (sim > best_sim || (sim == best_sim && moved > best_moved)) {
                best = h;
                best_sim = sim;
                best_moved = moved;
            }
        }
        if (!best)
            continue;
        const FileDiff& hf = ctx.file(best->file);
        RefactoringInstance r;
        r.type = dir.pick(RefactoringType::ExtractMethod, RefactoringType::InlineMethod);
        ElementLocator host_loc = loc(dir.old_tree(hf), best->old_node);
        dir.orient(r, locate(a.element), host_loc);
        std::string host_name = host_loc.qualified_name;
        r.description = dir.fwd ? "Extract Method " + a.element.qualified_name + " from " + host_name
                                : "Inline Method " + a.element.qualified_name + " into " + host_name;
        r.description += " (similarity " + fmt(best_sim) + ", " + std::to_string(best_moved) + " moved nodes)";
        finish(r, ctx, {i});
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RefactoringInstance> class_rule(RuleContext& ctx, TreeFacts& facts, const Dir& dir) {
    std::vector<RefactoringInstance> out;
    const double floor = ctx.options().extract_floor;
    for (std::size_t k = 0; k < ctx.action_count(); ++k) {
        const ElementAction& cls = ctx.action(k);
        if (ctx.consumed(k) || cls.kind != dir.created() || cls.element.kind != ElementKind::Class)
            continue;
        const std::size_t fk = ctx.file_of(k);
        const FileDiff& f = ctx.file(fk);
        const AstTree& nt = dir.new_tree(f);
        const NodeId knode = dir.new_node(cls);

        // (file, old-side source class) -> contributing actions
        std::map<std::pair<std::size_t, NodeId>, std::vector<std::size_t>> sources;
        std::vector<std::pair<std::size_t, NodeId>> source_order;
        auto vote = [&](std::size_t file, NodeId source, std::size_t action) {
            const FileDiff& sf = ctx.file(file);
            const AstTree& ot = dir.old_tree(sf);
            if (source == ot.root() || ot[source].kind != NodeKind::ClassDef)
                return;
            NodeId survivor = dir.fwd ? sf.mapping.after_of(source) : sf.mapping.before_of(source);
            if (survivor == kNoNode)
                return;
            auto key = std::make_pair(file, source);
            auto& v = sources[key];
            if (v.empty())
                source_order.push_back(key);
            v.push_back(action);
        };

        // rule 2: declarations moved into the new class
        for (std::size_t m = 0; m < ctx.action_count(); ++m) {
            const ElementAction& mv = ctx.action(m);
            if (ctx.consumed(m) || ctx.file_of(m) != fk || mv.kind != ElementActionKind::Move || !is_declaration_action(mv))
                continue;
            if (!nt.is_descendant(dir.new_node(mv), knode))
                continue;
            const AstTree& ot = dir.old_tree(f);
            vote(fk, facts.scope_of(ot)[dir.old_node(mv)], m);
        }
        // rule 1: removed methods resembling a member of the new class
        std::vector<NodeId> members;
        for (NodeId n = knode + 1; n < knode + nt.subtree_size(knode); ++n)
            if (is_function_kind(nt[n].kind) && facts.scope_of(nt)[n] == knode)
                members.push_back(n);
        std::set<NodeId> matched_members;
        for (std::size_t d = 0; d < ctx.action_count(); ++d) {
            const ElementAction& del = ctx.action(d);
            if (ctx.consumed(d) || del.kind != dir.removed() || del.element.kind != ElementKind::Method)
                continue;
            const std::size_t fd = ctx.file_of(d);
            if (fd != fk && !ctx.spend_candidate())
                break;
            for (NodeId mnode : members) {
                if (matched_members.count(mnode))
                    continue;
                if (token_similarity(dir.old_tokens(del), facts.body(nt, mnode)) >= floor) {
                    matched_members.insert(mnode);
                    const AstTree& ot = dir.old_tree(ctx.file(fd));
                    vote(fd, facts.scope_of(ot)[dir.old_node(del)], d);
                    break;
                }
            }
        }
        if (source_order.empty())
            continue;
        auto best = source_order.front();
        for (const auto& key : source_order)
            if (sources[key].size() > sources[best].size())
                best = key;
        const FileDiff& sf = ctx.file(best.first);
        RefactoringInstance r;
        r.type = dir.pick(RefactoringType::ExtractClass, RefactoringType::InlineClass);
        ElementLocator host = loc(dir.old_tree(sf), best.second);
        dir.orient(r, locate(cls.element), host);
        r.description = dir.fwd ? "Extract Class " + cls.element.qualified_name + " from " + host.qualified_name
                                : "Inline Class " + cls.element.qualified_name + " into " + host.qualified_name;
        r.description += " (" + std::to_string(sources[best].size()) + " members)";
        std::vector<std::size_t> used{k};
        used.insert(used.end(), sources[best].begin(), sources[best].end());
        finish(r, ctx, used);
        out.push_back(std::move(r));
    }
    return out;
}

// Statements directly in a scope, innermost first for a given name use.
NodeId statement_around(const AstTree& t, NodeId n) {
    while (n != kNoNode && !is_statement_kind(t[n].kind))
        n = t[n].parent;
    return n;
}

bool inside_body(const AstTree& t, NodeId n, NodeId stmt) {
    for (NodeId p = t[n].parent; p != kNoNode && p != stmt; p = t[p].parent) {
        NodeKind k = t[p].kind;
        if (k == NodeKind::Block || k == NodeKind::OrElse || k == NodeKind::FinalBody || k == NodeKind::ExceptHandler)
            return true;
    }
    return false;
}

std::vector<RefactoringInstance> variable_rule(RuleContext& ctx, TreeFacts& facts, const Dir& dir) {
    std::vector<RefactoringInstance> out;
    const double floor = ctx.options().extract_floor;
    for (std::size_t fi = 0; fi < ctx.file_count(); ++fi) {
        const FileDiff& f = ctx.file(fi);
        const AstTree& nt = dir.new_tree(f);
        const AstTree& ot = dir.old_tree(f);
        const auto& nscope = facts.scope_of(nt);
        const auto& oscope = facts.scope_of(ot);
        for (const AstNode& hn : nt.nodes()) {
            if (hn.id != nt.root() && !is_declaration_kind(hn.kind))
                continue;
            NodeId H = hn.id;
            NodeId Ho = dir.old_of(f, H);
            if (Ho == kNoNode)
                continue;
            const std::set<std::string>& old_names = facts.names_in(ot, Ho);
            std::string scope_q_new = qualified_name_of(nt, H);

            // new names bound exactly once, by a simple assignment
            std::map<std::string, std::vector<NodeId>> binders;
            for (NodeId n = H; n < H + nt.subtree_size(H); ++n)
                if (nscope[n] == H && is_assignment_target(nt, n))
                    binders[nt[n].label].push_back(n);
            for (const auto& [t, nodes] : binders) {
                if (nodes.size() != 1 || old_names.count(t))
                    continue;
                NodeId stmt = statement_around(nt, nodes[0]);
                if (stmt == kNoNode || assigned_name(nt, stmt) != nodes[0])
                    continue;
                NodeId rhs = nt[stmt].children.back();
                if (nt[rhs].kind == NodeKind::Name)
                    continue;
                // a rename already explains the name
                bool renamed = false;
                for (std::size_t i = 0; i < ctx.action_count(); ++i) {
                    const ElementAction& a = ctx.action(i);
                    if (ctx.consumed(i) && ctx.file_of(i) == fi && a.kind == ElementActionKind::Update &&
                        a.element.kind == ElementKind::Variable && dir.name_on_new(a) == t)
                        renamed = true;
                }
                if (renamed)
                    continue;
                const TokenMultiset& rhs_tokens = facts.tokens(nt, rhs);
                const std::uint64_t rhs_hash = nt.hash(rhs);

                // uses of t in the scope, by statement
                std::vector<NodeId> uses;
                for (NodeId n = H; n < H + nt.subtree_size(H); ++n)
                    if (nscope[n] == H && nt[n].kind == NodeKind::Name && nt[n].label == t && n != nodes[0]) {
                        NodeId u = statement_around(nt, n);
                        if (u != kNoNode && u != stmt && !inside_body(nt, n, u) &&
                            std::find(uses.begin(), uses.end(), u) == uses.end())
                            uses.push_back(u);
                    }
                if (uses.empty())
                    continue;

                double best = -1.0;
                NodeId best_use = kNoNode;
                for (NodeId u : uses) {
                    TokenMultiset u_tokens = facts.header(nt, u);
                    for (NodeId uo = Ho; uo < Ho + ot.subtree_size(Ho); ++uo) {
                        if (oscope[uo] != Ho || !is_statement_kind(ot[uo].kind) || is_declaration_kind(ot[uo].kind))
                            continue;
                        TokenMultiset uo_tokens = facts.header(ot, uo);
                        for (NodeId e = uo + 1; e < uo + ot.subtree_size(uo); ++e) {
                            if (!is_expression_kind(ot[e].kind) || is_assignment_target(ot, e) || inside_body(ot, e, uo))
                                continue;
                            bool leaf = ot[e].children.empty() || nt[rhs].children.empty();
                            if (leaf && ot.hash(e) != rhs_hash)
                                continue;
                            const TokenMultiset& et = facts.tokens(ot, e);
                            double esim = token_similarity(et, rhs_tokens);
                            if (esim < floor)
                                continue;
                            // the expression must have left the scope at least once
                            std::size_t before_count = 0, after_count = 0;
                            for (NodeId x = Ho; x < Ho + ot.subtree_size(Ho); ++x)
                                before_count += oscope[x] == Ho && ot.hash(x) == ot.hash(e) && isomorphic(ot, x, ot, e);
                            for (NodeId x = H; x < H + nt.subtree_size(H); ++x)
                                after_count += nscope[x] == H && !nt.in_subtree(x, rhs) && nt.hash(x) == ot.hash(e) &&
                                               isomorphic(nt, x, ot, e);
                            if (before_count <= after_count)
                                continue;
                            TokenMultiset predicted = uo_tokens.minus(et);
                            predicted.add(t);
                            double usim = token_similarity(predicted, u_tokens);
                            if (usim < floor)
                                continue;
                            if (esim + usim > best) {
                                best = esim + usim;
                                best_use = u;
                            }
                        }
                    }
                }
                if (best_use == kNoNode)
                    continue;

                // variable-level actions about t in this scope become the evidence
                std::vector<std::size_t> used;
                std::string var_q = qualify(scope_q_new, t);
                for (std::size_t i = 0; i < ctx.action_count(); ++i) {
                    const ElementAction& a = ctx.action(i);
                    if (ctx.consumed(i) || ctx.file_of(i) != fi || a.element.kind != ElementKind::Variable)
                        continue;
                    bool about_t = false;
                    if (a.kind == dir.created())
                        about_t = a.element.qualified_name == var_q || dir.new_node(a) == best_use;
                    else if (a.kind == ElementActionKind::Update)
                        about_t = dir.name_on_new(a) == t &&
                                  (dir.fwd ? a.element.qualified_name : a.before_side().qualified_name) == var_q;
                    if (about_t)
                        used.push_back(i);
                }
                RefactoringInstance r;
                r.type = dir.pick(RefactoringType::ExtractVariable, RefactoringType::InlineVariable);
                ElementLocator var = loc(nt, nodes[0]);
                ElementLocator host = loc(ot, Ho);
                dir.orient(r, var, host);
                r.description = dir.fwd ? "Extract Variable " + var.qualified_name + " in " + host.qualified_name
                                        : "Inline Variable " + var.qualified_name + " in " + host.qualified_name;
                finish(r, ctx, used);
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

std::vector<RefactoringInstance> directed_rules(RuleContext& ctx, TreeFacts& facts, const Dir& dir, bool variables) {
    std::vector<RefactoringInstance> out = class_rule(ctx, facts, dir);
    auto methods = method_rule(ctx, facts, dir);
    out.insert(out.end(), methods.begin(), methods.end());
    if (variables) {
        auto vars = variable_rule(ctx, facts, dir);
        out.insert(out.end(), vars.begin(), vars.end());
    }
    return out;
}

} // namespace

std::vector<RefactoringInstance> match_rename_rules(RuleContext& context) {
    TreeFacts facts;
    return rename_rules(context, facts);
}

std::vector<RefactoringInstance> match_move_rules(RuleContext& context) {
    TreeFacts facts;
    return move_rules(context, facts, true);
}

std::vector<RefactoringInstance> match_extract_rules(RuleContext& context) {
    TreeFacts facts;
    return directed_rules(context, facts, Dir{true}, true);
}

std::vector<RefactoringInstance> match_inline_rules(RuleContext& context) {
    TreeFacts facts;
    return directed_rules(context, facts, Dir{false}, true);
}

std::vector<RefactoringInstance> apply_rules(RuleContext& context, RuleStage stage) {
    TreeFacts facts;
    const bool intra = stage == RuleStage::IntraFile;
    std::vector<RefactoringInstance> out;
    auto append = [&](std::vector<RefactoringInstance> v) {
        for (auto& r : v)
            out.push_back(std::move(r));
    };
    if (intra)
        append(rename_rules(context, facts));
    append(move_rules(context, facts, intra));
    append(directed_rules(context, facts, Dir{true}, intra));
    append(directed_rules(context, facts, Dir{false}, intra));
    return out;
}

} // namespace actref
