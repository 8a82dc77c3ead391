#include "actref/pipeline.hpp"

#include <chrono>
#include <future>

namespace actref {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::shared_ptr<const AstTree> parse_shared(const SourceFile& f) {
    return std::make_shared<const AstTree>(parse_module(f));
}

std::vector<ElementAction> element_actions(const FileDiff& d, const PipelineOptions& options, std::size_t first_id) {
    auto actions = refine_update_vs_replace(group_into_element_actions(d.script, *d.before, *d.after, d.mapping),
                                            options.rules.refine);
    for (auto& a : actions)
        a.id = first_id++;
    return actions;
}

void keep_types(std::vector<RefactoringInstance>& v, const std::set<RefactoringType>& types) {
    if (types.empty())
        return;
    std::erase_if(v, [&](const RefactoringInstance& r) { return !types.count(r.type); });
}

void shift_ids(IntraFileResult& r, std::size_t offset) {
    for (auto& a : r.remaining)
        a.id += offset;
    for (auto& i : r.instances)
        for (auto& e : i.evidence)
            e += offset;
}

} // namespace

IntraFileResult detect_intra_file(const SourceFile& before, const SourceFile& after, const PipelineOptions& options,
                                  std::size_t first_id) {
    IntraFileResult out;
    std::shared_ptr<const AstTree> tb, ta;
    try {
        tb = parse_shared(before);
    } catch (const SyntaxError& e) {
        out.diagnostics.push_back({before.path, e.what()});
    }
    try {
        ta = parse_shared(after);
    } catch (const SyntaxError& e) {
        out.diagnostics.push_back({after.path, e.what()});
    }
    if (!tb || !ta)
        return out;

    auto diff = diff_trees(tb, ta, options.matcher);
    auto actions = element_actions(*diff, options, first_id);
    out.action_count = actions.size();

    RuleOptions rules = options.rules;
    rules.max_candidate_pairs = 0;
    RuleContext ctx(rules);
    std::size_t fi = ctx.add_file(diff);
    for (auto& a : actions)
        ctx.add_action(fi, std::move(a));
    out.instances = apply_rules(ctx, RuleStage::IntraFile);
    for (std::size_t i = 0; i < ctx.action_count(); ++i) {
        const ElementAction& a = ctx.action(i);
        if (!ctx.consumed(i) && (a.kind == ElementActionKind::Insert || a.kind == ElementActionKind::Delete))
            out.remaining.push_back(a);
    }
    out.diff = std::move(diff);
    return out;
}

CrossFileResult detect_cross_file(const std::vector<SourceFile>& unpaired_deleted,
                                  const std::vector<SourceFile>& unpaired_inserted,
                                  const std::vector<IntraFileResult>& remaining, const PipelineOptions& options,
                                  std::size_t first_id) {
    CrossFileResult out;
    RuleOptions rules = options.rules;
    rules.max_candidate_pairs = options.max_cross_candidates;
    RuleContext ctx(rules);

    std::size_t next_id = first_id;
    auto add_whole = [&](const SourceFile& f, bool deleted) {
        std::shared_ptr<const AstTree> tree;
        try {
            tree = parse_shared(f);
        } catch (const SyntaxError& e) {
            out.diagnostics.push_back({f.path, e.what()});
            return;
        }
        auto empty = empty_module(f.path);
        auto diff = deleted ? diff_trees(tree, empty, options.matcher) : diff_trees(empty, tree, options.matcher);
        auto actions = element_actions(*diff, options, next_id);
        next_id += actions.size();
        out.action_count += actions.size();
        std::size_t fi = ctx.add_file(diff);
        for (auto& a : actions)
            ctx.add_action(fi, std::move(a));
    };
    for (const auto& f : unpaired_deleted)
        add_whole(f, true);
    for (const auto& f : unpaired_inserted)
        add_whole(f, false);
    // paired files join even without leftovers: their functions can host extractions
    for (const auto& r : remaining) {
        if (!r.diff)
            continue;
        std::size_t fi = ctx.add_file(r.diff);
        for (const auto& a : r.remaining)
            ctx.add_action(fi, a);
    }
    if (ctx.action_count() == 0)
        return out;
    out.instances = apply_rules(ctx, RuleStage::CrossFile);
    out.candidates_examined = ctx.candidates_examined();
    out.budget_exhausted = ctx.budget_exhausted();
    if (out.budget_exhausted)
        out.diagnostics.push_back({"", "cross-file candidate budget exhausted after " +
                                           std::to_string(out.candidates_examined) + " pairs"});
    return out;
}

std::vector<RefactoringInstance> CommitAnalysis::results() const {
    std::vector<RefactoringInstance> out;
    for (const auto* part : {&module, &intra, &cross})
        for (const auto& r : *part) {
            bool dup = false;
            for (const auto& o : out)
                if (o.same_subject(r)) {
                    dup = true;
                    break;
                }
            if (!dup)
                out.push_back(r);
        }
    return out;
}

CommitAnalysis detect_commit(const std::vector<SourceFile>& before_set, const std::vector<SourceFile>& after_set,
                             const PipelineOptions& options, const std::string& commit) {
    CommitAnalysis out;
    out.commit = commit;
    auto t0 = Clock::now();

    out.pairing = pair_files(before_set, after_set, options.module);
    out.module = out.pairing.module_refactorings;
    out.diagnostics = out.pairing.diagnostics;
    out.timing.module_ms = ms_since(t0);

    auto t1 = Clock::now();
    const auto& pairs = out.pairing.paired;
    std::vector<IntraFileResult> intra(pairs.size());
    if (options.threads > 1 && pairs.size() > 1) {
        for (std::size_t start = 0; start < pairs.size(); start += options.threads) {
            std::vector<std::future<IntraFileResult>> jobs;
            for (std::size_t i = start; i < std::min(pairs.size(), start + options.threads); ++i)
                jobs.push_back(std::async(std::launch::async, [&, i] {
                    return detect_intra_file(pairs[i].first, pairs[i].second, options);
                }));
            for (std::size_t k = 0; k < jobs.size(); ++k)
                intra[start + k] = jobs[k].get();
        }
    } else {
        for (std::size_t i = 0; i < pairs.size(); ++i)
            intra[i] = detect_intra_file(pairs[i].first, pairs[i].second, options);
    }
    // ids are assigned in pair order so parallel runs number identically
    for (auto& r : intra) {
        shift_ids(r, out.action_count);
        out.action_count += r.action_count;
        out.intra.insert(out.intra.end(), r.instances.begin(), r.instances.end());
        out.diagnostics.insert(out.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
    }
    out.timing.intra_ms = ms_since(t1);

    auto t2 = Clock::now();
    if (options.cross_file) {
        CrossFileResult cross = detect_cross_file(out.pairing.unpaired_deleted, out.pairing.unpaired_inserted, intra,
                                                  options, out.action_count);
        out.action_count += cross.action_count;
        out.cross = std::move(cross.instances);
        out.cross_candidates = cross.candidates_examined;
        out.diagnostics.insert(out.diagnostics.end(), cross.diagnostics.begin(), cross.diagnostics.end());
    }
    out.timing.cross_ms = ms_since(t2);

    for (auto* part : {&out.module, &out.intra, &out.cross}) {
        keep_types(*part, options.types);
        for (auto& r : *part)
            r.commit = commit;
    }
    out.timing.total_ms = ms_since(t0);
    return out;
}

} // namespace actref
