#include "actref/cli_report.hpp"
#include "actref/git_ingest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace actref {

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<SourceFile> load_dir(const std::string& root, const std::string& suffix) {
    std::vector<SourceFile> files;
    if (root.empty())
        return files;
    if (!fs::is_directory(root))
        throw std::runtime_error("not a directory: " + root);
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        std::string p = entry.path().generic_string();
        if (entry.is_regular_file() && p.size() >= suffix.size() && p.compare(p.size() - suffix.size(), suffix.size(), suffix) == 0)
            files.emplace_back(fs::relative(entry.path(), root).generic_string(), slurp(p));
    }
    std::sort(files.begin(), files.end(), [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    return files;
}

// Unchanged files carry no refactorings; drop them the way a commit diff would.
void drop_unchanged(std::vector<SourceFile>& before, std::vector<SourceFile>& after) {
    std::map<std::string, std::string> hashes;
    for (const auto& f : before)
        hashes[f.path] = f.content_hash;
    std::set<std::string> same;
    for (const auto& f : after)
        if (auto it = hashes.find(f.path); it != hashes.end() && it->second == f.content_hash)
            same.insert(f.path);
    auto gone = [&](const SourceFile& f) { return same.count(f.path) > 0; };
    std::erase_if(before, gone);
    std::erase_if(after, gone);
}

struct Settings {
    PipelineOptions pipeline;
    IngestOptions ingest;
    std::optional<double> similarity_threshold;
    std::vector<std::string> types;

    // detect
    std::string repo;
    std::string commits = "all";
    std::string before_dir;
    std::string after_dir;
    std::string out_path;
    std::string format = "json";
    bool strict = false;
    bool omit_timing = false;
    unsigned threads = 1;

    // diff
    std::string diff_before;
    std::string diff_after;
    bool refined = false;
    bool json = false;

    // eval
    std::string detected;
    std::string oracle;
    bool per_type = false;
    std::string eval_format = "table";
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << text;
}

int run_detect(Settings& s, std::ostream& out, std::ostream& err) {
    PipelineOptions opts = s.pipeline;
    opts.matcher.threshold = s.similarity_threshold;
    for (const auto& name : s.types) {
        auto t = refactoring_type_from_string(name);
        if (!t) {
            err << "unknown refactoring type '" << name << "'\n";
            return 1;
        }
        opts.types.insert(*t);
    }

    DetectionReport report;
    bool any_diagnostic = false;
    if (!s.before_dir.empty() || !s.after_dir.empty()) {
        std::vector<SourceFile> before, after;
        try {
            before = load_dir(s.before_dir, s.ingest.source_suffix);
            after = load_dir(s.after_dir, s.ingest.source_suffix);
        } catch (const std::exception& e) {
            err << e.what() << "\n";
            return 1;
        }
        drop_unchanged(before, after);
        auto a = detect_commit(before, after, opts, "working-tree");
        report.commits.push_back(commit_report(a, !s.omit_timing));
    } else {
        if (s.repo.empty()) {
            err << "detect needs --repo or --before/--after\n";
            return 1;
        }
        std::vector<std::string> commits;
        try {
            commits = enumerate_commits(s.repo, s.commits, s.ingest);
        } catch (const GitError& e) {
            err << e.what() << "\n";
            return 1;
        }
        auto one = [&](const std::string& c) {
            try {
                auto sets = commit_filesets(s.repo, c, s.ingest);
                auto a = detect_commit(sets.before_set, sets.after_set, opts, sets.commit);
                a.diagnostics.insert(a.diagnostics.begin(), sets.diagnostics.begin(), sets.diagnostics.end());
                return commit_report(a, !s.omit_timing);
            } catch (const GitError& e) {
                CommitReport r;
                r.commit = c;
                r.diagnostics.push_back({"", e.what()});
                return r;
            }
        };
        unsigned threads = std::max(1u, s.threads);
        for (std::size_t start = 0; start < commits.size(); start += threads) {
            std::vector<std::future<CommitReport>> jobs;
            for (std::size_t i = start; i < std::min(commits.size(), start + threads); ++i)
                jobs.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred, one, commits[i]));
            for (auto& j : jobs)
                report.commits.push_back(j.get());
        }
    }
    for (const auto& c : report.commits) {
        any_diagnostic |= !c.diagnostics.empty();
        for (const auto& d : c.diagnostics)
            err << (c.commit.empty() ? "" : c.commit.substr(0, 12) + " ") << (d.file.empty() ? "" : d.file + ": ")
                << d.message << "\n";
    }
    try {
        emit(s.format == "csv" ? report_to_csv(report) : report_to_json(report), s.out_path, out);
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return 1;
    }
    return s.strict && any_diagnostic ? 2 : 0;
}

int run_diff(Settings& s, std::ostream& out, std::ostream& err) {
    AstTree before, after;
    try {
        before = parse_module(SourceFile(s.diff_before, slurp(s.diff_before)));
        after = parse_module(SourceFile(s.diff_after, slurp(s.diff_after)));
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return 1;
    }
    MatcherOptions m = s.pipeline.matcher;
    m.threshold = s.similarity_threshold;
    NodeMapping mapping = match_trees(before, after, m);
    auto script = generate_actions(before, after, mapping);
    using nlohmann::json;
    if (!s.refined) {
        if (!s.json) {
            for (const auto& e : script)
                out << describe(e, before, after) << "\n";
            return 0;
        }
        json arr = json::array();
        for (const auto& e : script) {
            json j{{"action", to_string(e.kind)}, {"node", to_string(e.node_kind)}};
            if (e.before != kNoNode)
                j["before"] = e.before;
            if (e.after != kNoNode)
                j["after"] = e.after;
            if (e.parent != kNoNode) {
                j["parent"] = e.parent;
                j["position"] = e.position;
            }
            if (e.kind == EditKind::Update) {
                j["old_label"] = e.old_label;
                j["new_label"] = e.new_label;
            }
            arr.push_back(std::move(j));
        }
        out << arr.dump(2) << "\n";
        return 0;
    }
    auto actions = refine_update_vs_replace(group_into_element_actions(script, before, after, mapping),
                                            s.pipeline.rules.refine);
    if (!s.json) {
        for (const auto& a : actions)
            out << describe(a) << "\n";
        return 0;
    }
    json arr = json::array();
    for (const auto& a : actions) {
        json j{{"action", to_string(a.kind)},
               {"element", to_string(a.element.kind)},
               {"name", a.element.qualified_name},
               {"node_actions", a.evidence.size()}};
        if (a.before_element)
            j["before_name"] = a.before_element->qualified_name;
        if (a.kind == ElementActionKind::Move) {
            j["from"] = a.from_container;
            j["to"] = a.to_container;
        }
        if (a.kind == ElementActionKind::Update)
            j["body_similarity"] = std::round(a.body_similarity * 1e4) / 1e4;
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << "\n";
    return 0;
}

int run_eval(Settings& s, std::ostream& out, std::ostream& err) {
    try {
        auto detected = detected_entries(slurp(s.detected));
        auto oracle = load_oracle(slurp(s.oracle));
        auto metrics = compute_metrics(match_instances(detected, oracle));
        out << (s.eval_format == "json" ? metrics_to_json(metrics, s.per_type) : metrics_to_table(metrics, s.per_type));
        return 0;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return 1;
    }
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Settings s;
    CLI::App app{"Refactoring detection for Python commits", "actref"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file with option defaults");
    app.set_version_flag("--version", kToolVersion);

    auto& pl = s.pipeline;
    app.add_option("--file-pair-floor", pl.module.file_pair_floor, "Similarity for pairing renamed/moved files")
        ->capture_default_str();
    app.add_option("--slice-move-floor", pl.module.slice_move_floor, "Similarity for a slice to count as moved")
        ->capture_default_str();
    app.add_option("--similarity-threshold", s.similarity_threshold,
                   "Fixed bottom-up matching threshold (default: size-adaptive)");
    app.add_option("--min-height", pl.matcher.min_height, "Smallest subtree height matched top-down")
        ->capture_default_str();
    app.add_option("--extract-floor", pl.rules.extract_floor, "Similarity for Extract/Inline rules")->capture_default_str();
    app.add_option("--move-floor", pl.rules.move_floor, "Similarity for Move rules")->capture_default_str();
    app.add_option("--rename-body-floor", pl.rules.refine.rename_body_floor, "Body similarity keeping an Update")
        ->capture_default_str();
    app.add_option("--signature-pair-floor", pl.rules.refine.signature_pair_floor,
                   "Body similarity pairing differently named declarations")
        ->capture_default_str();
    app.add_option("--max-cross-candidates", pl.max_cross_candidates, "Cross-file candidate pairs per commit (0 = no cap)")
        ->capture_default_str();
    app.add_flag("!--no-cross-file", pl.cross_file, "Skip the cross-file stage");
    app.add_option("--source-suffix", s.ingest.source_suffix, "Source file suffix")->capture_default_str();

    auto* detect = app.add_subcommand("detect", "Detect refactorings in commits or two directories");
    detect->add_option("--repo", s.repo, "Repository path");
    detect->add_option("--commits", s.commits, "rev-range, @file-with-hashes, a revision, or all")->capture_default_str();
    detect->add_flag("--include-merges", s.ingest.include_merges, "Diff merges against their first parent");
    detect->add_option("--before", s.before_dir, "Directory with the old version (instead of --repo)");
    detect->add_option("--after", s.after_dir, "Directory with the new version");
    detect->add_option("--out", s.out_path, "Output file (default stdout)");
    detect->add_option("--format", s.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    detect->add_option("--types", s.types, "Reported types, comma separated")->delimiter(',');
    detect->add_flag("--strict", s.strict, "Exit 2 when any commit produced diagnostics");
    detect->add_option("--threads", s.threads, "Commits analysed in parallel")->check(CLI::PositiveNumber);
    detect->add_flag("--omit-timing", s.omit_timing, "Leave timings out so reports compare byte for byte");

    auto* diff = app.add_subcommand("diff", "Print the edit script between two files");
    diff->add_option("before", s.diff_before)->required()->check(CLI::ExistingFile);
    diff->add_option("after", s.diff_after)->required()->check(CLI::ExistingFile);
    diff->add_flag("--refined", s.refined, "Element-level actions instead of node actions");
    diff->add_flag("--json", s.json, "JSON output");

    auto* eval = app.add_subcommand("eval", "Precision/recall/F1 of a report against an oracle");
    eval->add_option("--detected", s.detected, "Report (JSON or CSV)")->required()->check(CLI::ExistingFile);
    eval->add_option("--oracle", s.oracle, "Oracle (JSON array or CSV)")->required()->check(CLI::ExistingFile);
    eval->add_flag("--per-type", s.per_type, "One row per refactoring type");
    eval->add_option("--format", s.eval_format, "table or json")->check(CLI::IsMember({"table", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    if (*detect)
        return run_detect(s, out, err);
    if (*diff)
        return run_diff(s, out, err);
    return run_eval(s, out, err);
}

} // namespace actref
