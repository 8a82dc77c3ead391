// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "corpus_support.hpp"
#include "tree_gen.hpp"

#include "actref/tree_diff.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>

using namespace actref;
using namespace actref::testing;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!ok)
        ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void soundness() {
    auto t0 = Clock::now();
    int checked = 0, ok = 0;
    for (std::uint64_t seed = 1; seed <= 600; ++seed) {
        TreeGenerator gen(seed);
        AstTree b(gen.program(20, 300));
        AstTree a(gen.mutate(b.to_builder(), 1 + static_cast<int>(seed % 6)));
        auto script = generate_actions(b, a, match_trees(b, a));
        ok += isomorphic(apply_actions(b, script), a);
        ++checked;
    }
    double s = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d/%d random mutation pairs reproduced, %.2f s", ok, checked, s);
    report(ok == checked && checked >= 500 && s < 60.0, "edit-script soundness", buf);
}

void corpus_exact(const std::vector<Fixture>& corpus) {
    std::map<RefactoringType, int> per_type;
    int ok = 0;
    std::string bad;
    for (const auto& f : corpus) {
        bool good = same_entries(entries_of(detect_commit(f.before, f.after)), f.expected);
        ok += good;
        if (!good)
            bad += " " + f.name;
        for (const auto& e : f.expected)
            ++per_type[e.type];
    }
    int covered = 0;
    for (RefactoringType t : kAllRefactoringTypes)
        covered += per_type[t] >= 2;
    std::string detail = std::to_string(ok) + "/" + std::to_string(corpus.size()) + " fixtures exact, " +
                         std::to_string(covered) + "/15 types with >= 2 fixtures" + (bad.empty() ? "" : "; failed:" + bad);
    report(ok == static_cast<int>(corpus.size()) && covered == 15, "15-type fixture corpus", detail);
}

void keypoints() {
    auto dir = data_dir() / "fixtures" / "keypoints_extract_method";
    auto a = detect_commit(load_tree(dir / "before"), load_tree(dir / "after"));
    bool found = false;
    for (const auto& r : a.results())
        found |= r.type == RefactoringType::ExtractMethod && r.before &&
                 r.before->qualified_name == "CropAndPad._augment_keypoints" && r.after &&
                 r.after->qualified_name == "CropAndPad._crop_and_pad_kpsoi";
    report(found, "keypoint extract method",
           found ? "Extract Method _augment_keypoints -> _crop_and_pad_kpsoi" : "instance not found");
}

void relocation() {
    auto dir = data_dir() / "fixtures" / "relocation_move_module";
    auto a = detect_commit(load_tree(dir / "before"), load_tree(dir / "after"));
    auto all = a.results();
    std::size_t moves = 0, other = 0;
    for (const auto& r : all)
        (r.type == RefactoringType::MoveModule ? moves : other)++;
    report(moves == 1 && other == 0 && a.intra.empty() && a.cross.empty(), "verbatim relocation",
           std::to_string(moves) + " Move Module, " + std::to_string(other) + " other instances");
}

void mirror(const std::vector<Fixture>& corpus) {
    int n = 0, ok = 0;
    std::string bad;
    for (const auto& f : corpus) {
        if (f.expected.empty() || !is_extract(f.expected[0].type))
            continue;
        ++n;
        bool good = same_entries(entries_of(detect_commit(f.after, f.before)), mirrored(f.expected));
        ok += good;
        if (!good)
            bad += " " + f.name;
    }
    report(n > 0 && ok == n, "mirror suite",
           std::to_string(ok) + "/" + std::to_string(n) + " swapped Extract fixtures give Inline" +
               (bad.empty() ? "" : "; failed:" + bad));
}

void metrics() {
    struct Case {
        TypeCounts c;
        std::optional<double> p, r, f1;
    };
    // hand-evaluated precision, recall and F1
    const Case cases[] = {
        {{3, 1, 0}, 0.75, 1.0, 6.0 / 7.0},
        {{0, 0, 5}, std::nullopt, 0.0, 0.0},
        {{1, 1, 1}, 0.5, 0.5, 0.5},
        {{2, 0, 2}, 1.0, 0.5, 2.0 / 3.0},
        {{0, 3, 0}, 0.0, std::nullopt, 0.0},
        {{10, 0, 0}, 1.0, 1.0, 1.0},
        {{1, 3, 0}, 0.25, 1.0, 0.4},
        {{4, 1, 4}, 0.8, 0.5, 8.0 / 13.0},
        {{7, 2, 1}, 7.0 / 9.0, 7.0 / 8.0, 14.0 / 17.0},
        {{0, 2, 3}, 0.0, 0.0, 0.0},
        {{5, 5, 15}, 0.5, 0.25, 1.0 / 3.0},
    };
    auto near = [](const std::optional<double>& x, const std::optional<double>& y) {
        return x.has_value() == y.has_value() && (!x || std::abs(*x - *y) <= 1e-9);
    };
    int ok = 0, n = 0;
    for (const auto& k : cases) {
        Scores s = score(k.c);
        ok += near(s.precision, k.p) && near(s.recall, k.r) && near(s.f1, k.f1);
        ++n;
    }
    Scores head = score({3, 1, 0});
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d/%d vectors within 1e-9; TP=3 FP=1 FN=0 -> P=%.4f R=%.4f F1=%.6f", ok, n,
                  head.precision.value_or(-1), head.recall.value_or(-1), head.f1.value_or(-1));
    report(ok == n && n >= 10, "metrics harness", buf);
}

void idempotence(const std::vector<Fixture>& corpus) {
    std::size_t actions = 0, found = 0, sets = 0;
    for (const auto& f : corpus)
        for (const auto* side : {&f.before, &f.after}) {
            auto a = detect_commit(*side, *side);
            actions += a.action_count;
            found += a.results().size();
            ++sets;
        }
    report(actions == 0 && found == 0, "no-change idempotence",
           std::to_string(sets) + " identical file sets, " + std::to_string(actions) + " actions, " +
               std::to_string(found) + " refactorings");
}

void runtime(const std::vector<Fixture>& corpus) {
    std::vector<double> times;
    for (const auto& f : corpus) {
        auto t0 = Clock::now();
        detect_commit(f.before, f.after);
        times.push_back(seconds_since(t0));
    }
    std::sort(times.begin(), times.end());
    double median = times.empty() ? 0 : times[times.size() / 2];

    // wide commit of unrelated added and removed files, bounded by the candidate cap
    std::vector<SourceFile> before, after;
    for (int i = 0; i < 150; ++i) {
        std::string n = std::to_string(i);
        before.emplace_back("old/m" + n + ".py", "def f" + n + "(x):\n    return x * " + n + " + len(str(x))\n\n\n"
                                                  "class A" + n + ":\n    def m(self, y):\n        return [y] * " + n + "\n");
        after.emplace_back("new/k" + n + ".py", "def g" + n + "(a, b):\n    return {a: b, 'k': " + n + "}\n\n\n"
                                                 "class B" + n + ":\n    def n(self):\n        return (" + n + ", None)\n");
    }
    PipelineOptions capped;
    auto t0 = Clock::now();
    auto wide = detect_commit(before, after, capped);
    double wide_s = seconds_since(t0);

    char buf[200];
    std::snprintf(buf, sizeof buf, "median %.4f s over %zu fixture commits (max %.4f s); 300-file commit %.2f s, %zu cross candidates",
                  median, times.size(), times.empty() ? 0 : times.back(), wide_s, wide.cross_candidates);
    report(median < 2.0 && wide.cross_candidates <= capped.max_cross_candidates, "runtime sanity", buf);
}

} // namespace

int main() {
    auto corpus = load_corpus();
    soundness();
    corpus_exact(corpus);
    keypoints();
    relocation();
    mirror(corpus);
    metrics();
    idempotence(corpus);
    runtime(corpus);
    return failures == 0 ? 0 : 1;
}
