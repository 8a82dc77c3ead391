#include "corpus_support.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace actref;
using namespace actref::testing;

namespace {

const std::vector<Fixture>& corpus() {
    static const std::vector<Fixture> c = load_corpus();
    return c;
}

} // namespace

TEST(Corpus, EveryTypeHasTwoFixtures) {
    std::map<RefactoringType, int> n;
    for (const auto& f : corpus()) {
        ASSERT_EQ(f.expected.size(), 1u) << f.name;
        ++n[f.expected[0].type];
    }
    for (RefactoringType t : kAllRefactoringTypes)
        EXPECT_GE(n[t], 2) << to_string(t);
}

TEST(Corpus, DetectsExactlyTheSeededInstance) {
    for (const auto& f : corpus()) {
        auto a = detect_commit(f.before, f.after);
        auto got = entries_of(a);
        EXPECT_TRUE(same_entries(got, f.expected)) << f.name << "\n got:\n" << render(got) << " expected:\n"
                                                   << render(f.expected);
        EXPECT_TRUE(a.diagnostics.empty()) << f.name;
    }
}

TEST(Corpus, SwappedExtractFixturesGiveInline) {
    int n = 0;
    for (const auto& f : corpus()) {
        if (!is_extract(f.expected[0].type))
            continue;
        ++n;
        auto got = entries_of(detect_commit(f.after, f.before));
        EXPECT_TRUE(same_entries(got, mirrored(f.expected))) << f.name << "\n got:\n" << render(got);
    }
    EXPECT_GE(n, 8);
}

TEST(Corpus, UnchangedFileSetsGiveNothing) {
    for (const auto& f : corpus())
        for (const auto* side : {&f.before, &f.after}) {
            auto a = detect_commit(*side, *side);
            EXPECT_EQ(a.action_count, 0u) << f.name;
            EXPECT_TRUE(a.results().empty()) << f.name;
        }
}

TEST(Corpus, ActionsConsumedAtMostOnce) {
    for (const auto& f : corpus()) {
        auto a = detect_commit(f.before, f.after);
        std::set<std::size_t> seen;
        for (const auto* part : {&a.module, &a.intra, &a.cross})
            for (const auto& r : *part)
                for (std::size_t id : r.evidence) {
                    EXPECT_LT(id, a.action_count) << f.name;
                    EXPECT_TRUE(seen.insert(id).second) << f.name << " action " << id;
                }
    }
}
