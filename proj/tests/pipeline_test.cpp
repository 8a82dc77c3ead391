#include "actref/pipeline.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace actref;
using actref::testing::data_dir;
using actref::testing::load_tree;
using actref::testing::read_file;

namespace {

std::string list(const std::vector<RefactoringInstance>& v) {
    std::string s;
    for (const auto& r : v)
        s += r.description + "\n";
    return s;
}

std::size_t count(const std::vector<RefactoringInstance>& v, RefactoringType t) {
    return std::count_if(v.begin(), v.end(), [&](const RefactoringInstance& r) { return r.type == t; });
}

const char* kOrderBefore = R"(class Order:
    def __init__(self, items):
        self.items = items

    def total(self):
        return sum(item.price * item.quantity for item in self.items)

    def format_address(self, street, city, zipcode):
        line = street + ", " + city
        return line + " " + zipcode

    def validate_address(self, street, city, zipcode):
        if not street or not city:
            raise ValueError("incomplete address")
        return len(zipcode) == 5
)";
const char* kOrderAfter = R"(class Order:
    def __init__(self, items):
        self.items = items

    def total(self):
        return sum(item.price * item.quantity for item in self.items)
)";
const char* kAddressFile = R"(import re


class Address:
    def format_address(self, street, city, zipcode):
        line = street + ", " + city
        return line + " " + zipcode

    def validate_address(self, street, city, zipcode):
        if not street or not city:
            raise ValueError("incomplete address")
        return len(zipcode) == 5


def normalize_postcode(raw):
    digits = re.sub(r"\D", "", raw)
    return digits[:5].rjust(5, "0")
)";

const char* kHelper = R"(def tokenize(text, sep=","):
    parts = [p.strip() for p in text.split(sep)]
    return [p for p in parts if p]
)";

void expect_conserved(const CommitAnalysis& a) {
    std::set<std::size_t> seen;
    for (const auto* part : {&a.module, &a.intra, &a.cross})
        for (const auto& r : *part)
            for (std::size_t id : r.evidence) {
                EXPECT_LT(id, a.action_count);
                EXPECT_TRUE(seen.insert(id).second) << "action " << id << " consumed twice";
            }
}

} // namespace

TEST(DetectIntraFile, IdenticalPairGivesNothing) {
    SourceFile f("m.py", kOrderBefore);
    auto r = detect_intra_file(f, f);
    EXPECT_TRUE(r.instances.empty());
    EXPECT_TRUE(r.remaining.empty());
    EXPECT_EQ(r.action_count, 0u);
}

TEST(DetectIntraFile, KeypointsExtract) {
    auto dir = data_dir() / "fixtures" / "keypoints_extract_method";
    const std::string path = "imgaug/augmenters/size.py";
    auto r = detect_intra_file(SourceFile(path, read_file(dir / "before" / path)),
                               SourceFile(path, read_file(dir / "after" / path)));
    ASSERT_EQ(count(r.instances, RefactoringType::ExtractMethod), 1u) << list(r.instances);
    EXPECT_EQ(r.instances.size(), 1u) << list(r.instances);
    EXPECT_EQ(r.instances[0].before->qualified_name, "CropAndPad._augment_keypoints");
    EXPECT_EQ(r.instances[0].after->qualified_name, "CropAndPad._crop_and_pad_kpsoi");
}

TEST(DetectIntraFile, UnmatchedDeletedMethodIsLeftOver) {
    auto r = detect_intra_file(SourceFile("a.py", std::string("X = 1\n\n") + kHelper), SourceFile("a.py", "X = 1\n"));
    EXPECT_TRUE(r.instances.empty()) << list(r.instances);
    ASSERT_EQ(r.remaining.size(), 1u);
    EXPECT_EQ(r.remaining[0].kind, ElementActionKind::Delete);
    EXPECT_EQ(r.remaining[0].element.kind, ElementKind::Method);
    EXPECT_EQ(r.remaining[0].element.qualified_name, "tokenize");
}

TEST(DetectIntraFile, SyntaxErrorSkipsPair) {
    auto r = detect_intra_file(SourceFile("a.py", "def f(:\n"), SourceFile("a.py", "def f():\n    pass\n"));
    EXPECT_TRUE(r.instances.empty());
    EXPECT_TRUE(r.remaining.empty());
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.diagnostics[0].file, "a.py");
}

TEST(DetectCrossFile, EmptyInputs) {
    auto r = detect_cross_file({}, {}, {});
    EXPECT_TRUE(r.instances.empty());
}

TEST(DetectCrossFile, MethodMovedBetweenPairedFiles) {
    std::vector<IntraFileResult> rem;
    rem.push_back(detect_intra_file(SourceFile("a.py", std::string("X = 1\n\n") + kHelper), SourceFile("a.py", "X = 1\n")));
    rem.push_back(detect_intra_file(SourceFile("b.py", "Y = 2\n"), SourceFile("b.py", std::string("Y = 2\n\n") + kHelper),
                                    {}, 100));
    auto r = detect_cross_file({}, {}, rem);
    ASSERT_EQ(r.instances.size(), 1u) << list(r.instances);
    EXPECT_EQ(r.instances[0].type, RefactoringType::MoveMethod);
    EXPECT_EQ(r.instances[0].before->file, "a.py");
    EXPECT_EQ(r.instances[0].after->file, "b.py");
    EXPECT_EQ(r.instances[0].after->qualified_name, "tokenize");
}

TEST(DetectCommit, NoChangedFiles) {
    auto a = detect_commit({}, {});
    EXPECT_TRUE(a.results().empty());
    EXPECT_EQ(a.action_count, 0u);
}

TEST(DetectCommit, VerbatimRelocationIsOneMoveModule) {
    auto dir = data_dir() / "fixtures" / "relocation_move_module";
    auto a = detect_commit(load_tree(dir / "before"), load_tree(dir / "after"));
    auto all = a.results();
    ASSERT_EQ(all.size(), 1u) << list(all);
    EXPECT_EQ(all[0].type, RefactoringType::MoveModule);
    EXPECT_EQ(all[0].before->file, "mlkit/utils/io_helpers.py");
    EXPECT_EQ(all[0].after->file, "mlkit/common/io_helpers.py");
    EXPECT_TRUE(a.intra.empty());
    EXPECT_TRUE(a.cross.empty());
    EXPECT_EQ(a.action_count, 0u);
}

TEST(DetectCommit, RenameAndCrossFileMoveHaveDistinctEvidence) {
    std::vector<SourceFile> before{
        SourceFile("a.py", std::string("class Reader:\n    def read(self, p):\n        return open(p).read()\n\n") + kHelper),
        SourceFile("b.py", "Y = 2\n")};
    std::vector<SourceFile> after{
        SourceFile("a.py", "class FileReader:\n    def read(self, p):\n        return open(p).read()\n"),
        SourceFile("b.py", std::string("Y = 2\n\n") + kHelper)};
    auto a = detect_commit(before, after);
    auto all = a.results();
    EXPECT_EQ(count(all, RefactoringType::RenameClass), 1u) << list(all);
    EXPECT_EQ(count(all, RefactoringType::MoveMethod), 1u) << list(all);
    EXPECT_EQ(all.size(), 2u) << list(all);
    expect_conserved(a);
}

TEST(DetectCommit, CrossFileExtractClassIntoNewFile) {
    auto a = detect_commit({SourceFile("shop/order.py", kOrderBefore)},
                           {SourceFile("shop/order.py", kOrderAfter), SourceFile("shop/address.py", kAddressFile)});
    auto all = a.results();
    ASSERT_EQ(count(a.cross, RefactoringType::ExtractClass), 1u) << list(all);
    EXPECT_EQ(all.size(), 1u) << list(all);
    const auto& r = a.cross[0];
    EXPECT_EQ(r.before->file, "shop/order.py");
    EXPECT_EQ(r.before->qualified_name, "Order");
    EXPECT_EQ(r.after->file, "shop/address.py");
    EXPECT_EQ(r.after->qualified_name, "Address");
    expect_conserved(a);
}

TEST(DetectCommit, CrossFileInlineClassMirrors) {
    auto a = detect_commit({SourceFile("shop/order.py", kOrderAfter), SourceFile("shop/address.py", kAddressFile)},
                           {SourceFile("shop/order.py", kOrderBefore)});
    auto all = a.results();
    EXPECT_EQ(count(all, RefactoringType::InlineClass), 1u) << list(all);
    EXPECT_EQ(all.size(), 1u) << list(all);
}

TEST(DetectCommit, StageIsolation) {
    std::vector<SourceFile> before{SourceFile("shop/order.py", kOrderBefore),
                                   SourceFile("a.py", std::string("class Reader:\n    pass\n\n") + kHelper)};
    std::vector<SourceFile> after{SourceFile("shop/order.py", kOrderAfter), SourceFile("shop/address.py", kAddressFile),
                                  SourceFile("a.py", "class Reader2:\n    pass\n")};
    PipelineOptions with, without;
    without.cross_file = false;
    auto a = detect_commit(before, after, with);
    auto b = detect_commit(before, after, without);
    EXPECT_TRUE(b.cross.empty());
    ASSERT_EQ(a.intra.size(), b.intra.size());
    for (std::size_t i = 0; i < a.intra.size(); ++i) {
        EXPECT_TRUE(a.intra[i].same_subject(b.intra[i]));
        EXPECT_EQ(a.intra[i].evidence, b.intra[i].evidence);
    }
    ASSERT_EQ(a.module.size(), b.module.size());
    for (std::size_t i = 0; i < a.module.size(); ++i)
        EXPECT_TRUE(a.module[i].same_subject(b.module[i]));
}

TEST(DetectCommit, DeterministicAcrossRunsAndThreads) {
    auto dir = data_dir() / "fixtures" / "keypoints_extract_method";
    auto before = load_tree(dir / "before");
    auto after = load_tree(dir / "after");
    before.emplace_back("shop/order.py", kOrderBefore);
    after.emplace_back("shop/order.py", kOrderAfter);
    after.emplace_back("shop/address.py", kAddressFile);
    auto first = detect_commit(before, after).results();
    PipelineOptions threaded;
    threaded.threads = 4;
    for (int i = 0; i < 3; ++i) {
        auto again = detect_commit(before, after, i == 2 ? threaded : PipelineOptions{}).results();
        ASSERT_EQ(again.size(), first.size());
        for (std::size_t k = 0; k < first.size(); ++k) {
            EXPECT_EQ(again[k].description, first[k].description);
            EXPECT_EQ(again[k].evidence, first[k].evidence);
        }
    }
}

TEST(DetectCommit, TypeFilterAppliesToOutput) {
    std::vector<SourceFile> before{SourceFile("a.py", std::string("class Reader:\n    def read(self, p):\n        return open(p).read()\n\n") + kHelper),
                                   SourceFile("b.py", "Y = 2\n")};
    std::vector<SourceFile> after{SourceFile("a.py", "class FileReader:\n    def read(self, p):\n        return open(p).read()\n"),
                                  SourceFile("b.py", std::string("Y = 2\n\n") + kHelper)};
    PipelineOptions opts;
    opts.types = {RefactoringType::MoveMethod};
    auto all = detect_commit(before, after, opts).results();
    ASSERT_EQ(all.size(), 1u) << list(all);
    EXPECT_EQ(all[0].type, RefactoringType::MoveMethod);
}

TEST(DetectCommit, CandidateCapIsReported) {
    std::vector<SourceFile> before, after;
    for (int i = 0; i < 6; ++i) {
        std::string n = std::to_string(i);
        before.emplace_back("old" + n + ".py", "def f" + n + "(x):\n    return x * " + n + " + len(str(x))\n");
        after.emplace_back("new" + n + ".py", "class K" + n + ":\n    def g(self):\n        return [" + n + "] * 3\n");
    }
    PipelineOptions opts;
    opts.max_cross_candidates = 4;
    auto a = detect_commit(before, after, opts);
    EXPECT_LE(a.cross_candidates, 4u);
}

TEST(DetectCommit, SyntaxErrorsBecomeDiagnostics) {
    auto a = detect_commit({SourceFile("a.py", "x = 1\n")}, {SourceFile("a.py", "x = (\n")});
    EXPECT_TRUE(a.results().empty());
    EXPECT_FALSE(a.diagnostics.empty());
}
