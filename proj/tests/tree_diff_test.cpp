#include "actref/tree_diff.hpp"
#include "oracle/optimal_mapping.hpp"
#include "test_support.hpp"
#include "tree_gen.hpp"

#include <gtest/gtest.h>

#include <chrono>

using namespace actref;
using actref::testing::data_dir;
using actref::testing::read_file;

namespace {

void expect_valid_mapping(const AstTree& before, const AstTree& after, const NodeMapping& m) {
    std::vector<char> seen_a(after.size(), 0);
    std::size_t n = 0;
    for (auto [b, a] : m.pairs()) {
        ASSERT_LT(b, before.size());
        ASSERT_LT(a, after.size());
        EXPECT_EQ(before[b].kind, after[a].kind);
        EXPECT_FALSE(seen_a[a]) << "after node mapped twice";
        seen_a[a] = 1;
        EXPECT_EQ(m.before_of(a), b);
        ++n;
    }
    EXPECT_EQ(n, m.size());
}

struct Diff {
    AstTree before, after;
    NodeMapping mapping;
    std::vector<EditAction> script;
};

Diff diff(std::string_view b, std::string_view a) {
    Diff d{parse_module(b, "m.py"), parse_module(a, "m.py"), {}, {}};
    d.mapping = match_trees(d.before, d.after);
    d.script = generate_actions(d.before, d.after, d.mapping);
    return d;
}

NodeId find(const AstTree& t, NodeKind kind, std::string_view label) {
    for (const AstNode& n : t.nodes())
        if (n.kind == kind && n.label == label)
            return n.id;
    return kNoNode;
}

// A ModuleRoot holding one Expr whose value is `kind` with the given leaf children.
NodeBuilder with_leaves(NodeKind kind, std::initializer_list<const char*> names) {
    NodeBuilder root(NodeKind::ModuleRoot);
    NodeBuilder holder(kind);
    for (const char* n : names)
        holder.children.emplace_back(NodeKind::Name, n);
    root.children.push_back(std::move(holder));
    return root;
}

} // namespace

TEST(StructuralHash, EqualForIdenticalSubtrees) {
    AstTree t = parse_module("x = 1\nx = 1\nx = 2\n");
    NodeId s0 = t[0].children[0], s1 = t[0].children[1], s2 = t[0].children[2];
    EXPECT_EQ(structural_hash(t, s0), structural_hash(t, s1));
    EXPECT_NE(structural_hash(t, s0), structural_hash(t, s2));
}

TEST(StructuralHash, IgnoresSpans) {
    AstTree a = parse_module("x = 1\n");
    AstTree b = parse_module("\n\nif y:\n    pass\nx   =   1\n");
    EXPECT_EQ(structural_hash(a, a[0].children[0]), structural_hash(b, b[0].children[1]));
}

TEST(MatchTrees, IdenticalTreesMapEveryNode) {
    std::string src = read_file(data_dir() / "data/parser/constructs.py");
    AstTree a = parse_module(src), b = parse_module(src);
    NodeMapping m = match_trees(a, b);
    EXPECT_EQ(m.size(), a.size());
    for (NodeId i = 0; i < a.size(); ++i)
        EXPECT_EQ(m.after_of(i), i);
}

TEST(MatchTrees, RenamedIdentifierMapsAllNodesLikeExhaustiveOracle) {
    AstTree b = parse_module("x = 1\ny = foo(a, b)\n");
    AstTree a = parse_module("x = 1\ny = foo(a, c)\n");
    ASSERT_LE(b.size(), 20u);
    NodeMapping m = match_trees(b, a);
    EXPECT_EQ(m.size(), b.size());
    EXPECT_TRUE(m.contains(find(b, NodeKind::Name, "b"), find(a, NodeKind::Name, "c")));
    auto best = oracle::optimal_mapping(b, a);
    EXPECT_EQ(oracle::mapping_cost(b, a, m.pairs()), best.cost);
    EXPECT_EQ(best.pairs.size(), m.size());
}

TEST(MatchTrees, SmallEditsReachOptimalCost) {
    const std::pair<const char*, const char*> cases[] = {
        {"x = 1\n", "x = 2\n"},
        {"x = 1\ny = 2\n", "x = 1\ny = 2\nz = 3\n"},
        {"a = f(1)\nb = 2\nc = 3\n", "a = f(1)\nc = 3\n"},
        {"def f(a):\n    return a + 1\n", "def f(a):\n    return a - 1\n"},
        {"if a:\n    b = 1\n", "if a:\n    b = 1\nelse:\n    b = 2\n"},
        {"total = price * qty\n", "amount = price * qty\n"},
    };
    for (auto [bs, as] : cases) {
        AstTree b = parse_module(bs), a = parse_module(as);
        ASSERT_LE(b.size(), 20u);
        ASSERT_LE(a.size(), 20u);
        NodeMapping m = match_trees(b, a);
        expect_valid_mapping(b, a, m);
        EXPECT_EQ(oracle::mapping_cost(b, a, m.pairs()), oracle::optimal_mapping(b, a).cost) << bs << "--->\n" << as;
    }
}

TEST(MatchTrees, DisjointFilesMapOnlyRoots) {
    AstTree b = parse_module("x = 1\n");
    AstTree a = parse_module("import os\n");
    NodeMapping m = match_trees(b, a);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_TRUE(m.contains(0, 0));
    EXPECT_EQ(oracle::optimal_mapping(b, a).pairs.size(), 1u);
}

TEST(MatchTrees, DifferentlyNamedMethodsStayApartWhileTheOldNameSurvives) {
    AstTree b = parse_module("class A:\n    def keep(self):\n        x = 1\n        y = 2\n        return x + y\n");
    AstTree a = parse_module("class A:\n    def keep(self):\n        return helper()\n"
                             "    def helper(self):\n        x = 1\n        y = 2\n        return x + y\n");
    NodeMapping m = match_trees(b, a);
    NodeId keep_b = find(b, NodeKind::FunctionDef, "keep");
    EXPECT_EQ(m.after_of(keep_b), find(a, NodeKind::FunctionDef, "keep"));
    EXPECT_FALSE(m.has_after(find(a, NodeKind::FunctionDef, "helper")));
}

TEST(DiceSimilarity, HandEvaluatedExample) {
    // Three descendants on each side, two of them mapped: 2*2/(3+3).
    AstTree b(with_leaves(NodeKind::Tuple, {"p", "q", "r"}));
    AstTree a(with_leaves(NodeKind::Tuple, {"p", "q", "s"}));
    NodeMapping m(b.size(), a.size());
    NodeId tb = b[0].children[0], ta = a[0].children[0];
    m.add(b[tb].children[0], a[ta].children[0]);
    m.add(b[tb].children[1], a[ta].children[1]);
    EXPECT_NEAR(dice_similarity(b, tb, a, ta, m), 2.0 * 2 / 6, 1e-12);
    EXPECT_NEAR(dice_similarity(b, tb, a, ta, m), 0.6667, 5e-5);
}

TEST(DiceSimilarity, IdentityDisjointAndLeaves) {
    AstTree t = parse_module("y = f(a, b)\n");
    NodeMapping full = match_trees(t, t);
    NodeId s = t[0].children[0];
    EXPECT_DOUBLE_EQ(dice_similarity(t, s, t, s, full), 1.0);
    NodeMapping empty(t.size(), t.size());
    EXPECT_DOUBLE_EQ(dice_similarity(t, s, t, s, empty), 0.0);
    NodeId leaf_a = find(t, NodeKind::Name, "a"), leaf_b = find(t, NodeKind::Name, "b");
    EXPECT_DOUBLE_EQ(dice_similarity(t, leaf_a, t, leaf_a, empty), 1.0);
    EXPECT_DOUBLE_EQ(dice_similarity(t, leaf_a, t, leaf_b, empty), 0.0);
}

TEST(DiceSimilarity, SymmetricAndMonotone) {
    actref::testing::TreeGenerator gen(7);
    for (int round = 0; round < 40; ++round) {
        AstTree b(gen.program(20, 120));
        AstTree a(gen.mutate(b.to_builder(), 3));
        NodeMapping full = match_trees(b, a);
        NodeMapping inv = full.inverted();
        auto pairs = full.pairs();
        for (auto [x, y] : pairs)
            EXPECT_DOUBLE_EQ(dice_similarity(b, x, a, y, full), dice_similarity(a, y, b, x, inv));
        // Growing the mapping pair by pair never lowers the root similarity.
        NodeMapping growing(b.size(), a.size());
        double last = dice_similarity(b, 0, a, 0, growing);
        for (auto [x, y] : pairs) {
            growing.add(x, y);
            double now = dice_similarity(b, 0, a, 0, growing);
            EXPECT_GE(now, last);
            last = now;
        }
    }
}

TEST(AdaptiveThreshold, DecidedRule) {
    EXPECT_DOUBLE_EQ(adaptive_threshold(50, 80), 0.4);
    EXPECT_DOUBLE_EQ(adaptive_threshold(500, 700), 0.5);
    EXPECT_DOUBLE_EQ(adaptive_threshold(99, 1000), 0.4);
    EXPECT_DOUBLE_EQ(adaptive_threshold(100, 100), 0.5);
    EXPECT_DOUBLE_EQ(adaptive_threshold(10, 10, 0.55), 0.55);
    EXPECT_DOUBLE_EQ(adaptive_threshold(10, 10, 0.9), 0.6);
    EXPECT_DOUBLE_EQ(adaptive_threshold(10, 10, 0.1), 0.3);
}

TEST(GenerateActions, IdenticalTreesGiveEmptyScript) {
    Diff d = diff("x = 1\ndef f():\n    return x\n", "x = 1\ndef f():\n    return x\n");
    EXPECT_TRUE(d.script.empty());
}

TEST(GenerateActions, LiteralChangeIsOneUpdate) {
    Diff d = diff("x = 1\n", "x = 2\n");
    ASSERT_EQ(d.script.size(), 1u);
    const EditAction& u = d.script[0];
    EXPECT_EQ(u.kind, EditKind::Update);
    EXPECT_EQ(u.node_kind, NodeKind::Constant);
    EXPECT_EQ(u.old_label, "1");
    EXPECT_EQ(u.new_label, "2");
    EXPECT_TRUE(isomorphic(apply_actions(d.before, d.script), d.after));
}

TEST(GenerateActions, OrderedByKindThenPreOrder) {
    Diff d = diff("a = 1\nb = 2\nc = f(3)\nd = 4\n", "q = g(3)\na = 9\nd = 4\nz = [1]\n");
    int last_rank = -1;
    NodeId last_id = 0;
    auto rank = [](EditKind k) { return k == EditKind::Update ? 0 : k == EditKind::Move ? 1 : k == EditKind::Insert ? 2 : 3; };
    for (const EditAction& x : d.script) {
        NodeId id = x.kind == EditKind::Insert || x.kind == EditKind::Move ? x.after : x.before;
        if (rank(x.kind) == last_rank)
            EXPECT_GT(id, last_id);
        else
            EXPECT_GT(rank(x.kind), last_rank);
        last_rank = rank(x.kind);
        last_id = id;
    }
    EXPECT_TRUE(isomorphic(apply_actions(d.before, d.script), d.after));
}

TEST(GenerateActions, WholeNewSubtreeIsOneInsert) {
    Diff d = diff("x = 1\n", "x = 1\ndef helper(a, b):\n    return a + b\n");
    ASSERT_EQ(d.script.size(), 1u);
    EXPECT_EQ(d.script[0].kind, EditKind::Insert);
    EXPECT_TRUE(d.script[0].subtree);
    EXPECT_EQ(d.script[0].node_kind, NodeKind::FunctionDef);
}

TEST(GenerateActions, KeypointsScript) {
    auto dir = data_dir() / "fixtures/keypoints_extract_method";
    Diff d = diff(read_file(dir / "before/imgaug/augmenters/size.py"), read_file(dir / "after/imgaug/augmenters/size.py"));
    expect_valid_mapping(d.before, d.after, d.mapping);
    NodeId helper = find(d.after, NodeKind::FunctionDef, "_crop_and_pad_kpsoi");
    NodeId host = find(d.before, NodeKind::FunctionDef, "_augment_keypoints");
    ASSERT_NE(helper, kNoNode);
    ASSERT_NE(host, kNoNode);
    bool helper_inserted = false;
    std::size_t host_statements_out = 0;
    for (const EditAction& x : d.script) {
        if (x.kind == EditKind::Insert && x.after == helper)
            helper_inserted = true;
        if ((x.kind == EditKind::Delete || x.kind == EditKind::Move) && d.before.is_descendant(x.before, host) &&
            is_statement_kind(x.node_kind))
            ++host_statements_out;
    }
    EXPECT_TRUE(helper_inserted);
    EXPECT_GT(host_statements_out, 0u);
    EXPECT_TRUE(isomorphic(apply_actions(d.before, d.script), d.after));
}

TEST(GenerateActions, RejectsForeignMapping) {
    AstTree b = parse_module("x = 1\n"), a = parse_module("x = 1\n");
    NodeMapping m(100, 100);
    m.add(50, 60);
    EXPECT_THROW(generate_actions(b, a, m), MappingMismatch);
    NodeMapping wrong_kind(b.size(), a.size());
    wrong_kind.add(1, 2);
    EXPECT_THROW(generate_actions(b, a, wrong_kind), MappingMismatch);
}

TEST(ApplyActions, EmptyScriptIsIdentity) {
    AstTree b = parse_module(read_file(data_dir() / "data/parser/constructs.py"));
    EXPECT_TRUE(isomorphic(apply_actions(b, {}), b));
}

TEST(ApplyActions, LiteralRoundTripEqualsReparse) {
    Diff d = diff("x = 1\n", "x = 2\n");
    AstTree out = apply_actions(d.before, d.script);
    EXPECT_EQ(dump(out), dump(parse_module("x = 2\n")));
}

TEST(ApplyActions, RejectsBrokenScripts) {
    AstTree b = parse_module("x = 1\n");
    EditAction bad;
    bad.kind = EditKind::Delete;
    bad.before = 99;
    EXPECT_THROW(apply_actions(b, {bad}), InvalidScript);

    Diff d = diff("x = 1\n", "x = 1\ny = 2\n");
    ASSERT_EQ(d.script.size(), 1u);
    auto script = d.script;
    script[0].position = 7;
    EXPECT_THROW(apply_actions(d.before, script), InvalidScript);

    EditAction stale;
    stale.kind = EditKind::Update;
    stale.node_kind = NodeKind::Constant;
    stale.before = 3;
    stale.old_label = "5";
    stale.new_label = "6";
    EXPECT_THROW(apply_actions(b, {stale}), InvalidScript);
}

TEST(Soundness, RandomMutationPairs) {
    auto start = std::chrono::steady_clock::now();
    std::size_t checked = 0, failures = 0;
    std::size_t kinds_seen[4] = {0, 0, 0, 0};
    for (std::uint64_t seed = 1; seed <= 600; ++seed) {
        actref::testing::TreeGenerator gen(seed);
        AstTree b(gen.program(20, 300));
        AstTree a(gen.mutate(b.to_builder(), 1 + static_cast<int>(seed % 6)));
        NodeMapping m = match_trees(b, a);
        expect_valid_mapping(b, a, m);
        auto script = generate_actions(b, a, m);
        for (const EditAction& x : script)
            ++kinds_seen[static_cast<int>(x.kind)];
        if (!isomorphic(apply_actions(b, script), a)) {
            ++failures;
            ADD_FAILURE() << "seed " << seed;
        }
        ++checked;
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_EQ(failures, 0u);
    EXPECT_GE(checked, 500u);
    // every action kind is exercised
    for (std::size_t k : kinds_seen)
        EXPECT_GT(k, 50u);
    EXPECT_LT(seconds, 60.0);
}

TEST(Soundness, ParsedSourcePairs) {
    std::string constructs = read_file(data_dir() / "data/parser/constructs.py");
    auto dir = data_dir() / "fixtures/keypoints_extract_method";
    std::string kp_b = read_file(dir / "before/imgaug/augmenters/size.py");
    std::string kp_a = read_file(dir / "after/imgaug/augmenters/size.py");
    for (auto [x, y] : {std::pair{constructs, kp_b}, std::pair{kp_a, constructs}, std::pair{kp_a, kp_b}}) {
        Diff d = diff(x, y);
        EXPECT_TRUE(isomorphic(apply_actions(d.before, d.script), d.after));
    }
}

TEST(Determinism, IdenticalInputsGiveIdenticalScripts) {
    for (std::uint64_t seed = 900; seed < 940; ++seed) {
        actref::testing::TreeGenerator gen(seed);
        AstTree b(gen.program(20, 200));
        AstTree a(gen.mutate(b.to_builder(), 4));
        auto s1 = generate_actions(b, a, match_trees(b, a));
        auto s2 = generate_actions(b, a, match_trees(b, a));
        EXPECT_EQ(s1, s2);
    }
}

TEST(Describe, MentionsKindsAndLabels) {
    Diff d = diff("x = 1\n", "x = 2\n");
    EXPECT_EQ(describe(d.script[0], d.before, d.after), "Update Constant '1' -> '2'@1");
}
