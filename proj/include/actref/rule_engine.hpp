#pragma once

#include "actref/action_refine.hpp"
#include "actref/refactoring.hpp"
#include "actref/tree_diff.hpp"

#include <memory>
#include <string>
#include <vector>

namespace actref {

struct RuleOptions {
    double extract_floor = 0.6;
    double move_floor = 0.7;
    std::size_t rename_use_min = 1;
    /// Candidate pairs examined by one context; 0 = unlimited.
    std::size_t max_candidate_pairs = 0;
    RefineOptions refine;
};

/// Both versions of one file plus the node-level diff between them. A missing
/// side is an empty module (just the root).
struct FileDiff {
    std::string before_path;
    std::string after_path;
    std::shared_ptr<const AstTree> before;
    std::shared_ptr<const AstTree> after;
    NodeMapping mapping;
    std::vector<EditAction> script;
};

/// Parses nothing: diffs two already parsed trees.
std::shared_ptr<FileDiff> diff_trees(std::shared_ptr<const AstTree> before, std::shared_ptr<const AstTree> after,
                                     const MatcherOptions& matcher = {});
/// Tree holding only a module root, used for a side that does not exist.
std::shared_ptr<const AstTree> empty_module(const std::string& path);

/// Element actions of one or more file diffs and their consumption state.
class RuleContext {
public:
    explicit RuleContext(RuleOptions options = {}) : options_(options) {}

    std::size_t add_file(std::shared_ptr<const FileDiff> diff);
    /// Returns the action's index in this context.
    std::size_t add_action(std::size_t file, ElementAction action);

    const RuleOptions& options() const { return options_; }
    std::size_t file_count() const { return files_.size(); }
    const FileDiff& file(std::size_t i) const { return *files_[i]; }
    std::size_t action_count() const { return actions_.size(); }
    const ElementAction& action(std::size_t i) const { return actions_[i]; }
    std::size_t file_of(std::size_t action) const { return file_of_[action]; }
    bool consumed(std::size_t action) const { return consumed_[action]; }
    void consume(std::size_t action) { consumed_[action] = 1; }

    /// Counts one candidate pair; false once the budget is spent.
    bool spend_candidate();
    bool budget_exhausted() const { return exhausted_; }
    std::size_t candidates_examined() const { return candidates_; }

    /// Unconsumed Insert/Delete actions of declarations.
    std::vector<std::size_t> remaining_declaration_actions() const;

private:
    RuleOptions options_;
    std::vector<std::shared_ptr<const FileDiff>> files_;
    std::vector<ElementAction> actions_;
    std::vector<std::size_t> file_of_;
    std::vector<char> consumed_;
    std::size_t candidates_ = 0;
    bool exhausted_ = false;
};

std::vector<RefactoringInstance> match_rename_rules(RuleContext& context);
std::vector<RefactoringInstance> match_move_rules(RuleContext& context);
std::vector<RefactoringInstance> match_extract_rules(RuleContext& context);
std::vector<RefactoringInstance> match_inline_rules(RuleContext& context);

enum class RuleStage : std::uint8_t {
    IntraFile, // all rules
    CrossFile, // declaration moves, extract/inline of methods and classes
};

/// Rename, then Move, then Extract, then Inline.
std::vector<RefactoringInstance> apply_rules(RuleContext& context, RuleStage stage = RuleStage::IntraFile);

enum class SubjectKind : std::uint8_t { Module, Class, Method, Variable, Statement, Expression };
std::string_view to_string(SubjectKind kind);

SubjectKind classify_action_subject(const ElementAction& action);
SubjectKind classify_action_subject(const EditAction& action, const AstTree& before, const AstTree& after);

} // namespace actref
