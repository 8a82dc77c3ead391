#pragma once

#include "actref/module_level.hpp"
#include "actref/rule_engine.hpp"

#include <set>
#include <string>
#include <vector>

namespace actref {

struct PipelineOptions {
    ModuleLevelOptions module;
    MatcherOptions matcher;
    RuleOptions rules;
    /// Candidate pairs examined by the cross-file stage of one commit; 0 = unlimited.
    std::size_t max_cross_candidates = 10000;
    bool cross_file = true;
    /// Reported types; empty keeps all.
    std::set<RefactoringType> types;
    /// Worker threads for per-pair diffing (1 = inline).
    unsigned threads = 1;
};

struct IntraFileResult {
    std::vector<RefactoringInstance> instances;
    /// Unconsumed element Insert/Delete actions, handed to the cross-file stage.
    std::vector<ElementAction> remaining;
    /// Null when either side failed to parse.
    std::shared_ptr<const FileDiff> diff;
    std::size_t action_count = 0;
    std::vector<Diagnostic> diagnostics;
};

/// Ids of the produced element actions start at first_id.
IntraFileResult detect_intra_file(const SourceFile& before, const SourceFile& after, const PipelineOptions& options = {},
                                  std::size_t first_id = 0);

struct CrossFileResult {
    std::vector<RefactoringInstance> instances;
    std::vector<Diagnostic> diagnostics;
    std::size_t action_count = 0; // actions created for unpaired files
    std::size_t candidates_examined = 0;
    bool budget_exhausted = false;
};

/// Unpaired files become whole-file Delete/Insert actions and meet the
/// leftovers of the intra-file stage.
CrossFileResult detect_cross_file(const std::vector<SourceFile>& unpaired_deleted,
                                  const std::vector<SourceFile>& unpaired_inserted,
                                  const std::vector<IntraFileResult>& remaining, const PipelineOptions& options = {},
                                  std::size_t first_id = 0);

struct StageTiming {
    double module_ms = 0;
    double intra_ms = 0;
    double cross_ms = 0;
    double total_ms = 0;
};

struct CommitAnalysis {
    std::string commit;
    FilePairing pairing;
    std::vector<RefactoringInstance> intra;
    std::vector<RefactoringInstance> cross;
    std::vector<RefactoringInstance> module;
    std::vector<Diagnostic> diagnostics;
    StageTiming timing;
    /// Element actions created for this commit; evidence ids lie below it.
    std::size_t action_count = 0;
    std::size_t cross_candidates = 0;

    /// module, intra, cross without repeated (type, before, after).
    std::vector<RefactoringInstance> results() const;
};

CommitAnalysis detect_commit(const std::vector<SourceFile>& before_set, const std::vector<SourceFile>& after_set,
                             const PipelineOptions& options = {}, const std::string& commit = {});

} // namespace actref
