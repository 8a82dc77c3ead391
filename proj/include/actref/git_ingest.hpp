#pragma once

#include "actref/refactoring.hpp"
#include "actref/source_model.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace actref {

enum class GitErrorKind : std::uint8_t { RepoNotFound, BadRevision, CommitNotFound, MultipleParents, CommandFailed };
std::string_view to_string(GitErrorKind kind);

class GitError : public std::runtime_error {
public:
    GitError(GitErrorKind kind, const std::string& message);
    GitErrorKind kind() const { return kind_; }

private:
    GitErrorKind kind_;
};

struct IngestOptions {
    std::string source_suffix = ".py";
    bool include_merges = false;
    /// Larger blobs are skipped with a diagnostic.
    std::size_t max_file_bytes = 1u << 20;
};

struct CommitFileSets {
    std::string commit; // full hash
    std::string parent; // "" for a root commit
    std::vector<SourceFile> before_set;
    std::vector<SourceFile> after_set;
    std::vector<Diagnostic> diagnostics;
};

/// selection: "all", "@file" (one revision per line), "a..b", or one revision.
/// Oldest first; merges dropped unless include_merges.
std::vector<std::string> enumerate_commits(const std::string& repo, const std::string& selection,
                                           const IngestOptions& options = {});

/// Changed source files of a commit against its (first) parent. Rename
/// detection is off: a relocation shows up as one deletion and one addition.
CommitFileSets commit_filesets(const std::string& repo, const std::string& commit, const IngestOptions& options = {});

} // namespace actref
