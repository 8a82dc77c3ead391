#pragma once

#include "actref/refactoring.hpp"
#include "actref/source_model.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace actref {

class TokenMultiset {
public:
    using Counts = std::map<std::string, std::uint32_t, std::less<>>;

    TokenMultiset() = default;
    TokenMultiset(std::initializer_list<std::string_view> tokens);

    void add(std::string_view token, std::uint32_t n = 1);
    std::size_t size() const { return total_; }
    bool empty() const { return total_ == 0; }
    std::uint32_t count(std::string_view token) const;
    const Counts& counts() const { return counts_; }

    std::size_t intersection_size(const TokenMultiset& other) const;
    /// Multiset difference: counts clipped at zero.
    TokenMultiset minus(const TokenMultiset& other) const;
    TokenMultiset& operator+=(const TokenMultiset& other);

    friend bool operator==(const TokenMultiset& a, const TokenMultiset& b) {
        return a.total_ == b.total_ && a.counts_ == b.counts_;
    }

private:
    Counts counts_;
    std::size_t total_ = 0;
};

inline constexpr std::string_view kStringToken = "<STR>";
inline constexpr std::string_view kNumberToken = "<NUM>";

/// Lexical tokens; literals collapse to placeholders, comments and layout vanish.
TokenMultiset tokenize_normalized(std::string_view text);

/// Dice coefficient over multisets; two empty multisets give 1.
double token_similarity(const TokenMultiset& a, const TokenMultiset& b);

/// Tokens of a node's source text, or of its labels when the tree has no source.
TokenMultiset node_tokens(const AstTree& tree, NodeId id);

enum class SliceKind : std::uint8_t { Class, Method, StatementRun };
std::string_view to_string(SliceKind kind);

struct CodeSlice {
    std::string file;
    SliceKind kind = SliceKind::StatementRun;
    std::string name;     // declaration name, "" for statement runs
    std::string text;
    TokenMultiset tokens;
    Span span;
    bool imports_only = false;
};

std::vector<CodeSlice> slices_of(const SourceFile& file);
std::vector<CodeSlice> slices_of(const AstTree& tree, const std::string& file);

/// A file from the opposite side of the commit, with its own other version when it has one.
struct CounterpartFile {
    SourceFile file;
    std::optional<SourceFile> opposite;
};

bool is_move_slice(const CodeSlice& slice, std::span<const CounterpartFile> counterparts, double floor = 0.8);
/// Counterparts without other versions: each of their slices counts as removed.
bool is_move_slice(const CodeSlice& slice, const std::vector<SourceFile>& counterpart_files, double floor = 0.8);

struct ModuleLevelOptions {
    double file_pair_floor = 0.6;
    double slice_move_floor = 0.8;
};

struct FilePairing {
    std::vector<std::pair<SourceFile, SourceFile>> paired;
    std::vector<SourceFile> unpaired_deleted;
    std::vector<SourceFile> unpaired_inserted;
    /// Unpaired files explained by Extract/Inline Module; kept out of the unpaired lists.
    std::vector<SourceFile> inlined_modules;
    std::vector<SourceFile> extracted_modules;
    std::vector<RefactoringInstance> module_refactorings;
    std::vector<Diagnostic> diagnostics;
};

FilePairing pair_files(const std::vector<SourceFile>& before_set, const std::vector<SourceFile>& after_set,
                       const ModuleLevelOptions& options = {});

/// Module element of a file ("pkg/mod.py" -> "pkg.mod").
ElementLocator module_locator(const SourceFile& file);

} // namespace actref
