#pragma once

#include "actref/source_model.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace actref {

enum class RefactoringType : std::uint8_t {
    ExtractModule,
    ExtractClass,
    ExtractMethod,
    ExtractVariable,
    InlineModule,
    InlineClass,
    InlineMethod,
    InlineVariable,
    MoveModule,
    MoveClass,
    MoveMethod,
    RenameModule,
    RenameClass,
    RenameMethod,
    RenameVariable,
};

inline constexpr std::array<RefactoringType, 15> kAllRefactoringTypes = {
    RefactoringType::ExtractModule,  RefactoringType::ExtractClass,  RefactoringType::ExtractMethod,
    RefactoringType::ExtractVariable, RefactoringType::InlineModule, RefactoringType::InlineClass,
    RefactoringType::InlineMethod,   RefactoringType::InlineVariable, RefactoringType::MoveModule,
    RefactoringType::MoveClass,      RefactoringType::MoveMethod,    RefactoringType::RenameModule,
    RefactoringType::RenameClass,    RefactoringType::RenameMethod,  RefactoringType::RenameVariable,
};

/// "Extract Method", "Move Module", ...
std::string_view to_string(RefactoringType type);
std::optional<RefactoringType> refactoring_type_from_string(std::string_view name);
/// Kind of element the type talks about (Module, Class, Method or Variable).
ElementKind subject_kind(RefactoringType type);

struct ElementLocator {
    std::string file;
    std::string qualified_name;
    Span span;
    ElementKind kind = ElementKind::Module;

    friend bool operator==(const ElementLocator& a, const ElementLocator& b) {
        return a.file == b.file && a.qualified_name == b.qualified_name && a.kind == b.kind;
    }
};

ElementLocator locate(const CodeElement& element);

/// Non-fatal problem tied to one file (syntax errors, skipped inputs).
struct Diagnostic {
    std::string file;
    std::string message;
    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct RefactoringInstance {
    RefactoringType type = RefactoringType::MoveModule;
    std::optional<ElementLocator> before;
    std::optional<ElementLocator> after;
    std::string description;
    std::vector<std::size_t> evidence; // ElementAction ids
    std::string commit;

    /// (type, before, after) identity used for de-duplication and comparison.
    bool same_subject(const RefactoringInstance& other) const {
        return type == other.type && before == other.before && after == other.after;
    }
};

/// Default one-line description: "Extract Method a.f -> a.g".
std::string default_description(const RefactoringInstance& instance);

} // namespace actref
