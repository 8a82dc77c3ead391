#include "actref/refactoring.hpp"

#include <cctype>

namespace actref {

std::string_view to_string(RefactoringType type) {
    switch (type) {
    case RefactoringType::ExtractModule:
        return "Extract Module";
    case RefactoringType::ExtractClass:
        return "Extract Class";
    case RefactoringType::ExtractMethod:
        return "Extract Method";
    case RefactoringType::ExtractVariable:
        return "Extract Variable";
    case RefactoringType::InlineModule:
        return "Inline Module";
    case RefactoringType::InlineClass:
        return "Inline Class";
    case RefactoringType::InlineMethod:
        return "Inline Method";
    case RefactoringType::InlineVariable:
        return "Inline Variable";
    case RefactoringType::MoveModule:
        return "Move Module";
    case RefactoringType::MoveClass:
        return "Move Class";
    case RefactoringType::MoveMethod:
        return "Move Method";
    case RefactoringType::RenameModule:
        return "Rename Module";
    case RefactoringType::RenameClass:
        return "Rename Class";
    case RefactoringType::RenameMethod:
        return "Rename Method";
    case RefactoringType::RenameVariable:
        return "Rename Variable";
    }
    return "?";
}

// "Extract Method", "ExtractMethod", "extract_method" and "extract-method" all parse.
std::optional<RefactoringType> refactoring_type_from_string(std::string_view name) {
    auto squash = [](std::string_view s) {
        std::string out;
        for (char c : s)
            if (c != ' ' && c != '_' && c != '-')
                out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    };
    std::string key = squash(name);
    for (RefactoringType t : kAllRefactoringTypes)
        if (squash(to_string(t)) == key)
            return t;
    return std::nullopt;
}

ElementKind subject_kind(RefactoringType type) {
    switch (type) {
    case RefactoringType::ExtractModule:
    case RefactoringType::InlineModule:
    case RefactoringType::MoveModule:
    case RefactoringType::RenameModule:
        return ElementKind::Module;
    case RefactoringType::ExtractClass:
    case RefactoringType::InlineClass:
    case RefactoringType::MoveClass:
    case RefactoringType::RenameClass:
        return ElementKind::Class;
    case RefactoringType::ExtractMethod:
    case RefactoringType::InlineMethod:
    case RefactoringType::MoveMethod:
    case RefactoringType::RenameMethod:
        return ElementKind::Method;
    default:
        return ElementKind::Variable;
    }
}

ElementLocator locate(const CodeElement& element) {
    return ElementLocator{element.file, element.qualified_name, element.span, element.kind};
}

std::string default_description(const RefactoringInstance& instance) {
    auto side = [](const std::optional<ElementLocator>& loc) {
        if (!loc)
            return std::string("-");
        if (loc->kind == ElementKind::Module)
            return loc->file;
        return loc->qualified_name + " (" + loc->file + ")";
    };
    return std::string(to_string(instance.type)) + " " + side(instance.before) + " -> " + side(instance.after);
}

} // namespace actref
