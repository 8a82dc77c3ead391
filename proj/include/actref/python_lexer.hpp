#pragma once

#include "actref/source_model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace actref {

enum class TokenKind : std::uint8_t {
    Name,
    Number,
    String,
    FString,
    Op,
    Newline,
    Indent,
    Dedent,
    EndMarker,
};

struct Token {
    TokenKind kind = TokenKind::EndMarker;
    std::string_view text;
    Position begin;
    Position end;
};

struct LexOptions {
    /// Track indentation and emit Newline/Indent/Dedent tokens.
    bool layout = true;
    /// Never throw: unterminated strings run to end of input, unknown
    /// characters become single-character Op tokens.
    bool lenient = false;
};

/// Tokenizes Python 3 source. Comments and non-logical whitespace are
/// dropped. The returned views point into `source`.
std::vector<Token> tokenize(std::string_view source, const LexOptions& options = {},
                            const std::string& path = "<string>");

} // namespace actref
