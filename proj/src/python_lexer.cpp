#include "actref/python_lexer.hpp"

#include <array>
#include <cctype>

namespace actref {
namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

constexpr std::array<std::string_view, 47> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", ">>", "<<", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "+",   "-",   "*",   "/",   "%",   "@",  "&",  "|",  "^",  "~",  "<",  ">",
    "(",   ")",   "[",   "]",   "{",   "}",  ",",  ":",  ".",  ";",  "=",
};

bool valid_string_prefix(std::string_view p) {
    if (p.size() > 2)
        return false;
    std::string lower;
    for (char c : p)
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return lower.empty() || lower == "r" || lower == "u" || lower == "b" || lower == "f" ||
           lower == "br" || lower == "rb" || lower == "fr" || lower == "rf";
}

class Lexer {
public:
    Lexer(std::string_view src, const LexOptions& opts, const std::string& path)
        : src_(src), opts_(opts), path_(path) {}

    std::vector<Token> run() {
        indents_.push_back(0);
        at_line_start_ = true;
        while (true) {
            if (opts_.layout && at_line_start_ && depth_ == 0) {
                if (!handle_indentation())
                    break;
            }
            skip_inline_space();
            if (eof())
                break;
            char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n')
                    advance();
                continue;
            }
            if (c == '\n') {
                advance();
                if (opts_.layout && depth_ == 0 && line_has_tokens_) {
                    push(TokenKind::Newline, pos_before_newline_, pos_before_newline_);
                    line_has_tokens_ = false;
                }
                if (depth_ == 0)
                    at_line_start_ = true;
                continue;
            }
            if (c == '\\') {
                Position p = here();
                advance();
                if (!eof() && peek() == '\n') {
                    advance();
                    continue;
                }
                if (!opts_.lenient)
                    fail(p.line, "unexpected character after line continuation");
                push(TokenKind::Op, p, here());
                continue;
            }
            lex_token();
        }
        if (opts_.layout) {
            if (line_has_tokens_)
                push(TokenKind::Newline, here(), here());
            while (indents_.size() > 1) {
                indents_.pop_back();
                push(TokenKind::Dedent, here(), here());
            }
        }
        push(TokenKind::EndMarker, here(), here());
        return std::move(tokens_);
    }

private:
    bool eof() const { return i_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }
    Position here() const { return Position{line_, col_, static_cast<std::uint32_t>(i_)}; }

    void advance() {
        if (src_[i_] == '\n') {
            pos_before_newline_ = here();
            ++line_;
            col_ = 0;
        } else {
            ++col_;
        }
        ++i_;
    }

    [[noreturn]] void fail(std::uint32_t line, const std::string& msg) { throw SyntaxError(path_, line, msg); }

    void push(TokenKind kind, Position b, Position e) {
        tokens_.push_back(Token{kind, src_.substr(b.offset, e.offset - b.offset), b, e});
    }

    void skip_inline_space() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\f' || peek() == '\r'))
            advance();
    }

    // Returns false at end of input.
    bool handle_indentation() {
        while (true) {
            std::uint32_t width = 0;
            while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\f' || peek() == '\r')) {
                if (peek() == '\t')
                    width = (width / 8 + 1) * 8;
                else if (peek() == ' ')
                    ++width;
                advance();
            }
            if (eof())
                return false;
            if (peek() == '#') {
                while (!eof() && peek() != '\n')
                    advance();
            }
            if (eof())
                return false;
            if (peek() == '\n') {
                advance();
                continue;
            }
            if (peek() == '\\' && peek(1) == '\n' && !opts_.lenient)
                fail(line_, "unexpected line continuation at line start");
            at_line_start_ = false;
            if (width > indents_.back()) {
                indents_.push_back(width);
                push(TokenKind::Indent, here(), here());
            } else {
                while (width < indents_.back()) {
                    indents_.pop_back();
                    push(TokenKind::Dedent, here(), here());
                }
                if (width != indents_.back()) {
                    if (!opts_.lenient)
                        fail(line_, "unindent does not match any outer indentation level");
                    indents_.push_back(width);
                }
            }
            return true;
        }
    }

    void lex_token() {
        Position b = here();
        unsigned char c = static_cast<unsigned char>(peek());
        line_has_tokens_ = true;
        if (is_ident_start(c)) {
            std::size_t j = i_;
            while (j < src_.size() && is_ident_char(static_cast<unsigned char>(src_[j])))
                ++j;
            std::string_view word = src_.substr(i_, j - i_);
            if (j < src_.size() && (src_[j] == '\'' || src_[j] == '"') && valid_string_prefix(word)) {
                lex_string(b, word);
                return;
            }
            while (i_ < j)
                advance();
            push(TokenKind::Name, b, here());
            return;
        }
        if (c == '\'' || c == '"') {
            lex_string(b, {});
            return;
        }
        if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            lex_number(b);
            return;
        }
        for (std::string_view op : kOperators) {
            if (src_.substr(i_, op.size()) == op) {
                for (std::size_t k = 0; k < op.size(); ++k)
                    advance();
                if (op == "(" || op == "[" || op == "{")
                    ++depth_;
                else if ((op == ")" || op == "]" || op == "}") && depth_ > 0)
                    --depth_;
                push(TokenKind::Op, b, here());
                return;
            }
        }
        if (!opts_.lenient)
            fail(line_, std::string("invalid character '") + static_cast<char>(c) + "'");
        advance();
        push(TokenKind::Op, b, here());
    }

    void lex_string(Position b, std::string_view prefix) {
        bool fstring = false;
        for (char p : prefix)
            fstring = fstring || p == 'f' || p == 'F';
        for (std::size_t k = 0; k < prefix.size(); ++k)
            advance();
        char q = peek();
        bool triple = peek(1) == q && peek(2) == q;
        std::size_t qlen = triple ? 3 : 1;
        for (std::size_t k = 0; k < qlen; ++k)
            advance();
        while (true) {
            if (eof()) {
                if (!opts_.lenient)
                    fail(b.line, "unterminated string literal");
                break;
            }
            char c = peek();
            if (c == '\\') {
                advance();
                if (!eof())
                    advance();
                continue;
            }
            if (c == '\n' && !triple) {
                if (!opts_.lenient)
                    fail(b.line, "unterminated string literal");
                break;
            }
            if (c == q && (!triple || (peek(1) == q && peek(2) == q))) {
                for (std::size_t k = 0; k < qlen; ++k)
                    advance();
                break;
            }
            advance();
        }
        push(fstring ? TokenKind::FString : TokenKind::String, b, here());
    }

    void lex_number(Position b) {
        auto digits = [&](auto pred) {
            while (!eof() && (pred(static_cast<unsigned char>(peek())) || peek() == '_'))
                advance();
        };
        auto dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
            advance(), advance();
            digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
        } else if (peek() == '0' && (peek(1) == 'o' || peek(1) == 'O')) {
            advance(), advance();
            digits([](unsigned char ch) { return ch >= '0' && ch <= '7'; });
        } else if (peek() == '0' && (peek(1) == 'b' || peek(1) == 'B')) {
            advance(), advance();
            digits([](unsigned char ch) { return ch == '0' || ch == '1'; });
        } else {
            std::size_t start = i_;
            digits(dec);
            std::string_view intpart = src_.substr(start, i_ - start);
            bool is_float = false;
            if (peek() == '.') {
                is_float = true;
                advance();
                digits(dec);
            }
            if (peek() == 'e' || peek() == 'E') {
                std::size_t save_i = i_;
                auto save_line = line_, save_col = col_;
                advance();
                if (peek() == '+' || peek() == '-')
                    advance();
                if (std::isdigit(static_cast<unsigned char>(peek()))) {
                    is_float = true;
                    digits(dec);
                } else {
                    i_ = save_i, line_ = save_line, col_ = save_col;
                }
            }
            bool imag = peek() == 'j' || peek() == 'J';
            if (imag)
                advance();
            if (!is_float && !imag && intpart.size() > 1 && intpart[0] == '0' && !opts_.lenient) {
                for (char ch : intpart)
                    if (ch != '0' && ch != '_')
                        fail(b.line, "leading zeros in decimal integer literals are not permitted");
            }
        }
        if (!eof() && is_ident_start(static_cast<unsigned char>(peek())) && !opts_.lenient)
            fail(b.line, "invalid numeric literal");
        push(TokenKind::Number, b, here());
    }

    std::string_view src_;
    LexOptions opts_;
    const std::string& path_;
    std::size_t i_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 0;
    Position pos_before_newline_;
    int depth_ = 0;
    bool at_line_start_ = true;
    bool line_has_tokens_ = false;
    std::vector<std::uint32_t> indents_;
    std::vector<Token> tokens_;
};

} // namespace

std::vector<Token> tokenize(std::string_view source, const LexOptions& options, const std::string& path) {
    return Lexer(source, options, path).run();
}

} // namespace actref
