#include "actref/module_level.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <set>
#include <tuple>

namespace actref {

TokenMultiset::TokenMultiset(std::initializer_list<std::string_view> tokens) {
    for (auto t : tokens)
        add(t);
}

void TokenMultiset::add(std::string_view token, std::uint32_t n) {
    if (n == 0)
        return;
    auto it = counts_.find(token);
    if (it == counts_.end())
        counts_.emplace(std::string(token), n);
    else
        it->second += n;
    total_ += n;
}

std::uint32_t TokenMultiset::count(std::string_view token) const {
    auto it = counts_.find(token);
    return it == counts_.end() ? 0 : it->second;
}

std::size_t TokenMultiset::intersection_size(const TokenMultiset& other) const {
    const auto& small = counts_.size() <= other.counts_.size() ? counts_ : other.counts_;
    const auto& large = &small == &counts_ ? other.counts_ : counts_;
    std::size_t n = 0;
    for (const auto& [tok, c] : small) {
        auto it = large.find(tok);
        if (it != large.end())
            n += std::min(c, it->second);
    }
    return n;
}

TokenMultiset TokenMultiset::minus(const TokenMultiset& other) const {
    TokenMultiset out;
    for (const auto& [tok, c] : counts_) {
        std::uint32_t o = other.count(tok);
        if (c > o)
            out.add(tok, c - o);
    }
    return out;
}

TokenMultiset& TokenMultiset::operator+=(const TokenMultiset& other) {
    for (const auto& [tok, c] : other.counts_)
        add(tok, c);
    return *this;
}

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool string_prefix(std::string_view p) {
    std::string lower;
    for (char c : p)
        lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    static const std::set<std::string> prefixes = {"r", "u", "b", "f", "br", "rb", "fr", "rf"};
    return prefixes.count(lower) > 0;
}

// Index just past a string literal whose opening quote is at i.
std::size_t skip_string(std::string_view s, std::size_t i) {
    char q = s[i];
    bool triple = i + 2 < s.size() && s[i + 1] == q && s[i + 2] == q;
    std::size_t j = i + (triple ? 3 : 1);
    while (j < s.size()) {
        if (s[j] == '\\') {
            j += 2;
            continue;
        }
        if (triple) {
            if (s.substr(j, 3) == std::string(3, q))
                return j + 3;
        } else if (s[j] == q) {
            return j + 1;
        } else if (s[j] == '\n') {
            return j; // unterminated single-quoted string
        }
        ++j;
    }
    return s.size();
}

std::size_t skip_number(std::string_view s, std::size_t i) {
    std::size_t j = i;
    if (s[j] == '0' && j + 1 < s.size() && std::strchr("xXoObB", s[j + 1])) {
        j += 2;
        while (j < s.size() && (std::isxdigit(static_cast<unsigned char>(s[j])) || s[j] == '_'))
            ++j;
        return j;
    }
    while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.'))
        ++j;
    if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-'))
            ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
            j = k;
            while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '_'))
                ++j;
        }
    }
    if (j < s.size() && (s[j] == 'j' || s[j] == 'J'))
        ++j;
    return j;
}

constexpr std::string_view kOps3[] = {"**=", "//=", ">>=", "<<=", "..."};
constexpr std::string_view kOps2[] = {"**", "//", "<<", ">>", "<=", ">=", "==", "!=", "->", "+=", "-=",
                                      "*=", "/=", "%=", "&=", "|=", "^=", "@=", ":="};

} // namespace

TokenMultiset tokenize_normalized(std::string_view s) {
    TokenMultiset out;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c) || c == '\\') {
            ++i;
        } else if (c == '#') {
            while (i < s.size() && s[i] != '\n')
                ++i;
        } else if (c == '"' || c == '\'') {
            i = skip_string(s, i);
            out.add(kStringToken);
        } else if (ident_start(c)) {
            std::size_t j = i;
            while (j < s.size() && ident_char(static_cast<unsigned char>(s[j])))
                ++j;
            if (j < s.size() && (s[j] == '"' || s[j] == '\'') && string_prefix(s.substr(i, j - i))) {
                i = skip_string(s, j);
                out.add(kStringToken);
            } else {
                out.add(s.substr(i, j - i));
                i = j;
            }
        } else if (std::isdigit(c) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            i = skip_number(s, i);
            out.add(kNumberToken);
        } else {
            std::size_t len = 1;
            for (auto op : kOps3)
                if (s.substr(i, 3) == op)
                    len = 3;
            if (len == 1)
                for (auto op : kOps2)
                    if (s.substr(i, 2) == op)
                        len = 2;
            out.add(s.substr(i, len));
            i += len;
        }
    }
    return out;
}

double token_similarity(const TokenMultiset& a, const TokenMultiset& b) {
    if (a.empty() && b.empty())
        return 1.0;
    return 2.0 * static_cast<double>(a.intersection_size(b)) / static_cast<double>(a.size() + b.size());
}

TokenMultiset node_tokens(const AstTree& tree, NodeId id) {
    std::string_view src = tree.source();
    if (!src.empty()) {
        std::string_view text = node_text(tree, id, src);
        if (!text.empty() || tree[id].span.begin.offset == tree[id].span.end.offset)
            return tokenize_normalized(text);
    }
    TokenMultiset out;
    for (NodeId n = id; n < id + tree.subtree_size(id); ++n) {
        const AstNode& node = tree[n];
        if (node.kind == NodeKind::Constant)
            out.add(!node.label.empty() && (node.label[0] == '\'' || node.label[0] == '"') ? kStringToken
                                                                                           : kNumberToken);
        else if (!node.label.empty())
            out.add(node.label);
        else
            out.add(to_string(node.kind));
    }
    return out;
}

std::string_view to_string(SliceKind kind) {
    switch (kind) {
    case SliceKind::Class:
        return "Class";
    case SliceKind::Method:
        return "Method";
    case SliceKind::StatementRun:
        return "StatementRun";
    }
    return "?";
}

std::vector<CodeSlice> slices_of(const AstTree& tree, const std::string& file) {
    std::vector<CodeSlice> out;
    if (tree.empty())
        return out;
    std::string_view src = tree.source();
    auto text_of = [&](const Span& span) {
        if (span.end.offset > src.size() || span.begin.offset > span.end.offset)
            return std::string();
        return std::string(src.substr(span.begin.offset, span.end.offset - span.begin.offset));
    };
    const auto& top = tree[tree.root()].children;
    std::size_t i = 0;
    while (i < top.size()) {
        const AstNode& n = tree[top[i]];
        CodeSlice slice;
        slice.file = file;
        if (is_declaration_kind(n.kind)) {
            slice.kind = n.kind == NodeKind::ClassDef ? SliceKind::Class : SliceKind::Method;
            slice.name = n.label;
            slice.span = n.span;
            ++i;
        } else {
            slice.kind = SliceKind::StatementRun;
            slice.span = n.span;
            slice.imports_only = true;
            while (i < top.size() && !is_declaration_kind(tree[top[i]].kind)) {
                const AstNode& s = tree[top[i]];
                slice.span.end = s.span.end;
                if (s.kind != NodeKind::Import && s.kind != NodeKind::ImportFrom)
                    slice.imports_only = false;
                ++i;
            }
        }
        slice.text = text_of(slice.span);
        slice.tokens = src.empty() ? TokenMultiset() : tokenize_normalized(slice.text);
        out.push_back(std::move(slice));
    }
    return out;
}

std::vector<CodeSlice> slices_of(const SourceFile& file) { return slices_of(parse_module(file), file.path); }

ElementLocator module_locator(const SourceFile& file) {
    ElementLocator loc;
    loc.file = file.path;
    loc.qualified_name = file.module_name();
    loc.kind = ElementKind::Module;
    return loc;
}

namespace {

struct SlicedFile {
    const SourceFile* file = nullptr;
    std::vector<CodeSlice> slices;
    bool has_opposite = false;
    std::vector<CodeSlice> opposite;
};

// Counterpart slice removed on its own side: no slice of its other version resembles it.
bool removed(const CodeSlice& s, const SlicedFile& owner, double floor) {
    if (!owner.has_opposite)
        return true;
    return std::none_of(owner.opposite.begin(), owner.opposite.end(),
                        [&](const CodeSlice& o) { return token_similarity(s.tokens, o.tokens) >= floor; });
}

// File providing the first counterpart that explains `slice`, or nullptr.
const SlicedFile* move_source(const CodeSlice& slice, const std::vector<SlicedFile>& counterparts, double floor) {
    for (const SlicedFile& f : counterparts)
        for (const CodeSlice& s : f.slices)
            if (token_similarity(slice.tokens, s.tokens) >= floor && removed(s, f, floor))
                return &f;
    return nullptr;
}

} // namespace

bool is_move_slice(const CodeSlice& slice, std::span<const CounterpartFile> counterparts, double floor) {
    std::vector<SlicedFile> sliced;
    for (const CounterpartFile& c : counterparts) {
        SlicedFile f;
        f.file = &c.file;
        try {
            f.slices = slices_of(c.file);
            if (c.opposite) {
                f.has_opposite = true;
                f.opposite = slices_of(*c.opposite);
            }
        } catch (const SyntaxError&) {
            continue;
        }
        sliced.push_back(std::move(f));
    }
    return move_source(slice, sliced, floor) != nullptr;
}

bool is_move_slice(const CodeSlice& slice, const std::vector<SourceFile>& counterpart_files, double floor) {
    std::vector<CounterpartFile> cs;
    for (const auto& f : counterpart_files)
        cs.push_back(CounterpartFile{f, std::nullopt});
    return is_move_slice(slice, cs, floor);
}

namespace {

// Extract Module (inserted side) / Inline Module (deleted side) check for one file.
// Returns the counterpart file that contributed most slices, or nullptr.
const SourceFile* module_split_source(const std::vector<CodeSlice>& slices, const std::vector<SlicedFile>& counterparts,
                                      double floor) {
    std::map<std::string, std::pair<std::size_t, const SourceFile*>> votes;
    std::size_t considered = 0;
    for (const CodeSlice& s : slices) {
        if (s.kind == SliceKind::StatementRun && s.imports_only)
            continue;
        ++considered;
        const SlicedFile* src = move_source(s, counterparts, floor);
        if (!src)
            return nullptr;
        auto& v = votes[src->file->path];
        ++v.first;
        v.second = src->file;
    }
    if (considered == 0)
        return nullptr;
    const SourceFile* best = nullptr;
    std::size_t best_votes = 0;
    for (const auto& [path, v] : votes) // map order: ties go to the smaller path
        if (v.first > best_votes) {
            best_votes = v.first;
            best = v.second;
        }
    return best;
}

} // namespace

FilePairing pair_files(const std::vector<SourceFile>& before_set, const std::vector<SourceFile>& after_set,
                       const ModuleLevelOptions& options) {
    FilePairing out;
    std::vector<const SourceFile*> before, after;
    for (const auto& f : before_set)
        before.push_back(&f);
    for (const auto& f : after_set)
        after.push_back(&f);
    auto by_path = [](const SourceFile* x, const SourceFile* y) { return x->path < y->path; };
    std::sort(before.begin(), before.end(), by_path);
    std::sort(after.begin(), after.end(), by_path);

    std::vector<bool> b_used(before.size()), a_used(after.size());
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    // phase 1: same path
    {
        std::map<std::string, std::size_t> after_index;
        for (std::size_t j = 0; j < after.size(); ++j)
            after_index.emplace(after[j]->path, j);
        for (std::size_t i = 0; i < before.size(); ++i) {
            auto it = after_index.find(before[i]->path);
            if (it != after_index.end() && !a_used[it->second]) {
                b_used[i] = a_used[it->second] = true;
                pairs.emplace_back(i, it->second);
            }
        }
    }

    // phase 2: content similarity over the remaining cross pairs
    {
        std::vector<TokenMultiset> bt(before.size()), at(after.size());
        for (std::size_t i = 0; i < before.size(); ++i)
            if (!b_used[i])
                bt[i] = tokenize_normalized(before[i]->content);
        for (std::size_t j = 0; j < after.size(); ++j)
            if (!a_used[j])
                at[j] = tokenize_normalized(after[j]->content);
        std::vector<std::tuple<double, std::size_t, std::size_t>> cands;
        for (std::size_t i = 0; i < before.size(); ++i) {
            if (b_used[i])
                continue;
            for (std::size_t j = 0; j < after.size(); ++j) {
                if (a_used[j])
                    continue;
                double sim = token_similarity(bt[i], at[j]);
                if (sim >= options.file_pair_floor)
                    cands.emplace_back(sim, i, j);
            }
        }
        // indices follow path order, so ties fall back to lexicographic paths
        std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
            if (std::get<0>(x) != std::get<0>(y))
                return std::get<0>(x) > std::get<0>(y);
            return std::make_pair(std::get<1>(x), std::get<2>(x)) < std::make_pair(std::get<1>(y), std::get<2>(y));
        });
        for (auto [sim, i, j] : cands) {
            if (b_used[i] || a_used[j])
                continue;
            b_used[i] = a_used[j] = true;
            pairs.emplace_back(i, j);
            RefactoringInstance r;
            r.type = before[i]->directory() != after[j]->directory() ? RefactoringType::MoveModule
                                                                     : RefactoringType::RenameModule;
            r.before = module_locator(*before[i]);
            r.after = module_locator(*after[j]);
            r.description = default_description(r);
            out.module_refactorings.push_back(std::move(r));
        }
    }

    std::sort(pairs.begin(), pairs.end());
    for (auto [i, j] : pairs)
        out.paired.emplace_back(*before[i], *after[j]);

    // phase 3: leftovers
    std::vector<std::size_t> del, ins;
    for (std::size_t i = 0; i < before.size(); ++i)
        if (!b_used[i])
            del.push_back(i);
    for (std::size_t j = 0; j < after.size(); ++j)
        if (!a_used[j])
            ins.push_back(j);

    // phase 4: module splits and merges through top-level slices
    auto sliced = [&](const SourceFile* f, std::vector<CodeSlice>& into) {
        try {
            into = slices_of(*f);
            return true;
        } catch (const SyntaxError& e) {
            out.diagnostics.push_back({f->path, e.what()});
            return false;
        }
    };
    std::map<std::size_t, std::size_t> partner_of_before, partner_of_after;
    for (auto [i, j] : pairs) {
        partner_of_before[i] = j;
        partner_of_after[j] = i;
    }
    std::vector<SlicedFile> before_side, after_side;
    std::vector<CodeSlice> scratch;
    for (std::size_t i = 0; i < before.size(); ++i) {
        SlicedFile f;
        f.file = before[i];
        if (!sliced(before[i], f.slices))
            continue;
        auto it = partner_of_before.find(i);
        if (it != partner_of_before.end()) {
            f.has_opposite = true;
            if (!sliced(after[it->second], f.opposite))
                continue;
        }
        before_side.push_back(std::move(f));
    }
    for (std::size_t j = 0; j < after.size(); ++j) {
        SlicedFile f;
        f.file = after[j];
        if (!sliced(after[j], f.slices))
            continue;
        auto it = partner_of_after.find(j);
        if (it != partner_of_after.end()) {
            f.has_opposite = true;
            if (!sliced(before[it->second], f.opposite))
                continue;
        }
        after_side.push_back(std::move(f));
    }
    auto slices_for = [](const std::vector<SlicedFile>& side, const SourceFile* f) -> const std::vector<CodeSlice>* {
        for (const auto& s : side)
            if (s.file == f)
                return &s.slices;
        return nullptr;
    };

    std::set<std::size_t> extracted, inlined;
    for (std::size_t j : ins) {
        const auto* slices = slices_for(after_side, after[j]);
        if (!slices)
            continue;
        if (const SourceFile* src = module_split_source(*slices, before_side, options.slice_move_floor)) {
            RefactoringInstance r;
            r.type = RefactoringType::ExtractModule;
            r.before = module_locator(*src);
            r.after = module_locator(*after[j]);
            r.description = default_description(r);
            out.module_refactorings.push_back(std::move(r));
            extracted.insert(j);
        }
    }
    for (std::size_t i : del) {
        const auto* slices = slices_for(before_side, before[i]);
        if (!slices)
            continue;
        if (const SourceFile* dst = module_split_source(*slices, after_side, options.slice_move_floor)) {
            RefactoringInstance r;
            r.type = RefactoringType::InlineModule;
            r.before = module_locator(*before[i]);
            r.after = module_locator(*dst);
            r.description = default_description(r);
            out.module_refactorings.push_back(std::move(r));
            inlined.insert(i);
        }
    }
    for (std::size_t i : del)
        (inlined.count(i) ? out.inlined_modules : out.unpaired_deleted).push_back(*before[i]);
    for (std::size_t j : ins)
        (extracted.count(j) ? out.extracted_modules : out.unpaired_inserted).push_back(*after[j]);
    return out;
}

} // namespace actref
