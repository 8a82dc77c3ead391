#include "actref/cli_report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

namespace actref {

using nlohmann::json;

namespace {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

json span_json(const Span& s) {
    auto pos = [](const Position& p) { return json{{"line", p.line}, {"column", p.column}, {"offset", p.offset}}; };
    return json{{"begin", pos(s.begin)}, {"end", pos(s.end)}};
}

Span span_from(const json& j) {
    Span s;
    auto pos = [](const json& p, Position& out) {
        out.line = p.value("line", 1u);
        out.column = p.value("column", 0u);
        out.offset = p.value("offset", 0u);
    };
    if (j.contains("begin"))
        pos(j["begin"], s.begin);
    if (j.contains("end"))
        pos(j["end"], s.end);
    return s;
}

ElementKind element_kind_from(const std::string& s) {
    for (ElementKind k : {ElementKind::Module, ElementKind::Class, ElementKind::Method, ElementKind::Statement,
                          ElementKind::Variable})
        if (to_string(k) == s)
            return k;
    throw ReportError("unknown element kind '" + s + "'");
}

json locator_json(const std::optional<ElementLocator>& l) {
    if (!l)
        return nullptr;
    return json{{"file", l->file}, {"name", l->qualified_name}, {"kind", to_string(l->kind)}, {"span", span_json(l->span)}};
}

std::optional<ElementLocator> locator_from(const json& j) {
    if (j.is_null())
        return std::nullopt;
    ElementLocator l;
    l.file = j.value("file", "");
    l.qualified_name = j.value("name", "");
    l.kind = element_kind_from(j.value("kind", "Module"));
    if (j.contains("span"))
        l.span = span_from(j["span"]);
    return l;
}

json timing_json(const StageTiming& t) {
    return json{{"module", round4(t.module_ms)},
                {"intra", round4(t.intra_ms)},
                {"cross", round4(t.cross_ms)},
                {"total", round4(t.total_ms)}};
}

RefactoringType type_or_throw(const std::string& name) {
    auto t = refactoring_type_from_string(name);
    if (!t)
        throw UnknownType("unknown refactoring type '" + name + "'");
    return *t;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string first_char(const std::string& text) {
    auto p = text.find_first_not_of(" \t\r\n");
    return p == std::string::npos ? "" : text.substr(p, 1);
}

std::vector<OracleEntry> entries_from_csv(const std::string& text) {
    auto rows = parse_csv(text);
    if (rows.empty())
        return {};
    const auto& header = rows[0];
    auto col = [&](const char* name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw ReportError(std::string("CSV header lacks column '") + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    std::size_t c = col("commit"), t = col("type"), bf = col("before_file"), bn = col("before_name"),
                af = col("after_file"), an = col("after_name");
    std::vector<OracleEntry> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        auto at = [&](std::size_t k) { return k < r.size() ? r[k] : std::string(); };
        out.push_back({at(c), type_or_throw(at(t)), at(bf), at(bn), at(af), at(an)});
    }
    return out;
}

OracleEntry entry_of(const RefactoringInstance& r, const std::string& commit) {
    OracleEntry e;
    e.commit = commit;
    e.type = r.type;
    if (r.before) {
        e.before_file = r.before->file;
        e.before_name = r.before->qualified_name;
    }
    if (r.after) {
        e.after_file = r.after->file;
        e.after_name = r.after->qualified_name;
    }
    return e;
}

std::string fmt4(const std::optional<double>& v) {
    if (!v)
        return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

json opt_json(const std::optional<double>& v) { return v ? json(round4(*v)) : json(nullptr); }

json scores_json(const Scores& s) {
    return json{{"tp", s.counts.tp},          {"fp", s.counts.fp},        {"fn", s.counts.fn},
                {"precision", opt_json(s.precision)}, {"recall", opt_json(s.recall)}, {"f1", opt_json(s.f1)}};
}

} // namespace

void sort_refactorings(std::vector<RefactoringInstance>& v) {
    auto key = [](const RefactoringInstance& r) {
        static const ElementLocator none;
        const ElementLocator& b = r.before ? *r.before : none;
        const ElementLocator& a = r.after ? *r.after : none;
        return std::make_tuple(static_cast<int>(r.type), b.file, b.span.begin.offset, b.span.end.offset,
                               b.qualified_name, a.file, a.span.begin.offset, a.qualified_name);
    };
    std::stable_sort(v.begin(), v.end(),
                     [&](const RefactoringInstance& x, const RefactoringInstance& y) { return key(x) < key(y); });
}

CommitReport commit_report(const CommitAnalysis& analysis, bool with_timing) {
    CommitReport c;
    c.commit = analysis.commit;
    c.refactorings = analysis.results();
    sort_refactorings(c.refactorings);
    c.diagnostics = analysis.diagnostics;
    if (with_timing)
        c.timing_ms = analysis.timing;
    return c;
}

std::string report_to_json(const DetectionReport& report) {
    json commits = json::array();
    for (const auto& c : report.commits) {
        json refs = json::array();
        for (const auto& r : c.refactorings)
            refs.push_back(json{{"type", to_string(r.type)},
                                {"description", r.description},
                                {"before", locator_json(r.before)},
                                {"after", locator_json(r.after)}});
        json diags = json::array();
        for (const auto& d : c.diagnostics)
            diags.push_back(json{{"file", d.file}, {"message", d.message}});
        json jc{{"commit", c.commit}, {"refactorings", refs}, {"diagnostics", diags}};
        if (c.timing_ms)
            jc["timing_ms"] = timing_json(*c.timing_ms);
        commits.push_back(std::move(jc));
    }
    json j{{"schema_version", report.schema_version}, {"tool_version", report.tool_version}, {"commits", commits}};
    return j.dump(2) + "\n";
}

DetectionReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ReportError(std::string("invalid report: ") + e.what());
    }
    if (!j.is_object())
        throw ReportError("report must be a JSON object");
    DetectionReport r;
    r.schema_version = j.value("schema_version", kReportSchemaVersion);
    r.tool_version = j.value("tool_version", "");
    for (const auto& jc : j.value("commits", json::array())) {
        CommitReport c;
        c.commit = jc.value("commit", "");
        for (const auto& jr : jc.value("refactorings", json::array())) {
            RefactoringInstance inst;
            inst.type = type_or_throw(jr.value("type", ""));
            inst.description = jr.value("description", "");
            inst.before = locator_from(jr.value("before", json(nullptr)));
            inst.after = locator_from(jr.value("after", json(nullptr)));
            inst.commit = c.commit;
            c.refactorings.push_back(std::move(inst));
        }
        for (const auto& jd : jc.value("diagnostics", json::array()))
            c.diagnostics.push_back({jd.value("file", ""), jd.value("message", "")});
        if (jc.contains("timing_ms")) {
            const auto& t = jc["timing_ms"];
            c.timing_ms = StageTiming{t.value("module", 0.0), t.value("intra", 0.0), t.value("cross", 0.0),
                                      t.value("total", 0.0)};
        }
        r.commits.push_back(std::move(c));
    }
    return r;
}

std::string report_to_csv(const DetectionReport& report) {
    std::string out = "commit,type,before_file,before_name,after_file,after_name,description\n";
    for (const auto& c : report.commits)
        for (const auto& r : c.refactorings) {
            OracleEntry e = entry_of(r, c.commit);
            out += csv_field(e.commit) + "," + csv_field(std::string(to_string(e.type))) + "," +
                   csv_field(e.before_file) + "," + csv_field(e.before_name) + "," + csv_field(e.after_file) + "," +
                   csv_field(e.after_name) + "," + csv_field(r.description) + "\n";
        }
    return out;
}

bool same_report(const DetectionReport& a, const DetectionReport& b) {
    auto same_loc = [](const std::optional<ElementLocator>& x, const std::optional<ElementLocator>& y) {
        if (x.has_value() != y.has_value())
            return false;
        return !x || (*x == *y && x->span == y->span);
    };
    auto same_timing = [](const std::optional<StageTiming>& x, const std::optional<StageTiming>& y) {
        if (x.has_value() != y.has_value())
            return false;
        auto eq = [](double p, double q) { return std::abs(round4(p) - round4(q)) < 1e-9; };
        return !x || (eq(x->module_ms, y->module_ms) && eq(x->intra_ms, y->intra_ms) && eq(x->cross_ms, y->cross_ms) &&
                      eq(x->total_ms, y->total_ms));
    };
    if (a.schema_version != b.schema_version || a.tool_version != b.tool_version || a.commits.size() != b.commits.size())
        return false;
    for (std::size_t i = 0; i < a.commits.size(); ++i) {
        const auto& x = a.commits[i];
        const auto& y = b.commits[i];
        if (x.commit != y.commit || x.diagnostics != y.diagnostics || !same_timing(x.timing_ms, y.timing_ms) ||
            x.refactorings.size() != y.refactorings.size())
            return false;
        for (std::size_t k = 0; k < x.refactorings.size(); ++k) {
            const auto& p = x.refactorings[k];
            const auto& q = y.refactorings[k];
            if (p.type != q.type || p.description != q.description || !same_loc(p.before, q.before) ||
                !same_loc(p.after, q.after))
                return false;
        }
    }
    return true;
}

std::vector<OracleEntry> load_oracle(const std::string& text) {
    if (first_char(text) != "[")
        return entries_from_csv(text);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ReportError(std::string("invalid oracle: ") + e.what());
    }
    std::vector<OracleEntry> out;
    for (const auto& je : j) {
        OracleEntry e;
        e.commit = je.value("commit", "");
        e.type = type_or_throw(je.value("type", je.value("refactoring_type", "")));
        auto side = [&](const char* key, std::string& file, std::string& name) {
            if (je.contains(key) && je[key].is_object()) {
                file = je[key].value("file", "");
                name = je[key].value("name", je[key].value("qualified_name", ""));
            } else {
                file = je.value(std::string(key) + "_file", "");
                name = je.value(std::string(key) + "_name", "");
            }
        };
        side("before", e.before_file, e.before_name);
        side("after", e.after_file, e.after_name);
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<OracleEntry> detected_entries(const std::string& text) {
    if (first_char(text) != "{")
        return entries_from_csv(text);
    std::vector<OracleEntry> out;
    for (const auto& c : report_from_json(text).commits)
        for (const auto& r : c.refactorings)
            out.push_back(entry_of(r, c.commit));
    return out;
}

CountTable match_instances(const std::vector<OracleEntry>& detected, const std::vector<OracleEntry>& oracle) {
    CountTable table;
    std::vector<char> used(oracle.size(), 0);
    auto same = [](const OracleEntry& d, const OracleEntry& o) {
        return d.type == o.type && (d.commit.empty() || o.commit.empty() || d.commit == o.commit) &&
               d.before_file == o.before_file && d.before_name == o.before_name && d.after_file == o.after_file &&
               d.after_name == o.after_name;
    };
    for (const auto& d : detected) {
        bool hit = false;
        for (std::size_t i = 0; i < oracle.size() && !hit; ++i)
            if (!used[i] && same(d, oracle[i])) {
                used[i] = 1;
                hit = true;
            }
        ++(hit ? table[d.type].tp : table[d.type].fp);
    }
    for (std::size_t i = 0; i < oracle.size(); ++i)
        if (!used[i])
            ++table[oracle[i].type].fn;
    return table;
}

Scores score(const TypeCounts& c) {
    Scores s;
    s.counts = c;
    if (c.tp + c.fp)
        s.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn)
        s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (s.precision || s.recall) {
        double p = s.precision.value_or(0.0), r = s.recall.value_or(0.0);
        s.f1 = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
    return s;
}

MetricsReport compute_metrics(const CountTable& counts) {
    MetricsReport m;
    TypeCounts total;
    for (const auto& [type, c] : counts) {
        m.per_type[type] = score(c);
        total.tp += c.tp;
        total.fp += c.fp;
        total.fn += c.fn;
    }
    m.total = score(total);
    return m;
}

std::string metrics_to_json(const MetricsReport& metrics, bool per_type) {
    json j{{"total", scores_json(metrics.total)}};
    if (per_type) {
        json types = json::object();
        for (const auto& [t, s] : metrics.per_type)
            types[std::string(to_string(t))] = scores_json(s);
        j["per_type"] = types;
    }
    return j.dump(2) + "\n";
}

std::string metrics_to_table(const MetricsReport& metrics, bool per_type) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-18s %6s %6s %6s %9s %9s %9s\n", "Type", "TP", "FP", "FN", "Precision",
                  "Recall", "F1");
    out << line;
    auto row = [&](const std::string& name, const Scores& s) {
        std::snprintf(line, sizeof line, "%-18s %6zu %6zu %6zu %9s %9s %9s\n", name.c_str(), s.counts.tp, s.counts.fp,
                      s.counts.fn, fmt4(s.precision).c_str(), fmt4(s.recall).c_str(), fmt4(s.f1).c_str());
        out << line;
    };
    if (per_type)
        for (const auto& [t, s] : metrics.per_type)
            row(std::string(to_string(t)), s);
    row("Total", metrics.total);
    return out.str();
}

} // namespace actref
