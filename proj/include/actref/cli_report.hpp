#pragma once

#include "actref/pipeline.hpp"
#include "actref/refactoring.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace actref {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct CommitReport {
    std::string commit;
    std::vector<RefactoringInstance> refactorings;
    std::vector<Diagnostic> diagnostics;
    std::optional<StageTiming> timing_ms;
};

struct DetectionReport {
    int schema_version = kReportSchemaVersion;
    std::string tool_version = kToolVersion;
    std::vector<CommitReport> commits;
};

/// Refactorings in report order: type, before file, before span.
CommitReport commit_report(const CommitAnalysis& analysis, bool with_timing = true);
void sort_refactorings(std::vector<RefactoringInstance>& v);

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sorted keys, 4-decimal floats, fixed indentation.
std::string report_to_json(const DetectionReport& report);
DetectionReport report_from_json(const std::string& text);
/// Header: commit,type,before_file,before_name,after_file,after_name,description
std::string report_to_csv(const DetectionReport& report);

/// Field-wise equality including spans, used by the round-trip checks.
bool same_report(const DetectionReport& a, const DetectionReport& b);

struct OracleEntry {
    std::string commit;
    RefactoringType type = RefactoringType::MoveModule;
    std::string before_file;
    std::string before_name;
    std::string after_file;
    std::string after_name;
};

class UnknownType : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// JSON array of entries, or CSV with the oracle header. Throws UnknownType.
std::vector<OracleEntry> load_oracle(const std::string& text);
/// Report rows as oracle entries (JSON report or CSV report).
std::vector<OracleEntry> detected_entries(const std::string& text);

struct TypeCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};
using CountTable = std::map<RefactoringType, TypeCounts>;

/// One-to-one greedy matching in report order on (commit, type, before, after)
/// where locators compare by file and qualified name.
CountTable match_instances(const std::vector<OracleEntry>& detected, const std::vector<OracleEntry>& oracle);

struct Scores {
    TypeCounts counts;
    std::optional<double> precision; // undefined for 0/0
    std::optional<double> recall;
    std::optional<double> f1; // undefined only when both are
};

Scores score(const TypeCounts& counts);

struct MetricsReport {
    std::map<RefactoringType, Scores> per_type;
    Scores total; // micro average
};

MetricsReport compute_metrics(const CountTable& counts);
std::string metrics_to_json(const MetricsReport& metrics, bool per_type = true);
/// Per-type rows plus a total row, as a fixed-width table.
std::string metrics_to_table(const MetricsReport& metrics, bool per_type = true);

/// CLI entry point: detect, diff, eval. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace actref
