#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "canvass/records.hpp"

namespace canvass {

// ---------------------------------------------------------------------------
// Batch-identifier normalization
// ---------------------------------------------------------------------------

// Normalized identity of a batch, comparable between a sheet and a
// spreadsheet row. `extra` holds row-label tokens that have no
// counterpart on a sheet (mode prefixes, stray words); a nonempty extra
// blocks exact matching so quirky transcriptions fall through to the
// tally-only pass.
struct BatchKey {
    std::string scanner;
    std::string batch;
    std::string extra;

    bool operator==(const BatchKey&) const = default;
    std::string str() const;
};

// Case-folds, strips whitespace, collapses "--" range separators.
std::string normalize_label(std::string_view text);

BatchKey sheet_batch_key(const BatchSheet& sheet);
BatchKey row_batch_key(const AuditRow& row);

// Token-overlap score between a sheet's identifiers and a row's label;
// used to decide whether labels disambiguate competing tally-only matches.
int label_affinity(const BatchSheet& sheet, const AuditRow& row);

// ---------------------------------------------------------------------------
// match_sheets
// ---------------------------------------------------------------------------

struct SheetRowMatch {
    std::size_t sheet_index = 0;
    std::size_t row_index = 0;
    BatchSheet sheet;
    AuditRow row;
    int pass = 0;          // 1 = identifier + tally, 2 = tally only
    std::string log;       // normalization / disambiguation notes
};

struct AmbiguousSheet {
    std::size_t sheet_index = 0;
    BatchSheet sheet;
    std::vector<AuditRow> candidates;
};

// Every input sheet lands in exactly one of matched / missing_sheets /
// ambiguous; no row is matched twice.
struct MatchResult {
    std::vector<SheetRowMatch> matched;
    std::vector<BatchSheet> missing_sheets;
    std::vector<AuditRow> unmatched_rows;
    std::vector<AmbiguousSheet> ambiguous;
};

MatchResult match_sheets(const std::vector<BatchSheet>& sheets, const std::vector<AuditRow>& rows);

// ---------------------------------------------------------------------------
// omission_impact
// ---------------------------------------------------------------------------

// Votes the reported audit totals lost by omitting these sheets.
// UNKNOWN entries are excluded from the sums and flagged, never zeroed.
struct OmissionImpact {
    PartialSum trump;
    PartialSum biden;
    PartialSum jorgensen;
    PartialSum write_in;
    PartialSum undervote_blank;
    PartialSum overvote;

    std::int64_t total_known() const { return trump.known + biden.known + jorgensen.known; }
    bool operator==(const OmissionImpact&) const = default;
};

OmissionImpact omission_impact(const std::vector<BatchSheet>& missing);

// ---------------------------------------------------------------------------
// discrepancy_rate
// ---------------------------------------------------------------------------

// error_votes / base_votes as a fraction. base_votes must be positive.
double discrepancy_rate(std::int64_t error_votes, std::int64_t base_votes);

// Renders a fraction as a percentage with the given number of decimals,
// e.g. format_percent(0.0012084, 2) == "0.12%".
std::string format_percent(double fraction, int decimals);

// ---------------------------------------------------------------------------
// duplicate_row_census
// ---------------------------------------------------------------------------

struct DuplicateRowGroup {
    std::string county;
    std::int64_t trump = 0;
    std::int64_t biden = 0;
    std::int64_t jorgensen = 0;
    std::vector<std::size_t> row_indices;  // positions in the input
};

struct DuplicateRowCensus {
    // Rows belonging to any within-county group of size >= 2.
    std::int64_t duplicate_row_count = 0;
    std::int64_t total_rows = 0;
    std::vector<DuplicateRowGroup> groups;  // sorted by (county, tally)
};

DuplicateRowCensus duplicate_row_census(const std::vector<AuditRow>& rows);

// ---------------------------------------------------------------------------
// audit_totals
// ---------------------------------------------------------------------------

struct CandidateTotals {
    std::int64_t trump = 0;
    std::int64_t biden = 0;
    std::int64_t jorgensen = 0;

    bool operator==(const CandidateTotals&) const = default;
};

CandidateTotals audit_totals(const std::vector<AuditRow>& rows);

}  // namespace canvass
