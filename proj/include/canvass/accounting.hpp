#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "canvass/dup_forensics.hpp"
#include "canvass/records.hpp"

namespace canvass {

// ---------------------------------------------------------------------------
// Ballot accounting
// ---------------------------------------------------------------------------

// Electronic record counts for one count phase, enough for ballot
// accounting without holding the full CVR set.
struct PhaseRecordSet {
    std::int64_t cvr_count = 0;
    std::vector<ImageRef> cvr_refs;  // one per CVR, duplicates preserved
};

PhaseRecordSet summarize_cvrs(const std::vector<CastVoteRecord>& cvrs);

struct AccountingLedger {
    std::map<Phase, std::int64_t> cvr_count_by_phase;
    std::map<Phase, std::int64_t> image_count_by_phase;
    std::int64_t manifest_total = 0;
    std::int64_t pollbook_total = 0;
    bool has_manifest = false;
    bool has_pollbook = false;
    // CVR-referenced images absent from the inventory, per phase.
    std::map<Phase, std::vector<ImageRef>> missing_image_refs;
    // Batches with at least one CVR but no images at all, per phase.
    std::map<Phase, std::vector<BatchId>> missing_batches;
};

// Balance checks. A finding is a failed comparison, not an error.
struct AccountingFinding {
    std::string check;       // e.g. "cvr_vs_image_count", "cross_phase_cvr_count"
    std::string detail;
    std::int64_t magnitude = 0;

    bool operator==(const AccountingFinding&) const = default;
};

AccountingLedger count_reconciliation(const std::map<Phase, PhaseRecordSet>& cvrs_by_phase,
                                      const std::map<Phase, std::vector<ImageRef>>& images_by_phase,
                                      const std::optional<Manifest>& manifest,
                                      const std::optional<std::vector<PollbookSummary>>& pollbook);

AccountingLedger count_reconciliation(const std::map<Phase, std::vector<CastVoteRecord>>& cvrs_by_phase,
                                      const std::map<Phase, std::vector<ImageRef>>& images_by_phase,
                                      const std::optional<Manifest>& manifest,
                                      const std::optional<std::vector<PollbookSummary>>& pollbook);

// Pure function of the ledger; the report is reproducible from it.
std::vector<AccountingFinding> ledger_findings(const AccountingLedger& ledger);

// ---------------------------------------------------------------------------
// Cross-phase comparison of reported results
// ---------------------------------------------------------------------------

struct PhaseDelta {
    std::string precinct;
    VotingMode mode = VotingMode::Unknown;
    std::string candidate;
    std::map<Phase, std::int64_t> values;  // phases where the cell exists

    bool has(Phase phase) const { return values.count(phase) != 0; }
    // value(a) - value(b); antisymmetric by construction.
    std::optional<std::int64_t> delta(Phase a, Phase b) const;
    // delta(phase, original) / original value.
    std::optional<double> relative_vs_original(Phase phase) const;
};

// A (precinct, mode, candidate) cell reported in some phases but not all.
struct MissingCell {
    std::string precinct;
    VotingMode mode = VotingMode::Unknown;
    std::string candidate;
    std::vector<Phase> absent_phases;
};

struct PhaseComparison {
    std::vector<PhaseDelta> deltas;     // cells present in >= 2 phases
    std::vector<MissingCell> missing;   // flagged absent combinations
};

PhaseComparison phase_compare(const std::vector<PrecinctModeTally>& results);

// ---------------------------------------------------------------------------
// CVR tallies
// ---------------------------------------------------------------------------

// Counts selections per candidate for one contest, counting every CVR —
// duplicates included, matching reported-tabulation semantics.
std::map<std::string, std::int64_t> tally_cvrs(const std::vector<CastVoteRecord>& cvrs,
                                               std::string_view contest);

struct RejectedGroup {
    DuplicateGroup group;
    std::string reason;  // "conflicting_signatures", "overlaps_prior_group", "missing_reference"
};

struct AdjustedTally {
    std::map<std::string, std::int64_t> adjusted;
    std::map<std::string, std::int64_t> removed;   // votes removed per candidate
    std::vector<RejectedGroup> rejected;
};

// Totals where each duplicate group contributes exactly one vote per
// contest. Groups whose members disagree on the signature are rejected
// and reported, not silently dropped.
AdjustedTally dedup_adjusted_tally(const std::vector<CastVoteRecord>& cvrs,
                                   const std::vector<DuplicateGroup>& groups,
                                   std::string_view contest);

}  // namespace canvass
