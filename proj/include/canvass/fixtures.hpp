#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "canvass/accounting.hpp"
#include "canvass/audit_reconcile.hpp"
#include "canvass/dup_forensics.hpp"
#include "canvass/records.hpp"

namespace canvass {

// Exact per-candidate targets a generated dataset must hit.
using CandidateTargets = CandidateTotals;

// ---------------------------------------------------------------------------
// Anomaly specification
// ---------------------------------------------------------------------------

// A stack of sheets scanned more than once: the source span is copied
// into each target batch, forward or reversed. Source positions listed
// in unique_source_seqs receive signatures that occur nowhere else in
// the dataset (rare write-ins), so they are provably one physical sheet;
// every other copied position also occurs somewhere outside the stack,
// leaving it plausible but unprovable from the vote record alone.
struct RunSpec {
    Phase phase = Phase::Original;
    BatchId source;
    std::uint32_t source_start = 1;  // 1-based image_seq
    std::uint32_t length = 0;
    struct Target {
        BatchId batch;
        std::uint32_t start = 1;  // seq aligned with source_start
        RunOrientation orientation = RunOrientation::Same;
    };
    std::vector<Target> targets;
    std::vector<std::uint32_t> unique_source_seqs;
    std::string unique_precinct;  // precinct stamped on unique positions ("" = keep)
};

// Images claimed to repeat: the first ref is the source, the rest are
// stamped as copies of it.
struct ExplicitGroupSpec {
    Phase phase = Phase::Original;
    std::string precinct;  // stamped on every member ("" = keep generated)
    std::vector<ImageRef> refs;
};

// A correctly transcribed batch whose spreadsheet label does not match
// the sheet, so it can only match by tally.
struct MislabeledRowSpec {
    std::string location_or_scanner;
    std::string batch_label;
    std::string row_label;
    std::int64_t trump = 0;
    std::int64_t biden = 0;
    std::int64_t jorgensen = 0;
};

struct AnomalySpec {
    std::uint64_t seed = 1;
    std::string county = "Fulton";
    int precinct_count = 6;

    // Electronic record side. Phases listed here are generated.
    std::map<Phase, std::int64_t> cvr_targets;
    std::map<Phase, CandidateTargets> tally_targets;  // exact presidential targets; may be empty
    std::map<Phase, std::int64_t> image_counts;       // images present (absent = complete)
    std::map<Phase, std::vector<BatchId>> missing_image_batches;
    std::map<Phase, std::int64_t> stated_missing_images;  // externally asserted figure, if any
    std::vector<RunSpec> duplicate_runs;
    std::vector<ExplicitGroupSpec> explicit_multiples;

    // Manual tally side. sheet_count == 0 skips this side entirely.
    std::int64_t sheet_count = 0;  // total sheets, including omitted ones
    std::optional<CandidateTargets> audit_total_targets;
    std::vector<BatchSheet> omitted_sheets;
    std::vector<MislabeledRowSpec> mislabeled_rows;
    int injected_duplicate_row_pairs = 0;

    // Accounting side; defaults derive from the original phase.
    std::optional<std::int64_t> manifest_total;
    std::optional<std::int64_t> pollbook_total;

    // Reported results side.
    bool emit_results = false;
    std::vector<PrecinctModeTally> pinned_results;
};

// JSON round-trip for fixture-spec.json.
nlohmann::json spec_to_json(const AnomalySpec& spec);
AnomalySpec spec_from_json(const nlohmann::json& doc);

// Built-in presets:
//   "paper-fulton"  full-scale county dataset with every documented anomaly
//   "paper-tables"  desk-scale dataset with the same anomalies
//   "no-anomaly"    small clean dataset; every check comes back empty
AnomalySpec preset_spec(const std::string& name);
std::vector<std::string> preset_names();

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

struct RunRecord {
    BatchId batch_a;
    BatchId batch_b;
    std::uint32_t length = 0;
    RunOrientation orientation = RunOrientation::Same;

    auto operator<=>(const RunRecord&) const = default;
};

struct PhaseTruth {
    std::int64_t cvr_count = 0;
    std::map<std::string, std::int64_t> pres_tally;
    std::int64_t images_present = 0;
    std::int64_t images_missing = 0;
    std::optional<std::int64_t> stated_missing_images;
    std::vector<BatchId> missing_image_batches;
    std::vector<RunRecord> runs;                            // expected aligned runs
    std::vector<std::vector<ImageRef>> sequence_groups;     // expected group members, sorted
    std::vector<ClaimedGroup> claimed_groups;
    std::map<std::string, std::int64_t> dedup_removed;      // expected removals, PRES
};

struct AuditTruth {
    std::int64_t sheet_count = 0;
    std::int64_t row_count = 0;
    std::vector<BatchSheet> omitted_sheets;
    std::vector<std::string> tally_only_row_labels;
    OmissionImpact omission;
    CandidateTotals totals;
    std::int64_t duplicate_row_census_count = 0;
};

struct GroundTruth {
    std::uint64_t seed = 0;
    std::map<Phase, PhaseTruth> phases;
    std::optional<AuditTruth> audit;
    std::int64_t manifest_total = 0;
    std::int64_t pollbook_total = 0;

    nlohmann::json to_json() const;
};

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct PhaseData {
    std::vector<CastVoteRecord> cvrs;     // canonical (scanner, batch, seq) order
    std::vector<ImageRef> images;         // inventory of image files present
    std::vector<ClaimedGroup> claimed;    // claimed-groups.csv content
};

struct FixtureData {
    AnomalySpec spec;
    std::map<Phase, PhaseData> phases;
    std::vector<BatchSheet> sheets;
    std::vector<AuditRow> rows;
    Manifest manifest;
    std::vector<PollbookSummary> pollbook;
    std::vector<PrecinctModeTally> results;
    GroundTruth truth;
};

// Deterministic: identical spec (including seed) gives identical data,
// and write_fixture then gives byte-identical files. Unachievable specs
// throw GenerationError naming the constraint.
FixtureData generate_fixture(const AnomalySpec& spec);

// Writes the canonical files plus fixture-spec.json and ground_truth.json.
void write_fixture(const FixtureData& data, const std::filesystem::path& dir);

// generate + write in one step.
void generate_fixture_to_dir(const AnomalySpec& spec, const std::filesystem::path& dir);

}  // namespace canvass
