#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "canvass/errors.hpp"

namespace canvass {

// ---------------------------------------------------------------------------
// Core identifiers
// ---------------------------------------------------------------------------

// Canonical identifier of one scanned sheet: scanner, batch, and the
// position of the image within the batch. Text form is zero-padded
// SSSSS_BBBBB_IIIIII (wider if a component overflows its field).
struct ImageRef {
    std::uint32_t scanner_id = 0;
    std::uint32_t batch_id = 0;
    std::uint32_t image_seq = 0;

    auto operator<=>(const ImageRef&) const = default;

    std::string str() const;
    static ImageRef parse(std::string_view text);  // throws std::invalid_argument
};

std::ostream& operator<<(std::ostream& out, const ImageRef& ref);

enum class VotingMode {
    ElectionDay,
    Advance,
    AbsenteeByMail,
    Provisional,
    Unknown,
};

// Canonical token ("election_day", "advance", ...).
std::string_view to_string(VotingMode mode);

// Accepts canonical tokens plus common source spellings ("absentee",
// "election day"). Blank and "?" map to Unknown, never to a guessed mode.
// Returns nullopt for unrecognized text.
std::optional<VotingMode> parse_voting_mode(std::string_view text);

enum class Phase { Original, Recount, Audit };

std::string_view to_string(Phase phase);
std::optional<Phase> parse_phase(std::string_view text);

// ---------------------------------------------------------------------------
// Counts that may be unknown
// ---------------------------------------------------------------------------

// A non-negative count, or UNKNOWN (blank / "?" in the source).
using Count = std::optional<std::int64_t>;

// Sum over a set of Counts: the known part plus a flag that at least one
// UNKNOWN was dropped. UNKNOWN never silently becomes zero.
struct PartialSum {
    std::int64_t known = 0;
    bool has_unknown = false;

    PartialSum& operator+=(const Count& c) {
        if (c.has_value())
            known += *c;
        else
            has_unknown = true;
        return *this;
    }
    PartialSum& operator+=(const PartialSum& other) {
        known += other.known;
        has_unknown = has_unknown || other.has_unknown;
        return *this;
    }
    friend PartialSum operator+(PartialSum a, const PartialSum& b) { return a += b; }
    bool operator==(const PartialSum&) const = default;
};

// Per-batch presidential counts as they appear on audit batch sheets.
struct TallyVector {
    Count trump;
    Count biden;
    Count jorgensen;
    Count write_in;
    Count undervote_blank;
    Count overvote;

    bool operator==(const TallyVector&) const = default;

    bool candidates_known() const {
        return trump.has_value() && biden.has_value() && jorgensen.has_value();
    }
    PartialSum candidate_total() const {
        PartialSum sum;
        sum += trump;
        sum += biden;
        sum += jorgensen;
        sum += write_in;
        return sum;
    }
};

// ---------------------------------------------------------------------------
// Record types
// ---------------------------------------------------------------------------

// One manually tallied batch (an audit board batch sheet).
struct BatchSheet {
    std::string source_page;           // image provenance, e.g. "4 at 162"
    std::string location_or_scanner;   // numeric scanner or a location name
    std::string batch_label;           // opaque; may be a range like "12--14"
    VotingMode mode = VotingMode::Unknown;
    TallyVector tally;

    bool operator==(const BatchSheet&) const = default;
};

// One row of the reported audit spreadsheet. Exactly three candidate
// columns; the spreadsheet carries no write-in/undervote/overvote data.
struct AuditRow {
    std::string county;
    std::string batch_name;
    std::int64_t trump = 0;
    std::int64_t biden = 0;
    std::int64_t jorgensen = 0;

    bool operator==(const AuditRow&) const = default;
};

// The voting system's interpretation of one scanned sheet.
struct CastVoteRecord {
    std::string cvr_id;
    ImageRef image;
    VotingMode mode = VotingMode::Unknown;
    std::string precinct;
    // contest -> selected candidate, sorted by contest id; at most one
    // entry per contest.
    std::vector<std::pair<std::string, std::string>> selections;
    // contest -> write-in text, sorted by contest id.
    std::vector<std::pair<std::string, std::string>> write_ins;

    bool operator==(const CastVoteRecord&) const = default;

    const std::string* selection_for(std::string_view contest) const;
};

struct ManifestEntry {
    std::string container_id;
    std::string location;
    std::int64_t num_cards = 0;

    bool operator==(const ManifestEntry&) const = default;
};

// Physical inventory of ballot storage, independent of the voting system.
struct Manifest {
    std::vector<ManifestEntry> entries;

    bool operator==(const Manifest&) const = default;
    std::int64_t total_cards() const;
};

// One cell of reported results: phase x precinct x mode x candidate.
struct PrecinctModeTally {
    Phase phase = Phase::Original;
    std::string precinct;
    VotingMode mode = VotingMode::Unknown;
    std::string candidate;
    std::int64_t votes = 0;

    bool operator==(const PrecinctModeTally&) const = default;
};

struct PollbookSummary {
    std::string precinct;
    VotingMode mode = VotingMode::Unknown;
    std::int64_t num_participants = 0;

    bool operator==(const PollbookSummary&) const = default;
};

// ---------------------------------------------------------------------------
// Parsers / serializers for the canonical comma-delimited formats.
// Parsers are total over the declared schemas: any rejection throws
// ParseError with the offending line and column. UNKNOWN is never
// coerced to 0.
// ---------------------------------------------------------------------------

std::vector<CastVoteRecord> parse_cvr_export(std::istream& in, std::string source = "");
std::vector<BatchSheet> parse_batch_sheets(std::istream& in, std::string source = "");
std::vector<AuditRow> parse_audit_spreadsheet(std::istream& in, std::string source = "");
Manifest parse_manifest(std::istream& in, std::string source = "");
std::vector<PollbookSummary> parse_pollbook(std::istream& in, std::string source = "");
std::vector<PrecinctModeTally> parse_precinct_results(std::istream& in, std::string source = "");
std::vector<ImageRef> parse_image_inventory(std::istream& in, std::string source = "");

void serialize_cvr_export(std::ostream& out, const std::vector<CastVoteRecord>& records);
void serialize_batch_sheets(std::ostream& out, const std::vector<BatchSheet>& sheets);
void serialize_audit_spreadsheet(std::ostream& out, const std::vector<AuditRow>& rows);
void serialize_manifest(std::ostream& out, const Manifest& manifest);
void serialize_pollbook(std::ostream& out, const std::vector<PollbookSummary>& books);
void serialize_precinct_results(std::ostream& out, const std::vector<PrecinctModeTally>& rows);
void serialize_image_inventory(std::ostream& out, const std::vector<ImageRef>& refs);

// Path convenience wrappers; errors carry the file name as source.
std::vector<CastVoteRecord> load_cvr_export(const std::filesystem::path& path);
std::vector<BatchSheet> load_batch_sheets(const std::filesystem::path& path);
std::vector<AuditRow> load_audit_spreadsheet(const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);
std::vector<PollbookSummary> load_pollbook(const std::filesystem::path& path);
std::vector<PrecinctModeTally> load_precinct_results(const std::filesystem::path& path);
std::vector<ImageRef> load_image_inventory(const std::filesystem::path& path);

}  // namespace canvass
