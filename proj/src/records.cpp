#include "canvass/records.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_map>

#include "canvass/csv.hpp"

namespace canvass {

namespace {

std::string pad_number(std::uint32_t value, int width) {
    std::string digits = std::to_string(value);
    if (static_cast<int>(digits.size()) < width) {
        digits.insert(digits.begin(), width - digits.size(), '0');
    }
    return digits;
}

bool parse_u32(std::string_view text, std::uint32_t& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

// Parses a required non-negative integer cell.
std::int64_t parse_count_cell(CsvReader& reader, const std::string& column, const std::string& cell) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        reader.fail(column, "expected a non-negative integer, got '" + cell + "'");
    }
    if (value < 0) reader.fail(column, "negative count " + cell);
    return value;
}

// Parses an optional count cell: blank or "?" is UNKNOWN.
Count parse_optional_count_cell(CsvReader& reader, const std::string& column, const std::string& cell) {
    if (cell.empty() || cell == "?") return std::nullopt;
    return parse_count_cell(reader, column, cell);
}

VotingMode parse_mode_cell(CsvReader& reader, const std::string& column, const std::string& cell) {
    auto mode = parse_voting_mode(cell);
    if (!mode) reader.fail(column, "unrecognized voting mode '" + cell + "'");
    return *mode;
}

void check_field_count(CsvReader& reader, const std::vector<std::string>& fields, std::size_t expected) {
    if (fields.size() != expected) {
        reader.fail("", "row has " + std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(expected));
    }
}

std::string count_to_cell(const Count& c) { return c ? std::to_string(*c) : std::string(); }

}  // namespace

// ---------------------------------------------------------------------------
// ImageRef
// ---------------------------------------------------------------------------

std::string ImageRef::str() const {
    return pad_number(scanner_id, 5) + "_" + pad_number(batch_id, 5) + "_" + pad_number(image_seq, 6);
}

ImageRef ImageRef::parse(std::string_view text) {
    auto first = text.find('_');
    auto second = first == std::string_view::npos ? std::string_view::npos : text.find('_', first + 1);
    ImageRef ref;
    if (first == std::string_view::npos || second == std::string_view::npos ||
        text.find('_', second + 1) != std::string_view::npos ||
        !parse_u32(text.substr(0, first), ref.scanner_id) ||
        !parse_u32(text.substr(first + 1, second - first - 1), ref.batch_id) ||
        !parse_u32(text.substr(second + 1), ref.image_seq)) {
        throw std::invalid_argument("malformed image reference '" + std::string(text) +
                                    "', expected SSSSS_BBBBB_IIIIII");
    }
    return ref;
}

std::ostream& operator<<(std::ostream& out, const ImageRef& ref) { return out << ref.str(); }

// ---------------------------------------------------------------------------
// Enums
// ---------------------------------------------------------------------------

std::string_view to_string(VotingMode mode) {
    switch (mode) {
        case VotingMode::ElectionDay: return "election_day";
        case VotingMode::Advance: return "advance";
        case VotingMode::AbsenteeByMail: return "absentee_by_mail";
        case VotingMode::Provisional: return "provisional";
        case VotingMode::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<VotingMode> parse_voting_mode(std::string_view text) {
    std::string lowered;
    lowered.reserve(text.size());
    for (char ch : text) {
        lowered += (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
    }
    if (lowered.empty() || lowered == "?" || lowered == "unknown") return VotingMode::Unknown;
    if (lowered == "election_day" || lowered == "election day") return VotingMode::ElectionDay;
    if (lowered == "advance" || lowered == "advance in person" || lowered == "advance_in_person")
        return VotingMode::Advance;
    if (lowered == "absentee_by_mail" || lowered == "absentee by mail" || lowered == "absentee")
        return VotingMode::AbsenteeByMail;
    if (lowered == "provisional") return VotingMode::Provisional;
    return std::nullopt;
}

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::Original: return "original";
        case Phase::Recount: return "recount";
        case Phase::Audit: return "audit";
    }
    return "original";
}

std::optional<Phase> parse_phase(std::string_view text) {
    if (text == "original") return Phase::Original;
    if (text == "recount") return Phase::Recount;
    if (text == "audit") return Phase::Audit;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Misc record helpers
// ---------------------------------------------------------------------------

const std::string* CastVoteRecord::selection_for(std::string_view contest) const {
    for (const auto& [c, sel] : selections) {
        if (c == contest) return &sel;
    }
    return nullptr;
}

std::int64_t Manifest::total_cards() const {
    std::int64_t total = 0;
    for (const auto& entry : entries) total += entry.num_cards;
    return total;
}

// ---------------------------------------------------------------------------
// cvr.csv
// cvr_id,scanner,batch,image_seq,mode,precinct,contest,selection,write_in_text
// Long format: one row per contest per CVR. A CVR with no selections at
// all is represented by a single row with blank contest and selection.
// ---------------------------------------------------------------------------

namespace {
const std::vector<std::string> kCvrHeader = {"cvr_id", "scanner",  "batch",     "image_seq",    "mode",
                                             "precinct", "contest", "selection", "write_in_text"};
}

std::vector<CastVoteRecord> parse_cvr_export(std::istream& in, std::string source) {
    CsvReader reader(in, std::move(source));
    expect_header(reader, kCvrHeader);

    std::vector<CastVoteRecord> records;
    std::unordered_map<std::string, std::size_t> index;  // cvr_id -> records position
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        check_field_count(reader, fields, kCvrHeader.size());
        const std::string& cvr_id = fields[0];
        if (cvr_id.empty()) reader.fail("cvr_id", "blank cvr_id");

        ImageRef image;
        if (!parse_u32(fields[1], image.scanner_id)) reader.fail("scanner", "malformed scanner '" + fields[1] + "'");
        if (!parse_u32(fields[2], image.batch_id)) reader.fail("batch", "malformed batch '" + fields[2] + "'");
        if (!parse_u32(fields[3], image.image_seq)) reader.fail("image_seq", "malformed image_seq '" + fields[3] + "'");

        VotingMode mode = parse_mode_cell(reader, "mode", fields[4]);

        auto [it, inserted] = index.try_emplace(cvr_id, records.size());
        if (inserted) {
            CastVoteRecord rec;
            rec.cvr_id = cvr_id;
            rec.image = image;
            rec.mode = mode;
            rec.precinct = fields[5];
            records.push_back(std::move(rec));
        } else {
            const CastVoteRecord& prior = records[it->second];
            if (prior.image != image) reader.fail("scanner", "cvr_id '" + cvr_id + "' repeats with a different image reference");
            if (prior.mode != mode) reader.fail("mode", "cvr_id '" + cvr_id + "' repeats with a different mode");
            if (prior.precinct != fields[5]) reader.fail("precinct", "cvr_id '" + cvr_id + "' repeats with a different precinct");
        }
        CastVoteRecord& rec = records[it->second];

        const std::string& contest = fields[6];
        const std::string& selection = fields[7];
        const std::string& write_in = fields[8];
        if (contest.empty()) {
            if (!selection.empty() || !write_in.empty()) {
                reader.fail("contest", "selection without a contest id");
            }
            continue;  // marker row for a CVR with no selections
        }
        for (const auto& [existing, sel] : rec.selections) {
            if (existing == contest) {
                reader.fail("contest", "duplicate (cvr_id, contest) pair: ('" + cvr_id + "', '" + contest + "')");
            }
        }
        rec.selections.emplace_back(contest, selection);
        if (!write_in.empty()) rec.write_ins.emplace_back(contest, write_in);
    }

    for (auto& rec : records) {
        std::sort(rec.selections.begin(), rec.selections.end());
        std::sort(rec.write_ins.begin(), rec.write_ins.end());
    }
    return records;
}

void serialize_cvr_export(std::ostream& out, const std::vector<CastVoteRecord>& records) {
    write_csv_row(out, kCvrHeader);
    std::vector<std::string> fields(kCvrHeader.size());
    for (const auto& rec : records) {
        fields[0] = rec.cvr_id;
        fields[1] = std::to_string(rec.image.scanner_id);
        fields[2] = std::to_string(rec.image.batch_id);
        fields[3] = std::to_string(rec.image.image_seq);
        fields[4] = std::string(to_string(rec.mode));
        fields[5] = rec.precinct;
        if (rec.selections.empty()) {
            fields[6].clear();
            fields[7].clear();
            fields[8].clear();
            write_csv_row(out, fields);
            continue;
        }
        for (const auto& [contest, selection] : rec.selections) {
            fields[6] = contest;
            fields[7] = selection;
            fields[8].clear();
            for (const auto& [wc, text] : rec.write_ins) {
                if (wc == contest) {
                    fields[8] = text;
                    break;
                }
            }
            write_csv_row(out, fields);
        }
    }
}

// ---------------------------------------------------------------------------
// abbs.csv
// source_page,location_or_scanner,batch_label,mode,trump,biden,jorgensen,
// write_in,undervote_blank,overvote
// ---------------------------------------------------------------------------

namespace {
const std::vector<std::string> kAbbsHeader = {"source_page", "location_or_scanner", "batch_label",
                                              "mode",        "trump",               "biden",
                                              "jorgensen",   "write_in",            "undervote_blank",
                                              "overvote"};
}

std::vector<BatchSheet> parse_batch_sheets(std::istream& in, std::string source) {
    CsvReader reader(in, std::move(source));
    expect_header(reader, kAbbsHeader);

    std::vector<BatchSheet> sheets;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        check_field_count(reader, fields, kAbbsHeader.size());
        BatchSheet sheet;
        sheet.source_page = fields[0];
        sheet.location_or_scanner = fields[1];
        sheet.batch_label = fields[2];
        if (sheet.batch_label.empty()) reader.fail("batch_label", "blank batch label");
        sheet.mode = parse_mode_cell(reader, "mode", fields[3]);
        sheet.tally.trump = parse_optional_count_cell(reader, "trump", fields[4]);
        sheet.tally.biden = parse_optional_count_cell(reader, "biden", fields[5]);
        sheet.tally.jorgensen = parse_optional_count_cell(reader, "jorgensen", fields[6]);
        sheet.tally.write_in = parse_optional_count_cell(reader, "write_in", fields[7]);
        sheet.tally.undervote_blank = parse_optional_count_cell(reader, "undervote_blank", fields[8]);
        sheet.tally.overvote = parse_optional_count_cell(reader, "overvote", fields[9]);
        sheets.push_back(std::move(sheet));
    }
    return sheets;
}

void serialize_batch_sheets(std::ostream& out, const std::vector<BatchSheet>& sheets) {
    write_csv_row(out, kAbbsHeader);
    for (const auto& sheet : sheets) {
        write_csv_row(out, {sheet.source_page, sheet.location_or_scanner, sheet.batch_label,
                            std::string(to_string(sheet.mode)), count_to_cell(sheet.tally.trump),
                            count_to_cell(sheet.tally.biden), count_to_cell(sheet.tally.jorgensen),
                            count_to_cell(sheet.tally.write_in), count_to_cell(sheet.tally.undervote_blank),
                            count_to_cell(sheet.tally.overvote)});
    }
}

// ---------------------------------------------------------------------------
// audit_rows.csv: county,batch_name,trump,biden,jorgensen
// ---------------------------------------------------------------------------

namespace {
const std::vector<std::string> kAuditHeader = {"county", "batch_name", "trump", "biden", "jorgensen"};
}

std::vector<AuditRow> parse_audit_spreadsheet(std::istream& in, std::string source) {
    CsvReader reader(in, std::move(source));
    expect_header(reader, kAuditHeader);

    std::vector<AuditRow> rows;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        check_field_count(reader, fields, kAuditHeader.size());
        AuditRow row;
        row.county = fields[0];
        row.batch_name = fields[1];
        row.trump = parse_count_cell(reader, "trump", fields[2]);
        row.biden = parse_count_cell(reader, "biden", fields[3]);
        row.jorgensen = parse_count_cell(reader, "jorgensen", fields[4]);
        rows.push_back(std::move(row));
    }
    return rows;
}

void serialize_audit_spreadsheet(std::ostream& out, const std::vector<AuditRow>& rows) {
    write_csv_row(out, kAuditHeader);
    for (const auto& row : rows) {
        write_csv_row(out, {row.county, row.batch_name, std::to_string(row.trump),
                            std::to_string(row.biden), std::to_string(row.jorgensen)});
    }
}

// ---------------------------------------------------------------------------
// manifest.csv: container_id,location,num_cards
// ---------------------------------------------------------------------------

namespace {
const std::vector<std::string> kManifestHeader = {"container_id", "location", "num_cards"};
}

Manifest parse_manifest(std::istream& in, std::string source) {
    CsvReader reader(in, std::move(source));
    expect_header(reader, kManifestHeader);

    Manifest manifest;
    std::unordered_map<std::string, int> seen;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        check_field_count(reader, fields, kManifestHeader.size());
        ManifestEntry entry;
        entry.container_id = fields[0];
        if (entry.container_id.empty()) reader.fail("container_id", "blank container_id");
        if (!seen.emplace(entry.container_id, reader.line()).second) {
            reader.fail("container_id", "duplicate container_id '" + entry.container_id + "'");
        }
        entry.location = fields[1];
        entry.num_cards = parse_count_cell(reader, "num_cards", fields[2]);
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

void serialize_manifest(std::ostream& out, const Manifest& manifest) {
    write_csv_row(out, kManifestHeader);
    for (const auto& entry : manifest.entries) {
        write_csv_row(out, {entry.container_id, entry.location, std::to_string(entry.num_cards)});
    }
}

// ---------------------------------------------------------------------------
// pollbook.csv: precinct,mode,num_participants
// ---------------------------------------------------------------------------

namespace {
const std::vector<std::string> kPollbookHeader = {"precinct", "mode", "num_participants"};
}

std::vector<PollbookSummary> parse_pollbook(std::istream& in, std::string source) {
    CsvReader reader(in, std::move(source));
    expect_header(reader, kPollbookHeader);

    std::vector<PollbookSummary> books;
    std::unordered_map<std::string, int> seen;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        check_field_count(reader, fields, kPollbookHeader.size());
        PollbookSummary book;
        book.precinct = fields[0];
        book.mode = parse_mode_cell(reader, "mode", fields[1]);
        book.num_participants = parse_count_cell(reader, "num_participants", fields[2]);
        std::string key = book.precinct + "\x1f" + std::string(to_string(book.mode));
        if (!seen.emplace(key, reader.line()).second) {
            reader.fail("precinct", "duplicate (precinct, mode) pair ('" + book.precinct + "', '" +
                                        std::string(to_string(book.mode)) + "')");
        }
        books.push_back(std::move(book));
    }
    return books;
}

void serialize_pollbook(std::ostream& out, const std::vector<PollbookSummary>& books) {
    write_csv_row(out, kPollbookHeader);
    for (const auto& book : books) {
        write_csv_row(out, {book.precinct, std::string(to_string(book.mode)),
                            std::to_string(book.num_participants)});
    }
}

// ---------------------------------------------------------------------------
// results.csv: phase,precinct,mode,candidate,votes
// ---------------------------------------------------------------------------

namespace {
const std::vector<std::string> kResultsHeader = {"phase", "precinct", "mode", "candidate", "votes"};
}

std::vector<PrecinctModeTally> parse_precinct_results(std::istream& in, std::string source) {
    CsvReader reader(in, std::move(source));
    expect_header(reader, kResultsHeader);

    std::vector<PrecinctModeTally> rows;
    std::unordered_map<std::string, int> seen;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        check_field_count(reader, fields, kResultsHeader.size());
        PrecinctModeTally row;
        auto phase = parse_phase(fields[0]);
        if (!phase) reader.fail("phase", "unrecognized phase '" + fields[0] + "'");
        row.phase = *phase;
        row.precinct = fields[1];
        row.mode = parse_mode_cell(reader, "mode", fields[2]);
        row.candidate = fields[3];
        if (row.candidate.empty()) reader.fail("candidate", "blank candidate");
        row.votes = parse_count_cell(reader, "votes", fields[4]);
        std::string key = fields[0] + "\x1f" + row.precinct + "\x1f" +
                          std::string(to_string(row.mode)) + "\x1f" + row.candidate;
        if (!seen.emplace(key, reader.line()).second) {
            reader.fail("candidate", "duplicate (phase, precinct, mode, candidate) row");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void serialize_precinct_results(std::ostream& out, const std::vector<PrecinctModeTally>& rows) {
    write_csv_row(out, kResultsHeader);
    for (const auto& row : rows) {
        write_csv_row(out, {std::string(to_string(row.phase)), row.precinct,
                            std::string(to_string(row.mode)), row.candidate, std::to_string(row.votes)});
    }
}

// ---------------------------------------------------------------------------
// images.txt: one canonical ImageRef per line
// ---------------------------------------------------------------------------

std::vector<ImageRef> parse_image_inventory(std::istream& in, std::string source) {
    std::vector<ImageRef> refs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            refs.push_back(ImageRef::parse(line));
        } catch (const std::invalid_argument& err) {
            throw ParseError(source, line_no, "image_ref", err.what());
        }
    }
    return refs;
}

void serialize_image_inventory(std::ostream& out, const std::vector<ImageRef>& refs) {
    for (const auto& ref : refs) out << ref.str() << '\n';
}

// ---------------------------------------------------------------------------
// Path wrappers
// ---------------------------------------------------------------------------

namespace {
std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
    return in;
}
}  // namespace

std::vector<CastVoteRecord> load_cvr_export(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_cvr_export(in, path.string());
}
std::vector<BatchSheet> load_batch_sheets(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_batch_sheets(in, path.string());
}
std::vector<AuditRow> load_audit_spreadsheet(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_audit_spreadsheet(in, path.string());
}
Manifest load_manifest(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_manifest(in, path.string());
}
std::vector<PollbookSummary> load_pollbook(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_pollbook(in, path.string());
}
std::vector<PrecinctModeTally> load_precinct_results(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_precinct_results(in, path.string());
}
std::vector<ImageRef> load_image_inventory(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_image_inventory(in, path.string());
}

}  // namespace canvass
