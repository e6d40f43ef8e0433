#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "canvass/audit_reconcile.hpp"
#include "canvass/fixtures.hpp"
#include "canvass/rng.hpp"
#include "support/gen.hpp"

using namespace canvass;

namespace {

BatchSheet sheet(const char* scanner, const char* batch, std::int64_t t, std::int64_t b,
                 std::int64_t j, VotingMode mode = VotingMode::AbsenteeByMail) {
    BatchSheet s;
    s.source_page = "1 at 1";
    s.location_or_scanner = scanner;
    s.batch_label = batch;
    s.mode = mode;
    s.tally = {t, b, j, 0, 0, 0};
    return s;
}

AuditRow row(const char* name, std::int64_t t, std::int64_t b, std::int64_t j) {
    return AuditRow{"Fulton", name, t, b, j};
}

// The omitted-sheet table plus the three relabeled transcriptions, at
// unit-test scale: every other sheet/row pair matches exactly.
struct MiniFixture {
    std::vector<BatchSheet> sheets;
    std::vector<AuditRow> rows;
    std::vector<BatchSheet> omitted;
};

MiniFixture mini_fixture() {
    MiniFixture fx;
    AnomalySpec spec = preset_spec("paper-tables");
    fx.omitted = spec.omitted_sheets;

    // Correctly transcribed filler.
    fx.sheets.push_back(sheet("1", "501", 20, 80, 1));
    fx.rows.push_back(row("Scanner 1 Batch 501", 20, 80, 1));
    fx.sheets.push_back(sheet("Chastain", "201", 150, 420, 6, VotingMode::Advance));
    fx.rows.push_back(row("Chastain Batch 201", 150, 420, 6));
    fx.sheets.push_back(sheet("", "ED002A-1", 60, 90, 2, VotingMode::ElectionDay));
    fx.rows.push_back(row("ED002A-1", 60, 90, 2));

    // Relabeled transcriptions that can only match by tally.
    fx.sheets.push_back(sheet("3", "162", 4, 93, 2));
    fx.rows.push_back(row("Scanner 3 Ballot 162", 4, 93, 2));
    fx.sheets.push_back(sheet("2", "400", 6, 92, 0));
    fx.rows.push_back(row("Absentee Scanner 2 Batch 400", 6, 92, 0));
    fx.sheets.push_back(sheet("3", "253", 12, 83, 1));
    fx.rows.push_back(row("Absentee Scanner 3 Batch 253", 12, 83, 1));

    // The eleven sheets missing from the spreadsheet.
    for (const auto& s : fx.omitted) fx.sheets.push_back(s);
    return fx;
}

}  // namespace

TEST_CASE("batch keys normalize case, whitespace, and ranges") {
    CHECK(normalize_label("12--14") == "12-14");
    CHECK(normalize_label("  Chastain ") == "chastain");
    CHECK(sheet_batch_key(sheet("3", "48", 0, 0, 0)) == BatchKey{"3", "48", ""});

    CHECK(row_batch_key(row("Scanner 3 Batch 48", 0, 0, 0)) == BatchKey{"3", "48", ""});
    CHECK(row_batch_key(row("Chastain Batch 12", 0, 0, 0)) == BatchKey{"chastain", "12", ""});
    CHECK(row_batch_key(row("Park Tavern Batch 7", 0, 0, 0)) == BatchKey{"parktavern", "7", ""});
    CHECK(row_batch_key(row("AP01A-1", 0, 0, 0)) == BatchKey{"", "ap01a-1", ""});
    // The [sic] transcription and mode prefixes block exact matching.
    CHECK(row_batch_key(row("Scanner 3 Ballot 162", 0, 0, 0)).extra == "ballot 162");
    CHECK(row_batch_key(row("Absentee Scanner 2 Batch 400", 0, 0, 0)).extra == "absentee");
}

TEST_CASE("label affinity counts identifier-token overlap") {
    AuditRow relabeled = row("Scanner 3 Ballot 162", 4, 93, 2);
    CHECK(label_affinity(sheet("3", "162", 4, 93, 2), relabeled) == 2);
    CHECK(label_affinity(sheet("3", "48", 4, 93, 2), relabeled) == 1);
}

TEST_CASE("match_sheets finds exactly the omitted sheets") {
    MiniFixture fx = mini_fixture();
    MatchResult result = match_sheets(fx.sheets, fx.rows);

    CHECK(result.matched.size() == 6);
    CHECK(result.missing_sheets.size() == 11);
    CHECK(result.ambiguous.empty());
    CHECK(result.unmatched_rows.empty());

    int pass2 = 0;
    for (const auto& m : result.matched) {
        if (m.pass == 2) {
            ++pass2;
            CHECK(m.log.find("tally-only") != std::string::npos);
        }
    }
    CHECK(pass2 == 3);

    // The missing set is exactly the omitted table, independent of order.
    auto key = [](const BatchSheet& s) { return s.location_or_scanner + "/" + s.batch_label; };
    std::set<std::string> missing_keys, omitted_keys;
    for (const auto& s : result.missing_sheets) missing_keys.insert(key(s));
    for (const auto& s : fx.omitted) omitted_keys.insert(key(s));
    CHECK(missing_keys == omitted_keys);
}

TEST_CASE("bijective label match leaves nothing missing") {
    std::vector<BatchSheet> sheets = {sheet("1", "1", 5, 6, 0), sheet("1", "2", 7, 8, 0)};
    std::vector<AuditRow> rows = {row("Scanner 1 Batch 1", 5, 6, 0), row("Scanner 1 Batch 2", 7, 8, 0)};
    MatchResult result = match_sheets(sheets, rows);
    CHECK(result.matched.size() == 2);
    CHECK(result.missing_sheets.empty());
    CHECK(result.unmatched_rows.empty());
}

TEST_CASE("two sheets sharing a tally contend for one row") {
    // Labels disambiguate: the sheet whose identifiers appear in the row
    // label wins; the other is missing.
    std::vector<BatchSheet> sheets = {sheet("9", "7", 4, 93, 2), sheet("9", "8", 4, 93, 2)};
    std::vector<AuditRow> rows = {row("Scanner 9 Ballot 7", 4, 93, 2)};
    MatchResult with_labels = match_sheets(sheets, rows);
    CHECK(with_labels.matched.size() == 1);
    CHECK(with_labels.matched[0].sheet.batch_label == "7");
    CHECK(with_labels.missing_sheets.size() == 1);
    CHECK(with_labels.missing_sheets[0].batch_label == "8");
    CHECK(with_labels.ambiguous.empty());

    // Labels tie: both ambiguous, the row stays unmatched.
    std::vector<AuditRow> vague = {row("late batch", 4, 93, 2)};
    MatchResult tied = match_sheets(sheets, vague);
    CHECK(tied.matched.empty());
    CHECK(tied.ambiguous.size() == 2);
    CHECK(tied.missing_sheets.empty());
    CHECK(tied.unmatched_rows.size() == 1);
}

TEST_CASE("several candidate rows make a sheet ambiguous") {
    std::vector<BatchSheet> sheets = {sheet("9", "7", 4, 93, 2)};
    std::vector<AuditRow> rows = {row("weird A", 4, 93, 2), row("weird B", 4, 93, 2)};
    MatchResult result = match_sheets(sheets, rows);
    CHECK(result.matched.empty());
    CHECK(result.ambiguous.size() == 1);
    CHECK(result.ambiguous[0].candidates.size() == 2);
}

TEST_CASE("matching properties on random instances") {
    Rng rng(99);
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<BatchSheet> sheets;
        std::vector<AuditRow> rows;
        std::size_t ns = rng.below(9) + 1, nr = rng.below(9) + 1;
        for (std::size_t i = 0; i < ns; ++i) {
            BatchSheet s = sheet(std::to_string(rng.below(3)).c_str(),
                                 std::to_string(rng.below(5)).c_str(),
                                 static_cast<std::int64_t>(rng.below(4)),
                                 static_cast<std::int64_t>(rng.below(4)),
                                 static_cast<std::int64_t>(rng.below(2)));
            sheets.push_back(s);
        }
        for (std::size_t i = 0; i < nr; ++i) {
            std::string name = "Scanner " + std::to_string(rng.below(3)) + " Batch " +
                               std::to_string(rng.below(5));
            rows.push_back(row(name.c_str(), static_cast<std::int64_t>(rng.below(4)),
                               static_cast<std::int64_t>(rng.below(4)),
                               static_cast<std::int64_t>(rng.below(2))));
        }
        MatchResult result = match_sheets(sheets, rows);

        // Partition: every sheet in exactly one bucket.
        CHECK(result.matched.size() + result.missing_sheets.size() + result.ambiguous.size() ==
              sheets.size());
        // No row matched twice.
        std::set<std::size_t> used;
        for (const auto& m : result.matched) CHECK(used.insert(m.row_index).second);

        // Against the exhaustive max matching on tally edges: greedy never
        // exceeds it, and reaches it whenever nothing was ambiguous.
        std::size_t oracle = testgen::max_matching_oracle(sheets, rows);
        CHECK(result.matched.size() <= oracle);
        CHECK(oracle <= result.matched.size() + result.ambiguous.size());
        if (result.ambiguous.empty()) CHECK(result.matched.size() == oracle);

        // Monotonicity: removing a row never shrinks missing_sheets.
        if (!rows.empty()) {
            std::vector<AuditRow> fewer = rows;
            fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(rng.below(fewer.size())));
            MatchResult smaller = match_sheets(sheets, fewer);
            CHECK(smaller.missing_sheets.size() >= result.missing_sheets.size());
        }
    }
}

TEST_CASE("omission impact sums the omitted tallies") {
    AnomalySpec spec = preset_spec("paper-tables");
    OmissionImpact impact = omission_impact(spec.omitted_sheets);
    CHECK(impact.trump == PartialSum{1582, false});
    CHECK(impact.biden == PartialSum{2288, false});
    CHECK(impact.jorgensen == PartialSum{65, false});
    CHECK(impact.total_known() == 3935);
    CHECK(impact.write_in.has_unknown);
    CHECK(impact.write_in.known == 12);

    SUBCASE("empty list is all zeros") {
        OmissionImpact none = omission_impact({});
        CHECK(none.total_known() == 0);
        CHECK(!none.write_in.has_unknown);
    }
    SUBCASE("last two rows only") {
        std::vector<BatchSheet> pair(spec.omitted_sheets.end() - 2, spec.omitted_sheets.end());
        OmissionImpact two = omission_impact(pair);
        CHECK(two.trump.known == 1226);
        CHECK(two.biden.known == 1210);
        CHECK(two.jorgensen.known == 48);
    }
    SUBCASE("additive over disjoint splits") {
        Rng rng(5);
        for (int iter = 0; iter < 50; ++iter) {
            std::vector<BatchSheet> a, b;
            for (int i = 0; i < 12; ++i) {
                (rng.below(2) ? a : b).push_back(testgen::random_sheet(rng));
            }
            std::vector<BatchSheet> both = a;
            both.insert(both.end(), b.begin(), b.end());
            OmissionImpact ia = omission_impact(a), ib = omission_impact(b),
                           iab = omission_impact(both);
            CHECK(iab.trump == ia.trump + ib.trump);
            CHECK(iab.biden == ia.biden + ib.biden);
            CHECK(iab.write_in == ia.write_in + ib.write_in);
        }
    }
}

TEST_CASE("discrepancy rates") {
    CHECK(format_percent(discrepancy_rate(634, 524659), 2) == "0.12%");
    CHECK(format_percent(discrepancy_rate(4569, 524659), 2) == "0.87%");
    CHECK(format_percent(discrepancy_rate(0, 1000), 2) == "0.00%");
    CHECK(format_percent(discrepancy_rate(634, 524659), 4) == "0.1208%");
    CHECK_THROWS_AS(discrepancy_rate(10, 0), std::domain_error);
    CHECK_THROWS_AS(discrepancy_rate(10, -5), std::domain_error);
}

TEST_CASE("duplicate row census counts within-county repeats") {
    std::vector<AuditRow> rows = {{"A", "r1", 1, 2, 0}, {"A", "r2", 1, 2, 0}, {"A", "r3", 3, 3, 0}};
    DuplicateRowCensus census = duplicate_row_census(rows);
    CHECK(census.duplicate_row_count == 2);
    CHECK(census.groups.size() == 1);
    CHECK(census.groups[0].row_indices == std::vector<std::size_t>{0, 1});

    SUBCASE("all distinct tallies count zero") {
        std::vector<AuditRow> distinct = {{"A", "r1", 1, 2, 0}, {"A", "r2", 1, 3, 0}};
        CHECK(duplicate_row_census(distinct).duplicate_row_count == 0);
    }
    SUBCASE("same tally in different counties is not a repeat") {
        std::vector<AuditRow> cross = {{"A", "r1", 1, 2, 0}, {"B", "r2", 1, 2, 0}};
        CHECK(duplicate_row_census(cross).duplicate_row_count == 0);
    }
}

TEST_CASE("audit totals are column sums") {
    CHECK(audit_totals({}) == CandidateTotals{0, 0, 0});
    std::vector<AuditRow> rows = {row("a", 6, 92, 0), row("b", 4, 93, 2)};
    CHECK(audit_totals(rows) == CandidateTotals{10, 185, 2});
}
