#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "canvass/accounting.hpp"
#include "canvass/audit_reconcile.hpp"
#include "canvass/dup_forensics.hpp"
#include "canvass/fixtures.hpp"
#include "canvass/rng.hpp"
#include "support/gen.hpp"
#include "support/specgen.hpp"

using namespace canvass;
using testgen::random_small_spec;
namespace fs = std::filesystem;

namespace {

// Cross-validates every detector against the generator's ground truth.
void check_closure(const AnomalySpec& spec) {
    FixtureData data = generate_fixture(spec);

    if (spec.sheet_count > 0) {
        REQUIRE(data.truth.audit.has_value());
        MatchResult match = match_sheets(data.sheets, data.rows);
        auto key = [](const BatchSheet& s) { return s.location_or_scanner + "/" + s.batch_label; };
        std::multiset<std::string> found, expected;
        for (const auto& s : match.missing_sheets) found.insert(key(s));
        for (const auto& s : data.truth.audit->omitted_sheets) expected.insert(key(s));
        CHECK(found == expected);
        CHECK(match.ambiguous.empty());
        CHECK(match.unmatched_rows.empty());

        int pass2 = 0;
        for (const auto& m : match.matched) {
            if (m.pass == 2) ++pass2;
        }
        CHECK(pass2 == static_cast<int>(data.truth.audit->tally_only_row_labels.size()));

        CHECK(duplicate_row_census(data.rows).duplicate_row_count ==
              data.truth.audit->duplicate_row_census_count);
        CHECK(audit_totals(data.rows) == data.truth.audit->totals);

        OmissionImpact impact = omission_impact(match.missing_sheets);
        CHECK(impact.trump == data.truth.audit->omission.trump);
        CHECK(impact.biden == data.truth.audit->omission.biden);
        CHECK(impact.jorgensen == data.truth.audit->omission.jorgensen);
        CHECK(impact.write_in == data.truth.audit->omission.write_in);
    }

    for (const auto& [phase, phase_data] : data.phases) {
        const PhaseTruth& truth = data.truth.phases.at(phase);
        CHECK(static_cast<std::int64_t>(phase_data.cvrs.size()) == truth.cvr_count);
        CHECK(tally_cvrs(phase_data.cvrs, "PRES") == truth.pres_tally);

        SequenceScan scan = detect_sequence_runs(phase_data.cvrs, 10);
        std::vector<std::vector<ImageRef>> found_groups;
        for (const auto& group : scan.groups) found_groups.push_back(group.members);
        std::sort(found_groups.begin(), found_groups.end());
        CHECK(found_groups == truth.sequence_groups);

        std::multiset<std::tuple<std::string, std::string, std::uint32_t, std::string>> found_runs,
            expected_runs;
        for (const auto& run : scan.runs) {
            found_runs.insert({run.batch_a.str(), run.batch_b.str(), run.length,
                               std::string(to_string(run.orientation))});
        }
        for (const auto& run : truth.runs) {
            expected_runs.insert({run.batch_a.str(), run.batch_b.str(), run.length,
                                  std::string(to_string(run.orientation))});
        }
        CHECK(found_runs == expected_runs);

        auto checks = detect_explicit_multiples(phase_data.claimed, phase_data.cvrs);
        for (const auto& check : checks) CHECK(check.verified);

        std::vector<DuplicateGroup> groups = scan.groups;
        std::set<std::vector<ImageRef>> seen;
        for (const auto& g : groups) seen.insert(g.members);
        for (const auto& check : checks) {
            if (check.verified && !seen.count(check.group.members)) groups.push_back(check.group);
        }
        AdjustedTally adjusted = dedup_adjusted_tally(phase_data.cvrs, groups, "PRES");
        CHECK(adjusted.removed == truth.dedup_removed);
        CHECK(adjusted.rejected.empty());

        // Accounting closure for this phase.
        std::map<Phase, PhaseRecordSet> summaries;
        summaries[phase] = summarize_cvrs(phase_data.cvrs);
        std::map<Phase, std::vector<ImageRef>> images;
        images[phase] = phase_data.images;
        AccountingLedger ledger = count_reconciliation(summaries, images, std::nullopt, std::nullopt);
        CHECK(static_cast<std::int64_t>(ledger.missing_image_refs[phase].size()) ==
              truth.images_missing);
        std::vector<BatchId> expected_batches = truth.missing_image_batches;
        CHECK(ledger.missing_batches[phase] == expected_batches);
    }
}

}  // namespace

TEST_CASE("identical spec and seed give byte-identical fixtures") {
    AnomalySpec spec = preset_spec("paper-tables");
    fs::path dir_a = fs::temp_directory_path() / "canvass-fx-a";
    fs::path dir_b = fs::temp_directory_path() / "canvass-fx-b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    generate_fixture_to_dir(spec, dir_a);
    generate_fixture_to_dir(spec, dir_b);

    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir_a)) {
        ++files;
        std::ifstream a(entry.path(), std::ios::binary);
        std::ifstream b(dir_b / entry.path().filename(), std::ios::binary);
        REQUIRE(b.good());
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        CHECK(sa.str() == sb.str());
    }
    CHECK(files >= 10);
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    SUBCASE("a different seed changes the data") {
        AnomalySpec reseeded = spec;
        reseeded.seed += 1;
        FixtureData a = generate_fixture(spec);
        FixtureData b = generate_fixture(reseeded);
        CHECK(a.phases.at(Phase::Original).cvrs != b.phases.at(Phase::Original).cvrs);
    }
}

TEST_CASE("the no-anomaly preset runs every check clean") {
    FixtureData data = generate_fixture(preset_spec("no-anomaly"));

    MatchResult match = match_sheets(data.sheets, data.rows);
    CHECK(match.missing_sheets.empty());
    CHECK(match.ambiguous.empty());
    CHECK(match.unmatched_rows.empty());
    CHECK(duplicate_row_census(data.rows).duplicate_row_count == 0);

    for (const auto& [phase, phase_data] : data.phases) {
        SequenceScan scan = detect_sequence_runs(phase_data.cvrs, 10);
        CHECK(scan.runs.empty());
        CHECK(scan.groups.empty());
        CHECK(phase_data.claimed.empty());
    }

    std::map<Phase, std::vector<CastVoteRecord>> cvrs;
    std::map<Phase, std::vector<ImageRef>> images;
    for (const auto& [phase, phase_data] : data.phases) {
        cvrs[phase] = phase_data.cvrs;
        images[phase] = phase_data.images;
    }
    AccountingLedger ledger = count_reconciliation(cvrs, images, data.manifest, data.pollbook);
    CHECK(ledger_findings(ledger).empty());
}

TEST_CASE("paper-tables fixture reproduces the documented anomalies") {
    FixtureData data = generate_fixture(preset_spec("paper-tables"));

    SUBCASE("missing sheets and omission impact") {
        MatchResult match = match_sheets(data.sheets, data.rows);
        CHECK(match.matched.size() == 1916);
        CHECK(match.missing_sheets.size() == 11);
        OmissionImpact impact = omission_impact(match.missing_sheets);
        CHECK(impact.trump.known == 1582);
        CHECK(impact.biden.known == 2288);
        CHECK(impact.jorgensen.known == 65);
        CHECK(impact.total_known() == 3935);
        CHECK(impact.write_in.has_unknown);
    }

    SUBCASE("sequence scan recovers the recount stacks exactly") {
        const PhaseData& recount = data.phases.at(Phase::Recount);
        SequenceScan scan = detect_sequence_runs(recount.cvrs, 10);
        REQUIRE(scan.groups.size() == 11);

        // The three pairs inside the long identical run.
        std::set<std::string> members;
        for (const auto& group : scan.groups) {
            for (const auto& ref : group.members) members.insert(ref.str());
        }
        CHECK(members.count("00801_00043_000042"));
        CHECK(members.count("00801_00044_000042"));
        CHECK(members.count("00801_00043_000168"));
        CHECK(members.count("05160_00074_000023"));
        CHECK(members.count("05160_00067_000008"));
        CHECK(members.count("00794_00017_000024"));
        CHECK(members.count("00791_00026_000091"));
        CHECK(members.count("00791_00019_000010"));
        CHECK(members.count("00794_00019_000006"));
        CHECK(members.count("00791_00026_000075"));
        CHECK(members.count("00791_00019_000026"));

        bool found_214 = false;
        for (const auto& run : scan.runs) {
            if (run.batch_a == BatchId{801, 43} && run.batch_b == BatchId{801, 44}) {
                CHECK(run.length == 214);
                CHECK(run.orientation == RunOrientation::Same);
                CHECK(run.rare_write_in_hits == 3);
                found_214 = true;
            }
        }
        CHECK(found_214);
    }

    SUBCASE("claimed groups verify on both phases") {
        auto original = detect_explicit_multiples(data.phases.at(Phase::Original).claimed,
                                                  data.phases.at(Phase::Original).cvrs);
        CHECK(original.size() == 14);
        int rw01_refs = 0;
        std::unordered_map<std::string, std::string> precinct_by_ref;
        for (const auto& cvr : data.phases.at(Phase::Original).cvrs) {
            precinct_by_ref[cvr.image.str()] = cvr.precinct;
        }
        for (const auto& check : original) {
            CHECK(check.verified);
            for (const auto& ref : check.claim.members) {
                if (precinct_by_ref[ref.str()] == "RW01") ++rw01_refs;
            }
        }
        CHECK(rw01_refs == 24);

        auto recount = detect_explicit_multiples(data.phases.at(Phase::Recount).claimed,
                                                 data.phases.at(Phase::Recount).cvrs);
        CHECK(recount.size() == 11);
        std::size_t refs = 0;
        for (const auto& check : recount) {
            CHECK(check.verified);
            refs += check.claim.members.size();
        }
        CHECK(refs == 29);
    }

    SUBCASE("missing image batches include the named pair") {
        std::map<Phase, PhaseRecordSet> summaries;
        summaries[Phase::Recount] = summarize_cvrs(data.phases.at(Phase::Recount).cvrs);
        std::map<Phase, std::vector<ImageRef>> images;
        images[Phase::Recount] = data.phases.at(Phase::Recount).images;
        AccountingLedger ledger =
            count_reconciliation(summaries, images, std::nullopt, std::nullopt);
        const auto& batches = ledger.missing_batches[Phase::Recount];
        CHECK(std::find(batches.begin(), batches.end(), BatchId{801, 117}) != batches.end());
        CHECK(std::find(batches.begin(), batches.end(), BatchId{801, 118}) != batches.end());
    }
}

TEST_CASE("fixture specs round-trip through json") {
    AnomalySpec spec = preset_spec("paper-fulton");
    AnomalySpec back = spec_from_json(spec_to_json(spec));
    CHECK(spec_to_json(back) == spec_to_json(spec));

    AnomalySpec small = random_small_spec(17);
    CHECK(spec_to_json(spec_from_json(spec_to_json(small))) == spec_to_json(small));
}

TEST_CASE("unachievable specs are rejected with the violated constraint") {
    SUBCASE("run longer than its phase") {
        AnomalySpec spec;
        spec.cvr_targets[Phase::Original] = 100;
        RunSpec run;
        run.phase = Phase::Original;
        run.source = {1, 1};
        run.length = 300;
        run.targets.push_back({{1, 2}, 1, RunOrientation::Same});
        spec.duplicate_runs.push_back(run);
        CHECK_THROWS_AS(generate_fixture(spec), GenerationError);
    }
    SUBCASE("reversed target shorter than the run") {
        AnomalySpec spec;
        spec.cvr_targets[Phase::Original] = 2000;
        RunSpec run;
        run.phase = Phase::Original;
        run.source = {1, 1};
        run.length = 12;
        run.targets.push_back({{1, 2}, 5, RunOrientation::Reversed});
        spec.duplicate_runs.push_back(run);
        CHECK_THROWS_AS(generate_fixture(spec), GenerationError);
    }
    SUBCASE("cvr targets for the audit phase") {
        AnomalySpec spec;
        spec.cvr_targets[Phase::Audit] = 100;
        CHECK_THROWS_AS(generate_fixture(spec), GenerationError);
    }
}

TEST_CASE("random small specs: every injected anomaly is found, nothing else") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        CAPTURE(seed);
        check_closure(random_small_spec(seed));
    }
}
