#include "canvass/report.hpp"

#include <algorithm>
#include <sstream>

namespace canvass::report {

using nlohmann::json;

json new_report(json config) {
    json report;
    report["schema_version"] = kSchemaVersion;
    report["tool"] = json{{"name", kToolName}, {"version", kToolVersion}};
    report["config"] = std::move(config);
    report["findings"] = json::array();
    report["sections"] = json::object();
    return report;
}

void add_finding(json& report, std::string_view check, std::string detail, json data) {
    json finding;
    finding["check"] = std::string(check);
    finding["detail"] = std::move(detail);
    if (!data.empty()) finding["data"] = std::move(data);
    report["findings"].push_back(std::move(finding));
}

namespace {

json tally_cells(const TallyVector& tally) {
    auto cell = [](const Count& c) { return c ? json(*c) : json(nullptr); };
    return json{{"trump", cell(tally.trump)},         {"biden", cell(tally.biden)},
                {"jorgensen", cell(tally.jorgensen)}, {"write_in", cell(tally.write_in)},
                {"undervote_blank", cell(tally.undervote_blank)}, {"overvote", cell(tally.overvote)}};
}

std::string sheet_label(const BatchSheet& sheet) {
    std::string label;
    if (!sheet.location_or_scanner.empty()) label = sheet.location_or_scanner + " / ";
    label += sheet.batch_label;
    return label;
}

json partial_cell(const PartialSum& sum) {
    return json{{"known", sum.known}, {"has_unknown", sum.has_unknown}};
}

}  // namespace

void add_reconcile_section(json& report, const std::vector<BatchSheet>& sheets,
                           const std::vector<AuditRow>& rows) {
    MatchResult match = match_sheets(sheets, rows);
    OmissionImpact impact = omission_impact(match.missing_sheets);
    DuplicateRowCensus census = duplicate_row_census(rows);
    CandidateTotals totals = audit_totals(rows);

    json section;
    section["sheet_count"] = sheets.size();
    section["row_count"] = rows.size();
    int pass1 = 0, pass2 = 0;
    json match_log = json::array();
    for (const auto& m : match.matched) {
        (m.pass == 1 ? pass1 : pass2)++;
        if (m.pass == 2) {
            match_log.push_back(json{{"pass", m.pass},
                                     {"sheet", sheet_label(m.sheet)},
                                     {"row_label", m.row.batch_name},
                                     {"note", m.log}});
        }
    }
    section["matched"] = match.matched.size();
    section["matched_pass1"] = pass1;
    section["matched_pass2"] = pass2;
    section["tally_only_matches"] = match_log;
    section["missing_sheet_count"] = match.missing_sheets.size();
    section["ambiguous_count"] = match.ambiguous.size();
    section["unmatched_row_count"] = match.unmatched_rows.size();

    json missing = json::array();
    for (const auto& sheet : match.missing_sheets) {
        missing.push_back(json{{"source_page", sheet.source_page},
                               {"location_or_scanner", sheet.location_or_scanner},
                               {"batch_label", sheet.batch_label},
                               {"mode", std::string(to_string(sheet.mode))},
                               {"tally", tally_cells(sheet.tally)}});
        add_finding(report, "missing_sheet",
                    "batch sheet " + sheet_label(sheet) + " (" + sheet.source_page +
                        ") is not in the audit spreadsheet",
                    missing.back());
    }
    section["missing_sheets"] = missing;
    for (const auto& ambiguous : match.ambiguous) {
        json candidates = json::array();
        for (const auto& row : ambiguous.candidates) candidates.push_back(row.batch_name);
        add_finding(report, "ambiguous_sheet",
                    "batch sheet " + sheet_label(ambiguous.sheet) + " has " +
                        std::to_string(ambiguous.candidates.size()) +
                        " tally-compatible spreadsheet rows",
                    json{{"sheet", sheet_label(ambiguous.sheet)}, {"candidates", candidates}});
    }
    if (!match.unmatched_rows.empty()) {
        add_finding(report, "unmatched_rows",
                    std::to_string(match.unmatched_rows.size()) +
                        " spreadsheet rows match no batch sheet",
                    json{{"count", match.unmatched_rows.size()}});
    }

    section["omission_impact"] = json{{"trump", partial_cell(impact.trump)},
                                      {"biden", partial_cell(impact.biden)},
                                      {"jorgensen", partial_cell(impact.jorgensen)},
                                      {"write_in", partial_cell(impact.write_in)},
                                      {"undervote_blank", partial_cell(impact.undervote_blank)},
                                      {"overvote", partial_cell(impact.overvote)},
                                      {"total_known", impact.total_known()}};
    section["reported_totals"] =
        json{{"trump", totals.trump}, {"biden", totals.biden}, {"jorgensen", totals.jorgensen}};
    std::int64_t reported_votes = totals.trump + totals.biden + totals.jorgensen;
    if (reported_votes > 0 && impact.total_known() > 0) {
        double rate = discrepancy_rate(impact.total_known(), reported_votes);
        section["omitted_vote_rate"] = format_percent(rate, 4);
    }
    if (impact.total_known() > 0) {
        add_finding(report, "omission_impact",
                    "omitted sheets carry " + std::to_string(impact.total_known()) +
                        " candidate votes (trump " + std::to_string(impact.trump.known) + ", biden " +
                        std::to_string(impact.biden.known) + ", jorgensen " +
                        std::to_string(impact.jorgensen.known) +
                        (impact.write_in.has_unknown ? "; write-in deficit UNKNOWN)" : ")"),
                    section["omission_impact"]);
    }

    section["duplicate_row_census"] = json{{"duplicate_rows", census.duplicate_row_count},
                                           {"total_rows", census.total_rows},
                                           {"group_count", census.groups.size()}};
    report["sections"]["reconcile_audit"] = std::move(section);
}

void add_account_section(json& report, const AccountingLedger& ledger) {
    json section;
    for (const auto& [phase, count] : ledger.cvr_count_by_phase) {
        section["cvr_count"][std::string(to_string(phase))] = count;
    }
    for (const auto& [phase, count] : ledger.image_count_by_phase) {
        section["image_count"][std::string(to_string(phase))] = count;
    }
    if (ledger.has_manifest) section["manifest_total"] = ledger.manifest_total;
    if (ledger.has_pollbook) section["pollbook_total"] = ledger.pollbook_total;
    for (const auto& [phase, refs] : ledger.missing_image_refs) {
        json entry;
        entry["count"] = refs.size();
        json sample = json::array();
        for (std::size_t i = 0; i < refs.size() && i < 10; ++i) sample.push_back(refs[i].str());
        entry["first_refs"] = sample;
        section["missing_image_refs"][std::string(to_string(phase))] = entry;
    }
    for (const auto& [phase, batches] : ledger.missing_batches) {
        json list = json::array();
        for (const auto& batch : batches) list.push_back(batch.str());
        section["missing_image_batches"][std::string(to_string(phase))] = list;
    }
    for (const auto& finding : ledger_findings(ledger)) {
        add_finding(report, finding.check, finding.detail, json{{"magnitude", finding.magnitude}});
    }
    report["sections"]["account"] = std::move(section);
}

void add_phase_section(json& report, const PhaseComparison& comparison) {
    json section;
    json table = json::array();
    int nonzero = 0;
    for (const auto& delta : comparison.deltas) {
        json row;
        row["precinct"] = delta.precinct;
        row["mode"] = std::string(to_string(delta.mode));
        row["candidate"] = delta.candidate;
        for (const auto& [phase, votes] : delta.values) {
            row["values"][std::string(to_string(phase))] = votes;
        }
        bool any_nonzero = false;
        auto emit = [&](Phase a, Phase b, const char* name) {
            if (auto d = delta.delta(a, b)) {
                row["deltas"][name] = *d;
                if (*d != 0) any_nonzero = true;
            }
        };
        emit(Phase::Recount, Phase::Original, "recount_minus_original");
        emit(Phase::Audit, Phase::Original, "audit_minus_original");
        emit(Phase::Audit, Phase::Recount, "audit_minus_recount");
        if (auto rel = delta.relative_vs_original(Phase::Recount)) {
            row["relative"]["recount_vs_original"] = format_percent(*rel, 4);
        }
        if (auto rel = delta.relative_vs_original(Phase::Audit)) {
            row["relative"]["audit_vs_original"] = format_percent(*rel, 4);
        }
        table.push_back(row);
        if (any_nonzero) {
            ++nonzero;
            add_finding(report, "phase_delta",
                        delta.precinct + " " + std::string(to_string(delta.mode)) + " " +
                            delta.candidate + " differs across phases",
                        row);
        }
    }
    section["cells_compared"] = comparison.deltas.size();
    section["cells_with_differences"] = nonzero;
    section["table"] = std::move(table);
    json missing = json::array();
    for (const auto& cell : comparison.missing) {
        json absent = json::array();
        for (Phase phase : cell.absent_phases) absent.push_back(std::string(to_string(phase)));
        missing.push_back(json{{"precinct", cell.precinct},
                               {"mode", std::string(to_string(cell.mode))},
                               {"candidate", cell.candidate},
                               {"absent_phases", absent}});
    }
    section["missing_cells"] = missing;
    report["sections"]["compare_phases"] = std::move(section);
}

namespace {

json group_to_json(const DuplicateGroup& group) {
    json members = json::array();
    for (const auto& ref : group.members) members.push_back(ref.str());
    json doc;
    doc["members"] = members;
    doc["evidence"] = std::string(to_string(group.evidence));
    if (group.evidence == GroupEvidence::SequenceRun) {
        doc["run_length"] = group.run_length;
        doc["orientation"] = std::string(to_string(group.orientation));
    }
    doc["rare_write_in_hits"] = group.rare_write_in_hits;
    doc["signature_multiplicity"] = group.signature_multiplicity;
    return doc;
}

}  // namespace

void add_sequence_section(json& report, std::string_view phase_tag, const SequenceScan& scan) {
    json section;
    json runs = json::array();
    for (const auto& run : scan.runs) {
        runs.push_back(json{{"batch_a", run.batch_a.str()},
                            {"batch_b", run.batch_b.str()},
                            {"a_start_ref", run.first_a.str()},
                            {"b_start_ref", run.first_b.str()},
                            {"length", run.length},
                            {"orientation", std::string(to_string(run.orientation))},
                            {"rare_write_in_hits", run.rare_write_in_hits}});
    }
    section["runs"] = runs;
    json groups = json::array();
    for (const auto& group : scan.groups) {
        groups.push_back(group_to_json(group));
        add_finding(report, "duplicate_group",
                    std::string(phase_tag) + ": " + std::to_string(group.members.size()) +
                        " images share one unique vote signature in aligned scan runs",
                    groups.back());
    }
    section["groups"] = groups;
    report["sections"]["detect_duplicates_" + std::string(phase_tag)] = std::move(section);
}

void add_verify_section(json& report, std::string_view phase_tag,
                        const std::vector<GroupVerification>& checks) {
    json section;
    json entries = json::array();
    std::size_t verified = 0;
    for (const auto& check : checks) {
        json entry;
        entry["group_id"] = check.claim.group_id;
        json members = json::array();
        for (const auto& ref : check.claim.members) members.push_back(ref.str());
        entry["members"] = members;
        entry["verified"] = check.verified;
        if (!check.verified) {
            entry["failure_reason"] = check.failure_reason;
            json missing = json::array();
            for (const auto& ref : check.missing) missing.push_back(ref.str());
            if (!missing.empty()) entry["missing"] = missing;
            add_finding(report, "claim_unverified",
                        std::string(phase_tag) + ": claimed group " + check.claim.group_id +
                            " could not be verified (" + check.failure_reason + ")",
                        entry);
        } else {
            ++verified;
            entry["signature_multiplicity"] = check.group.signature_multiplicity;
            add_finding(report, "verified_duplicate_group",
                        std::string(phase_tag) + ": claimed group " + check.claim.group_id + " (" +
                            std::to_string(check.claim.members.size()) +
                            " refs) verified against the CVRs",
                        entry);
        }
        entries.push_back(std::move(entry));
    }
    section["claims"] = checks.size();
    section["verified"] = verified;
    section["entries"] = std::move(entries);
    report["sections"]["verify_groups_" + std::string(phase_tag)] = std::move(section);
}

void add_tally_section(json& report, std::string_view phase_tag,
                       const std::map<std::string, std::int64_t>& tally, const AdjustedTally* adjusted) {
    json section;
    section["tally"] = tally;
    if (adjusted) {
        section["adjusted"] = adjusted->adjusted;
        section["removed"] = adjusted->removed;
        json rejected = json::array();
        for (const auto& reject : adjusted->rejected) {
            rejected.push_back(json{{"reason", reject.reason}, {"group", group_to_json(reject.group)}});
        }
        section["rejected_groups"] = rejected;
        std::int64_t removed_total = 0;
        for (const auto& [candidate, count] : adjusted->removed) removed_total += count;
        if (removed_total > 0) {
            add_finding(report, "dedup_adjustment",
                        std::string(phase_tag) + ": " + std::to_string(removed_total) +
                            " votes in the reported tally come from repeated scans",
                        json{{"removed", adjusted->removed}});
        }
    }
    report["sections"]["tally_" + std::string(phase_tag)] = std::move(section);
}

void add_lcb_section(json& report, const ConfidenceBound& bound) {
    json section;
    section["population"] = bound.population;
    section["sample"] = bound.sample;
    section["agreements"] = bound.agreements;
    section["confidence"] = bound.confidence;
    section["lower_bound"] = bound.lower_bound;
    section["convention"] =
        "smallest M with P[X >= agreements] > 1 - confidence (exact hypergeometric tail)";
    report["sections"]["lcb"] = std::move(section);
}

void add_sample_section(json& report, const SampleSelection& selection) {
    json section;
    section["seed"] = selection.seed;
    section["population"] = selection.population;
    section["sample_size"] = selection.indices.size();
    section["indices"] = selection.indices;
    report["sections"]["sample"] = std::move(section);
}

int exit_code(const json& report) { return report.at("findings").empty() ? 0 : 1; }

std::string to_json_text(const json& report) { return report.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Plain text: a readable projection of the JSON document.
// ---------------------------------------------------------------------------

namespace {

void render_phase_table(std::ostringstream& out, const json& section) {
    const auto& table = section.at("table");
    std::vector<std::array<std::string, 8>> rows;
    rows.push_back({"precinct", "mode", "candidate", "original", "recount", "audit",
                    "recount-original", "audit-original"});
    for (const auto& row : table) {
        auto value = [&row](const char* phase) -> std::string {
            if (row.contains("values") && row.at("values").contains(phase)) {
                return std::to_string(row.at("values").at(phase).get<std::int64_t>());
            }
            return "";
        };
        auto delta = [&row](const char* name) -> std::string {
            if (row.contains("deltas") && row.at("deltas").contains(name)) {
                std::int64_t d = row.at("deltas").at(name).get<std::int64_t>();
                return (d > 0 ? "+" : "") + std::to_string(d);
            }
            return "";
        };
        rows.push_back({row.at("precinct").get<std::string>(), row.at("mode").get<std::string>(),
                        row.at("candidate").get<std::string>(), value("original"), value("recount"),
                        value("audit"), delta("recount_minus_original"), delta("audit_minus_original")});
    }
    std::array<std::size_t, 8> width{};
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (const auto& row : rows) {
        out << "    ";
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
        }
        out << "\n";
    }
}

}  // namespace

std::string to_plain_text(const json& report) {
    std::ostringstream out;
    out << report.at("tool").at("name").get<std::string>() << " report (schema "
        << report.at("schema_version").get<int>() << ")\n";
    out << "config: " << report.at("config").dump() << "\n";

    const auto& findings = report.at("findings");
    out << "findings: " << findings.size() << "\n";
    for (const auto& finding : findings) {
        out << "  [" << finding.at("check").get<std::string>() << "] "
            << finding.at("detail").get<std::string>() << "\n";
    }

    const auto& sections = report.at("sections");
    for (const auto& [name, section] : sections.items()) {
        out << "section " << name << ":\n";
        if (name == "compare_phases") {
            out << "  cells compared: " << section.at("cells_compared") << ", with differences: "
                << section.at("cells_with_differences") << "\n";
            render_phase_table(out, section);
            if (!section.at("missing_cells").empty()) {
                out << "  cells absent from some phases: " << section.at("missing_cells").size()
                    << "\n";
            }
            continue;
        }
        if (name == "reconcile_audit") {
            out << "  sheets " << section.at("sheet_count") << " vs rows " << section.at("row_count")
                << ": matched " << section.at("matched") << " (pass1 " << section.at("matched_pass1")
                << ", tally-only " << section.at("matched_pass2") << "), missing "
                << section.at("missing_sheet_count") << ", ambiguous "
                << section.at("ambiguous_count") << ", unmatched rows "
                << section.at("unmatched_row_count") << "\n";
            for (const auto& entry : section.at("tally_only_matches")) {
                out << "  tally-only: sheet " << entry.at("sheet").get<std::string>()
                    << " <- row '" << entry.at("row_label").get<std::string>() << "'\n";
            }
            const auto& impact = section.at("omission_impact");
            out << "  omission impact: trump " << impact.at("trump").at("known") << ", biden "
                << impact.at("biden").at("known") << ", jorgensen "
                << impact.at("jorgensen").at("known") << ", total " << impact.at("total_known");
            if (impact.at("write_in").at("has_unknown").get<bool>()) {
                out << ", write-in UNKNOWN (>= " << impact.at("write_in").at("known") << ")";
            }
            out << "\n";
            if (section.contains("omitted_vote_rate")) {
                out << "  omitted votes as a share of reported totals: "
                    << section.at("omitted_vote_rate").get<std::string>() << "\n";
            }
            const auto& census = section.at("duplicate_row_census");
            out << "  duplicate-row census: " << census.at("duplicate_rows") << " of "
                << census.at("total_rows") << " rows repeat a within-county tally ("
                << census.at("group_count") << " groups)\n";
            continue;
        }
        if (name == "lcb") {
            out << "  population " << section.at("population") << ", sample " << section.at("sample")
                << ", agreements " << section.at("agreements") << ", confidence "
                << section.at("confidence") << "\n";
            out << "  lower bound: " << section.at("lower_bound") << "\n";
            out << "  convention: " << section.at("convention").get<std::string>() << "\n";
            continue;
        }
        out << "  " << section.dump() << "\n";
    }
    return out.str();
}

}  // namespace canvass::report
