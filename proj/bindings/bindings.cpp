// Python module exposing the main record-reconciliation operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "canvass/accounting.hpp"
#include "canvass/audit_reconcile.hpp"
#include "canvass/dup_forensics.hpp"
#include "canvass/errors.hpp"
#include "canvass/fixtures.hpp"
#include "canvass/records.hpp"

namespace py = pybind11;
using namespace canvass;

namespace {

template <typename T, typename Parser>
T parse_text(Parser parser, const std::string& text, const std::string& source) {
    std::istringstream in(text);
    return parser(in, source);
}

}  // namespace

PYBIND11_MODULE(_canvasscheck, m) {
    m.doc() = "Election-record reconciliation across count phases: missing batch-sheet "
              "detection, duplicate-scan forensics, ballot accounting, and exact "
              "hypergeometric confidence bounds.";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<GenerationError>(m, "GenerationError", PyExc_ValueError);

    py::enum_<VotingMode>(m, "VotingMode")
        .value("ELECTION_DAY", VotingMode::ElectionDay)
        .value("ADVANCE", VotingMode::Advance)
        .value("ABSENTEE_BY_MAIL", VotingMode::AbsenteeByMail)
        .value("PROVISIONAL", VotingMode::Provisional)
        .value("UNKNOWN", VotingMode::Unknown);

    py::enum_<Phase>(m, "Phase")
        .value("ORIGINAL", Phase::Original)
        .value("RECOUNT", Phase::Recount)
        .value("AUDIT", Phase::Audit);

    py::enum_<RunOrientation>(m, "RunOrientation")
        .value("SAME", RunOrientation::Same)
        .value("REVERSED", RunOrientation::Reversed);

    py::enum_<GroupEvidence>(m, "GroupEvidence")
        .value("SEQUENCE_RUN", GroupEvidence::SequenceRun)
        .value("EXPLICIT_PAIRING", GroupEvidence::ExplicitPairing);

    py::class_<ImageRef>(m, "ImageRef")
        .def(py::init<std::uint32_t, std::uint32_t, std::uint32_t>(), py::arg("scanner_id"),
             py::arg("batch_id"), py::arg("image_seq"))
        .def_readonly("scanner_id", &ImageRef::scanner_id)
        .def_readonly("batch_id", &ImageRef::batch_id)
        .def_readonly("image_seq", &ImageRef::image_seq)
        .def("__str__", &ImageRef::str)
        .def("__repr__", [](const ImageRef& ref) { return "ImageRef('" + ref.str() + "')"; })
        .def("__eq__", [](const ImageRef& a, const ImageRef& b) { return a == b; })
        .def("__lt__", [](const ImageRef& a, const ImageRef& b) { return a < b; })
        .def("__hash__", [](const ImageRef& ref) { return std::hash<std::string>()(ref.str()); })
        .def_static("parse", &ImageRef::parse, py::arg("text"));

    py::class_<PartialSum>(m, "PartialSum")
        .def_readonly("known", &PartialSum::known)
        .def_readonly("has_unknown", &PartialSum::has_unknown)
        .def("__repr__", [](const PartialSum& sum) {
            return "PartialSum(known=" + std::to_string(sum.known) +
                   (sum.has_unknown ? ", has_unknown=True)" : ")");
        });

    py::class_<TallyVector>(m, "TallyVector")
        .def_readonly("trump", &TallyVector::trump)
        .def_readonly("biden", &TallyVector::biden)
        .def_readonly("jorgensen", &TallyVector::jorgensen)
        .def_readonly("write_in", &TallyVector::write_in)
        .def_readonly("undervote_blank", &TallyVector::undervote_blank)
        .def_readonly("overvote", &TallyVector::overvote)
        .def("candidate_total", &TallyVector::candidate_total);

    py::class_<BatchSheet>(m, "BatchSheet")
        .def_readonly("source_page", &BatchSheet::source_page)
        .def_readonly("location_or_scanner", &BatchSheet::location_or_scanner)
        .def_readonly("batch_label", &BatchSheet::batch_label)
        .def_readonly("mode", &BatchSheet::mode)
        .def_readonly("tally", &BatchSheet::tally);

    py::class_<AuditRow>(m, "AuditRow")
        .def_readonly("county", &AuditRow::county)
        .def_readonly("batch_name", &AuditRow::batch_name)
        .def_readonly("trump", &AuditRow::trump)
        .def_readonly("biden", &AuditRow::biden)
        .def_readonly("jorgensen", &AuditRow::jorgensen);

    py::class_<CastVoteRecord>(m, "CastVoteRecord")
        .def_readonly("cvr_id", &CastVoteRecord::cvr_id)
        .def_readonly("image", &CastVoteRecord::image)
        .def_readonly("mode", &CastVoteRecord::mode)
        .def_readonly("precinct", &CastVoteRecord::precinct)
        .def_readonly("selections", &CastVoteRecord::selections)
        .def_readonly("write_ins", &CastVoteRecord::write_ins);

    py::class_<ManifestEntry>(m, "ManifestEntry")
        .def_readonly("container_id", &ManifestEntry::container_id)
        .def_readonly("location", &ManifestEntry::location)
        .def_readonly("num_cards", &ManifestEntry::num_cards);

    py::class_<Manifest>(m, "Manifest")
        .def_readonly("entries", &Manifest::entries)
        .def("total_cards", &Manifest::total_cards);

    py::class_<PrecinctModeTally>(m, "PrecinctModeTally")
        .def_readonly("phase", &PrecinctModeTally::phase)
        .def_readonly("precinct", &PrecinctModeTally::precinct)
        .def_readonly("mode", &PrecinctModeTally::mode)
        .def_readonly("candidate", &PrecinctModeTally::candidate)
        .def_readonly("votes", &PrecinctModeTally::votes);

    py::class_<PollbookSummary>(m, "PollbookSummary")
        .def_readonly("precinct", &PollbookSummary::precinct)
        .def_readonly("mode", &PollbookSummary::mode)
        .def_readonly("num_participants", &PollbookSummary::num_participants);

    // Parsers: from files and from in-memory text.
    m.def("load_cvr_export", &load_cvr_export, py::arg("path"));
    m.def("load_batch_sheets", &load_batch_sheets, py::arg("path"));
    m.def("load_audit_spreadsheet", &load_audit_spreadsheet, py::arg("path"));
    m.def("load_manifest", &load_manifest, py::arg("path"));
    m.def("load_pollbook", &load_pollbook, py::arg("path"));
    m.def("load_precinct_results", &load_precinct_results, py::arg("path"));
    m.def("load_image_inventory", &load_image_inventory, py::arg("path"));
    m.def("load_claimed_groups", &load_claimed_groups, py::arg("path"));
    m.def(
        "parse_cvr_export",
        [](const std::string& text, const std::string& source) {
            return parse_text<std::vector<CastVoteRecord>>(
                [](std::istream& in, std::string src) { return parse_cvr_export(in, std::move(src)); },
                text, source);
        },
        py::arg("text"), py::arg("source") = "<string>");
    m.def(
        "parse_batch_sheets",
        [](const std::string& text, const std::string& source) {
            return parse_text<std::vector<BatchSheet>>(
                [](std::istream& in, std::string src) { return parse_batch_sheets(in, std::move(src)); },
                text, source);
        },
        py::arg("text"), py::arg("source") = "<string>");
    m.def(
        "parse_audit_spreadsheet",
        [](const std::string& text, const std::string& source) {
            return parse_text<std::vector<AuditRow>>(
                [](std::istream& in, std::string src) {
                    return parse_audit_spreadsheet(in, std::move(src));
                },
                text, source);
        },
        py::arg("text"), py::arg("source") = "<string>");

    // Audit reconciliation.
    py::class_<SheetRowMatch>(m, "SheetRowMatch")
        .def_readonly("sheet_index", &SheetRowMatch::sheet_index)
        .def_readonly("row_index", &SheetRowMatch::row_index)
        .def_readonly("sheet", &SheetRowMatch::sheet)
        .def_readonly("row", &SheetRowMatch::row)
        .def_readonly("log", &SheetRowMatch::log)
        .def_readonly("pass_number", &SheetRowMatch::pass);
    py::class_<AmbiguousSheet>(m, "AmbiguousSheet")
        .def_readonly("sheet", &AmbiguousSheet::sheet)
        .def_readonly("candidates", &AmbiguousSheet::candidates);
    py::class_<MatchResult>(m, "MatchResult")
        .def_readonly("matched", &MatchResult::matched)
        .def_readonly("missing_sheets", &MatchResult::missing_sheets)
        .def_readonly("unmatched_rows", &MatchResult::unmatched_rows)
        .def_readonly("ambiguous", &MatchResult::ambiguous);
    m.def("match_sheets", &match_sheets, py::arg("sheets"), py::arg("rows"));

    py::class_<OmissionImpact>(m, "OmissionImpact")
        .def_readonly("trump", &OmissionImpact::trump)
        .def_readonly("biden", &OmissionImpact::biden)
        .def_readonly("jorgensen", &OmissionImpact::jorgensen)
        .def_readonly("write_in", &OmissionImpact::write_in)
        .def_readonly("undervote_blank", &OmissionImpact::undervote_blank)
        .def_readonly("overvote", &OmissionImpact::overvote)
        .def("total_known", &OmissionImpact::total_known);
    m.def("omission_impact", &omission_impact, py::arg("missing"));

    m.def("discrepancy_rate", &discrepancy_rate, py::arg("error_votes"), py::arg("base_votes"));
    m.def("format_percent", &format_percent, py::arg("fraction"), py::arg("decimals") = 4);

    py::class_<DuplicateRowGroup>(m, "DuplicateRowGroup")
        .def_readonly("county", &DuplicateRowGroup::county)
        .def_readonly("trump", &DuplicateRowGroup::trump)
        .def_readonly("biden", &DuplicateRowGroup::biden)
        .def_readonly("jorgensen", &DuplicateRowGroup::jorgensen)
        .def_readonly("row_indices", &DuplicateRowGroup::row_indices);
    py::class_<DuplicateRowCensus>(m, "DuplicateRowCensus")
        .def_readonly("duplicate_row_count", &DuplicateRowCensus::duplicate_row_count)
        .def_readonly("total_rows", &DuplicateRowCensus::total_rows)
        .def_readonly("groups", &DuplicateRowCensus::groups);
    m.def("duplicate_row_census", &duplicate_row_census, py::arg("rows"));

    py::class_<CandidateTotals>(m, "CandidateTotals")
        .def_readonly("trump", &CandidateTotals::trump)
        .def_readonly("biden", &CandidateTotals::biden)
        .def_readonly("jorgensen", &CandidateTotals::jorgensen);
    m.def("audit_totals", &audit_totals, py::arg("rows"));

    // Duplicate forensics.
    py::class_<BatchId>(m, "BatchId")
        .def_readonly("scanner", &BatchId::scanner)
        .def_readonly("batch", &BatchId::batch)
        .def("__str__", &BatchId::str);
    py::class_<AlignedRun>(m, "AlignedRun")
        .def_readonly("batch_a", &AlignedRun::batch_a)
        .def_readonly("batch_b", &AlignedRun::batch_b)
        .def_readonly("a_start", &AlignedRun::a_start)
        .def_readonly("b_start", &AlignedRun::b_start)
        .def_readonly("length", &AlignedRun::length)
        .def_readonly("orientation", &AlignedRun::orientation)
        .def_readonly("rare_write_in_hits", &AlignedRun::rare_write_in_hits);
    py::class_<DuplicateGroup>(m, "DuplicateGroup")
        .def_readonly("members", &DuplicateGroup::members)
        .def_readonly("evidence", &DuplicateGroup::evidence)
        .def_readonly("run_length", &DuplicateGroup::run_length)
        .def_readonly("orientation", &DuplicateGroup::orientation)
        .def_readonly("rare_write_in_hits", &DuplicateGroup::rare_write_in_hits)
        .def_readonly("signature_multiplicity", &DuplicateGroup::signature_multiplicity);
    py::class_<SequenceScan>(m, "SequenceScan")
        .def_readonly("runs", &SequenceScan::runs)
        .def_readonly("groups", &SequenceScan::groups);
    m.def(
        "detect_sequence_runs",
        [](const std::vector<CastVoteRecord>& cvrs, std::uint32_t min_run,
           std::uint32_t rare_write_in_threshold) {
            return detect_sequence_runs(cvrs, min_run, rare_write_in_threshold);
        },
        py::arg("cvrs"), py::arg("min_run") = 10, py::arg("rare_write_in_threshold") = 5);

    py::class_<ClaimedGroup>(m, "ClaimedGroup")
        .def(py::init([](std::string group_id, std::vector<ImageRef> members) {
                 return ClaimedGroup{std::move(group_id), std::move(members)};
             }),
             py::arg("group_id"), py::arg("members"))
        .def_readonly("group_id", &ClaimedGroup::group_id)
        .def_readonly("members", &ClaimedGroup::members);
    py::class_<GroupVerification>(m, "GroupVerification")
        .def_readonly("claim", &GroupVerification::claim)
        .def_readonly("verified", &GroupVerification::verified)
        .def_readonly("failure_reason", &GroupVerification::failure_reason)
        .def_readonly("missing", &GroupVerification::missing)
        .def_readonly("group", &GroupVerification::group);
    m.def("detect_explicit_multiples", &detect_explicit_multiples, py::arg("claimed"),
          py::arg("cvrs"));

    py::class_<SampleSelection>(m, "SampleSelection")
        .def_readonly("seed", &SampleSelection::seed)
        .def_readonly("population", &SampleSelection::population)
        .def_readonly("indices", &SampleSelection::indices);
    m.def("sample_verification", &sample_verification, py::arg("population"), py::arg("sample_size"),
          py::arg("seed"));

    py::class_<ConfidenceBound>(m, "ConfidenceBound")
        .def_readonly("population", &ConfidenceBound::population)
        .def_readonly("sample", &ConfidenceBound::sample)
        .def_readonly("agreements", &ConfidenceBound::agreements)
        .def_readonly("confidence", &ConfidenceBound::confidence)
        .def_readonly("lower_bound", &ConfidenceBound::lower_bound)
        .def("__repr__", [](const ConfidenceBound& bound) {
            return "ConfidenceBound(lower_bound=" + std::to_string(bound.lower_bound) + ")";
        });
    m.def("hypergeometric_lcb", &hypergeometric_lcb, py::arg("population"), py::arg("sample"),
          py::arg("agreements"), py::arg("confidence") = 0.95);

    // Ballot accounting and cross-phase comparison.
    py::class_<AccountingLedger>(m, "AccountingLedger")
        .def_readonly("cvr_count_by_phase", &AccountingLedger::cvr_count_by_phase)
        .def_readonly("image_count_by_phase", &AccountingLedger::image_count_by_phase)
        .def_readonly("manifest_total", &AccountingLedger::manifest_total)
        .def_readonly("pollbook_total", &AccountingLedger::pollbook_total)
        .def_readonly("missing_image_refs", &AccountingLedger::missing_image_refs)
        .def_readonly("missing_batches", &AccountingLedger::missing_batches);
    py::class_<AccountingFinding>(m, "AccountingFinding")
        .def_readonly("check", &AccountingFinding::check)
        .def_readonly("detail", &AccountingFinding::detail)
        .def_readonly("magnitude", &AccountingFinding::magnitude);
    m.def(
        "count_reconciliation",
        [](const std::map<Phase, std::vector<CastVoteRecord>>& cvrs,
           const std::map<Phase, std::vector<ImageRef>>& images, std::optional<Manifest> manifest,
           std::optional<std::vector<PollbookSummary>> pollbook) {
            return count_reconciliation(cvrs, images, manifest, pollbook);
        },
        py::arg("cvrs_by_phase"), py::arg("images_by_phase"),
        py::arg("manifest") = std::nullopt, py::arg("pollbook") = std::nullopt);
    m.def("ledger_findings", &ledger_findings, py::arg("ledger"));

    py::class_<PhaseDelta>(m, "PhaseDelta")
        .def_readonly("precinct", &PhaseDelta::precinct)
        .def_readonly("mode", &PhaseDelta::mode)
        .def_readonly("candidate", &PhaseDelta::candidate)
        .def_readonly("values", &PhaseDelta::values)
        .def("delta", &PhaseDelta::delta, py::arg("a"), py::arg("b"))
        .def("relative_vs_original", &PhaseDelta::relative_vs_original, py::arg("phase"));
    py::class_<MissingCell>(m, "MissingCell")
        .def_readonly("precinct", &MissingCell::precinct)
        .def_readonly("mode", &MissingCell::mode)
        .def_readonly("candidate", &MissingCell::candidate)
        .def_readonly("absent_phases", &MissingCell::absent_phases);
    py::class_<PhaseComparison>(m, "PhaseComparison")
        .def_readonly("deltas", &PhaseComparison::deltas)
        .def_readonly("missing", &PhaseComparison::missing);
    m.def("phase_compare", &phase_compare, py::arg("results"));

    m.def(
        "tally_cvrs",
        [](const std::vector<CastVoteRecord>& cvrs, const std::string& contest) {
            return tally_cvrs(cvrs, contest);
        },
        py::arg("cvrs"), py::arg("contest") = "PRES");
    py::class_<RejectedGroup>(m, "RejectedGroup")
        .def_readonly("group", &RejectedGroup::group)
        .def_readonly("reason", &RejectedGroup::reason);
    py::class_<AdjustedTally>(m, "AdjustedTally")
        .def_readonly("adjusted", &AdjustedTally::adjusted)
        .def_readonly("removed", &AdjustedTally::removed)
        .def_readonly("rejected", &AdjustedTally::rejected);
    m.def(
        "dedup_adjusted_tally",
        [](const std::vector<CastVoteRecord>& cvrs, const std::vector<DuplicateGroup>& groups,
           const std::string& contest) { return dedup_adjusted_tally(cvrs, groups, contest); },
        py::arg("cvrs"), py::arg("groups"), py::arg("contest") = "PRES");

    // Fixture generation.
    m.def("preset_names", &preset_names);
    m.def(
        "generate_fixture",
        [](const std::string& preset, const std::filesystem::path& dir,
           std::optional<std::uint64_t> seed) {
            AnomalySpec spec = preset_spec(preset);
            if (seed) spec.seed = *seed;
            generate_fixture_to_dir(spec, dir);
        },
        py::arg("preset"), py::arg("dir"), py::arg("seed") = std::nullopt,
        "Write a built-in synthetic dataset (with ground_truth.json) to a directory.");

    m.attr("__version__") = "0.1.0";
}
