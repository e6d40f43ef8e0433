#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "canvass/accounting.hpp"
#include "canvass/audit_reconcile.hpp"
#include "canvass/dup_forensics.hpp"

namespace canvass::report {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolName = "canvasscheck";
inline constexpr std::string_view kToolVersion = "0.1.0";

// A report is one JSON document. Every section builder appends findings
// (the discrepancies that drive exit code 1) and a structured section;
// the plain-text rendering is a pure projection of the JSON document.
nlohmann::json new_report(nlohmann::json config);

void add_finding(nlohmann::json& report, std::string_view check, std::string detail,
                 nlohmann::json data = nlohmann::json::object());

void add_reconcile_section(nlohmann::json& report, const std::vector<BatchSheet>& sheets,
                           const std::vector<AuditRow>& rows);
void add_account_section(nlohmann::json& report, const AccountingLedger& ledger);
void add_phase_section(nlohmann::json& report, const PhaseComparison& comparison);
void add_sequence_section(nlohmann::json& report, std::string_view phase_tag,
                          const SequenceScan& scan);
void add_verify_section(nlohmann::json& report, std::string_view phase_tag,
                        const std::vector<GroupVerification>& checks);
void add_tally_section(nlohmann::json& report, std::string_view phase_tag,
                       const std::map<std::string, std::int64_t>& tally,
                       const AdjustedTally* adjusted);
void add_lcb_section(nlohmann::json& report, const ConfidenceBound& bound);
void add_sample_section(nlohmann::json& report, const SampleSelection& selection);

// 0 = clean, 1 = findings present.
int exit_code(const nlohmann::json& report);

std::string to_json_text(const nlohmann::json& report);
std::string to_plain_text(const nlohmann::json& report);

}  // namespace canvass::report
