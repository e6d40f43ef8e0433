#include "canvass/accounting.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace canvass {

// ---------------------------------------------------------------------------
// count_reconciliation
// ---------------------------------------------------------------------------

PhaseRecordSet summarize_cvrs(const std::vector<CastVoteRecord>& cvrs) {
    PhaseRecordSet set;
    set.cvr_count = static_cast<std::int64_t>(cvrs.size());
    set.cvr_refs.reserve(cvrs.size());
    for (const auto& cvr : cvrs) set.cvr_refs.push_back(cvr.image);
    return set;
}

namespace {

std::uint64_t pack_batch(const ImageRef& ref) {
    return (static_cast<std::uint64_t>(ref.scanner_id) << 32) | ref.batch_id;
}

}  // namespace

AccountingLedger count_reconciliation(const std::map<Phase, PhaseRecordSet>& cvrs_by_phase,
                                      const std::map<Phase, std::vector<ImageRef>>& images_by_phase,
                                      const std::optional<Manifest>& manifest,
                                      const std::optional<std::vector<PollbookSummary>>& pollbook) {
    AccountingLedger ledger;
    if (manifest) {
        ledger.has_manifest = true;
        ledger.manifest_total = manifest->total_cards();
    }
    if (pollbook) {
        ledger.has_pollbook = true;
        for (const auto& book : *pollbook) ledger.pollbook_total += book.num_participants;
    }

    for (const auto& [phase, records] : cvrs_by_phase) {
        ledger.cvr_count_by_phase[phase] = records.cvr_count;

        auto images_it = images_by_phase.find(phase);
        if (images_it == images_by_phase.end()) continue;
        const auto& inventory = images_it->second;
        ledger.image_count_by_phase[phase] = static_cast<std::int64_t>(inventory.size());

        std::set<ImageRef> present(inventory.begin(), inventory.end());
        std::unordered_set<std::uint64_t> batches_with_images;
        batches_with_images.reserve(inventory.size() / 32 + 8);
        for (const auto& ref : inventory) batches_with_images.insert(pack_batch(ref));

        auto& missing_refs = ledger.missing_image_refs[phase];
        std::set<std::uint64_t> cvr_batches, empty_batches;
        for (const auto& ref : records.cvr_refs) {
            if (!present.count(ref)) missing_refs.push_back(ref);
            std::uint64_t batch = pack_batch(ref);
            cvr_batches.insert(batch);
            if (!batches_with_images.count(batch)) empty_batches.insert(batch);
        }
        std::sort(missing_refs.begin(), missing_refs.end());
        auto& missing_batches = ledger.missing_batches[phase];
        for (std::uint64_t packed : empty_batches) {
            missing_batches.push_back(
                {static_cast<std::uint32_t>(packed >> 32), static_cast<std::uint32_t>(packed)});
        }
    }
    for (const auto& [phase, inventory] : images_by_phase) {
        if (!ledger.image_count_by_phase.count(phase)) {
            ledger.image_count_by_phase[phase] = static_cast<std::int64_t>(inventory.size());
        }
    }
    return ledger;
}

AccountingLedger count_reconciliation(const std::map<Phase, std::vector<CastVoteRecord>>& cvrs_by_phase,
                                      const std::map<Phase, std::vector<ImageRef>>& images_by_phase,
                                      const std::optional<Manifest>& manifest,
                                      const std::optional<std::vector<PollbookSummary>>& pollbook) {
    std::map<Phase, PhaseRecordSet> summaries;
    for (const auto& [phase, cvrs] : cvrs_by_phase) summaries[phase] = summarize_cvrs(cvrs);
    return count_reconciliation(summaries, images_by_phase, manifest, pollbook);
}

std::vector<AccountingFinding> ledger_findings(const AccountingLedger& ledger) {
    std::vector<AccountingFinding> findings;
    auto mismatch = [&](const std::string& check, const std::string& detail, std::int64_t a,
                        std::int64_t b) {
        if (a == b) return;
        findings.push_back({check, detail + ": " + std::to_string(a) + " vs " + std::to_string(b),
                            a > b ? a - b : b - a});
    };

    // Per-phase: every pair of available totals must agree.
    for (const auto& [phase, cvr_count] : ledger.cvr_count_by_phase) {
        std::string tag(to_string(phase));
        auto image_it = ledger.image_count_by_phase.find(phase);
        if (image_it != ledger.image_count_by_phase.end()) {
            mismatch("cvr_vs_image_count", tag + " CVR count vs image count", cvr_count,
                     image_it->second);
        }
        if (ledger.has_manifest) {
            mismatch("cvr_vs_manifest", tag + " CVR count vs manifest total", cvr_count,
                     ledger.manifest_total);
        }
        if (ledger.has_pollbook) {
            mismatch("cvr_vs_pollbook", tag + " CVR count vs pollbook total", cvr_count,
                     ledger.pollbook_total);
        }
        if (image_it != ledger.image_count_by_phase.end()) {
            if (ledger.has_manifest) {
                mismatch("image_vs_manifest", tag + " image count vs manifest total",
                         image_it->second, ledger.manifest_total);
            }
            if (ledger.has_pollbook) {
                mismatch("image_vs_pollbook", tag + " image count vs pollbook total",
                         image_it->second, ledger.pollbook_total);
            }
        }
    }
    if (ledger.has_manifest && ledger.has_pollbook) {
        mismatch("manifest_vs_pollbook", "manifest total vs pollbook total", ledger.manifest_total,
                 ledger.pollbook_total);
    }

    // Cross-phase: electronic counts of one physical election must agree.
    for (auto a = ledger.cvr_count_by_phase.begin(); a != ledger.cvr_count_by_phase.end(); ++a) {
        for (auto b = std::next(a); b != ledger.cvr_count_by_phase.end(); ++b) {
            mismatch("cross_phase_cvr_count",
                     std::string(to_string(a->first)) + " vs " + std::string(to_string(b->first)) +
                         " CVR count",
                     a->second, b->second);
        }
    }

    for (const auto& [phase, refs] : ledger.missing_image_refs) {
        if (refs.empty()) continue;
        findings.push_back({"missing_image_files",
                            std::string(to_string(phase)) + ": " + std::to_string(refs.size()) +
                                " CVR-referenced image files missing from the inventory",
                            static_cast<std::int64_t>(refs.size())});
    }
    for (const auto& [phase, batches] : ledger.missing_batches) {
        if (batches.empty()) continue;
        std::string examples;
        for (std::size_t i = 0; i < batches.size() && i < 4; ++i) {
            if (i) examples += ", ";
            examples += "scanner " + std::to_string(batches[i].scanner) + " batch " +
                        std::to_string(batches[i].batch);
        }
        if (batches.size() > 4) examples += ", ...";
        findings.push_back({"missing_image_batches",
                            std::string(to_string(phase)) + ": " + std::to_string(batches.size()) +
                                " batches are referenced by CVRs but have no images (" + examples +
                                ")",
                            static_cast<std::int64_t>(batches.size())});
    }
    return findings;
}

// ---------------------------------------------------------------------------
// phase_compare
// ---------------------------------------------------------------------------

std::optional<std::int64_t> PhaseDelta::delta(Phase a, Phase b) const {
    auto ia = values.find(a);
    auto ib = values.find(b);
    if (ia == values.end() || ib == values.end()) return std::nullopt;
    return ia->second - ib->second;
}

std::optional<double> PhaseDelta::relative_vs_original(Phase phase) const {
    auto diff = delta(phase, Phase::Original);
    auto orig = values.find(Phase::Original);
    if (!diff || orig == values.end() || orig->second == 0) return std::nullopt;
    return static_cast<double>(*diff) / static_cast<double>(orig->second);
}

PhaseComparison phase_compare(const std::vector<PrecinctModeTally>& results) {
    std::map<std::tuple<std::string, VotingMode, std::string>, std::map<Phase, std::int64_t>> cells;
    for (const auto& row : results) {
        cells[{row.precinct, row.mode, row.candidate}][row.phase] = row.votes;
    }
    std::set<Phase> phases_seen;
    for (const auto& [key, values] : cells) {
        for (const auto& [phase, votes] : values) phases_seen.insert(phase);
    }

    PhaseComparison comparison;
    for (const auto& [key, values] : cells) {
        const auto& [precinct, mode, candidate] = key;
        if (values.size() >= 2) {
            PhaseDelta delta;
            delta.precinct = precinct;
            delta.mode = mode;
            delta.candidate = candidate;
            delta.values = values;
            comparison.deltas.push_back(std::move(delta));
        }
        if (values.size() < phases_seen.size()) {
            MissingCell missing;
            missing.precinct = precinct;
            missing.mode = mode;
            missing.candidate = candidate;
            for (Phase phase : phases_seen) {
                if (!values.count(phase)) missing.absent_phases.push_back(phase);
            }
            comparison.missing.push_back(std::move(missing));
        }
    }
    return comparison;
}

// ---------------------------------------------------------------------------
// tally_cvrs / dedup_adjusted_tally
// ---------------------------------------------------------------------------

std::map<std::string, std::int64_t> tally_cvrs(const std::vector<CastVoteRecord>& cvrs,
                                               std::string_view contest) {
    std::map<std::string, std::int64_t> totals;
    for (const auto& cvr : cvrs) {
        if (const std::string* selection = cvr.selection_for(contest)) {
            if (!selection->empty()) ++totals[*selection];
        }
    }
    return totals;
}

AdjustedTally dedup_adjusted_tally(const std::vector<CastVoteRecord>& cvrs,
                                   const std::vector<DuplicateGroup>& groups,
                                   std::string_view contest) {
    AdjustedTally result;
    result.adjusted = tally_cvrs(cvrs, contest);

    std::unordered_map<std::string, std::vector<std::size_t>> by_ref;
    for (std::size_t i = 0; i < cvrs.size(); ++i) by_ref[cvrs[i].image.str()].push_back(i);

    std::unordered_set<std::string> consumed;
    for (const auto& group : groups) {
        std::vector<std::size_t> matched;
        bool missing = false, overlap = false;
        for (const auto& ref : group.members) {
            std::string key = ref.str();
            auto it = by_ref.find(key);
            if (it == by_ref.end()) {
                missing = true;
                continue;
            }
            if (consumed.count(key)) overlap = true;
            matched.insert(matched.end(), it->second.begin(), it->second.end());
        }
        if (missing) {
            result.rejected.push_back({group, "missing_reference"});
            continue;
        }
        if (overlap) {
            result.rejected.push_back({group, "overlaps_prior_group"});
            continue;
        }
        VoteSignature sig = signature_of(cvrs[matched.front()]);
        bool uniform = true;
        for (std::size_t idx : matched) {
            if (signature_of(cvrs[idx]) != sig) uniform = false;
        }
        if (!uniform) {
            result.rejected.push_back({group, "conflicting_signatures"});
            continue;
        }
        for (const auto& ref : group.members) consumed.insert(ref.str());

        // The group is one physical sheet: keep one contribution, remove
        // the rest.
        if (const std::string* selection = cvrs[matched.front()].selection_for(contest)) {
            if (!selection->empty() && matched.size() >= 2) {
                std::int64_t extra = static_cast<std::int64_t>(matched.size()) - 1;
                result.adjusted[*selection] -= extra;
                result.removed[*selection] += extra;
            }
        }
    }
    return result;
}

}  // namespace canvass
